"""Tensor (spinorless) formulation of the Dirac equation: frames, densities, spectra."""

from . import algebra, lagrangian, planar, radial
from .algebra import (
    Bispinor,
    DegenerateBispinor,
    FrameTensors,
    LorentzTransform,
    UnsupportedTransform,
    apply_to_bispinor,
    apply_to_frame,
    bispinor_to_tensors,
    boost,
    rotation,
    space_inversion,
    tensors_to_bispinor,
    time_inversion,
)

__version__ = "0.1.0"
