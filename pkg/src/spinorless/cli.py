"""Command-line entry point.

Subcommands: ``frame``, ``identity``, ``spectrum2d`` and ``scaling``.
Exit codes: 0 success, 2 invalid input, 3 numerical failure or too
little data. Data goes to stdout (or ``--csv``), diagnostics to stderr.
Defaults can be overridden by ``--config FILE`` with ``key=value`` lines;
explicit flags win over the file.
"""

import argparse
import csv
import io
import sys
import warnings
from dataclasses import asdict, dataclass, field

import numpy as np

from . import algebra, lagrangian, planar, radial

OK, INVALID, FAILED = 0, 2, 3


class ConfigError(ValueError):
    pass


def fmt(x):
    return f"{x:.17g}"


def fmt_vec(v):
    return ",".join(fmt(float(c) + 0.0) for c in v)


@dataclass
class RunConfig:
    """Validated parameters of one run (unused fields keep defaults)."""

    subcommand: str
    seed: int = 0
    csv: str | None = None
    # frame
    psi: str | None = None
    inverse: bool = False
    frame: str | None = None
    roundtrip: bool = False
    tau: int = 1
    # identity
    h: float = 0.05
    samples: int = 200
    fields: int = 1
    mass: float = 1.0
    constant: bool = False
    # spectrum2d
    grid: int = 32
    box: float = 30.0
    alpha: float = 0.2
    well: str = "gauss"
    potential: str | None = None
    sign: int = 1
    count: int = 8
    weyl_eps: float = 1.25
    weyl_widths: list = field(default_factory=lambda: [8.0, 16.0, 32.0])
    weyl_box: float = 100.0
    weyl_grid: int = 401
    # scaling
    k: int = 1
    side: str = "electron"
    alphas: list = field(default_factory=lambda: [0.2, 0.15, 0.1, 0.07, 0.05])
    depth: float | None = None
    radial_h: float = 0.0125
    extent: float = 30.0

    def validate(self):
        def positive(name):
            v = getattr(self, name)
            if not (np.isfinite(v) and v > 0):
                raise ConfigError(f"{name} must be positive, got {v}")

        if self.tau not in (1, -1):
            raise ConfigError("tau must be +1 or -1")
        if self.sign not in (1, -1):
            raise ConfigError("sign must be + or -")
        positive("mass")
        if self.subcommand == "frame":
            if self.inverse == (self.psi is not None):
                raise ConfigError("give either --psi or --inverse --frame FILE")
            if self.inverse and not self.frame:
                raise ConfigError("--inverse needs --frame FILE")
        elif self.subcommand == "identity":
            positive("h")
            if self.samples < 1 or self.fields < 1:
                raise ConfigError("samples and fields must be at least 1")
        elif self.subcommand == "spectrum2d":
            positive("box")
            if self.grid < 8:
                raise ConfigError("grid must be at least 8")
            if self.well not in ("gauss", "zero"):
                raise ConfigError("well must be gauss or zero")
            if self.potential is None and self.well == "gauss":
                positive("alpha")
            if self.count < 1:
                raise ConfigError("count must be at least 1")
            if any(not w > 0 for w in self.weyl_widths):
                raise ConfigError("Weyl widths must be positive")
            positive("weyl_box")
            if self.weyl_grid < 8:
                raise ConfigError("weyl_grid must be at least 8")
        elif self.subcommand == "scaling":
            if self.side not in ("electron", "positron"):
                raise ConfigError("side must be electron or positron")
            if not self.alphas or any(not (0 < a < 1) for a in self.alphas):
                raise ConfigError("alphas must lie in (0, 1)")
            if self.depth is not None:
                positive("depth")
            positive("radial_h")
            if self.extent < 8:
                raise ConfigError("extent must be at least 8 (r_max >= 8/alpha)")
        return self


def _float_list(text):
    try:
        return [float(t) for t in str(text).split(",") if t.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a list of numbers: {text}") from exc


def _sign(text):
    t = str(text).strip()
    if t in ("+", "+1", "1"):
        return 1
    if t in ("-", "-1"):
        return -1
    raise argparse.ArgumentTypeError(f"sign must be + or -, got {text}")


def _bool(text):
    t = str(text).strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"not a boolean: {text}")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def build_parser():
    p = _Parser(prog="spinorless", description=__doc__.splitlines()[0])
    p.add_argument("--config", help="file of key=value defaults")
    sub = p.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)

    f = sub.add_parser("frame", help="bispinor <-> frame maps")
    f.add_argument("--psi", help="8 floats: re,im of xi1, xi2, eta1, eta2")
    f.add_argument("--inverse", action="store_true")
    f.add_argument("--frame", help="frame file (rho=, theta=, tau=, f0=, f1=, f2=)")
    f.add_argument("--roundtrip", action="store_true")
    f.add_argument("--tau", type=int, default=1)

    i = sub.add_parser("identity", help="Lagrangian density identity residuals")
    i.add_argument("--seed", type=int, default=0)
    i.add_argument("--h", type=float, default=0.05)
    i.add_argument("--samples", type=int, default=200)
    i.add_argument("--fields", type=int, default=1)
    i.add_argument("--mass", type=float, default=1.0)
    i.add_argument("--tau", type=int, default=1)
    i.add_argument("--constant", action="store_true", help="constant-field smoke test")
    i.add_argument("--csv")

    s = sub.add_parser("spectrum2d", help="planar pencil gap spectrum")
    s.add_argument("--grid", type=int, default=32)
    s.add_argument("--box", type=float, default=30.0)
    s.add_argument("--alpha", type=float, default=0.2)
    s.add_argument("--well", default="gauss")
    s.add_argument("--potential", help="CSV x1,x2,phi,a1,a2 (overrides --well)")
    s.add_argument("--sign", type=_sign, default=1)
    s.add_argument("--mass", type=float, default=1.0)
    s.add_argument("--count", type=int, default=8)
    s.add_argument("--weyl-eps", dest="weyl_eps", type=float, default=1.25)
    s.add_argument("--weyl-widths", dest="weyl_widths", type=_float_list, default="8,16,32",
                   help="packet widths in grid units")
    s.add_argument("--weyl-box", dest="weyl_box", type=float, default=100.0)
    s.add_argument("--weyl-grid", dest="weyl_grid", type=int, default=401)
    s.add_argument("--csv")

    c = sub.add_parser("scaling", help="model vs Klein-Gordon alpha sweep")
    c.add_argument("--k", type=int, default=1)
    c.add_argument("--sign", type=_sign, default=1)
    c.add_argument("--side", default="electron")
    c.add_argument("--alphas", type=_float_list, default="0.2,0.15,0.1,0.07,0.05")
    c.add_argument("--depth", type=float, default=None)
    c.add_argument("--h", dest="radial_h", type=float, default=0.0125)
    c.add_argument("--extent", type=float, default=30.0)
    c.add_argument("--mass", type=float, default=1.0)
    c.add_argument("--csv")
    return p, {"frame": f, "identity": i, "spectrum2d": s, "scaling": c}


def read_config_file(path):
    values = {}
    with open(path) as fh:
        for n, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{n}: expected key=value")
            key, val = (t.strip() for t in line.split("=", 1))
            values[key.replace("-", "_")] = val
    return values


_FLAGS = ("inverse", "roundtrip", "constant")


def parse_config(argv):
    parser, subs = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        try:
            values = read_config_file(args.config)
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from exc
        sp = subs[args.subcommand]
        known = {a.dest for a in sp._actions}
        unknown = set(values) - known
        if unknown:
            raise ConfigError(f"unknown config keys for {args.subcommand}: {sorted(unknown)}")
        defaults = {}
        for key, val in values.items():
            defaults[key] = _bool(val) if key in _FLAGS else val
        sp.set_defaults(**defaults)
        args = parser.parse_args(argv)
    opts = {k: v for k, v in vars(args).items() if k != "config"}
    return RunConfig(**opts).validate()


# ---------------------------------------------------------------------------
# frame


def read_frame_file(path):
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read frame file: {exc}") from exc
    values = {}
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"malformed frame line: {line!r}")
        key, val = (t.strip() for t in line.split("=", 1))
        values[key] = val
    try:
        rho = float(values["rho"])
        theta = float(values["theta"])
        tau = int(float(values.get("tau", "1")))
        vecs = [np.array([float(t) for t in values[f"f{k}"].split(",")]) for k in range(3)]
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"malformed frame file: {exc}") from exc
    if any(v.shape != (4,) for v in vecs):
        raise ConfigError("frame vectors need 4 components")
    try:
        f3 = algebra.spin_vector(*vecs)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    return algebra.FrameTensors(rho, theta, *vecs, f3, tau=tau)


def frame_lines(T):
    lines = [f"rho={fmt(T.rho)}", f"theta={fmt(T.theta)}", f"tau={T.tau:+d}"]
    lines += [f"f{k}={fmt_vec(v)}" for k, v in enumerate(T.frame)]
    return lines


def cmd_frame(cfg, out):
    if not cfg.inverse:
        try:
            vals = [float(t) for t in cfg.psi.split(",")]
        except ValueError as exc:
            raise ConfigError(f"bad --psi: {exc}") from exc
        if len(vals) != 8:
            raise ConfigError("--psi needs 8 floats")
        psi = algebra.Bispinor.from_reals(vals)
        try:
            T = algebra.bispinor_to_tensors(psi, cfg.tau)
        except algebra.DegenerateBispinor as exc:
            raise ConfigError(f"degenerate bispinor: {exc}") from exc
        print("\n".join(frame_lines(T)), file=out)
        if cfg.roundtrip:
            back = algebra.tensors_to_bispinor(T).as_array()
            a = psi.as_array()
            err = min(np.abs(back - a).max(), np.abs(back + a).max()) / np.abs(a).max()
            print(f"roundtrip_error={fmt(err)}", file=out)
        return OK

    T = read_frame_file(cfg.frame)
    try:
        psi = algebra.tensors_to_bispinor(T)
    except ValueError as exc:
        raise ConfigError(f"invalid frame: {exc}") from exc
    a = psi.as_array()
    print("psi=" + fmt_vec(np.column_stack([a.real, a.imag]).ravel()), file=out)
    if cfg.roundtrip:
        T2 = algebra.bispinor_to_tensors(psi, T.tau)
        err = max(abs(T2.rho - T.rho) / T.rho, abs(algebra.wrap_angle(T2.theta - T.theta)),
                  np.abs(T2.frame - T.frame).max())
        print(f"roundtrip_error={fmt(err)}", file=out)
    return OK


# ---------------------------------------------------------------------------
# identity


def cmd_identity(cfg, out):
    rng = np.random.default_rng(cfg.seed)
    rows, ratios, skipped, total = [], [], 0, 0
    for n in range(cfg.fields):
        if cfg.constant:
            field_ = lagrangian.constant_field(np.array([1, 0.2, 0.7j, 0.1]) + 0.1 * rng.normal(size=4))
            pot = lagrangian.constant_potential(0.3 * rng.normal(size=4))
        else:
            field_ = lagrangian.random_field(rng)
            pot = lagrangian.random_potential(rng)
        pts = lagrangian.sample_points(rng, cfg.samples)
        ratio, coarse, fine = lagrangian.convergence_ratio(field_, pot, pts, cfg.h, cfg.mass, cfg.tau)
        skipped += coarse.n_skipped
        total += cfg.samples
        ratios.append(ratio)
        print(f"field={n} residual_h={fmt(coarse.max)} residual_h2={fmt(fine.max)} "
              f"mean_h={fmt(coarse.mean)} ratio={fmt(ratio)} skipped={coarse.n_skipped}", file=out)
        for x, l, r in zip(coarse.points, coarse.lhs, coarse.rhs):
            rows.append([*x, l, r, abs(l - r)])
        if cfg.constant:
            print(f"constant_residual={fmt(max(coarse.max, fine.max))}", file=out)
    if cfg.csv:
        with open(cfg.csv, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["x0", "x1", "x2", "x3", "lhs", "rhs", "residual"])
            for row in rows:
                w.writerow([fmt(v) for v in row])
    if skipped > 0.01 * total:
        print(f"degenerate sample fraction {skipped / total:.3g} exceeds 1%", file=sys.stderr)
        return FAILED
    if cfg.constant:
        return OK if all(abs(r[-1]) < 1e-12 for r in rows) else FAILED
    good = all(np.isfinite(r) and 3 <= r <= 5 for r in ratios)
    print(f"converged={'yes' if good else 'no'}", file=out)
    return OK if good else FAILED


# ---------------------------------------------------------------------------
# spectrum2d


def cmd_spectrum2d(cfg, out):
    if cfg.potential:
        try:
            grid, pot = planar.read_potential_csv(cfg.potential)
        except (OSError, ValueError) as exc:
            raise ConfigError(f"bad potential file: {exc}") from exc
    else:
        grid = planar.PlanarGrid(cfg.box, cfg.grid)
        if cfg.well == "zero":
            pot = planar.PlanarPotential.zero(grid)
        else:
            # the sampled well can miss its peak, so check the exact supremum
            if cfg.alpha**2 >= cfg.mass:
                raise ConfigError(f"restriction {planar.RESTRICTION} violated: "
                                  f"sup|eΦ| = {cfg.alpha**2:.6g}, m = {cfg.mass}")
            pot = planar.PlanarPotential.gaussian_well(grid, cfg.alpha)
            if cfg.box < 6 / cfg.alpha:
                print(f"warning: box {cfg.box} < 6/alpha = {6 / cfg.alpha:.4g}", file=sys.stderr)
    try:
        pencil = planar.assemble_pencil(grid, pot, cfg.mass, cfg.sign)
    except planar.RestrictionViolated as exc:
        raise ConfigError(str(exc)) from exc

    dec = planar.reciprocal_eigh(pencil)
    rows = []
    for side in ("electron", "positron"):
        gs = planar.gap_eigenpairs(pencil, cfg.count, side, decomposition=dec)
        rows += [(e, r, side) for e, r in zip(gs.eps, gs.residuals)]

    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["epsilon", "residual", "side"])
    for e, r, side in rows:
        w.writerow([fmt(e), fmt(r), side])
    if cfg.csv:
        with open(cfg.csv, "w", newline="") as fh:
            fh.write(buf.getvalue())
    else:
        out.write(buf.getvalue())

    # Weyl probes live on their own free-field grid
    wgrid = planar.PlanarGrid(cfg.weyl_box, cfg.weyl_grid)
    free = planar.assemble_pencil(wgrid, planar.PlanarPotential.zero(wgrid), cfg.mass, cfg.sign)
    weps = cfg.weyl_eps * cfg.mass
    print("weyl_width,weyl_eps,weyl_residual,resolved", file=out)
    for width in cfg.weyl_widths:
        try:
            pk = planar.weyl_packet(wgrid, weps, cfg.mass, cfg.sign, width=width)
            res, ok = planar.weyl_residual(pk, free, weps), "yes"
        except ValueError as exc:
            print(f"weyl width {width}: {exc}", file=sys.stderr)
            res, ok = float("nan"), "no"
        print(f"{fmt(width)},{fmt(weps)},{fmt(res)},{ok}", file=out)

    st = planar.interval_statistics(pencil, decomposition=dec)
    print(f"delta_box={fmt(st.delta_box)} max_gap={fmt(st.max_gap)} n_inside={st.n_inside} "
          f"n_gap={st.n_gap} n_polluting={st.n_polluting}", file=out)
    return OK


# ---------------------------------------------------------------------------
# scaling


def default_depth(channel):
    """Depth 1 binds the n = 0 Klein-Gordon partner; higher |n| needs a deeper well."""
    return 1.0 if channel.n_kg == 0 else 4.0


def cmd_scaling(cfg, out):
    channel = radial.RadialChannel(cfg.k, cfg.sign, cfg.side)
    depth = cfg.depth if cfg.depth is not None else default_depth(channel)
    if cfg.side == "positron":
        depth = -depth

    def prof(s):
        return depth * radial.gaussian_profile(s)

    def dprof(s):
        return depth * radial.gaussian_profile_derivative(s)

    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        try:
            res = radial.scaling_sweep(channel, cfg.alphas, cfg.mass, prof, dprof,
                                       cfg.radial_h, cfg.extent)
        except radial.InsufficientData as exc:
            print(str(exc), file=sys.stderr)
            return FAILED
    for wmsg in caught:
        print(f"warning: {wmsg.message}", file=sys.stderr)

    cols = ["alpha", "eps_model", "eps_kg", "eps_pauli_plus_m", "delta", "richardson_err"]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for row in res.rows:
        w.writerow([fmt(row[c]) for c in cols])
    if res.exact_coincidence:
        fit = f"exponent=exact-coincidence stderr=nan usable_alphas={res.usable}"
    else:
        fit = f"exponent={fmt(res.exponent)} stderr={fmt(res.stderr)} usable_alphas={res.usable}"
    extra = (f"pauli_exponent={fmt(res.pauli_exponent)} "
             f"e_over_alpha2_spread={fmt(res.e_spread)} depth={fmt(abs(depth))} "
             f"reliable={'yes' if res.reliable else 'no'}")
    if cfg.csv:
        with open(cfg.csv, "w", newline="") as fh:
            fh.write(buf.getvalue())
    else:
        out.write(buf.getvalue())
    print(fit, file=out)
    print(extra, file=out)
    return OK if res.reliable else FAILED


COMMANDS = {
    "frame": cmd_frame,
    "identity": cmd_identity,
    "spectrum2d": cmd_spectrum2d,
    "scaling": cmd_scaling,
}


def main(argv=None, out=None):
    out = sys.stdout if out is None else out
    try:
        cfg = parse_config(sys.argv[1:] if argv is None else argv)
        return COMMANDS[cfg.subcommand](cfg, out)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return INVALID
    except (np.linalg.LinAlgError, RuntimeError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return FAILED


def config_dict(cfg):
    return asdict(cfg)


if __name__ == "__main__":
    sys.exit(main())
