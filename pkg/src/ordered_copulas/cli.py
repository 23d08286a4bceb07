"""Command-line front end.

Exit status: 0 success, 2 usage or config error, 3 mathematical
precondition failure.
"""

from __future__ import annotations

import argparse
import io
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .bounds import lower_bound_L, rogers_P, upper_bound
from .config import ConfigError, load_config, parse_copula, parse_diagonal
from .copula import compatibility_defect, validate_diagonal
from .dependence import min_kendall_tau, min_spearman_rho
from .distcore import Exponential, Normal, Power, Uniform, make_ordered_pair
from .errors import OrderedCopulaError, Unsupported
from .maxent import entropy_condition_value, maxent_joint_density
from .sampling import RngStream, sample_comonotone, sample_L_unimodal, sample_maxent

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_MATH = 3
FAMILIES = ("power", "normal-shift", "exp-ratio")
LAWS = ("comonotone", "L", "maxent")


class UsageError(Exception):
    pass


def fmt(v) -> str:
    if v is None or (isinstance(v, float) and np.isnan(v)):
        return "nan"
    return format(float(v), ".12g")


def _threads() -> int:
    raw = os.environ.get("ORDERED_COPULAS_THREADS", "1")
    try:
        k = int(raw)
    except ValueError:
        raise UsageError(f"ORDERED_COPULAS_THREADS must be a positive integer, got {raw!r}")
    if k < 1:
        raise UsageError("ORDERED_COPULAS_THREADS must be a positive integer")
    return k


def _positive(name: str, value: int | None, default: int | None = None) -> int:
    if value is None:
        if default is None:
            raise UsageError(f"--{name} is required")
        return default
    if value < 1:
        raise UsageError(f"--{name} must be at least 1")
    return value


def _pair_from(args):
    if not args.config:
        raise UsageError("--config is required")
    cfg = load_config(args.config)
    return cfg, make_ordered_pair(cfg.f1, cfg.f2)


def cmd_bounds(args, out) -> int:
    grid = _positive("grid", args.grid, 11)
    cfg, pair = _pair_from(args)
    lo, hi = pair.bounds
    xs = np.linspace(lo, hi, grid)
    x1, x2 = np.meshgrid(xs, xs, indexing="ij")
    x1, x2 = x1.ravel(), x2.ravel()
    L = lower_bound_L(pair)(x1, x2)
    M = upper_bound(pair)(x1, x2)
    P = rogers_P(pair)(x1, x2)
    out.write(f"# config={cfg.path} grid={grid}\n")
    out.write("x1,x2,L,upper,P\n")
    for row in zip(x1, x2, np.atleast_1d(L), np.atleast_1d(M), np.atleast_1d(P)):
        out.write(",".join(fmt(v) for v in row) + "\n")
    return EXIT_OK


def _curve_pair(family: str, p: float):
    if family == "power":
        return make_ordered_pair(Uniform(0.0, 1.0), Power(p))
    if family == "normal-shift":
        return make_ordered_pair(Normal(p, 1.0), Normal(0.0, 1.0))
    return make_ordered_pair(Exponential(p), Exponential(1.0))


def curve_parameters(family: str, points: int) -> np.ndarray:
    if family == "normal-shift":
        return np.linspace(0.0, 4.0, points)
    return np.arange(1, points + 1) / points


def curve_row(family: str, p: float) -> tuple[float, float, float]:
    pair = _curve_pair(family, p)
    if pair.identical:
        return p, 1.0, 1.0
    tau = min_kendall_tau(pair)
    try:
        rho = min_spearman_rho(pair)
    except Unsupported:
        rho = float("nan")
    return p, tau, rho


def cmd_tau_rho_curve(args, out) -> int:
    if args.family not in FAMILIES:
        raise UsageError(f"--family must be one of {', '.join(FAMILIES)}")
    points = _positive("points", args.points, 50)
    params = curve_parameters(args.family, points)
    with ThreadPoolExecutor(max_workers=_threads()) as pool:
        rows = list(pool.map(lambda p: curve_row(args.family, float(p)), params))
    out.write(f"# family={args.family} points={points}\n")
    out.write("parameter,tau_min,rho_min\n")
    for row in rows:
        out.write(",".join(fmt(v) for v in row) + "\n")
    return EXIT_OK


def cmd_sample(args, out) -> int:
    if args.law not in LAWS:
        raise UsageError(f"--law must be one of {', '.join(LAWS)}")
    n = _positive("n", args.n, 1000)
    seed = args.seed if args.seed is not None else 0
    if seed < 0:
        raise UsageError("--seed must be nonnegative")
    cfg, pair = _pair_from(args)
    rng = RngStream(seed)
    sampler = {"comonotone": sample_comonotone, "L": sample_L_unimodal,
               "maxent": sample_maxent}[args.law]
    s = sampler(pair, rng, n)
    out.write(f"# seed={seed} config={cfg.path} law={args.law}\n")
    out.write("x1,x2\n")
    for a, b in zip(s.x1, s.x2):
        out.write(f"{fmt(a)},{fmt(b)}\n")
    return EXIT_OK


def cmd_maxent_density(args, out) -> int:
    grid = _positive("grid", args.grid, 50)
    cfg, pair = _pair_from(args)
    dens = maxent_joint_density(pair)
    lo, hi = pair.bounds
    xs = lo + (hi - lo) * np.arange(1, grid + 1) / (grid + 1)
    i, j = np.tril_indices(grid)
    x1, x2 = xs[i], xs[j]
    f = np.atleast_1d(dens(x1, x2))
    out.write(f"# config={cfg.path} grid={grid} branch={dens.branch}\n")
    out.write("x1,x2,f\n")
    for row in zip(x1, x2, f):
        out.write(",".join(fmt(v) for v in row) + "\n")
    return EXIT_OK


def cmd_validate(args, out) -> int:
    if not args.config:
        raise UsageError("--config is required")
    cfg = load_config(args.config)
    lines = [f"# config={cfg.path}"]
    failed = False
    try:
        pair = make_ordered_pair(cfg.f1, cfg.f2)
        lines.append("dominance: pass")
    except OrderedCopulaError as exc:
        pair = None
        failed = True
        lines.append(f"dominance: fail ({exc.code}: {exc})")

    if pair is not None:
        info = pair.unimodal_info
        if pair.identical:
            lines.append("unimodal: yes (F1 = F2, H = 0)")
        elif info.is_unimodal:
            lines.append(f"unimodal: yes (r={fmt(info.r)}, strict={'yes' if info.strict else 'no'})")
        else:
            lines.append("unimodal: no")
        try:
            value, finite = entropy_condition_value(pair)
            if finite:
                lines.append(f"entropy condition: pass (-int log H dG = {fmt(value)})")
            else:
                lines.append("entropy condition: fail (no-maxent: entropy condition fails)")
        except Unsupported as exc:
            lines.append(f"entropy condition: n/a ({exc.code}: {exc})")
        if cfg.ctilde is not None:
            cop = parse_copula(cfg.ctilde, pair)
            worst, where = compatibility_defect(pair, cop)
            if worst <= 1e-9:
                lines.append(f"compatibility: pass (worst defect {worst:.3g})")
            else:
                failed = True
                lines.append(f"compatibility: fail (incompatible-copula: defect {worst:.3g} {where})")

    if cfg.diagonal is not None:
        rep = validate_diagonal(parse_diagonal(cfg.diagonal))
        if rep.passed:
            lines.append("diagonal: pass (D1-D4)")
        else:
            failed = True
            for v in rep.failures:
                lines.append(f"diagonal: fail {v.rule} at t={fmt(v.t)} ({v.detail})")
    out.write("\n".join(lines) + "\n")
    return EXIT_MATH if failed else EXIT_OK


COMMANDS = {
    "bounds": cmd_bounds,
    "tau-rho-curve": cmd_tau_rho_curve,
    "sample": cmd_sample,
    "maxent-density": cmd_maxent_density,
    "validate": cmd_validate,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ordered-copulas",
                     description="Joint laws of ordered pairs X1 >= X2 with given marginals.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    def common(p, *flags):
        p.add_argument("--out", help="output path (default stdout)")
        if "config" in flags:
            p.add_argument("--config", help="JSON file with F1, F2 and optional ctilde, diagonal")
        if "grid" in flags:
            p.add_argument("--grid", type=int)
        return p

    common(sub.add_parser("bounds", help="L, upper bound and P on a lattice"), "config", "grid")
    p = common(sub.add_parser("tau-rho-curve", help="tau/rho minima along a family"))
    p.add_argument("--family", required=True)
    p.add_argument("--points", type=int)
    p = common(sub.add_parser("sample", help="draw pairs from a joint law"), "config")
    p.add_argument("--law", default="L")
    p.add_argument("--n", type=int)
    p.add_argument("--seed", type=int)
    common(sub.add_parser("maxent-density", help="max-entropy density on a lattice"),
           "config", "grid")
    common(sub.add_parser("validate", help="check marginals, copula and diagonal"), "config")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError("a subcommand is required: " + ", ".join(COMMANDS))
        buf = io.StringIO()
        code = COMMANDS[args.command](args, buf)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OrderedCopulaError as exc:
        print(f"{exc.code}: {exc}", file=sys.stderr)
        return EXIT_MATH
    text = buf.getvalue()
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
