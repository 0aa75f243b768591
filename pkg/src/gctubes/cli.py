"""Command-line entry point: ``gctubes <command> [flags] [--config FILE]``.

Flags mirror the JSON config keys.  When ``--config`` is given, keys from the
file override the corresponding flags.  Exit codes: 0 success, 2 config
parse error, 3 a sweep cell failed, 4 a check found a violation.
"""

from __future__ import annotations

import argparse
import sys
from typing import Optional, Sequence

from . import experiments as ex
from .arrangements import ConstructionSpec, min_separation
from .energies import antipodal_energy, overlap_energy, riesz_energy
from .errors import DomainError, GCTubesError
from .optimizer import OptimizerParams, make_objective, minimize, separation_probe
from .overlap import mc_pair_overlap, pair_overlap
from .sphere import make_unit

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_CELL_FAILED = 3
EXIT_VIOLATION = 4

# flag dest -> config key, for the config-driven commands
_CONFIG_FLAGS = {
    "constructions": "constructions",
    "n": "n",
    "s": "s",
    "seeds": "seeds",
    "half_width_rule": "half_width_rule",
    "mc_samples": "mc_samples",
    "output_path": "output_path",
    "threshold": "threshold",
    "deltas": "deltas",
    "with_union": "with_union",
    "timing": "timing",
}


def _emit(text: str, path: Optional[str]) -> None:
    if path:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _config_from(args) -> dict:
    """Flags first, then keys from ``--config`` on top."""
    cfg = {"command": args.command}
    for dest, key in _CONFIG_FLAGS.items():
        value = getattr(args, dest, None)
        if value not in (None, False):
            cfg[key] = value
    if getattr(args, "config", None):
        cfg.update(ex.load_config(args.config))
    return cfg


def _add_config_flags(p: argparse.ArgumentParser, *, union=False, limit=False, sweep=False) -> None:
    p.add_argument("--config", help="JSON run config; its keys override flags")
    p.add_argument("--constructions", nargs="+", choices=ex.CONSTRUCTIONS)
    p.add_argument("--n", nargs="+", type=int)
    p.add_argument("--s", nargs="+", type=float)
    p.add_argument("--seeds", nargs="+", type=int)
    p.add_argument("--half-width-rule", dest="half_width_rule", help='"one_over_n" or a number')
    p.add_argument("--mc-samples", dest="mc_samples", type=int)
    p.add_argument("--output-path", dest="output_path")
    if sweep:
        p.add_argument("--with-union", dest="with_union", action="store_true")
        p.add_argument("--timing", action="store_true", help="fill wall_time_ms (output no longer byte-stable)")
    if union:
        p.add_argument("--threshold", type=float)
    if limit:
        p.add_argument("--deltas", nargs="+", type=float)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gctubes", description="Overlap energies of great-circle tubes.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("overlap", help="overlap area of one pair of tubes")
    p.add_argument("--pole-a", nargs=3, type=float, required=True, metavar=("X", "Y", "Z"))
    p.add_argument("--pole-b", nargs=3, type=float, required=True, metavar=("X", "Y", "Z"))
    p.add_argument("--half-width", type=float, required=True)
    p.add_argument("--mc-samples", type=int, default=0, help="also report a Monte Carlo estimate")
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("energy", help="energy of one arrangement")
    p.add_argument("--construction", choices=ex.CONSTRUCTIONS[:4], default="greedy")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--s", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--half-width", type=float)
    p.add_argument("--kind", choices=("overlap", "antipodal", "riesz"), default="overlap")
    p.add_argument("--mc-samples", type=int, default=100_000)

    p = sub.add_parser("construct", help="write pole coordinates as CSV")
    p.add_argument("--construction", choices=ex.CONSTRUCTIONS[:4], default="greedy")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--half-width", type=float)
    p.add_argument("--output-path")

    p = sub.add_parser("optimize", help="locally minimize an energy")
    p.add_argument("--construction", choices=ex.CONSTRUCTIONS[:4], default="random")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--objective", choices=("overlap", "antipodal", "riesz"), default="antipodal")
    p.add_argument("--s", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--half-width", type=float)
    p.add_argument("--max-iters", type=int, default=2000)
    p.add_argument("--output-path", help="CSV of the energy trace")

    _add_config_flags(sub.add_parser("sweep", help="energy sweep over a config grid"), sweep=True)
    _add_config_flags(sub.add_parser("union-check", help="Monte Carlo union areas"), union=True)
    _add_config_flags(sub.add_parser("identity-check", help="second-moment identity"))
    _add_config_flags(sub.add_parser("limit-check", help="shrinking-width limit"), limit=True)

    p = sub.add_parser("fit", help="log-log slopes from a sweep CSV")
    p.add_argument("input", help="sweep CSV")
    p.add_argument("--output-path")
    return parser


# -- commands ---------------------------------------------------------------

def _cmd_overlap(args) -> int:
    a = make_unit(*args.pole_a)
    b = make_unit(*args.pole_b)
    est = pair_overlap(a, b, args.half_width)
    rows = [("pair_overlap", est.value, est.std_error, est.method)]
    if args.mc_samples:
        mc = mc_pair_overlap(a, b, args.half_width, args.mc_samples, args.seed)
        rows.append(("monte_carlo", mc.value, mc.std_error, mc.method))
    sys.stdout.write(ex.write_csv(rows, ("quantity", "value", "std_error", "method")))
    return EXIT_OK


def _cmd_energy(args) -> int:
    arr = ConstructionSpec(args.construction, args.n, args.seed, args.half_width).build()
    if args.kind == "overlap":
        report = overlap_energy(arr, args.s, mc_samples=args.mc_samples, seed=args.seed, keep_pairs=False)
        total, mc_err = report.total, report.mc_error
    elif args.kind == "antipodal":
        total, mc_err = antipodal_energy(arr.poles, args.s), 0.0
    else:
        total, mc_err = riesz_energy(arr.poles, args.s), 0.0
    row = (args.construction, arr.n, args.s, args.seed, arr.half_width, args.kind, total, mc_err, min_separation(arr))
    header = ("construction", "n", "s", "seed", "half_width", "kind", "energy", "mc_error", "min_separation")
    sys.stdout.write(ex.write_csv([row], header))
    return EXIT_OK


def _cmd_construct(args) -> int:
    arr = ConstructionSpec(args.construction, args.n, args.seed, args.half_width).build()
    text = ex.write_csv((tuple(float(v) for v in p) for p in arr.poles), ("x", "y", "z"))
    _emit(text, args.output_path)
    return EXIT_OK


def _cmd_optimize(args) -> int:
    arr = ConstructionSpec(args.construction, args.n, args.seed, args.half_width).build()
    objective = make_objective(args.objective, args.s, arr.half_width)
    trace = minimize(objective, arr, OptimizerParams(max_iters=args.max_iters, seed=args.seed))
    angle, scaled = separation_probe(trace)
    if args.output_path:
        rows = zip(range(len(trace.energies)), trace.energies, trace.step_sizes, trace.grad_norms)
        ex.write_csv(rows, ("iteration", "energy", "step", "grad_norm"), args.output_path)
    header = ("initial_energy", "final_energy", "accepted", "converged", "reason", "min_angle", "min_angle_sqrt_n")
    row = (trace.initial_energy, trace.final_energy, trace.accepted, trace.converged, trace.reason, angle, scaled)
    sys.stdout.write(ex.write_csv([row], header))
    return EXIT_OK


def _cmd_sweep(cfg) -> int:
    records = ex.run_sweep(cfg)
    _emit(ex.sweep_csv(records), cfg.get("output_path"))
    return EXIT_CELL_FAILED if any(r.error for r in records) else EXIT_OK


def _check(runner, columns):
    def cmd(cfg) -> int:
        rows, violated = runner(cfg)
        _emit(ex.write_csv(rows, columns), cfg.get("output_path"))
        return EXIT_VIOLATION if violated else EXIT_OK
    return cmd


def _cmd_fit(args) -> int:
    rows = ex.fit_groups(ex.read_sweep_csv(args.input))
    _emit(ex.write_csv(rows, ex.FIT_COLUMNS), args.output_path)
    return EXIT_OK


_CONFIG_COMMANDS = {
    "sweep": _cmd_sweep,
    "union-check": _check(ex.check_union, ex.UNION_COLUMNS),
    "identity-check": _check(ex.check_identity, ex.IDENTITY_COLUMNS),
    "limit-check": _check(ex.check_delta_limit, ex.LIMIT_COLUMNS),
}
_DIRECT_COMMANDS = {
    "overlap": _cmd_overlap,
    "energy": _cmd_energy,
    "construct": _cmd_construct,
    "optimize": _cmd_optimize,
    "fit": _cmd_fit,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if args.command in _CONFIG_COMMANDS:
            cfg = _config_from(args)
            return _CONFIG_COMMANDS[args.command](cfg)
        return _DIRECT_COMMANDS[args.command](args)
    except (ex.ConfigError, DomainError) as exc:
        # invalid parameters are reported like an unparseable config
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (GCTubesError, ValueError) as exc:  # e.g. a degenerate pole
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CELL_FAILED


if __name__ == "__main__":
    sys.exit(main())
