"""Command-line entry point: ``matrls <command> [options]``.

Commands write CSV to ``--out`` (appending; the header is written once) or to
stdout, and a short summary to stderr. Exit status is 0 on success, 1 when a
checked tolerance fails and 2 on numerical or contract errors.

A ``--config FILE`` of ``key = value`` lines (``#`` starts a comment) sets
defaults; command-line flags override it.
"""

import argparse
import csv
import os
import sys
from dataclasses import asdict, fields

import numpy as np

from . import experiments as ex
from .errors import DimensionError, NotPositiveDefiniteError, VariantError
from .io import RECORD_HEADER

NUMERICAL_ERRORS = (NotPositiveDefiniteError, VariantError, DimensionError,
                    np.linalg.LinAlgError)

_INT_KEYS = {"seed", "p", "n", "nhat", "mu", "trials", "steps"}
_FLOAT_KEYS = {"noise_std", "p0_scale"}
_LIST_KEYS = {"m": int, "methods": str}
_ALIASES = {"out": "output_path", "output": "output_path"}


def _bool(text):
    low = str(text).strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def coerce(key, value):
    key = _ALIASES.get(key.replace("-", "_"), key.replace("-", "_"))
    if key in _INT_KEYS:
        return key, int(value)
    if key in _FLOAT_KEYS:
        return key, float(value)
    if key in _LIST_KEYS:
        return key, tuple(_LIST_KEYS[key](v) for v in str(value).split(",") if v.strip())
    if key == "noiseless":
        return key, _bool(value)
    if key in {f.name for f in fields(ex.RunConfig)}:
        return key, str(value).strip()
    raise ValueError(f"unknown config key {key!r}")


def read_config_file(path):
    """Parse ``key = value`` lines into RunConfig keyword arguments."""
    out = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key = value")
            key, value = (s.strip() for s in line.split("=", 1))
            try:
                key, value = coerce(key, value)
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: {exc}") from None
            out[key] = value
    return out


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key = value file with defaults")
    common.add_argument("--seed")
    common.add_argument("--p")
    common.add_argument("--n")
    common.add_argument("--m", help="parameter columns; comma list for scaling")
    common.add_argument("--nhat", help="ARMA model order")
    common.add_argument("--mu", help="ARMA input count")
    common.add_argument("--steps")
    common.add_argument("--trials")
    common.add_argument("--weight-mode", choices=ex.WEIGHT_MODES)
    common.add_argument("--form", choices=ex.FORMS)
    common.add_argument("--methods", help="comma list of vecperm, columnwise, matrix")
    common.add_argument("--noise-std")
    common.add_argument("--p0-scale")
    common.add_argument("--noiseless", action="store_const", const="true")
    common.add_argument("--out", help="CSV output path (default stdout)")

    parser = argparse.ArgumentParser(prog="matrls", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("equivalence", parents=[common],
                   help="estimators versus the dense normal-equation oracle")
    sub.add_parser("scaling", parents=[common], help="runtime against m")
    sub.add_parser("corrnoise", parents=[common],
                   help="error curves under column-correlated noise")
    sub.add_parser("arma-demo", parents=[common],
                   help="online MIMO ARMA identification, both identifiers")
    return parser


def config_from_args(args) -> ex.RunConfig:
    kwargs = read_config_file(args.config) if args.config else {}
    for name, value in vars(args).items():
        if name in ("config", "command") or value is None:
            continue
        key, value = coerce(name, value)
        kwargs[key] = value
    return ex.RunConfig(**kwargs)


def _emit_records(config, records):
    _emit_rows(config, records, RECORD_HEADER)


def _emit_rows(config, rows, header):
    path = config.output_path
    if path:
        new = not os.path.exists(path) or os.path.getsize(path) == 0
        fh = open(path, "a", newline="")
    else:
        new, fh = True, sys.stdout
    try:
        writer = csv.writer(fh)
        if new:
            writer.writerow(header)
        for r in rows:
            writer.writerow([format(v, ".17g") if isinstance(v, float) else v
                             for v in asdict(r).values()])
    finally:
        if fh is not sys.stdout:
            fh.close()


def _log(msg):
    print(msg, file=sys.stderr)


def cmd_equivalence(config) -> int:
    result = ex.run_equivalence(config)
    _emit_records(config, result.records)
    _log(f"equivalence: max deviation {result.max_deviation:.3e} "
         f"(tolerance {ex.EQUIVALENCE_TOL:g})")
    return 0 if result.passed else 1


def cmd_scaling(config) -> int:
    rows = ex.run_scaling(config)
    _emit_rows(config, rows, ex.SCALING_HEADER)
    ms = sorted({r.m for r in rows})
    fit = [m for m in ms if m > 1]
    if len(fit) >= 2:
        for mode in ("batch", "recursive"):
            _log(f"scaling: {mode} log-log slope of vecperm/matrix time over m={fit}: "
                 f"{ex.scaling_slope(rows, mode, fit):.2f}")
    return 0


def cmd_corrnoise(config) -> int:
    records = ex.run_corrnoise(config)
    _emit_records(config, records)
    last = max(r.k for r in records)
    for method in ex.CORRNOISE_METHODS:
        _log(f"corrnoise: {method} median error at k={last}: "
             f"{ex.median_error(records, method, last):.4g}")
    return 0


def cmd_arma_demo(config) -> int:
    result = ex.run_arma_demo(config)
    _emit_records(config, result.records)
    vp = result.median_step_ns["arma-vecperm"]
    mx = result.median_step_ns["arma-matrix"]
    _log(f"arma-demo: median step time vecperm {vp / 1e3:.1f} us, matrix {mx / 1e3:.1f} us "
         f"({100.0 * (mx - vp) / vp:+.1f}%)")
    _log(f"arma-demo: max final coefficient error {max(result.final_errors.values()):.3e}, "
         f"max trajectory deviation {result.max_deviation:.3e}")
    if not result.passed:
        _log(f"arma-demo: trajectories diverged beyond {ex.ARMA_TRAJECTORY_TOL:g} "
             f"(seed {config.seed})")
        return 2
    return 0


COMMANDS = {
    "equivalence": cmd_equivalence,
    "scaling": cmd_scaling,
    "corrnoise": cmd_corrnoise,
    "arma-demo": cmd_arma_demo,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = config_from_args(args)
    except (ValueError, TypeError, OSError) as exc:
        _log(f"matrls {args.command}: invalid configuration: {exc}")
        return 2
    try:
        return COMMANDS[args.command](config)
    except NUMERICAL_ERRORS as exc:
        _log(f"matrls {args.command}: {type(exc).__name__}: {exc} (seed {config.seed})")
        return 2
    except ValueError as exc:
        _log(f"matrls {args.command}: {exc}")
        return 2


if __name__ == "__main__":
    sys.exit(main())
