"""Command-line front end.

    spectral-edges detect     --preset fig2 --output out/fig2
    spectral-edges sweep      --preset fig1 --param eta --values 1e-3,1e-4
    spectral-edges montecarlo --config run.ini --trials 100
    spectral-edges factors    --factor truncated_optimal --eta 2e-5 --k0 8*pi --N0 1000

Every configuration key is also a flag of the same name.  Exit codes:
0 success, 2 configuration error, 3 numerical check failure.  Errors are
printed to stderr as one JSON line.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import fields

from .analysis import NoInteriorMinimum
from .concentration import NormalizationError
from .config import PRESETS, ConfigError, ExperimentConfig, resolve_config
from .runner import SWEEP_PARAMS, run_detect, run_factors, run_montecarlo, run_sweep
from .spectral_core import ConjugateSymmetryError

EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="INI file with experiment keys")
    for f in fields(ExperimentConfig):
        if f.name == "preset":
            p.add_argument("--preset", choices=sorted(PRESETS))
        else:
            p.add_argument(f"--{f.name}", default=None, metavar=f.name.upper())


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="spectral-edges",
                                     description="Edge detection from noisy Fourier data.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in [("detect", "run one detection and write its tables"),
                            ("sweep", "repeat detect over a parameter list"),
                            ("montecarlo", "repeat detection over noise draws"),
                            ("factors", "print or write a concentration factor table")]:
        p = sub.add_parser(name, help=help_text)
        _add_config_flags(p)
        if name == "sweep":
            p.add_argument("--param", required=True, choices=SWEEP_PARAMS)
            p.add_argument("--values", required=True, help="comma-separated values")
            p.add_argument("--jobs", type=int, default=1)
    return parser


def _overrides(args) -> dict:
    return {f.name: getattr(args, f.name) for f in fields(ExperimentConfig)}


def _fail(kind: str, code: int, exc: Exception) -> int:
    message = " ".join(str(exc).split())
    print(json.dumps({"error": kind, "exit": code, "type": type(exc).__name__,
                      "message": message}), file=sys.stderr)
    return code


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    explicit_output = args.output is not None
    try:
        cfg = resolve_config(args.config, overrides=_overrides(args))
        if args.command == "detect":
            run = run_detect(cfg, cfg.output)
            print(f"{len(run.result.edges)} edge(s); eps = {run.result.epsilon_predicted:.6g}; "
                  f"wrote {run.outdir}")
        elif args.command == "sweep":
            run_sweep(cfg, args.param, args.values, cfg.output, jobs=args.jobs)
            print(f"wrote {cfg.output}/summary.csv")
        elif args.command == "montecarlo":
            run_montecarlo(cfg, cfg.output)
            print(f"wrote {cfg.output}/montecarlo.csv")
        else:
            text = run_factors(cfg).dumps()
            if explicit_output:
                with open(cfg.output, "w") as fh:
                    fh.write(text)
            else:
                sys.stdout.write(text)
    except (NormalizationError, ConjugateSymmetryError, NoInteriorMinimum, ArithmeticError) as exc:
        return _fail("numerical", EXIT_NUMERICAL, exc)
    except (ConfigError, ValueError, TypeError, OSError) as exc:
        return _fail("config", EXIT_CONFIG, exc)
    return 0


if __name__ == "__main__":
    sys.exit(main())
