"""Command-line experiment driver.

    python -m phcsim --policy all --seed 7 --reps 10 --out results/
    python -m phcsim --config exp.json --sweep ia_childbirth=1440,720

Settings resolve as built-in defaults, then the JSON config file, then flags.
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace

from .experiment import SWEEP_PARAMS, ConfigError, ScenarioConfig, run_experiment, sensitivity_sweep

log = logging.getLogger("phcsim")

_FLAG_FIELDS = {
    "policy": "policy",
    "seed": "seed",
    "reps": "replications",
    "warmup_days": "warmup_days",
    "horizon_days": "horizon_days",
    "travel_time": "travel_time",
    "threshold": "threshold",
    "out": "out_dir",
    "workers": "workers",
}


def parse_sweep(text: str) -> tuple[str, list[float]]:
    param, sep, values = text.partition("=")
    param = param.strip()
    if not sep or param not in SWEEP_PARAMS:
        raise ConfigError(f"--sweep: expected PARAM=v1,v2,... with PARAM in {', '.join(SWEEP_PARAMS)}")
    try:
        grid = [float(v) for v in values.split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"--sweep: values must be numbers, got {values!r}") from None
    if not grid:
        raise ConfigError("--sweep: empty value grid")
    return param, grid


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="phcsim",
        description="Simulate delay-prediction-based diversion of childbirth patients between two PHCs.",
    )
    p.add_argument("--config", metavar="PATH", help="JSON experiment configuration")
    p.add_argument("--policy", help="none | actual | rst-state | rst-steady | est | all, or a comma list")
    p.add_argument("--seed", type=int, help="master seed")
    p.add_argument("--reps", type=int, help="replications per scenario")
    p.add_argument("--warmup-days", type=float, help="discarded warm-up period")
    p.add_argument("--horizon-days", type=float, help="measured period after warm-up")
    p.add_argument("--travel-time", type=float, metavar="MIN", help="travel time between facilities")
    p.add_argument("--threshold", type=float, metavar="MIN", help="wait threshold for alpha")
    p.add_argument("--out", metavar="DIR", help="output directory")
    p.add_argument("--sweep", metavar="PARAM=v1,v2,...", help="sensitivity sweep instead of a single run")
    p.add_argument("--workers", type=int, help="replications run in parallel processes")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def resolve_config(args: argparse.Namespace) -> ScenarioConfig:
    cfg = ScenarioConfig.load(args.config) if args.config else ScenarioConfig()
    overrides = {}
    for flag, name in _FLAG_FIELDS.items():
        v = getattr(args, flag)
        if v is not None:
            overrides[name] = v
    if not overrides:
        return cfg
    try:
        return replace(cfg, **overrides)
    except ConfigError:
        raise
    except (ValueError, TypeError) as exc:
        raise ConfigError(str(exc)) from None


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        cfg = resolve_config(args)
        sweep = parse_sweep(args.sweep) if args.sweep else None
        if sweep:
            param, grid = sweep
            log.info("sweeping %s over %s", param, grid)
            sensitivity_sweep(cfg, param, grid)
            print(f"wrote {cfg.out_dir}/sweep.csv")
        else:
            log.info("running %s x %d replications", ",".join(cfg.scenarios), cfg.replications)
            res = run_experiment(cfg)
            print(res.files["comparison.md"])
            print(f"wrote {len(res.files)} files to {cfg.out_dir}")
    except ConfigError as exc:
        print(f"phcsim: config error: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError, RuntimeError) as exc:
        print(f"phcsim: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
