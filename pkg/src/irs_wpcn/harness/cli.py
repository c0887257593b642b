"""Command-line entry point.

Verbs: ``run`` (experiments listed in the config), ``sweep-n``, ``sweep-d12``,
``rate-region`` and ``validate``. Exit codes: 0 success, 1 configuration
error, 2 solver-failure rate above ``failure_threshold`` (or, for
``validate``, any failed invariant).
"""

from __future__ import annotations

import argparse
import logging
import sys
import time

from .config import ConfigError, ExperimentConfig, load_config
from .experiments import run_experiment
from .outputs import emit_outputs
from .validate import run_validation

EXIT_OK, EXIT_CONFIG, EXIT_FAILURES = 0, 1, 2

VERB_EXPERIMENT = {"sweep-n": "sweep_n", "sweep-d12": "sweep_d12", "rate-region": "rate_region"}


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="irs-wpcn", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="verb", required=True)
    for verb in ("run", *VERB_EXPERIMENT):
        s = sub.add_parser(verb, help=f"{verb} experiment(s) from a config file")
        s.add_argument("config", nargs="?", help="YAML config; defaults apply when omitted")
        s.add_argument("-o", "--output", help="output directory (overrides config)")
        s.add_argument("-n", "--realizations", type=int, help="realizations per sweep point")
        s.add_argument("-j", "--workers", type=int, help="worker processes")
        s.add_argument("--seed", type=int, help="master seed")
        s.add_argument("--no-figures", action="store_true", help="skip PNG rendering")
    v = sub.add_parser("validate", help="audit invariants on random instances")
    v.add_argument("config", nargs="?")
    v.add_argument("--instances", type=int, default=20)
    v.add_argument("--seed", type=int, default=0)
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def _config(args) -> ExperimentConfig:
    cfg = load_config(args.config) if args.config else ExperimentConfig()
    changes = {}
    for attr, key in (("output", "output_dir"), ("realizations", "realizations"),
                      ("workers", "workers"), ("seed", "seed")):
        val = getattr(args, attr, None)
        if val is not None:
            changes[key] = val
    if args.verb in VERB_EXPERIMENT:
        changes["experiments"] = (VERB_EXPERIMENT[args.verb],)
    try:
        return cfg.replace(**changes) if changes else cfg
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = _config(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    if args.verb == "validate":
        rep = run_validation(cfg, args.instances, args.seed)
        for name, (ok, total) in rep.checks.items():
            print(f"{name}: {ok}/{total}")
        for line in rep.failures:
            print(f"FAIL {line}", file=sys.stderr)
        return EXIT_OK if rep.ok else EXIT_FAILURES

    tables, timing = {}, {}
    for experiment in cfg.experiments:
        t0 = time.perf_counter()
        tables[experiment] = run_experiment(cfg, experiment)
        timing[experiment] = time.perf_counter() - t0
    try:
        written = emit_outputs(tables, cfg, figures=not args.no_figures, timing=timing)
    except OSError as exc:
        print(f"output error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    for path in written["csv"] + [written["manifest"], written["plot_script"]] + written["figures"]:
        print(path)
    status = EXIT_OK
    for name, table in tables.items():
        if table.failure_rate > cfg.failure_threshold:
            print(f"{name}: failure rate {table.failure_rate:.3f} exceeds "
                  f"{cfg.failure_threshold:.3f}", file=sys.stderr)
            status = EXIT_FAILURES
    return status


if __name__ == "__main__":
    sys.exit(main())
