"""Command line entry point: ``pilotlab {generate,train,sweep,verify,plot}``."""

import argparse
import logging
import sys
from pathlib import Path

from pilotlab.errors import ConfigError, DimensionError

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_RUNTIME = 2
EXIT_VERIFY = 3

log = logging.getLogger("pilotlab")


def _load(args):
    from pilotlab.harness.config import RunConfig, build_config, load_config

    cfg = load_config(args.config) if args.config else build_config({})
    if args.out:
        cfg = cfg.with_updates(output_dir=args.out)
    if args.seed_override is not None:
        if args.seed_override < 0:
            raise ConfigError("--seed-override must be >= 0")
        cfg = cfg.with_updates(seeds=(args.seed_override,))
    assert isinstance(cfg, RunConfig)
    return cfg


def cmd_generate(args):
    from pilotlab.optimizers import resolve_problem
    from pilotlab.problems import write_bundle

    cfg = _load(args)
    problem = resolve_problem(cfg)
    out = write_bundle(problem, cfg.output_dir)
    log.info("wrote problem bundle to %s", out)
    return EXIT_OK


def cmd_train(args):
    from pilotlab.harness.experiment import run_experiment

    cfg = _load(args)
    res = run_experiment(cfg)
    for s in res.summaries:
        log.info("seed %d: distance %.6g, sparsity %.3f%s", s.seed, s.final_distance,
                 s.final_sparsity, " (diverged)" if s.diverged else "")
    return EXIT_OK


def cmd_sweep(args):
    from pilotlab.harness.experiment import run_sweep

    cfg = _load(args)
    rows = run_sweep(cfg)
    for r in rows:
        mark = "*" if r.best else " "
        log.info("%s %-32s %.6g%s", mark, r.label, r.final_mean_distance, f"  error: {r.error}" if r.error else "")
    return EXIT_OK if any(not r.error for r in rows) else EXIT_RUNTIME


def cmd_verify(args):
    from pilotlab.harness.verify import verify

    cfg = _load(args)
    report = verify(cfg)
    text = report.text()
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "verify_report.txt").write_text(text, encoding="utf-8")
    if not args.quiet:
        sys.stdout.write(text)
    return EXIT_OK if report.passed else EXIT_VERIFY


def cmd_plot(args):
    from pilotlab.harness.experiment import read_aggregate_csv
    from pilotlab.harness.plot import emit_plot

    if not args.inputs:
        raise ConfigError("plot needs at least one aggregate CSV")
    aggs = [read_aggregate_csv(p) for p in args.inputs]
    out = Path(args.out or ".")
    target = out if out.suffix == ".svg" else out / f"{args.metric}.svg"
    target.parent.mkdir(parents=True, exist_ok=True)
    emit_plot(aggs, target, metric=args.metric, log_y=not args.linear)
    log.info("wrote %s", target)
    return EXIT_OK


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="key=value configuration file")
    common.add_argument("--out", metavar="DIR", help="output directory (overrides output_dir)")
    common.add_argument("--seed-override", metavar="N", type=int, help="run this single seed")
    common.add_argument("--quiet", action="store_true", help="only warnings and errors")

    parser = argparse.ArgumentParser(prog="pilotlab", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("generate", parents=[common], help="write the problem bundle").set_defaults(fn=cmd_generate)
    sub.add_parser("train", parents=[common], help="run one configuration over its seeds").set_defaults(fn=cmd_train)
    sub.add_parser("sweep", parents=[common], help="run the schedule sweep").set_defaults(fn=cmd_sweep)
    sub.add_parser("verify", parents=[common], help="run the oracle suite").set_defaults(fn=cmd_verify)
    p = sub.add_parser("plot", parents=[common], help="render aggregate CSVs to SVG")
    p.add_argument("inputs", nargs="*", help="aggregate.csv files, legend follows this order")
    p.add_argument("--metric", choices=("dist", "loss"), default="dist")
    p.add_argument("--linear", action="store_true", help="linear y axis")
    p.set_defaults(fn=cmd_plot)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors; map that onto the validation code
        return EXIT_OK if exc.code == 0 else EXIT_VALIDATION
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO, format="%(message)s")
    try:
        return args.fn(args)
    except (ConfigError, DimensionError) as exc:
        log.error("invalid configuration: %s", exc)
        return EXIT_VALIDATION
    except OSError as exc:
        log.error("I/O failure: %s", exc)
        return EXIT_RUNTIME
    except Exception as exc:  # anything else is a runtime failure of the run itself
        log.error("runtime failure: %s: %s", type(exc).__name__, exc)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
