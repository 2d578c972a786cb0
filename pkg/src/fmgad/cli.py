"""Command line: ``fmgad {inject,train,score,eval,run,sweep}``.

Exit codes: 0 success, 1 usage error, 2 data error, 3 runtime error.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys

from . import io
from .pipeline import STAGES, ConfigError, RunConfig, StageError, load_config, run_pipeline, set_keys, sweep

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_RUNTIME = 0, 1, 2, 3

# flag -> dotted RunConfig key
_FLAGS = {
    "edges": str, "features": str, "labels": str, "fewshot": str, "output_dir": str,
    "seed": int, "k_shot": int, "inject_total": int, "clique_size": int, "k_cand": int,
    "train.alpha": float, "train.gamma": float, "train.psi": float, "train.epochs": int,
    "train.batch_size": int, "train.hidden": int, "train.lr": float,
    "train.score_rounds": int, "train.score_mix": float,
    "train.sampler.K": int, "train.sampler.restart_p": float,
    "train.recon.M": int, "train.recon.epsilon": float, "train.recon.high_depth": int,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _flag(key: str) -> str:
    return "--" + key.split(".")[-1].replace("_", "-")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file with RunConfig keys")
    common.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                        help="override any (dotted) config key; VALUE is parsed as JSON")
    common.add_argument("-v", "--verbose", action="store_true")
    for key, typ in _FLAGS.items():
        common.add_argument(_flag(key), dest=key, type=typ, default=None,
                            metavar=key.rsplit(".", 1)[-1].upper())
    common.add_argument("--include-labeled", dest="include_labeled", action="store_true", default=None)

    p = _Parser(prog="fmgad", description="Few-shot graph anomaly detection.")
    sub = p.add_subparsers(dest="verb", required=True, parser_class=_Parser)
    for verb, text in [("inject", "inject anomalies and pick the labeled few-shot set"),
                       ("train", "train and write checkpoint.json, losses.csv"),
                       ("score", "score nodes and write scores.csv"),
                       ("eval", "compute metrics.json from scores.csv"),
                       ("run", "all stages")]:
        sub.add_parser(verb, parents=[common], help=text)
    sw = sub.add_parser("sweep", parents=[common], help="run the pipeline over one parameter grid")
    sw.add_argument("--param", required=True, help="dotted key, e.g. train.sampler.K")
    sw.add_argument("--values", required=True, help="comma-separated values")
    return p


def _parse_value(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def config_from_args(args) -> RunConfig:
    cfg = load_config(args.config) if args.config else RunConfig()
    updates = {}
    for key in list(_FLAGS) + ["include_labeled"]:
        val = getattr(args, key, None)
        if val is not None:
            updates[key] = val
    for item in args.set:
        if "=" not in item:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        key, val = item.split("=", 1)
        updates[key] = _parse_value(val)
    cfg = set_keys(cfg, updates)
    return cfg


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = config_from_args(args)
        if args.verb == "sweep":
            rows = sweep(cfg, args.param, [_parse_value(v) for v in args.values.split(",")])
            for r in rows:
                print(f"{r['param']}={r['value']}\tauc_roc={r['auc_roc']:.4f}\tauc_pr={r['auc_pr']:.4f}")
            return EXIT_OK
        stages = STAGES if args.verb == "run" else (args.verb,)
        metrics = run_pipeline(cfg, stages)
        if metrics:
            print(json.dumps(metrics, sort_keys=True))
        return EXIT_OK
    except ConfigError as exc:
        print(f"fmgad: config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except StageError as exc:
        print(f"fmgad: {exc}", file=sys.stderr)
        if isinstance(exc.cause, ConfigError):
            return EXIT_USAGE
        if isinstance(exc.cause, (io.DataError, FileNotFoundError)):
            return EXIT_DATA
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
