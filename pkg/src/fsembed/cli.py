"""Command-line entry points.

Subcommands: ``validate`` a store file, ``sample`` an episode dump,
``eval`` a full run, ``report`` a saved report file. Exit codes: 0 on
success, 1 for usage or configuration problems, 2 for data validation
failures, 3 for anything else raised at runtime.

The eval config file is one JSON document mirroring RunConfig; flag
overrides take precedence over config-file values and the effective
configuration is echoed into the report.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from typing import Optional, Sequence

from .errors import ConfigError, FsembedError, StoreError
from .harness import RunConfig, format_summary_line, read_report, run_evaluation
from .sampling import SamplerConfig, episode_to_json, sample_episode
from .store import build_class_index, read_store


class _Parser(argparse.ArgumentParser):
    """argparse normally exits 2 on usage errors; remap onto exit code 1."""

    def error(self, message):
        raise ConfigError(message)


def _read_json_file(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc


def cmd_validate(args) -> int:
    store = read_store(args.store)
    index = build_class_index(store)
    print(
        f"{args.store}: {store.modality} store, {store.count} items, "
        f"{index.n_classes} classes, dim {store.dim}, dataset {store.dataset_name!r}, "
        f"normalized={store.normalized}"
    )
    return 0


def cmd_sample(args) -> int:
    raw = _read_json_file(args.config)
    if not isinstance(raw, dict):
        raise ConfigError("run config must be a JSON object")
    sampler = SamplerConfig.from_dict(raw.get("sampler", {}))
    store_path = raw.get("image_store_path")
    if not store_path:
        raise ConfigError("run config is missing 'image_store_path'")
    if args.count < 0:
        raise ConfigError(f"--count must be >= 0, got {args.count}")
    index = build_class_index(read_store(store_path))
    for i in range(args.count):
        print(episode_to_json(sample_episode(i, sampler, index, sampler.seed)))
    return 0


def cmd_eval(args) -> int:
    raw = _read_json_file(args.config)
    config = RunConfig.from_dict(raw)
    sampler = config.sampler
    if args.seed is not None:
        sampler = dataclasses.replace(sampler, seed=args.seed)
    if args.episodes is not None:
        sampler = dataclasses.replace(sampler, episodes=args.episodes)
    config = dataclasses.replace(
        config,
        sampler=sampler,
        method=args.method if args.method is not None else config.method,
        parallelism=args.parallelism if args.parallelism is not None else config.parallelism,
        output_path=args.out if args.out is not None else config.output_path,
    )
    config.validate()
    report = run_evaluation(config)
    print(format_summary_line(report))
    return 0


def cmd_report(args) -> int:
    report = read_report(args.infile)
    echo = report.config_echo
    print(format_summary_line(report))
    print(f"episodes: {report.episodes}")
    print(f"mean_accuracy: {report.mean_accuracy:.6f}")
    print(f"ci95_half_width: {report.ci95_half_width:.6f}")
    print(f"wall_time_seconds: {report.wall_time_seconds:.3f}")
    print(f"config: {json.dumps(echo, sort_keys=True)}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="fsembed", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p_validate = sub.add_parser("validate", help="check a store file and print its summary")
    p_validate.add_argument("store", help="path to an embedding store file")
    p_validate.set_defaults(func=cmd_validate)

    p_sample = sub.add_parser("sample", help="dump the first episodes of a config's stream")
    p_sample.add_argument("--config", required=True, help="run config JSON file")
    p_sample.add_argument("--count", required=True, type=int, help="number of episodes to dump")
    p_sample.set_defaults(func=cmd_sample)

    p_eval = sub.add_parser("eval", help="run an evaluation and print its summary line")
    p_eval.add_argument("--config", required=True, help="run config JSON file")
    p_eval.add_argument("--seed", type=int, help="override the sampler seed")
    p_eval.add_argument("--method", help="override the inference method")
    p_eval.add_argument("--episodes", type=int, help="override the episode count")
    p_eval.add_argument("--parallelism", type=int, help="override the worker count")
    p_eval.add_argument("--out", help="override the report output path")
    p_eval.set_defaults(func=cmd_eval)

    p_report = sub.add_parser("report", help="pretty-print a saved report")
    p_report.add_argument("--in", dest="infile", required=True, help="report JSON file")
    p_report.set_defaults(func=cmd_report)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except StoreError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FsembedError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except Exception as exc:  # uncaught tracebacks would exit 1, colliding with config errors
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
