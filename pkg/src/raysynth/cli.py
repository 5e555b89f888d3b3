"""Command line entry point: ``raysynth <command> --config job.json``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .config import ConfigError, load_config
from .pipeline import run_generate, run_trace, run_validate


def _load(path: str):
    p = Path(path)
    return load_config(p.read_text(encoding="utf-8"), base_dir=p.parent)


def _u64(text: str) -> int:
    v = int(text, 0)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in an unsigned 64-bit integer")
    return v


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="raysynth", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "trace": "trace a scene file into a paths file",
        "generate": "static UL/DL channel tensors per user point",
        "mobility": "UL/DL channel tensors along the configured trajectory",
        "beams": "beam labels and windowed UL feature tensors",
        "validate": "run the invariant checks against the configured source",
    }
    for name, text in helps.items():
        p = sub.add_parser(name, help=text)
        p.add_argument("--config", required=True, help="job config JSON file")
        p.add_argument("--out", help="output directory (overrides config 'output')")
        p.add_argument("--seed", type=_u64, help="RNG seed (overrides config 'seed')")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = _load(args.config)
    except (OSError, ConfigError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2

    if args.command == "validate":
        checks = run_validate(cfg)
        for c in checks:
            print(f"{'PASS' if c.passed else 'FAIL'}  {c.name}: {c.detail}")
        return 0 if all(c.passed for c in checks) else 1

    try:
        if args.command == "trace":
            print(run_trace(cfg, args.out))
            return 0
        mode = "static" if args.command == "generate" else args.command
        manifest = run_generate(cfg, args.out, mode=mode, seed=args.seed)
    except (OSError, ValueError, KeyError) as err:
        msg = err.args[0] if isinstance(err, KeyError) and err.args else err
        print(f"error: {msg}", file=sys.stderr)
        return 1
    for f in manifest["files"]:
        print(f"{f['name']}  {f['dtype']}  {tuple(f['dims'])}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
