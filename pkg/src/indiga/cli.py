"""Command line entry point: ``indiga run`` and ``indiga examples``."""

from __future__ import annotations

import argparse
import sys
from importlib import resources

from . import __version__
from .errors import ParseError, SessionNameError
from .session import Config, emit_report, execute, parse_session


def bundled_examples():
    root = resources.files("indiga") / "examples"
    return sorted(p.name for p in root.iterdir() if p.name.endswith(".session"))


def read_example(name: str) -> str:
    if not name.endswith(".session"):
        name += ".session"
    return (resources.files("indiga") / "examples" / name).read_text(encoding="utf-8")


def build_parser():
    ap = argparse.ArgumentParser(prog="indiga", description="Run tower/derivation session scripts.")
    ap.add_argument("--version", action="version", version=f"indiga {__version__}")
    sub = ap.add_subparsers(dest="cmd", required=True)
    run = sub.add_parser("run", help="execute a session script")
    run.add_argument("script", help="path to a .session file, or the name of a bundled example")
    run.add_argument("--depth", type=int, default=6, help="default level for checks (6)")
    run.add_argument("--power", type=int, default=12, help="power window for integrability (12)")
    run.add_argument("--deg", type=int, default=4, help="degree bound for kernel bases (4)")
    run.add_argument("--seed", type=int, default=0, help="seed for sampled elements (0)")
    run.add_argument("--samples", type=int, default=20, help="random samples per property check (20)")
    run.add_argument("--max-pairs", type=int, default=100_000, help="Groebner pair cap (100000)")
    run.add_argument("--max-reductions", type=int, default=100_000, help="reduction step cap (100000)")
    run.add_argument("--format", choices=("json", "text"), default="json")
    run.add_argument("--timings", action="store_true", help="include wall-clock timings (not byte-stable)")
    run.add_argument("--fail-fast", action="store_true", help="stop at the first failed record")
    sub.add_parser("examples", help="list bundled example scripts")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.cmd == "examples":
        for name in bundled_examples():
            print(name)
        return 0
    try:
        with open(args.script, encoding="utf-8") as fh:
            text = fh.read()
        source = args.script
    except FileNotFoundError:
        try:
            text = read_example(args.script)
            source = args.script if args.script.endswith(".session") else args.script + ".session"
        except FileNotFoundError:
            print(f"indiga: no such script: {args.script}", file=sys.stderr)
            return 2
    try:
        script = parse_session(text)
    except (ParseError, SessionNameError) as exc:
        print(f"indiga: {args.script}: {exc}", file=sys.stderr)
        return 2
    config = Config(
        depth=args.depth,
        power=args.power,
        deg=args.deg,
        seed=args.seed,
        samples=args.samples,
        max_pairs=args.max_pairs,
        max_reductions=args.max_reductions,
        fail_fast=args.fail_fast,
    )
    report = execute(script, config, source)
    sys.stdout.buffer.write(emit_report(report, args.format, args.timings))
    sys.stdout.flush()
    return 1 if report.failed else 0


if __name__ == "__main__":
    sys.exit(main())
