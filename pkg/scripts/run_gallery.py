#!/usr/bin/env python3
"""Replay the full verification gallery and write an NDJSON report file.

Example:
    python scripts/run_gallery.py --truncation 4,64,256 --out reports.ndjson
"""

import argparse
import json
import sys
import time

from opmx.cli import SuiteConfig, run_suite


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--truncation", default="64")
    parser.add_argument("--samples", type=int, default=500)
    parser.add_argument("--seed", type=int, default=42)
    parser.add_argument("--out", default=None, help="NDJSON path (default stdout)")
    args = parser.parse_args()

    config = SuiteConfig(
        truncations=tuple(int(x) for x in args.truncation.split(",")),
        samples=args.samples, seed=args.seed)
    start = time.perf_counter()
    code, reports = run_suite(config)
    elapsed = time.perf_counter() - start

    sink = open(args.out, "w", encoding="utf-8") if args.out else sys.stdout
    try:
        for obj in reports:
            sink.write(json.dumps(obj, sort_keys=True) + "\n")
    finally:
        if args.out:
            sink.close()
    matched = sum(1 for r in reports if r["match"])
    print(f"{matched}/{len(reports)} checks matched in {elapsed:.1f}s "
          f"(exit {code})", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
