"""Run the acceptance battery and write the full report as JSON.

    python scripts/run_acceptance.py --threads 4 --out results/acceptance.json
"""
import argparse
import json
import sys
from pathlib import Path

from beatty_ps.suite import run_suite


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--only", default=None, help="comma-separated criterion numbers")
    ap.add_argument("--out", type=Path, default=None)
    args = ap.parse_args()
    only = {int(s) for s in args.only.split(",")} if args.only else None
    checks = run_suite(args.threads, only, log=print)
    if args.out:
        args.out.parent.mkdir(parents=True, exist_ok=True)
        rows = [{**c.payload(), "elapsed_s": c.elapsed_s} for c in checks]
        args.out.write_text(json.dumps(rows, indent=2, default=str))
    sys.exit(0 if all(c.passed for c in checks) else 1)


if __name__ == "__main__":
    main()
