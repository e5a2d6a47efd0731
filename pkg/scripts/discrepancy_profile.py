"""Discrepancy brackets of {theta*m + mu}, m <= M, next to M^(-1/tau) and log M / M.

    python scripts/discrepancy_profile.py --theta golden --mu 0
"""
import argparse
import csv
import sys

from beatty_ps.diophantine import discrepancy_profile, estimate_type


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--theta", default="golden")
    ap.add_argument("--mu", default="0")
    ap.add_argument("--Ms", default="10,100,1000,10000,100000,1000000")
    ap.add_argument("--depth", type=int, default=30)
    args = ap.parse_args()
    est = estimate_type(args.theta, args.depth)
    print(f"# tau_hat = {est.tau_hat:.4f} from k >= {est.k_from}", file=sys.stderr)
    rows = discrepancy_profile(args.theta, args.mu, [int(float(s)) for s in args.Ms.split(",")], type_depth=args.depth)
    w = csv.DictWriter(sys.stdout, fieldnames=list(rows[0].__dict__))
    w.writeheader()
    for r in rows:
        w.writerow(r.__dict__)


if __name__ == "__main__":
    main()
