"""Bound-ratio dashboards: van der Corput, type I/II, prime reduction, twisted Lambda sums.

    python scripts/dashboards.py --N-max 1e6
"""
import argparse
import csv
import sys

from beatty_ps.suite import lambda_trend, standard_sweep


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--N-max", default="1e6")
    ap.add_argument("--threads", type=int, default=1)
    args = ap.parse_args()
    w = csv.writer(sys.stdout)
    w.writerow(["check", "N", "measured", "bound", "ratio"])
    for r in standard_sweep(args.threads, int(float(args.N_max))):
        w.writerow([r.check, r.params.get("N"), f"{r.measured:.6g}", f"{r.bound:.6g}", f"{r.ratio:.4f}"])
    print(file=sys.stdout)
    w.writerow(["lambda_twisted M", "abs", "exponent"])
    for row in lambda_trend():
        w.writerow([row["M"], f"{abs(complex(row['re'], row['im'])):.6g}", f"{row['exponent']:.4f}"])


if __name__ == "__main__":
    main()
