"""Partition numbers from the weight -1/2 eta-multiplier Rademacher sum."""

import argparse
from fractions import Fraction

from radsum import SL2Z, EtaMultiplier, RademacherJob, coefficients


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--nmax", type=int, default=30)
    parser.add_argument("--cmax", type=int, default=100)
    args = parser.parse_args()
    weight = Fraction(-1, 2)
    job = RademacherJob(SL2Z, weight, EtaMultiplier(-1, weight, SL2Z), Fraction(-1, 24),
                        c_max=args.cmax, k_max=args.nmax)
    series = coefficients(job)
    print(f"{'n':>4} {'value':>22} {'rounded':>12} {'error':>10}")
    for n in range(1, args.nmax + 1):
        k = Fraction(n) - Fraction(1, 24)
        value = series.coefficient(0, k).real
        print(f"{n:>4} {value:>22.6f} {round(value):>12} {series.error(0, k):>10.2e}")


if __name__ == "__main__":
    main()
