"""Coefficients of the weight-0 Rademacher sum with a simple pole, across a c_max ladder."""

import argparse
from fractions import Fraction

from radsum import SL2Z, RademacherJob, TrivialMultiplier, coefficients


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--kmax", type=int, default=5)
    parser.add_argument("--ladder", type=int, nargs="+", default=[100, 1000, 10000])
    args = parser.parse_args()
    job = RademacherJob(SL2Z, Fraction(0), TrivialMultiplier(0, 1, SL2Z), Fraction(-1), k_max=args.kmax,
                        c_max=max(args.ladder))
    print(f"{'c_max':>7} {'k':>3} {'coefficient':>26} {'error':>12}")
    for c_max in args.ladder:
        series = coefficients(job, c_max=c_max)
        print(f"{c_max:>7} {0:>3} {series.constant[0].real:>26.6f} {series.constant_err[0]:>12.3e}")
        for k in range(1, args.kmax + 1):
            print(f"{c_max:>7} {k:>3} {series.coefficient(0, k).real:>26.6f} {series.error(0, k):>12.3e}")


if __name__ == "__main__":
    main()
