"""Shadow coefficients, period integrals and automorphy residuals for a negative even weight."""

import argparse
from fractions import Fraction

from radsum import SL2Z, RademacherJob, TrivialMultiplier, coefficients, shadow_coefficients
from radsum import oracle
from radsum.groups import S, T


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--weight", type=int, default=-10)
    parser.add_argument("--tau", type=complex, default=0.3 + 1.1j)
    parser.add_argument("--ladder", default="4:30,8:100,30:1000", help="k_max:c_max pairs")
    args = parser.parse_args()
    rho = TrivialMultiplier(args.weight, 1, SL2Z)
    print(f"{'k_max':>5} {'c_max':>6} {'T residual':>11} {'S residual':>11} {'literal S':>11} {'period':>10}")
    for pair in args.ladder.split(","):
        k_max, c_max = (int(x) for x in pair.split(":"))
        job = RademacherJob(SL2Z, Fraction(args.weight), rho, Fraction(-1), c_max=c_max, k_max=k_max)
        f, g = coefficients(job), shadow_coefficients(job)
        t_rep = oracle.verify_automorphy(f, g, rho, T, args.tau)
        s_rep = oracle.verify_automorphy(f, g, rho, S, args.tau)
        period = oracle.shadow_period(args.weight, args.tau, g, tol=float("inf"))
        print(f"{k_max:>5} {c_max:>6} {t_rep.completion_residual:>11.2e} {s_rep.completion_residual:>11.2e} "
              f"{s_rep.literal_residual:>11.2e} {period.residual:>10.1e}")
    a1 = g.coefficient(0, 1)
    print("shadow ratios a_n / a_1:")
    for n in range(2, min(k_max, 6) + 1):
        print(f"  n = {n}: {(g.coefficient(0, n) / a1).real:.9f}")


if __name__ == "__main__":
    main()
