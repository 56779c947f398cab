"""Lipschitz summation decay rates and the Eisenstein coefficient cross-check."""

import argparse

from radsum import SL2Z, TrivialMultiplier
from radsum import oracle

CASES = [(0.0, 1), (1 / 3, 1), (0.0, 2), (1 / 3, 2), (0.25, 2), (0.0, 3), (0.25, 3)]


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--cmax", type=int, default=1000)
    args = parser.parse_args()
    print("Lipschitz summation, tau = i, N in (100, 200, 400)")
    print(f"{'alpha':>6} {'p':>2} {'exponent':>9} {'stated':>7} {'|dev - limit| at 400':>21}")
    for alpha, p in CASES:
        rep = oracle.lipschitz_check(alpha, p)
        print(f"{alpha:>6.3f} {p:>2} {rep.exponent:>9.3f} {rep.stated_order:>7} "
              f"{abs(rep.deviations[-1] - rep.limit):>21.4e}")
    rho = TrivialMultiplier(0, 1, SL2Z)
    print(f"\nEisenstein coefficients, c_max = {args.cmax}")
    for s, m, y in ((1.3, 1, 1.0), (1.6, 2, 0.8), (2.0, 0, 1.0)):
        rep = oracle.eisenstein_coefficient_check(SL2Z, rho, s, m, y, args.cmax)
        line = f"s = {s}, m = {m}, y = {y}: lhs = {rep.lhs.real:.12f}, disagreement = {rep.disagreement:.2e}"
        if rep.variants:
            line += ", variants " + ", ".join(f"{k}: {v.real:.12f}" for k, v in rep.variants.items())
            line += f", matching {rep.matching_variant!r}"
        print(line)


if __name__ == "__main__":
    main()
