#!/usr/bin/env python3
"""Independent scalar oracle for the consistency-loss test cases.

Evaluates the focal-weighted consistency losses one pixel at a time with
plain Python floats, no project code involved. The printed values are
frozen into tests/test_loss.cpp; rerun this script to re-derive them.
"""

from fractions import Fraction


def inter_pixel(p1, q, y, r, lam):
    """One pixel of the inter-layer term against a single upper map q."""
    keep = (1 - p1) ** r * (1 - lam) * y * (p1 - q) ** 2
    suppress = lam * p1 ** r * (1 - y) * (p1 - q) ** 2
    return keep + suppress


def intra_pair_pixel(pi, pj, yi, r, lam):
    """One overlap pixel of one ordered tile pair (i, j)."""
    keep = (1 - pi) ** r * (1 - lam) * yi * (pi - pj) ** 2
    suppress = lam * pi ** r * (1 - yi) * (pi - pj) ** 2
    return keep + suppress


def main():
    r = Fraction(2)
    lam = Fraction(1, 5)

    # Case 1: single pixel, water label.
    p1, p2, p3, y = Fraction(4, 5), Fraction(3, 5), Fraction(1, 2), 1
    v1 = inter_pixel(p1, p2, y, r, lam) + inter_pixel(p1, p3, y, r, lam)
    print(f"inter case 1 (y=1): {float(v1):.17g}   exact={v1}")

    # Case 2: single pixel, background label, third map agrees.
    p1, p2, p3, y = Fraction(4, 5), Fraction(3, 5), Fraction(4, 5), 0
    v2 = inter_pixel(p1, p2, y, r, lam) + inter_pixel(p1, p3, y, r, lam)
    print(f"inter case 2 (y=0): {float(v2):.17g}   exact={v2}")

    # Case 3: four tiles sharing one overlap pixel, all background,
    # normalization area 1. Pairs ordered (i, j) with i < j.
    p = [Fraction(9, 10), Fraction(7, 10), Fraction(9, 10), Fraction(9, 10)]
    yv = [0, 0, 0, 0]
    total = Fraction(0)
    for i in range(4):
        for j in range(i + 1, 4):
            c = intra_pair_pixel(p[i], p[j], yv[i], r, lam)
            if c:
                print(f"  pair ({i + 1},{j + 1}): {float(c):.17g}")
            total += c
    print(f"intra case 3 total: {float(total):.17g}   exact={total}")


if __name__ == "__main__":
    main()
