"""Smallest n from which each finite-n check holds.

Several bounds only hold "for large n". This sweep locates the crossover
for the checks we can evaluate cheaply and prints one line per check.
"""

import argparse
import math
from fractions import Fraction

from buchiavg.bounds import gnp_certificate, smallest_holding_n, very_large_k_certificate
from buchiavg.exact import r_np_exact
from buchiavg.models import DegreeSpec


def half_tail(n: int) -> bool:
    return 1 - r_np_exact(n, Fraction(1, 2)) < Fraction(3, 4) ** n


def gnp_half(n: int) -> bool:
    return gnp_certificate(n, Fraction(1, 2)).passed


def very_large(degrees: str, ell_offset: int):
    """Verdicts at ℓ = d_max + ell_offset for the spec `degrees` scaled to n."""

    def check(n: int) -> bool:
        spec = DegreeSpec.parse(degrees.format(n=n, half=n // 2))
        ell = spec.d_max + ell_offset
        if ell > n / math.e**2:
            return False
        return very_large_k_certificate(spec, ell).passed

    return check


def bisect(check, lo: int, hi: int) -> int | None:
    """Smallest n in (lo, hi] with check(n), assuming monotone in n."""
    if not check(hi):
        return None
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if check(mid):
            hi = mid
        else:
            lo = mid
    return hi


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--max-exact", type=int, default=120, help="largest n for exact sweeps")
    args = ap.parse_args()

    grid = range(2, args.max_exact + 1)
    print(f"1-R(n,1/2) < (3/4)^n holds from n = {smallest_holding_n(half_tail, grid)}")
    print(f"G(n,1/2) certificate passes from n = {smallest_holding_n(gnp_half, grid)}")
    for degrees in ("2:{n}:1", "3:{n}:1", "2:{half}:1,3:{half}:0"):
        for offset in (1, 2):
            n = bisect(very_large(degrees, offset), 10, 10**9)
            print(f"very-large-k {degrees} at l = d_max+{offset} passes from n = {n}")


if __name__ == "__main__":
    main()
