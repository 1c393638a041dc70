"""Print the least supporting-weight ratio w1/wn for the steep diagonal instance, n = 2..N."""
from __future__ import annotations

import sys
import time

from maxpareto.solver import steep_diagonal_ratio

if __name__ == "__main__":
    top = int(sys.argv[1]) if len(sys.argv) > 1 else 8
    print(f"{'n':>3}  {'least ratio':>14}  {'(n-1)^(n-1)':>14}  {'quotient':>9}  seconds")
    for n in range(2, top + 1):
        t0 = time.perf_counter()
        r = steep_diagonal_ratio(n)
        bound = (n - 1) ** (n - 1)
        print(f"{n:>3}  {str(r):>14}  {bound:>14}  {float(r / bound):>9.3f}  {time.perf_counter() - t0:.2f}")
