"""Print the maximally violating states for d = 2..7 with their Bell values."""
import argparse
import time

from qudit_bell.optimizer import find_mvs

ap = argparse.ArgumentParser(description=__doc__)
ap.add_argument("--restarts", type=int, default=20)
ap.add_argument("--seed", type=int, default=0)
ap.add_argument("--dmax", type=int, default=7)
args = ap.parse_args()

for d in range(2, args.dmax + 1):
    t = time.perf_counter()
    r = find_mvs(d, args.restarts, args.seed)
    coeffs = " ".join(f"{a:.4f}" for a in r.alpha)
    print(f"d={d}  I={r.best_value:.6f}  alpha=({coeffs})  starts={r.restarts_used}  {time.perf_counter() - t:.1f}s")
