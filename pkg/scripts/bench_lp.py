"""Time the membership LP per behaviour and cross-check a sample against scipy's HiGHS."""
import argparse
import time

import numpy as np
from scipy.optimize import linprog

from qudit_bell.behaviour import behaviour_tensor
from qudit_bell.haar import haar_unitaries
from qudit_bell.polytope import LocalityTester, cg_vectors, dense_matrix
from qudit_bell.states import make_mes


def highs_nonlocal(A, v):
    res = linprog(np.zeros(A.shape[1]), A_eq=A, b_eq=v, bounds=(0, None), method="highs")
    return res.status == 2  # infeasible


ap = argparse.ArgumentParser(description=__doc__)
ap.add_argument("--dims", type=int, nargs="+", default=[2, 3, 4, 5, 6, 7])
ap.add_argument("--settings", type=int, default=2)
ap.add_argument("-n", type=int, default=200)
ap.add_argument("--check", type=int, default=50, help="samples also solved with HiGHS")
args = ap.parse_args()

g = np.random.default_rng(0)
m = args.settings
for d in args.dims:
    U = haar_unitaries(g, (args.n, 2 * m), d)
    p = behaviour_tensor(make_mes(d).array, U[:, :m], U[:, m:])
    tester = LocalityTester(d, m, m)
    tester.nonlocal_mask(p[:2])  # compile
    t = time.perf_counter()
    mask = tester.nonlocal_mask(p)
    ms = (time.perf_counter() - t) / args.n * 1e3
    A = dense_matrix(d, m, m)
    k = min(args.check, args.n)
    t = time.perf_counter()
    ref = np.array([highs_nonlocal(A, v) for v in cg_vectors(p[:k])])
    ms_h = (time.perf_counter() - t) / k * 1e3
    print(f"d={d} m={m}: {ms:.2f} ms/LP (HiGHS {ms_h:.2f}), nonlocal {mask.mean():.3f}, disagreements {int(np.sum(ref != mask[:k]))}/{k}")
