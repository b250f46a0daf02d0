"""Local polytope membership by linear programming over deterministic strategies.

Behaviours are mapped to Collins-Gisin coordinates: a constant 1, Alice's
marginals p(a|x) and Bob's p(b|y) for all but the last outcome, and joint
p(ab|xy) for a, b < d-1. For no-signaling input this loses nothing and the
rows are linearly independent, which keeps the LP free of redundant rows.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .behaviour import Behaviour
from .errors import InvalidArgument, ScenarioTooLarge, SolverFailure
from .simplex import OPTIMAL, PIVOT_CAP, batch_phase1, phase1_bland, phase1_revised

STRATEGY_GUARD = 10**6
DEFAULT_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class StrategySet:
    """Deterministic response functions: strategy lam outputs table[lam, x] on input x."""

    d: int
    m: int
    table: np.ndarray

    def __len__(self) -> int:
        return self.table.shape[0]

    def outcomes(self, lam: int) -> tuple[int, ...]:
        return tuple(int(v) for v in self.table[lam])

    def index(self, outcomes) -> int:
        return int(sum(int(o) * self.d**x for x, o in enumerate(outcomes)))


@lru_cache(maxsize=None)
def enumerate_strategies(d: int, m: int) -> StrategySet:
    """All d**m strategies, little-endian base-d digits of the index."""
    if d < 1 or m < 1:
        raise InvalidArgument(f"need d >= 1 and m >= 1, got d={d}, m={m}")
    if d**m > STRATEGY_GUARD:
        raise ScenarioTooLarge(f"d**m = {d**m} exceeds {STRATEGY_GUARD}")
    idx = np.arange(d**m)
    table = np.stack([(idx // d**x) % d for x in range(m)], axis=1)
    table.setflags(write=False)
    return StrategySet(d, m, table)


@dataclass(frozen=True, eq=False)
class MembershipResult:
    is_local: bool
    slack: float
    certificate: np.ndarray | None = None  # q[lam, mu] when local
    bell_functional: np.ndarray | None = None  # separating duals (CG coordinates) when nonlocal
    pivots: int = 0


def cg_size(d: int, mA: int, mB: int) -> int:
    e = d - 1
    return 1 + mA * e + mB * e + mA * mB * e * e


def cg_vectors(p: np.ndarray) -> np.ndarray:
    """Collins-Gisin coordinates for a batch of behaviours p[..., x, y, a, b]."""
    lead = p.shape[:-4]
    mA, mB, d, _ = p.shape[-4:]
    e = d - 1
    alice = p[..., :, 0, :e, :].sum(axis=-1)  # p(a|x) from y=0
    bob = p[..., 0, :, :, :e].sum(axis=-2)  # p(b|y) from x=0
    joint = p[..., :e, :e]
    ones = np.ones(lead + (1,))
    return np.concatenate(
        [ones, alice.reshape(lead + (-1,)), bob.reshape(lead + (-1,)), joint.reshape(lead + (-1,))],
        axis=-1,
    )


@lru_cache(maxsize=None)
def cg_columns(d: int, mA: int, mB: int) -> np.ndarray:
    """Sparse columns for every strategy pair (lam, mu), index lam * d**mB + mu.

    Row j of the result lists the CG rows where that vertex has a 1, padded with -1.
    """
    SA = enumerate_strategies(d, mA).table
    SB = enumerate_strategies(d, mB).table
    e = d - 1
    nA, nB = len(SA), len(SB)
    K = 1 + mA + mB + mA * mB
    cols = -np.ones((nA * nB, K), dtype=np.int64)
    offA = 1
    offB = offA + mA * e
    offJ = offB + mB * e
    for la in range(nA):
        for mu in range(nB):
            rows = [0]
            for x in range(mA):
                if SA[la, x] < e:
                    rows.append(offA + x * e + SA[la, x])
            for y in range(mB):
                if SB[mu, y] < e:
                    rows.append(offB + y * e + SB[mu, y])
            for x in range(mA):
                for y in range(mB):
                    a, b = SA[la, x], SB[mu, y]
                    if a < e and b < e:
                        rows.append(offJ + ((x * mB + y) * e + a) * e + b)
            cols[la * nB + mu, : len(rows)] = rows
    cols.setflags(write=False)
    return cols


def dense_matrix(d: int, mA: int, mB: int) -> np.ndarray:
    cols = cg_columns(d, mA, mB)
    A = np.zeros((cg_size(d, mA, mB), cols.shape[0]))
    for j, row in enumerate(cols):
        A[row[row >= 0], j] = 1.0
    return A


def default_pivot_cap(d: int, mA: int, mB: int) -> int:
    return 50 * cg_size(d, mA, mB) + 1000


def is_local(b: Behaviour, tol: float = DEFAULT_TOL, method: str = "revised", max_pivots: int | None = None) -> MembershipResult:
    """Decide whether `b` lies in the local polytope.

    method: "revised" (steepest-edge revised simplex) or "bland" (dense
    tableau reference). Raises SolverFailure when the pivot cap is hit.
    """
    if tol <= 0:
        raise InvalidArgument("tol must be positive")
    b.validate()
    d, mA, mB = b.d, b.mA, b.mB
    cols = cg_columns(d, mA, mB)
    rhs = np.clip(cg_vectors(b.p), 0.0, None)
    m = len(rhs)
    cap = default_pivot_cap(d, mA, mB) if max_pivots is None else max_pivots
    n = cols.shape[0]
    if method == "revised":
        obj, basis, xB, y, status, pivots = phase1_revised(cols, m, rhs, tol, cap)
        q = np.zeros(n)
        structural = basis < n
        q[basis[structural]] = np.clip(xB[structural], 0.0, None)
    elif method == "bland":
        obj, q, status = phase1_bland(dense_matrix(d, mA, mB), rhs, tol, cap)
        q = np.clip(q, 0.0, None)
        y, pivots = None, 0
    else:
        raise InvalidArgument(f"unknown LP method {method!r}")
    if status == PIVOT_CAP:
        raise SolverFailure(f"pivot cap {cap} exceeded (d={d}, mA={mA}, mB={mB})")
    obj = max(float(obj), 0.0)
    if obj <= tol:
        nB = d**mB
        return MembershipResult(True, obj, q.reshape(-1, nB), None, pivots)
    return MembershipResult(False, obj, None, y, pivots)


def reconstruct(certificate: np.ndarray, d: int, mA: int, mB: int) -> np.ndarray:
    """Behaviour p[x, y, a, b] of the mixture of deterministic strategies with weights q[lam, mu]."""
    SA = enumerate_strategies(d, mA).table
    SB = enumerate_strategies(d, mB).table
    p = np.zeros((mA, mB, d, d))
    for x in range(mA):
        for y in range(mB):
            np.add.at(p[x, y], (SA[:, x][:, None], SB[:, y][None, :]), certificate)
    return p


class LocalityTester:
    """Batched membership tests for a fixed (d, mA, mB) scenario."""

    def __init__(self, d: int, mA: int, mB: int, tol: float = DEFAULT_TOL):
        self.d, self.mA, self.mB, self.tol = d, mA, mB, tol
        self.cols = cg_columns(d, mA, mB)
        self.m = cg_size(d, mA, mB)
        self.cap = default_pivot_cap(d, mA, mB)

    def nonlocal_mask(self, p: np.ndarray) -> np.ndarray:
        """Boolean array over a batch p[s, x, y, a, b]: True where outside the local polytope."""
        rhs = np.ascontiguousarray(np.clip(cg_vectors(p), 0.0, None))
        obj, status = batch_phase1(self.cols, self.m, rhs, self.tol, self.cap)
        if np.any(status != OPTIMAL):
            bad = int(np.flatnonzero(status != OPTIMAL)[0])
            raise SolverFailure(f"pivot cap exceeded on batch item {bad} (d={self.d})")
        return obj > self.tol
