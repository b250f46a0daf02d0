"""Behaviours p(ab|xy) produced by a Schmidt state and local projective measurements."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgument
from .states import SchmidtState

CHECK_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class Behaviour:
    """p[x, y, a, b] = probability of outcomes (a, b) given settings (x, y)."""

    p: np.ndarray

    def __post_init__(self):
        p = np.array(self.p, dtype=float)
        if p.ndim != 4 or p.shape[2] != p.shape[3]:
            raise InvalidArgument(f"behaviour must have shape (mA, mB, d, d), got {p.shape}")
        p.setflags(write=False)
        object.__setattr__(self, "p", p)

    @property
    def mA(self) -> int:
        return self.p.shape[0]

    @property
    def mB(self) -> int:
        return self.p.shape[1]

    @property
    def d(self) -> int:
        return self.p.shape[2]

    def violations(self, tol: float = CHECK_TOL) -> list[str]:
        """Describe every broken invariant (empty list for a valid behaviour)."""
        p = self.p
        problems = []
        if p.min() < -1e-12:
            problems.append(f"negative entry {p.min():.3e}")
        norm = p.sum(axis=(2, 3))
        if np.abs(norm - 1).max() > tol:
            problems.append(f"slice normalization off by {np.abs(norm - 1).max():.3e}")
        alice = p.sum(axis=3)  # (x, y, a)
        if np.abs(alice - alice[:, :1]).max() > tol:
            problems.append("Alice marginal depends on Bob's setting")
        bob = p.sum(axis=2)  # (x, y, b)
        if np.abs(bob - bob[:1]).max() > tol:
            problems.append("Bob marginal depends on Alice's setting")
        return problems

    def validate(self, tol: float = CHECK_TOL) -> "Behaviour":
        problems = self.violations(tol)
        if problems:
            raise InvalidArgument("malformed behaviour: " + "; ".join(problems))
        return self

    def mix(self, other: "Behaviour", w: float) -> "Behaviour":
        return Behaviour((1 - w) * self.p + w * other.p)

    def relabeled(self, perm_x=None, perm_y=None, perm_a=None, perm_b=None) -> "Behaviour":
        """Permute settings and, per setting, outcomes. perm_a[x] permutes Alice's outcomes for setting x."""
        p = self.p
        if perm_x is not None:
            p = p[list(perm_x)]
        if perm_y is not None:
            p = p[:, list(perm_y)]
        p = p.copy()
        if perm_a is not None:
            for x, perm in enumerate(perm_a):
                p[x] = p[x][:, list(perm), :]
        if perm_b is not None:
            for y, perm in enumerate(perm_b):
                p[:, y] = p[:, y][:, :, list(perm)]
        return Behaviour(p)


def uniform_behaviour(d: int, mA: int = 2, mB: int = 2) -> Behaviour:
    return Behaviour(np.full((mA, mB, d, d), 1.0 / d**2))


def deterministic_behaviour(d: int, outcomes_a, outcomes_b) -> Behaviour:
    """The vertex where Alice outputs outcomes_a[x] and Bob outcomes_b[y]."""
    p = np.zeros((len(outcomes_a), len(outcomes_b), d, d))
    for x, a in enumerate(outcomes_a):
        for y, b in enumerate(outcomes_b):
            p[x, y, a, b] = 1.0
    return Behaviour(p)


def pr_box() -> Behaviour:
    """Two-input two-output PR box: p = 1/2 when a xor b = x*y."""
    p = np.zeros((2, 2, 2, 2))
    for x in range(2):
        for y in range(2):
            for a in range(2):
                for b in range(2):
                    if (a ^ b) == x * y:
                        p[x, y, a, b] = 0.5
    return Behaviour(p)


def behaviour_tensor(alpha: np.ndarray, Ua: np.ndarray, Ub: np.ndarray) -> np.ndarray:
    """Batched p[..., x, y, a, b] = |sum_j alpha_j Ua[x][a, j] Ub[y][b, j]|^2.

    Ua: (..., mA, d, d), Ub: (..., mB, d, d).
    """
    amp = np.einsum("j,...xaj,...ybj->...xyab", alpha, Ua, Ub, optimize=True)
    return amp.real**2 + amp.imag**2


def behaviour_from_state(state: SchmidtState, Ua, Ub) -> Behaviour:
    """Behaviour of `state` when Alice measures in the rows of Ua[x] and Bob in the rows of Ub[y]."""
    Ua = np.asarray(Ua)
    Ub = np.asarray(Ub)
    d = state.d
    if Ua.ndim != 3 or Ub.ndim != 3 or Ua.shape[1:] != (d, d) or Ub.shape[1:] != (d, d):
        raise InvalidArgument(f"expected stacks of {d}x{d} unitaries, got {Ua.shape} and {Ub.shape}")
    return Behaviour(behaviour_tensor(state.array, Ua, Ub))


def chsh_facet_oracle(b: Behaviour) -> bool:
    """Locality of a two-input two-output behaviour via the eight CHSH facets.

    For this scenario (and no-signaling input) the CHSH inequalities and
    positivity are the only nontrivial facets, so this is an exact test.
    """
    if b.d != 2 or b.mA != 2 or b.mB != 2:
        raise InvalidArgument("CHSH oracle needs d=2 and two settings per party")
    p = b.p
    E = p[:, :, 0, 0] + p[:, :, 1, 1] - p[:, :, 0, 1] - p[:, :, 1, 0]
    s = E[0, 0] + E[0, 1] + E[1, 0] + E[1, 1]
    values = [s - 2 * E[x, y] for x in range(2) for y in range(2)]
    values += [-v for v in values]
    return max(values) <= 2.0 + 1e-10
