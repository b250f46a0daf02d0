"""Pure two-qudit states in Schmidt form, sum_j alpha_j |jj>."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgument, InvalidDimension, InvalidRank

NORM_TOL = 1e-12


@dataclass(frozen=True)
class SchmidtState:
    """Real nonnegative Schmidt coefficients of a pure state of two d-level systems."""

    d: int
    alpha: tuple[float, ...]

    def __post_init__(self):
        if self.d < 2:
            raise InvalidDimension(f"dimension must be >= 2, got {self.d}")
        if len(self.alpha) != self.d:
            raise InvalidArgument(f"expected {self.d} coefficients, got {len(self.alpha)}")
        a = np.asarray(self.alpha, dtype=float)
        if np.any(a < 0):
            raise InvalidArgument("Schmidt coefficients must be nonnegative")
        if abs(float(a @ a) - 1.0) > NORM_TOL:
            raise InvalidArgument(f"coefficients not normalized: sum of squares {a @ a!r}")

    @classmethod
    def from_amplitudes(cls, alpha, d: int | None = None) -> "SchmidtState":
        """Normalize `alpha` (absolute values taken) and zero-pad it to length `d`."""
        a = np.abs(np.asarray(alpha, dtype=float))
        d = len(a) if d is None else d
        if len(a) > d:
            raise InvalidArgument(f"{len(a)} coefficients do not fit dimension {d}")
        norm = np.linalg.norm(a)
        if norm == 0:
            raise InvalidArgument("zero vector is not a state")
        a = np.concatenate([a / norm, np.zeros(d - len(a))])
        return cls(d, tuple(float(x) for x in a))

    @property
    def array(self) -> np.ndarray:
        return np.asarray(self.alpha, dtype=float)

    @property
    def rank(self) -> int:
        return int(np.count_nonzero(self.array > 0))

    def padded(self, d: int) -> "SchmidtState":
        """The same state embedded in a larger local dimension."""
        return SchmidtState.from_amplitudes(self.alpha, d)


def make_mes(d: int) -> SchmidtState:
    if d < 2:
        raise InvalidDimension(f"dimension must be >= 2, got {d}")
    return SchmidtState(d, tuple([1 / np.sqrt(d)] * d))


def make_mss(r: int, d: int) -> SchmidtState:
    """Balanced rank-r state (|00> + ... + |r-1,r-1>)/sqrt(r) in dimension d."""
    if d < 2:
        raise InvalidDimension(f"dimension must be >= 2, got {d}")
    if not 1 <= r <= d:
        raise InvalidRank(f"rank must satisfy 1 <= r <= d={d}, got {r}")
    return SchmidtState(d, tuple([1 / np.sqrt(r)] * r + [0.0] * (d - r)))


def make_family_state(theta0: float, theta1: float, d: int) -> SchmidtState:
    """cos t0 |00> + sin t0 cos t1 |11> + sin t0 sin t1 |22>, zero-padded to d.

    Angles outside [0, pi/2] are allowed; the sign is dropped by taking
    absolute values, which is a local phase change.
    """
    if d < 3:
        raise InvalidDimension(f"rank-3 family needs d >= 3, got {d}")
    amp = [np.cos(theta0), np.sin(theta0) * np.cos(theta1), np.sin(theta0) * np.sin(theta1)]
    return SchmidtState.from_amplitudes(amp, d)
