"""CGLMP functional for measurements built from phase shifters and a Fourier multiport.

Alice applies diag(exp(i phiA[a][m])), Bob diag(exp(i phiB[b][n])), each
followed by a discrete Fourier transform and a computational-basis readout.
Settings a, b are 1-based in the public API (1 or 2) to match the usual
notation; arrays store them at index 0 and 1.

Two evaluators are provided. `cglmp_direct` sums joint probabilities term by
term and is the reference. `cglmp_closed` uses the cosine form
    I_d = sum_{a,b} sum_{m>n} C_ab^{mn} cos(dphi_ab^{mn} + Psi_ab^{mn})
and is what the Monte Carlo engine runs (vectorized in `RelabeledEvaluator`).
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import InvalidArgument
from .states import SchmidtState

TWO_PI = 2.0 * np.pi
CLASSICAL_BOUND = 2.0

# (swap Alice settings, swap Bob settings)
RELABELINGS = ((False, False), (True, False), (False, True), (True, True))


@dataclass(frozen=True, eq=False)
class PhaseConfig:
    """Phase-shifter angles; phiA[a-1, m] and phiB[b-1, n] in radians, reduced to [0, 2pi)."""

    d: int
    phiA: np.ndarray
    phiB: np.ndarray

    def __post_init__(self):
        phiA = np.mod(np.asarray(self.phiA, dtype=float), TWO_PI)
        phiB = np.mod(np.asarray(self.phiB, dtype=float), TWO_PI)
        if phiA.shape != (2, self.d) or phiB.shape != (2, self.d):
            raise InvalidArgument(f"phase arrays must have shape (2, {self.d})")
        phiA.setflags(write=False)
        phiB.setflags(write=False)
        object.__setattr__(self, "phiA", phiA)
        object.__setattr__(self, "phiB", phiB)

    @classmethod
    def zeros(cls, d: int) -> "PhaseConfig":
        return cls(d, np.zeros((2, d)), np.zeros((2, d)))

    @classmethod
    def from_array(cls, arr) -> "PhaseConfig":
        """From an array of shape (2, 2, d) indexed [party, setting, level]."""
        arr = np.asarray(arr, dtype=float)
        return cls(arr.shape[-1], arr[0], arr[1])

    @classmethod
    def random(cls, d: int, gen: np.random.Generator) -> "PhaseConfig":
        return cls.from_array(TWO_PI * gen.random((2, 2, d)))

    def as_array(self) -> np.ndarray:
        return np.stack([self.phiA, self.phiB])

    def relabeled(self, swap_a: bool, swap_b: bool) -> "PhaseConfig":
        phiA = self.phiA[::-1] if swap_a else self.phiA
        phiB = self.phiB[::-1] if swap_b else self.phiB
        return PhaseConfig(self.d, phiA, phiB)

    def to_dict(self) -> dict:
        return {"d": self.d, "phiA": self.phiA.tolist(), "phiB": self.phiB.tolist()}


@dataclass(frozen=True)
class BellValue:
    value: float
    classical_bound: float = CLASSICAL_BOUND

    @property
    def violated(self) -> bool:
        return self.value > self.classical_bound


@dataclass(frozen=True, eq=False)
class ClosedFormCoefficients:
    """Coefficient arrays indexed [a-1, b-1, m, n]; entries with m <= n are zero."""

    d: int
    C: np.ndarray
    Psi: np.ndarray
    A: np.ndarray
    Ccal: np.ndarray


def _check_setting(s):
    if s not in (1, 2):
        raise InvalidArgument(f"setting must be 1 or 2, got {s!r}")


def _check_pair(state: SchmidtState, phases: PhaseConfig):
    if state.d != phases.d:
        raise InvalidArgument(f"state has d={state.d} but phases have d={phases.d}")


def joint_probability(state: SchmidtState, phases: PhaseConfig, a: int, b: int, k: int, l: int, clamp: bool = True) -> float:
    """P_ab(k, l): probability that Alice reads k and Bob reads l under settings a, b.

    Rounding can push the value a hair outside [0, 1]; with `clamp` such
    values are snapped back.
    """
    _check_pair(state, phases)
    _check_setting(a)
    _check_setting(b)
    d = state.d
    if not (0 <= k < d and 0 <= l < d):
        raise InvalidArgument(f"outcomes must lie in 0..{d - 1}, got ({k}, {l})")
    alpha = state.array
    pa, pb = phases.phiA[a - 1], phases.phiB[b - 1]
    shift = (k - l) % d
    total = 0.0
    for m in range(d):
        for n in range(m):
            delta = pa[m] + pb[m] - pa[n] - pb[n] + TWO_PI / d * (m - n) * shift
            total += alpha[m] * alpha[n] * np.cos(delta)
    p = 1.0 / d**2 + 2.0 / d**2 * total
    if not clamp:
        return p
    if -1e-12 <= p < 0.0:
        p = 0.0
    elif 1.0 < p <= 1.0 + 1e-12:
        p = 1.0
    return p


def _offsets(k: int) -> dict[tuple[int, int], tuple[int, int]]:
    # (a, b) -> (kappa, lambda); unlisted coefficients are zero
    return {(1, 1): (k, 0), (2, 2): (k, 0), (1, 2): (0, k), (2, 1): (0, k + 1)}


def bk_term(state: SchmidtState, phases: PhaseConfig, k: int) -> float:
    """B_k = P(A1=B1+k) + P(B1=A2+k+1) + P(A2=B2+k) + P(B2=A1+k), outcomes mod d."""
    d = state.d
    if not -d <= k < d:
        raise InvalidArgument(f"k must satisfy -d <= k < d, got {k}")
    total = 0.0
    for (a, b), (kap, lam) in _offsets(k).items():
        for j in range(d):
            total += joint_probability(state, phases, a, b, (j + kap) % d, (j + lam) % d)
    return total


def bk_shortcut(state: SchmidtState, phases: PhaseConfig, k: int) -> float:
    """B_k from one probability per (a, b): P_ab depends on the outcomes only through k - l mod d."""
    d = state.d
    if not -d <= k < d:
        raise InvalidArgument(f"k must satisfy -d <= k < d, got {k}")
    return d * sum(
        joint_probability(state, phases, a, b, kap % d, lam % d) for (a, b), (kap, lam) in _offsets(k).items()
    )


def cglmp_weights(d: int) -> np.ndarray:
    return np.array([1.0 - 2.0 * k / (d - 1) for k in range(d // 2)])


def cglmp_direct(state: SchmidtState, phases: PhaseConfig) -> BellValue:
    _check_pair(state, phases)
    value = 0.0
    for k, w in enumerate(cglmp_weights(state.d)):
        value += w * (bk_term(state, phases, k) - bk_term(state, phases, -(k + 1)))
    return BellValue(value)


@lru_cache(maxsize=None)
def _ccal_by_gap(d: int) -> np.ndarray:
    """Ccal as a function of the gap m - n (index 0 unused)."""
    gaps = np.arange(d)
    w = cglmp_weights(d)
    ks = np.arange(len(w))
    return (w[None, :] * np.sin(np.pi / d * gaps[:, None] * (2 * ks[None, :] + 1))).sum(axis=1)


def _sign_c(a: int, b: int) -> int:
    return (-1) ** (b * (1 + a))


def _sign_psi(a: int, b: int) -> int:
    return (-1) ** (a * (1 + b))


def closed_form_coefficients(state: SchmidtState, d: int | None = None) -> ClosedFormCoefficients:
    d = state.d if d is None else d
    if d != state.d:
        raise InvalidArgument(f"state has d={state.d}, requested d={d}")
    alpha = state.array
    ccal_gap = _ccal_by_gap(d)
    C = np.zeros((2, 2, d, d))
    Psi = np.zeros((2, 2, d, d))
    A = np.zeros((2, 2, d, d))
    Ccal = np.zeros((d, d))
    for m in range(d):
        for n in range(m):
            g = m - n
            Ccal[m, n] = ccal_gap[g]
            for a in (1, 2):
                for b in (1, 2):
                    C[a - 1, b - 1, m, n] = 4.0 * alpha[m] * alpha[n] / d * _sign_c(a, b) * ccal_gap[g]
                    Psi[a - 1, b - 1, m, n] = _sign_psi(a, b) * (np.pi / 2 - np.pi * g / d)
                    A[a - 1, b - 1, m, n] = (-1) ** (a * (1 + b) + 1) / np.tan(np.pi * g / d)
    return ClosedFormCoefficients(d, C, Psi, A, Ccal)


def cglmp_closed(state: SchmidtState, phases: PhaseConfig, coeffs: ClosedFormCoefficients | None = None) -> BellValue:
    _check_pair(state, phases)
    coeffs = closed_form_coefficients(state) if coeffs is None else coeffs
    d = state.d
    m, n = pair_indices(d)
    value = 0.0
    for a in range(2):
        for b in range(2):
            pa, pb = phases.phiA[a], phases.phiB[b]
            dphi = pa[m] + pb[m] - pa[n] - pb[n]
            value += float(np.sum(coeffs.C[a, b, m, n] * np.cos(dphi + coeffs.Psi[a, b, m, n])))
    return BellValue(value)


def violates_with_relabelings(state: SchmidtState, phases: PhaseConfig) -> bool:
    """True if any of the four setting relabelings gives I_d > 2 (strict)."""
    coeffs = closed_form_coefficients(state)
    return any(
        cglmp_closed(state, phases.relabeled(sa, sb), coeffs).value > CLASSICAL_BOUND
        for sa, sb in RELABELINGS
    )


@lru_cache(maxsize=None)
def pair_indices(d: int) -> tuple[np.ndarray, np.ndarray]:
    """Index arrays (m, n) over all pairs m > n, ordered by m then n."""
    m, n = np.tril_indices(d, k=-1)
    m.setflags(write=False)
    n.setflags(write=False)
    return m, n


@lru_cache(maxsize=None)
def pair_kernel(d: int) -> tuple[np.ndarray, np.ndarray]:
    """State-independent parts of the closed form per pair: (4/d) sign Ccal and Psi, shape (2, 2, P)."""
    m, n = pair_indices(d)
    gap = m - n
    ccal = _ccal_by_gap(d)[gap]
    K = np.empty((2, 2, len(m)))
    Psi = np.empty((2, 2, len(m)))
    for a in (1, 2):
        for b in (1, 2):
            K[a - 1, b - 1] = 4.0 / d * _sign_c(a, b) * ccal
            Psi[a - 1, b - 1] = _sign_psi(a, b) * (np.pi / 2 - np.pi * gap / d)
    return K, Psi


def phase_features(phases: np.ndarray) -> np.ndarray:
    """cos and sin of every per-pair phase sum, for a batch of phase arrays.

    phases: shape (N, 2, 2, d) indexed [sample, party, setting, level].
    Returns shape (N, 2, 2, 2, P) indexed [sample, a', b', (cos, sin), pair].
    """
    d = phases.shape[-1]
    m, n = pair_indices(d)
    alice, bob = phases[:, 0], phases[:, 1]
    dA = alice[..., m] - alice[..., n]  # (N, 2, P)
    dB = bob[..., m] - bob[..., n]
    s = dA[:, :, None, :] + dB[:, None, :, :]  # (N, 2, 2, P)
    return np.stack([np.cos(s), np.sin(s)], axis=3)


def relabeled_pair_kernels(d: int) -> np.ndarray:
    """Linear map from phase features to per-pair kernels for each relabeling.

    Returns W of shape (2*2*2*P, 4, P) such that, with F the flattened
    features of one sample, K = F @ W.reshape(-1, 4*P) gives K[r, p] and
    the relabeled Bell value is sum_p alpha_m alpha_n K[r, p].
    """
    K, Psi = pair_kernel(d)
    P = K.shape[-1]
    W = np.zeros((2, 2, 2, P, 4, P))
    eye = np.arange(P)
    for r, (sa, sb) in enumerate(RELABELINGS):
        for a_ in range(2):
            for b_ in range(2):
                a = 1 - a_ if sa else a_
                b = 1 - b_ if sb else b_
                W[a_, b_, 0, eye, r, eye] = K[a, b] * np.cos(Psi[a, b])
                W[a_, b_, 1, eye, r, eye] = -K[a, b] * np.sin(Psi[a, b])
    return W.reshape(8 * P, 4, P)


class RelabeledEvaluator:
    """Vectorized CGLMP values of one state under the four relabelings."""

    def __init__(self, state: SchmidtState):
        self.state = state
        d = state.d
        m, n = pair_indices(d)
        alpha = state.array
        w = alpha[m] * alpha[n]
        keep = w != 0.0
        self.trivial = not keep.any()
        self.W = np.einsum("frp,p->fr", relabeled_pair_kernels(d), w)
        # drop features of pairs with zero weight; they contribute nothing
        feat_keep = np.tile(keep, 8)
        self.feat_keep = feat_keep
        self.W = self.W[feat_keep]

    def values(self, phases: np.ndarray) -> np.ndarray:
        """Bell values, shape (N, 4), for phases of shape (N, 2, 2, d)."""
        N = phases.shape[0]
        if self.trivial:
            return np.zeros((N, 4))
        F = phase_features(phases).reshape(N, -1)[:, self.feat_keep]
        return F @ self.W

    def violations(self, phases: np.ndarray) -> np.ndarray:
        return (self.values(phases) > CLASSICAL_BOUND).any(axis=1)
