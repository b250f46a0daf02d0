"""Probability-of-violation maps over the rank-3 family, and the log-linear decay fit.

The CGLMP scan uses common random numbers: every grid point sees the same
phase samples (those `estimate_pv_cglmp` would draw with the same seed), so
neighbouring points differ by much less than their individual noise. Per
sample, each relabeled Bell value is a quadratic form alpha^T M_r alpha on
the three-level support; samples whose M_r all have largest eigenvalue
below the bound cannot violate anywhere on the grid and are skipped.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import partial
from multiprocessing import get_context

import numpy as np

from .cglmp import CLASSICAL_BOUND, TWO_PI, pair_indices, phase_features, relabeled_pair_kernels
from .errors import InvalidArgument, InvalidDimension, InvalidPoint
from .estimate import BEHAVIOUR, BLOCK_SIZE, CGLMP, DEFAULT_Z, default_workers, estimate_pv_behaviour, wilson_interval
from .rng import RngStream
from .states import make_family_state

FAMILY_RANK = 3
DEFAULT_GRID = 40
_EIG_MARGIN = 1e-9


@dataclass(frozen=True, eq=False)
class ScanGrid:
    d: int
    scenario: str
    theta0_axis: np.ndarray
    theta1_axis: np.ndarray
    violations: np.ndarray  # [i0, i1]
    samples: int
    seed: int

    def __post_init__(self):
        if self.violations.shape != (len(self.theta0_axis), len(self.theta1_axis)):
            raise InvalidArgument("grid shape does not match its axes")

    @property
    def pv(self) -> np.ndarray:
        return self.violations / self.samples

    @property
    def argmax(self) -> tuple[float, float, float]:
        i, j = np.unravel_index(int(np.argmax(self.violations)), self.violations.shape)
        return float(self.theta0_axis[i]), float(self.theta1_axis[j]), float(self.pv[i, j])

    def interval(self, i: int, j: int, z: float = DEFAULT_Z) -> tuple[float, float]:
        return wilson_interval(int(self.violations[i, j]), self.samples, z)

    def to_dict(self) -> dict:
        t0, t1, p = self.argmax
        return {
            "d": self.d,
            "scenario": self.scenario,
            "theta0_axis": self.theta0_axis.tolist(),
            "theta1_axis": self.theta1_axis.tolist(),
            "violations": self.violations.tolist(),
            "samples": self.samples,
            "seed": self.seed,
            "argmax": [t0, t1, p],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ScanGrid":
        return cls(
            data["d"],
            data["scenario"],
            np.asarray(data["theta0_axis"], dtype=float),
            np.asarray(data["theta1_axis"], dtype=float),
            np.asarray(data["violations"], dtype=np.int64),
            data["samples"],
            data["seed"],
        )


def family_axis(grid_n: int) -> np.ndarray:
    if grid_n < 2:
        raise InvalidArgument("grid_n must be >= 2")
    return np.linspace(0.0, np.pi / 2, grid_n)


def family_products(theta0: np.ndarray, theta1: np.ndarray) -> np.ndarray:
    """alpha_m alpha_n for the support pairs (1,0), (2,0), (2,1); shape (..., 3)."""
    a0 = np.abs(np.cos(theta0))
    a1 = np.abs(np.sin(theta0) * np.cos(theta1))
    a2 = np.abs(np.sin(theta0) * np.sin(theta1))
    return np.stack([a1 * a0, a2 * a0, a2 * a1], axis=-1)


def _support_kernel(d: int) -> tuple[np.ndarray, np.ndarray]:
    """Feature mask and kernel matrix for the pairs inside the first three levels."""
    m, n = pair_indices(d)
    keep = m < FAMILY_RANK  # pairs (1,0), (2,0), (2,1) in this order
    P = len(m)
    W = relabeled_pair_kernels(d).reshape(8, P, 4, P)
    W = W[:, keep][:, :, :, keep]
    return np.tile(keep, 8), W.reshape(8 * FAMILY_RANK, 4 * FAMILY_RANK)


def quadratic_forms(K: np.ndarray) -> np.ndarray:
    """Symmetric 3x3 matrices M with value = alpha^T M alpha, from pair kernels K[..., 3]."""
    M = np.zeros(K.shape[:-1] + (3, 3))
    for p, (i, j) in enumerate(((1, 0), (2, 0), (2, 1))):
        M[..., i, j] = M[..., j, i] = K[..., p] / 2
    return M


def cglmp_grid_block(d: int, products: np.ndarray, seed: int, block: int, n: int) -> np.ndarray:
    """Violation counts at every grid point for one block of phase samples.

    products: (G, 3) array of alpha_m alpha_n per grid point.
    """
    gen = RngStream(seed, block).generator()
    phases = TWO_PI * gen.random((n, 2, 2, d))
    feat_keep, W = _support_kernel(d)
    F = phase_features(phases).reshape(n, -1)[:, feat_keep]
    K = (F @ W).reshape(n, 4, FAMILY_RANK)
    M = quadratic_forms(K)
    # Gershgorin first (cheap), exact eigenvalue for what survives
    rough = np.abs(M).sum(axis=-1).max(axis=-1) > CLASSICAL_BOUND - _EIG_MARGIN
    cand = np.flatnonzero(rough.any(axis=1))
    lam = np.linalg.eigvalsh(M[cand])[..., -1]
    cand = cand[(lam > CLASSICAL_BOUND - _EIG_MARGIN).any(axis=1)]
    if len(cand) == 0:
        return np.zeros(len(products), dtype=np.int64)
    values = K[cand] @ products.T  # (c, 4, G)
    return (values > CLASSICAL_BOUND).any(axis=1).sum(axis=0).astype(np.int64)


def _cglmp_grid(d, products, samples, seed, workers):
    jobs = [(b, min(BLOCK_SIZE, samples - b * BLOCK_SIZE)) for b in range(math.ceil(samples / BLOCK_SIZE))]
    fn = partial(_grid_job, d, products, seed)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers, mp_context=get_context("fork")) as pool:
            parts = list(pool.map(fn, jobs, chunksize=8))
    else:
        parts = [fn(j) for j in jobs]
    return np.sum(parts, axis=0)


def _grid_job(d, products, seed, job):
    block, n = job
    return cglmp_grid_block(d, products, seed, block, n)


def scan_family(
    d: int,
    scenario: str = CGLMP,
    grid_n: int = DEFAULT_GRID,
    samples_per_point: int = 10**5,
    seed: int = 0,
    workers: int | None = None,
    mA: int = 2,
    mB: int = 2,
) -> ScanGrid:
    """p_v over (theta0, theta1) in [0, pi/2]^2 for the zero-padded rank-3 family."""
    if d < 4:
        raise InvalidDimension(f"family scan needs d >= 4, got {d}")
    if scenario not in (CGLMP, BEHAVIOUR):
        raise InvalidArgument(f"unknown scenario {scenario!r}")
    if samples_per_point < 1:
        raise InvalidArgument("samples_per_point must be >= 1")
    workers = default_workers() if workers is None else workers
    axis = family_axis(grid_n)
    t0, t1 = np.meshgrid(axis, axis, indexing="ij")
    if scenario == CGLMP:
        products = family_products(t0.ravel(), t1.ravel())
        counts = _cglmp_grid(d, products, samples_per_point, seed, workers).reshape(grid_n, grid_n)
    else:
        counts = np.zeros((grid_n, grid_n), dtype=np.int64)
        for i in range(grid_n):
            for j in range(grid_n):
                state = make_family_state(axis[i], axis[j], d)
                counts[i, j] = estimate_pv_behaviour(state, mA, mB, samples_per_point, seed, workers).violations
    return ScanGrid(d, scenario, axis, axis.copy(), counts, samples_per_point, seed)


@dataclass(frozen=True)
class FitResult:
    slope_b: float
    intercept: float
    residual: float

    def to_dict(self) -> dict:
        return {"slope_b": self.slope_b, "intercept": self.intercept, "residual": self.residual}


def fit_decay(points) -> FitResult:
    """Least-squares line through (d, ln p_v); slope_b is the slope in units of ln(2 pi)."""
    pts = [(float(d), float(p)) for d, p in points]
    if len(pts) < 2:
        raise InvalidArgument("need at least two points")
    if any(p <= 0 for _, p in pts):
        raise InvalidPoint("every p_v must be positive to take its logarithm")
    x = np.array([d for d, _ in pts])
    y = np.log([p for _, p in pts])
    if np.ptp(x) == 0:
        raise InvalidArgument("need at least two distinct dimensions")
    slope, intercept = np.polyfit(x, y, 1)
    residual = float(np.sum((y - (slope * x + intercept)) ** 2))
    return FitResult(float(slope / np.log(TWO_PI)), float(intercept), residual)
