"""Monte Carlo estimates of the probability of violation.

Samples are grouped in blocks of BLOCK_SIZE; block k draws from
RngStream(seed, k). A sample's measurement settings therefore depend only on
(seed, sample index), which makes counts independent of the number of
workers and lets a longer run reuse the verdicts of a shorter one.
"""
from __future__ import annotations

import json
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from functools import partial
from multiprocessing import get_context
from pathlib import Path

import numpy as np

from .behaviour import behaviour_tensor
from .cglmp import TWO_PI, RelabeledEvaluator
from .errors import InvalidArgument
from .haar import haar_unitaries
from .polytope import DEFAULT_TOL, LocalityTester, enumerate_strategies
from .rng import RngStream
from .states import SchmidtState

log = logging.getLogger(__name__)

BLOCK_SIZE = 1000
CHECKPOINT_EVERY = 100_000
DEFAULT_Z = 3.0

CGLMP = "cglmp-mbsps"
BEHAVIOUR = "behaviour"


def wilson_interval(violations: int, samples: int, z: float = DEFAULT_Z) -> tuple[float, float]:
    if samples < 1 or not 0 <= violations <= samples:
        raise InvalidArgument(f"need 0 <= violations <= samples and samples >= 1, got {violations}/{samples}")
    if z < 0:
        raise InvalidArgument("z must be nonnegative")
    p = violations / samples
    denom = 1 + z * z / samples
    centre = (p + z * z / (2 * samples)) / denom
    half = z / denom * math.sqrt(p * (1 - p) / samples + z * z / (4 * samples * samples))
    low = 0.0 if violations == 0 else max(0.0, centre - half)
    high = 1.0 if violations == samples else min(1.0, centre + half)
    return low, high


@dataclass(frozen=True)
class PvEstimate:
    violations: int
    samples: int
    p_hat: float
    ci_low: float
    ci_high: float
    scenario: str
    mA: int
    mB: int
    d: int
    seed: int

    @classmethod
    def from_counts(cls, violations, samples, scenario, mA, mB, d, seed, z=DEFAULT_Z) -> "PvEstimate":
        low, high = wilson_interval(violations, samples, z)
        return cls(int(violations), int(samples), violations / samples, low, high, scenario, mA, mB, d, seed)

    @property
    def sigma(self) -> float:
        """Binomial standard error with p kept one count away from 0 and 1, so zero-hit runs keep a nonzero width."""
        n = self.samples
        p = min(max(self.p_hat, 1.0 / n), 1.0 - 1.0 / n) if n > 1 else 0.5
        return math.sqrt(p * (1 - p) / self.samples)

    def to_dict(self) -> dict:
        return asdict(self)


def default_workers() -> int:
    return int(os.environ.get("QBL_THREADS", "1"))


# ---- per-block kernels (module level so worker processes can pickle them) ----


def cglmp_block_verdicts(alpha: tuple, seed: int, block: int, n: int) -> np.ndarray:
    state = SchmidtState(len(alpha), alpha)
    gen = RngStream(seed, block).generator()
    phases = TWO_PI * gen.random((n, 2, 2, state.d))
    return RelabeledEvaluator(state).violations(phases)


def behaviour_block_verdicts(alpha: tuple, mA: int, mB: int, seed: int, block: int, n: int, tol: float = DEFAULT_TOL) -> np.ndarray:
    d = len(alpha)
    gen = RngStream(seed, block).generator()
    U = haar_unitaries(gen, (n, mA + mB), d)
    p = behaviour_tensor(np.asarray(alpha), U[:, :mA], U[:, mA:])
    return LocalityTester(d, mA, mB, tol).nonlocal_mask(p)


def _count(fn, block_and_n):
    block, n = block_and_n
    return int(np.count_nonzero(fn(block=block, n=n)))


def sample_verdicts(kernel, samples: int) -> np.ndarray:
    """Per-sample verdicts for indices 0..samples-1 (testing aid)."""
    out = []
    for block in range(math.ceil(samples / BLOCK_SIZE)):
        n = min(BLOCK_SIZE, samples - block * BLOCK_SIZE)
        out.append(kernel(block=block, n=n))
    return np.concatenate(out) if out else np.zeros(0, bool)


# ---- checkpointing ----


def _checkpoint_key(scenario, d, mA, mB, alpha, seed) -> dict:
    return {"scenario": scenario, "d": d, "mA": mA, "mB": mB, "alpha": list(alpha), "seed": seed}


def load_checkpoint(path, key: dict) -> tuple[int, int]:
    """(samples_done, violations) from a matching checkpoint, else (0, 0)."""
    path = Path(path)
    if not path.exists():
        return 0, 0
    data = json.loads(path.read_text())
    if {k: data.get(k) for k in key} != key:
        log.warning("checkpoint %s belongs to a different run; ignoring it", path)
        return 0, 0
    return int(data["samples_done"]), int(data["violations"])


def write_checkpoint(path, key: dict, samples_done: int, violations: int) -> None:
    path = Path(path)
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text(json.dumps({**key, "samples_done": samples_done, "violations": violations}))
    tmp.replace(path)


# ---- driver ----


def _run(kernel, samples, workers, min_hits, key, checkpoint):
    if samples < 1:
        raise InvalidArgument("samples must be >= 1")
    done, hits = (0, 0) if checkpoint is None else load_checkpoint(checkpoint, key)
    if done % BLOCK_SIZE or done > samples:
        done, hits = 0, 0
    if min_hits is not None and done and hits >= min_hits:
        return hits, done
    count = partial(_count, kernel)
    pool = None
    if workers > 1:
        pool = ProcessPoolExecutor(max_workers=workers, mp_context=get_context("fork"))
    try:
        while done < samples:
            stop = min(samples, done + CHECKPOINT_EVERY)
            jobs = [(b, min(BLOCK_SIZE, stop - b * BLOCK_SIZE)) for b in range(done // BLOCK_SIZE, math.ceil(stop / BLOCK_SIZE))]
            counts = list(pool.map(count, jobs)) if pool else [count(j) for j in jobs]
            for (_, n), c in zip(jobs, counts):
                done += n
                hits += c
                if min_hits is not None and hits >= min_hits:
                    break
            if checkpoint is not None:
                write_checkpoint(checkpoint, key, done, hits)
            log.debug("%s: %d/%d samples, %d violations", key["scenario"], done, samples, hits)
            if min_hits is not None and hits >= min_hits:
                break
    finally:
        if pool:
            pool.shutdown()
    return hits, done


def estimate_pv_cglmp(
    state: SchmidtState,
    samples: int,
    seed: int,
    workers: int | None = None,
    min_hits: int | None = None,
    checkpoint=None,
) -> PvEstimate:
    """Fraction of uniformly random phase settings where some relabeled CGLMP inequality is violated.

    With `min_hits`, stops at the first block boundary where the violation
    count reaches it; `samples` is then an upper limit.
    """
    workers = default_workers() if workers is None else workers
    kernel = partial(cglmp_block_verdicts, state.alpha, seed)
    key = _checkpoint_key(CGLMP, state.d, 2, 2, state.alpha, seed)
    hits, done = _run(kernel, samples, workers, min_hits, key, checkpoint)
    return PvEstimate.from_counts(hits, done, CGLMP, 2, 2, state.d, seed)


def estimate_pv_behaviour(
    state: SchmidtState,
    mA: int,
    mB: int,
    samples: int,
    seed: int,
    workers: int | None = None,
    tol: float = DEFAULT_TOL,
    checkpoint=None,
) -> PvEstimate:
    """Fraction of Haar-random projective settings whose behaviour leaves the local polytope."""
    enumerate_strategies(state.d, mA)
    enumerate_strategies(state.d, mB)
    workers = default_workers() if workers is None else workers
    kernel = partial(behaviour_block_verdicts, state.alpha, mA, mB, seed, tol=tol)
    key = _checkpoint_key(BEHAVIOUR, state.d, mA, mB, state.alpha, seed)
    hits, done = _run(kernel, samples, workers, None, key, checkpoint)
    return PvEstimate.from_counts(hits, done, BEHAVIOUR, mA, mB, state.d, seed)
