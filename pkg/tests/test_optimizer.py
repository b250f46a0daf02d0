import numpy as np
import pytest
from scipy.optimize import approx_fprime

from qudit_bell.cglmp import PhaseConfig, cglmp_closed
from qudit_bell.errors import InvalidArgument, InvalidDimension
from qudit_bell.optimizer import (
    _PhaseObjective,
    bell_matrix,
    eigen_step,
    find_mvs,
    optimize_phases,
    seesaw,
)
from qudit_bell.states import SchmidtState, make_mes


def test_bell_matrix_reproduces_value(rng):
    for d in range(2, 8):
        for _ in range(10):
            s = SchmidtState.from_amplitudes(rng.random(d))
            ph = PhaseConfig.random(d, rng)
            M = bell_matrix(ph)
            assert np.allclose(M, M.T) and np.all(np.diag(M) == 0)
            assert s.array @ M @ s.array == pytest.approx(cglmp_closed(s, ph).value, abs=1e-12)


def test_eigen_step_is_optimal(rng):
    for _ in range(200):
        d = int(rng.integers(2, 8))
        A = rng.random((d, d))
        M = A + A.T  # nonnegative: the principal eigenvector is sign-definite
        v, clean = eigen_step(M)
        assert clean
        w = np.linalg.eigvalsh(M)
        assert v @ M @ v == pytest.approx(w[-1], rel=1e-12)
        assert np.all(v >= 0) and abs(np.linalg.norm(v) - 1) < 1e-12
        # no unit vector does better
        x = rng.normal(size=(100, d))
        x /= np.linalg.norm(x, axis=1, keepdims=True)
        assert np.einsum("ij,jk,ik->i", x, M, x).max() <= w[-1] + 1e-12


def test_eigen_step_flags_mixed_signs():
    M = np.array([[0.0, -1.0], [-1.0, 0.0]])
    _, clean = eigen_step(M)
    assert not clean


def test_phase_gradient(rng):
    for d in (2, 4, 6):
        obj = _PhaseObjective(SchmidtState.from_amplitudes(rng.random(d)).array)
        x = rng.uniform(0, 6, 4 * (d - 1))
        num = approx_fprime(x, lambda z: obj(z)[0], 1e-7)
        np.testing.assert_allclose(obj(x)[1], num, atol=1e-5)


def test_phase_step_never_decreases(rng):
    for d in (3, 5):
        alpha = SchmidtState.from_amplitudes(rng.random(d)).array
        start = PhaseConfig.random(d, rng)
        before = alpha @ bell_matrix(start) @ alpha
        ph, val = optimize_phases(alpha, start)
        assert val >= before - 1e-12
        assert alpha @ bell_matrix(ph) @ alpha == pytest.approx(val, abs=1e-10)


def test_seesaw_monotone_on_random_starts():
    g = np.random.default_rng(77)
    for i in range(100):
        d = 2 + i % 5
        alpha0 = SchmidtState.from_amplitudes(g.random(d)).array
        _, _, trace = seesaw(PhaseConfig.random(d, g), alpha0, max_sweeps=30)
        assert np.all(np.diff(trace.values) >= -1e-12)


def test_mvs_small_d():
    r2 = find_mvs(2, restarts=3, seed=0)
    np.testing.assert_allclose(r2.alpha, [2**-0.5] * 2, atol=1e-6)
    assert r2.best_value == pytest.approx(2 * np.sqrt(2), abs=1e-9)
    r3 = find_mvs(3, restarts=5, seed=0)
    np.testing.assert_allclose(r3.alpha, [0.6169, 0.4888, 0.6169], atol=2e-3)
    assert r3.best_value == pytest.approx(2.914854, abs=1e-6)
    assert r3.symmetric and r3.converged
    mes = make_mes(3)
    assert r3.best_value >= cglmp_closed(mes, r3.phases).value
    assert cglmp_closed(r3.state, r3.phases).value == pytest.approx(r3.best_value, abs=1e-10)


def test_mvs_deterministic():
    a, b = find_mvs(4, 4, seed=3), find_mvs(4, 4, seed=3)
    assert a.alpha == b.alpha and a.best_value == b.best_value


def test_mvs_errors():
    for d in (1, 8):
        with pytest.raises(InvalidDimension):
            find_mvs(d)
    with pytest.raises(InvalidArgument):
        find_mvs(3, restarts=-1)
