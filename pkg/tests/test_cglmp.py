import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qudit_bell.cglmp import (
    RELABELINGS,
    PhaseConfig,
    RelabeledEvaluator,
    bk_shortcut,
    bk_term,
    cglmp_closed,
    cglmp_direct,
    closed_form_coefficients,
    joint_probability,
    violates_with_relabelings,
)
from qudit_bell.errors import InvalidArgument
from qudit_bell.optimizer import optimize_phases
from qudit_bell.states import SchmidtState, make_mes, make_mss

DIMS = range(2, 8)


def random_state(d, g):
    return SchmidtState.from_amplitudes(g.random(d) * (g.random(d) > 0.2) + 1e-3)


def amplitude_probabilities(alpha, phases: PhaseConfig, a, b):
    """Independent oracle: |<k|F D_a x <l|F* D_b |psi>|^2 for the whole outcome table."""
    d = len(alpha)
    j = np.arange(d)
    F = np.exp(2j * np.pi * np.outer(j, j) / d) / np.sqrt(d)
    ua = F * np.exp(1j * phases.phiA[a - 1])[None, :]
    ub = np.conj(F) * np.exp(1j * phases.phiB[b - 1])[None, :]
    amp = np.einsum("j,kj,lj->kl", alpha, ua, ub)
    return np.abs(amp) ** 2


def test_probability_examples():
    mes3 = make_mes(3)
    z = PhaseConfig.zeros(3)
    assert joint_probability(mes3, z, 1, 1, 0, 0) == pytest.approx(1 / 3, abs=1e-14)
    assert joint_probability(mes3, z, 1, 1, 0, 1) == pytest.approx(0, abs=1e-14)
    prod = SchmidtState(3, (1.0, 0.0, 0.0))
    ph = PhaseConfig.random(3, np.random.default_rng(0))
    for k in range(3):
        for l in range(3):
            assert joint_probability(prod, ph, 2, 1, k, l) == pytest.approx(1 / 9, abs=1e-15)
    with pytest.raises(InvalidArgument):
        joint_probability(mes3, z, 3, 1, 0, 0)
    with pytest.raises(InvalidArgument):
        joint_probability(mes3, z, 1, 1, 0, 3)
    with pytest.raises(InvalidArgument):
        joint_probability(make_mes(2), z, 1, 1, 0, 0)


def test_probability_matches_amplitude_oracle(rng):
    for d in DIMS:
        for _ in range(20):
            s, ph = random_state(d, rng), PhaseConfig.random(d, rng)
            a, b = rng.integers(1, 3, 2)
            P = np.array([[joint_probability(s, ph, a, b, k, l) for l in range(d)] for k in range(d)])
            np.testing.assert_allclose(P, amplitude_probabilities(s.array, ph, a, b), atol=1e-13)


def test_probability_validity(rng):
    worst_norm = 0.0
    lo, hi = 1.0, 0.0
    for _ in range(10_000):
        d = int(rng.integers(2, 8))
        s, ph = random_state(d, rng), PhaseConfig.random(d, rng)
        a, b = (int(v) for v in rng.integers(1, 3, 2))
        P = [joint_probability(s, ph, a, b, k, l, clamp=False) for k in range(d) for l in range(d)]
        worst_norm = max(worst_norm, abs(sum(P) - 1))
        lo, hi = min(lo, min(P)), max(hi, max(P))
    assert worst_norm <= 1e-10
    assert lo >= -1e-12 and hi <= 1 + 1e-12


def test_bk_examples():
    mes2, z = make_mes(2), PhaseConfig.zeros(2)
    assert bk_term(mes2, z, 0) == pytest.approx(3, abs=1e-14)
    assert bk_term(mes2, z, -1) == pytest.approx(1, abs=1e-14)


def test_bk_symmetry_shortcut(rng):
    for d in DIMS:
        for _ in range(10):
            s, ph = random_state(d, rng), PhaseConfig.random(d, rng)
            for k in range(-d, d):
                assert abs(bk_term(s, ph, k) - bk_shortcut(s, ph, k)) <= 1e-12


def test_symmetry_identity(rng):
    for d in DIMS:
        for _ in range(20):
            s, ph = random_state(d, rng), PhaseConfig.random(d, rng)
            a, b, k, l = int(rng.integers(1, 3)), int(rng.integers(1, 3)), int(rng.integers(d)), int(rng.integers(d))
            total = sum(joint_probability(s, ph, a, b, (j + k) % d, (j + l) % d) for j in range(d))
            assert abs(total - d * joint_probability(s, ph, a, b, k, l)) <= 1e-10


def test_value_examples():
    for d in (2, 3):
        z = PhaseConfig.zeros(d)
        assert cglmp_direct(make_mes(d), z).value == pytest.approx(2.0, abs=1e-12)
        assert cglmp_closed(make_mes(d), z).value == pytest.approx(2.0, abs=1e-12)
    assert not violates_with_relabelings(make_mes(2), PhaseConfig.zeros(2))


def test_tsirelson_maximum():
    best = max(optimize_phases(make_mes(2).array, PhaseConfig.random(2, np.random.default_rng(s)))[1] for s in range(10))
    assert best == pytest.approx(2 * np.sqrt(2), abs=1e-9)


def test_coefficient_examples():
    c = closed_form_coefficients(make_mes(2))
    assert c.C[0, 0, 1, 0] == pytest.approx(1.0)
    assert c.C[1, 0, 1, 0] == pytest.approx(-1.0)
    assert [np.sign(c.C[a, b, 1, 0]) for a in range(2) for b in range(2)] == [1, 1, -1, 1]
    assert np.all(c.Psi == 0)
    assert closed_form_coefficients(make_mes(3)).Ccal[1, 0] == pytest.approx(np.sin(np.pi / 3))
    prod = SchmidtState(4, (1.0, 0, 0, 0))
    assert np.all(closed_form_coefficients(prod).C == 0)


def test_product_state_never_violates(rng):
    prod = SchmidtState(5, (0, 0, 1.0, 0, 0))
    for _ in range(50):
        ph = PhaseConfig.random(5, rng)
        assert cglmp_closed(prod, ph).value == 0.0
        assert not violates_with_relabelings(prod, ph)


@pytest.mark.parametrize("d", DIMS)
def test_closed_equals_direct(d):
    g = np.random.default_rng(100 + d)
    worst = 0.0
    for _ in range(1000):
        s, ph = random_state(d, g), PhaseConfig.random(d, g)
        worst = max(worst, abs(cglmp_closed(s, ph).value - cglmp_direct(s, ph).value))
    assert worst <= 1e-9


@given(st.integers(2, 7), st.integers(0, 2**32 - 1), st.integers(0, 1), st.integers(0, 1), st.floats(-10, 10))
def test_gauge_invariance(d, seed, party, setting, c):
    g = np.random.default_rng(seed)
    s, ph = random_state(d, g), PhaseConfig.random(d, g)
    arr = ph.as_array().copy()
    arr[party, setting] += c
    shifted = PhaseConfig.from_array(arr)
    assert abs(cglmp_closed(s, ph).value - cglmp_closed(s, shifted).value) <= 1e-10
    assert abs(cglmp_direct(s, ph).value - cglmp_direct(s, shifted).value) <= 1e-10


@given(st.integers(2, 7), st.integers(0, 2**32 - 1))
def test_relabeling_coverage(d, seed):
    g = np.random.default_rng(seed)
    s, ph = random_state(d, g), PhaseConfig.random(d, g)
    verdicts = {violates_with_relabelings(s, ph.relabeled(sa, sb)) for sa, sb in RELABELINGS}
    assert len(verdicts) == 1


@pytest.mark.parametrize("d", DIMS)
def test_vectorized_evaluator(d):
    g = np.random.default_rng(d)
    s = random_state(d, g)
    phases = 2 * np.pi * g.random((50, 2, 2, d))
    values = RelabeledEvaluator(s).values(phases)
    for i in range(50):
        ph = PhaseConfig.from_array(phases[i])
        expect = [cglmp_closed(s, ph.relabeled(sa, sb)).value for sa, sb in RELABELINGS]
        np.testing.assert_allclose(values[i], expect, atol=1e-12)


def test_evaluator_drops_empty_pairs():
    ev = RelabeledEvaluator(make_mss(2, 6))
    assert ev.W.shape[0] == 8
    phases = 2 * np.pi * np.random.default_rng(0).random((10, 2, 2, 6))
    expect = [cglmp_closed(make_mss(2, 6), PhaseConfig.from_array(p)).value for p in phases]
    np.testing.assert_allclose(ev.values(phases)[:, 0], expect, atol=1e-12)


def test_phase_config():
    ph = PhaseConfig(2, [[7.0, -1.0], [0, 0]], np.zeros((2, 2)))
    assert np.all((ph.phiA >= 0) & (ph.phiA < 2 * np.pi))
    with pytest.raises(ValueError):
        ph.phiA[0, 0] = 1.0
    with pytest.raises(InvalidArgument):
        PhaseConfig(3, np.zeros((2, 2)), np.zeros((2, 2)))
    assert PhaseConfig.from_array(ph.as_array()).to_dict() == ph.to_dict()
