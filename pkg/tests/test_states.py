import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qudit_bell.errors import InvalidArgument, InvalidDimension, InvalidRank
from qudit_bell.states import SchmidtState, make_family_state, make_mes, make_mss


def test_mes_values():
    np.testing.assert_allclose(make_mes(2).alpha, [0.70710678] * 2, atol=1e-8)
    np.testing.assert_allclose(make_mes(3).alpha, [0.57735027] * 3, atol=1e-8)
    with pytest.raises(InvalidDimension):
        make_mes(1)


def test_mss():
    np.testing.assert_allclose(make_mss(2, 3).alpha, [0.70710678, 0.70710678, 0], atol=1e-8)
    assert make_mss(4, 4) == make_mes(4)
    np.testing.assert_allclose(make_mss(3, 6).alpha, [3**-0.5] * 3 + [0] * 3)
    assert make_mss(3, 6).rank == 3
    for r, d in [(4, 3), (0, 3)]:
        with pytest.raises(InvalidRank):
            make_mss(r, d)


def test_family():
    np.testing.assert_allclose(make_family_state(0.9553, 0.7854, 4).alpha, [0.5774, 0.5774, 0.5774, 0], atol=1e-3)
    np.testing.assert_allclose(make_family_state(0.864, 0.604, 4).alpha[:3], [0.647, 0.628, 0.431], atol=4e-3)
    np.testing.assert_allclose(make_family_state(0.0, 1.3, 4).alpha, [1, 0, 0, 0], atol=1e-15)
    with pytest.raises(InvalidDimension):
        make_family_state(0.3, 0.3, 2)


def test_validation():
    with pytest.raises(InvalidArgument):
        SchmidtState(2, (1.0, 1.0))
    with pytest.raises(InvalidArgument):
        SchmidtState(2, (-1.0, 0.0))
    with pytest.raises(InvalidArgument):
        SchmidtState(3, (1.0, 0.0))
    with pytest.raises(InvalidDimension):
        SchmidtState(1, (1.0,))
    with pytest.raises(InvalidArgument):
        SchmidtState.from_amplitudes([0, 0])


@given(st.lists(st.floats(-10, 10, allow_nan=False), min_size=2, max_size=7).filter(lambda v: np.linalg.norm(v) > 1e-3))
def test_from_amplitudes_normalizes(v):
    s = SchmidtState.from_amplitudes(v, 8)
    assert s.d == 8
    assert abs(s.array @ s.array - 1) < 1e-12
    assert np.all(s.array >= 0)
    assert s.padded(9).rank == s.rank
