import pytest
from hypothesis import given, strategies as st

from leidenmt import Xorshift32
from leidenmt.rng import derive_states


def test_first_value_from_seed_one():
    assert Xorshift32(1).next() == 270369


def test_second_value_continues_stream():
    rng = Xorshift32(1)
    rng.next()
    assert rng.next() == 67634689
    assert Xorshift32(270369).next() == 67634689


def test_zero_seed_rejected():
    with pytest.raises(ValueError):
        Xorshift32(0)
    with pytest.raises(ValueError):
        Xorshift32(1 << 32)


@given(st.integers(min_value=1, max_value=(1 << 32) - 1))
def test_state_never_reaches_zero(seed):
    rng = Xorshift32(seed)
    for _ in range(64):
        assert rng.next() != 0


def test_next_float_in_open_unit_interval():
    rng = Xorshift32(12345)
    for _ in range(1000):
        u = rng.next_float()
        assert 0.0 < u < 1.0


def test_derived_states_nonzero_and_lead_with_seed():
    states = derive_states(7, 8)
    assert states[0] == 7
    assert all(0 < int(s) <= 0xFFFFFFFF for s in states)
