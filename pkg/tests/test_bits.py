import pytest
from hypothesis import given, strategies as st

from davmm.bits import fits, from_twos, min_signed_width, sign_extend, to_binary, to_twos, truncate
from davmm.engine import sign_extend as engine_sign_extend


def test_minus_one_extends_to_all_ones():
    pattern = sign_extend(0b11111111111, 11, 21)
    assert pattern == (1 << 21) - 1
    assert from_twos(pattern, 21) == -1


def test_zero_extends_to_zero():
    assert sign_extend(0, 11, 21) == 0


def test_every_11_bit_value_round_trips():
    for pattern in range(1 << 11):
        wide = engine_sign_extend(pattern, 11, 21)
        assert truncate(wide, 11) == pattern
        assert from_twos(wide, 21) == from_twos(pattern, 11)


def test_narrowing_refused():
    with pytest.raises(ValueError):
        sign_extend(1, 8, 4)


@given(st.integers(-(1 << 30), (1 << 30)))
def test_min_width_is_tight(v):
    w = min_signed_width(v)
    assert fits(v, w)
    assert w == 1 or not fits(v, w - 1)
    assert from_twos(to_twos(v, w), w) == v


def test_to_binary():
    assert to_binary(-1, 4) == "1111"
    assert to_binary(5, 4) == "0101"
    with pytest.raises(OverflowError):
        to_binary(8, 4)
