from fractions import Fraction
from math import comb

import pytest
from hypothesis import given
from hypothesis import strategies as st

from stbc_forge.indexing import (
    binom,
    bit,
    build_index_maps,
    ceil_half,
    neighbor_rows,
    pow2_plus,
    size_pair,
    twos_complement,
    weight,
)


def test_weight_examples():
    assert weight(0) == 0
    assert weight(0b10110) == 3
    with pytest.raises(ValueError):
        weight(-1)


@given(st.integers(0, 2**40), st.integers(0, 2**40))
def test_weight_of_xor(x, y):
    assert weight(x ^ y) == weight(x) + weight(y) - 2 * weight(x & y)


def test_index_maps_small_orders():
    m1 = build_index_maps(1)
    assert m1.c_set == (0, 1) and m1.r_set == (0, 1)
    m3 = build_index_maps(3)
    assert m3.c_set == (1, 2, 3, 4, 5, 6)
    assert m3.r_set == tuple(range(8))
    m4 = build_index_maps(4)
    assert (m4.k, m4.p) == (10, 15)
    assert m4.k == comb(5, 3)


def test_index_maps_reject_zero_order():
    with pytest.raises(ValueError):
        build_index_maps(0)


@pytest.mark.parametrize("a", range(1, 11))
def test_index_maps_match_weight_definition(a):
    m = build_index_maps(a)
    c = ceil_half(a)
    assert m.r_set == tuple(i for i in range(1 << a) if c - 2 <= weight(i) <= c + 1)
    assert m.c_set == tuple(i for i in range(1 << a) if c - 1 <= weight(i) <= c)
    assert set(m.c_set) <= set(m.r_set)
    assert list(m.r_set) == sorted(m.r_set) and list(m.c_set) == sorted(m.c_set)
    sp = size_pair(a + 1)
    assert (m.k, m.p) == (sp.k, sp.p)
    assert all(m.f_inv[m.f(i)] == i for i in range(m.p))
    assert all(m.g_inv[m.g(i)] == i for i in range(m.k))


def test_neighbor_rows_examples():
    assert neighbor_rows(0, 2) == {0, 1, 2}
    assert neighbor_rows(5, 3) == {5, 4, 7, 1}
    with pytest.raises(ValueError):
        neighbor_rows(8, 3)


@pytest.mark.parametrize("a", range(1, 11))
def test_neighbors_of_columns_cover_rows(a):
    m = build_index_maps(a)
    covered = set()
    for i in m.c_set:
        nb = neighbor_rows(i, a)
        assert len(nb) == a + 1
        covered |= nb
    assert covered == set(m.r_set)


@pytest.mark.parametrize("a", range(1, 11))
def test_single_bit_parity(a):
    cs = set(build_index_maps(a).c_set)
    for s in range(a):
        for i in cs:
            if i ^ (1 << s) in cs:
                assert (weight(i) + ceil_half(a) + bit(i, s)) % 2 == 1


@pytest.mark.parametrize("a", range(2, 11))
def test_double_bit_split(a):
    cs = set(build_index_maps(a).c_set)
    for s in range(a):
        for t in range(s + 1, a):
            mask = (1 << s) | (1 << t)
            for i in cs:
                if i ^ mask in cs:
                    assert bit(i, s) + bit(i, t) == 1


def test_size_pair_examples():
    assert (size_pair(3).k, size_pair(3).p) == (3, 4)
    assert (size_pair(5).k, size_pair(5).p) == (10, 15)
    # the size recursion doubles the 7-antenna code; [56, 8, 35] is the delay-halved family
    assert (size_pair(8).k, size_pair(8).p) == (70, 112)
    assert (size_pair(7).k, size_pair(7).p) == (35, 56)
    with pytest.raises(ValueError):
        size_pair(1)


@pytest.mark.parametrize("t", range(2, 40))
def test_size_pair_rate(t):
    l = (t + 1) // 2
    assert size_pair(t).rate == Fraction(l + 1, 2 * l)


@pytest.mark.parametrize("a", range(2, 7))
def test_odd_even_doubling(a):
    odd = build_index_maps(2 * a - 1)
    even = build_index_maps(2 * a - 2)
    assert odd.k == 2 * even.k == 2 * comb(2 * a - 1, a)
    assert odd.p * (a + 1) == 2 * even.p * (a + 1) == 2 * a * comb(2 * a, a)


def test_large_sizes_are_exact():
    sp = size_pair(61)
    assert sp.k == comb(61, 31)
    assert sp.p * 32 == 31 * comb(62, 31)


def test_pow2_plus():
    assert pow2_plus(-1) == 0
    assert pow2_plus(0) == 1 and pow2_plus(5) == 32
    with pytest.raises(ValueError):
        pow2_plus(-2)


def test_twos_complement_of_powers():
    assert twos_complement(1 << 2, 5) == 0b11100
    assert twos_complement(1, 3) == 0b111


def test_binom_is_zero_outside_range():
    assert binom(0, 1) == 0 and binom(3, -1) == 0 and binom(4, 2) == 6
