"""Bitmask combinatorics over Z_{2^a}.

Row and column labels of the recursive square design are integers whose bits
index the recursion levels; everything here is exact integer arithmetic.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations
from math import comb

MAX_ORDER = 63


def weight(x: int) -> int:
    """Hamming weight of a non-negative integer."""
    if x < 0:
        raise ValueError(f"weight() needs x >= 0, got {x}")
    return bin(x).count("1")


def bit(x: int, s: int) -> int:
    return (x >> s) & 1


def ceil_half(a: int) -> int:
    return -(-a // 2)


def twos_complement(x: int, a: int) -> int:
    """Two's complement of ``x`` in F_2^a, i.e. ``-x mod 2^a``.

    For ``x = 2^s`` this sets every bit at position ``>= s``.
    """
    return (-x) % (1 << a)


def pow2_plus(x: int) -> int:
    """``2^x`` for ``x >= 0`` and ``0`` for ``x = -1``."""
    if x < -1:
        raise ValueError(f"pow2_plus is undefined for x < -1 (got {x})")
    return 0 if x == -1 else 1 << x


def binom(n: int, k: int) -> int:
    """Binomial coefficient that is zero outside ``0 <= k <= n``."""
    if n < 0 or k < 0 or k > n:
        return 0
    return comb(n, k)


def _check_order(a: int) -> None:
    if a < 1:
        raise ValueError(f"order a must be >= 1, got {a}")
    if a > MAX_ORDER:
        raise ValueError(f"order a={a} exceeds the 64-bit index width")


def row_weight_classes(a: int) -> tuple[int, ...]:
    c = ceil_half(a)
    return tuple(w for w in (c - 2, c - 1, c, c + 1) if 0 <= w <= a)


def column_weight_classes(a: int) -> tuple[int, ...]:
    c = ceil_half(a)
    return tuple(w for w in (c - 1, c) if 0 <= w <= a)


def neighbor_rows(i: int, a: int) -> frozenset[int]:
    """Row labels of the nonzero entries in column ``i`` of the square design."""
    _check_order(a)
    if not 0 <= i < (1 << a):
        raise ValueError(f"index {i} out of range for a={a}")
    return frozenset([i, *(i ^ (1 << j) for j in range(a))])


@dataclass(frozen=True)
class SizePair:
    k: int
    p: int

    @property
    def rate(self):
        from fractions import Fraction

        return Fraction(self.k, self.p)


@lru_cache(maxsize=None)
def _size(t: int) -> SizePair:
    if t % 2 == 1:
        l = (t + 1) // 2
        total = comb(2 * l, l) * l
        assert total % (l + 1) == 0
        return SizePair(comb(2 * l - 1, l), total // (l + 1))
    prev = _size(t - 1)
    return SizePair(2 * prev.k, 2 * prev.p)


def size_pair(t: int) -> SizePair:
    """Number of complex symbols and delay of the maximal-rate code for ``t`` antennas."""
    if t < 2:
        raise ValueError(f"size_pair needs t >= 2, got {t}")
    return _size(t)


@dataclass(frozen=True)
class IndexMaps:
    """Sorted row set R_a, column set C_a and their ascending enumerations.

    ``f(i) = r_set[i]`` and ``g(i) = c_set[i]``; ``f_inv``/``g_inv`` invert them.
    """

    a: int
    r_set: tuple[int, ...]
    c_set: tuple[int, ...]
    f_inv: dict = field(repr=False, compare=False)
    g_inv: dict = field(repr=False, compare=False)

    def f(self, i: int) -> int:
        return self.r_set[i]

    def g(self, i: int) -> int:
        return self.c_set[i]

    @property
    def p(self) -> int:
        return len(self.r_set)

    @property
    def k(self) -> int:
        return len(self.c_set)


def _with_weight(a: int, w: int):
    for bits in combinations(range(a), w):
        yield sum(1 << b for b in bits)


@lru_cache(maxsize=64)
def build_index_maps(a: int) -> IndexMaps:
    _check_order(a)
    cols = set(column_weight_classes(a))
    r_set = tuple(sorted(x for w in row_weight_classes(a) for x in _with_weight(a, w)))
    c_set = tuple(x for x in r_set if weight(x) in cols)
    return IndexMaps(
        a=a,
        r_set=r_set,
        c_set=c_set,
        f_inv={r: i for i, r in enumerate(r_set)},
        g_inv={c: i for i, c in enumerate(c_set)},
    )
