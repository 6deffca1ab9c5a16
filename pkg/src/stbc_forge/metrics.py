"""Rate, zero fraction, duplicate counts and per-antenna PAPR of designs.

All quantities are exact.  Powers are computed in units of the constellation's
lattice step squared, so QPSK and 16-QAM both stay inside Q(sqrt 2).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import product
from typing import Optional, Sequence

import numpy as np

from .constructions import pair_rows
from .design import DesignMatrix, LinearEntry
from .exact import ZERO, Sqrt2Complex, Sqrt2Rational
from .indexing import binom, ceil_half, size_pair, weight

# --------------------------------------------------------------------------
# constellations


@dataclass(frozen=True)
class Constellation:
    """Points ``sqrt(step2) * (u + j v)`` on an integer lattice.

    ``step2`` is chosen so that the average energy is exactly 1.
    """

    name: str
    lattice: tuple[tuple[int, int], ...]
    step2: Fraction

    def __post_init__(self):
        if not self.lattice:
            raise ValueError("a constellation needs at least one point")

    @property
    def points(self) -> np.ndarray:
        s = float(self.step2) ** 0.5
        return np.array([complex(u, v) * s for u, v in self.lattice])

    @property
    def size(self) -> int:
        return len(self.lattice)

    def average_energy(self) -> Fraction:
        return self.step2 * Fraction(sum(u * u + v * v for u, v in self.lattice), len(self.lattice))

    def peak_energy(self) -> Fraction:
        return self.step2 * max(u * u + v * v for u, v in self.lattice)

    @staticmethod
    def from_lattice(name: str, lattice: Sequence[tuple[int, int]]) -> "Constellation":
        lattice = tuple((int(u), int(v)) for u, v in lattice)
        if not lattice:
            raise ValueError("a constellation needs at least one point")
        energy = Fraction(sum(u * u + v * v for u, v in lattice), len(lattice))
        if energy == 0:
            raise ValueError("constellation has zero energy")
        return Constellation(name, lattice, 1 / energy)


QPSK = Constellation.from_lattice("qpsk", [(1, 1), (-1, 1), (-1, -1), (1, -1)])
QAM16 = Constellation.from_lattice("qam16", [(u, v) for v in (3, 1, -1, -3) for u in (-3, -1, 1, 3)])
CONSTELLATIONS = {"qpsk": QPSK, "qam16": QAM16}


def get_constellation(name: str) -> Constellation:
    try:
        return CONSTELLATIONS[name.lower()]
    except KeyError:
        raise ValueError(f"unknown constellation {name!r}; expected one of {sorted(CONSTELLATIONS)}") from None


# --------------------------------------------------------------------------
# zero fraction


def zero_fraction_counted(design: DesignMatrix) -> Fraction:
    return Fraction(design.zero_count(), design.p * design.n)


def _check_mask(n: int, l: int) -> None:
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if not 1 <= l < (1 << n):
        raise ValueError(f"l must lie in 1..{(1 << n) - 1}, got {l}")


def zero_fraction_formula(n: int, l: int) -> Fraction:
    """Closed-form fraction of zeros of the row-paired design ``M_n(l)``.

    For odd ``n`` the ``b`` correction is applied for every weight; it vanishes
    when ``w = n``, which is where the plain ``1/2 - 1/(n+1)`` value holds.
    """
    _check_mask(n, l)
    w = weight(l)
    c = ceil_half(w)
    if n % 2 == 0:
        h = n // 2
        a = (
            binom(w, ceil_half(w + 1)) * binom(n - w + 1, h - c)
            + w * binom(2 * c - 1, c) * binom(n - 2 * c + 2, h - c + 2)
            + (n - w) * binom(2 * c, c + 1) * binom(n - 2 * c + 1, h - c)
        )
        denom = Fraction((n + 1) * (n + 2), n + 4) * binom(n + 2, h + 1)
        return Fraction(1, 2) - Fraction(1, n + 2) - a / denom
    h = (n + 1) // 2
    b = (
        2 * binom(w, ceil_half(w + 1)) * binom(n - w, h - ceil_half(w + 1) + 1)
        + w * binom(2 * c, c) * binom(n - 2 * c + 1, h - c + 1)
        + (n - w) * binom(2 * c, c + 1) * binom(n - 2 * c + 1, h - c)
    )
    denom = Fraction(2 * (n + 1) ** 2, n + 3) * binom(n + 1, h)
    return Fraction(1, 2) - Fraction(1, n + 1) - b / denom


def zero_fraction_formula_as_printed(n: int, l: int) -> Fraction:
    """Same closed form with the odd-``n`` case labels taken literally."""
    _check_mask(n, l)
    if n % 2 == 1 and weight(l) != n:
        return Fraction(1, 2) - Fraction(1, n + 1)
    return zero_fraction_formula(n, l)


# --------------------------------------------------------------------------
# duplicate counts


def column_duplicate_counts(design: DesignMatrix) -> list[int]:
    """Per column, the number of isolated variables occupying two entries.

    A variable is isolated when it never shares an entry with another variable.
    """
    paired = {v for row in design.entries for e in row if len(e.variables()) > 1 for v in e.variables()}
    counts = []
    for j in range(design.n):
        seen: dict[int, int] = {}
        for e in design.column(j):
            vs = e.variables()
            if len(vs) == 1:
                (v,) = vs
                if v not in paired:
                    seen[v] = seen.get(v, 0) + 1
        counts.append(sum(1 for c in seen.values() if c >= 2))
    return counts


def duplicate_counts(n: int, l: int) -> tuple[list[int], Fraction]:
    """Per-column duplicate counts of ``M_n(l)`` and their average."""
    m, _ = pair_rows(n, l)
    counts = column_duplicate_counts(m)
    return counts, Fraction(sum(counts), len(counts))


def zero_fraction_from_duplicates(n: int, l: int) -> Fraction:
    sp = size_pair(n + 1)
    _, e = duplicate_counts(n, l)
    return 1 - (sp.k + e) / sp.p


# --------------------------------------------------------------------------
# PAPR


def _canonical(e: LinearEntry):
    order: dict[int, int] = {}
    for (v, _), _ in e.terms:
        order.setdefault(v, len(order))
    return tuple(((order[v], p), c) for (v, p), c in e.terms), len(order)


@lru_cache(maxsize=4096)
def _entry_power_stats(terms, nvars: int, c: Constellation) -> tuple[Sqrt2Rational, Sqrt2Rational]:
    """Peak and mean of ``|entry|^2`` in lattice units, over uniform independent symbols."""
    peak = ZERO
    total = ZERO
    for pts in product(c.lattice, repeat=nvars):
        val = Sqrt2Complex(0)
        for (v, p), coef in terms:
            val = val + coef * (pts[v][0] if p == "I" else pts[v][1])
        pw = val.abs2()
        total = total + pw
        if pw > peak:
            peak = pw
    return peak, total * Fraction(1, c.size**nvars)


def entry_power_stats(e: LinearEntry, c: Constellation) -> tuple[Sqrt2Rational, Sqrt2Rational]:
    """Exact ``(peak, mean)`` instantaneous power of one entry, in absolute units."""
    if e.is_zero():
        return ZERO, ZERO
    terms, nvars = _canonical(e)
    if nvars > 2:
        raise ValueError("entry references more than two variables; enumeration bound exceeded")
    peak, mean = _entry_power_stats(terms, nvars, c)
    return peak * c.step2, mean * c.step2


def antenna_power_profile(design: DesignMatrix, c: Constellation) -> list[tuple[Sqrt2Rational, Sqrt2Rational]]:
    """Per antenna: peak instantaneous power and power averaged over all slots."""
    out = []
    for j in range(design.n):
        stats = [entry_power_stats(e, c) for e in design.column(j)]
        peak = max((s[0] for s in stats), default=ZERO)
        mean = sum((s[1] for s in stats), ZERO) * Fraction(1, design.p)
        out.append((peak, mean))
    return out


def papr(design: DesignMatrix, c: Constellation, nonzero_slots_only: bool = False) -> list[Sqrt2Rational]:
    """Per-antenna peak-to-average power ratio.

    The average runs over every slot of the codeword, zeros included, unless
    ``nonzero_slots_only`` is set.
    """
    out = []
    for j in range(design.n):
        col = design.column(j)
        stats = [entry_power_stats(e, c) for e in col]
        slots = sum(1 for e in col if not e.is_zero()) if nonzero_slots_only else design.p
        mean_total = sum((s[1] for s in stats), ZERO)
        if mean_total.is_zero():
            raise ValueError(f"antenna {j} never transmits; PAPR undefined")
        peak = max(s[0] for s in stats)
        out.append(peak * slots / mean_total)
    return out


# --------------------------------------------------------------------------
# summary


@dataclass(frozen=True)
class DesignMetrics:
    rate: Fraction
    delay: int
    zero_fraction: Fraction
    per_antenna_papr: Optional[tuple[Sqrt2Rational, ...]]
    duplicate_counts: tuple[int, ...]

    @staticmethod
    def of(design: DesignMatrix, c: Optional[Constellation] = None) -> "DesignMetrics":
        return DesignMetrics(
            rate=design.rate,
            delay=design.p,
            zero_fraction=zero_fraction_counted(design),
            per_antenna_papr=None if c is None else tuple(papr(design, c)),
            duplicate_counts=tuple(column_duplicate_counts(design)),
        )
