"""Generators for square, maximal-rate and coordinate-interleaved designs.

Index conventions: ``a`` is the order of the square design ``G_a`` (``2^a``
antennas).  The maximal-rate families for ``t`` antennas are built from order
``t - 1`` (or ``t - 2`` for the delay-halved multiple-of-four family).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Sequence

from .design import I, Q, CodAtom, DesignMatrix, LinearEntry, ZERO_ENTRY, is_conjugation_separated
from .exact import INV_SQRT2
from .indexing import (
    _check_order,
    bit,
    build_index_maps,
    ceil_half,
    pow2_plus,
    twos_complement,
    weight,
)


def _pm(e: int) -> int:
    return -1 if e & 1 else 1


# --------------------------------------------------------------------------
# square designs


@lru_cache(maxsize=32)
def square_cod(a: int) -> DesignMatrix:
    """``G_a`` by the block recursion starting from the Alamouti matrix."""
    _check_order(a)
    grid = [
        [LinearEntry.atom(0), LinearEntry.atom(1, -1, -1)],
        [LinearEntry.atom(1), LinearEntry.atom(0, 1, -1)],
    ]
    for b in range(2, a + 1):
        half = len(grid)
        top_right = LinearEntry.atom(b, -1, -1)
        bottom_left = LinearEntry.atom(b)
        # the coordinates are real, so conjugating the value conjugates the coefficients
        herm = [[grid[c][r].conj() for c in range(half)] for r in range(half)]
        new = []
        for r in range(half):
            new.append(list(grid[r]) + [top_right if c == r else ZERO_ENTRY for c in range(half)])
        for r in range(half):
            new.append([bottom_left if c == r else ZERO_ENTRY for c in range(half)] + herm[r])
        grid = new
    return DesignMatrix(grid, k=a + 1)


def square_cod_maps(i: int, j: int, a: int) -> Optional[CodAtom]:
    """Closed-form cell ``(i, j)`` of ``G_a``; ``None`` for a zero entry."""
    _check_order(a)
    size = 1 << a
    if not (0 <= i < size and 0 <= j < size):
        raise ValueError(f"cell ({i},{j}) outside a {size}x{size} design")
    x = i ^ j
    if x == 0:
        return CodAtom(var=0, sign=1, conj=_pm(weight(j)))
    if x & (x - 1):
        return None
    l = x.bit_length()
    tau = _pm(bit(j, l - 1))
    mu = _pm(weight(j & twos_complement(1 << (l - 1), a)))
    return CodAtom(var=l, sign=mu, conj=tau)


def square_cod_closed_form(a: int) -> DesignMatrix:
    size = 1 << a
    return DesignMatrix.from_atoms([[square_cod_maps(i, j, a) for j in range(size)] for i in range(size)], k=a + 1)


# --------------------------------------------------------------------------
# maximal-rate designs


@lru_cache(maxsize=32)
def build_tilde(a: int) -> DesignMatrix:
    """``H~_a``: the columns of ``G_a`` in ``C_a`` restricted to the rows ``R_a``."""
    maps = build_index_maps(a)
    swap = a % 4 in (1, 2)
    grid = []
    for r in maps.r_set:
        row = []
        for c in maps.c_set:
            atom = square_cod_maps(r, c, a)
            if atom is not None and swap and atom.var == 0:
                atom = atom.conjugated()
            row.append(atom)
        grid.append(row)
    return DesignMatrix.from_atoms(grid, k=a + 1)


def transpose_to_maximal(tilde: DesignMatrix) -> DesignMatrix:
    """Swap the roles of variables and columns of a conjugation-separated COD.

    Cell ``(i, j)`` of the result holds ``±y_l`` or ``±y_l^*`` when cell
    ``(i, l)`` of the input holds ``±x_j`` or ``±x_j^*`` with the same sign and
    conjugation.
    """
    atoms = tilde.atoms()
    if not is_conjugation_separated(tilde):
        raise ValueError("input is not conjugation-separated")
    grid: list[list[Optional[CodAtom]]] = []
    for i, row in enumerate(atoms):
        out: list[Optional[CodAtom]] = [None] * tilde.k
        for l, atom in enumerate(row):
            if atom is None:
                continue
            if out[atom.var] is not None:
                raise ValueError(f"variable x_{atom.var} appears twice in row {i}")
            out[atom.var] = CodAtom(var=l, sign=atom.sign, conj=atom.conj, scale=atom.scale)
        grid.append(out)
    return DesignMatrix.from_atoms(grid, k=tilde.n)


def h_prime_maps(i: int, j: int, a: int) -> Optional[CodAtom]:
    """Direct closed form for cell ``(i, j)`` of ``H'_a``."""
    maps = build_index_maps(a)
    if not 0 <= j <= a:
        raise ValueError(f"column {j} outside 0..{a}")
    fi = maps.f(i)
    lam = maps.g_inv.get(fi ^ pow2_plus(j - 1))
    if lam is None:
        return None
    if j == 0:
        return CodAtom(var=lam, sign=1, conj=_pm(weight(fi) + ceil_half(a)))
    mask = 1 << (j - 1)
    tau = _pm(1 + weight(fi & mask))
    mu = _pm(1 + weight(fi & twos_complement(mask, a)))
    return CodAtom(var=lam, sign=mu, conj=tau)


@lru_cache(maxsize=32)
def h_prime(a: int) -> DesignMatrix:
    """``H'_a``: maximal-rate ``[p_{a+1}, a+1, k_{a+1}]`` COD for ``a + 1`` antennas."""
    maps = build_index_maps(a)
    grid = [[h_prime_maps(i, j, a) for j in range(a + 1)] for i in range(maps.p)]
    return DesignMatrix.from_atoms(grid, k=maps.k)


@lru_cache(maxsize=32)
def hat_4m(m: int) -> DesignMatrix:
    """``H^_{4m}``: ``H'_{4m-2}`` with one extra column, for ``4m`` antennas."""
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    a = 4 * m - 2
    maps = build_index_maps(a)
    ones = (1 << a) - 1
    hat_one = sum(1 << (2 * s) for s in range(2 * m - 1))
    grid = []
    for i in range(maps.p):
        row = [h_prime_maps(i, j, a) for j in range(a + 1)]
        fi = maps.f(i)
        lam = maps.g_inv.get(fi ^ ones)
        row.append(None if lam is None else CodAtom(var=lam, sign=_pm(1 + weight(fi & hat_one)), conj=-1))
        grid.append(row)
    return DesignMatrix.from_atoms(grid, k=maps.k)


# --------------------------------------------------------------------------
# row pairing and coordinate interleaving


@dataclass(frozen=True)
class PairingPlan:
    """Row and variable pairing induced by an XOR mask ``l``."""

    l: int
    row_pairs: tuple[tuple[int, int], ...]
    unpaired_rows: tuple[int, ...]
    var_pairs: tuple[tuple[int, int], ...]
    isolated_vars: tuple[int, ...]

    @staticmethod
    def from_labels(l: int, row_labels: Sequence[int], var_labels: Sequence[int]) -> "PairingPlan":
        rp, ur = _pairs(l, row_labels)
        vp, iv = _pairs(l, var_labels)
        return PairingPlan(l, rp, ur, vp, iv)


def _pairs(l: int, labels: Sequence[int]):
    index = {lab: i for i, lab in enumerate(labels)}
    pairs, single = [], []
    for i, lab in enumerate(labels):
        j = index.get(lab ^ l)
        if j is None:
            single.append(i)
        elif i < j:
            pairs.append((i, j))
    return tuple(pairs), tuple(single)


def _co_occurring_pairs(design: DesignMatrix) -> tuple[tuple[tuple[int, int], ...], tuple[int, ...]]:
    pairs = set()
    for row in design.entries:
        for e in row:
            vs = sorted(e.variables())
            if len(vs) > 2:
                raise ValueError("entry combines more than two variables")
            if len(vs) == 2:
                pairs.add(tuple(vs))
    seen = [v for p in pairs for v in p]
    if len(seen) != len(set(seen)):
        raise ValueError("variable pairing is not consistent across the design")
    return tuple(sorted(pairs)), tuple(v for v in range(design.k) if v not in set(seen))


@lru_cache(maxsize=1 << 16)
def _half(e: LinearEntry) -> LinearEntry:
    return e.scaled(INV_SQRT2)


def pair_design_rows(
    design: DesignMatrix, row_labels: Sequence[int], l: int, var_labels: Optional[Sequence[int]] = None
) -> tuple[DesignMatrix, PairingPlan]:
    """Mix every ``l``-paired row couple by the unitary ``[[1, 1], [1, -1]] / sqrt 2``.

    The sum goes to the smaller row index and the difference to the larger one.
    When ``var_labels`` is omitted, the variable pairing is read off the result.
    """
    if len(row_labels) != design.p:
        raise ValueError("one row label per row is required")
    row_pairs, unpaired = _pairs(l, row_labels)
    rows = [list(r) for r in design.entries]
    for i, j in row_pairs:
        ri, rj = design.entries[i], design.entries[j]
        rows[i], rows[j] = [], []
        for x, y in zip(ri, rj):
            xs = _half(x) if x else x
            ys = _half(y) if y else y
            if not y:
                rows[i].append(xs)
                rows[j].append(xs)
            elif not x:
                rows[i].append(ys)
                rows[j].append(-ys)
            else:
                rows[i].append(xs + ys)
                rows[j].append(xs - ys)
    mixed = DesignMatrix(rows, k=design.k)
    if var_labels is None:
        var_pairs, isolated = _co_occurring_pairs(mixed)
    else:
        var_pairs, isolated = _pairs(l, var_labels)
    return mixed, PairingPlan(l, row_pairs, unpaired, var_pairs, isolated)


@lru_cache(maxsize=1024)
def pair_rows(a: int, l: int) -> tuple[DesignMatrix, PairingPlan]:
    """``M_a(l)``: row pairing of ``H'_a`` with mask ``l``."""
    _check_order(a)
    if not 1 <= l < (1 << a):
        raise ValueError(f"l must lie in 1..{(1 << a) - 1}, got {l}")
    maps = build_index_maps(a)
    return pair_design_rows(h_prime(a), maps.r_set, l, maps.c_set)


def cis_substitute(m: DesignMatrix, plan: PairingPlan) -> DesignMatrix:
    """Replace each variable pair ``(y_i, y_j)`` by ``((x_i+x_j)/sqrt2, (x_i-x_j)/sqrt2)``."""
    actual_pairs, actual_isolated = _co_occurring_pairs(m)
    planned = set(plan.var_pairs)
    if not set(actual_pairs) <= planned:
        raise ValueError("design pairs variables that the plan does not pair")
    covered = sorted([v for p in plan.var_pairs for v in p] + list(plan.isolated_vars))
    if covered != list(range(m.k)):
        raise ValueError("plan does not partition the variables")
    mapping = {}
    for i, j in plan.var_pairs:
        for part in (I, Q):
            xi, xj = LinearEntry({(i, part): INV_SQRT2}), LinearEntry({(j, part): INV_SQRT2})
            mapping[(i, part)] = xi + xj
            mapping[(j, part)] = xi - xj
    out = m.map_entries(lambda e: e.substitute(mapping))
    for r in range(m.p):
        for c in range(m.n):
            if out[r, c].is_zero() != m[r, c].is_zero():
                raise ValueError(f"substitution changed the zero pattern at ({r},{c})")
    return out


# --------------------------------------------------------------------------
# antenna-indexed families


def low_papr_base(t: int) -> tuple[DesignMatrix, int]:
    """Base COD for the ``t``-antenna CIS code and the order of its index maps.

    Multiples of four use the delay-halved ``H^_t``; other counts use ``H'_{t-1}``.
    """
    if t < 2:
        raise ValueError(f"need at least 2 antennas, got {t}")
    if t % 4 == 0:
        return hat_4m(t // 4), t - 2
    return h_prime(t - 1), t - 1


def paired_code(t: int, l: int = 1) -> tuple[DesignMatrix, PairingPlan]:
    base, a = low_papr_base(t)
    if not 1 <= l < (1 << a):
        raise ValueError(f"l must lie in 1..{(1 << a) - 1}, got {l}")
    maps = build_index_maps(a)
    return pair_design_rows(base, maps.r_set, l, maps.c_set)


def cis_code(t: int, l: int = 1) -> DesignMatrix:
    """``L_t`` for ``l = 1``: the CIS design for ``t`` antennas."""
    return cis_substitute(*paired_code(t, l))


FAMILIES = ("square", "tilde", "maximal", "hprime", "hat4m", "paired", "cis")


def generate(family: str, antennas: int, l: int = 1) -> DesignMatrix:
    """Design of the named family for ``antennas`` transmit antennas."""
    t = antennas
    if t < 2:
        raise ValueError(f"need at least 2 antennas, got {t}")
    if family == "square":
        if t & (t - 1):
            raise ValueError(f"square designs need a power-of-two antenna count, got {t}")
        return square_cod(t.bit_length() - 1)
    if family == "tilde":
        return build_tilde(t - 1)
    if family == "maximal":
        return transpose_to_maximal(build_tilde(t - 1))
    if family == "hprime":
        return h_prime(t - 1)
    if family == "hat4m":
        if t % 4:
            raise ValueError(f"hat4m needs a multiple of 4 antennas, got {t}")
        return hat_4m(t // 4)
    if family == "paired":
        return paired_code(t, l)[0]
    if family == "cis":
        return cis_code(t, l)
    raise ValueError(f"unknown family {family!r}; expected one of {FAMILIES}")
