"""Symbolic design matrices and their exact verification.

An entry of a design is a complex-linear combination of the ``2k`` real
coordinates ``x_{iI}``, ``x_{iQ}``.  A plain COD entry ``±x_c`` or ``±x_c^*`` is
just the special case with two terms on the same variable, so one Gram
verifier covers CODs, LCODs and coordinate-interleaved designs alike.
"""

from __future__ import annotations

import enum
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from math import lcm
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np
from scipy import sparse

from .exact import CONE, INV_SQRT2, ONE, J, Sqrt2Complex, Sqrt2Rational

I, Q = "I", "Q"
PARTS = (I, Q)

Coord = tuple  # (var, part)


def _part_index(part: str) -> int:
    if part == I:
        return 0
    if part == Q:
        return 1
    raise ValueError(f"part must be 'I' or 'Q', got {part!r}")


def _as_coef(c) -> Sqrt2Complex:
    return c if isinstance(c, Sqrt2Complex) else Sqrt2Complex.coerce(c)


class LinearEntry:
    """Immutable linear form ``sum coef * x_{var,part}`` with exact coefficients."""

    __slots__ = ("terms", "_hash")

    def __init__(self, terms: Mapping | Iterable = ()):
        items = terms.items() if isinstance(terms, Mapping) else terms
        acc: dict[tuple[int, str], Sqrt2Complex] = {}
        for key, coef in items:
            var, part = key
            _part_index(part)
            if var < 0:
                raise ValueError(f"negative variable index {var}")
            coef = _as_coef(coef)
            prev = acc.get((var, part))
            acc[(var, part)] = coef if prev is None else prev + coef
        object.__setattr__(
            self,
            "terms",
            tuple(sorted(((k, v) for k, v in acc.items() if not v.is_zero()), key=lambda kv: kv[0])),
        )
        object.__setattr__(self, "_hash", None)

    def __setattr__(self, name, value):
        raise AttributeError("LinearEntry is immutable")

    @classmethod
    def _raw(cls, terms: tuple) -> "LinearEntry":
        """Wrap already sorted, nonzero, duplicate-free terms without rechecking."""
        e = object.__new__(cls)
        object.__setattr__(e, "terms", terms)
        object.__setattr__(e, "_hash", None)
        return e

    @classmethod
    def atom(cls, var: int, sign: int = 1, conj: int = 1, scale: Sqrt2Rational = ONE) -> "LinearEntry":
        """``sign * scale * x_var`` (``conj=1``) or ``sign * scale * x_var^*`` (``conj=-1``)."""
        if sign not in (1, -1) or conj not in (1, -1):
            raise ValueError("sign and conj must be +1 or -1")
        c = Sqrt2Complex(scale * sign)
        return cls({(var, I): c, (var, Q): c * J * conj})

    # algebra -------------------------------------------------------------
    def __add__(self, other: "LinearEntry") -> "LinearEntry":
        if not isinstance(other, LinearEntry):
            return NotImplemented
        mine = {k for k, _ in self.terms}
        if mine.isdisjoint(k for k, _ in other.terms):
            return LinearEntry._raw(tuple(sorted(self.terms + other.terms, key=lambda kv: kv[0])))
        return LinearEntry(self.terms + other.terms)

    def __neg__(self) -> "LinearEntry":
        return LinearEntry._raw(tuple((k, -c) for k, c in self.terms))

    def __sub__(self, other: "LinearEntry") -> "LinearEntry":
        if not isinstance(other, LinearEntry):
            return NotImplemented
        return self + (-other)

    def scaled(self, factor) -> "LinearEntry":
        factor = _as_coef(factor)
        return LinearEntry((k, c * factor) for k, c in self.terms)

    def conj(self) -> "LinearEntry":
        # coordinates are real, so only coefficients are conjugated
        return LinearEntry((k, c.conj()) for k, c in self.terms)

    def substitute(self, mapping: Mapping[tuple[int, str], "LinearEntry"]) -> "LinearEntry":
        """Replace real coordinates by real-linear combinations of new coordinates.

        ``mapping[(var, part)]`` must have real coefficients; unmapped keys are kept.
        """
        out = []
        for key, coef in self.terms:
            repl = mapping.get(key)
            if repl is None:
                out.append((key, coef))
                continue
            for k2, c2 in repl.terms:
                if not c2.is_real():
                    raise ValueError("substitution of a real coordinate must be real")
                out.append((k2, coef * c2))
        return LinearEntry(out)

    # inspection ----------------------------------------------------------
    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def variables(self) -> frozenset[int]:
        return frozenset(var for (var, _), _ in self.terms)

    def coefficient(self, var: int, part: str) -> Sqrt2Complex:
        for key, c in self.terms:
            if key == (var, part):
                return c
        return Sqrt2Complex(0)

    def as_atom(self) -> Optional["CodAtom"]:
        """The ``(var, sign, conj, scale)`` view if this is a scaled variable or conjugate."""
        if len(self.terms) != 2:
            return None
        ((v1, p1), ci), ((v2, p2), cq) = self.terms
        if v1 != v2 or p1 != I or p2 != Q:
            return None
        if not ci.is_real() or not cq.is_imag():
            return None
        re = ci.re
        if cq.im == re:
            conj = 1
        elif cq.im == -re:
            conj = -1
        else:
            return None
        sign = re.sign()
        return CodAtom(var=v1, sign=sign, conj=conj, scale=re * sign)

    def is_coordinate_interleaved(self) -> bool:
        """``±s (x_{uI} ± j x_{vQ})`` with ``u != v`` and ``s`` in ``{1, 1/sqrt 2}``."""
        if len(self.terms) != 2:
            return False
        ((v1, p1), ci), ((v2, p2), cq) = self.terms
        if p1 == Q and p2 == I:
            (v1, p1, ci), (v2, p2, cq) = (v2, p2, cq), (v1, p1, ci)
        if v1 == v2 or p1 != I or p2 != Q:
            return False
        if not ci.is_real() or not cq.is_imag():
            return False
        mag = ci.re * ci.re.sign()
        if cq.im != mag and cq.im != -mag:
            return False
        return mag == ONE or mag == INV_SQRT2

    def __eq__(self, other):
        if not isinstance(other, LinearEntry):
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self):
        h = self._hash
        if h is None:
            h = hash(self.terms)
            object.__setattr__(self, "_hash", h)
        return h

    def __repr__(self):
        from .codec import render_entry

        return f"LinearEntry({render_entry(self)!r})"


ZERO_ENTRY = LinearEntry()


@dataclass(frozen=True)
class CodAtom:
    """One variable or its conjugate with a sign and a positive scale."""

    var: int
    sign: int = 1
    conj: int = 1
    scale: Sqrt2Rational = ONE

    def to_entry(self) -> LinearEntry:
        return LinearEntry.atom(self.var, self.sign, self.conj, self.scale)

    def conjugated(self) -> "CodAtom":
        return CodAtom(self.var, self.sign, -self.conj, self.scale)


class DesignMatrix:
    """A ``p x n`` grid of :class:`LinearEntry` in ``k`` complex variables.

    Rows are time slots and columns are transmit antennas.
    """

    __slots__ = ("p", "n", "k", "entries")

    def __init__(self, entries: Sequence[Sequence[LinearEntry]], k: Optional[int] = None):
        rows = tuple(tuple(row) for row in entries)
        if not rows:
            raise ValueError("a design needs at least one row")
        n = len(rows[0])
        if n == 0 or any(len(r) != n for r in rows):
            raise ValueError("design rows must be nonempty and of equal length")
        used = max((v for r in rows for e in r for v in e.variables()), default=-1)
        if k is None:
            k = used + 1
        if used >= k:
            raise ValueError(f"variable x_{used} used but k={k}")
        object.__setattr__(self, "entries", rows)
        object.__setattr__(self, "p", len(rows))
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "k", k)

    def __setattr__(self, name, value):
        raise AttributeError("DesignMatrix is immutable")

    @classmethod
    def from_atoms(cls, grid: Sequence[Sequence[Optional[CodAtom]]], k: Optional[int] = None) -> "DesignMatrix":
        return cls([[ZERO_ENTRY if a is None else a.to_entry() for a in row] for row in grid], k=k)

    def __getitem__(self, idx) -> LinearEntry:
        i, j = idx
        return self.entries[i][j]

    @property
    def shape(self) -> tuple[int, int]:
        return self.p, self.n

    @property
    def size(self) -> tuple[int, int, int]:
        """``(p, n, k)``."""
        return self.p, self.n, self.k

    @property
    def rate(self) -> Fraction:
        return Fraction(self.k, self.p)

    def column(self, j: int) -> tuple[LinearEntry, ...]:
        return tuple(row[j] for row in self.entries)

    def zero_count(self) -> int:
        return sum(1 for row in self.entries for e in row if e.is_zero())

    def atoms(self) -> list[list[Optional[CodAtom]]]:
        """Atom view of every cell; raises if some nonzero entry is not an atom."""
        out = []
        for i, row in enumerate(self.entries):
            arow = []
            for j, e in enumerate(row):
                if e.is_zero():
                    arow.append(None)
                    continue
                atom = e.as_atom()
                if atom is None:
                    raise ValueError(f"entry ({i},{j}) is not a single variable or conjugate")
                arow.append(atom)
            out.append(arow)
        return out

    def is_atomic(self) -> bool:
        return all(e.is_zero() or e.as_atom() is not None for row in self.entries for e in row)

    def select(self, rows: Sequence[int], cols: Sequence[int], k: Optional[int] = None) -> "DesignMatrix":
        return DesignMatrix([[self.entries[i][j] for j in cols] for i in rows], k=self.k if k is None else k)

    def replace(self, i: int, j: int, entry: LinearEntry) -> "DesignMatrix":
        rows = [list(r) for r in self.entries]
        rows[i][j] = entry
        return DesignMatrix(rows, k=self.k)

    def map_entries(self, fn) -> "DesignMatrix":
        return DesignMatrix([[fn(e) for e in row] for row in self.entries], k=self.k)

    def __eq__(self, other):
        if not isinstance(other, DesignMatrix):
            return NotImplemented
        return self.k == other.k and self.entries == other.entries

    def __hash__(self):
        return hash((self.k, self.entries))

    def __repr__(self):
        return f"DesignMatrix(p={self.p}, n={self.n}, k={self.k})"


# --------------------------------------------------------------------------
# Gram matrix


@dataclass(frozen=True)
class QuadraticForm:
    """Quadratic form over real coordinates; keys are sorted coordinate pairs."""

    coefficients: Mapping

    def __eq__(self, other):
        if not isinstance(other, QuadraticForm):
            return NotImplemented
        return dict(self.coefficients) == dict(other.coefficients)

    def __hash__(self):
        return hash(frozenset(self.coefficients.items()))

    def is_zero(self) -> bool:
        return not self.coefficients

    def conj(self) -> "QuadraticForm":
        return QuadraticForm({k: c.conj() for k, c in self.coefficients.items()})

    @staticmethod
    def energy(k: int) -> "QuadraticForm":
        """``sum_i x_{iI}^2 + x_{iQ}^2``."""
        return QuadraticForm({((v, p), (v, p)): CONE for v in range(k) for p in PARTS})

    def __repr__(self):
        parts = [f"({c})*x{a[0]}{a[1]}*x{b[0]}{b[1]}" for (a, b), c in sorted(self.coefficients.items())]
        return "QuadraticForm(" + (" + ".join(parts) or "0") + ")"


_DENSE_LIMIT = 4096


def _integer_components(design: DesignMatrix):
    """Scale every coefficient to integers: returns ``(D, [Ra, Rb, Ia, Ib])``.

    Each matrix is ``p x (n*2k)`` and ``coef = (Ra + Rb*r2 + j(Ia + Ib*r2)) / D``.
    Small designs get dense arrays, where sparse bookkeeping would dominate.
    """
    den = 1
    cells = []
    width = 2 * design.k
    for r, row in enumerate(design.entries):
        for u, e in enumerate(row):
            for (var, part), c in e.terms:
                comps = c.components()
                for x in comps:
                    den = lcm(den, x.denominator)
                cells.append((r, u * width + 2 * var + _part_index(part), comps))
    shape = (design.p, design.n * width)
    dense = shape[0] * shape[1] <= _DENSE_LIMIT
    mats = []
    for idx in range(4):
        rows, cols, data = [], [], []
        for r, col, comps in cells:
            x = comps[idx]
            if x:
                rows.append(r)
                cols.append(col)
                data.append(int(x * den))
        if dense:
            m = np.zeros(shape, dtype=np.int64)
            m[rows, cols] = data
            mats.append(m)
        else:
            mats.append(sparse.csr_matrix((np.array(data, dtype=np.int64), (rows, cols)), shape=shape))
    return den, mats


def _sqrt2_product(xa, xb, ya, yb):
    """``X^T Y`` for ``X = xa + r2*xb`` and ``Y = ya + r2*yb``."""
    return (xa.T @ ya + 2 * (xb.T @ yb)), (xa.T @ yb + xb.T @ ya)


def _gram_components(design: DesignMatrix):
    """``A^H A`` over the flattened (antenna, coordinate) axis, as 4 integer arrays."""
    den, (ra, rb, ia, ib) = _integer_components(design)
    bound = max((abs(m).max() if (m.nnz if sparse.issparse(m) else m.any()) else 0) for m in (ra, rb, ia, ib))
    if 8 * design.p * int(bound) ** 2 >= 2**62:
        raise OverflowError("coefficients too large for the integer Gram path")
    rr_a, rr_b = _sqrt2_product(ra, rb, ra, rb)
    ii_a, ii_b = _sqrt2_product(ia, ib, ia, ib)
    ri_a, ri_b = _sqrt2_product(ra, rb, ia, ib)
    ir_a, ir_b = _sqrt2_product(ia, ib, ra, rb)
    comps = [rr_a + ii_a, rr_b + ii_b, ri_a - ir_a, ri_b - ir_b]
    return den, [np.asarray(c.todense() if sparse.issparse(c) else c, dtype=np.int64) for c in comps]


def _symmetrize(design: DesignMatrix, comp: np.ndarray) -> np.ndarray:
    """Collect ``z_s z_t`` and ``z_t z_s`` into one coefficient, per antenna pair.

    Returns an ``(n, 2k, n, 2k)`` array whose ``[u, s, v, t]`` entry (``s != t``)
    is the coefficient of the monomial ``z_s z_t`` in Gram entry ``(u, v)``,
    doubled on the diagonal ``s == t``.
    """
    w = 2 * design.k
    blk = comp.reshape(design.n, w, design.n, w)
    return blk + blk.transpose(0, 3, 2, 1)


def gram(design: DesignMatrix) -> list[list[QuadraticForm]]:
    """Exact ``G^H G`` as an ``n x n`` grid of quadratic forms in the real coordinates."""
    den, comps = _gram_components(design)
    sym = [_symmetrize(design, c) for c in comps]
    d2 = den * den
    nz = np.zeros_like(sym[0], dtype=bool)
    for s in sym:
        nz |= s != 0
    coords = [(v, p) for v in range(design.k) for p in PARTS]
    forms: list[list[dict]] = [[{} for _ in range(design.n)] for _ in range(design.n)]
    for u, s, v, t in zip(*np.nonzero(nz)):
        if s > t:
            continue
        halve = 2 if s == t else 1
        vals = [Fraction(int(c[u, s, v, t]), d2 * halve) for c in sym]
        forms[u][v][(coords[s], coords[t])] = Sqrt2Complex(
            Sqrt2Rational(vals[0], vals[1]), Sqrt2Rational(vals[2], vals[3])
        )
    return [[QuadraticForm(f) for f in row] for row in forms]


def _orthogonality_residual(design: DesignMatrix):
    den, comps = _gram_components(design)
    sym = [_symmetrize(design, c) for c in comps]
    target = np.zeros_like(sym[0])
    w = 2 * design.k
    for u in range(design.n):
        target[u, range(w), u, range(w)] = 2 * den * den
    sym[0] = sym[0] - target
    return sym


def is_orthogonal(design: DesignMatrix) -> bool:
    """True iff ``G^H G = (sum_i |x_i|^2) I`` holds identically."""
    return all(not s.any() for s in _orthogonality_residual(design))


def orthogonality_violations(design: DesignMatrix, limit: int = 10) -> list[tuple[int, int]]:
    """Antenna pairs ``(u, v)``, ``u <= v``, whose Gram entry is wrong."""
    bad = np.zeros((design.n, design.n), dtype=bool)
    for s in _orthogonality_residual(design):
        bad |= (s != 0).any(axis=(1, 3))
    pairs = [(int(u), int(v)) for u, v in zip(*np.nonzero(bad)) if u <= v]
    return pairs[:limit]


# --------------------------------------------------------------------------
# classification


class Classification(str, enum.Enum):
    COD = "COD"
    CIS_COD = "CIS_COD"
    LCOD = "LCOD"
    NOT_ORTHOGONAL = "NOT_ORTHOGONAL"


def _cis_entry(e: LinearEntry) -> bool:
    atom = e.as_atom()
    if atom is not None:
        return atom.scale == ONE or atom.scale == INV_SQRT2
    return e.is_coordinate_interleaved()


def classify(design: DesignMatrix) -> Classification:
    if not is_orthogonal(design):
        return Classification.NOT_ORTHOGONAL
    nonzero = [e for row in design.entries for e in row if e]
    atoms = [e.as_atom() for e in nonzero]
    if all(a is not None and a.scale == ONE for a in atoms):
        return Classification.COD
    if all(_cis_entry(e) for e in nonzero):
        return Classification.CIS_COD
    return Classification.LCOD


# --------------------------------------------------------------------------
# local characterization of CODs


@dataclass(frozen=True)
class CharacterizationResult:
    ok: bool
    condition: Optional[str] = None
    witness: tuple = ()
    message: str = ""

    def __bool__(self):
        return self.ok


def _unit_atoms(design: DesignMatrix):
    grid = []
    for i, row in enumerate(design.entries):
        arow = []
        for j, e in enumerate(row):
            if e.is_zero():
                arow.append(None)
                continue
            a = e.as_atom()
            if a is None or a.scale != ONE:
                raise ValueError(f"entry ({i},{j}) is not ±x or ±x^*; the local test needs atom entries")
            arow.append(a)
        grid.append(arow)
    return grid


def _proper_pair_is_cod(a, b, c, d) -> bool:
    """``[[a, b], [c, d]]`` with ``a, d`` on one variable and ``b, c`` on another."""
    # conj(a) b + conj(c) d cancels iff the monomials agree and the signs oppose
    return d.conj == -a.conj and c.conj == -b.conj and a.sign * b.sign * c.sign * d.sign == -1


def check_cod_characterization(design: DesignMatrix) -> CharacterizationResult:
    """Decide the COD property from local structure alone.

    The design is a COD iff (i) every variable occurs exactly once per column
    and at most once per row, (ii) whenever ``M(i,j)``, ``M(i,j')``, ``M(i',j')``
    are nonzero with ``|M(i,j)| = |M(i',j')|`` then ``M(i',j)`` is nonzero and
    ``|M(i,j')| = |M(i',j)|``, and (iii) every proper 2x2 submatrix is a COD.
    On failure the result names the condition and carries index witnesses;
    for (iii) the witness is ``(row, row, col, col)``.
    """
    grid = _unit_atoms(design)
    p, n, k = design.p, design.n, design.k

    where: list[dict[int, int]] = [{} for _ in range(n)]  # column -> var -> row
    for j in range(n):
        counts = Counter(grid[i][j].var for i in range(p) if grid[i][j] is not None)
        for var in range(k):
            if counts.get(var, 0) != 1:
                return CharacterizationResult(
                    False, "i", ("column", j, var), f"x_{var} occurs {counts.get(var, 0)} times in column {j}"
                )
        for i in range(p):
            if grid[i][j] is not None:
                where[j][grid[i][j].var] = i
    for i in range(p):
        counts = Counter(a.var for a in grid[i] if a is not None)
        for var, cnt in counts.items():
            if cnt > 1:
                return CharacterizationResult(False, "i", ("row", i, var), f"x_{var} occurs {cnt} times in row {i}")

    for i in range(p):
        nz = [j for j in range(n) if grid[i][j] is not None]
        for j in nz:
            for j2 in nz:
                if j2 == j:
                    continue
                i2 = where[j2][grid[i][j].var]
                if i2 == i:
                    continue
                if grid[i2][j] is None or grid[i2][j].var != grid[i][j2].var:
                    return CharacterizationResult(
                        False, "ii", (i, i2, j, j2), f"rows {i},{i2} / columns {j},{j2} break the exchange rule"
                    )

    for j in range(n):
        for j2 in range(j + 1, n):
            for i in range(p):
                a, b = grid[i][j], grid[i][j2]
                if a is None or b is None:
                    continue
                i2 = where[j][b.var]
                if i2 <= i:
                    continue
                c, d = grid[i2][j], grid[i2][j2]
                if d is None or d.var != a.var:
                    continue
                if not _proper_pair_is_cod(a, b, c, d):
                    return CharacterizationResult(
                        False, "iii", (i, i2, j, j2), f"proper 2x2 at rows {i},{i2} columns {j},{j2} is not a COD"
                    )
    return CharacterizationResult(True)


def is_conjugation_separated(design: DesignMatrix) -> bool:
    """Every row holds only conjugated or only unconjugated variables."""
    for row in design.atoms():
        if len({a.conj for a in row if a is not None}) > 1:
            return False
    return True
