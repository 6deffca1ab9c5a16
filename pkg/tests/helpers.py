"""Shared oracles and random generators for the test suite."""

import random
from itertools import product

from stbc_forge.design import CodAtom, DesignMatrix, LinearEntry
from stbc_forge.exact import CONE, INV_SQRT2, Sqrt2Complex


def naive_gram(design: DesignMatrix):
    """Dictionary expansion of ``G^H G``; keys are sorted coordinate pairs."""
    out = [[{} for _ in range(design.n)] for _ in range(design.n)]
    for u, v in product(range(design.n), repeat=2):
        acc = out[u][v]
        for r in range(design.p):
            for ks, cs in design[r, u].terms:
                for kt, ct in design[r, v].terms:
                    key = tuple(sorted((ks, kt)))
                    acc[key] = acc.get(key, Sqrt2Complex(0)) + cs.conj() * ct
        out[u][v] = {k: c for k, c in acc.items() if not c.is_zero()}
    return out


def naive_is_orthogonal(design: DesignMatrix) -> bool:
    target = {((v, p), (v, p)): CONE for v in range(design.k) for p in "IQ"}
    g = naive_gram(design)
    return all(g[u][v] == (target if u == v else {}) for u in range(design.n) for v in range(design.n))


def random_atom_design(rng: random.Random, max_p: int = 4, max_n: int = 4, max_k: int = 3) -> DesignMatrix:
    """Random design of unit-scale atoms, biased toward one-variable-per-column layouts.

    Purely random grids are almost never orthogonal; placing each variable
    once per column makes both outcomes common.
    """
    p, n, k = rng.randint(1, max_p), rng.randint(1, max_n), rng.randint(1, max_k)
    grid = [[None] * n for _ in range(p)]
    structured = rng.random() < 0.7 and k <= p
    for j in range(n):
        if structured:
            for v, r in enumerate(rng.sample(range(p), k)):
                grid[r][j] = CodAtom(v, rng.choice((1, -1)), rng.choice((1, -1)))
        else:
            for i in range(p):
                if rng.random() < 0.6:
                    grid[i][j] = CodAtom(rng.randrange(k), rng.choice((1, -1)), rng.choice((1, -1)))
    return DesignMatrix.from_atoms(grid, k=k)


def random_linear_entry(rng: random.Random, k: int) -> LinearEntry:
    coefs = [Sqrt2Complex(0), CONE, -CONE, Sqrt2Complex(0, 1), Sqrt2Complex(INV_SQRT2), Sqrt2Complex(0, -INV_SQRT2)]
    terms = []
    for v in range(k):
        for part in "IQ":
            if rng.random() < 0.4:
                terms.append(((v, part), rng.choice(coefs)))
    return LinearEntry(terms)


def random_linear_design(rng: random.Random, p: int, n: int, k: int) -> DesignMatrix:
    return DesignMatrix([[random_linear_entry(rng, k) for _ in range(n)] for _ in range(p)], k=k)
