"""Exact rational simplicial homology.

Ranks of boundary matrices are computed by fraction-free column reduction on
Python integers, so Betti numbers over Q are exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np


@dataclass(frozen=True)
class ChainComplexData:
    counts: tuple
    simplices: tuple  # per dimension, sorted simplex tuples
    boundaries: tuple  # boundaries[k] is the (n_{k-1} x n_k) matrix of d_k; [0] is empty

    def matrix(self, k: int) -> np.ndarray:
        return self.boundaries[k]


@dataclass(frozen=True)
class BettiVector:
    """Betti numbers ``b_0..b_d``; ``reduced`` starts at degree -1."""

    betti: tuple
    empty: bool = False

    @property
    def reduced(self) -> tuple:
        if self.empty:
            return (1,) + tuple(0 for _ in self.betti)
        b = list(self.betti)
        return (0, b[0] - 1, *b[1:])

    @property
    def total(self) -> int:
        return sum(self.betti)

    def __getitem__(self, k: int) -> int:
        return self.betti[k] if 0 <= k < len(self.betti) else 0

    def __len__(self) -> int:
        return len(self.betti)


def _group(simplices: Iterable[tuple]) -> list:
    by_dim: dict = {}
    for s in simplices:
        by_dim.setdefault(len(s) - 1, []).append(tuple(s))
    top = max(by_dim, default=-1)
    return [sorted(by_dim.get(k, [])) for k in range(top + 1)]


def _boundary_columns(faces: list, cells: list) -> list:
    index = {f: i for i, f in enumerate(faces)}
    cols = []
    for s in cells:
        col = {}
        for i in range(len(s)):
            col[index[s[:i] + s[i + 1:]]] = -1 if i % 2 else 1
        cols.append(col)
    return cols


def boundary_matrices(X) -> ChainComplexData:
    """Integer boundary matrices with sorted-vertex orientation."""
    groups = _group(X.simplices)
    mats = [np.zeros((0, len(groups[0]) if groups else 0), dtype=np.int64)]
    for k in range(1, len(groups)):
        m = np.zeros((len(groups[k - 1]), len(groups[k])), dtype=np.int64)
        for j, col in enumerate(_boundary_columns(groups[k - 1], groups[k])):
            for i, v in col.items():
                m[i, j] = v
        mats.append(m)
    return ChainComplexData(tuple(len(g) for g in groups), tuple(groups), tuple(mats))


def rank_exact(columns: list) -> int:
    """Rank over Q of a sparse integer matrix given as ``{row: value}`` columns."""
    pivots: dict = {}
    for col in columns:
        c = {r: v for r, v in col.items() if v}
        while c:
            low = max(c)
            p = pivots.get(low)
            if p is None:
                g = 0
                for v in c.values():
                    g = math.gcd(g, v)
                pivots[low] = {r: v // g for r, v in c.items()}
                break
            a, b = p[low], c[low]
            new = {r: a * v for r, v in c.items()}
            for r, v in p.items():
                new[r] = new.get(r, 0) - b * v
            c = {r: v for r, v in new.items() if v}
            if c:
                g = 0
                for v in c.values():
                    g = math.gcd(g, v)
                if g > 1:
                    c = {r: v // g for r, v in c.items()}
    return len(pivots)


def matrix_rank_exact(m) -> int:
    m = np.asarray(m)
    cols = [{int(i): int(m[i, j]) for i in np.flatnonzero(m[:, j])} for j in range(m.shape[1])]
    return rank_exact(cols)


def betti_of_simplices(simplices: Iterable[tuple]) -> BettiVector:
    groups = _group(simplices)
    if not groups:
        return BettiVector((), empty=True)
    ranks = [0] * (len(groups) + 1)
    for k in range(1, len(groups)):
        ranks[k] = rank_exact(_boundary_columns(groups[k - 1], groups[k]))
    b = tuple(len(groups[k]) - ranks[k] - ranks[k + 1] for k in range(len(groups)))
    return BettiVector(b)


def betti(X) -> BettiVector:
    return betti_of_simplices(X.simplices)


def pair_betti(link: BettiVector) -> BettiVector:
    """Betti numbers of (C/L) for a cone C over the link L: b_k = reduced b_(k-1)(L)."""
    return BettiVector(link.reduced)


def pair_betti_from_link(L) -> BettiVector:
    return pair_betti(betti(L))


def euler_from_betti(B: BettiVector) -> int:
    return sum((-1) ** k * b for k, b in enumerate(B.betti))
