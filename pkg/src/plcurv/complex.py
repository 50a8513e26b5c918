"""Embedded simplicial complexes and the PLC v1 text format."""

from __future__ import annotations

import io
import itertools
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable

import numpy as np
from scipy.spatial import cKDTree

from .tolerances import TOL


class ComplexError(ValueError):
    """Raised for structurally invalid complexes or malformed input."""


@dataclass(frozen=True, order=True)
class Face:
    indices: tuple
    dim: int

    @classmethod
    def of(cls, indices) -> "Face":
        idx = tuple(sorted(int(i) for i in indices))
        return cls(idx, len(idx) - 1)


def _faces_of(simplex: tuple) -> Iterable[tuple]:
    for r in range(1, len(simplex) + 1):
        yield from itertools.combinations(simplex, r)


def closure(simplices: Iterable[tuple]) -> set:
    out = set()
    for s in simplices:
        s = tuple(sorted(s))
        if s in out:
            continue
        out.update(_faces_of(s))
    return out


def _is_degenerate(points: np.ndarray) -> bool:
    if len(points) <= 1:
        return False
    edges = points[1:] - points[0]
    if edges.shape[0] > edges.shape[1]:
        return True
    s = np.linalg.svd(edges, compute_uv=False)
    return s[-1] <= TOL.degeneracy * max(1.0, s[0])


class EmbeddedComplex:
    """Finite simplicial complex with vertex coordinates in E^n.

    The constructor trusts its input; use :func:`close_under_faces` to build a
    validated complex from maximal simplices and :func:`validate` for
    diagnostics. Instances are immutable.
    """

    def __init__(self, vertices, simplices, ambient_dim: int | None = None):
        verts = np.array(vertices, dtype=float)
        if verts.ndim != 2:
            if verts.size == 0:
                if ambient_dim is None:
                    raise ComplexError("ambient dimension required for an empty vertex set")
                verts = verts.reshape(0, ambient_dim)
            elif ambient_dim is None:
                verts = verts.reshape(1, -1)
            else:
                verts = verts.reshape(-1, ambient_dim)
        if ambient_dim is not None and verts.shape[1] != ambient_dim:
            raise ComplexError("vertex coordinates do not match ambient dimension")
        verts.setflags(write=False)
        self.vertices = verts
        self.ambient_dim = int(verts.shape[1])
        self.simplices = frozenset(tuple(sorted(int(i) for i in s)) for s in simplices)

    def __repr__(self) -> str:
        return (f"EmbeddedComplex(n={self.ambient_dim}, vertices={len(self.vertices)}, "
                f"f={self.f_vector})")

    def __len__(self) -> int:
        return len(self.simplices)

    @cached_property
    def by_dim(self) -> dict:
        out: dict = {}
        for s in self.simplices:
            out.setdefault(len(s) - 1, []).append(s)
        for k in out:
            out[k].sort()
        return out

    @cached_property
    def dim(self) -> int:
        return max(self.by_dim, default=-1)

    @cached_property
    def f_vector(self) -> tuple:
        return tuple(len(self.by_dim.get(k, ())) for k in range(self.dim + 1))

    @cached_property
    def maximal(self) -> list:
        cofaced = set()
        for s in self.simplices:
            if len(s) > 1:
                for f in itertools.combinations(s, len(s) - 1):
                    cofaced.add(f)
        return sorted(s for s in self.simplices if s not in cofaced)

    @cached_property
    def cofaces(self) -> dict:
        """Vertex index -> simplices containing it."""
        out: dict = {}
        for s in self.simplices:
            for v in s:
                out.setdefault(v, []).append(s)
        return out

    @cached_property
    def used_vertices(self) -> list:
        return sorted(s[0] for s in self.by_dim.get(0, ()))

    def coords(self, simplex) -> np.ndarray:
        return self.vertices[list(simplex)]

    def bounding_box(self) -> tuple:
        pts = self.vertices[self.used_vertices]
        return pts.min(axis=0), pts.max(axis=0)

    def is_empty(self) -> bool:
        return not self.simplices


def empty_complex(n: int) -> EmbeddedComplex:
    return EmbeddedComplex(np.zeros((0, n)), [], ambient_dim=n)


def validate(X: EmbeddedComplex) -> list[str]:
    """List of invariant violations; empty iff ``X`` is a valid complex."""
    problems = []
    m = len(X.vertices)
    if not np.all(np.isfinite(X.vertices)):
        problems.append("non-finite vertex coordinates")
    for s in sorted(X.simplices):
        if len(set(s)) != len(s):
            problems.append(f"simplex {s}: repeated vertex index")
            continue
        if any(i < 0 or i >= m for i in s):
            problems.append(f"simplex {s}: vertex index out of range")
            continue
        missing = [f for f in _faces_of(s) if f not in X.simplices]
        if missing:
            problems.append(f"simplex {s}: closure violation, missing face {missing[0]}")
        if _is_degenerate(X.vertices[list(s)]):
            problems.append(f"simplex {s}: degenerate (affinely dependent vertices)")
    if m > 1:
        pairs = cKDTree(X.vertices).query_pairs(TOL.dedup)
        for i, j in sorted(pairs):
            problems.append(f"vertices {i} and {j}: duplicate within {TOL.dedup:g}")
    return problems


def close_under_faces(vertices, maximal_simplices, ambient_dim: int | None = None) -> EmbeddedComplex:
    """Complex whose simplex set is the face closure of ``maximal_simplices``."""
    maximal = [tuple(sorted(int(i) for i in s)) for s in maximal_simplices]
    verts = np.asarray(vertices, dtype=float)
    if ambient_dim is None:
        if verts.ndim != 2:
            raise ComplexError("ambient dimension required")
        ambient_dim = verts.shape[1]
    X = EmbeddedComplex(verts, closure(maximal), ambient_dim=ambient_dim)
    problems = validate(X)
    for s in maximal:
        if len(set(s)) != len(s):
            problems.append(f"simplex {s}: duplicate vertex")
    if problems:
        raise ComplexError("; ".join(problems))
    return X


def skeleton(X: EmbeddedComplex, k: int) -> list[Face]:
    if k < 0:
        raise ValueError("k must be non-negative")
    return [Face(s, k) for s in X.by_dim.get(k, [])]


def star(X: EmbeddedComplex, v: int) -> EmbeddedComplex:
    """Closed star of vertex ``v``, reindexed so that ``v`` becomes vertex 0."""
    if (v,) not in X.simplices:
        raise IndexError(f"{v} is not a vertex of the complex")
    cells = X.cofaces[v]
    used = sorted({i for s in cells for i in s} - {v})
    order = [v] + used
    remap = {old: new for new, old in enumerate(order)}
    simplices = closure(tuple(remap[i] for i in s) for s in cells)
    return EmbeddedComplex(X.vertices[order], simplices, ambient_dim=X.ambient_dim)


def simplex_volume(points: np.ndarray) -> float:
    k = len(points) - 1
    if k == 0:
        return 1.0
    edges = np.asarray(points[1:] - points[0], dtype=float)
    # sqrt(det(E E^T)) through QR, which stays accurate near degeneracy
    r = np.linalg.qr(edges.T, mode="r")
    return float(np.prod(np.abs(np.diag(r)))) / math.factorial(k)


def face_volume(X: EmbeddedComplex, F) -> float:
    """k-volume of a face; 0-faces have volume 1 (counting measure)."""
    idx = F.indices if isinstance(F, Face) else tuple(F)
    return simplex_volume(X.vertices[list(idx)])


def volume_by_dim(X: EmbeddedComplex, k: int) -> float:
    return sum(face_volume(X, s) for s in X.by_dim.get(k, []))


def euler_characteristic(X: EmbeddedComplex) -> int:
    return sum((-1) ** k * len(v) for k, v in X.by_dim.items())


def subdivide_barycentric(X: EmbeddedComplex) -> EmbeddedComplex:
    """Barycentric subdivision: one vertex per simplex, one simplex per flag."""
    order = sorted(X.simplices, key=lambda s: (len(s), s))
    index = {s: i for i, s in enumerate(order)}
    verts = np.array([X.vertices[list(s)].mean(axis=0) for s in order])
    if len(order) == 0:
        return empty_complex(X.ambient_dim)
    top = []

    def chains(s):
        if len(s) == 1:
            return [[s]]
        out = []
        for f in itertools.combinations(s, len(s) - 1):
            for c in chains(f):
                out.append(c + [s])
        return out

    for s in X.maximal:
        for c in chains(s):
            top.append(tuple(index[f] for f in c))
    return EmbeddedComplex(verts, closure(top), ambient_dim=X.ambient_dim)


def transformed(X: EmbeddedComplex, motion) -> EmbeddedComplex:
    return EmbeddedComplex(motion.apply(X.vertices), X.simplices, ambient_dim=X.ambient_dim)


def scaled(X: EmbeddedComplex, factor: float) -> EmbeddedComplex:
    return EmbeddedComplex(X.vertices * factor, X.simplices, ambient_dim=X.ambient_dim)


def translated(X: EmbeddedComplex, offset) -> EmbeddedComplex:
    return EmbeddedComplex(X.vertices + np.asarray(offset, dtype=float), X.simplices,
                           ambient_dim=X.ambient_dim)


def disjoint_union(X: EmbeddedComplex, Y: EmbeddedComplex) -> EmbeddedComplex:
    if X.ambient_dim != Y.ambient_dim:
        raise ComplexError("ambient dimensions differ")
    shift = len(X.vertices)
    simplices = set(X.simplices) | {tuple(i + shift for i in s) for s in Y.simplices}
    return EmbeddedComplex(np.vstack([X.vertices, Y.vertices]), simplices,
                           ambient_dim=X.ambient_dim)


def subcomplex(X: EmbeddedComplex, simplices) -> EmbeddedComplex:
    """Compact complex on the given (closed) simplex set, reindexed."""
    simplices = list(simplices)
    used = sorted({i for s in simplices for i in s})
    remap = {old: new for new, old in enumerate(used)}
    return EmbeddedComplex(X.vertices[used] if used else np.zeros((0, X.ambient_dim)),
                           [tuple(remap[i] for i in s) for s in simplices],
                           ambient_dim=X.ambient_dim)


# ----------------------------------------------------------------------------
# PLC v1 text format

def _tokens(text: str):
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            yield line.split()


def parse_plc(text: str) -> EmbeddedComplex:
    lines = list(_tokens(text))
    try:
        head = lines[0]
        if head[0] != "PLC" or head[1] != "1" or len(head) != 3:
            raise ComplexError("expected header 'PLC 1 <ambient_dim>'")
        n = int(head[2])
        if lines[1][0] != "VERTICES":
            raise ComplexError("expected 'VERTICES <m>'")
        m = int(lines[1][1])
        verts = [[float(t) for t in lines[2 + i]] for i in range(m)]
        if any(len(v) != n for v in verts):
            raise ComplexError("vertex line has wrong number of coordinates")
        pos = 2 + m
        if lines[pos][0] != "SIMPLICES":
            raise ComplexError("expected 'SIMPLICES <s>'")
        s = int(lines[pos][1])
        maximal = []
        for i in range(s):
            row = [int(t) for t in lines[pos + 1 + i]]
            k, idx = row[0], row[1:]
            if len(idx) != k + 1:
                raise ComplexError(f"simplex line {i}: expected {k + 1} indices")
            maximal.append(tuple(idx))
        if len(lines) > pos + 1 + s:
            raise ComplexError("trailing content after simplices")
    except (IndexError, ValueError) as exc:
        if isinstance(exc, ComplexError):
            raise
        raise ComplexError(f"malformed PLC input: {exc}") from exc
    for simplex in maximal:
        if any(i < 0 or i >= m for i in simplex):
            raise ComplexError(f"simplex {simplex}: vertex index out of range")
    return close_under_faces(np.array(verts, dtype=float).reshape(m, n), maximal, ambient_dim=n)


def format_plc(X: EmbeddedComplex) -> str:
    out = io.StringIO()
    out.write(f"PLC 1 {X.ambient_dim}\n")
    out.write(f"VERTICES {len(X.vertices)}\n")
    for v in X.vertices:
        out.write(" ".join(repr(float(c)) for c in v) + "\n")
    maximal = sorted(X.maximal)
    out.write(f"SIMPLICES {len(maximal)}\n")
    for s in maximal:
        out.write(f"{len(s) - 1} " + " ".join(str(i) for i in s) + "\n")
    return out.getvalue()


def load_plc(path) -> EmbeddedComplex:
    with open(path, encoding="utf-8") as fh:
        return parse_plc(fh.read())


def save_plc(X: EmbeddedComplex, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(format_plc(X))
