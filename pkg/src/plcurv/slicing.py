"""Cutting complexes: hyperplane and flat sections, directional links and
intersections of complexes, each returned as a triangulated complex."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .complex import EmbeddedComplex, closure, empty_complex, star
from .geom import Flat
from .tolerances import TOL


class GeometryDegeneracy(ValueError):
    """Base class for inputs in non-generic position."""

    def __init__(self, message: str, witness=None):
        super().__init__(message)
        self.witness = witness


class Degenerate(GeometryDegeneracy):
    """A positive-dimensional face lies in the cutting locus."""


class NearDegenerate(GeometryDegeneracy):
    """A feasibility decision fell inside the numerical uncertainty band."""


@dataclass(frozen=True)
class GenericityReport:
    ok: bool
    witness: tuple | None = None


@dataclass
class PolytopalComplex:
    """Cells are frozensets of vertex ids; ``facets`` maps a cell to its facets."""

    vertices: np.ndarray
    cells: dict = field(default_factory=dict)
    facets: dict = field(default_factory=dict)

    @property
    def ambient_dim(self) -> int:
        return self.vertices.shape[1]

    def euler_characteristic(self) -> int:
        return sum((-1) ** d for d in self.cells.values())

    def triangulate(self) -> EmbeddedComplex:
        """Barycentric coning in increasing cell dimension.

        Simplicial cells are kept; every other cell is coned from its
        vertex barycentre over the already triangulated facets, so shared
        faces receive identical triangulations.
        """
        n = self.ambient_dim
        coords = [p for p in self.vertices]
        tri: dict = {}
        for cell in sorted(self.cells, key=lambda c: (self.cells[c], sorted(c))):
            d = self.cells[cell]
            if len(cell) == d + 1:
                tri[cell] = [tuple(sorted(cell))]
                continue
            centre = len(coords)
            coords.append(self.vertices[sorted(cell)].mean(axis=0))
            pieces = set()
            for f in self.facets[cell]:
                for t in tri[f]:
                    pieces.add(tuple(sorted(t)) + (centre,))
            tri[cell] = sorted(pieces)
        tops = [t for ts in tri.values() for t in ts]
        verts = np.array(coords, dtype=float).reshape(len(coords), n)
        return EmbeddedComplex(verts, closure(tops), ambient_dim=n)


# ----------------------------------------------------------------------------
# hyperplane and flat sections

def hyperplane_genericity(X: EmbeddedComplex, point, normal, tol: float = TOL.geometric) -> GenericityReport:
    h = (X.vertices - np.asarray(point, dtype=float)) @ np.asarray(normal, dtype=float)
    zero = np.abs(h) <= tol
    for e in X.by_dim.get(1, []):
        if zero[e[0]] and zero[e[1]]:
            return GenericityReport(False, e)
    return GenericityReport(True)


def section_cells(X: EmbeddedComplex, point, normal, tol: float = TOL.geometric) -> PolytopalComplex:
    """Polytopal complex ``X ∩ {<y - point, normal> = 0}`` before triangulation."""
    normal = np.asarray(normal, dtype=float)
    point = np.asarray(point, dtype=float)
    V = X.vertices
    h = (V - point) @ normal
    sign = np.where(h > tol, 1, np.where(h < -tol, -1, 0))
    report = hyperplane_genericity(X, point, normal, tol)
    if not report.ok:
        raise Degenerate(f"face {report.witness} lies in the cutting hyperplane", report.witness)

    keys: dict = {}
    coords = []

    def key_id(key):
        i = keys.get(key)
        if i is None:
            i = keys[key] = len(coords)
            if key[0] == "v":
                coords.append(V[key[1]])
            else:
                a, b = key[1], key[2]
                t = h[a] / (h[a] - h[b])
                coords.append(V[a] + t * (V[b] - V[a]))
        return i

    cell_of: dict = {}
    cells: dict = {}
    for s in sorted(X.simplices, key=len):
        pos = [i for i in s if sign[i] > 0]
        neg = [i for i in s if sign[i] < 0]
        zer = [i for i in s if sign[i] == 0]
        if pos and neg:
            ids = [key_id(("v", z)) for z in zer]
            ids += [key_id(("e",) + tuple(sorted((p, q)))) for p in pos for q in neg]
            d = len(s) - 2
        elif zer:
            ids = [key_id(("v", z)) for z in zer]
            d = 0
        else:
            continue
        c = frozenset(ids)
        cell_of[s] = c
        cells[c] = d
    facets: dict = {c: set() for c in cells}
    for s, c in cell_of.items():
        d = cells[c]
        if d == 0 or len(s) < 2:
            continue
        for i in range(len(s)):
            f = cell_of.get(s[:i] + s[i + 1:])
            if f is not None and cells[f] == d - 1:
                facets[c].add(f)
    verts = np.array(coords, dtype=float).reshape(len(coords), X.ambient_dim)
    return PolytopalComplex(verts, cells, {c: sorted(fs, key=sorted) for c, fs in facets.items()})


def hyperplane_section(X: EmbeddedComplex, point, normal, tol: float = TOL.geometric) -> EmbeddedComplex:
    """Triangulated section of ``X`` by the hyperplane through ``point``.

    Raises
    ------
    Degenerate
        if a face of dimension >= 1 lies in the hyperplane.
    """
    normal = np.asarray(normal, dtype=float)
    if abs(np.linalg.norm(normal) - 1.0) > TOL.orthonormality * 100:
        raise ValueError("normal must be a unit vector")
    return section_cells(X, point, normal, tol).triangulate()


def flat_section_ambient(X: EmbeddedComplex, flat: Flat, tol: float = TOL.geometric) -> EmbeddedComplex:
    if flat.ambient_dim != X.ambient_dim:
        raise ValueError("flat and complex live in different spaces")
    Y = X
    for normal in flat.complement_frame():
        if Y.is_empty():
            break
        Y = hyperplane_section(Y, flat.base, normal, tol)
    return Y


def flat_section(X: EmbeddedComplex, flat: Flat, tol: float = TOL.geometric) -> EmbeddedComplex:
    """Section ``X ∩ flat`` in intrinsic coordinates of the flat."""
    if not 0 <= flat.k < X.ambient_dim:
        raise ValueError("need 0 <= flat.k < ambient dimension")
    Y = flat_section_ambient(X, flat, tol)
    if Y.is_empty():
        return empty_complex(flat.k)
    local = flat.to_intrinsic(Y.vertices).reshape(len(Y.vertices), flat.k)
    return EmbeddedComplex(local, Y.simplices, ambient_dim=flat.k)


def section_euler(X: EmbeddedComplex, flat: Flat, tol: float = TOL.geometric) -> int:
    """Euler characteristic of ``X ∩ flat``; the last cut is left untriangulated."""
    normals = flat.complement_frame()
    Y = X
    for normal in normals[:-1]:
        if Y.is_empty():
            return 0
        Y = hyperplane_section(Y, flat.base, normal, tol)
    if Y.is_empty():
        return 0
    return section_cells(Y, flat.base, normals[-1], tol).euler_characteristic()


# ----------------------------------------------------------------------------
# directional links

def _heights(X: EmbeddedComplex, v: int, a) -> tuple:
    a = np.asarray(a, dtype=float)
    if abs(np.linalg.norm(a) - 1.0) > 1e-8:
        raise ValueError("direction must be a unit vector")
    S = star(X, v)
    h = (S.vertices - S.vertices[0]) @ a
    bad = np.flatnonzero(np.abs(h[1:]) <= TOL.degeneracy)
    if bad.size:
        raise Degenerate("direction orthogonal to a star edge", int(bad[0]) + 1)
    return S, h


def directional_link(X: EmbeddedComplex, v: int, a) -> EmbeddedComplex:
    """Link ``L(X, x, a)`` as the section of the closed star at height delta.

    ``delta`` is half the smallest positive vertex height, so no star vertex
    lies between the vertex and the cutting level.
    """
    S, h = _heights(X, v, a)
    positive = h[1:][h[1:] > 0]
    if positive.size == 0:
        return empty_complex(X.ambient_dim)
    delta = 0.5 * float(positive.min())
    x = S.vertices[0]
    return hyperplane_section(S, x + delta * np.asarray(a, dtype=float), a)


def lower_link_simplices(X: EmbeddedComplex, v: int, a) -> list:
    """Full subcomplex of the combinatorial link of ``v`` on vertices of
    positive height; homotopy equivalent to :func:`directional_link`."""
    S, h = _heights(X, v, a)
    pos = set(np.flatnonzero(h > 0).tolist())
    return [tuple(i for i in s if i != 0) for s in S.simplices
            if 0 in s and len(s) > 1 and all(i in pos for i in s if i != 0)]


# ----------------------------------------------------------------------------
# intersections

def _affine_rank(points: np.ndarray, tol: float = TOL.geometric) -> int:
    if len(points) <= 1:
        return 0
    s = np.linalg.svd(points[1:] - points[0], compute_uv=False)
    return int(np.sum(s > tol * max(1.0, s[0])))


def _hrep(points: np.ndarray):
    """Equalities ``A y = b`` and barycentric inequalities ``G y + c >= 0``."""
    points = np.asarray(points, dtype=float)
    n = points.shape[1]
    u0 = points[0]
    m = len(points) - 1
    if m == 0:
        return np.eye(n), u0.copy(), np.zeros((0, n)), np.zeros(0)
    D = (points[1:] - u0).T
    q, r = np.linalg.qr(D)
    if np.min(np.abs(np.diag(r))) <= TOL.degeneracy:
        raise ValueError("degenerate simplex")
    u, _, _ = np.linalg.svd(D, full_matrices=True)
    N = u[:, m:]
    M = np.linalg.solve(r, q.T)
    G = np.vstack([-M.sum(axis=0), M])
    c = np.concatenate([[1.0 + M.sum(axis=0) @ u0], -M @ u0])
    return N.T, N.T @ u0, G, c


def _classify(slack: np.ndarray, tol: float, tight: float):
    """Return (feasible, ambiguous) masks for candidate rows of slacks."""
    infeasible = np.any(slack < -tol, axis=-1)
    band = (np.abs(slack) > tight) & (np.abs(slack) <= tol)
    ambiguous = ~infeasible & np.any(band, axis=-1)
    return ~infeasible & ~ambiguous, ambiguous


def _pair_polytope(P1: np.ndarray, P2: np.ndarray, tol: float = TOL.geometric,
                   tight: float = TOL.tight):
    """Extreme points of ``conv(P1) ∩ conv(P2)`` and their tight constraints."""
    n = P1.shape[1]
    A1, b1, G1, c1 = _hrep(P1)
    A2, b2, G2, c2 = _hrep(P2)
    A = np.vstack([A1, A2])
    b = np.concatenate([b1, b2])
    G = np.vstack([G1, G2])
    c = np.concatenate([c1, c2])
    if A.shape[0]:
        y0, *_ = np.linalg.lstsq(A, b, rcond=None)
        resid = float(np.max(np.abs(A @ y0 - b)))
        if resid > tol:
            return np.zeros((0, n)), []
        if resid > tight:
            raise NearDegenerate("affine hulls nearly disjoint")
        u, s, vt = np.linalg.svd(A)
        rank = int(np.sum(s > tol * max(1.0, s[0] if s.size else 1.0)))
        Z = vt[rank:].T
    else:
        y0 = np.zeros(n)
        Z = np.eye(n)
    d = Z.shape[1]
    Gz = G @ Z
    cz = G @ y0 + c
    if d == 0:
        slack = cz[None, :]
        cand = np.zeros((1, 0))
    else:
        combos = np.array(list(itertools.combinations(range(len(cz)), d)), dtype=int)
        if combos.size == 0:
            return np.zeros((0, n)), []
        mats = Gz[combos]
        dets = np.linalg.det(mats)
        ok = np.abs(dets) > 1e-12
        if not np.any(ok):
            return np.zeros((0, n)), []
        cand = np.linalg.solve(mats[ok], -cz[combos[ok]][..., None])[..., 0]
        slack = cand @ Gz.T + cz
    feasible, ambiguous = _classify(slack, tol, tight)
    if np.any(ambiguous):
        raise NearDegenerate("vertex feasibility within tolerance band")
    pts = y0 + cand[feasible] @ Z.T
    slack = slack[feasible]
    if len(pts) == 0:
        return np.zeros((0, n)), []
    keep, tights = [], []
    for p, s in zip(pts, slack):
        if any(np.max(np.abs(p - q)) <= TOL.dedup for q in keep):
            continue
        keep.append(p)
        tights.append(frozenset(np.flatnonzero(np.abs(s) <= tight).tolist()))
    return np.array(keep), tights


def simplex_pair_intersection(S1, S2) -> np.ndarray:
    """Vertices of the convex polytope ``S1 ∩ S2`` (shape (m, n), m may be 0).

    Each simplex is given by the coordinates of its vertices. Candidates are
    solutions of maximal-rank subsystems of the joint H-representation.
    """
    S1 = np.atleast_2d(np.asarray(S1, dtype=float))
    S2 = np.atleast_2d(np.asarray(S2, dtype=float))
    if S1.shape[1] != S2.shape[1]:
        raise ValueError("simplices live in different spaces")
    pts, _ = _pair_polytope(S1, S2)
    return pts


def _face_lattice(pts: np.ndarray, tights: list):
    """Faces of a polytope as frozensets of local vertex ids with their facets."""
    full = frozenset(range(len(pts)))
    faces = {full: _affine_rank(pts)}
    facets: dict = {}
    stack = [full]
    while stack:
        F = stack.pop()
        d = faces[F]
        facets[F] = []
        if d == 0:
            continue
        common = frozenset.intersection(*(tights[v] for v in F))
        subs = set()
        for con in set().union(*(tights[v] for v in F)) - common:
            subs.add(frozenset(v for v in F if con in tights[v]))
        for sub in subs:
            if sub in faces:
                if faces[sub] == d - 1:
                    facets[F].append(sub)
                continue
            r = _affine_rank(pts[sorted(sub)])
            if r == d - 1:
                faces[sub] = r
                facets[F].append(sub)
                stack.append(sub)
    return faces, facets


def _boxes(X: EmbeddedComplex, simplices):
    lo = np.array([X.vertices[list(s)].min(axis=0) for s in simplices])
    hi = np.array([X.vertices[list(s)].max(axis=0) for s in simplices])
    return lo, hi


def intersection_cells(X1: EmbeddedComplex, X2: EmbeddedComplex) -> PolytopalComplex:
    n = X1.ambient_dim
    if X2.ambient_dim != n:
        raise ValueError("ambient dimensions differ")
    M1, M2 = X1.maximal, X2.maximal
    if not M1 or not M2:
        return PolytopalComplex(np.zeros((0, n)))
    lo1, hi1 = _boxes(X1, M1)
    lo2, hi2 = _boxes(X2, M2)
    pad = TOL.geometric
    overlap = np.all((lo1[:, None, :] <= hi2[None, :, :] + pad)
                     & (lo2[None, :, :] <= hi1[:, None, :] + pad), axis=2)
    polys = []
    for i, j in zip(*np.nonzero(overlap)):
        pts, tights = _pair_polytope(X1.coords(M1[i]), X2.coords(M2[j]))
        if len(pts):
            polys.append((pts, tights))
    if not polys:
        return PolytopalComplex(np.zeros((0, n)))
    allpts = np.vstack([p for p, _ in polys])
    parent = list(range(len(allpts)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    if len(allpts) > 1:
        for i, j in cKDTree(allpts).query_pairs(TOL.dedup):
            ri, rj = find(i), find(j)
            if ri != rj:
                parent[max(ri, rj)] = min(ri, rj)
    roots = sorted({find(i) for i in range(len(allpts))})
    gid = {r: k for k, r in enumerate(roots)}
    verts = allpts[roots]
    cells: dict = {}
    facets: dict = {}
    offset = 0
    for pts, tights in polys:
        local = [gid[find(offset + i)] for i in range(len(pts))]
        offset += len(pts)
        faces, fac = _face_lattice(pts, tights)
        for F, d in faces.items():
            g = frozenset(local[i] for i in F)
            if cells.get(g, d) != d:
                raise Degenerate("inconsistent cell dimensions in intersection", tuple(sorted(g)))
            cells[g] = d
            fs = facets.setdefault(g, set())
            fs.update(frozenset(local[i] for i in f) for f in fac[F])
    return PolytopalComplex(verts, cells, {c: sorted(fs, key=sorted) for c, fs in facets.items()})


def complex_intersection(X1: EmbeddedComplex, X2: EmbeddedComplex) -> EmbeddedComplex:
    """Triangulation of the set ``X1 ∩ X2`` (``X2`` already moved).

    Raises
    ------
    NearDegenerate
        when a vertex decision is numerically uncertain; callers resample.
    """
    cells = intersection_cells(X1, X2)
    if not cells.cells:
        return empty_complex(X1.ambient_dim)
    return cells.triangulate()
