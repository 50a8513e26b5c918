"""Canonical test shapes with documented coordinates."""

from __future__ import annotations

import math

import numpy as np

from .complex import ComplexError, EmbeddedComplex, close_under_faces

SHAPES = ("point", "segment", "square", "lshape", "annulus", "cross", "disk",
          "circle", "cube_boundary", "cube_solid", "simplex", "bouquet")


def _point(n=2):
    return close_under_faces(np.zeros((1, n)), [(0,)])


def _segment(n=2, length=1.0):
    v = np.zeros((2, n))
    v[1, 0] = length
    return close_under_faces(v, [(0, 1)])


def _square():
    # unit square split along the diagonal (0,0)-(1,1)
    v = [(0, 0), (1, 0), (1, 1), (0, 1)]
    return close_under_faces(v, [(0, 1, 2), (0, 2, 3)])


def _lshape():
    # [0,2]^2 minus (1,2]^2: three unit squares, reflex corner at (1,1)
    v = [(0, 0), (1, 0), (2, 0), (0, 1), (1, 1), (2, 1), (0, 2), (1, 2)]
    tris = [(0, 1, 4), (0, 4, 3), (1, 2, 5), (1, 5, 4), (3, 4, 7), (3, 7, 6)]
    return close_under_faces(v, tris)


def _annulus(hole=0.5):
    # unit square with a centred square hole of side ``hole``
    a, b = (1 - hole) / 2, (1 + hole) / 2
    v = [(0, 0), (1, 0), (1, 1), (0, 1), (a, a), (b, a), (b, b), (a, b)]
    tris = []
    for i in range(4):
        j = (i + 1) % 4
        tris += [(i, j, 4 + j), (i, 4 + j, 4 + i)]
    return close_under_faces(v, tris)


def _cross():
    # segments (0,.5)-(1,.5) and (.5,0)-(.5,1) sharing the vertex (.5,.5)
    v = [(0.5, 0.5), (0, 0.5), (1, 0.5), (0.5, 0), (0.5, 1)]
    return close_under_faces(v, [(0, 1), (0, 2), (0, 3), (0, 4)])


def _polygon(m):
    t = 2 * math.pi * np.arange(m) / m
    return np.column_stack([np.cos(t), np.sin(t)])


def _disk(m=8, radius=1.0):
    v = np.vstack([[0.0, 0.0], radius * _polygon(m)])
    return close_under_faces(v, [(0, 1 + i, 1 + (i + 1) % m) for i in range(m)])


def _circle(m=8, radius=1.0):
    return close_under_faces(radius * _polygon(m), [(i, (i + 1) % m) for i in range(m)])


_CUBE = np.array([[(i >> 0) & 1, (i >> 1) & 1, (i >> 2) & 1] for i in range(8)], dtype=float)


def _cube_solid():
    # Kuhn triangulation: six tetrahedra around the diagonal 0-7
    tets = []
    for perm in ((0, 1, 2), (0, 2, 1), (1, 0, 2), (1, 2, 0), (2, 0, 1), (2, 1, 0)):
        path, cur = [0], 0
        for axis in perm:
            cur |= 1 << axis
            path.append(cur)
        tets.append(tuple(path))
    return close_under_faces(_CUBE, tets)


def _cube_boundary():
    solid = _cube_solid()
    count: dict = {}
    for tet in solid.by_dim[3]:
        for i in range(4):
            tri = tet[:i] + tet[i + 1:]
            count[tri] = count.get(tri, 0) + 1
    return close_under_faces(_CUBE, [t for t, c in count.items() if c == 1])


def _simplex(dim=2, n=None, scale=1.0):
    n = dim if n is None else n
    if n < dim:
        raise ComplexError("simplex dimension exceeds ambient dimension")
    v = np.zeros((dim + 1, n))
    for i in range(dim):
        v[i + 1, i] = scale
    return close_under_faces(v, [tuple(range(dim + 1))])


def _bouquet(loops=2):
    # triangular loops sharing the origin, placed around it
    verts = [(0.0, 0.0)]
    edges = []
    for i in range(loops):
        t = 2 * math.pi * i / loops
        for s in (-0.3, 0.3):
            verts.append((math.cos(t + s), math.sin(t + s)))
        a, b = len(verts) - 2, len(verts) - 1
        edges += [(0, a), (a, b), (0, b)]
    return close_under_faces(verts, edges)


_BUILDERS = {
    "point": _point, "segment": _segment, "square": _square, "lshape": _lshape,
    "annulus": _annulus, "cross": _cross, "disk": _disk, "circle": _circle,
    "cube_boundary": _cube_boundary, "cube_solid": _cube_solid,
    "simplex": _simplex, "bouquet": _bouquet,
}


def generate(shape: str, **params) -> EmbeddedComplex:
    """Build a named test shape.

    ``point(n)``, ``segment(n, length)``, ``square``, ``lshape``,
    ``annulus(hole)``, ``cross``, ``disk(m, radius)``, ``circle(m, radius)``,
    ``cube_boundary``, ``cube_solid``, ``simplex(dim, n, scale)``,
    ``bouquet(loops)``. Every shape also accepts ``scale`` and ``offset``.
    """
    try:
        build = _BUILDERS[shape]
    except KeyError:
        raise ComplexError(f"unknown shape {shape!r}; choose from {', '.join(SHAPES)}") from None
    scale = params.pop("scale", None) if shape != "simplex" else None
    offset = params.pop("offset", None)
    try:
        X = build(**params)
    except TypeError as exc:
        raise ComplexError(f"bad parameters for {shape}: {exc}") from None
    verts = X.vertices
    if scale is not None:
        verts = verts * float(scale)
    if offset is not None:
        verts = verts + np.asarray(offset, dtype=float)
    if verts is not X.vertices:
        X = EmbeddedComplex(verts, X.simplices, ambient_dim=X.ambient_dim)
    return X
