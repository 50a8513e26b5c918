"""Directional indices, curvature measures and the invariants W_k."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .complex import EmbeddedComplex, Face, closure, face_volume, subcomplex
from .geom import Flat, RngStream, as_stream, random_directions
from .homology import BettiVector, betti_of_simplices, pair_betti, pair_betti_from_link
from .slicing import Degenerate, directional_link, flat_section
from .stats import Estimate, total
from .tolerances import TOL

MAX_CONSECUTIVE_REJECTIONS = 1000
DIRECTION_BLOCK = 4096
FACE_PERTURBATIONS = 16


class CurvatureMap(enum.Enum):
    """The three index rules: Euler (sigma), absolute (tau), components (b0)."""

    EULER = "sigma"
    ABSOLUTE = "tau"
    COMPONENTS = "b0"

    @classmethod
    def parse(cls, name) -> "CurvatureMap":
        if isinstance(name, cls):
            return name
        aliases = {"sigma": cls.EULER, "euler": cls.EULER,
                   "tau": cls.ABSOLUTE, "absolute": cls.ABSOLUTE,
                   "b0": cls.COMPONENTS, "components": cls.COMPONENTS}
        try:
            return aliases[str(name).lower()]
        except KeyError:
            raise ValueError(f"unknown curvature map {name!r}") from None

    def __call__(self, pair: BettiVector) -> int:
        b = pair.betti
        if self is CurvatureMap.EULER:
            return sum((-1) ** k * x for k, x in enumerate(b))
        if self is CurvatureMap.ABSOLUTE:
            return sum(b)
        return b[0] if b else 0


SIGMA, TAU, B0 = CurvatureMap.EULER, CurvatureMap.ABSOLUTE, CurvatureMap.COMPONENTS


@dataclass(frozen=True)
class IndexSample:
    direction: tuple
    value: int
    rejected: bool = False


class LocalIndexer:
    """Per-vertex index evaluation from the combinatorial lower link.

    The link ``L(X, x, a)`` is homotopy equivalent to the full subcomplex of
    the link of ``x`` spanned by neighbours ``w`` with ``<w - x, a> > 0``, so
    the index depends only on that sign pattern; results are memoised per
    pattern.
    """

    def __init__(self, X: EmbeddedComplex):
        self.X = X
        self._local: dict = {}

    def _prepare(self, v: int):
        got = self._local.get(v)
        if got is None:
            cells = self.X.cofaces[v]
            nbrs = sorted({i for s in cells for i in s} - {v})
            pos = {w: i for i, w in enumerate(nbrs)}
            link = [tuple(pos[i] for i in s if i != v) for s in cells if len(s) > 1]
            offsets = self.X.vertices[nbrs] - self.X.vertices[v]
            got = self._local[v] = (offsets, link, {})
        return got

    def pair(self, v: int, mask) -> BettiVector:
        _, link, memo = self._prepare(v)
        key = bytes(np.asarray(mask, dtype=bool))
        out = memo.get(key)
        if out is None:
            keep = [s for s in link if all(mask[i] for i in s)]
            out = memo[key] = pair_betti(betti_of_simplices(keep))
        return out

    def heights(self, v: int, directions: np.ndarray) -> np.ndarray:
        offsets, _, _ = self._prepare(v)
        return np.atleast_2d(directions) @ offsets.T

    def index(self, v: int, a, cmap: CurvatureMap) -> int:
        h = self.heights(v, np.asarray(a, dtype=float))[0]
        if np.any(np.abs(h) <= TOL.degeneracy):
            raise Degenerate("direction orthogonal to a star edge", v)
        return cmap(self.pair(v, h > 0))

    def indices(self, v: int, directions: np.ndarray, cmap: CurvatureMap):
        """Index for each row of ``directions`` and a mask of degenerate rows."""
        h = self.heights(v, directions)
        bad = np.any(np.abs(h) <= TOL.degeneracy, axis=1)
        if h.shape[1] == 0:
            return np.full(len(directions), cmap(pair_betti(BettiVector((), True)))), bad
        masks = h > 0
        uniq, inv = np.unique(masks, axis=0, return_inverse=True)
        vals = np.array([cmap(self.pair(v, m)) for m in uniq])
        return vals[inv.reshape(-1)], bad


def _check_unit(a) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    if abs(np.linalg.norm(a) - 1.0) > 1e-8:
        raise ValueError("direction must be a unit vector")
    return a


def index(X: EmbeddedComplex, v: int, a, cmap=SIGMA, method: str = "slice") -> int:
    """Index of ``X`` at vertex ``v`` in direction ``a`` under a curvature map.

    ``method="slice"`` builds the link geometrically; ``"lower"`` uses the
    combinatorial lower link. Both raise :class:`Degenerate` for directions
    orthogonal to an edge of the star.
    """
    cmap = CurvatureMap.parse(cmap)
    a = _check_unit(a)
    if method == "slice":
        return cmap(pair_betti_from_link(directional_link(X, v, a)))
    if method == "lower":
        return LocalIndexer(X).index(v, a, cmap)
    raise ValueError(f"unknown method {method!r}")


def _sample_generic(n: int, rng: RngStream, count: int, degenerate) -> tuple:
    """Draw ``count`` directions, replacing those flagged by ``degenerate``."""
    dirs = random_directions(n, rng, count)
    bad = degenerate(dirs)
    rejections = 0
    rounds = 0
    while np.any(bad):
        rounds += 1
        if rounds > MAX_CONSECUTIVE_REJECTIONS:
            raise RuntimeError("too many consecutive degenerate directions")
        idx = np.flatnonzero(bad)
        rejections += idx.size
        dirs[idx] = random_directions(n, rng, idx.size)
        bad = np.zeros(count, dtype=bool)
        bad[idx[degenerate(dirs[idx])]] = True
    return dirs, rejections


def _blocks(total_count: int):
    done, b = 0, 0
    while done < total_count:
        m = min(DIRECTION_BLOCK, total_count - done)
        yield b, m
        done += m
        b += 1


def index_samples(X: EmbeddedComplex, v: int, cmap=SIGMA, directions: int = 100, rng=None) -> list:
    cmap = CurvatureMap.parse(cmap)
    stream = as_stream(rng)
    dirs = random_directions(X.ambient_dim, stream, directions)
    lx = LocalIndexer(X)
    vals, bad = lx.indices(v, dirs, cmap)
    return [IndexSample(tuple(d), int(x), bool(r)) for d, x, r in zip(dirs, vals, bad)]


def vertex_measure(X: EmbeddedComplex, v: int, cmap=SIGMA, directions: int = 10_000,
                   rng=None, indexer: LocalIndexer | None = None) -> Estimate:
    """Monte Carlo curvature measure of vertex ``v``: mean index over directions."""
    cmap = CurvatureMap.parse(cmap)
    if directions < 1:
        raise ValueError("directions must be positive")
    n = X.ambient_dim
    if n == 0:
        return Estimate.exact(1.0)
    stream = as_stream(rng)
    lx = indexer or LocalIndexer(X)
    values, rejections = [], 0
    for b, m in _blocks(directions):
        sub = stream.substream(b)
        dirs, rej = _sample_generic(n, sub, m, lambda d: lx.indices(v, d, cmap)[1])
        rejections += rej
        values.append(lx.indices(v, dirs, cmap)[0])
    est = Estimate.from_values(np.concatenate(values), rejections)
    return est


def _exact_vertex(lx: LocalIndexer, v: int, cmap: CurvatureMap, n: int) -> float:
    if n == 0:
        return 1.0
    offsets, _, _ = lx._prepare(v)
    if n == 1:
        vals, _ = lx.indices(v, np.array([[1.0], [-1.0]]), cmap)
        return float(vals.mean())
    if n != 2:
        raise ValueError("exact evaluation needs ambient dimension <= 2")
    if len(offsets) == 0:
        return float(cmap(pair_betti(BettiVector((), True))))
    phi = np.arctan2(offsets[:, 1], offsets[:, 0])
    br = np.sort(np.mod(np.concatenate([phi + math.pi / 2, phi - math.pi / 2]), 2 * math.pi))
    br = np.unique(br)
    nxt = np.append(br[1:], br[0] + 2 * math.pi)
    lengths = nxt - br
    keep = lengths > 1e-14
    mids = (br + nxt)[keep] / 2
    dirs = np.column_stack([np.cos(mids), np.sin(mids)])
    vals = np.array([cmap(lx.pair(v, (offsets @ d) > 0)) for d in dirs])
    return float(np.sum(vals * lengths[keep]) / (2 * math.pi))


def vertex_measure_exact(X: EmbeddedComplex, v: int, cmap=SIGMA, indexer=None) -> float:
    """Exact curvature measure of a vertex in ambient dimension 0, 1 or 2.

    In the plane the index is constant on the open arcs of directions cut out
    by the normals of the star edges; each arc contributes its length times
    the index at its midpoint.
    """
    cmap = CurvatureMap.parse(cmap)
    return _exact_vertex(indexer or LocalIndexer(X), v, cmap, X.ambient_dim)


def vertex_measure_exact_2d(X: EmbeddedComplex, v: int, cmap=SIGMA) -> float:
    if X.ambient_dim != 2:
        raise ValueError("ambient dimension must be 2")
    return vertex_measure_exact(X, v, cmap)


def direction_census(X: EmbeddedComplex, a, cmap=SIGMA, method: str = "slice") -> int:
    """Sum of indices over all vertices for one generic direction."""
    cmap = CurvatureMap.parse(cmap)
    a = _check_unit(a)
    if method == "lower":
        lx = LocalIndexer(X)
        return int(sum(lx.index(v, a, cmap) for v in X.used_vertices))
    return int(sum(index(X, v, a, cmap, method) for v in X.used_vertices))


def morse_counts(X: EmbeddedComplex, a) -> tuple:
    """Per-degree sums ``sum_v b_k(C_v / L_v)`` for one generic direction.

    These dominate the Betti numbers of ``X`` degree by degree and their
    alternating sum is ``chi(X)``.
    """
    a = _check_unit(a)
    lx = LocalIndexer(X)
    counts = np.zeros(X.dim + 2, dtype=np.int64)
    for v in X.used_vertices:
        h = lx.heights(v, a)[0]
        if np.any(np.abs(h) <= TOL.degeneracy):
            raise Degenerate("direction orthogonal to a star edge", v)
        b = lx.pair(v, h > 0).betti
        counts[:len(b)] += b
    return tuple(int(c) for c in counts[:X.dim + 1])


def _census_many(X: EmbeddedComplex, lx: LocalIndexer, dirs: np.ndarray, cmap):
    total_vals = np.zeros(len(dirs), dtype=np.int64)
    bad = np.zeros(len(dirs), dtype=bool)
    for v in X.used_vertices:
        vals, b = lx.indices(v, dirs, cmap)
        total_vals += vals
        bad |= b
    return total_vals, bad


def census_sweep(X: EmbeddedComplex, cmap=SIGMA, directions: int = 200, rng=None):
    """Census for random generic directions.

    Returns ``(directions, census values, rejections)``; degenerate draws
    are replaced and counted.
    """
    cmap = CurvatureMap.parse(cmap)
    lx = LocalIndexer(X)
    stream = as_stream(rng)
    dirs, vals, rejections = [], [], 0
    for b, m in _blocks(directions):
        d, rej = _sample_generic(X.ambient_dim, stream.substream(b),
                                 m, lambda d: _census_many(X, lx, d, cmap)[1])
        rejections += rej
        dirs.append(d)
        vals.append(_census_many(X, lx, d, cmap)[0])
    return np.concatenate(dirs), np.concatenate(vals), rejections


def total_curvature(X: EmbeddedComplex, cmap=SIGMA, directions: int = 10_000, rng=None,
                    exact: bool | None = False) -> Estimate:
    """Total curvature ``sum_v rho(v)``.

    The Monte Carlo path evaluates the full census for every sampled
    direction. ``exact=True`` sums exact vertex measures (ambient dim <= 2);
    ``exact=None`` chooses exact evaluation when available.
    """
    cmap = CurvatureMap.parse(cmap)
    n = X.ambient_dim
    lx = LocalIndexer(X)
    if exact is None:
        exact = n <= 2
    if X.is_empty():
        return Estimate.exact(0.0)
    if exact or n == 0:
        return Estimate.exact(sum(_exact_vertex(lx, v, cmap, n) for v in X.used_vertices))
    stream = as_stream(rng)
    values, rejections = [], 0
    for b, m in _blocks(directions):
        sub = stream.substream(b)
        dirs, rej = _sample_generic(n, sub, m, lambda d: _census_many(X, lx, d, cmap)[1])
        rejections += rej
        values.append(_census_many(X, lx, dirs, cmap)[0])
    return Estimate.from_values(np.concatenate(values), rejections)


# ----------------------------------------------------------------------------
# face measures and W_k

def face_star(X: EmbeddedComplex, F: tuple) -> list:
    F = tuple(F)
    fs = set(F)
    return sorted(closure(s for s in X.cofaces[F[0]] if fs.issubset(s)))


def _normal_slice(X: EmbeddedComplex, F: tuple):
    """Section of the star of ``F`` by ``Aff(F)^perp`` through an interior point.

    Returns the intrinsic section and the index of the vertex at the cut
    point. The barycentre is tried first, then deterministic interior
    perturbations.
    """
    S = subcomplex(X, face_star(X, F))
    pts = X.vertices[list(F)]
    k = len(F) - 1
    n = X.ambient_dim
    direction = Flat.spanned(pts[0], pts[1:] - pts[0])
    jitter = np.random.default_rng(0x5EED)
    last = None
    for attempt in range(FACE_PERTURBATIONS + 1):
        w = np.full(k + 1, 1.0 / (k + 1))
        if attempt:
            u = jitter.random(k + 1) - 0.5
            w = w + 0.5 / (k + 1) * (u - u.mean())
        x = w @ pts
        flat = Flat(x, direction.complement_frame())
        try:
            Y = flat_section(S, flat)
        except Degenerate as exc:
            last = exc
            continue
        d = np.linalg.norm(Y.vertices, axis=1) if len(Y.vertices) else np.array([])
        hit = np.flatnonzero(d <= 1e-7)
        if hit.size:
            return Y, int(hit[0])
        last = Degenerate("cut point missing from section", F)
    raise Degenerate(f"normal slice of face {F} stays degenerate after "
                     f"{FACE_PERTURBATIONS} perturbations", F) from last


def face_measure(X: EmbeddedComplex, F, cmap=SIGMA, directions: int = 10_000, rng=None,
                 exact: bool | None = False) -> Estimate:
    """Curvature measure ``rho(X, F)`` of a k-face, normalised over S^(n-k-1).

    For ``k == n`` the value is 1 (empty sphere convention).
    """
    cmap = CurvatureMap.parse(cmap)
    idx = F.indices if isinstance(F, Face) else tuple(sorted(F))
    k, n = len(idx) - 1, X.ambient_dim
    if k == n:
        return Estimate.exact(1.0)
    if k == 0:
        Y, v = X, idx[0]
    else:
        Y, v = _normal_slice(X, idx)
    m = Y.ambient_dim
    if exact is None:
        exact = m <= 2
    if exact:
        return Estimate.exact(vertex_measure_exact(Y, v, cmap))
    return vertex_measure(Y, v, cmap, directions, rng)


def wk(X: EmbeddedComplex, k: int, cmap=SIGMA, directions: int = 10_000, rng=None,
       exact: bool | None = False) -> Estimate:
    """Intrinsic invariant ``W_k = sum_F |F| rho(X, F)`` over k-faces."""
    cmap = CurvatureMap.parse(cmap)
    n = X.ambient_dim
    if not 0 <= k <= n:
        raise ValueError("need 0 <= k <= n")
    if k > X.dim:
        return Estimate.exact(0.0)
    stream = as_stream(rng)
    if k == 0:
        return total_curvature(X, cmap, directions, stream, exact)
    parts = []
    for i, F in enumerate(X.by_dim[k]):
        est = face_measure(X, F, cmap, directions, stream.substream(i), exact)
        parts.append(est.scaled(face_volume(X, F)))
    return total(parts)


def wk_all(X: EmbeddedComplex, cmap=SIGMA, directions: int = 10_000, rng=None,
           exact: bool | None = False) -> list:
    stream = as_stream(rng)
    return [wk(X, k, cmap, directions, stream.substream(k), exact)
            for k in range(X.ambient_dim + 1)]
