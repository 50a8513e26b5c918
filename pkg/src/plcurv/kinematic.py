"""Integral-geometric estimators: both sides of the kinematic formula, the
linear kinematic formula, local product laws and the translation measure."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .complex import EmbeddedComplex, euler_characteristic, simplex_volume, transformed
from .curvature import (SIGMA, CurvatureMap, face_measure, total_curvature,
                        vertex_measure, vertex_measure_exact, wk)
from .geom import (Box, Flat, Motion, RngStream, as_stream, flat_pairing,
                   kinematic_constant, random_rotations)
from .slicing import (GeometryDegeneracy, complex_intersection, flat_section,
                      section_euler, simplex_pair_intersection)
from .stats import Estimate, VerificationReport

MAX_RESAMPLES = 1000
REJECTION_FLAG_RATE = 0.01


@dataclass
class KinematicConfig:
    motions: int = 20_000
    directions: int = 256
    seed: int = 0
    map: CurvatureMap = SIGMA
    window: Box | None = None
    window_scale: float = 1.0
    threads: int = 1
    exact_inner: bool = False
    rel_tol: float = 0.05
    sigmas: float = 4.0

    def __post_init__(self):
        self.map = CurvatureMap.parse(self.map)
        if self.motions < 1:
            raise ValueError("motions must be positive")


def _bbox(points: np.ndarray):
    return points.min(axis=0), points.max(axis=0)


def _ordered_map(func, items, threads: int):
    items = list(items)
    if threads <= 1 or len(items) < 2:
        return [func(i) for i in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(func, items))


def _chunks(count: int, threads: int):
    size = max(1, math.ceil(count / max(1, threads * 4)))
    return [range(s, min(count, s + size)) for s in range(0, count, size)]


def rho(Y: EmbeddedComplex, cmap: CurvatureMap, directions: int, rng, exact=False) -> float:
    """Curvature-map value of a whole complex (its total curvature)."""
    if Y.is_empty():
        return 0.0
    if cmap is CurvatureMap.EULER:
        return float(euler_characteristic(Y))
    return total_curvature(Y, cmap, directions, rng, exact=exact).value


# ----------------------------------------------------------------------------
# kinematic formula

def _motion_value(X1: EmbeddedComplex, X2: EmbeddedComplex, cfg: KinematicConfig, i: int):
    stream = RngStream(cfg.seed).substream(i)
    n = X1.ambient_dim
    lo1, hi1 = _bbox(X1.vertices[X1.used_vertices])
    V2 = X2.vertices
    rejections = 0
    while True:
        R = random_rotations(n, stream, 1)[0]
        if cfg.window is None:
            lo2, hi2 = _bbox(V2[X2.used_vertices] @ R.T)
            window = Box(lo1 - hi2, hi1 - lo2).enlarged(cfg.window_scale)
        else:
            window = cfg.window
        t = window.sample(stream, 1)[0]
        moved = EmbeddedComplex(V2 @ R.T + t, X2.simplices, ambient_dim=n)
        try:
            Y = complex_intersection(X1, moved)
            value = rho(Y, cfg.map, cfg.directions, stream.substream(0), cfg.exact_inner)
        except GeometryDegeneracy:
            rejections += 1
            if rejections > MAX_RESAMPLES:
                raise RuntimeError("motion resampling bound exceeded")
            continue
        return window.volume * value, rejections


def kinematic_lhs(X1: EmbeddedComplex, X2: EmbeddedComplex, cfg: KinematicConfig) -> Estimate:
    """Monte Carlo estimate of ``∫_G rho(X1 ∩ g X2) dg``.

    Each motion draws a Haar rotation ``R`` and a translation uniform in the
    box of translations that can make ``X1`` and ``R X2 + t`` meet; the
    sample value is that box's volume times ``rho`` of the intersection.
    A fixed ``cfg.window`` replaces the per-rotation box; it must then
    contain every such translation for the estimate to be unbiased.
    Motion ``i`` always uses substream ``i`` of the seed, so the thread
    count does not affect the result.
    """
    if X1.ambient_dim != X2.ambient_dim:
        raise ValueError("ambient dimensions differ")
    if X1.is_empty() or X2.is_empty():
        return Estimate(0.0, 0.0, cfg.motions, 0)

    def run(chunk):
        return [_motion_value(X1, X2, cfg, i) for i in chunk]

    out = [r for chunk in _ordered_map(run, _chunks(cfg.motions, cfg.threads), cfg.threads)
           for r in chunk]
    values = np.array([v for v, _ in out])
    rejections = sum(r for _, r in out)
    return Estimate.from_values(values, rejections)


def kinematic_rhs(X1: EmbeddedComplex, X2: EmbeddedComplex, cmap=SIGMA, directions: int = 10_000,
                  rng=None, exact: bool | None = None) -> Estimate:
    """``sum_k c(n,k) W_k(X1) W_(n-k)(X2)`` with propagated errors."""
    cmap = CurvatureMap.parse(cmap)
    n = X1.ambient_dim
    stream = as_stream(rng)
    out = Estimate.exact(0.0)
    for k in range(n + 1):
        a = wk(X1, k, cmap, directions, stream.substream(2 * k), exact)
        b = wk(X2, n - k, cmap, directions, stream.substream(2 * k + 1), exact)
        out = out + (a * b).scaled(kinematic_constant(n, k))
    return out


def verify_kinematic(X1: EmbeddedComplex, X2: EmbeddedComplex, cfg: KinematicConfig,
                     rhs_directions: int = 10_000, exact_rhs: bool | None = None) -> VerificationReport:
    lhs = kinematic_lhs(X1, X2, cfg)
    rhs = kinematic_rhs(X1, X2, cfg.map, rhs_directions, RngStream(cfg.seed, 1), exact_rhs)
    rate = lhs.rejections / cfg.motions
    return VerificationReport("kinematic", lhs, rhs, rel_tol=cfg.rel_tol, sigmas=cfg.sigmas,
                              details={"rejection_rate": rate,
                                       "flagged": rate > REJECTION_FLAG_RATE})


# ----------------------------------------------------------------------------
# linear kinematic formula

def _points_inside(X: EmbeddedComplex, pts: np.ndarray) -> np.ndarray:
    n = X.ambient_dim
    inside = np.zeros(len(pts), dtype=bool)
    for s in X.by_dim.get(n, []):
        P = X.vertices[list(s)]
        T = (P[1:] - P[0]).T
        lam = np.linalg.solve(T, (pts - P[0]).T).T
        inside |= np.all(lam >= 0, axis=1) & (lam.sum(axis=1) <= 1)
    return inside


def graff_integral(X: EmbeddedComplex, k: int, samples: int = 10_000, rng=None, cmap=SIGMA,
                   directions: int = 256, exact_inner: bool | None = None) -> Estimate:
    """``∫ rho(X ∩ E) dE`` over affine (n-k)-flats.

    Flats are a Haar-rotated coordinate flat shifted by an offset uniform in
    the box spanned by the projection of ``X`` onto its orthogonal
    complement; each sample is weighted by that box's k-volume.
    """
    cmap = CurvatureMap.parse(cmap)
    n = X.ambient_dim
    if not 0 <= k <= n:
        raise ValueError("need 0 <= k <= n")
    stream = as_stream(rng)
    if X.is_empty():
        return Estimate.exact(0.0)
    if k == 0:
        if cmap is CurvatureMap.EULER:
            return Estimate.exact(euler_characteristic(X))
        return total_curvature(X, cmap, directions, stream, exact_inner)
    V = X.vertices[X.used_vertices]
    j = n - k
    values = np.empty(samples)
    rejections = 0
    if k == n:
        # point flats: rho of a point or of nothing
        for b in range(0, samples, 4096):
            sub = stream.substream(b // 4096)
            m = min(4096, samples - b)
            R = random_rotations(n, sub, m)
            coords = np.einsum("ij,mjk->mik", V, R)
            lo, hi = coords.min(axis=1), coords.max(axis=1)
            u = lo + sub.generator.random((m, n)) * (hi - lo)
            pts = np.einsum("mij,mj->mi", R, u)
            values[b:b + m] = np.prod(hi - lo, axis=1) * _points_inside(X, pts)
        return Estimate.from_values(values, 0)
    for i in range(samples):
        sub = stream.substream(i)
        for attempt in range(MAX_RESAMPLES + 1):
            R = random_rotations(n, sub, 1)[0]
            comp = R[:, j:].T
            c = V @ comp.T
            lo, hi = c.min(axis=0), c.max(axis=0)
            o = lo + sub.generator.random(k) * (hi - lo)
            flat = Flat(o @ comp, R[:, :j].T)
            try:
                if cmap is CurvatureMap.EULER:
                    val = float(section_euler(X, flat))
                else:
                    S = flat_section(X, flat)
                    val = rho(S, cmap, directions, sub.substream(0),
                              exact_inner if exact_inner is not None else S.ambient_dim <= 2)
            except GeometryDegeneracy:
                rejections += 1
                continue
            values[i] = float(np.prod(hi - lo)) * val
            break
        else:
            raise RuntimeError("flat resampling bound exceeded")
    return Estimate.from_values(values, rejections)


def linear_kinematic(X: EmbeddedComplex, k: int, samples: int = 10_000, rng=None, cmap=SIGMA,
                     directions: int = 256, exact_inner: bool | None = None) -> Estimate:
    """``W_k`` recovered from sections by random affine (n-k)-flats."""
    raw = graff_integral(X, k, samples, rng, cmap, directions, exact_inner)
    return raw.scaled(1.0 / kinematic_constant(X.ambient_dim, k))


# ----------------------------------------------------------------------------
# local product laws

def _direction_basis(X: EmbeddedComplex, F) -> np.ndarray:
    P = X.vertices[list(F)]
    if len(P) == 1:
        return np.zeros((0, X.ambient_dim))
    return Flat.spanned(P[0], P[1:] - P[0]).frame


def _normal_basis(X: EmbeddedComplex, F) -> np.ndarray:
    P = X.vertices[list(F)]
    return Flat(P[0], _direction_basis(X, F)).complement_frame()


def barycenter(X: EmbeddedComplex, F) -> np.ndarray:
    return X.vertices[list(F)].mean(axis=0)


def transverse_placement(X1: EmbeddedComplex, F1, X2: EmbeddedComplex, F2,
                         angle: float | None = None) -> Motion:
    """Motion putting ``F2``'s barycentre on ``F1``'s with orthogonal hulls.

    In the plane with two edges, ``angle`` sets the angle between the edge
    directions instead.
    """
    n = X1.ambient_dim
    k1, k2 = len(F1) - 1, len(F2) - 1
    if k1 + k2 != n:
        raise ValueError("faces are not of complementary dimension")
    B1, C1 = _direction_basis(X1, F1), _normal_basis(X1, F1)
    B2, C2 = _direction_basis(X2, F2), _normal_basis(X2, F2)
    if angle is None:
        R = C1.T @ B2 + B1.T @ C2
    else:
        if n != 2 or k1 != 1:
            raise ValueError("oblique placement supports two edges in the plane")
        a1 = math.atan2(B1[0, 1], B1[0, 0]) + angle
        a2 = math.atan2(B2[0, 1], B2[0, 0])
        t = a1 - a2
        R = np.array([[math.cos(t), -math.sin(t)], [math.sin(t), math.cos(t)]])
    t = barycenter(X1, F1) - R @ barycenter(X2, F2)
    return Motion(R, t)


def _meeting_vertex(Y: EmbeddedComplex, p: np.ndarray) -> int:
    if not len(Y.vertices):
        raise ValueError("intersection is empty")
    d = np.linalg.norm(Y.vertices - p, axis=1)
    i = int(np.argmin(d))
    if d[i] > 1e-7:
        raise ValueError("faces do not meet at a vertex of the intersection")
    return i


def _check_transverse(X1, F1, X2, F2, orthogonal: bool) -> float:
    B1, B2 = _direction_basis(X1, F1), _direction_basis(X2, F2)
    n = X1.ambient_dim
    if B1.shape[0] + B2.shape[0] != n:
        raise ValueError("faces are not of complementary dimension")
    pairing = flat_pairing(Flat(np.zeros(n), B1), Flat(np.zeros(n), B2))
    if pairing == 0.0:
        raise ValueError("affine hulls are not complementary")
    if orthogonal and abs(pairing - 1.0) > 1e-9:
        raise ValueError("affine hulls are not orthogonal")
    p1, p2 = barycenter(X1, F1), barycenter(X2, F2)
    if np.linalg.norm(p1 - p2) > 1e-9:
        raise ValueError("faces do not meet at their barycentres")
    return pairing


def _point_measure(Y: EmbeddedComplex, v: int, cmap, directions, rng, exact) -> Estimate:
    if exact is None:
        exact = Y.ambient_dim <= 2
    if exact:
        return Estimate.exact(vertex_measure_exact(Y, v, cmap))
    return vertex_measure(Y, v, cmap, directions, rng)


def check_factorization_orthogonal(X1: EmbeddedComplex, F1, X2: EmbeddedComplex, F2,
                                   directions: int = 10_000, rng=None, cmap=SIGMA,
                                   exact: bool | None = None, sigmas: float = 3.0) -> VerificationReport:
    """Measure of ``X1 ∩ X2`` at the meeting point of ``F1`` and ``F2``
    against the product of the two face measures (orthogonal hulls)."""
    cmap = CurvatureMap.parse(cmap)
    F1, F2 = tuple(sorted(F1)), tuple(sorted(F2))
    _check_transverse(X1, F1, X2, F2, orthogonal=True)
    stream = as_stream(rng)
    p = barycenter(X1, F1)
    Y = complex_intersection(X1, X2)
    lhs = _point_measure(Y, _meeting_vertex(Y, p), cmap, directions, stream.substream(0), exact)
    rhs = (face_measure(X1, F1, cmap, directions, stream.substream(1), exact)
           * face_measure(X2, F2, cmap, directions, stream.substream(2), exact))
    return VerificationReport("factorization.orthogonal", lhs, rhs, sigmas=sigmas)


def _subspace_rotation(basis: np.ndarray, rng: RngStream) -> np.ndarray:
    n = basis.shape[1]
    m = basis.shape[0]
    if m == 0:
        return np.eye(n)
    Q = random_rotations(m, rng, 1)[0]
    return np.eye(n) + basis.T @ (Q - np.eye(m)) @ basis


def check_factorization_averaged(X1: EmbeddedComplex, F1, X2: EmbeddedComplex, F2,
                                 rotations: int = 400, directions: int = 10_000, rng=None,
                                 cmap=SIGMA, exact: bool | None = None, mode: str = "normal",
                                 sigmas: float = 3.0) -> VerificationReport:
    """Rotation average of the meeting-point measure against the product of
    face measures, for complementary but possibly oblique hulls.

    ``mode="normal"`` turns each complex about its face's affine hull (a
    Haar element of the orthogonal group of the face's normal space, fixing
    the hull pointwise). ``mode="literal"`` instead acts by the orthogonal
    group of the face's own direction space, which leaves the local
    structure unchanged; it is kept to expose the difference.
    """
    cmap = CurvatureMap.parse(cmap)
    F1, F2 = tuple(sorted(F1)), tuple(sorted(F2))
    pairing = _check_transverse(X1, F1, X2, F2, orthogonal=False)
    if mode == "normal":
        act1, act2 = _normal_basis(X1, F1), _normal_basis(X2, F2)
    elif mode == "literal":
        act1, act2 = _direction_basis(X1, F1), _direction_basis(X2, F2)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    stream = as_stream(rng)
    p = barycenter(X1, F1)
    values, rejections = [], 0
    for i in range(rotations):
        sub = stream.substream(i)
        for _ in range(MAX_RESAMPLES):
            g2 = _subspace_rotation(act1, sub)
            g1 = _subspace_rotation(act2, sub)
            Y1 = transformed(X1, Motion(g2, p - g2 @ p))
            Y2 = transformed(X2, Motion(g1, p - g1 @ p))
            try:
                Y = complex_intersection(Y1, Y2)
                est = _point_measure(Y, _meeting_vertex(Y, p), cmap, directions,
                                     sub.substream(0), exact)
            except GeometryDegeneracy:
                rejections += 1
                continue
            values.append(est.value)
            break
        else:
            raise RuntimeError("rotation resampling bound exceeded")
    lhs = Estimate.from_values(values, rejections)
    rhs = (face_measure(X1, F1, cmap, directions, stream.substream(rotations + 1), exact)
           * face_measure(X2, F2, cmap, directions, stream.substream(rotations + 2), exact))
    return VerificationReport("factorization.averaged", lhs, rhs, sigmas=sigmas,
                              details={"pairing": pairing, "mode": mode})


# ----------------------------------------------------------------------------
# translation measure

def translation_coincidence_measure(F1, F2, samples: int = 50_000, rng=None,
                                    rel_tol: float = 0.02) -> VerificationReport:
    """Lebesgue measure of ``{x : F1 ∩ (F2 + x) != ∅}`` against
    ``|F1| |F2| |E1 : E2|`` for simplices of complementary dimension."""
    P1 = np.atleast_2d(np.asarray(F1, dtype=float))
    P2 = np.atleast_2d(np.asarray(F2, dtype=float))
    n = P1.shape[1]
    if (len(P1) - 1) + (len(P2) - 1) != n:
        raise ValueError("faces are not of complementary dimension")
    E1 = Flat.spanned(P1[0], P1[1:] - P1[0]) if len(P1) > 1 else Flat(P1[0], np.zeros((0, n)))
    E2 = Flat.spanned(P2[0], P2[1:] - P2[0]) if len(P2) > 1 else Flat(P2[0], np.zeros((0, n)))
    expected = simplex_volume(P1) * simplex_volume(P2) * flat_pairing(E1, E2)
    lo1, hi1 = _bbox(P1)
    lo2, hi2 = _bbox(P2)
    window = Box(lo1 - hi2, hi1 - lo2)
    stream = as_stream(rng)
    hits = np.empty(samples)
    rejections = 0
    for b in range(0, samples, 4096):
        sub = stream.substream(b // 4096)
        m = min(4096, samples - b)
        xs = window.sample(sub, m)
        for i, x in enumerate(xs):
            while True:
                try:
                    hits[b + i] = len(simplex_pair_intersection(P1, P2 + x)) > 0
                    break
                except GeometryDegeneracy:
                    rejections += 1
                    x = window.sample(sub, 1)[0]
    lhs = Estimate.from_values(hits * window.volume, rejections)
    return VerificationReport("translation_measure", lhs, Estimate.exact(expected),
                              rel_tol=rel_tol, sigmas=0.0)


# ----------------------------------------------------------------------------
# named configurations

def segment_pair(angle: float) -> tuple:
    """Unit segment on the x-axis and a unit segment at ``angle``."""
    return (np.array([[0.0, 0.0], [1.0, 0.0]]),
            np.array([[0.0, 0.0], [math.cos(angle), math.sin(angle)]]))


def factorization_configs() -> dict:
    """Named transverse configurations.

    Each entry maps to ``(X1, F1, X2, F2, angle, exact)`` with ``X2`` already
    placed; ``angle`` is None for orthogonal hulls. ``exact=False`` marks
    configurations checked by Monte Carlo on both sides.
    """
    from .shapes import generate

    out = {}
    square, seg = generate("square"), generate("segment")
    cross, tri = generate("cross"), generate("simplex", dim=2)
    for name, X1, F1, X2, F2, angle, exact in (
            ("edge-segment", square, (0, 1), seg, (0, 1), None, None),
            ("segments", seg, (0, 1), seg, (0, 1), None, None),
            ("cross-segment", cross, (0, 2), seg, (0, 1), None, False),
            ("cross-square", cross, (0, 2), square, (0, 3), None, False),
            ("segments60", seg, (0, 1), seg, (0, 1), math.pi / 3, None),
            ("oblique60", tri, (0, 1), tri, (0, 1), math.pi / 3, None)):
        g = transverse_placement(X1, F1, X2, F2, angle)
        out[name] = (X1, F1, transformed(X2, g), F2, angle, exact)
    return out


def run_factorization(name: str, rotations: int = 400, directions: int = 10_000, rng=None,
                      mode: str = "normal") -> VerificationReport:
    """Run one named configuration with the matching check."""
    configs = factorization_configs()
    if name not in configs:
        raise ValueError(f"unknown configuration {name!r}; choose from {', '.join(configs)}")
    X1, F1, X2, F2, angle, exact = configs[name]
    if angle is None and mode == "normal":
        rep = check_factorization_orthogonal(X1, F1, X2, F2, directions, rng, exact=exact)
    else:
        rep = check_factorization_averaged(X1, F1, X2, F2, rotations, directions, rng,
                                           exact=exact, mode=mode)
    rep.name = f"factorization.{name}"
    return rep
