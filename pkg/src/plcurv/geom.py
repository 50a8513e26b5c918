"""Euclidean primitives: constants, flats, motions and seeded randomness."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .stats import Estimate, Report
from .tolerances import TOL

_MASK64 = (1 << 64) - 1
CNK_BLOCK = 4096


def unit_ball_volume(k: int) -> float:
    """Volume of the unit ball in E^k, ``pi^(k/2) / Gamma(k/2 + 1)``."""
    if k < 0:
        raise ValueError("dimension must be non-negative")
    return math.pi ** (k / 2) / math.gamma(k / 2 + 1)


def sphere_measure(k: int) -> float:
    """Total measure of the unit sphere S^(k-1) in E^k; 0 for k = 0."""
    if k < 0:
        raise ValueError("dimension must be non-negative")
    if k == 0:
        return 0.0
    return k * unit_ball_volume(k)


def kinematic_constant(n: int, k: int) -> float:
    """Closed-form kinematic constant ``binom(n,k)^-1 w_k w_(n-k) / w_n``."""
    if not 0 <= k <= n:
        raise ValueError(f"k={k} out of range for n={n}")
    return (unit_ball_volume(k) * unit_ball_volume(n - k)
            / (math.comb(n, k) * unit_ball_volume(n)))


# ----------------------------------------------------------------------------
# randomness

def _splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


def mix64(a: int, b: int) -> int:
    return _splitmix64((a & _MASK64) ^ _splitmix64(b & _MASK64))


class RngStream:
    """A reproducible random stream identified by ``(master_seed, stream_index)``.

    The underlying generator is PCG64 seeded through ``SeedSequence``, so the
    sample sequence is identical across platforms. ``substream(i)`` derives an
    independent child stream; estimators hand one child to each block of work
    so the result never depends on how blocks are scheduled.
    """

    def __init__(self, master_seed: int = 0, stream_index: int = 0):
        self.master_seed = int(master_seed) & _MASK64
        self.stream_index = int(stream_index) & _MASK64
        seq = np.random.SeedSequence([self.master_seed, self.stream_index])
        self.generator = np.random.Generator(np.random.PCG64(seq))

    def substream(self, i: int) -> "RngStream":
        return RngStream(self.master_seed, mix64(self.stream_index, i))

    def __repr__(self) -> str:
        return f"RngStream({self.master_seed}, {self.stream_index})"


def as_stream(rng) -> RngStream:
    if isinstance(rng, RngStream):
        return rng
    if rng is None:
        return RngStream(0)
    return RngStream(int(rng))


def random_directions(n: int, rng: RngStream, size: int) -> np.ndarray:
    """``size`` independent uniform unit vectors in E^n, shape (size, n)."""
    if n < 1:
        raise ValueError("n must be positive")
    g = rng.generator.standard_normal((size, n))
    norms = np.linalg.norm(g, axis=1)
    while np.any(norms == 0.0):  # pragma: no cover - probability zero
        bad = norms == 0.0
        g[bad] = rng.generator.standard_normal((int(bad.sum()), n))
        norms = np.linalg.norm(g, axis=1)
    return g / norms[:, None]


def random_direction(n: int, rng: RngStream) -> np.ndarray:
    return random_directions(n, rng, 1)[0]


def random_rotations(n: int, rng: RngStream, size: int) -> np.ndarray:
    """Haar-distributed elements of O(n), shape (size, n, n)."""
    if n < 1:
        raise ValueError("n must be positive")
    z = rng.generator.standard_normal((size, n, n))
    q, r = np.linalg.qr(z)
    d = np.sign(np.diagonal(r, axis1=1, axis2=2))
    d[d == 0] = 1.0
    q = q * d[:, None, :]
    flip = rng.generator.random(size) < 0.5
    q[flip, :, -1] *= -1.0
    return q


# ----------------------------------------------------------------------------
# flats and motions

@dataclass(frozen=True)
class Flat:
    """Affine flat ``base + span(frame)``; ``frame`` has shape (k, n)."""

    base: np.ndarray
    frame: np.ndarray

    def __post_init__(self):
        base = np.asarray(self.base, dtype=float).reshape(-1)
        frame = np.asarray(self.frame, dtype=float).reshape(-1, base.size)
        object.__setattr__(self, "base", base)
        object.__setattr__(self, "frame", frame)
        if frame.shape[0] > base.size:
            raise ValueError("flat dimension exceeds ambient dimension")
        gram = frame @ frame.T
        if not np.allclose(gram, np.eye(frame.shape[0]), atol=TOL.orthonormality * 100):
            raise ValueError("flat frame is not orthonormal")

    @classmethod
    def spanned(cls, base, vectors) -> "Flat":
        """Flat through ``base`` spanned by arbitrary independent vectors."""
        base = np.asarray(base, dtype=float)
        vectors = np.asarray(vectors, dtype=float).reshape(-1, base.size)
        if vectors.shape[0] == 0:
            return cls(base, np.zeros((0, base.size)))
        q, r = np.linalg.qr(vectors.T)
        if np.min(np.abs(np.diag(r))) < TOL.degeneracy:
            raise ValueError("spanning vectors are dependent")
        return cls(base, q.T)

    @classmethod
    def coordinate(cls, n: int, axes) -> "Flat":
        axes = list(axes)
        return cls(np.zeros(n), np.eye(n)[axes])

    @property
    def k(self) -> int:
        return self.frame.shape[0]

    @property
    def ambient_dim(self) -> int:
        return self.base.size

    def complement_frame(self) -> np.ndarray:
        """Orthonormal basis of the orthogonal complement, shape (n - k, n)."""
        n, k = self.ambient_dim, self.k
        if k == 0:
            return np.eye(n)
        u, _, _ = np.linalg.svd(self.frame.T, full_matrices=True)
        return u[:, k:].T

    def orthogonal_complement(self, through=None) -> "Flat":
        base = self.base if through is None else np.asarray(through, dtype=float)
        return Flat(base, self.complement_frame())

    def to_intrinsic(self, points) -> np.ndarray:
        return (np.asarray(points, dtype=float) - self.base) @ self.frame.T

    def from_intrinsic(self, coords) -> np.ndarray:
        return np.asarray(coords, dtype=float) @ self.frame + self.base


@dataclass(frozen=True)
class Motion:
    """Euclidean motion ``y -> rotation @ y + translation``."""

    rotation: np.ndarray
    translation: np.ndarray

    def __post_init__(self):
        rot = np.asarray(self.rotation, dtype=float)
        t = np.asarray(self.translation, dtype=float).reshape(-1)
        object.__setattr__(self, "rotation", rot)
        object.__setattr__(self, "translation", t)
        n = t.size
        if rot.shape != (n, n):
            raise ValueError("rotation/translation dimension mismatch")
        if not np.allclose(rot.T @ rot, np.eye(n), atol=TOL.orthonormality):
            raise ValueError("rotation is not orthogonal")

    @classmethod
    def identity(cls, n: int) -> "Motion":
        return cls(np.eye(n), np.zeros(n))

    @classmethod
    def translation_by(cls, t) -> "Motion":
        t = np.asarray(t, dtype=float)
        return cls(np.eye(t.size), t)

    def apply(self, points) -> np.ndarray:
        return np.asarray(points, dtype=float) @ self.rotation.T + self.translation

    def apply_vector(self, v) -> np.ndarray:
        return np.asarray(v, dtype=float) @ self.rotation.T

    def compose(self, other: "Motion") -> "Motion":
        """``self o other``."""
        return Motion(self.rotation @ other.rotation,
                      self.rotation @ other.translation + self.translation)

    def inverse(self) -> "Motion":
        return Motion(self.rotation.T, -self.rotation.T @ self.translation)


def random_rotation(n: int, rng: RngStream) -> Motion:
    return Motion(random_rotations(n, rng, 1)[0], np.zeros(n))


@dataclass(frozen=True)
class Box:
    """Axis-aligned box ``[lo, hi]``."""

    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        lo = np.asarray(self.lo, dtype=float).reshape(-1)
        hi = np.asarray(self.hi, dtype=float).reshape(-1)
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)
        if lo.shape != hi.shape or np.any(hi - lo <= 0):
            raise ValueError("degenerate window")

    @classmethod
    def bounding(cls, points, pad: float = 0.0) -> "Box":
        pts = np.asarray(points, dtype=float)
        return cls(pts.min(axis=0) - pad, pts.max(axis=0) + pad)

    @property
    def volume(self) -> float:
        return float(np.prod(self.hi - self.lo))

    def minkowski_difference(self, other: "Box") -> "Box":
        """Box of all ``a - b`` with ``a`` in self and ``b`` in other."""
        return Box(self.lo - other.hi, self.hi - other.lo)

    def enlarged(self, factor: float) -> "Box":
        c, h = (self.lo + self.hi) / 2, (self.hi - self.lo) / 2 * factor
        return Box(c - h, c + h)

    def sample(self, rng: RngStream, size: int) -> np.ndarray:
        u = rng.generator.random((size, self.lo.size))
        return self.lo + u * (self.hi - self.lo)


def random_motion(window: Box, rng: RngStream) -> Motion:
    """Haar rotation paired with a translation uniform in ``window``.

    Monte Carlo means over such motions must be multiplied by
    ``window.volume`` to become Lebesgue integrals over translations.
    """
    n = window.lo.size
    rot = random_rotations(n, rng, 1)[0]
    t = window.sample(rng, 1)[0]
    return Motion(rot, t)


def flat_pairing(e1: Flat, e2: Flat) -> float:
    """``|det|`` of the concatenated orthonormal frames of complementary flats."""
    n = e1.ambient_dim
    if e2.ambient_dim != n or e1.k + e2.k != n:
        raise ValueError("flats are not of complementary dimension")
    m = np.vstack([e1.frame, e2.frame])
    d = abs(float(np.linalg.det(m))) if n else 1.0
    return 0.0 if d < TOL.pairing_zero else min(d, 1.0)


def estimate_cnk(n: int, k: int, samples: int, rng) -> Report:
    """Monte Carlo average of ``|E_k : g E_(n-k)|`` over Haar rotations ``g``."""
    if not 0 < k < n:
        raise ValueError("need 0 < k < n")
    stream = as_stream(rng)
    values = []
    done = 0
    block = 0
    while done < samples:
        m = min(CNK_BLOCK, samples - done)
        g = random_rotations(n, stream.substream(block), m)
        mats = np.concatenate(
            [np.broadcast_to(np.eye(n)[:, :k], (m, n, k)), g[:, :, k:]], axis=2)
        values.append(np.abs(np.linalg.det(mats)))
        done += m
        block += 1
    est = Estimate.from_values(np.concatenate(values))
    exact = kinematic_constant(n, k)
    return Report(f"c({n},{k})", est, seed=stream.master_seed, exact=exact,
                  params={"n": n, "k": k})
