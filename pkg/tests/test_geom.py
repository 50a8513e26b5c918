import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from plcurv.geom import (Box, Flat, Motion, RngStream, estimate_cnk, flat_pairing,
                         kinematic_constant, random_direction, random_directions,
                         random_motion, random_rotation, random_rotations, sphere_measure,
                         unit_ball_volume)


def _ball_volume_oracle(k):
    # recursion omega_k = 2 pi / k * omega_(k-2)
    if k == 0:
        return 1.0
    if k == 1:
        return 2.0
    return 2 * math.pi / k * _ball_volume_oracle(k - 2)


@pytest.mark.parametrize("k,expected", [(0, 1.0), (1, 2.0), (2, math.pi), (3, 4 * math.pi / 3)])
def test_unit_ball_volume(k, expected):
    assert unit_ball_volume(k) == pytest.approx(expected, rel=1e-14)


@pytest.mark.parametrize("k", range(8))
def test_unit_ball_volume_recursion(k):
    assert unit_ball_volume(k) == pytest.approx(_ball_volume_oracle(k), rel=1e-12)


@pytest.mark.parametrize("k,expected", [(0, 0.0), (1, 2.0), (2, 2 * math.pi), (3, 4 * math.pi)])
def test_sphere_measure(k, expected):
    assert sphere_measure(k) == pytest.approx(expected, rel=1e-14)


def test_kinematic_constant_examples():
    assert kinematic_constant(2, 1) == pytest.approx(2 / math.pi, rel=1e-12)
    assert kinematic_constant(3, 1) == pytest.approx(0.5, rel=1e-12)
    for n in range(1, 6):
        assert kinematic_constant(n, 0) == pytest.approx(1.0, rel=1e-14)
        assert kinematic_constant(n, n) == pytest.approx(1.0, rel=1e-14)


@pytest.mark.parametrize("n", range(1, 7))
def test_kinematic_constant_symmetric(n):
    for k in range(n + 1):
        assert kinematic_constant(n, k) == kinematic_constant(n, n - k)


def test_kinematic_constant_out_of_range():
    with pytest.raises(ValueError):
        kinematic_constant(2, 3)
    with pytest.raises(ValueError):
        kinematic_constant(2, -1)


def _line(theta):
    return Flat(np.zeros(2), [[math.cos(theta), math.sin(theta)]])


def test_flat_pairing_examples():
    assert flat_pairing(Flat.coordinate(3, [0]), Flat.coordinate(3, [1, 2])) == pytest.approx(1.0)
    assert flat_pairing(_line(0.0), _line(math.pi / 6)) == pytest.approx(0.5, abs=1e-14)
    e1 = Flat.coordinate(3, [0])
    e2 = Flat.spanned(np.zeros(3), [[1.0, 1.0, 0.0], [1.0, -1.0, 0.0]])
    assert flat_pairing(e1, e2) == 0.0


def test_flat_pairing_dimension_mismatch():
    with pytest.raises(ValueError):
        flat_pairing(Flat.coordinate(3, [0]), Flat.coordinate(3, [1]))


@settings(max_examples=50, deadline=None)
@given(st.integers(min_value=0, max_value=10_000))
def test_flat_pairing_symmetric_and_rotation_invariant(seed):
    rng = RngStream(seed)
    n = 3
    R1, R2, G = random_rotations(n, rng, 3)
    e1 = Flat(np.zeros(n), R1[:1])
    e2 = Flat(np.zeros(n), R2[:2])
    p = flat_pairing(e1, e2)
    assert 0.0 <= p <= 1.0
    assert p == pytest.approx(flat_pairing(e2, e1), abs=1e-12)
    ge1 = Flat(np.zeros(n), e1.frame @ G.T)
    ge2 = Flat(np.zeros(n), e2.frame @ G.T)
    assert p == pytest.approx(flat_pairing(ge1, ge2), abs=1e-12)


def test_flat_pairing_is_one_for_orthogonal_complement():
    rng = RngStream(3)
    R = random_rotations(4, rng, 1)[0]
    e = Flat(np.zeros(4), R[:2])
    assert flat_pairing(e, e.orthogonal_complement()) == pytest.approx(1.0, abs=1e-12)


def test_flat_rejects_non_orthonormal_frame():
    with pytest.raises(ValueError):
        Flat(np.zeros(2), [[1.0, 1.0]])


def test_flat_intrinsic_round_trip():
    f = Flat.spanned([1.0, 2.0, 3.0], [[1.0, 1.0, 0.0]])
    pts = np.array([[0.0], [2.5]])
    back = f.to_intrinsic(f.from_intrinsic(pts))
    np.testing.assert_allclose(back, pts, atol=1e-12)


def test_random_direction_n1_signs():
    d = random_directions(1, RngStream(0), 20_000)[:, 0]
    assert set(np.unique(d)) == {-1.0, 1.0}
    frac = np.mean(d > 0)
    assert abs(frac - 0.5) < 3 * math.sqrt(0.25 / d.size)


def test_random_direction_norm_and_mean():
    d = random_directions(2, RngStream(1), 100_000)
    np.testing.assert_allclose(np.linalg.norm(d, axis=1), 1.0, atol=1e-12)
    m, se = d[:, 0].mean(), d[:, 0].std(ddof=1) / math.sqrt(len(d))
    assert abs(m) < 3 * se
    assert np.linalg.norm(random_direction(5, RngStream(2))) == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_random_rotation_orthonormal(n):
    Rs = random_rotations(n, RngStream(n), 200)
    for R in Rs:
        np.testing.assert_allclose(R.T @ R, np.eye(n), atol=1e-10)
    assert isinstance(random_rotation(n, RngStream(0)), Motion)


def test_random_rotation_covers_both_components():
    dets = np.linalg.det(random_rotations(3, RngStream(4), 4000))
    frac = np.mean(dets > 0)
    assert abs(frac - 0.5) < 4 * math.sqrt(0.25 / 4000)


def test_random_rotation_angle_average():
    # |sin| of the angle between a fixed line and its image averages to 2/pi
    R = random_rotations(2, RngStream(5), 100_000)
    s = np.abs(R[:, 1, 0])
    assert s.mean() == pytest.approx(2 / math.pi, rel=0.01)


def test_haar_invariance_by_pairing_moments():
    rng = RngStream(6)
    R = random_rotations(3, rng.substream(0), 50_000)
    Rp = random_rotations(3, rng.substream(1), 1)[0]
    e1 = np.eye(3)[:1]

    def pairing_moments(rots):
        # pairing of the x-axis with the image of the yz-plane
        m = np.concatenate([np.broadcast_to(e1.T, (len(rots), 3, 1)), rots[:, :, 1:]], axis=2)
        p = np.abs(np.linalg.det(m))
        return p.mean(), (p ** 2).mean(), p.std(ddof=1) / math.sqrt(len(p))

    m1, q1, se1 = pairing_moments(R)
    m2, q2, se2 = pairing_moments(R @ Rp)
    assert abs(m1 - m2) < 4 * math.hypot(se1, se2)
    assert q1 == pytest.approx(1 / 3, abs=0.01)
    assert q2 == pytest.approx(1 / 3, abs=0.01)


def test_rng_stream_determinism():
    a = RngStream(42, 3).generator.random(5)
    b = RngStream(42, 3).generator.random(5)
    np.testing.assert_array_equal(a, b)
    c = RngStream(42, 4).generator.random(5)
    assert not np.array_equal(a, c)
    s1 = RngStream(42).substream(7).generator.random(3)
    s2 = RngStream(42).substream(7).generator.random(3)
    np.testing.assert_array_equal(s1, s2)


def test_random_motion_window():
    w = Box([0.0, 0.0], [1.0, 1.0])
    ts = np.array([random_motion(w, RngStream(0).substream(i)).translation for i in range(2000)])
    assert ts.min() >= 0.0 and ts.max() <= 1.0
    np.testing.assert_allclose(ts.mean(axis=0), 0.5, atol=0.03)
    assert Box([0.0, 0.0], [2.0, 2.0]).volume == 4.0
    m1 = random_motion(w, RngStream(9))
    m2 = random_motion(w, RngStream(9))
    np.testing.assert_array_equal(m1.rotation, m2.rotation)
    np.testing.assert_array_equal(m1.translation, m2.translation)


def test_degenerate_window():
    with pytest.raises(ValueError):
        Box([0.0, 0.0], [1.0, 0.0])


def test_motion_compose_and_inverse():
    rng = RngStream(8)
    g = Motion(random_rotations(3, rng, 1)[0], [1.0, 2.0, 3.0])
    h = g.compose(g.inverse())
    np.testing.assert_allclose(h.rotation, np.eye(3), atol=1e-12)
    np.testing.assert_allclose(h.translation, 0.0, atol=1e-12)
    with pytest.raises(ValueError):
        Motion([[1.0, 1.0], [0.0, 1.0]], [0.0, 0.0])


@pytest.mark.parametrize("n,k,rel", [(2, 1, 0.01), (3, 1, 0.01), (3, 2, 0.01)])
def test_estimate_cnk_examples(n, k, rel):
    rep = estimate_cnk(n, k, 100_000, RngStream(11))
    assert rep.value == pytest.approx(kinematic_constant(n, k), rel=rel)


@pytest.mark.parametrize("n,k", [(2, 1), (3, 1), (3, 2), (4, 2)])
def test_estimate_cnk_converges(n, k):
    rep = estimate_cnk(n, k, 100_000, RngStream(12))
    assert abs(rep.value - kinematic_constant(n, k)) < 4 * rep.std_error


def test_estimate_cnk_symmetry():
    a = estimate_cnk(3, 1, 50_000, RngStream(13))
    b = estimate_cnk(3, 2, 50_000, RngStream(14))
    assert abs(a.value - b.value) < 3 * math.hypot(a.std_error, b.std_error)


def test_estimate_cnk_range():
    with pytest.raises(ValueError):
        estimate_cnk(2, 0, 10, RngStream(0))
