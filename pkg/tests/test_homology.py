import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from plcurv.complex import (EmbeddedComplex, close_under_faces, disjoint_union,
                            euler_characteristic, subdivide_barycentric)
from plcurv.homology import (BettiVector, betti, betti_of_simplices, boundary_matrices,
                             euler_from_betti, matrix_rank_exact, pair_betti,
                             pair_betti_from_link)
from plcurv.shapes import SHAPES, generate


def _float_betti(X):
    # independent oracle: floating-point ranks of the boundary matrices
    data = boundary_matrices(X)
    ranks = [0] + [int(np.linalg.matrix_rank(m.astype(float))) if m.size else 0
                   for m in data.boundaries[1:]] + [0]
    return tuple(data.counts[k] - ranks[k] - ranks[k + 1] for k in range(len(data.counts)))


# six-vertex projective plane: rational homology of a point, torsion in H_1 over Z
RP2 = [(0, 1, 2), (0, 2, 3), (0, 3, 4), (0, 4, 5), (0, 1, 5),
       (1, 2, 4), (2, 3, 5), (1, 3, 4), (2, 4, 5), (1, 3, 5)]


def test_segment_boundary():
    d = boundary_matrices(generate("segment")).matrix(1)
    np.testing.assert_array_equal(d, [[-1], [1]])


def test_triangle_boundary_column_sums():
    T = generate("simplex", dim=2)
    B = close_under_faces(T.vertices, T.by_dim[1])
    d = boundary_matrices(B).matrix(1)
    assert d.shape == (3, 3)
    np.testing.assert_array_equal(d.sum(axis=0), 0)


@pytest.mark.parametrize("shape", SHAPES)
def test_boundary_squares_to_zero(shape):
    data = boundary_matrices(generate(shape))
    for k in range(2, len(data.boundaries)):
        prod = data.matrix(k - 1) @ data.matrix(k)
        assert not prod.any()


@pytest.mark.parametrize("shape,expected", [
    ("circle", (1, 1)), ("annulus", (1, 1, 0)), ("square", (1, 0, 0)),
    ("cube_boundary", (1, 0, 1)), ("cube_solid", (1, 0, 0, 0)), ("bouquet", (1, 2)),
    ("cross", (1, 0)), ("lshape", (1, 0, 0)),
])
def test_betti_examples(shape, expected):
    assert betti(generate(shape)).betti == expected


def test_two_points():
    X = EmbeddedComplex([[0.0], [1.0]], [(0,), (1,)])
    assert betti(X).betti == (2,)


@pytest.mark.parametrize("shape", SHAPES)
def test_betti_matches_float_oracle(shape):
    X = generate(shape)
    assert betti(X).betti == _float_betti(X)


@pytest.mark.parametrize("shape", SHAPES)
def test_betti_subdivision_invariant(shape):
    X = generate(shape)
    assert betti(subdivide_barycentric(X)).betti == betti(X).betti


def test_projective_plane_over_rationals():
    simplices = set()
    for s in RP2:
        for r in range(1, 4):
            simplices.update(itertools.combinations(sorted(s), r))
    assert betti_of_simplices(simplices).betti == (1, 0, 0)
    # chi = 6 - 15 + 10
    assert euler_from_betti(betti_of_simplices(simplices)) == 1


def test_rank_permutation_invariance():
    X = generate("bouquet", loops=3)
    m = boundary_matrices(X).matrix(1)
    rng = np.random.default_rng(0)
    base = matrix_rank_exact(m)
    for _ in range(5):
        p = m[rng.permutation(m.shape[0])][:, rng.permutation(m.shape[1])]
        assert matrix_rank_exact(p) == base


@settings(max_examples=40, deadline=None)
@given(st.lists(st.lists(st.integers(-3, 3), min_size=4, max_size=4), min_size=1, max_size=5))
def test_exact_rank_matches_float(rows):
    m = np.array(rows, dtype=np.int64)
    assert matrix_rank_exact(m) == np.linalg.matrix_rank(m.astype(float))


def test_reduced_convention():
    empty = BettiVector((), empty=True)
    assert empty.reduced == (1,)
    assert BettiVector((2, 1)).reduced == (0, 1, 1)


def test_pair_betti_examples():
    assert pair_betti(BettiVector((), empty=True)).betti == (1,)
    arc = generate("segment")
    assert pair_betti_from_link(arc).total == 0
    two = EmbeddedComplex([[0.0], [1.0]], [(0,), (1,)])
    pb = pair_betti_from_link(two)
    assert pb[1] == 1 and pb[0] == 0 and pb.total == 1


@pytest.mark.parametrize("betti_vec", [(1, 1), (1, 1, 0), (1, 0, 1)])
def test_euler_from_betti(betti_vec):
    expected = {(1, 1): 0, (1, 1, 0): 0, (1, 0, 1): 2}[betti_vec]
    assert euler_from_betti(BettiVector(betti_vec)) == expected


@pytest.mark.parametrize("shape", SHAPES)
def test_pair_betti_agrees_with_link_formulas(shape):
    # shapes as stand-in links: 1 - chi(L) and |b(L) - 1| from the pair numbers
    L = generate(shape)
    pb = pair_betti_from_link(L)
    alt = sum((-1) ** k * b for k, b in enumerate(pb.betti))
    assert alt == 1 - euler_characteristic(L)
    assert pb.total == abs(betti(L).total - 1)


def test_pair_betti_disjoint_links():
    L = disjoint_union(generate("circle"), generate("point", n=2))
    pb = pair_betti_from_link(L)
    assert pb.betti == (0, 1, 1)
