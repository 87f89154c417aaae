import random
from fractions import Fraction as F
from itertools import product

import numpy as np
import pytest

from dhmeasure import linalg
from dhmeasure.generators import (
    random_convex_polygon,
    random_delzant_polygon,
    random_plane_data,
    random_polytope,
)
from dhmeasure.lattice import unimodular_completion
from dhmeasure.polytope import (
    DegenerateSectionError,
    Polytope,
    delzant_to_s1data,
    lift_line,
    mc_pushforward,
    plane_section,
    projected_slice_density,
    slice_density,
)
from dhmeasure.pwlinear import PLDensity, is_log_concave
from dhmeasure.rational import primitive_integer_vector
from dhmeasure.s1orbifold import (
    ExtremalSet,
    InteriorFixedPoint,
    S1FixedPointData,
    build_dh,
    closure_report,
)

from oracles import lattice_det, point_in_polytope, slice_length_density

SQUARE = Polytope(((0, 0), (1, 0), (1, 1), (0, 1)))
TENT_TRIANGLE = Polytope(((0, 0), (2, 0), (1, 1)))
HIRZ = Polytope(((0, 0), (2, 0), (1, 1), (0, 1)))
CP2 = Polytope(((0, 0), (1, 0), (0, 1)))
CUBE = Polytope(tuple(product((0, 1), repeat=3)))
SIMPLEX2 = Polytope(((0, 0, 0), (2, 0, 0), (0, 2, 0), (0, 0, 2)))


def test_canonicalization():
    P = Polytope(((1, 1), (0, 0), (F(1, 2), F(1, 2)), (1, 0), (0, 1), (F(1, 2), 0)))
    assert P.vertices == ((0, 0), (1, 0), (1, 1), (0, 1))
    cube = Polytope(tuple(product((0, 1), repeat=3)) + ((F(1, 2),) * 3,))
    assert len(cube.vertices) == 8 and len(cube.facets) == 6
    with pytest.raises(ValueError, match="span"):
        Polytope(((0, 0), (1, 1), (2, 2)))
    with pytest.raises(ValueError, match="dimension"):
        Polytope(((0,), (1,)))


def test_contains_and_area():
    assert SQUARE.contains((1, F(1, 2))) and not SQUARE.contains((1, F(1, 2)), strict=True)
    assert not SQUARE.contains((F(3, 2), 0))
    assert HIRZ.area() == F(3, 2)
    assert CUBE.contains((F(1, 2), F(1, 2), 1)) and not CUBE.contains((2, 0, 0))


def test_slice_examples():
    f = slice_density(SQUARE, (1, 0))
    assert (f.breakpoints, f.values) == ((0, 1), (1, 1))
    f = slice_density(TENT_TRIANGLE, (1, 0))
    assert (f.breakpoints, f.values) == ((0, 1, 2), (0, 1, 0))
    f = slice_density(HIRZ, (1, 0))
    assert (f.breakpoints, f.values) == ((0, 1, 2), (1, 1, 0))
    f = slice_density(TENT_TRIANGLE, (0, 1))
    assert (f.breakpoints, f.values) == ((0, 1), (2, 0))


def test_slice_rejects_bad_direction():
    with pytest.raises(ValueError, match="primitive"):
        slice_density(SQUARE, (2, 0))
    with pytest.raises(ValueError):
        slice_density(SQUARE, (0, 0))


def test_slice_agrees_with_chord_oracle():
    rng = random.Random(1)
    for _ in range(100):
        P = random_convex_polygon(rng)
        X = (rng.randint(-3, 3), rng.randint(-3, 3))
        if X == (0, 0):
            continue
        X = primitive_integer_vector(X)
        f = slice_density(P, X)
        assert f == slice_length_density(P.vertices, X)
        assert f.integral() == P.area()
        assert is_log_concave(f).is_log_concave


def test_plane_section_examples():
    sq = plane_section(CUBE, (0, 0, F(1, 2)), (1, 0, 0), (0, 1, 0))
    assert sq == SQUARE
    tri = plane_section(SIMPLEX2, (F(1, 2), 0, 0), (0, 1, 0), (0, 0, 1))
    assert tri == Polytope(((0, 0), (F(3, 2), 0), (0, F(3, 2))))
    with pytest.raises(DegenerateSectionError, match="degenerate section"):
        plane_section(CUBE, (0, 0, 2), (1, 0, 0), (0, 1, 0))
    with pytest.raises(DegenerateSectionError, match="degenerate section"):
        plane_section(CUBE, (0, 0, 1), (1, 0, 0), (0, 1, 0))


def test_plane_section_membership_oracle():
    rng = random.Random(4)
    base, s1, s2 = (F(1, 2), 0, 0), (0, 1, 0), (0, 0, 1)
    tri = plane_section(SIMPLEX2, base, s1, s2)
    for _ in range(400):
        u, v = F(rng.randint(-8, 32), 16), F(rng.randint(-8, 32), 16)
        lifted = tuple(b + u * a + v * c for b, a, c in zip(base, s1, s2))
        assert tri.contains((u, v)) == point_in_polytope(SIMPLEX2.facets, lifted)


def test_projected_examples():
    f = projected_slice_density(CUBE, (0, 0, 1), (0, F(1, 2)), (1, 0))
    assert f == PLDensity((0, 1), (1, 1))


def _composed(P, kernel, base, line_dir):
    _, complement = unimodular_completion(kernel)
    point, direction = lift_line(complement, base, line_dir)
    section = plane_section(P, point, direction, kernel)
    # plane coordinate u is the level along the line; fibre length along the kernel
    return slice_density(section, (1, 0))


def test_projected_matches_composed_on_simplex():
    kernel = (0, 0, 1)
    base, line_dir = (F(1, 2), F(1, 2)), (1, -1)
    f = projected_slice_density(SIMPLEX2, kernel, base, line_dir)
    assert f == _composed(SIMPLEX2, kernel, base, line_dir)
    assert is_log_concave(f).is_log_concave


def test_projected_matches_composed_random():
    rng = random.Random(2)
    done = 0
    while done < 15:
        P = random_polytope(rng, rng.choice([3, 4]))
        kernel, base, line_dir = random_plane_data(rng, P)
        try:
            f = projected_slice_density(P, kernel, base, line_dir)
        except DegenerateSectionError:
            with pytest.raises(DegenerateSectionError):
                _composed(P, kernel, base, line_dir)
            continue
        assert f == _composed(P, kernel, base, line_dir)
        done += 1


def test_mc_examples_and_determinism():
    f = slice_density(SQUARE, (1, 0))
    h = mc_pushforward(SQUARE, (1, 0), 10**6, 50, 7)
    assert h.total_samples == 10**6 == sum(h.counts)
    assert np.max(np.abs(h.densities() - 1.0)) <= 0.02
    assert h.sup_distance(f) <= 0.02
    again = mc_pushforward(SQUARE, (1, 0), 10**6, 50, 7)
    assert list(again.counts) == list(h.counts)
    tent = mc_pushforward(TENT_TRIANGLE, (1, 0), 10**6, 50, 3)
    assert tent.sup_distance(slice_density(TENT_TRIANGLE, (1, 0))) <= 0.02


def test_mc_errors_and_csv():
    with pytest.raises(ValueError):
        mc_pushforward(SQUARE, (1, 0), 100, 50, 0)
    with pytest.raises(ValueError):
        mc_pushforward(SQUARE, (1, 0), 10**4, 5, 0)
    sliver = Polytope(((0, 0), (1000, 1000), (1000, F(1000001, 1000))))
    with pytest.raises(ValueError, match="degenerate polytope for sampling"):
        mc_pushforward(sliver, (1, 0), 10**4, 10, 0)
    h = mc_pushforward(SQUARE, (1, 0), 10**4, 10, 0)
    rows = h.to_csv().splitlines()
    assert rows[0] == "bin_left,bin_right,count,density_estimate" and len(rows) == 11


def test_delzant_examples():
    assert delzant_to_s1data(HIRZ, (1, 0)) == S1FixedPointData(
        ExtremalSet.surface(0, 1, 0), ExtremalSet.isolated(2, -1, -1, 1),
        (InteriorFixedPoint(1, -1, 1, 1),))
    assert delzant_to_s1data(CP2, (1, 0)) == S1FixedPointData(
        ExtremalSet.surface(0, 1, 1), ExtremalSet.isolated(1, -1, -1, 1))
    diag = delzant_to_s1data(SQUARE, (1, 1))
    assert diag.min == ExtremalSet.isolated(0, 1, 1, 1)
    assert diag.max == ExtremalSet.isolated(2, -1, -1, 1)
    assert diag.interior == (InteriorFixedPoint(1, -1, 1), InteriorFixedPoint(1, -1, 1))
    assert build_dh(diag) == PLDensity((0, 1, 2), (0, 1, 0))


def test_delzant_random_contract():
    rng = random.Random(9)
    for _ in range(30):
        P = random_delzant_polygon(rng)
        X = rng.choice([(1, 0), (0, 1), (1, 1), (1, -1), (2, 1), (1, 3)])
        assert build_dh(delzant_to_s1data(P, X)) == slice_length_density(P.vertices, X)


def test_weights_are_edge_pairings():
    P = Polytope(((0, 0), (3, 0), (3, 1), (1, 2), (0, 2)))
    X = (1, 2)
    data = delzant_to_s1data(P, X)
    for p in data.interior:
        v = next(v for v in P.vertices if v[0] + 2 * v[1] == p.level)
        i = P.vertices.index(v)
        u1 = linalg.sub(P.vertices[i - 1], v)
        u2 = linalg.sub(P.vertices[(i + 1) % len(P.vertices)], v)
        u1, u2 = primitive_integer_vector(u1), primitive_integer_vector(u2)
        assert sorted((p.weight1, p.weight2)) == sorted(linalg.dot(u, X) for u in (u1, u2))
        assert p.order == abs(lattice_det(u1, u2))


# Orbifold regression, P(1,1,2): the triangle (0,0),(2,0),(0,1) has one vertex,
# (0,1), with |det| = 2.  Expected densities come from the chord oracle.
WEIGHTED = Polytope(((0, 0), (2, 0), (0, 1)))


def test_orbifold_vertex_regression_diagonal():
    expected = slice_length_density(WEIGHTED.vertices, (1, 1))
    assert expected == PLDensity((0, 1, 2), (0, 1, 0))
    assert slice_density(WEIGHTED, (1, 1)) == expected
    data = delzant_to_s1data(WEIGHTED, (1, 1))
    (p,) = data.interior
    assert (p.level, p.weight1, p.weight2, p.order) == (1, -1, 1, 2)
    rep = closure_report(data)
    # edge-pairing weights with d = 2 give a jump of -1/2; the oracle jump is -2
    assert (rep.residual, rep.expected_slope, rep.computed_slope) == (F(3, 2), -1, F(1, 2))
    oracle_jump = expected.slopes()[1] - expected.slopes()[0]
    assert oracle_jump == -2 == F(p.order, p.weight1 * p.weight2)


def test_orbifold_vertex_regression_extremal():
    expected = slice_length_density(WEIGHTED.vertices, (0, 1))
    assert expected == PLDensity((0, 1), (2, 0))
    data = delzant_to_s1data(WEIGHTED, (0, 1))
    assert data.max == ExtremalSet.isolated(1, -1, -1, 2)
    rep = closure_report(data)
    assert rep.residual == 0
    # the model -1/(d p1 p2) predicts -1/2; the oracle slope is -2 = -d/(p1 p2)
    assert (rep.expected_slope, rep.computed_slope) == (F(-1, 2), -2)
    assert expected.slopes()[-1] == -2


def test_smooth_vertices_unaffected():
    data = delzant_to_s1data(WEIGHTED, (1, 0))
    assert all(p.order == 1 for p in data.interior) and data.max.order == 1
    assert build_dh(data) == slice_density(WEIGHTED, (1, 0))
