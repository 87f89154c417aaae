"""Random valid instances for property tests and the acceptance suite.

Every generator takes a ``random.Random`` and returns exact data.
"""

from __future__ import annotations

import random
from fractions import Fraction
from functools import lru_cache
from itertools import product

from . import linalg
from .lattice import unimodular_completion
from .polytope import Polytope, quotient_coordinates
from .rational import primitive_integer_vector
from .s1orbifold import ExtremalSet, InteriorFixedPoint, S1FixedPointData, _telescope
from .xray import Face, XRay

MAX_WEIGHT = 9
MAX_ORDER = 4


def random_rational(rng, lo, hi, den=4) -> Fraction:
    return Fraction(rng.randint(lo * den, hi * den), den)


def random_interior_point(rng, level, max_weight=MAX_WEIGHT, max_order=MAX_ORDER):
    return InteriorFixedPoint(level, -rng.randint(1, max_weight), rng.randint(1, max_weight),
                              rng.randint(1, max_order))


def random_primitive(rng, dim, bound=3) -> tuple:
    while True:
        v = tuple(rng.randint(-bound, bound) for _ in range(dim))
        if any(v):
            return primitive_integer_vector(v)


def _isolated_max_for(slope):
    """Weights and order ``(p1, p2, d)`` with ``-1/(d p1 p2) == slope``, if any."""
    if slope >= 0 or slope.numerator != -1:
        return None
    m = slope.denominator
    for d in range(1, MAX_ORDER + 1):
        for p1 in range(1, MAX_WEIGHT + 1):
            if m % (d * p1) == 0 and m // (d * p1) <= MAX_WEIGHT:
                return -p1, -(m // (d * p1)), d
    return None


def random_s1_data(rng: random.Random, max_levels=4, max_points_per_level=3) -> S1FixedPointData:
    """Closure-consistent fixed-point data (the maximum is fitted to the build)."""
    while True:
        level = random_rational(rng, -4, 4)
        if rng.random() < 0.5:
            mn = ExtremalSet.isolated(level, rng.randint(1, MAX_WEIGHT), rng.randint(1, MAX_WEIGHT),
                                      rng.randint(1, MAX_ORDER))
        else:
            mn = ExtremalSet.surface(level, random_rational(rng, 1, 12), random_rational(rng, -3, 3))
        interior = []
        for _ in range(rng.randint(0, max_levels)):
            level += Fraction(rng.randint(1, 12), rng.randint(1, 4))
            interior += [random_interior_point(rng, level)
                         for _ in range(rng.randint(1, max_points_per_level))]
        top = level + Fraction(rng.randint(1, 12), rng.randint(1, 4))
        probe = S1FixedPointData(mn, ExtremalSet.surface(top, 1, 0), tuple(interior))
        levels, values, slopes = _telescope(probe)
        if any(v <= 0 for v in values[1:-1]):
            continue
        last_level, last_value, slope = levels[-2], values[-2], slopes[-1]
        if rng.random() < 0.5 and slope < 0:
            fit = _isolated_max_for(slope)
            if fit is not None:
                end = last_level + last_value / -slope
                return S1FixedPointData(mn, ExtremalSet.isolated(end, *fit), tuple(interior))
        if values[-1] <= 0:
            continue
        return S1FixedPointData(mn, ExtremalSet.surface(top, values[-1], slope), tuple(interior))


def _corner_chop(vertices, i, s):
    """Cut vertex ``i`` at lattice distance ``s`` along both edges."""
    m = len(vertices)
    v, prev, nxt = vertices[i], vertices[i - 1], vertices[(i + 1) % m]
    u1 = primitive_integer_vector(linalg.sub(prev, v))
    u2 = primitive_integer_vector(linalg.sub(nxt, v))
    a = linalg.add(v, linalg.scale(s, u1))
    b = linalg.add(v, linalg.scale(s, u2))
    return vertices[:i] + [a, b] + vertices[i + 1:]


def _lattice_lengths(vertices, i):
    m = len(vertices)
    out = []
    for j in (i - 1, (i + 1) % m):
        d = linalg.sub(vertices[j], vertices[i])
        u = primitive_integer_vector(d)
        k = next(c for c in range(2) if u[c] != 0)
        out.append(d[k] / u[k])
    return out


def random_delzant_polygon(rng: random.Random, chops=3) -> Polytope:
    """Smooth (Delzant) polygon: a standard one with random corner chops and SL2(Z) moves."""
    kind = rng.choice(["triangle", "rectangle", "hirzebruch"])
    a, b = rng.randint(2, 6), rng.randint(2, 6)
    if kind == "triangle":
        verts = [(0, 0), (a, 0), (0, a)]
    elif kind == "rectangle":
        verts = [(0, 0), (a, 0), (a, b), (0, b)]
    else:
        k = rng.randint(1, 3)
        verts = [(0, 0), (a + k * b, 0), (a, b), (0, b)]
    verts = list(Polytope(tuple(verts)).vertices)
    for _ in range(rng.randint(0, chops)):
        i = rng.randrange(len(verts))
        limit = min(_lattice_lengths(verts, i))
        steps = int(limit * 4)
        if steps < 2:
            continue
        s = Fraction(rng.randint(1, steps - 1), 4)
        verts = list(Polytope(tuple(_corner_chop(verts, i, s))).vertices)
    shear = rng.randint(-2, 2)
    mat = rng.choice([((1, shear), (0, 1)), ((1, 0), (shear, 1)), ((0, -1), (1, 0))])
    shift = (rng.randint(-3, 3), rng.randint(-3, 3))
    moved = [tuple(sum(mat[r][c] * v[c] for c in range(2)) + shift[r] for r in range(2)) for v in verts]
    return Polytope(tuple(moved))


def random_convex_polygon(rng: random.Random, max_points=9, bound=4, den=4) -> Polytope:
    while True:
        pts = [(random_rational(rng, -bound, bound, den), random_rational(rng, -bound, bound, den))
               for _ in range(rng.randint(3, max_points))]
        try:
            return Polytope(tuple(pts))
        except ValueError:
            continue


def random_polytope(rng: random.Random, dim, extra_points=4, bound=3, den=2) -> Polytope:
    while True:
        pts = [tuple(random_rational(rng, -bound, bound, den) for _ in range(dim))
               for _ in range(dim + 1 + rng.randint(0, extra_points))]
        try:
            return Polytope(tuple(pts))
        except ValueError:
            continue


def random_plane_data(rng: random.Random, P: Polytope):
    """Kernel, line base and line direction whose lifted plane meets the interior of ``P``."""
    n = P.dimension
    kernel = random_primitive(rng, n, bound=2)
    _, complement = unimodular_completion(kernel)
    k = len(P.vertices)
    centre = tuple(sum(v[i] for v in P.vertices) / k for i in range(n))
    base = quotient_coordinates(kernel, complement, centre)
    line_dir = random_primitive(rng, n - 1, bound=2)
    return kernel, base, line_dir


def _random_point_in_box(rng, dim, lo, hi, den=8):
    return tuple(random_rational(rng, lo, hi, den) for _ in range(dim))


@lru_cache(maxsize=None)
def _box_strata(ambient_dim: int, size: int):
    """Box moment image and its proper boundary faces (shared, immutable)."""
    box = Polytope(tuple(product((0, size), repeat=ambient_dim)))
    corners = list(box.vertices)
    strata = [[c] for c in corners]
    if ambient_dim == 2:
        strata += [[p, q] for p, q in zip(corners, corners[1:] + corners[:1])]
    else:
        for axis in range(3):
            for val in (0, size):
                strata.append([c for c in corners if c[axis] == val])
                for other in range(axis + 1, 3):
                    for oval in (0, size):
                        strata.append([c for c in corners if c[axis] == val and c[other] == oval])
    return box, tuple(Face.from_vertices(v, f"box{i + 1}") for i, v in enumerate(strata))


def synthetic_xray(rng: random.Random, ambient_dim: int, walls=3, size=4) -> XRay:
    """Box moment image with its boundary strata plus random walls and their boundaries."""
    if ambient_dim not in (2, 3):
        raise ValueError("synthetic x-rays are generated in dimensions 2 and 3")
    box, faces = _box_strata(ambient_dim, size)
    faces = list(faces)

    def add(vertices):
        faces.append(Face.from_vertices(vertices, f"w{len(faces) + 1}"))

    for _ in range(walls):
        if ambient_dim == 2:
            while True:
                p = _random_point_in_box(rng, 2, 0, size)
                q = _random_point_in_box(rng, 2, 0, size)
                if p != q:
                    break
            add([p])
            add([q])
            add([p, q])
        else:
            while True:
                tri = [_random_point_in_box(rng, 3, 0, size) for _ in range(3)]
                if linalg.rank([linalg.sub(tri[1], tri[0]), linalg.sub(tri[2], tri[0])]) == 2:
                    break
            for p in tri:
                add([p])
            for i in range(3):
                add([tri[i], tri[(i + 1) % 3]])
            add(tri)
    return XRay(ambient_dim, box, tuple(faces))


def random_xray_endpoints(rng: random.Random, ambient_dim: int, size=4):
    while True:
        x0 = _random_point_in_box(rng, ambient_dim, 0, size, den=4)
        x1 = _random_point_in_box(rng, ambient_dim, 0, size, den=4)
        if x0 != x1:
            return x0, x1
