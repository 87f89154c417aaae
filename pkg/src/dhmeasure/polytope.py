"""Rational convex polytopes as the toric model of DH densities.

For a toric manifold with moment polytope ``P`` and a circle generated by a
primitive integer vector ``X``, the DH density of the circle is the
push-forward of Lebesgue measure on ``P`` under ``x -> <x, X>``.  Parametrizing
by the level ``t = <x, X>`` (not by arc length) makes the density of a slice
equal to its length measured in units of the primitive vector orthogonal to
``X``, which is what the fixed-point route produces.

All geometry is exact: vertices and half-spaces carry Fractions and no
predicate uses a tolerance.  Only ``mc_pushforward`` works in floating point,
and even there membership of a sample is decided with integers.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from itertools import combinations
from math import lcm

import numpy as np

from . import linalg
from .lattice import unimodular_completion
from .pwlinear import PLDensity
from .rational import format_rational, is_primitive, parse_rational, primitive_integer_vector
from .s1orbifold import ExtremalSet, InteriorFixedPoint, S1FixedPointData

MAX_DIMENSION = 4


class DegenerateSectionError(ValueError):
    pass


def _as_direction(vec, dim=None) -> tuple:
    vec = tuple(vec)
    if not is_primitive(vec):
        raise ValueError(f"direction {vec} must be a primitive integer vector")
    if dim is not None and len(vec) != dim:
        raise ValueError(f"direction {vec} must have {dim} coordinates")
    return vec


def _cross(o, a, b):
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def _hull_2d(points):
    """Strictly convex hull, counter-clockwise from the lexicographic minimum."""
    pts = sorted(set(points))
    if len(pts) < 3:
        return pts

    def half(seq):
        chain = []
        for p in seq:
            while len(chain) >= 2 and _cross(chain[-2], chain[-1], p) <= 0:
                chain.pop()
            chain.append(p)
        return chain

    lower, upper = half(pts), half(reversed(pts))
    return lower[:-1] + upper[:-1]


def _hyperplane_through(points):
    """Primitive integer normal ``a`` and offset ``b`` of the hyperplane through n points."""
    base = points[0]
    rows = [linalg.integer_row(linalg.sub(p, base)) for p in points[1:]]
    n = len(base)
    # generalized cross product: signed maximal minors
    normal = [(-1) ** j * linalg.integer_det([r[:j] + r[j + 1:] for r in rows]) for j in range(n)]
    if not any(normal):
        return None
    a = primitive_integer_vector(normal)
    return a, linalg.dot(a, base)


def _facets_nd(points, n):
    facets = {}
    for subset in combinations(points, n):
        if any(all(linalg.dot(a, p) == b for p in subset) for a, b in facets):
            continue
        plane = _hyperplane_through(subset)
        if plane is None:
            continue
        a, b = plane
        sides = [linalg.dot(a, p) - b for p in points]
        if all(s <= 0 for s in sides):
            key = (a, b)
        elif all(s >= 0 for s in sides):
            key = (tuple(-x for x in a), -b)
        else:
            continue
        facets[key] = True
    return list(facets)


@dataclass(frozen=True, eq=False)
class Polytope:
    """Full-dimensional rational convex polytope given by its vertices.

    Input points may include redundant ones; they are removed on construction.
    Polygon vertices are kept counter-clockwise from the lexicographic minimum,
    higher-dimensional ones sorted lexicographically.
    """

    vertices: tuple

    def __post_init__(self):
        pts = [tuple(Fraction(x) for x in p) for p in self.vertices]
        if not pts:
            raise ValueError("a polytope needs vertices")
        n = len(pts[0])
        if any(len(p) != n for p in pts):
            raise ValueError("vertices have mixed dimensions")
        if not 2 <= n <= MAX_DIMENSION:
            raise ValueError(f"dimension must be between 2 and {MAX_DIMENSION}, got {n}")
        pts = sorted(set(pts))
        if linalg.rank([linalg.sub(p, pts[0]) for p in pts[1:]] or [[0] * n]) != n:
            raise ValueError(f"vertices do not span a {n}-dimensional polytope")
        if n == 2:
            verts = _hull_2d(pts)
        else:
            facets = _facets_nd(pts, n)
            verts = []
            for p in pts:
                tight = [a for a, b in facets if linalg.dot(a, p) == b]
                if len(tight) >= n and linalg.rank(tight) == n:
                    verts.append(p)
            object.__setattr__(self, "_facets", facets)
        object.__setattr__(self, "vertices", tuple(verts))

    @property
    def dimension(self) -> int:
        return len(self.vertices[0])

    def __eq__(self, other):
        if not isinstance(other, Polytope):
            return NotImplemented
        return sorted(self.vertices) == sorted(other.vertices)

    def __hash__(self):
        return hash(tuple(sorted(self.vertices)))

    @cached_property
    def facets(self) -> list:
        """Half-spaces ``(a, b)`` with ``a . x <= b``; ``a`` primitive integer."""
        if self.dimension == 2:
            vs = self.vertices
            out = []
            for i, p in enumerate(vs):
                q = vs[(i + 1) % len(vs)]
                normal = primitive_integer_vector((q[1] - p[1], p[0] - q[0]))
                out.append((normal, linalg.dot(normal, p)))
            return out
        return list(self.__dict__.get("_facets") or _facets_nd(list(self.vertices), self.dimension))

    def contains(self, point, strict=False) -> bool:
        point = tuple(Fraction(x) for x in point)
        if strict:
            return all(linalg.dot(a, point) < b for a, b in self.facets)
        return all(linalg.dot(a, point) <= b for a, b in self.facets)

    def area(self) -> Fraction:
        """Euclidean area of a polygon (shoelace)."""
        if self.dimension != 2:
            raise ValueError("area is defined for polygons only")
        vs = self.vertices
        twice = sum((vs[i][0] * vs[(i + 1) % len(vs)][1] - vs[(i + 1) % len(vs)][0] * vs[i][1]
                     for i in range(len(vs))), Fraction(0))
        return abs(twice) / 2

    def bounding_box(self):
        n = self.dimension
        lo = tuple(min(v[i] for v in self.vertices) for i in range(n))
        hi = tuple(max(v[i] for v in self.vertices) for i in range(n))
        return lo, hi

    def to_record(self) -> dict:
        return {"dimension": self.dimension,
                "vertices": [[format_rational(x) for x in v] for v in self.vertices]}

    @classmethod
    def from_record(cls, rec: dict) -> "Polytope":
        try:
            verts = [tuple(parse_rational(x) for x in v) for v in rec["vertices"]]
            dim = rec.get("dimension")
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed polytope record: {exc}") from exc
        poly = cls(tuple(verts))
        if dim is not None and dim != poly.dimension:
            raise ValueError(f"declared dimension {dim} but vertices are {poly.dimension}-dimensional")
        return poly


def _polygon_from_halfplanes(constraints):
    """Vertices of ``{(u, v) : cu u + cv v <= r}`` (a bounded region)."""
    pts = set()
    for (a1, b1, r1), (a2, b2, r2) in combinations(constraints, 2):
        d = a1 * b2 - a2 * b1
        if d == 0:
            continue
        u = (r1 * b2 - r2 * b1) / d
        v = (a1 * r2 - a2 * r1) / d
        if all(a * u + b * v <= r for a, b, r in constraints):
            pts.add((u, v))
    return pts


def plane_section(P: Polytope, base, span1, span2) -> Polytope:
    """``P`` cut by the affine plane ``base + u span1 + v span2``, in ``(u, v)`` coordinates."""
    n = P.dimension
    base = tuple(Fraction(x) for x in base)
    span1, span2 = _as_direction(span1, n), _as_direction(span2, n)
    if len(base) != n:
        raise ValueError(f"base point must have {n} coordinates")
    if linalg.rank([span1, span2]) != 2:
        raise ValueError("plane spanning directions are linearly dependent")
    constraints = []
    for a, b in P.facets:
        cu, cv, r = linalg.dot(a, span1), linalg.dot(a, span2), b - linalg.dot(a, base)
        if cu == 0 and cv == 0:
            if r <= 0:
                raise DegenerateSectionError("degenerate section: plane misses the interior")
            continue
        constraints.append((cu, cv, r))
    pts = _polygon_from_halfplanes(constraints)
    if len(pts) < 3:
        raise DegenerateSectionError("degenerate section: intersection is empty or lower-dimensional")
    try:
        section = Polytope(tuple(pts))
    except ValueError as exc:
        raise DegenerateSectionError(f"degenerate section: {exc}") from exc
    k = len(section.vertices)
    cu = sum(v[0] for v in section.vertices) / k
    cv = sum(v[1] for v in section.vertices) / k
    centre = tuple(b + cu * s + cv * t for b, s, t in zip(base, span1, span2))
    if not P.contains(centre, strict=True):
        raise DegenerateSectionError("degenerate section: plane misses the interior")
    return section


def _triangle_value(t, ha, hb, hc, peak):
    # jumps sit only at the global extremes; there the inner one-sided limit is returned
    if t < ha or t > hc:
        return Fraction(0)
    if t < hb:
        return peak * (t - ha) / (hb - ha)
    if t > hb:
        return peak * (hc - t) / (hc - hb)
    return peak


def slice_density(P: Polytope, X) -> PLDensity:
    """Exact density of the push-forward of area measure under ``x -> <x, X>``.

    Fan-triangulates from the lowest vertex; each triangle pushes forward to a
    triangular (tent or one-sided) density with mass equal to its area.
    """
    if P.dimension != 2:
        raise ValueError("slice_density needs a polygon")
    X = _as_direction(X, 2)
    vs = P.vertices
    heights = [linalg.dot(v, X) for v in vs]
    start = min(range(len(vs)), key=lambda i: heights[i])
    order = vs[start:] + vs[:start]
    tris = []
    v0 = order[0]
    for v1, v2 in zip(order[1:], order[2:]):
        hs = sorted(linalg.dot(v, X) for v in (v0, v1, v2))
        peak = abs(_cross(v0, v1, v2)) / (hs[2] - hs[0])
        tris.append((hs[0], hs[1], hs[2], peak))
    levels = sorted(set(heights))
    values = [sum((_triangle_value(t, *tri) for tri in tris), Fraction(0)) for t in levels]
    return PLDensity(tuple(levels), tuple(values)).canonical()


def projected_slice_density(P: Polytope, proj_kernel, line_base, line_dir, complement=None) -> PLDensity:
    """Fiber length of ``P`` along ``proj_kernel`` over a line in the quotient.

    The quotient ``R^n / span(proj_kernel)`` gets coordinates from a unimodular
    completion ``[k, c_1, ..., c_{n-1}]`` of the kernel (or the given
    ``complement``): the point ``xi`` lifts to ``sum xi_i c_i``.  Over
    ``line_base + u line_dir`` the fiber is an interval in the kernel
    coordinate whose length is ``min(upper bounds) - max(lower bounds)``, a
    concave piecewise-linear function of ``u`` computed here directly from the
    facet inequalities.  It agrees with
    ``slice_density(plane_section(P, lift(line_base), lift(line_dir), k), (1, 0))``.
    """
    n = P.dimension
    k = _as_direction(proj_kernel, n)
    if complement is None:
        _, complement = unimodular_completion(k)
    complement = [tuple(c) for c in complement]
    if len(complement) != n - 1 or abs(linalg.det([k] + complement)) != 1:
        raise ValueError("complement must complete the kernel to a unimodular basis")
    line_base = tuple(Fraction(x) for x in line_base)
    line_dir = _as_direction(line_dir, n - 1)
    if len(line_base) != n - 1:
        raise ValueError(f"line base must have {n - 1} coordinates")
    base, span1 = lift_line(complement, line_base, line_dir)

    upper, lower = [], []
    u_lo, u_hi = None, None
    for a, b in P.facets:
        ck, cu, r = linalg.dot(a, k), linalg.dot(a, span1), b - linalg.dot(a, base)
        # constraint: cu u + ck v <= r
        if ck > 0:
            upper.append((r / ck, -cu / ck))
        elif ck < 0:
            lower.append((r / ck, -cu / ck))
        elif cu > 0:
            u_hi = r / cu if u_hi is None else min(u_hi, r / cu)
        elif cu < 0:
            u_lo = r / cu if u_lo is None else max(u_lo, r / cu)
        elif r <= 0:
            raise DegenerateSectionError("degenerate section: plane misses the interior")

    def fiber(u):
        return min(c + s * u for c, s in upper) - max(c + s * u for c, s in lower)

    candidates = set()
    lines = upper + lower
    for (c1, s1), (c2, s2) in combinations(lines, 2):
        if s1 != s2:
            candidates.add((c2 - c1) / (s1 - s2))
    for bound in (u_lo, u_hi):
        if bound is not None:
            candidates.add(bound)
    candidates = sorted(
        u for u in candidates
        if (u_lo is None or u >= u_lo) and (u_hi is None or u <= u_hi) and fiber(u) >= 0
    )
    if len(candidates) < 2:
        raise DegenerateSectionError("degenerate section: intersection is empty or lower-dimensional")
    values = [fiber(u) for u in candidates]
    if any(v <= 0 for v in values[1:-1]) or (len(values) == 2 and values[0] == values[1] == 0):
        raise DegenerateSectionError("degenerate section: plane misses the interior")
    return PLDensity(tuple(candidates), tuple(values)).canonical()


def lift_line(complement, line_base, line_dir):
    """Lift ``line_base + u line_dir`` from quotient coordinates to ``R^n``."""
    n = len(complement[0])
    base = tuple(sum((xi * c[j] for xi, c in zip(line_base, complement)), Fraction(0))
                 for j in range(n))
    span = tuple(sum(d * c[j] for d, c in zip(line_dir, complement)) for j in range(n))
    return base, span


def quotient_coordinates(kernel, complement, point):
    """Coordinates of ``point`` in the basis ``[kernel, *complement]``, kernel part dropped."""
    basis_cols = [tuple(kernel)] + [tuple(c) for c in complement]
    coeffs, _ = linalg.solve(linalg.transpose(basis_cols), tuple(Fraction(x) for x in point))
    return coeffs[1:]


@dataclass(frozen=True)
class Histogram:
    bin_edges: tuple
    counts: tuple
    total_samples: int
    volume_estimate: float

    def __post_init__(self):
        if len(self.counts) != len(self.bin_edges) - 1:
            raise ValueError("need one count per bin")
        if sum(self.counts) != self.total_samples:
            raise ValueError("every accepted sample must land in a bin")

    def densities(self) -> np.ndarray:
        """Density estimate per bin, normalized to total mass ``volume_estimate``."""
        widths = np.diff(np.asarray(self.bin_edges))
        return np.asarray(self.counts) / (self.total_samples * widths) * self.volume_estimate

    def sup_distance(self, density: PLDensity) -> float:
        """Max over bins of |estimate - exact bin average of ``density``|."""
        est = self.densities()
        worst = 0.0
        for i, (lo, hi) in enumerate(zip(self.bin_edges, self.bin_edges[1:])):
            lo_q, hi_q = Fraction(lo), Fraction(hi)
            exact = float(density.integral_between(lo_q, hi_q) / (hi_q - lo_q))
            worst = max(worst, abs(est[i] - exact))
        return worst

    def to_csv(self) -> str:
        out = io.StringIO()
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(["bin_left", "bin_right", "count", "density_estimate"])
        for lo, hi, c, d in zip(self.bin_edges, self.bin_edges[1:], self.counts, self.densities()):
            writer.writerow([repr(float(lo)), repr(float(hi)), c, repr(float(d))])
        return out.getvalue()

    def to_record(self) -> dict:
        return {"bin_edges": [float(e) for e in self.bin_edges], "counts": list(self.counts),
                "total_samples": self.total_samples, "volume_estimate": self.volume_estimate}


_GRID_BITS = 26
_CHUNK = 1 << 17


def _integer_membership(P: Polytope, lo, hi):
    """Facets rewritten on the integer sample grid ``x = lo + (hi - lo) k / 2^B``.

    ``a . x <= b`` becomes ``c . k <= R`` with integer ``c`` and ``R``; since
    ``c . k`` is an integer, flooring the right-hand side is exact.
    """
    scale = 1 << _GRID_BITS
    rows, rhs = [], []
    for a, b in P.facets:
        coef = [Fraction(ai) * (h - l) for ai, h, l in zip(a, hi, lo)]
        r = (b - linalg.dot(a, lo)) * scale
        den = lcm(*(c.denominator for c in coef), r.denominator)
        rows.append([int(c * den) for c in coef])
        rhs.append((r * den).numerator // (r * den).denominator)
    bound = max(abs(c) for row in rows for c in row) * scale * len(lo)
    dtype = np.int64 if bound < (1 << 62) and max(abs(r) for r in rhs) < (1 << 62) else object
    return np.array(rows, dtype=dtype), np.array(rhs, dtype=dtype)


def mc_pushforward(P: Polytope, X, samples: int, bins: int, seed: int) -> Histogram:
    """Rejection-sample ``P`` in its bounding box and histogram ``<x, X>``.

    Chunks draw from child seeds ``SeedSequence(seed, spawn_key=(i,))`` and
    are consumed in order, so the result depends only on the arguments.
    """
    if samples < 10_000:
        raise ValueError("samples must be at least 10^4")
    if bins < 10:
        raise ValueError("bins must be at least 10")
    n = P.dimension
    X = _as_direction(X, n)
    lo, hi = P.bounding_box()
    rows, rhs = _integer_membership(P, lo, hi)
    lo_f = np.array([float(x) for x in lo])
    width_f = np.array([float(h - l) for h, l in zip(hi, lo)])
    box_volume = float(np.prod([float(h - l) for h, l in zip(hi, lo)]))
    heights = [linalg.dot(v, X) for v in P.vertices]
    tmin, tmax = float(min(heights)), float(max(heights))

    accepted, drawn, chunk_id = [], 0, 0
    need = samples
    while need > 0:
        rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(chunk_id,))))
        k = rng.integers(0, 1 << _GRID_BITS, size=(_CHUNK, n), dtype=np.int64)
        if rows.dtype == object:
            k = k.astype(object)
        inside = np.all(k @ rows.T <= rhs, axis=1)
        idx = np.flatnonzero(inside)
        if chunk_id == 0 and len(idx) < 1e-3 * _CHUNK:
            raise ValueError("degenerate polytope for sampling: acceptance rate below 1e-3")
        if len(idx) >= need:
            drawn += int(idx[need - 1]) + 1
            idx = idx[:need]
        else:
            drawn += _CHUNK
        pts = lo_f + width_f * (k[idx].astype(np.float64) / float(1 << _GRID_BITS))
        accepted.append(pts @ np.array(X, dtype=np.float64))
        need -= len(idx)
        chunk_id += 1
    t = np.clip(np.concatenate(accepted), tmin, tmax)
    edges = np.linspace(tmin, tmax, bins + 1)
    counts, _ = np.histogram(t, bins=edges)
    volume = box_volume * samples / drawn
    return Histogram(tuple(float(e) for e in edges), tuple(int(c) for c in counts), samples, volume)


def _edge_directions(P: Polytope, i):
    vs = P.vertices
    v, prev, nxt = vs[i], vs[i - 1], vs[(i + 1) % len(vs)]
    return primitive_integer_vector(linalg.sub(prev, v)), primitive_integer_vector(linalg.sub(nxt, v))


def _lattice_length(p, q):
    u = primitive_integer_vector(linalg.sub(q, p))
    d = linalg.sub(q, p)
    i = next(j for j in range(len(u)) if u[j] != 0)
    return d[i] / u[i]


def _extremal_edge_slope(P: Polytope, ia, ib, X, upward: bool) -> Fraction:
    """Rate of change of the slice density moving off an extremal edge ``ia-ib``.

    The slice endpoints move along the other edges at ``a`` and ``b`` with unit
    speed in level, so the slice vector is ``(b - a) + tau delta``; measured in
    units of ``rot(X)`` its length changes at rate ``sign . coefficient``.
    """
    vs = P.vertices
    a, b = vs[ia], vs[ib]
    ua = [u for u in _edge_directions(P, ia) if linalg.dot(u, X) != 0]
    ub = [u for u in _edge_directions(P, ib) if linalg.dot(u, X) != 0]
    ua, ub = ua[0], ub[0]
    ha, hb = linalg.dot(ua, X), linalg.dot(ub, X)
    delta = linalg.sub(linalg.scale(Fraction(1) / abs(hb), ub), linalg.scale(Fraction(1) / abs(ha), ua))
    w = (-X[1], X[0])
    ww = linalg.dot(w, w)
    s0 = linalg.dot(linalg.sub(b, a), w) / ww
    c = linalg.dot(delta, w) / ww
    rate = c if s0 > 0 else -c
    return rate if upward else -rate


def delzant_to_s1data(P: Polytope, X) -> S1FixedPointData:
    """Fixed-point data of the circle ``X`` acting on the toric 4-orbifold of ``P``.

    Vertices are fixed points with weights ``<u_1, X>``, ``<u_2, X>`` for the
    primitive edge vectors ``u_i`` and order ``|det(u_1, u_2)|``; an edge on
    which ``<., X>`` is constant is a fixed surface (area = lattice length).
    Weights are listed in increasing order.
    """
    if P.dimension != 2:
        raise ValueError("delzant_to_s1data needs a polygon")
    X = _as_direction(X, 2)
    vs = P.vertices
    m = len(vs)
    heights = [linalg.dot(v, X) for v in vs]
    hmin, hmax = min(heights), max(heights)

    def vertex_data(i):
        u1, u2 = _edge_directions(P, i)
        w1, w2 = sorted(int(linalg.dot(u, X)) for u in (u1, u2))
        return w1, w2, abs(int(linalg.det([u1, u2])))

    def extremal(level, upward):
        idx = [i for i in range(m) if heights[i] == level]
        if len(idx) == 1:
            w1, w2, d = vertex_data(idx[0])
            return ExtremalSet.isolated(level, w1, w2, d)
        ia, ib = idx
        if (ib - ia) % m != 1:
            ia, ib = ib, ia
        slope = _extremal_edge_slope(P, ia, ib, X, upward)
        area = _lattice_length(vs[ia], vs[ib])
        # minimum: slope = -euler_integral; maximum: incoming slope = euler_integral
        return ExtremalSet.surface(level, area, -slope if upward else slope)

    interior = []
    for i in range(m):
        if hmin < heights[i] < hmax:
            w1, w2, d = vertex_data(i)
            if w1 == 0 or w2 == 0:
                raise ValueError(f"non-generic direction: edge at vertex {vs[i]} is level for {X}")
            interior.append(InteriorFixedPoint(heights[i], w1, w2, d))
    return S1FixedPointData(extremal(hmin, True), extremal(hmax, False), tuple(interior))
