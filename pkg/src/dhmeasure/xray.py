"""X-rays of complexity-one torus actions and transversal line selection.

An x-ray is the moment image of a ``T^{n-1}``-action on ``M^{2n}`` together with
the images of the orbit-type strata ("faces").  A face of dimension ``m`` is
locally an affine translate of the annihilator of its stabilizer algebra, so a
face here carries its direction space explicitly (``basis``).

To reduce to a circle action on a 4-dimensional reduced space one needs a
rational line through two regular values that avoids every face of dimension
``<= n - 3`` and crosses the open ``(n - 2)``-faces (walls) transversally.
``select_line`` finds such a line by rational perturbation, and
``regularity_check`` re-verifies the rank condition that makes the projected
point a regular value.  ``split_subtorus`` splits off the circle generated by
the line direction with an integral complement.

Points live in ``n - 1`` coordinates throughout (``ambient_dim``).
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from functools import cached_property
from fractions import Fraction
from math import floor
from typing import NamedTuple, Optional

from . import linalg
from .lattice import unimodular_completion
from .polytope import Polytope
from .rational import format_rational, is_primitive, parse_rational, primitive_integer_vector

DISJOINT = "disjoint"
TRANSVERSAL = "transversal_crossing"
NON_TRANSVERSAL = "non_transversal"

# initial perturbation grid step is at most epsilon / 2**_GRID_OFFSET
_GRID_OFFSET = 8
# rejection draws per endpoint; a box corner keeps 1/2**(n-1) of the ball, and
# the ball keeps about half of its bounding cube in dimension 3
_ENDPOINT_DRAWS = 64


class SelectionFailed(RuntimeError):
    pass


@dataclass(frozen=True, eq=False)
class Face:
    """Closed face of an x-ray: carrier vertices plus its direction space."""

    dim: int
    basis: tuple
    vertices: tuple
    label: str

    def __post_init__(self):
        verts = tuple(tuple(Fraction(x) for x in v) for v in self.vertices)
        basis = tuple(tuple(Fraction(x) for x in b) for b in self.basis)
        object.__setattr__(self, "vertices", verts)
        object.__setattr__(self, "basis", basis)
        if not verts:
            raise ValueError(f"face {self.label!r} has no vertices")
        n = len(verts[0])
        if any(len(v) != n for v in verts) or any(len(b) != n for b in basis):
            raise ValueError(f"face {self.label!r} mixes coordinate dimensions")
        if len(basis) != self.dim or (self.dim and linalg.rank(basis) != self.dim):
            raise ValueError(f"face {self.label!r}: basis must have {self.dim} independent vectors")
        diffs = [linalg.sub(v, verts[0]) for v in verts[1:]]
        if (linalg.rank(diffs) if diffs else 0) != self.dim:
            raise ValueError(f"face {self.label!r}: carrier does not span dimension {self.dim}")
        if self.dim and linalg.rank(list(basis) + diffs) != self.dim:
            raise ValueError(f"face {self.label!r}: vertices leave the affine span of the basis")

    @classmethod
    def from_vertices(cls, vertices, label, dim=None) -> "Face":
        verts = [tuple(Fraction(x) for x in v) for v in vertices]
        diffs = [linalg.sub(v, verts[0]) for v in verts[1:]]
        if diffs:
            m, piv = linalg.rref(diffs)
            basis = [tuple(row) for row in m[:len(piv)]]
        else:
            basis = []
        return cls(len(basis) if dim is None else dim, tuple(basis), tuple(verts), label)

    @property
    def ambient_dim(self) -> int:
        return len(self.vertices[0])

    @property
    def origin(self):
        return self.vertices[0]

    @cached_property
    def _frame(self):
        """Normals of the affine hull, pivot columns and the inverse on them."""
        n = self.ambient_dim
        if self.dim == 0:
            return [tuple(Fraction(int(i == j)) for j in range(n)) for i in range(n)], [], []
        _, pivots = linalg.rref(self.basis)
        square = [tuple(b[c] for b in self.basis) for c in pivots]
        return linalg.nullspace(list(self.basis)), pivots, linalg.inverse(square)

    def in_direction_space(self, vec) -> bool:
        normals, _, _ = self._frame
        return self.dim > 0 and all(linalg.dot(a, vec) == 0 for a in normals)

    def local_coordinates(self, point) -> Optional[tuple]:
        """Coordinates in ``origin + span(basis)``, or None off the affine hull."""
        rhs = linalg.sub(point, self.origin)
        normals, pivots, inv = self._frame
        if any(linalg.dot(a, rhs) != 0 for a in normals):
            return None
        picked = [rhs[c] for c in pivots]
        return tuple(linalg.dot(row, picked) for row in inv)

    def _local_carrier(self):
        if "_carrier" not in self.__dict__:
            local = [self.local_coordinates(v) for v in self.vertices]
            if self.dim >= 2:
                carrier = Polytope(tuple(local))
            elif self.dim == 1:
                carrier = (min(p[0] for p in local), max(p[0] for p in local))
            else:
                carrier = None
            object.__setattr__(self, "_carrier", carrier)
        return self.__dict__["_carrier"]

    def contains_local(self, coords, relative_interior=True) -> bool:
        carrier = self._local_carrier()
        if self.dim == 0:
            return True
        if self.dim == 1:
            lo, hi = carrier
            return lo < coords[0] < hi if relative_interior else lo <= coords[0] <= hi
        return carrier.contains(coords, strict=relative_interior)

    def contains(self, point, relative_interior=False) -> bool:
        coords = self.local_coordinates(tuple(Fraction(x) for x in point))
        return coords is not None and self.contains_local(coords, relative_interior)

    def local_facets(self):
        """Half-spaces of the carrier in local coordinates (for ``dim >= 2``)."""
        return self._local_carrier().facets

    def to_record(self) -> dict:
        return {
            "dim": self.dim,
            "basis": [[format_rational(x) for x in b] for b in self.basis],
            "vertices": [[format_rational(x) for x in v] for v in self.vertices],
            "label": self.label,
        }

    @classmethod
    def from_record(cls, rec: dict) -> "Face":
        verts = [tuple(parse_rational(x) for x in v) for v in rec["vertices"]]
        if "basis" in rec:
            basis = [tuple(parse_rational(x) for x in b) for b in rec["basis"]]
            return cls(rec["dim"], tuple(basis), tuple(verts), str(rec["label"]))
        return cls.from_vertices(verts, str(rec["label"]), rec.get("dim"))


@dataclass(frozen=True, eq=False)
class XRay:
    ambient_dim: int
    moment_image: Polytope
    faces: tuple

    def __post_init__(self):
        n1 = self.ambient_dim
        if self.moment_image.dimension != n1:
            raise ValueError("moment image must be full-dimensional in the ambient space")
        faces = list(self.faces)
        top = [f for f in faces if f.dim == n1]
        if not top:
            faces.append(Face.from_vertices(self.moment_image.vertices, "moment_image"))
        elif len(top) > 1:
            raise ValueError("the moment image must be the unique top-dimensional face")
        labels = [f.label for f in faces]
        if len(set(labels)) != len(labels):
            raise ValueError("face labels must be unique")
        for f in faces:
            if f.ambient_dim != n1 or f.dim > n1:
                raise ValueError(f"face {f.label!r} does not live in {n1} coordinates")
            if not all(self.moment_image.contains(v) for v in f.vertices):
                raise ValueError(f"face {f.label!r} is not contained in the moment image")
        object.__setattr__(self, "faces", tuple(faces))

    def face(self, label) -> Face:
        return next(f for f in self.faces if f.label == label)

    def singular_faces(self):
        """Faces of dimension ``<= ambient_dim - 1`` (everything except the image)."""
        return [f for f in self.faces if f.dim < self.ambient_dim]

    def is_regular_value(self, point) -> bool:
        return self.moment_image.contains(point, strict=True) and not any(
            f.contains(point) for f in self.singular_faces()
        )

    def to_record(self) -> dict:
        return {"ambient_dim": self.ambient_dim,
                "moment_image": self.moment_image.to_record(),
                "faces": [f.to_record() for f in self.faces]}

    @classmethod
    def from_record(cls, rec: dict) -> "XRay":
        try:
            image = Polytope.from_record(rec["moment_image"])
            faces = tuple(Face.from_record(f) for f in rec.get("faces", []))
            return cls(int(rec["ambient_dim"]), image, faces)
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed x-ray record: {exc}") from exc


@dataclass(frozen=True)
class Classification:
    kind: str
    point: Optional[tuple] = None
    parameter: Optional[Fraction] = None


def classify_line_vs_face(base, direction, face: Face) -> Classification:
    """Position of the line ``base + s direction`` relative to the open face."""
    base = tuple(Fraction(x) for x in base)
    direction = tuple(Fraction(x) for x in direction)
    if all(x == 0 for x in direction):
        raise ValueError("line direction must be nonzero")
    rhs = linalg.sub(base, face.origin)
    if face.in_direction_space(direction):
        lam0 = face.local_coordinates(base)
        if lam0 is None:
            return Classification(DISJOINT)
        if face.dim == 1:
            return Classification(NON_TRANSVERSAL)
        mu = face.local_coordinates(linalg.add(face.origin, direction))
        # open interval of s with a . (lam0 + s mu) < b for every carrier facet
        lo, hi = None, None
        for a, b in face.local_facets():
            am, slack = linalg.dot(a, mu), b - linalg.dot(a, lam0)
            if am == 0:
                if slack <= 0:
                    return Classification(DISJOINT)
            elif am > 0:
                hi = slack / am if hi is None else min(hi, slack / am)
            else:
                lo = slack / am if lo is None else max(lo, slack / am)
        if lo is not None and hi is not None and lo >= hi:
            return Classification(DISJOINT)
        return Classification(NON_TRANSVERSAL)
    # the direction leaves the face's plane, so at most one parameter s hits it
    normals, _, _ = face._frame
    a = next(a for a in normals if linalg.dot(a, direction) != 0)
    s = -linalg.dot(a, rhs) / linalg.dot(a, direction)
    point = linalg.add(base, linalg.scale(s, direction))
    lam = face.local_coordinates(point)
    if lam is None:
        return Classification(DISJOINT)
    if not face.contains_local(lam, relative_interior=True):
        return Classification(DISJOINT)
    return Classification(TRANSVERSAL, point, s)


@dataclass(frozen=True)
class LineSelection:
    xi0: tuple
    xi1: tuple
    direction: tuple
    crossings: tuple
    certificate: dict = field(hash=False)
    attempts: int = 1
    grid_denominator: int = 1

    def to_record(self) -> dict:
        return {
            "xi0": [format_rational(x) for x in self.xi0],
            "xi1": [format_rational(x) for x in self.xi1],
            "direction": list(self.direction),
            "crossings": [{"face": label, "point": [format_rational(x) for x in p]}
                          for label, p in self.crossings],
            "certificate": dict(self.certificate),
            "attempts": self.attempts,
            "grid_denominator": self.grid_denominator,
        }


def _examine_line(xray: XRay, xi0, xi1):
    """Certificate and crossings for the line through ``xi0, xi1``, or None if unusable."""
    n1 = xray.ambient_dim
    if xi0 == xi1:
        return None
    direction = linalg.sub(xi1, xi0)
    certificate, crossings = {}, []
    for f in xray.singular_faces():
        cls = classify_line_vs_face(xi0, direction, f)
        if cls.kind == NON_TRANSVERSAL:
            return None
        if cls.kind == TRANSVERSAL:
            if f.dim <= n1 - 2:
                return None
            crossings.append((cls.parameter, f.label, cls.point))
        certificate[f.label] = cls.kind
    crossings.sort(key=lambda c: (c[0], c[1]))
    return certificate, tuple((label, point) for _, label, point in crossings)


def select_line(xray: XRay, x0, x1, epsilon, max_attempts: int = 16, seed: int = 0) -> LineSelection:
    """Rational line through regular values near ``x0`` and ``x1``.

    ``xi_i = x_i + delta_i`` with ``delta_i`` on the grid ``2^-k Z^{n-1}`` inside
    the closed Euclidean ball of radius ``epsilon``; every retry halves the grid
    step.
    The returned line meets walls (faces of dimension ``n - 2``) only
    transversally and misses every lower-dimensional face.
    """
    x0 = tuple(Fraction(x) for x in x0)
    x1 = tuple(Fraction(x) for x in x1)
    epsilon = Fraction(epsilon)
    n1 = xray.ambient_dim
    if len(x0) != n1 or len(x1) != n1:
        raise ValueError(f"points must have {n1} coordinates")
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    if x0 == x1:
        raise ValueError("coincident endpoints")
    if max_attempts < 1:
        raise ValueError("max_attempts must be >= 1")
    for p in (x0, x1):
        if not xray.moment_image.contains(p):
            raise ValueError(f"point {tuple(map(str, p))} lies outside the moment image")

    rng = random.Random(seed)
    k = 0
    while Fraction(1, 2 ** k) > epsilon / 2 ** _GRID_OFFSET:
        k += 1
    for attempt in range(1, max_attempts + 1):
        den = 2 ** k
        xi0 = _regular_perturbation(xray, x0, epsilon, den, rng)
        xi1 = _regular_perturbation(xray, x1, epsilon, den, rng)
        found = None if xi0 is None or xi1 is None else _examine_line(xray, xi0, xi1)
        if found is not None:
            certificate, crossings = found
            direction = primitive_integer_vector(linalg.sub(xi1, xi0))
            return LineSelection(xi0, xi1, direction, crossings, certificate, attempt, den)
        k += 1
    raise SelectionFailed(
        f"selection failed after {max_attempts} attempts; finest grid tried 1/{2 ** (k - 1)}"
    )


def _regular_perturbation(xray: XRay, x, epsilon, den, rng, draws=_ENDPOINT_DRAWS):
    """Grid point of the Euclidean ball around ``x`` that is a regular value, if found."""
    reach = floor(epsilon * den)
    bound = (epsilon * den) ** 2
    for _ in range(draws):
        offset = [rng.randint(-reach, reach) for _ in x]
        if sum(o * o for o in offset) > bound:
            continue
        xi = tuple(c + Fraction(o, den) for c, o in zip(x, offset))
        if xray.is_regular_value(xi):
            return xi
    return None


def regularity_check(selection: LineSelection, xray: XRay) -> bool:
    """Independent re-check of the rank condition behind the regular-value argument.

    Every crossed face must be a wall whose direction space does not contain
    the line direction; the direction must be primitive, integral and parallel
    to ``xi1 - xi0``.
    """
    n1 = xray.ambient_dim
    direction = tuple(selection.direction)
    if not is_primitive(direction) or len(direction) != n1:
        return False
    if linalg.rank([direction, linalg.sub(selection.xi1, selection.xi0)]) != 1:
        return False
    for label, point in selection.crossings:
        try:
            face = xray.face(label)
        except StopIteration:
            return False
        if face.dim != n1 - 1:
            return False
        if linalg.rank(list(face.basis) + [direction]) != n1:
            return False
        if not face.contains(point, relative_interior=True):
            return False
    return True


class SubtorusSplit(NamedTuple):
    kernel: tuple
    complement: list
    determinant: int


def split_subtorus(direction) -> SubtorusSplit:
    """Circle generated by ``direction`` plus an integral complementary subtorus.

    The complement completes ``direction`` to a basis of the integer lattice;
    ``determinant`` (always +-1) is the certificate.
    """
    direction = tuple(direction)
    if not is_primitive(direction):
        raise ValueError(f"direction {direction} must be a primitive integer vector")
    if len(direction) < 2:
        raise ValueError("need at least two coordinates to split off a circle")
    kernel, complement = unimodular_completion(direction)
    det = int(linalg.det([kernel] + complement))
    return SubtorusSplit(kernel, complement, det)
