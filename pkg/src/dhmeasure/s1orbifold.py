"""DH densities of closed 4-dimensional Hamiltonian circle orbifolds.

The density is built from fixed-point data alone:

* between critical levels it is affine, with slope ``-(integral of the Euler
  class of the level-set circle fibration)``;
* at an interior critical level ``c`` the slope jumps by
  ``sum_p 1 / (d_p p_1 p_2)`` over the isolated fixed points at ``c``, with
  ``p_1, p_2`` the tangent weights and ``d_p`` the order of the local group.

The jump is the coefficient of ``lambda**-2`` in the orbifold localization
formula applied to the symplectic cut of ``phi^-1[c - eps, c + eps]``; the
equivariant parameter itself never appears at runtime.  Interior points have
``p_1 p_2 < 0``, so every jump is negative and the density is log-concave.

Extremal sets fix the initial and final data.  A fixed surface contributes
its area as the density value and ``-+euler_integral`` as the slope; an
isolated extremum starts (ends) at zero with slope ``+-1/(d p_1 p_2)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import groupby
from typing import Optional

from .pwlinear import LogConcavityVerdict, PLDensity, is_log_concave
from .rational import format_rational, parse_rational

ISOLATED_POINT = "isolated_point"
FIXED_SURFACE = "fixed_surface"


class InconsistentDataError(ValueError):
    """Fixed-point data that no closed orbifold can realize."""


class ClosureError(InconsistentDataError):
    """The density built from the minimum does not close up at the maximum."""

    def __init__(self, message, expected_slope=None, computed_slope=None, residual=None):
        super().__init__(message)
        self.expected_slope = expected_slope
        self.computed_slope = computed_slope
        self.residual = residual


def _check_int(name, value, nonzero=False, positive=False):
    if not isinstance(value, int) or isinstance(value, bool):
        raise ValueError(f"{name} must be an integer, got {value!r}")
    if nonzero and value == 0:
        raise ValueError(f"{name} must be nonzero")
    if positive and value < 1:
        raise ValueError(f"{name} must be positive")


@dataclass(frozen=True)
class InteriorFixedPoint:
    level: Fraction
    weight1: int
    weight2: int
    order: int = 1

    def __post_init__(self):
        object.__setattr__(self, "level", Fraction(self.level))
        _check_int("weight1", self.weight1, nonzero=True)
        _check_int("weight2", self.weight2, nonzero=True)
        _check_int("order", self.order, positive=True)
        if self.weight1 * self.weight2 >= 0:
            raise ValueError(
                f"interior fixed point at level {self.level} needs weights of opposite sign, "
                f"got ({self.weight1}, {self.weight2})"
            )

    @property
    def contribution(self) -> Fraction:
        return Fraction(1, self.order * self.weight1 * self.weight2)

    def to_record(self) -> dict:
        return {"level": format_rational(self.level), "weight1": self.weight1,
                "weight2": self.weight2, "order": self.order}


@dataclass(frozen=True)
class ExtremalSet:
    kind: str
    level: Fraction
    weight1: Optional[int] = None
    weight2: Optional[int] = None
    order: Optional[int] = None
    area: Optional[Fraction] = None
    euler_integral: Optional[Fraction] = None

    def __post_init__(self):
        object.__setattr__(self, "level", Fraction(self.level))
        if self.kind == ISOLATED_POINT:
            _check_int("weight1", self.weight1, nonzero=True)
            _check_int("weight2", self.weight2, nonzero=True)
            _check_int("order", self.order, positive=True)
            if self.weight1 * self.weight2 <= 0:
                raise ValueError("an isolated extremum needs weights of equal sign")
            if self.area is not None or self.euler_integral is not None:
                raise ValueError("an isolated extremum has no area or euler_integral")
        elif self.kind == FIXED_SURFACE:
            if self.area is None or self.euler_integral is None:
                raise ValueError("a fixed surface needs area and euler_integral")
            object.__setattr__(self, "area", Fraction(self.area))
            object.__setattr__(self, "euler_integral", Fraction(self.euler_integral))
            if self.area <= 0:
                raise ValueError("fixed surface area must be positive")
            if any(x is not None for x in (self.weight1, self.weight2, self.order)):
                raise ValueError("a fixed surface has no weights or order")
        else:
            raise ValueError(f"unknown extremal kind {self.kind!r}")

    @classmethod
    def isolated(cls, level, weight1, weight2, order=1) -> "ExtremalSet":
        return cls(ISOLATED_POINT, level, weight1=weight1, weight2=weight2, order=order)

    @classmethod
    def surface(cls, level, area, euler_integral) -> "ExtremalSet":
        return cls(FIXED_SURFACE, level, area=area, euler_integral=euler_integral)

    @property
    def is_isolated(self) -> bool:
        return self.kind == ISOLATED_POINT

    @property
    def value(self) -> Fraction:
        """DH value at the extremal level."""
        return Fraction(0) if self.is_isolated else self.area

    def local_slope(self) -> Fraction:
        """Slope of the density just inside the extremum.

        Isolated points: ``1/(d p1 p2)``, positive at a minimum (both weights
        positive) and then mirrored to ``-1/(d p1 p2)`` at a maximum by the
        caller. Fixed surfaces: ``-euler_integral`` (minimum convention).
        """
        if self.is_isolated:
            return Fraction(1, self.order * self.weight1 * self.weight2)
        return -self.euler_integral

    def to_record(self) -> dict:
        rec = {"kind": self.kind, "level": format_rational(self.level)}
        if self.is_isolated:
            rec.update(weight1=self.weight1, weight2=self.weight2, order=self.order)
        else:
            rec.update(area=format_rational(self.area),
                       euler_integral=format_rational(self.euler_integral))
        return rec

    @classmethod
    def from_record(cls, rec: dict) -> "ExtremalSet":
        kind = rec["kind"]
        level = parse_rational(rec["level"])
        if kind == ISOLATED_POINT:
            return cls.isolated(level, rec["weight1"], rec["weight2"], rec.get("order", 1))
        if kind == FIXED_SURFACE:
            return cls.surface(level, parse_rational(rec["area"]),
                               parse_rational(rec["euler_integral"]))
        raise ValueError(f"unknown extremal kind {kind!r}")


@dataclass(frozen=True)
class S1FixedPointData:
    min: ExtremalSet
    max: ExtremalSet
    interior: tuple = field(default=())

    def __post_init__(self):
        pts = tuple(sorted(self.interior, key=lambda p: p.level))
        object.__setattr__(self, "interior", pts)
        if self.min.level >= self.max.level:
            raise ValueError("min.level must be below max.level")
        if self.min.is_isolated and (self.min.weight1 < 0 or self.min.weight2 < 0):
            raise ValueError("an isolated minimum has positive weights")
        if self.max.is_isolated and (self.max.weight1 > 0 or self.max.weight2 > 0):
            raise ValueError("an isolated maximum has negative weights")
        for p in pts:
            if not self.min.level < p.level < self.max.level:
                raise ValueError(f"interior level {p.level} outside ({self.min.level}, {self.max.level})")

    def critical_levels(self) -> list:
        """Distinct interior critical levels with their points, in order."""
        return [(lvl, list(grp)) for lvl, grp in groupby(self.interior, key=lambda p: p.level)]

    def to_record(self) -> dict:
        return {"min": self.min.to_record(), "max": self.max.to_record(),
                "interior": [p.to_record() for p in self.interior]}

    @classmethod
    def from_record(cls, rec: dict) -> "S1FixedPointData":
        if not isinstance(rec, dict):
            raise ValueError("fixed-point data must be a record with min, max, interior")
        try:
            interior = tuple(
                InteriorFixedPoint(parse_rational(p["level"]), p["weight1"], p["weight2"],
                                   p.get("order", 1))
                for p in rec.get("interior", [])
            )
            return cls(ExtremalSet.from_record(rec["min"]), ExtremalSet.from_record(rec["max"]),
                       interior)
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed fixed-point record: missing or bad field {exc}") from exc


def wall_crossing_jump(points) -> Fraction:
    """Jump of DH' across a critical level: ``sum 1/(d_p p1 p2)`` (always < 0)."""
    points = list(points)
    if not points:
        raise ValueError("wall_crossing_jump needs at least one fixed point")
    levels = {p.level for p in points}
    if len(levels) > 1:
        raise ValueError(f"fixed points at mixed levels {sorted(levels)}")
    return sum((p.contribution for p in points), Fraction(0))


def _telescope(data: S1FixedPointData):
    """Breakpoints, values and slopes by integrating slopes from the minimum.

    No positivity checks: the caller decides what to do with the result.
    """
    levels = [data.min.level]
    values = [data.min.value]
    slopes = []
    slope = data.min.local_slope()
    for level, pts in data.critical_levels():
        values.append(values[-1] + slope * (level - levels[-1]))
        levels.append(level)
        slopes.append(slope)
        slope += wall_crossing_jump(pts)
    values.append(values[-1] + slope * (data.max.level - levels[-1]))
    levels.append(data.max.level)
    slopes.append(slope)
    return levels, values, slopes


def build_dh(data: S1FixedPointData) -> PLDensity:
    """The DH density on ``[min.level, max.level]``."""
    levels, values, _ = _telescope(data)
    for t, v in zip(levels[1:-1], values[1:-1]):
        if v <= 0:
            raise InconsistentDataError(
                f"inconsistent data (negative density): value {v} at level {t}"
            )
    if values[-1] < 0:
        raise InconsistentDataError(
            f"inconsistent data (negative density): value {values[-1]} at level {levels[-1]}"
        )
    return PLDensity(tuple(levels), tuple(values))


@dataclass(frozen=True)
class ClosureReport:
    residual: Fraction
    expected_slope: Fraction
    computed_slope: Fraction

    @property
    def slope_ok(self) -> bool:
        return self.expected_slope == self.computed_slope

    @property
    def consistent(self) -> bool:
        return self.residual == 0 and self.slope_ok


def closure_report(data: S1FixedPointData) -> ClosureReport:
    """Value residual and terminal slope comparison at the maximum."""
    _, values, slopes = _telescope(data)
    residual = values[-1] - data.max.value
    if data.max.is_isolated:
        expected = -data.max.local_slope()
    else:
        expected = data.max.euler_integral
    return ClosureReport(residual, expected, slopes[-1])


def closure_check(data: S1FixedPointData) -> Fraction:
    """Residual ``built(max.level) - declared terminal value``; zero iff consistent.

    Raises ``ClosureError`` when the incoming slope at the maximum disagrees
    with its local model; the error also carries the value residual.
    """
    rep = closure_report(data)
    if not rep.slope_ok:
        raise ClosureError(
            f"localization closure violated: slope (expected {rep.expected_slope}, "
            f"computed {rep.computed_slope}; value residual {rep.residual})",
            expected_slope=rep.expected_slope,
            computed_slope=rep.computed_slope,
            residual=rep.residual,
        )
    return rep.residual


def is_log_concave_theorem_check(data: S1FixedPointData) -> LogConcavityVerdict:
    residual = closure_check(data)
    if residual != 0:
        raise ClosureError(f"closure residual {residual} is nonzero", residual=residual)
    return is_log_concave(build_dh(data))


def density_report(data: S1FixedPointData) -> list:
    """Per critical level: level, number of points and slope jump."""
    return [
        {"level": format_rational(level), "points": len(pts),
         "jump": format_rational(wall_crossing_jump(pts))}
        for level, pts in data.critical_levels()
    ]
