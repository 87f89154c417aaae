"""Continuous piecewise-linear densities on an interval, in exact arithmetic.

A DH density of a circle action on a 4-dimensional space is affine between
critical levels, so it is stored as its breakpoints and the values there.

Log-concavity lemma
-------------------
Let f be continuous, piecewise linear and positive on the open support.  On an
affine piece, ``(log f)'' = (f f'' - f'^2) / f^2 = -f'^2 / f^2 <= 0`` because
``f'' = 0``, so log f is concave on every piece.  At a breakpoint ``c`` with
``f(c) > 0`` the derivative of log f jumps by ``(f'(c+) - f'(c-)) / f(c)``,
which has the sign of the slope jump of f.  Hence log f is concave on the
support iff every interior slope jump of f is <= 0, i.e. iff f is concave
there.  ``is_log_concave`` implements exactly this test;
``pointwise_midpoint_check`` tests the defining inequality directly and serves
as the independent oracle.
"""

from __future__ import annotations

import bisect
import csv
import io
import random
from dataclasses import dataclass, field
from fractions import Fraction
from math import lcm
from typing import Optional, Sequence

from .rational import format_rational, parse_rational


@dataclass(frozen=True, eq=False)
class PLDensity:
    """Continuous, nonnegative, piecewise-linear function on ``[t_0, t_k]``.

    Values may vanish only at the two endpoints. Collinear interior
    breakpoints are accepted; equality compares canonical forms.
    """

    breakpoints: tuple
    values: tuple

    def __post_init__(self):
        bps = tuple(Fraction(b) for b in self.breakpoints)
        vals = tuple(Fraction(v) for v in self.values)
        object.__setattr__(self, "breakpoints", bps)
        object.__setattr__(self, "values", vals)
        if len(bps) < 2:
            raise ValueError("a density needs at least two breakpoints")
        if len(vals) != len(bps):
            raise ValueError("breakpoints and values differ in length")
        if any(b >= a for a, b in zip(bps[1:], bps)):
            raise ValueError("breakpoints must be strictly increasing")
        if vals[0] < 0 or vals[-1] < 0:
            raise ValueError("density values must be nonnegative")
        for t, v in zip(bps[1:-1], vals[1:-1]):
            if v <= 0:
                raise ValueError(
                    f"density must be positive on the interior of its support (value {v} at {t})"
                )

    @property
    def support(self):
        return self.breakpoints[0], self.breakpoints[-1]

    def slopes(self):
        """Slope on each piece, left to right."""
        b, v = self.breakpoints, self.values
        return tuple((v[i + 1] - v[i]) / (b[i + 1] - b[i]) for i in range(len(b) - 1))

    def canonical(self) -> "PLDensity":
        """Drop interior breakpoints where the slope does not change."""
        b, v = self.breakpoints, self.values
        s = self.slopes()
        keep = [0] + [i for i in range(1, len(b) - 1) if s[i - 1] != s[i]] + [len(b) - 1]
        if len(keep) == len(b):
            return self
        return PLDensity(tuple(b[i] for i in keep), tuple(v[i] for i in keep))

    def __eq__(self, other):
        if not isinstance(other, PLDensity):
            return NotImplemented
        a, b = self.canonical(), other.canonical()
        return a.breakpoints == b.breakpoints and a.values == b.values

    def __hash__(self):
        c = self.canonical()
        return hash((c.breakpoints, c.values))

    def __call__(self, t):
        return evaluate(self, t)

    def integral(self) -> Fraction:
        """Exact integral over the support (trapezoid rule is exact here)."""
        b, v = self.breakpoints, self.values
        return sum(((b[i + 1] - b[i]) * (v[i] + v[i + 1]) / 2 for i in range(len(b) - 1)), Fraction(0))

    def integral_between(self, lo, hi) -> Fraction:
        """Exact integral of the density (zero-extended) over ``[lo, hi]``."""
        lo, hi = Fraction(lo), Fraction(hi)
        if hi <= lo:
            return Fraction(0)
        a, z = self.support
        lo, hi = max(lo, a), min(hi, z)
        if hi <= lo:
            return Fraction(0)
        pts = [lo] + [t for t in self.breakpoints if lo < t < hi] + [hi]
        total = Fraction(0)
        for x, y in zip(pts, pts[1:]):
            mid = (x + y) / 2
            total += (y - x) * evaluate(self, mid)
        return total

    def reparametrize(self, factor) -> "PLDensity":
        """The density ``s -> f(s / factor)`` for a positive rational factor."""
        factor = Fraction(factor)
        if factor <= 0:
            raise ValueError("reparametrization factor must be positive")
        return PLDensity(tuple(b * factor for b in self.breakpoints), self.values)

    def to_record(self) -> dict:
        c = self.canonical()
        return {
            "breakpoints": [format_rational(b) for b in c.breakpoints],
            "values": [format_rational(v) for v in c.values],
        }

    @classmethod
    def from_record(cls, record: dict) -> "PLDensity":
        try:
            bps = [parse_rational(x) for x in record["breakpoints"]]
            vals = [parse_rational(x) for x in record["values"]]
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed density record: {exc}") from exc
        return cls(tuple(bps), tuple(vals))

    def to_csv(self) -> str:
        """Rows ``t, value, right_slope``; the last row has no right slope."""
        out = io.StringIO()
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(["t", "value", "right_slope"])
        slopes = self.slopes()
        for i, (t, v) in enumerate(zip(self.breakpoints, self.values)):
            right = format_rational(slopes[i]) if i < len(slopes) else ""
            writer.writerow([format_rational(t), format_rational(v), right])
        return out.getvalue()


@dataclass(frozen=True)
class SlopeJump:
    location: Fraction
    left_slope: Fraction
    right_slope: Fraction
    jump: Fraction

    def __post_init__(self):
        if self.jump != self.right_slope - self.left_slope:
            raise ValueError("jump must equal right_slope - left_slope")

    def to_record(self) -> dict:
        return {
            "location": format_rational(self.location),
            "left_slope": format_rational(self.left_slope),
            "right_slope": format_rational(self.right_slope),
            "jump": format_rational(self.jump),
        }


@dataclass(frozen=True)
class LogConcavityVerdict:
    is_log_concave: bool
    witness: Optional[SlopeJump] = None
    jumps: tuple = field(default=(), compare=False)

    def __post_init__(self):
        if not self.is_log_concave:
            if self.witness is None or self.witness.jump <= 0:
                raise ValueError("a negative verdict needs a witness with positive jump")

    def __bool__(self):
        return self.is_log_concave

    def to_record(self) -> dict:
        return {
            "is_log_concave": self.is_log_concave,
            "witness": None if self.witness is None else self.witness.to_record(),
        }


def evaluate(f: PLDensity, t) -> Fraction:
    """Linear interpolation on the support, zero outside."""
    t = Fraction(t)
    b, v = f.breakpoints, f.values
    if t < b[0] or t > b[-1]:
        return Fraction(0)
    i = bisect.bisect_right(b, t) - 1
    if i >= len(b) - 1:
        return v[-1]
    if t == b[i]:
        return v[i]
    return v[i] + (v[i + 1] - v[i]) * (t - b[i]) / (b[i + 1] - b[i])


def slope_jumps(f: PLDensity) -> list:
    """One ``SlopeJump`` per interior breakpoint, left to right."""
    s = f.slopes()
    return [
        SlopeJump(f.breakpoints[i], s[i - 1], s[i], s[i] - s[i - 1])
        for i in range(1, len(f.breakpoints) - 1)
    ]


def is_log_concave(f: PLDensity) -> LogConcavityVerdict:
    """Log-concavity on the support via the slope-jump lemma (module docstring)."""
    jumps = tuple(slope_jumps(f))
    for j, value in zip(jumps, f.values[1:-1]):
        if value > 0 and j.jump > 0:
            return LogConcavityVerdict(False, j, jumps)
    return LogConcavityVerdict(True, None, jumps)


def _int_pow_ge(lhs_base: Fraction, lhs_exp: int, rhs_terms: Sequence) -> bool:
    """Exact test of ``lhs_base**lhs_exp >= prod(b**e for b, e in rhs_terms)``."""
    ln, ld = lhs_base.numerator ** lhs_exp, lhs_base.denominator ** lhs_exp
    rn, rd = 1, 1
    for base, e in rhs_terms:
        rn *= base.numerator ** e
        rd *= base.denominator ** e
    return ln * rd >= rn * ld


def log_concave_at(f: PLDensity, x0, x1, t) -> bool:
    """Exact check of ``t log f(x1) + (1-t) log f(x0) <= log f(t x1 + (1-t) x0)``.

    With ``t = p/q`` this is ``f(x_t)^q >= f(x1)^p f(x0)^(q-p)``; a zero
    factor on the right (log = -inf) makes the inequality hold.
    """
    x0, x1, t = Fraction(x0), Fraction(x1), Fraction(t)
    if not 0 <= t <= 1:
        raise ValueError("t must lie in [0, 1]")
    p, q = t.numerator, t.denominator
    xt = t * x1 + (1 - t) * x0
    f0, f1, ft = evaluate(f, x0), evaluate(f, x1), evaluate(f, xt)
    terms = [(f1, p), (f0, q - p)]
    if any(base == 0 and e > 0 for base, e in terms):
        return True
    return _int_pow_ge(ft, q, terms)


def pointwise_midpoint_check(f: PLDensity, trials: int, seed: int, grid: int = 4096,
                             max_t_denominator: int = 16) -> bool:
    """Random exact test of the log-concavity inequality on the support.

    Points are drawn from a grid of ``grid + 1`` rationals across the support
    and ``t`` from fractions with denominator at most ``max_t_denominator``.
    Every breakpoint and every sampled ``x0``, ``x1`` and ``x_t`` is an integer
    after scaling by a common multiple ``S`` of all denominators involved, so
    the trials run in integer arithmetic; see ``log_concave_at`` for the
    inequality itself.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    a, z = f.support
    if a == z:
        raise ValueError("empty interior")
    width = z - a
    # x0 * S and x1 * S are multiples of every t denominator, so x_t * S is integral
    scale = lcm(*(b.denominator for b in f.breakpoints), width.denominator * grid) \
        * lcm(*range(1, max_t_denominator + 1))
    bps = [int(b * scale) for b in f.breakpoints]
    vden = lcm(*(v.denominator for v in f.values))
    vals = [int(v * vden) for v in f.values]
    step = width * scale / grid
    assert step.denominator == 1
    step, lo = int(step), bps[0]

    def value(x):
        # (numerator, positive denominator) of f at the scaled point x
        i = min(bisect.bisect_right(bps, x) - 1, len(bps) - 2)
        b0, b1 = bps[i], bps[i + 1]
        return vals[i] * (b1 - x) + vals[i + 1] * (x - b0), vden * (b1 - b0)

    rng = random.Random(seed)
    for _ in range(trials):
        x0 = lo + step * rng.randint(0, grid)
        x1 = lo + step * rng.randint(0, grid)
        q = rng.randint(1, max_t_denominator)
        p = rng.randint(0, q)
        xt, rem = divmod(p * x1 + (q - p) * x0, q)
        assert rem == 0
        (n0, d0), (n1, d1), (nt, dt) = value(x0), value(x1), value(xt)
        if (n1 == 0 and p > 0) or (n0 == 0 and q - p > 0):
            continue
        if nt ** q * d1 ** p * d0 ** (q - p) < n1 ** p * n0 ** (q - p) * dt ** q:
            return False
    return True
