"""Parsing and formatting of exact rationals ("p/q" strings)."""

import re
from fractions import Fraction
from math import gcd, lcm

_RATIONAL_RE = re.compile(r"^\s*[+-]?\d+(\s*/\s*\d+)?\s*$")


def parse_rational(text) -> Fraction:
    """Parse ``"p/q"`` or ``"p"`` into a Fraction.

    Integers and Fractions pass through. Decimal strings and floats are
    rejected: values must cross file and command-line boundaries exactly.
    """
    if isinstance(text, bool):
        raise ValueError(f"not a rational: {text!r}")
    if isinstance(text, (int, Fraction)):
        return Fraction(text)
    if not isinstance(text, str) or not _RATIONAL_RE.match(text):
        raise ValueError(f"not a rational of the form p/q: {text!r}")
    value = Fraction(text.replace(" ", ""))
    return value


def format_rational(value) -> str:
    return str(Fraction(value))


def parse_vector(text) -> tuple:
    """Parse ``"1/2,3"`` (or a list of rational strings) into a tuple of Fractions."""
    if isinstance(text, str):
        parts = [p for p in text.split(",")]
        if not text.strip() or any(not p.strip() for p in parts):
            raise ValueError(f"not a comma-separated rational vector: {text!r}")
    else:
        parts = list(text)
    return tuple(parse_rational(p) for p in parts)


def primitive_integer_vector(vec) -> tuple:
    """Scale a nonzero rational vector to the primitive integer vector on its ray."""
    vec = [Fraction(x) for x in vec]
    if all(x == 0 for x in vec):
        raise ValueError("zero vector has no primitive representative")
    den = lcm(*(x.denominator for x in vec))
    ints = [int(x * den) for x in vec]
    g = 0
    for x in ints:
        g = gcd(g, x)
    return tuple(x // g for x in ints)


def is_primitive(vec) -> bool:
    if any(not isinstance(x, int) or isinstance(x, bool) for x in vec):
        return False
    g = 0
    for x in vec:
        g = gcd(g, x)
    return g == 1
