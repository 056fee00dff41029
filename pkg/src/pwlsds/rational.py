"""Exact rational helpers built on :class:`fractions.Fraction`."""

from __future__ import annotations

import math
import re
from fractions import Fraction
from numbers import Rational

Rat = Fraction

_RAT_RE = re.compile(r"^-?\d+(/\d+)?$")


class ValidationError(ValueError):
    """Raised for malformed user input (system files, literals, options)."""


class ResourceCapError(RuntimeError):
    """Raised when an enumeration exceeds its configured element cap."""


def parse_rat(text: str, *, field: str = "value") -> Fraction:
    """Parse ``-?digits(/digits)?`` into a Fraction; denominator must be > 0."""
    if not isinstance(text, str):
        raise ValidationError(f"{field}: expected rational string, got {text!r}")
    s = text.strip()
    if not _RAT_RE.match(s):
        raise ValidationError(f"{field}: {text!r} is not a rational literal")
    if "/" in s and int(s.split("/")[1]) == 0:
        raise ValidationError(f"{field}: zero denominator in {text!r}")
    return Fraction(s)


def parse_number(text: str, *, field: str = "value") -> Fraction:
    """Lenient CLI parser: rational literals plus finite decimals like ``0.4``."""
    try:
        return parse_rat(text, field=field)
    except ValidationError:
        try:
            return Fraction(text.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise ValidationError(f"{field}: cannot parse {text!r}") from exc


def fmt_rat(q: Rational) -> str:
    q = Fraction(q)
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def as_rat(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, str):
        return parse_number(x)
    return Fraction(x)


def log_rat(q: Fraction) -> float:
    """Natural log of a positive rational without float under/overflow."""
    if q <= 0:
        raise ValueError("log of non-positive rational")
    return math.log(q.numerator) - math.log(q.denominator)


def fmt_decimal(x: float) -> str:
    """15 significant digits, the decimal rendering used in reports."""
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{x:.15g}"
