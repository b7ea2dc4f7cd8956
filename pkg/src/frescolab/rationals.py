"""Exact rational arithmetic kernel.

All coefficients in the package are exact rationals.  gmpy2's mpq is used
when available (several times faster); set FRESCOLAB_PURE_PYTHON=1 to force
the stdlib Fraction implementation.  Both types hash and compare
identically, so spans and polynomials are bit-identical either way.
"""

from __future__ import annotations

import os
from fractions import Fraction

if os.environ.get("FRESCOLAB_PURE_PYTHON"):
    _impl = "fraction"
else:
    try:
        from gmpy2 import mpq as _mpq

        _impl = "gmpy2"
    except ImportError:  # pragma: no cover
        _impl = "fraction"

if _impl == "gmpy2":
    def QQ(num=0, den=None):
        if den is None:
            return _mpq(num)
        return _mpq(num, den)
else:
    def QQ(num=0, den=None):
        if den is None:
            return Fraction(num)
        return Fraction(num, den)

BACKEND = _impl

ZERO = QQ(0)
ONE = QQ(1)


def parse_rational(text):
    """Parse "p/q" or "p" into an exact rational."""
    if isinstance(text, str):
        text = text.strip()
    return QQ(Fraction(text))


def format_rational(q) -> str:
    """Render a rational as "p/q", or "p" when integral."""
    return str(q)


def is_integer(q) -> bool:
    return q.denominator == 1


def as_rational(value):
    """Coerce int, str, Fraction or mpq to the active rational type."""
    if isinstance(value, (int, Fraction)):
        return QQ(value)
    if isinstance(value, str):
        return parse_rational(value)
    return QQ(value.numerator, value.denominator)
