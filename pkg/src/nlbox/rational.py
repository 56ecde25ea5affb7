"""Exact rational arithmetic underpinning every probability in the library.

Values are ``fractions.Fraction`` instances, which already guarantee the
canonical form we rely on everywhere: positive denominator, fully reduced,
zero stored as 0/1, arbitrary-precision integers underneath.  This module
adds the pieces Fraction does not ship: the fixed ``num/den`` text form used
by all file formats, denominator factoring, and small prime utilities.
"""

from __future__ import annotations

import re
from fractions import Fraction
from typing import Iterable

ExactRational = Fraction

ZERO = Fraction(0)
ONE = Fraction(1)

_RATIONAL_RE = re.compile(r"^(-?\d+)/(\d+)$")


def rat(numerator: int, denominator: int = 1) -> Fraction:
    """Canonical reduced fraction numerator/denominator; sign on the numerator."""
    if denominator == 0:
        raise ZeroDivisionError("rational denominator must be nonzero")
    return Fraction(numerator, denominator)


def arith(a: Fraction, b: Fraction, op: str) -> Fraction:
    """Apply one of ``add, sub, mul, div`` exactly."""
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "div":
        if b == 0:
            raise ZeroDivisionError("division of rationals by zero")
        return a / b
    raise ValueError(f"unknown rational operation {op!r}")


def format_rational(r: Fraction) -> str:
    """Render as ``num/den``; integers render as ``n/1`` so round-trips are uniform."""
    return f"{r.numerator}/{r.denominator}"


def parse_rational(text: str) -> Fraction:
    """Parse the ``num/den`` text form; the result is canonicalized."""
    m = _RATIONAL_RE.match(text.strip())
    if m is None:
        raise ValueError(f"not a rational in num/den form: {text!r}")
    num, den = int(m.group(1)), int(m.group(2))
    if den == 0:
        raise ValueError(f"zero denominator in rational: {text!r}")
    return Fraction(num, den)


def coerce_rational(value) -> Fraction:
    """Accept Fraction, int, or a ``num/den`` string; anything else is rejected.

    Floats are deliberately not accepted: there is no exact interpretation.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return parse_rational(value)
    raise TypeError(f"cannot coerce {type(value).__name__} to an exact rational")


def prime_factors(n: int) -> frozenset[int]:
    """Distinct prime divisors of a positive integer, by trial division.

    Denominators arising here are products of small primes (the p of mod-p
    boxes and powers of two from binary resources), so trial division is all
    the factoring the library ever needs.
    """
    if n < 1:
        raise ValueError("prime_factors expects a positive integer")
    out: set[int] = set()
    d = 2
    while d * d <= n:
        if n % d == 0:
            out.add(d)
            while n % d == 0:
                n //= d
        d += 1 if d == 2 else 2
    if n > 1:
        out.add(n)
    return frozenset(out)


def denominator_primes(r: Fraction) -> frozenset[int]:
    """Distinct primes dividing the (canonical) denominator; empty for integers."""
    return prime_factors(r.denominator)


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    d = 2
    while d * d <= n:
        if n % d == 0:
            return False
        d += 1 if d == 2 else 2
    return True


def smallest_prime_not_in(primes: Iterable[int]) -> int:
    """Least prime outside the given set; the set is finite so one always exists."""
    avoid = set(primes)
    candidate = 2
    while True:
        if is_prime(candidate) and candidate not in avoid:
            return candidate
        candidate += 1
