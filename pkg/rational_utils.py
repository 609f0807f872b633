"""Exact rational helpers shared by the solver, the cone code and the CLI codec."""

from fractions import Fraction
from typing import Iterable, List, Optional, Sequence, Tuple, Union

import sympy

Rational = Fraction
Vector = Tuple[Fraction, ...]
Matrix = Tuple[Vector, ...]

RationalLike = Union[int, str, Fraction]


def parse_rational(value: RationalLike) -> Fraction:
    """Parse an int, an integer string or a ``"p/q"`` string exactly.

    Floats are rejected: they would smuggle binary rounding into an exact
    pipeline.
    """
    if isinstance(value, bool):
        raise ValueError("booleans are not rationals")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if not isinstance(value, str):
        raise ValueError(f"expected integer or 'p/q' string, got {type(value).__name__}")
    text = value.strip()
    if not text:
        raise ValueError("empty rational")
    if "/" in text:
        num_text, den_text = text.split("/", 1)
        try:
            num, den = int(num_text), int(den_text)
        except ValueError:
            raise ValueError(f"malformed rational '{value}'") from None
        if den == 0:
            raise ValueError(f"zero denominator in '{value}'")
        return Fraction(num, den)
    try:
        return Fraction(int(text))
    except ValueError:
        raise ValueError(f"malformed rational '{value}'") from None


def format_rational(value: Fraction) -> str:
    value = Fraction(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def format_vector(values: Iterable[Fraction]) -> List[str]:
    return [format_rational(v) for v in values]


def format_matrix(rows: Iterable[Iterable[Fraction]]) -> List[List[str]]:
    return [format_vector(r) for r in rows]


def vec(values: Iterable[RationalLike]) -> Vector:
    return tuple(parse_rational(v) for v in values)


def mat(rows: Iterable[Iterable[RationalLike]]) -> Matrix:
    return tuple(vec(r) for r in rows)


def zeros(d: int) -> Vector:
    return (Fraction(0),) * d


def dot(u: Sequence[Fraction], v: Sequence[Fraction]) -> Fraction:
    return sum((a * b for a, b in zip(u, v)), Fraction(0))


def add(u: Sequence[Fraction], v: Sequence[Fraction]) -> Vector:
    return tuple(a + b for a, b in zip(u, v))


def sub(u: Sequence[Fraction], v: Sequence[Fraction]) -> Vector:
    return tuple(a - b for a, b in zip(u, v))


def scale(c: Fraction, v: Sequence[Fraction]) -> Vector:
    return tuple(c * a for a in v)


def identity(d: int) -> Matrix:
    return tuple(tuple(Fraction(int(i == j)) for j in range(d)) for i in range(d))


def mat_vec(m: Sequence[Sequence[Fraction]], v: Sequence[Fraction]) -> Vector:
    return tuple(dot(row, v) for row in m)


def mat_mul(a: Sequence[Sequence[Fraction]], b: Sequence[Sequence[Fraction]]) -> Matrix:
    cols = list(zip(*b))
    return tuple(tuple(dot(row, col) for col in cols) for row in a)


def mat_add(a: Sequence[Sequence[Fraction]], b: Sequence[Sequence[Fraction]]) -> Matrix:
    return tuple(add(r, s) for r, s in zip(a, b))


def mat_sum(mats: Sequence[Sequence[Sequence[Fraction]]], d: int) -> Matrix:
    total = tuple(zeros(d) for _ in range(d))
    for m in mats:
        total = mat_add(total, m)
    return total


def is_square(m: Sequence[Sequence[Fraction]], d: int) -> bool:
    return len(m) == d and all(len(r) == d for r in m)


def invert_matrix(m: Sequence[Sequence[Fraction]]) -> Optional[Matrix]:
    """Exact inverse via sympy, or None when singular."""
    if not m:
        return ()
    sm = sympy.Matrix([[sympy.Rational(x.numerator, x.denominator) for x in map(Fraction, row)] for row in m])
    if sm.det() == 0:
        return None
    inverse = sm.inv()
    return tuple(tuple(Fraction(int(v.p), int(v.q)) for v in inverse.row(i)) for i in range(inverse.rows))


def is_dyadic(value: Fraction) -> bool:
    den = Fraction(value).denominator
    return den & (den - 1) == 0
