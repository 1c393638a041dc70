"""Numeric policy: exact rationals (object arrays of Fraction) or float64."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Any

import numpy as np


@dataclass(frozen=True)
class NumericMode:
    exact: bool = True
    feas_tol: float = 1e-9
    opt_tol: float = 1e-7

    def __post_init__(self) -> None:
        if not self.exact and (self.feas_tol <= 0 or self.opt_tol <= 0):
            raise ValueError("float mode needs strictly positive tolerances")

    @classmethod
    def rational(cls) -> "NumericMode":
        return cls(exact=True)

    @classmethod
    def float(cls, feas_tol: float = 1e-9, opt_tol: float = 1e-7) -> "NumericMode":
        return cls(exact=False, feas_tol=feas_tol, opt_tol=opt_tol)

    @classmethod
    def parse(cls, name: str) -> "NumericMode":
        if name in ("rational", "exact"):
            return cls.rational()
        if name == "float":
            return cls.float()
        raise ValueError(f"unknown numeric mode {name!r}")

    @property
    def name(self) -> str:
        return "rational" if self.exact else "float"

    def array(self, values: Any) -> np.ndarray:
        return to_fraction_array(values) if self.exact else to_float_array(values)


EXACT = NumericMode.rational()
FLOAT = NumericMode.float()


def to_fraction(value: Any) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, np.integer)):
        return Fraction(int(value))
    if isinstance(value, str):
        return Fraction(value)
    if isinstance(value, (list, tuple)) and len(value) == 2:
        p, q = value
        if int(q) <= 0:
            raise ValueError(f"rational denominator must be positive, got {q}")
        return Fraction(int(p), int(q))
    return Fraction(float(value))


def to_fraction_array(values: Any) -> np.ndarray:
    arr = np.asarray(values, dtype=object)
    out = np.empty(arr.size, dtype=object)
    out[:] = [v if type(v) is Fraction else to_fraction(v) for v in arr.ravel()]
    return out.reshape(arr.shape)


def to_float_array(values: Any) -> np.ndarray:
    arr = np.asarray(values, dtype=object)
    if arr.size == 0:
        return np.zeros(arr.shape, dtype=float)
    return arr.astype(float)


def parse_rational(text: str) -> Fraction:
    """Parse ``'3'``, ``'-1/3'`` or ``'0.25'`` losslessly."""
    return Fraction(text.strip())


def parse_vector(text: str) -> list[Fraction]:
    return [parse_rational(tok) for tok in text.split(",") if tok.strip()]


def encode_number(value: Any) -> Any:
    """JSON encoding: integers stay plain, other rationals become ``[p, q]``."""
    if isinstance(value, float):
        value = Fraction(value)
    value = to_fraction(value)
    if value.denominator == 1:
        return value.numerator
    return [value.numerator, value.denominator]


def encode_vector(values: Any) -> list:
    return [encode_number(v) for v in np.asarray(values, dtype=object).ravel()]


def decode_number(raw: Any) -> Fraction:
    if isinstance(raw, bool):
        raise ValueError("booleans are not numbers")
    if isinstance(raw, (list, tuple)):
        if len(raw) != 2 or not all(isinstance(t, int) and not isinstance(t, bool) for t in raw):
            raise ValueError(f"rational must be a [p, q] integer pair, got {raw!r}")
        return to_fraction(raw)
    if isinstance(raw, (int, float, Fraction)):
        return to_fraction(raw)
    raise ValueError(f"not a number: {raw!r}")


def as_float_list(values: Any) -> list[float]:
    return [float(v) for v in np.asarray(values, dtype=object).ravel()]
