"""Parity-constrained maxima of signed sums.

``s_one(xs)`` is the largest ``sum m_i x_i`` over sign vectors with an odd
number of ``-1`` entries (product ``-1``); ``s_zero`` uses an even number.
Both are evaluated in linear time: take every term at its absolute value,
and if the resulting parity is wrong, give up the smallest term.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence, Union

from .model import ZERO


@dataclass(frozen=True)
class SignPattern:
    signs: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "signs", tuple(self.signs))
        if any(s not in (1, -1) for s in self.signs):
            raise ValueError(f"signs must be +/-1, got {self.signs}")

    @property
    def parity(self) -> int:
        out = 1
        for s in self.signs:
            out *= s
        return out

    def apply(self, xs: Sequence[Fraction]) -> Fraction:
        return sum((s * x for s, x in zip(self.signs, xs)), ZERO)


def _parity_max(xs: Sequence[Fraction], parity: int) -> tuple[Fraction, SignPattern]:
    if len(xs) < 2:
        raise ValueError(f"need at least two arguments, got {len(xs)}")
    signs = [1 if x >= 0 else -1 for x in xs]
    value = sum((abs(x) for x in xs), ZERO)
    got = 1
    for s in signs:
        got *= s
    if got != parity:
        # lowest index among the smallest |x_i|
        k = min(range(len(xs)), key=lambda i: (abs(xs[i]), i))
        signs[k] = -signs[k]
        value -= 2 * abs(xs[k])
    return value, SignPattern(tuple(signs))


def s_one(xs: Sequence[Fraction]) -> tuple[Fraction, SignPattern]:
    """Max of ``sum m_i x_i`` over sign patterns whose product is -1."""
    return _parity_max(xs, -1)


def s_zero(xs: Sequence[Fraction]) -> tuple[Fraction, SignPattern]:
    """Max of ``sum m_i x_i`` over sign patterns whose product is +1."""
    return _parity_max(xs, 1)


def s1(xs: Sequence[Fraction]) -> Fraction:
    return _parity_max(xs, -1)[0]


def s0(xs: Sequence[Fraction]) -> Fraction:
    return _parity_max(xs, 1)[0]


@dataclass(frozen=True)
class Condition1:
    """Every entry other than ``k`` is at least ``|xs[k]|``."""

    k: int


@dataclass(frozen=True)
class Condition2:
    """Two distinct entries ``j < k`` have a negative sum."""

    j: int
    k: int


def satisfies_condition1(xs: Sequence[Fraction], k: int) -> bool:
    bound = abs(xs[k])
    return all(x >= bound for i, x in enumerate(xs) if i != k)


def classify_indices(xs: Sequence[Fraction]) -> Union[Condition1, Condition2]:
    """Decide which of the two mutually exclusive index conditions holds.

    Returns the lowest pivot for condition 1, else the lexicographically
    smallest pair for condition 2.  Indices are 0-based.
    """
    n = len(xs)
    if n < 2:
        raise ValueError(f"need at least two arguments, got {n}")
    # Condition 1 can only hold at an argmin of |x|; scan those in index order.
    smallest = min(abs(x) for x in xs)
    for k in range(n):
        if abs(xs[k]) == smallest and satisfies_condition1(xs, k):
            return Condition1(k)
    for j in range(n):
        for k in range(j + 1, n):
            if xs[j] + xs[k] < 0:
                return Condition2(j, k)
    raise AssertionError(f"neither index condition holds for {list(xs)}")


def expand_s1_pivot(xs: Sequence[Fraction], k: int) -> Fraction:
    """``s_one`` when every other entry is non-negative and at least ``xs[k]``."""
    for i, x in enumerate(xs):
        if i != k and (x < xs[k] or x < 0):
            raise ValueError(f"entry {i} = {x} breaks the pivot hypothesis at k={k}")
    return sum((x for i, x in enumerate(xs) if i != k), ZERO) - xs[k]


def expand_s0_pivot(xs: Sequence[Fraction]) -> Fraction:
    """``s_zero`` under condition 1: the plain sum."""
    if not isinstance(classify_indices(xs), Condition1):
        raise ValueError("condition 1 does not hold")
    return sum(xs, ZERO)
