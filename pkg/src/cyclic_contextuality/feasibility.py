"""Existence and construction of joints of +/-1 variables along chains and cycles."""
from __future__ import annotations

from fractions import Fraction
from typing import Optional, Sequence

from .model import JointPMF, ValidationError, to_rational
from .smax import s0, s1


class InfeasibleError(ValidationError):
    """Requested expectations admit no joint distribution."""

    def __init__(self, message: str, index: Optional[int] = None):
        self.index = index
        super().__init__(message)


def _check_mean(m: Fraction) -> Fraction:
    m = to_rational(m)
    if not -1 <= m <= 1:
        raise ValidationError(f"mean {m} is outside [-1, 1]")
    return m


def pair_bounds(mean_a, mean_b) -> tuple[Fraction, Fraction]:
    """Range of ``<AB>`` compatible with ``<A>`` and ``<B>``."""
    a, b = _check_mean(mean_a), _check_mean(mean_b)
    return abs(a + b) - 1, 1 - abs(a - b)


def pair_feasible(mean_a, mean_b, corr) -> bool:
    a, b = to_rational(mean_a), to_rational(mean_b)
    if not (-1 <= a <= 1 and -1 <= b <= 1):
        return False
    lo, hi = pair_bounds(a, b)
    return lo <= to_rational(corr) <= hi


def pair_pmf(mean_a, mean_b, corr) -> JointPMF:
    """The unique distribution of ``(A, B)`` with the given expectations."""
    a, b, c = to_rational(mean_a), to_rational(mean_b), to_rational(corr)
    lo, hi = pair_bounds(a, b)
    if not lo <= c <= hi:
        raise InfeasibleError(f"<AB> = {c} outside [{lo}, {hi}]")
    return JointPMF(
        2, {(x, y): (1 + x * a + y * b + x * y * c) / 4 for x in (1, -1) for y in (1, -1)}
    )


def maximal_pair_coupling(mean_a, mean_b) -> JointPMF:
    """Coupling of ``A`` and ``B`` minimizing ``Pr[A != B]``."""
    a, b = _check_mean(mean_a), _check_mean(mean_b)
    return pair_pmf(a, b, 1 - abs(a - b))


def chain_joint(means: Sequence, corrs: Sequence) -> JointPMF:
    """Markov-chain joint of ``A_1..A_n`` with given means and adjacent products.

    Each step glues the next pair distribution on through its conditional
    kernel.  Rows conditioned on a zero-probability value are set uniform;
    they carry no mass so the joint does not depend on that choice.
    """
    means = [to_rational(m) for m in means]
    corrs = [to_rational(c) for c in corrs]
    n = len(means)
    if n < 2 or len(corrs) != n - 1:
        raise ValidationError("a chain of n >= 2 variables needs n - 1 adjacent products")
    pairs = []
    for i in range(n - 1):
        if not pair_feasible(means[i], means[i + 1], corrs[i]):
            raise InfeasibleError(f"pair ({i}, {i + 1}) admits no joint", index=i)
        pairs.append(pair_pmf(means[i], means[i + 1], corrs[i]).atoms)

    joint = {(x, y): p for (x, y), p in pairs[0].items()}
    for i in range(1, n - 1):
        step = pairs[i]
        p_prev = {x: (1 + x * means[i]) / 2 for x in (1, -1)}
        grown = {}
        for atom, p in joint.items():
            x = atom[-1]
            for y in (1, -1):
                if p_prev[x]:
                    kernel = step.get((x, y), 0) / p_prev[x]
                else:
                    kernel = Fraction(1, 2)
                if p * kernel:
                    grown[atom + (y,)] = p * kernel
        joint = grown
    return JointPMF(n, joint)


def cycle_feasible(means: Sequence, corrs: Sequence) -> bool:
    """Whether ``A_1..A_n`` exist with the given means and cyclic products.

    ``corrs[i]`` is ``<A_i A_{i+1}>`` with the last entry closing the cycle.
    Every adjacent pair must be realizable and ``s_one(corrs) <= n - 2``.
    For ``n = 2`` this reduces to both products being equal.
    """
    means = [to_rational(m) for m in means]
    corrs = [to_rational(c) for c in corrs]
    n = len(means)
    if n < 2 or len(corrs) != n:
        raise ValidationError("a cycle of n >= 2 variables needs n cyclic products")
    for i in range(n):
        if not pair_feasible(means[i], means[(i + 1) % n], corrs[i]):
            return False
    return s1(corrs) <= n - 2


def closing_range(means: Sequence, corrs: Sequence) -> tuple[Fraction, Fraction]:
    """Values of ``<A_n A_1>`` for which the chain closes into a cycle.

    This is the raw interval from the cycle condition.  Intersecting it with
    the pair bounds of ``(A_n, A_1)`` is left to the caller, see
    :func:`closing_intersection`.
    """
    means = [to_rational(m) for m in means]
    corrs = [to_rational(c) for c in corrs]
    n = len(means)
    if n < 2 or len(corrs) != n - 1:
        raise ValidationError("a chain of n >= 2 variables needs n - 1 adjacent products")
    for i in range(n - 1):
        if not pair_feasible(means[i], means[i + 1], corrs[i]):
            raise InfeasibleError(f"pair ({i}, {i + 1}) admits no joint", index=i)
    if n == 2:
        lo = hi = corrs[0]
    else:
        lo = s0(corrs) - (n - 2)
        hi = (n - 2) - s1(corrs)
    plo, phi = pair_bounds(means[-1], means[0])
    assert lo <= hi, f"empty closing range [{lo}, {hi}]"
    assert max(lo, plo) <= min(hi, phi), "closing range misses the pair bounds"
    return lo, hi


def closing_intersection(means: Sequence, corrs: Sequence) -> tuple[Fraction, Fraction]:
    """Closing range intersected with the pair bounds of ``(A_n, A_1)``."""
    lo, hi = closing_range(means, corrs)
    plo, phi = pair_bounds(means[-1], means[0])
    return max(lo, plo), min(hi, phi)


def midpoint(lo: Fraction, hi: Fraction) -> Fraction:
    return (lo + hi) / 2

