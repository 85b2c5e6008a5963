"""Closed-form contextuality analysis of cyclic systems.

``Delta_0`` is the smallest total disagreement the connections allow one
at a time; ``Delta_min`` is the smallest over couplings of the whole
system; CNTX is their difference.  Everything here is exact and free of
linear programming; :mod:`.lp_oracle` checks it independently.
"""
from __future__ import annotations

from fractions import Fraction
from typing import NamedTuple, Sequence

from .feasibility import closing_intersection, cycle_feasible, midpoint
from .model import (
    ZERO,
    AnalysisReport,
    ConnectionVector,
    SystemSpec,
    require_valid,
)
from .smax import Condition1, classify_indices, s0, s1

BRANCH_PRODUCTS = "products"
BRANCH_MARGINALS = "marginals"


class DeltaMin(NamedTuple):
    value: Fraction
    branch: str


def delta_zero(spec: SystemSpec) -> Fraction:
    """``(1/2) sum_i |<V_i> - <W_i>|``."""
    require_valid(spec)
    return sum(spec.connection_gaps(), ZERO) / 2


def delta_min_formula(spec: SystemSpec) -> DeltaMin:
    """Smallest total disagreement over couplings of the whole system.

    The ``products`` branch wins only when it is strictly larger, so a tie
    reports the noncontextual ``marginals`` branch.
    """
    require_valid(spec)
    top = s1(spec.products) - (spec.n - 2)
    bottom = sum(spec.connection_gaps(), ZERO)
    if top > bottom:
        return DeltaMin(top / 2, BRANCH_PRODUCTS)
    return DeltaMin(bottom / 2, BRANCH_MARGINALS)


def cntx_value(spec: SystemSpec) -> Fraction:
    """``(1/2) max(s1(products) - sum|<V_i>-<W_i>| - (n - 2), 0)``."""
    require_valid(spec)
    excess = s1(spec.products) - sum(spec.connection_gaps(), ZERO) - (spec.n - 2)
    return max(excess, ZERO) / 2


def criterion_conjectured(spec: SystemSpec) -> bool:
    require_valid(spec)
    return s1(spec.products) > sum(spec.connection_gaps(), ZERO) + (spec.n - 2)


def main_criterion_lhs(spec: SystemSpec) -> Fraction:
    """``s1`` over bunch products together with the maximal connection values."""
    require_valid(spec)
    return s1(spec.products + spec.connection_max())


def criterion_main(spec: SystemSpec) -> bool:
    return main_criterion_lhs(spec) > 2 * spec.n - 2


def canonicalize_signs(spec: SystemSpec) -> tuple[tuple[int, ...], SystemSpec]:
    """Negate properties so all products but the smallest in magnitude are >= 0.

    Starting right after the pivot product, each sign is chosen so the
    product just passed becomes non-negative.  Only the pivot keeps
    whatever sign the overall parity leaves it.
    """
    require_valid(spec)
    n = spec.n
    p = spec.products
    k = min(range(n), key=lambda i: (abs(p[i]), i))
    signs = [0] * n
    signs[(k + 1) % n] = 1
    for step in range(1, n):
        i = (k + step) % n
        signs[(i + 1) % n] = 1 if signs[i] * p[i] >= 0 else -1
    signs = tuple(signs)
    return signs, spec.negated(signs)


def system_cycle(
    spec: SystemSpec, conns: Sequence[Fraction]
) -> tuple[list[Fraction], list[Fraction]]:
    """Means and adjacent products along ``V_1, W_2, V_2, ..., V_n, W_1``.

    Bunch products alternate with connection values; the last edge closes
    ``W_1`` back onto ``V_1``.
    """
    n = spec.n
    means, corrs = [], []
    for i, b in enumerate(spec.bunches):
        means += [b.v_mean, b.w_next_mean]
        corrs += [b.product_mean, conns[(i + 1) % n]]
    return means, corrs


def realizable(spec: SystemSpec, conns: Sequence[Fraction]) -> bool:
    """Whether some coupling of ``spec`` has these connection expectations."""
    return cycle_feasible(*system_cycle(spec, conns))


class ConnectionPlan(NamedTuple):
    vector: ConnectionVector
    case: int


def optimal_connection_plan(spec: SystemSpec) -> ConnectionPlan:
    """A realizable connection vector maximizing ``sum_i <V_i W_i>``.

    ``case`` is 0 when the maximal vector itself is realizable, otherwise
    the branch (1-4) of the constructive case split that produced the
    starting point.  Starting points with a sum below the target are moved
    along the segment towards the maximal vector; the sum is affine along
    it, so the target is hit by one exact division.
    """
    require_valid(spec)
    n = spec.n
    upper = list(spec.connection_max())
    lower = list(spec.connection_min())
    if not criterion_main(spec):
        return ConnectionPlan(ConnectionVector(tuple(upper)), 0)

    p = spec.products
    target = 2 * n - 2 - s1(p)
    _, canon = canonicalize_signs(spec)
    q = canon.products
    prod_pivot = classify_indices(q)
    if not isinstance(prod_pivot, Condition1):
        raise AssertionError("sign canonicalization left no pivot product")
    q_pivot = q[prod_pivot.k]

    conn_pivot = classify_indices(upper)
    if not isinstance(conn_pivot, Condition1):
        # two maximal connections summing below zero make the system noncontextual
        raise AssertionError("contextual system without a pivot connection")
    k = conn_pivot.k
    pivot_max = upper[k]

    wide = [j for j in range(n) if lower[j] > abs(pivot_max)]
    if wide:
        case = 1
        j = wide[0]
        conns = list(upper)
        lo, hi = _closing_interval(spec, conns, j)
        conns[j] = midpoint(lo, hi)
    elif pivot_max < 0:
        case = 2
        j = 0 if k != 0 else 1
        conns = list(upper)
        conns[j] = -pivot_max
    elif pivot_max < q_pivot:
        case = 3
        conns = [pivot_max] * n
    else:
        case = 4
        conns = [pivot_max] * n
        rest = [c for i, c in enumerate(conns) if i != k]
        conns[k] = min(2 * n - 2 - s1(list(p) + rest), upper[k])

    total = sum(conns, ZERO)
    if total > target:
        raise AssertionError(f"case {case} start exceeds the attainable maximum")
    if total < target:
        span = sum(upper, ZERO) - total
        t = (target - total) / span
        conns = [c + t * (u - c) for c, u in zip(conns, upper)]
    vector = ConnectionVector(tuple(conns))
    if vector.total() != target or not realizable(spec, vector.values):
        raise AssertionError(f"case {case} produced an unrealizable connection vector")
    return ConnectionPlan(vector, case)


def _closing_interval(spec: SystemSpec, conns: list[Fraction], j: int) -> tuple[Fraction, Fraction]:
    """Admissible ``<V_j W_j>`` with every other edge of the system cycle fixed."""
    means, corrs = system_cycle(spec, conns)
    # V_j sits at position 2j; the edge into it from W_j is the one we free
    start = 2 * j
    size = len(means)
    means = [means[(start + t) % size] for t in range(size)]
    corrs = [corrs[(start + t) % size] for t in range(size - 1)]
    lo, hi = closing_intersection(means, corrs)
    # pair bounds here are [|<W_j> + <V_j>| - 1, 1 - |<W_j> - <V_j>|]
    return lo, hi


def optimal_connection_vector(spec: SystemSpec) -> ConnectionVector:
    return optimal_connection_plan(spec).vector


def max_connection_sum(spec: SystemSpec) -> Fraction:
    """``min(2n - 2 - s1(products), n - sum_i |<V_i> - <W_i>|)``."""
    require_valid(spec)
    n = spec.n
    return min(2 * n - 2 - s1(spec.products), n - sum(spec.connection_gaps(), ZERO))


def cntx(spec: SystemSpec) -> AnalysisReport:
    """Full closed-form report for ``spec``."""
    require_valid(spec)
    d0 = delta_zero(spec)
    dmin = delta_min_formula(spec)
    value = cntx_value(spec)
    if value != dmin.value - d0:
        raise AssertionError("measure formula disagrees with Delta_min - Delta_0")
    signs, _ = canonicalize_signs(spec)
    plan = optimal_connection_plan(spec)
    return AnalysisReport(
        n=spec.n,
        delta0=d0,
        delta_min=dmin.value,
        cntx=value,
        contextual=value > 0,
        s1_bunches=s1(spec.products),
        main_criterion_lhs=main_criterion_lhs(spec),
        argmax_branch=dmin.branch,
        canonical_signs=signs,
        optimal_connections=plan.vector,
        connection_case=plan.case,
        notes=(spec.note,) if spec.note else (),
    )


def s_one_nonidentity_gap(spec: SystemSpec) -> Fraction:
    """``s1(products) - sum|<V_i>-<W_i>| + n`` minus ``s1(products, maximal connections)``.

    The two expressions coincide for consistently connected systems but
    not in general, even though both criteria always agree.
    """
    lhs = s1(spec.products) - sum(spec.connection_gaps(), ZERO) + spec.n
    return lhs - main_criterion_lhs(spec)
