import random
from fractions import Fraction as F

import pytest
from hypothesis import given, settings

from cyclic_contextuality import criteria
from cyclic_contextuality.criteria import (
    BRANCH_MARGINALS,
    BRANCH_PRODUCTS,
    canonicalize_signs,
    cntx,
    cntx_value,
    criterion_conjectured,
    criterion_main,
    delta_min_formula,
    delta_zero,
    main_criterion_lhs,
    max_connection_sum,
    optimal_connection_plan,
    optimal_connection_vector,
    realizable,
    s_one_nonidentity_gap,
)
from cyclic_contextuality.lp_oracle import feasible_with_connections, min_delta
from cyclic_contextuality.model import InvalidSystemError, SystemSpec, delta_of_coupling
from cyclic_contextuality.smax import Condition1, classify_indices, s1
from cyclic_contextuality.verify import random_contextual_spec, random_extreme_spec
from oracles import specs

T = F(7071, 10000)


def zero_marginals(products, note=""):
    z = [0] * len(products)
    return SystemSpec.from_marginals(z, z, products, note=note)


PR_BOX = zero_marginals([1, 1, 1, -1])
CLASSICAL = zero_marginals([1, 1, 1, 1])
TSIRELSON = zero_marginals([T, T, T, -T])


def test_delta_zero_examples():
    assert delta_zero(PR_BOX) == 0
    spec = SystemSpec.from_marginals([F(1, 5), 0, F(-2, 5)], [0, F(1, 5), F(2, 5)], [0, 0, 0])
    assert delta_zero(spec) == F(3, 5)
    signaling = SystemSpec.from_marginals([1, 0], [-1, 0], [0, 0])
    assert delta_zero(signaling) == 1


def test_delta_min_examples():
    assert delta_min_formula(PR_BOX) == (1, BRANCH_PRODUCTS)
    assert delta_min_formula(TSIRELSON).value == F(4142, 10000)
    assert delta_min_formula(CLASSICAL) == (0, BRANCH_MARGINALS)


def test_tie_reports_marginals_branch():
    # s1(products) - (n - 2) equals sum |<V_i> - <W_i>| = 0
    spec = zero_marginals([1, F(1, 2), F(1, 2)])
    assert s1(spec.products) - 1 == 0
    assert delta_min_formula(spec).branch == BRANCH_MARGINALS


def test_report_for_pr_box():
    report = cntx(PR_BOX)
    assert report.cntx == 1 and report.contextual
    assert report.delta0 == 0 and report.delta_min == 1
    assert report.main_criterion_lhs == 8
    assert report.optimal_connections.total() == 2


def test_report_carries_note():
    assert cntx(zero_marginals([T, T, T, -T], note="stand-in")).notes == ("stand-in",)


@pytest.mark.parametrize("c", [-1, F(-1, 2), 0, F(1, 2), 1])
def test_signaling_two_cycle_is_noncontextual(c):
    spec = SystemSpec.from_bunches([(1, 1, 1), (0, 0, c)])
    assert cntx_value(spec) == 0
    assert min_delta(spec).delta_min == delta_zero(spec) == 1


def test_criteria_examples():
    assert criterion_conjectured(PR_BOX) and criterion_main(PR_BOX)
    assert not criterion_conjectured(CLASSICAL) and not criterion_main(CLASSICAL)
    assert main_criterion_lhs(CLASSICAL) == 6


def test_conjectured_criterion_is_strict_at_the_boundary():
    spec = zero_marginals([1, F(1, 2), F(1, 2)])
    assert s1(spec.products) == 0 + (spec.n - 2)
    assert not criterion_conjectured(spec)
    assert not criterion_main(spec)


def test_invalid_spec_is_refused():
    bad = SystemSpec.from_bunches([(F(1, 2), F(-1, 2), F(1, 2)), (0, 0, 0)])
    for fn in (delta_zero, delta_min_formula, cntx_value, cntx, criterion_main, canonicalize_signs):
        with pytest.raises(InvalidSystemError):
            fn(bad)


def test_canonicalize_example():
    spec = zero_marginals([F(-9, 10), F(7, 10), F(-1, 5)])
    signs, canon = canonicalize_signs(spec)
    assert signs == (1, -1, -1)
    assert canon.products == (F(9, 10), F(7, 10), F(1, 5))


def test_canonicalize_identity_on_nonnegative_products():
    signs, canon = canonicalize_signs(zero_marginals([F(1, 2), 1, F(1, 3)]))
    assert signs == (1, 1, 1)


@settings(max_examples=300)
@given(specs())
def test_canonical_form_properties(spec):
    signs, canon = canonicalize_signs(spec)
    q = canon.products
    assert isinstance(classify_indices(q), Condition1)
    k = min(range(spec.n), key=lambda i: (abs(q[i]), i))
    assert all(x >= abs(q[k]) for i, x in enumerate(q) if i != k)
    assert s1(q) == s1(spec.products)
    assert canon.connection_gaps() == spec.connection_gaps()
    assert cntx_value(canon) == cntx_value(spec)


@settings(max_examples=300)
@given(specs())
def test_measure_relations(spec):
    d0, dmin, value = delta_zero(spec), delta_min_formula(spec).value, cntx_value(spec)
    assert 0 <= d0 <= dmin <= spec.n
    assert value == dmin - d0
    assert (value > 0) == criterion_main(spec) == criterion_conjectured(spec)


@settings(max_examples=300)
@given(specs())
def test_invariance_under_symmetries(spec):
    value = cntx_value(spec)
    assert cntx_value(spec.rotated(1)) == value
    assert cntx_value(spec.reflected()) == value
    assert cntx_value(spec.negated([1, -1] * (spec.n // 2) + [1] * (spec.n % 2))) == value


def test_nonidentity_of_the_two_expressions():
    rng = random.Random(2)
    for _ in range(2000):
        spec = random_extreme_spec(rng.randint(2, 5), rng)
        if s_one_nonidentity_gap(spec) != 0:
            assert criterion_conjectured(spec) == criterion_main(spec)
            return
    pytest.fail("no spec separates the two expressions")


def test_optimal_vector_examples():
    vec = optimal_connection_vector(PR_BOX)
    assert vec.total() == 2
    assert feasible_with_connections(PR_BOX, vec)[0]
    assert feasible_with_connections(PR_BOX, [1, 1, 1, -1])[0]
    assert optimal_connection_vector(CLASSICAL).values == (1, 1, 1, 1)


@settings(max_examples=200, deadline=None)
@given(specs(max_n=5))
def test_optimal_vector_sum_and_bounds(spec):
    vec = optimal_connection_vector(spec)
    assert vec.total() == max_connection_sum(spec)
    for c, lo, hi in zip(vec, spec.connection_min(), spec.connection_max()):
        assert lo <= c <= hi
    assert realizable(spec, vec.values)


def test_optimal_vector_matches_lp_on_contextual_specs():
    rng = random.Random(21)
    for n in (2, 3, 4, 5):
        for _ in range(10):
            spec = random_contextual_spec(n, rng)
            ok, witness = feasible_with_connections(spec, optimal_connection_vector(spec))
            assert ok
            assert delta_of_coupling(witness) == delta_min_formula(spec).value


def test_case_two_example():
    f = F(5, 8)
    spec = SystemSpec.from_marginals([f, f, f], [-f, f, f], [1, 1, -1])
    plan = optimal_connection_plan(spec)
    assert plan.case == 2
    assert cntx_value(spec) == F(3, 8)


def test_case_three_condition_never_meets_contextuality():
    # 0 <= pivot max < canonical pivot product would force the system below the criterion
    rng = random.Random(9)
    for _ in range(400):
        spec = random_contextual_spec(rng.randint(2, 5), rng)
        _, canon = canonicalize_signs(spec)
        q = canon.products
        pivot_q = q[classify_indices(q).k]
        upper = spec.connection_max()
        pivot_u = upper[classify_indices(upper).k]
        assert not 0 <= pivot_u < pivot_q
