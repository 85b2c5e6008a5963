"""Randomized formula-versus-oracle campaigns."""
from __future__ import annotations

import random
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from . import criteria
from .lp_oracle import DEFAULT_LIMIT, feasible_with_connections, min_delta
from .model import ONE, BunchStats, SystemSpec, delta_of_coupling

GRID = tuple(Fraction(k, 8) for k in range(-8, 9))


def random_bunch(index: int, rng: random.Random, grid=GRID) -> BunchStats:
    """Uniform over grid triples, rejecting those no distribution can produce."""
    while True:
        v, w, p = rng.choice(grid), rng.choice(grid), rng.choice(grid)
        if abs(v + w) - 1 <= p <= 1 - abs(v - w):
            return BunchStats(index, v, w, p)


def random_spec(n: int, rng: random.Random, grid=GRID) -> SystemSpec:
    return SystemSpec(tuple(random_bunch(i + 1, rng, grid) for i in range(n)))


def random_extreme_spec(n: int, rng: random.Random, grid=GRID) -> SystemSpec:
    """Grid marginals with products pushed to their bounds most of the time.

    Contextual systems are rare under :func:`random_spec` for larger ``n``;
    products at the edges of their ranges make them common.
    """
    bunches = []
    for i in range(n):
        v, w = rng.choice(grid), rng.choice(grid)
        lo, hi = abs(v + w) - 1, 1 - abs(v - w)
        roll = rng.random()
        if roll < 0.4:
            p = hi
        elif roll < 0.7:
            p = lo
        else:
            p = rng.choice([g for g in grid if lo <= g <= hi])
        bunches.append(BunchStats(i + 1, v, w, p))
    return SystemSpec(tuple(bunches))


def random_clustered_spec(n: int, rng: random.Random, grid=GRID) -> SystemSpec:
    """Marginals near a common magnitude, products at their bounds.

    Every marginal is ``+/-a`` plus a little grid noise for one shared
    ``a``.  An odd number of products sit at the low end of their range,
    the rest at the high end.  Contextual systems are common under this
    generator for every ``n`` the oracle handles, and at small ``n`` it
    also produces the wide-connection cases.
    """
    a = rng.choice([g for g in grid if g >= 0])
    noise = [g for g in grid if abs(g) <= Fraction(1, 4)]

    def marginal() -> Fraction:
        return max(-ONE, min(ONE, rng.choice((1, -1)) * a + rng.choice(noise)))

    low = set(rng.sample(range(n), rng.choice(range(1, n + 1, 2))))
    bunches = []
    for i in range(n):
        v, w = marginal(), marginal()
        p = abs(v + w) - 1 if i in low else 1 - abs(v - w)
        bunches.append(BunchStats(i + 1, v, w, p))
    return SystemSpec(tuple(bunches))


def random_contextual_spec(n: int, rng: random.Random, grid=GRID) -> SystemSpec:
    while True:
        spec = random_clustered_spec(n, rng, grid)
        if criteria.criterion_main(spec):
            return spec


GENERATORS = {
    "uniform": random_spec,
    "extreme": random_extreme_spec,
    "clustered": random_clustered_spec,
    "contextual": random_contextual_spec,
}


@dataclass
class TrialOutcome:
    index: int
    failures: list[str] = field(default_factory=list)
    contextual: bool = False
    case: Optional[int] = None


def run_trial(index: int, spec: SystemSpec, seed: int, limit: int = DEFAULT_LIMIT) -> TrialOutcome:
    """Cross-check one system; every disagreement is recorded, none raised."""
    out = TrialOutcome(index)
    rng = random.Random(seed)
    formula = criteria.delta_min_formula(spec).value
    oracle = min_delta(spec, limit=limit)
    if formula != oracle.delta_min:
        out.failures.append(f"delta_min formula {formula} != oracle {oracle.delta_min}")
    if delta_of_coupling(oracle.witness) != oracle.delta_min:
        out.failures.append("oracle witness does not attain its reported minimum")
    main = criteria.criterion_main(spec)
    if criteria.criterion_conjectured(spec) != main:
        out.failures.append("criteria disagree")
    value = criteria.cntx_value(spec)
    if (value > 0) != main:
        out.failures.append("CNTX sign disagrees with the main criterion")
    variants = {
        "rotation": spec.rotated(rng.randrange(spec.n)),
        "reflection": spec.reflected(),
        "negation": spec.negated([rng.choice((1, -1)) for _ in range(spec.n)]),
    }
    for name, other in variants.items():
        if criteria.cntx_value(other) != value:
            out.failures.append(f"CNTX changed under {name}")
    out.contextual = main
    plan = criteria.optimal_connection_plan(spec)
    out.case = plan.case
    if main:
        ok, witness = feasible_with_connections(spec, plan.vector, limit=limit)
        if not ok:
            out.failures.append(f"optimal connection vector (case {plan.case}) is infeasible")
        elif delta_of_coupling(witness) != oracle.delta_min:
            out.failures.append(f"optimal connection vector (case {plan.case}) misses Delta_min")
    return out


def _run_packed(args) -> TrialOutcome:
    return run_trial(*args)


@dataclass
class CampaignSummary:
    n: int
    trials: int
    seed: int
    passed: int
    failed: int
    contextual: int
    case_coverage: dict[int, int]
    first_counterexample: Optional[dict]

    @property
    def ok(self) -> bool:
        return self.failed == 0


def run_campaign(
    n: int,
    trials: int,
    seed: int,
    limit: int = DEFAULT_LIMIT,
    jobs: int = 1,
    generator: str = "uniform",
) -> tuple[CampaignSummary, list[SystemSpec]]:
    """Generate ``trials`` systems from ``seed`` and check each one.

    Systems are drawn up front from a single generator so the outcome does
    not depend on ``jobs``; results are ordered by trial index.
    """
    rng = random.Random(seed)
    make = GENERATORS[generator]
    specs = [make(n, rng) for _ in range(trials)]
    trial_seeds = [rng.randrange(2**32) for _ in range(trials)]
    work = [(i, s, ts, limit) for i, (s, ts) in enumerate(zip(specs, trial_seeds))]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(_run_packed, work, chunksize=8))
    else:
        outcomes = [_run_packed(w) for w in work]
    outcomes.sort(key=lambda o: o.index)

    coverage = Counter(o.case for o in outcomes)
    bad = [o for o in outcomes if o.failures]
    first = None
    if bad:
        from .ingest import spec_to_document

        first = {
            "trial": bad[0].index,
            "failures": bad[0].failures,
            "spec": spec_to_document(specs[bad[0].index]),
        }
    summary = CampaignSummary(
        n=n,
        trials=trials,
        seed=seed,
        passed=trials - len(bad),
        failed=len(bad),
        contextual=sum(o.contextual for o in outcomes),
        case_coverage={c: coverage.get(c, 0) for c in range(5)},
        first_counterexample=first,
    )
    return summary, specs
