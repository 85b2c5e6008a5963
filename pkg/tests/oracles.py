"""Slow, obviously-correct reference implementations used only by the tests."""
import itertools
import random
from fractions import Fraction

from hypothesis import strategies as st

from cyclic_contextuality.model import BunchStats, SystemSpec


def brute_s(xs, parity):
    best = None
    for signs in itertools.product((1, -1), repeat=len(xs)):
        prod = 1
        for s in signs:
            prod *= s
        if prod != parity:
            continue
        value = sum(s * x for s, x in zip(signs, xs))
        best = value if best is None else max(best, value)
    return best


def brute_s1(xs):
    return brute_s(xs, -1)


def brute_s0(xs):
    return brute_s(xs, 1)


def rational(rng: random.Random, lo=-1, hi=1, den=12) -> Fraction:
    d = rng.randint(1, den)
    return Fraction(rng.randint(lo * d, hi * d), d)


def random_chain(rng: random.Random, n: int):
    """Means and n - 1 feasible adjacent products."""
    means = [rational(rng) for _ in range(n)]
    corrs = []
    for i in range(n - 1):
        a, b = means[i], means[i + 1]
        lo, hi = abs(a + b) - 1, 1 - abs(a - b)
        corrs.append(lo + (hi - lo) * Fraction(rng.randint(0, 8), 8))
    return means, corrs


unit = st.fractions(min_value=-1, max_value=1, max_denominator=12)
reals = st.fractions(min_value=-5, max_value=5, max_denominator=12)


@st.composite
def bunches(draw, index):
    v, w = draw(unit), draw(unit)
    lo, hi = abs(v + w) - 1, 1 - abs(v - w)
    t = draw(st.fractions(min_value=0, max_value=1, max_denominator=8))
    return BunchStats(index, v, w, lo + (hi - lo) * t)


@st.composite
def specs(draw, min_n=2, max_n=6):
    n = draw(st.integers(min_n, max_n))
    return SystemSpec(tuple(draw(bunches(i + 1)) for i in range(n)))


def _solve_exact(columns, rhs):
    """Unique x with sum_j x_j columns[j] = rhs, or None if none/not unique."""
    m, k = len(rhs), len(columns)
    rows = [[columns[j][i] for j in range(k)] + [rhs[i]] for i in range(m)]
    pivots, r = [], 0
    for c in range(k):
        p = next((i for i in range(r, m) if rows[i][c] != 0), None)
        if p is None:
            return None
        rows[r], rows[p] = rows[p], rows[r]
        for i in range(m):
            if i != r and rows[i][c] != 0:
                f = rows[i][c] / rows[r][c]
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[r])]
        pivots.append(r)
        r += 1
    if any(rows[i][k] != 0 for i in range(r, m)):
        return None
    return [rows[i][k] / rows[i][i] for i in range(k)]


def brute_lp_min(program):
    """Minimum of an atom program by enumerating every basic solution."""
    from cyclic_contextuality.model import all_atoms

    atoms = list(all_atoms(program.num_vars))
    rows = program.rows

    def column(atom):
        out = []
        for mono, _ in rows:
            v = 1
            for i in mono:
                v *= atom[i]
            out.append(Fraction(v))
        return out

    cols = [column(a) for a in atoms]
    rhs = [r for _, r in rows]
    best = None
    for size in range(1, len(rows) + 1):
        for support in itertools.combinations(range(len(atoms)), size):
            x = _solve_exact([cols[j] for j in support], rhs)
            if x is None or any(v < 0 for v in x):
                continue
            value = sum(v * program.atom_cost(atoms[j]) for v, j in zip(x, support))
            best = value if best is None else min(best, value)
    return best
