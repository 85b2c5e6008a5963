"""Brute-force oracle over the full coupling polytope.

A coupling of a cyclic system is a probability vector over all ``2**(2n)``
sign assignments of ``V_1, W_2, V_2, ..., V_n, W_1``.  Fixing the bunch
expectations gives ``3n + 1`` equality rows, and ``Delta`` is a linear
objective.  This module solves that program exactly.

Solver notes
------------
* Every constraint and objective term is a monomial of degree <= 2 whose
  variables are neighbours on the cycle.  A column's reduced cost is then
  a cycle-structured function of its +/-1 assignment, so pricing over all
  atoms is a small dynamic program rather than a scan.  Pricing is still
  exact and complete: no atom is ever skipped.
* The basis inverse is kept fraction-free as ``adj(B) / det(B)`` with
  integer entries (Edmonds' integer-preserving pivoting), so no rational
  normalisation is needed inside the loop.
* Entering columns use Dantzig's rule while the objective strictly
  improves and switch to Bland's lowest-index rule after a degenerate
  pivot, until the next strict improvement.  Ratio-test ties always go to
  the lowest variable index.  Together this rules out cycling.
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple, Optional, Sequence

from .model import (
    Atom,
    ConnectionVector,
    CouplingPMF,
    SystemSpec,
    ValidationError,
    atom_index,
    require_valid,
    to_rational,
    v_position,
    w_position,
)

DEFAULT_LIMIT = 7

Monomial = tuple[int, ...]


class ResourceLimitError(RuntimeError):
    """System is larger than the configured oracle limit."""


class SolverError(RuntimeError):
    """The simplex reached a state that valid input cannot produce."""


def _normalize_monomial(mono: Sequence[int], k: int) -> Monomial:
    mono = tuple(sorted(int(v) for v in mono))
    if len(mono) > 2 or any(not 0 <= v < k for v in mono):
        raise ValidationError(f"monomial {mono} is not over variables 0..{k - 1}")
    if len(mono) == 2:
        a, b = mono
        if a == b or not (b == (a + 1) % k or a == (b + 1) % k):
            raise ValidationError(f"monomial {mono} does not join cycle neighbours")
    return mono


@dataclass(frozen=True)
class AtomProgram:
    """Linear program over the probabilities of all atoms of ``num_vars`` variables.

    ``constraints`` pins ``E[monomial] = rhs``; the normalisation row
    ``E[1] = 1`` is always added.  ``objective`` (minimised) is a sum of
    ``coef * E[monomial]``.  An empty objective asks for feasibility only.
    """

    num_vars: int
    constraints: tuple[tuple[Monomial, Fraction], ...]
    objective: tuple[tuple[Monomial, Fraction], ...] = ()

    def __post_init__(self) -> None:
        if self.num_vars < 2:
            raise ValidationError("an atom program needs at least two variables")
        cons = tuple(
            (_normalize_monomial(m, self.num_vars), to_rational(r)) for m, r in self.constraints
        )
        obj = tuple(
            (_normalize_monomial(m, self.num_vars), to_rational(c)) for m, c in self.objective
        )
        object.__setattr__(self, "constraints", cons)
        object.__setattr__(self, "objective", obj)

    @property
    def num_atoms(self) -> int:
        return 2**self.num_vars

    @property
    def rows(self) -> tuple[tuple[Monomial, Fraction], ...]:
        return (((), Fraction(1)),) + self.constraints

    def edge_of(self, mono: Monomial) -> int:
        a, b = mono
        return a if b == (a + 1) % self.num_vars else b

    def atom_cost(self, atom: Atom) -> Fraction:
        return sum((c * _mono_value(m, atom) for m, c in self.objective), Fraction(0))


def _mono_value(mono: Monomial, atom: Atom) -> int:
    out = 1
    for v in mono:
        out *= atom[v]
    return out


class _CycleFunction:
    """``const + sum h[i] x_i + sum J[i] x_i x_{i+1}`` over a cycle, integer coefficients."""

    __slots__ = ("const", "h", "J")

    def __init__(self, k: int):
        self.const = 0
        self.h = [0] * k
        self.J = [0] * k

    def add(self, program: AtomProgram, mono: Monomial, coef: int) -> None:
        if not mono:
            self.const += coef
        elif len(mono) == 1:
            self.h[mono[0]] += coef
        else:
            self.J[program.edge_of(mono)] += coef

    def scale(self, s: int) -> None:
        self.const *= s
        self.h = [s * v for v in self.h]
        self.J = [s * v for v in self.J]

    def minimize(self, fixed: Optional[Sequence[Optional[int]]] = None) -> tuple[int, Atom]:
        """Exact minimum over all atoms agreeing with ``fixed`` (``None`` = free)."""
        h, J = self.h, self.J
        k = len(h)
        choices = [(1, -1) if fixed is None or fixed[i] is None else (fixed[i],) for i in range(k)]
        best_val, best_atom = None, None
        for x0 in choices[0]:
            cost = {x0: self.const + h[0] * x0}
            back = []
            for i in range(1, k):
                new, ptr = {}, {}
                for xi in choices[i]:
                    cand = min(cost, key=lambda xp: (cost[xp] + J[i - 1] * xp * xi, -xp))
                    new[xi] = cost[cand] + J[i - 1] * cand * xi + h[i] * xi
                    ptr[xi] = cand
                back.append(ptr)
                cost = new
            for xl, c in cost.items():
                total = c + J[k - 1] * xl * x0
                if best_val is None or total < best_val:
                    atom = [xl]
                    for ptr in reversed(back):
                        atom.append(ptr[atom[-1]])
                    best_val, best_atom = total, tuple(reversed(atom))
        return best_val, best_atom

    def lowest_negative(self) -> Atom:
        """Lowest-index atom with a negative value; one must exist."""
        k = len(self.h)
        fixed: list[Optional[int]] = [None] * k
        for t in range(k):
            fixed[t] = 1
            if self.minimize(fixed)[0] >= 0:
                fixed[t] = -1
        return tuple(fixed)


class LPResult(NamedTuple):
    feasible: bool
    objective: Optional[Fraction]
    atoms: dict[Atom, Fraction]
    duals: tuple[Fraction, ...]
    dual_objective: Optional[Fraction]
    iterations: int


class _Simplex:
    def __init__(self, program: AtomProgram, max_iterations: int):
        self.program = program
        self.k = program.num_vars
        self.max_iterations = max_iterations
        rows = program.rows
        self.m = len(rows)
        self.monos = [mono for mono, _ in rows]
        self.rhs = [rhs for _, rhs in rows]
        self.row_sign = [1 if rhs >= 0 else -1 for rhs in self.rhs]
        self.scale_b = math.lcm(*(r.denominator for r in self.rhs))
        b = [int(abs(r) * self.scale_b) for r in self.rhs]
        m = self.m
        self.N = [[int(i == j) for j in range(m)] for i in range(m)]
        self.det = 1
        self.beta = b
        self.artificial_base = program.num_atoms
        self.basis = [self.artificial_base + r for r in range(m)]
        self.atom_of: dict[int, Atom] = {}
        self.iterations = 0

    # -- linear algebra -------------------------------------------------
    def column(self, atom: Atom) -> list[int]:
        return [s * _mono_value(mono, atom) for s, mono in zip(self.row_sign, self.monos)]

    def solve_column(self, col: Sequence[int]) -> list[int]:
        return [sum(nr * c for nr, c in zip(row, col) if c) for row in self.N]

    def pivot(self, r: int, d: Sequence[int], atom: Atom) -> None:
        N, beta, det = self.N, self.beta, self.det
        dr = d[r]
        row_r, beta_r = N[r], beta[r]
        for i in range(self.m):
            if i == r:
                continue
            di = d[i]
            if di:
                N[i] = [(dr * a - di * b) // det for a, b in zip(N[i], row_r)]
                beta[i] = (dr * beta[i] - di * beta_r) // det
            elif dr != det:
                N[i] = [(dr * a) // det for a in N[i]]
                beta[i] = (dr * beta[i]) // det
        self.det = dr
        idx = atom_index(atom)
        self.basis[r] = idx
        self.atom_of[idx] = atom

    def is_artificial(self, var: int) -> bool:
        return var >= self.artificial_base

    # -- pricing ---------------------------------------------------------
    def _multipliers(self, basic_cost: Sequence[int]) -> list[int]:
        m = self.m
        u = [0] * m
        for i, c in enumerate(basic_cost):
            if c:
                row = self.N[i]
                for r in range(m):
                    u[r] += c * row[r]
        return u

    def _reduced_cost_function(self, cost_fn: Optional[_CycleFunction], u: Sequence[int]):
        f = _CycleFunction(self.k)
        if cost_fn is not None:
            f.const = cost_fn.const * self.det
            f.h = [v * self.det for v in cost_fn.h]
            f.J = [v * self.det for v in cost_fn.J]
        for r, mono in enumerate(self.monos):
            if u[r]:
                f.add(self.program, mono, -u[r] * self.row_sign[r])
        if self.det < 0:
            f.scale(-1)
        return f

    def _basic_costs(self, cost_fn: Optional[_CycleFunction], phase_one: bool) -> list[int]:
        out = []
        for var in self.basis:
            if self.is_artificial(var):
                out.append(1 if phase_one else 0)
            elif cost_fn is None:
                out.append(0)
            else:
                atom = self.atom_of[var]
                val = cost_fn.const + sum(h * x for h, x in zip(cost_fn.h, atom))
                val += sum(J * atom[i] * atom[(i + 1) % self.k] for i, J in enumerate(cost_fn.J))
                out.append(val)
        return out

    def run(self, cost_fn: Optional[_CycleFunction], phase_one: bool) -> list[int]:
        degenerate = False
        while True:
            u = self._multipliers(self._basic_costs(cost_fn, phase_one))
            price = self._reduced_cost_function(cost_fn, u)
            value, atom = price.minimize()
            if value >= 0:
                return u
            self.iterations += 1
            if self.iterations > self.max_iterations:
                raise SolverError(f"no convergence after {self.max_iterations} pivots")
            if degenerate:
                atom = price.lowest_negative()
            d = self.solve_column(self.column(atom))
            s = 1 if self.det > 0 else -1
            best = None
            for i in range(self.m):
                if d[i] * s <= 0:
                    continue
                if best is None:
                    best = i
                    continue
                lhs, rhs = self.beta[i] * d[best], self.beta[best] * d[i]
                if lhs < rhs or (lhs == rhs and self.basis[i] < self.basis[best]):
                    best = i
            if best is None:
                raise SolverError("unbounded direction in a bounded polytope")
            degenerate = self.beta[best] == 0
            self.pivot(best, d, atom)

    def drive_out_artificials(self) -> None:
        for i in range(self.m):
            if not self.is_artificial(self.basis[i]):
                continue
            f = _CycleFunction(self.k)
            for r, mono in enumerate(self.monos):
                if self.N[i][r]:
                    f.add(self.program, mono, self.N[i][r] * self.row_sign[r])
            lo, atom = f.minimize()
            if lo == 0:
                f.scale(-1)
                lo, atom = f.minimize()
            if lo == 0:
                continue  # redundant row; its artificial stays at zero
            self.pivot(i, self.solve_column(self.column(atom)), atom)

    def primal(self) -> dict[Atom, Fraction]:
        denom = self.det * self.scale_b
        out = {}
        for i, var in enumerate(self.basis):
            if self.beta[i] and not self.is_artificial(var):
                out[self.atom_of[var]] = Fraction(self.beta[i], denom)
        return out

    def artificial_mass(self) -> Fraction:
        total = sum(b for var, b in zip(self.basis, self.beta) if self.is_artificial(var))
        return Fraction(total, self.det * self.scale_b)


def _objective_function(program: AtomProgram) -> tuple[_CycleFunction, int]:
    scale = math.lcm(*(c.denominator for _, c in program.objective)) if program.objective else 1
    f = _CycleFunction(program.num_vars)
    for mono, coef in program.objective:
        f.add(program, mono, int(coef * scale))
    return f, scale


def solve(program: AtomProgram, max_iterations: int = 200_000) -> LPResult:
    """Exact two-phase simplex over all atoms of ``program``."""
    sx = _Simplex(program, max_iterations)
    sx.run(None, phase_one=True)
    if sx.artificial_mass() > 0:
        return LPResult(False, None, {}, (), None, sx.iterations)
    sx.drive_out_artificials()
    if not program.objective:
        return LPResult(True, None, sx.primal(), (), None, sx.iterations)
    cost_fn, scale = _objective_function(program)
    u = sx.run(cost_fn, phase_one=False)
    atoms = sx.primal()
    primal_obj = sum((p * program.atom_cost(a) for a, p in atoms.items()), Fraction(0))
    denom = sx.det * scale
    duals = tuple(Fraction(u[r] * sx.row_sign[r], denom) for r in range(sx.m))
    dual_obj = sum((y * rhs for y, rhs in zip(duals, sx.rhs)), Fraction(0))
    return LPResult(True, primal_obj, atoms, duals, dual_obj, sx.iterations)


# -- cyclic systems --------------------------------------------------------

def system_program(
    spec: SystemSpec,
    connections: Optional[ConnectionVector] = None,
    objective: Sequence[tuple[Monomial, Fraction]] = (),
) -> AtomProgram:
    """Couplings of ``spec``: bunch rows, plus optional pinned connections."""
    n = spec.n
    rows = []
    for i, b in enumerate(spec.bunches):
        v, w = v_position(i, n), w_position(i + 1, n)
        rows += [((v,), b.v_mean), ((w,), b.w_next_mean), ((v, w), b.product_mean)]
    if connections is not None:
        if len(connections) != n:
            raise ValidationError(f"expected {n} connection values, got {len(connections)}")
        for i, c in enumerate(connections):
            rows.append(((v_position(i, n), w_position(i, n)), c))
    return AtomProgram(2 * n, tuple(rows), tuple(objective))


def delta_objective(n: int) -> tuple[tuple[Monomial, Fraction], ...]:
    """``sum_i Pr[V_i != W_i] = n/2 - (1/2) sum_i E[V_i W_i]``."""
    half = Fraction(1, 2)
    terms = [((), n * half)]
    terms += [((v_position(i, n), w_position(i, n)), -half) for i in range(n)]
    return tuple(terms)


class MinDelta(NamedTuple):
    delta_min: Fraction
    witness: CouplingPMF


def _check_size(spec: SystemSpec, limit: int) -> None:
    if spec.n > limit:
        raise ResourceLimitError(
            f"n = {spec.n} exceeds the oracle limit {limit} ({2 ** (2 * spec.n)} atoms)"
        )


def min_delta(spec: SystemSpec, limit: int = DEFAULT_LIMIT) -> MinDelta:
    """Exact minimum of ``Delta`` over all couplings of ``spec``, with a witness."""
    _check_size(spec, limit)
    require_valid(spec)
    result = solve(system_program(spec, objective=delta_objective(spec.n)))
    if not result.feasible:
        raise SolverError("bunch constraints infeasible for a validated system")
    if result.objective != result.dual_objective:
        raise SolverError("primal and dual objectives disagree")
    return MinDelta(result.objective, CouplingPMF(spec.n, result.atoms))


def feasible_with_connections(
    spec: SystemSpec, conns: ConnectionVector, limit: int = DEFAULT_LIMIT
) -> tuple[bool, Optional[CouplingPMF]]:
    """Whether a coupling of ``spec`` realizes the connection vector ``conns``."""
    _check_size(spec, limit)
    require_valid(spec)
    result = solve(system_program(spec, connections=conns))
    if not result.feasible:
        return False, None
    return True, CouplingPMF(spec.n, result.atoms)


def random_objective(
    program: AtomProgram, rng: random.Random
) -> tuple[tuple[Monomial, Fraction], ...]:
    k = program.num_vars
    monos = [(i,) for i in range(k)] + [tuple(sorted((i, (i + 1) % k))) for i in range(k)]
    return tuple((m, Fraction(rng.randint(-12, 12), rng.randint(1, 7))) for m in dict.fromkeys(monos))


def sample_vertices(program: AtomProgram, count: int, seed: int) -> list[dict[Atom, Fraction]]:
    """Optimal basic solutions of ``program`` under seeded random objectives."""
    rng = random.Random(seed)
    out = []
    for _ in range(count):
        prog = AtomProgram(program.num_vars, program.constraints, random_objective(program, rng))
        result = solve(prog)
        if not result.feasible:
            raise SolverError("program is infeasible")
        out.append(result.atoms)
    return out


def enumerate_vertex_sample(
    spec: SystemSpec, count: int, seed: int, limit: int = DEFAULT_LIMIT
) -> list[CouplingPMF]:
    """Deterministic-by-seed vertices of the coupling polytope of ``spec``."""
    if count <= 0:
        return []
    _check_size(spec, limit)
    require_valid(spec)
    return [CouplingPMF(spec.n, atoms) for atoms in sample_vertices(system_program(spec), count, seed)]


def cycle_program(means: Sequence, corrs: Sequence) -> AtomProgram:
    """Joints of ``A_1..A_n`` with given means and cyclic adjacent products."""
    n = len(means)
    if len(corrs) != n:
        raise ValidationError("need one product per cycle edge")
    rows = [((i,), means[i]) for i in range(n)]
    rows += [((i, (i + 1) % n), corrs[i]) for i in range(n)]
    return AtomProgram(n, tuple(rows))


def cycle_lp_feasible(means: Sequence, corrs: Sequence) -> bool:
    return solve(cycle_program(means, corrs)).feasible
