"""Domain types for cyclic systems of binary measurements.

A cyclic system of rank ``n`` has properties ``q_1..q_n`` measured in the
contexts ``(q_1, q_2), ..., (q_n, q_1)``.  Context ``i`` yields the bunch
``(V_i, W_{i+1})`` of +/-1 random variables, fully described by three
expectations.  All numbers are exact :class:`fractions.Fraction` values.

Indexing convention: Python-facing positions are 0-based.  The ``context``
field of a bunch (and of serialized documents) is the 1-based lab label.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from decimal import Decimal
from fractions import Fraction
from typing import Iterable, Iterator, Mapping, Sequence, Union

Rational = Fraction
RationalLike = Union[Fraction, int, str, Decimal, float]

ONE = Fraction(1)
ZERO = Fraction(0)


class ValidationError(ValueError):
    """Input breaks a structural or probabilistic invariant."""


class InvalidSystemError(ValidationError):
    """A system has bunches whose expectations cannot come from any distribution."""

    def __init__(self, violations: Sequence["Violation"]):
        self.violations = list(violations)
        lines = "; ".join(v.describe() for v in self.violations)
        super().__init__(f"invalid cyclic system: {lines}")


class CouplingError(ValidationError):
    """A probability mass function is malformed or inconsistent with its system."""


def to_rational(value: RationalLike) -> Fraction:
    """Convert ``value`` to an exact fraction.

    Strings may be decimals (``"0.7071"``) or ratios (``"-3/8"``).  Floats go
    through their shortest decimal repr, so ``0.7071`` becomes ``7071/10000``
    rather than the nearest binary fraction.
    """
    if isinstance(value, bool):
        raise TypeError("booleans are not expectations")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        return Fraction(repr(value))
    if isinstance(value, Decimal):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"not an exact number: {value!r}") from exc
    raise TypeError(f"cannot interpret {type(value).__name__} as a rational")


def format_rational(x: Fraction) -> str:
    """Canonical ``p/q`` text; the denominator is always written."""
    return f"{x.numerator}/{x.denominator}"


@dataclass(frozen=True)
class BunchStats:
    """Expectations of one observed bunch ``(V_i, W_{i+1})``.

    ``index`` is the 1-based context label.  Pair feasibility is *not*
    enforced here; :func:`validate_system` reports it.
    """

    index: int
    v_mean: Fraction
    w_next_mean: Fraction
    product_mean: Fraction

    def __post_init__(self) -> None:
        if not isinstance(self.index, int) or self.index < 1:
            raise ValidationError(f"bunch index must be a positive integer, got {self.index!r}")
        for name in ("v_mean", "w_next_mean", "product_mean"):
            object.__setattr__(self, name, to_rational(getattr(self, name)))

    def bounds(self) -> tuple[Fraction, Fraction]:
        """Admissible range of ``product_mean`` given the two marginals."""
        lo = abs(self.v_mean + self.w_next_mean) - 1
        hi = 1 - abs(self.v_mean - self.w_next_mean)
        return lo, hi


@dataclass(frozen=True)
class SystemSpec:
    """A cyclic system: one :class:`BunchStats` per context, in cycle order."""

    bunches: tuple[BunchStats, ...]
    note: str = ""

    def __post_init__(self) -> None:
        bunches = tuple(self.bunches)
        object.__setattr__(self, "bunches", bunches)
        if len(bunches) < 2:
            raise ValidationError(f"a cyclic system needs n >= 2 contexts, got {len(bunches)}")
        for pos, bunch in enumerate(bunches):
            if bunch.index != pos + 1:
                raise ValidationError(
                    f"bunch at position {pos} carries context {bunch.index}, expected {pos + 1}"
                )

    @classmethod
    def from_bunches(
        cls, triples: Iterable[tuple[RationalLike, RationalLike, RationalLike]], note: str = ""
    ) -> "SystemSpec":
        """Build from ``(<V_i>, <W_{i+1}>, <V_i W_{i+1}>)`` triples."""
        return cls(
            tuple(BunchStats(i + 1, v, w, p) for i, (v, w, p) in enumerate(triples)), note=note
        )

    @classmethod
    def from_marginals(
        cls,
        v_means: Sequence[RationalLike],
        w_means: Sequence[RationalLike],
        products: Sequence[RationalLike],
        note: str = "",
    ) -> "SystemSpec":
        """Build from per-property marginals.

        ``w_means[i]`` is ``<W_i>`` (the property's value in context ``i-1``),
        ``products[i]`` is ``<V_i W_{i+1}>``.
        """
        n = len(v_means)
        if len(w_means) != n or len(products) != n:
            raise ValidationError("v_means, w_means and products must have equal length")
        return cls.from_bunches(
            ((v_means[i], w_means[(i + 1) % n], products[i]) for i in range(n)), note=note
        )

    @property
    def n(self) -> int:
        return len(self.bunches)

    @property
    def v_means(self) -> tuple[Fraction, ...]:
        return tuple(b.v_mean for b in self.bunches)

    @property
    def w_means(self) -> tuple[Fraction, ...]:
        """``<W_i>`` for each property, taken from the preceding bunch."""
        n = self.n
        return tuple(self.bunches[(i - 1) % n].w_next_mean for i in range(n))

    @property
    def products(self) -> tuple[Fraction, ...]:
        return tuple(b.product_mean for b in self.bunches)

    def connection_max(self) -> tuple[Fraction, ...]:
        """Largest admissible ``<V_i W_i>``: ``1 - |<V_i> - <W_i>|``."""
        return tuple(1 - abs(v - w) for v, w in zip(self.v_means, self.w_means))

    def connection_min(self) -> tuple[Fraction, ...]:
        """Smallest admissible ``<V_i W_i>``: ``|<V_i> + <W_i>| - 1``."""
        return tuple(abs(v + w) - 1 for v, w in zip(self.v_means, self.w_means))

    def connection_gaps(self) -> tuple[Fraction, ...]:
        """``|<V_i> - <W_i>|`` per property."""
        return tuple(abs(v - w) for v, w in zip(self.v_means, self.w_means))

    # Symmetries of the cycle.  All of them leave CNTX unchanged.

    def rotated(self, shift: int) -> "SystemSpec":
        """Relabel context ``i`` as ``i - shift``."""
        n = self.n
        order = [self.bunches[(i + shift) % n] for i in range(n)]
        return SystemSpec.from_bunches(
            ((b.v_mean, b.w_next_mean, b.product_mean) for b in order), note=self.note
        )

    def reflected(self) -> "SystemSpec":
        """Traverse the cycle backwards: property ``i`` becomes ``n - 1 - i``.

        New context ``j`` is old context ``n - 2 - j`` with the roles of its
        two measurements exchanged.
        """
        n = self.n
        order = [self.bunches[(n - 2 - j) % n] for j in range(n)]
        return SystemSpec.from_bunches(
            ((b.w_next_mean, b.v_mean, b.product_mean) for b in order), note=self.note
        )

    def negated(self, signs: Sequence[int]) -> "SystemSpec":
        """Multiply every measurement of property ``i`` by ``signs[i]``."""
        n = self.n
        if len(signs) != n or any(s not in (1, -1) for s in signs):
            raise ValidationError("signs must be n values in {-1, +1}")
        return SystemSpec.from_bunches(
            (
                (
                    signs[i] * b.v_mean,
                    signs[(i + 1) % n] * b.w_next_mean,
                    signs[i] * signs[(i + 1) % n] * b.product_mean,
                )
                for i, b in enumerate(self.bunches)
            ),
            note=self.note,
        )


@dataclass(frozen=True)
class Violation:
    """One bunch whose expectations no distribution can produce."""

    context: int
    quantity: str
    value: Fraction
    lower: Fraction
    upper: Fraction

    def describe(self) -> str:
        return (
            f"context {self.context}: {self.quantity} = {format_rational(self.value)} "
            f"outside [{format_rational(self.lower)}, {format_rational(self.upper)}]"
        )


def validate_system(spec: SystemSpec) -> list[Violation]:
    """Return the infeasible bunches of ``spec``; empty means every bunch exists."""
    found = []
    for b in spec.bunches:
        bad_marginal = False
        for name, value in (("v_mean", b.v_mean), ("w_next_mean", b.w_next_mean)):
            if not -1 <= value <= 1:
                found.append(Violation(b.index, name, value, -ONE, ONE))
                bad_marginal = True
        if bad_marginal:
            continue
        lo, hi = b.bounds()
        if not lo <= b.product_mean <= hi:
            found.append(Violation(b.index, "product_mean", b.product_mean, lo, hi))
    return found


def require_valid(spec: SystemSpec) -> SystemSpec:
    violations = validate_system(spec)
    if violations:
        raise InvalidSystemError(violations)
    return spec


@dataclass(frozen=True)
class ConnectionVector:
    """Hypothetical connection expectations ``<V_i W_i>``, one per property."""

    values: tuple[Fraction, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "values", tuple(to_rational(v) for v in self.values))

    def __len__(self) -> int:
        return len(self.values)

    def __iter__(self) -> Iterator[Fraction]:
        return iter(self.values)

    def __getitem__(self, i: int) -> Fraction:
        return self.values[i]

    def total(self) -> Fraction:
        return sum(self.values, ZERO)


def connection_violations(spec: SystemSpec, conns: ConnectionVector) -> list[Violation]:
    """Entries of ``conns`` outside the pair range implied by ``spec``'s marginals."""
    if len(conns) != spec.n:
        raise ValidationError(f"expected {spec.n} connection values, got {len(conns)}")
    found = []
    for i, (c, lo, hi) in enumerate(zip(conns, spec.connection_min(), spec.connection_max())):
        if not lo <= c <= hi:
            found.append(Violation(i + 1, "connection_mean", c, lo, hi))
    return found


Atom = tuple[int, ...]


def all_atoms(num_vars: int) -> Iterator[Atom]:
    """Every +/-1 assignment, ``+1`` before ``-1``, first variable most significant."""
    return itertools.product((1, -1), repeat=num_vars)


def atom_index(atom: Atom) -> int:
    idx = 0
    for x in atom:
        idx = (idx << 1) | (x < 0)
    return idx


def atom_label(atom: Atom) -> str:
    return "".join("+" if x > 0 else "-" for x in atom)


def parse_atom_label(label: str) -> Atom:
    if not label or any(ch not in "+-" for ch in label):
        raise ValueError(f"bad atom label {label!r}")
    return tuple(1 if ch == "+" else -1 for ch in label)


@dataclass(frozen=True)
class JointPMF:
    """Exact joint distribution of ``num_vars`` +/-1 variables.

    Zero-probability atoms are dropped; ``atoms`` is kept in canonical
    atom order so equal distributions compare and serialize identically.
    """

    num_vars: int
    atoms: Mapping[Atom, Fraction]

    def __post_init__(self) -> None:
        clean: dict[Atom, Fraction] = {}
        for atom, p in self.atoms.items():
            atom = tuple(int(x) for x in atom)
            if len(atom) != self.num_vars or any(x not in (1, -1) for x in atom):
                raise CouplingError(f"atom {atom} is not a +/-1 vector of length {self.num_vars}")
            p = to_rational(p)
            if p < 0:
                raise CouplingError(f"negative probability {p} at atom {atom_label(atom)}")
            if p:
                clean[atom] = clean.get(atom, ZERO) + p
        total = sum(clean.values(), ZERO)
        if total != 1:
            raise CouplingError(f"probabilities sum to {total}, not 1")
        ordered = dict(sorted(clean.items(), key=lambda kv: atom_index(kv[0])))
        object.__setattr__(self, "atoms", ordered)

    def expectation(self, positions: Sequence[int]) -> Fraction:
        """``E[prod_{p in positions} X_p]``."""
        total = ZERO
        for atom, p in self.atoms.items():
            sign = 1
            for pos in positions:
                sign *= atom[pos]
            total += sign * p
        return total

    def prob_differ(self, a: int, b: int) -> Fraction:
        return sum((p for atom, p in self.atoms.items() if atom[a] != atom[b]), ZERO)

    def marginal(self, positions: Sequence[int]) -> dict[Atom, Fraction]:
        out: dict[Atom, Fraction] = {}
        for atom, p in self.atoms.items():
            key = tuple(atom[pos] for pos in positions)
            out[key] = out.get(key, ZERO) + p
        return out


def v_position(i: int, n: int) -> int:
    """Position of ``V_i`` in the cycle order ``V_1, W_2, V_2, W_3, ..., V_n, W_1``."""
    return 2 * (i % n)


def w_position(i: int, n: int) -> int:
    """Position of ``W_i``; it sits right after ``V_{i-1}``."""
    return 2 * ((i - 1) % n) + 1


def variable_names(n: int) -> list[str]:
    names = []
    for i in range(n):
        names += [f"V{i + 1}", f"W{(i + 1) % n + 1}"]
    return names


@dataclass(frozen=True)
class CouplingPMF(JointPMF):
    """A joint of all ``2n`` variables of a cyclic system, in cycle order."""

    num_vars: int = field(init=False)
    n: int = 0
    atoms: Mapping[Atom, Fraction] = field(default_factory=dict)

    def __init__(self, n: int, atoms: Mapping[Atom, Fraction]):
        if n < 2:
            raise CouplingError(f"a system coupling needs n >= 2, got {n}")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "num_vars", 2 * n)
        object.__setattr__(self, "atoms", atoms)
        self.__post_init__()

    def bunch_expectations(self, i: int) -> tuple[Fraction, Fraction, Fraction]:
        """``(<V_i>, <W_{i+1}>, <V_i W_{i+1}>)`` under this coupling."""
        a, b = v_position(i, self.n), w_position(i + 1, self.n)
        return self.expectation((a,)), self.expectation((b,)), self.expectation((a, b))

    def connection_expectation(self, i: int) -> Fraction:
        return self.expectation((v_position(i, self.n), w_position(i, self.n)))

    def connection_vector(self) -> ConnectionVector:
        return ConnectionVector(tuple(self.connection_expectation(i) for i in range(self.n)))

    def disagreement(self, i: int) -> Fraction:
        """``Pr[V_i != W_i]``."""
        return self.prob_differ(v_position(i, self.n), w_position(i, self.n))


def coupling_mismatches(pmf: CouplingPMF, spec: SystemSpec) -> list[str]:
    """Bunches whose 2-marginal under ``pmf`` differs from ``spec``."""
    if pmf.n != spec.n:
        return [f"coupling has n={pmf.n}, system has n={spec.n}"]
    out = []
    for i, b in enumerate(spec.bunches):
        got = pmf.bunch_expectations(i)
        want = (b.v_mean, b.w_next_mean, b.product_mean)
        if got != want:
            out.append(f"context {b.index}: coupling gives {got}, system has {want}")
    return out


def delta_of_coupling(pmf: CouplingPMF) -> Fraction:
    """Total connection disagreement ``sum_i Pr[V_i != W_i]``."""
    return sum((pmf.disagreement(i) for i in range(pmf.n)), ZERO)


@dataclass(frozen=True)
class AnalysisReport:
    """Everything the closed-form analysis says about one system."""

    n: int
    delta0: Fraction
    delta_min: Fraction
    cntx: Fraction
    contextual: bool
    s1_bunches: Fraction
    main_criterion_lhs: Fraction
    argmax_branch: str
    canonical_signs: tuple[int, ...]
    optimal_connections: ConnectionVector
    connection_case: int
    notes: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if self.cntx != self.delta_min - self.delta0 or self.cntx < 0:
            raise ValidationError("report must satisfy cntx = delta_min - delta0 >= 0")
        if self.contextual != (self.cntx > 0):
            raise ValidationError("report must satisfy contextual <=> cntx > 0")
