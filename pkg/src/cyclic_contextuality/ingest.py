"""Reading and writing system specs, count tables, reports and witnesses.

Documents are plain JSON-compatible dicts.  Every rational is written as a
``"p/q"`` string; on input, decimal strings and ``"p/q"`` strings are both
accepted and parsed exactly.  :func:`dumps` gives the canonical text form
(sorted keys, no insignificant whitespace).
"""
from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from decimal import Decimal, localcontext
from fractions import Fraction
from typing import Any, Iterable, Mapping, Optional, Union

from .model import (
    AnalysisReport,
    BunchStats,
    ConnectionVector,
    CouplingPMF,
    SystemSpec,
    ValidationError,
    atom_label,
    format_rational,
    parse_atom_label,
    require_valid,
    to_rational,
    variable_names,
)

BUNCH_FIELDS = ("v_mean", "w_next_mean", "product_mean")
COUNTS_HEADER = ("context", "v_outcome", "w_outcome", "count")
DECIMAL_DIGITS = 12


class SpecFormatError(ValidationError):
    """A document does not follow the expected schema.

    ``location`` is a field path such as ``bunches[2].v_mean`` or, for text
    that is not even well-formed, ``line L column C``.
    """

    def __init__(self, message: str, location: str = ""):
        self.location = location
        super().__init__(f"{location}: {message}" if location else message)


def dumps(document: Mapping[str, Any]) -> str:
    return json.dumps(document, sort_keys=True, separators=(",", ":"))


def _load(source: Union[str, bytes, Mapping[str, Any]]) -> Mapping[str, Any]:
    if isinstance(source, Mapping):
        return source
    try:
        doc = json.loads(source, parse_float=Decimal)
    except json.JSONDecodeError as exc:
        raise SpecFormatError(exc.msg, f"line {exc.lineno} column {exc.colno}") from exc
    if not isinstance(doc, dict):
        raise SpecFormatError("top level must be an object", "$")
    return doc


def _rational(value: Any, where: str) -> Fraction:
    # JSON floats arrive as Decimal, so nothing here ever sees a binary float
    if isinstance(value, bool) or not isinstance(value, (str, int, Decimal)):
        raise SpecFormatError(f"expected a number or numeric string, got {value!r}", where)
    try:
        return to_rational(value)
    except (TypeError, ValueError) as exc:
        raise SpecFormatError(str(exc), where) from exc


def _integer(value: Any, where: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise SpecFormatError(f"expected an integer, got {value!r}", where)
    return value


def _check_keys(obj: Mapping, required: Iterable[str], optional: Iterable[str], where: str) -> None:
    required = tuple(required)
    for key in required:
        if key not in obj:
            raise SpecFormatError(f"missing field {key!r}", where or "$")
    extra = sorted(set(obj) - set(required) - set(optional))
    if extra:
        raise SpecFormatError(f"unknown field {extra[0]!r}", where or "$")


def parse_spec(source: Union[str, bytes, Mapping[str, Any]], validate: bool = True) -> SystemSpec:
    """Build a :class:`SystemSpec` from a spec document.

    Bunches may appear in any order but every context ``1..n`` must occur
    exactly once.  With ``validate`` on, bunches no distribution can
    produce raise :class:`InvalidSystemError` listing each offender.
    """
    doc = _load(source)
    _check_keys(doc, ("n", "bunches"), ("note",), "")
    n = _integer(doc["n"], "n")
    if n < 2:
        raise SpecFormatError(f"n must be at least 2, got {n}", "n")
    raw = doc["bunches"]
    if not isinstance(raw, list):
        raise SpecFormatError("expected a list", "bunches")
    note = doc.get("note", "")
    if not isinstance(note, str):
        raise SpecFormatError("expected a string", "note")

    by_context: dict[int, BunchStats] = {}
    for pos, item in enumerate(raw):
        where = f"bunches[{pos}]"
        if not isinstance(item, Mapping):
            raise SpecFormatError("expected an object", where)
        _check_keys(item, ("context",) + BUNCH_FIELDS, (), where)
        ctx = _integer(item["context"], f"{where}.context")
        if not 1 <= ctx <= n:
            raise SpecFormatError(f"context {ctx} is outside 1..{n}", f"{where}.context")
        if ctx in by_context:
            raise SpecFormatError(f"context {ctx} appears twice", f"{where}.context")
        values = [_rational(item[f], f"{where}.{f}") for f in BUNCH_FIELDS]
        by_context[ctx] = BunchStats(ctx, *values)
    missing = [c for c in range(1, n + 1) if c not in by_context]
    if missing:
        raise SpecFormatError(f"no bunch for context {missing[0]}", "bunches")

    spec = SystemSpec(tuple(by_context[c] for c in range(1, n + 1)), note=note)
    return require_valid(spec) if validate else spec


def spec_to_document(spec: SystemSpec) -> dict[str, Any]:
    doc: dict[str, Any] = {
        "n": spec.n,
        "bunches": [
            {
                "context": b.index,
                "v_mean": format_rational(b.v_mean),
                "w_next_mean": format_rational(b.w_next_mean),
                "product_mean": format_rational(b.product_mean),
            }
            for b in spec.bunches
        ],
    }
    if spec.note:
        doc["note"] = spec.note
    return doc


def serialize_spec(spec: SystemSpec) -> str:
    return dumps(spec_to_document(spec))


@dataclass(frozen=True)
class CountsRecord:
    """How often context ``context`` produced outcome ``(v_outcome, w_outcome)``."""

    context: int
    v_outcome: int
    w_outcome: int
    count: int

    def __post_init__(self) -> None:
        if isinstance(self.context, bool) or not isinstance(self.context, int) or self.context < 1:
            raise ValidationError(f"context must be a positive integer, got {self.context!r}")
        for name in ("v_outcome", "w_outcome"):
            if getattr(self, name) not in (1, -1):
                raise ValidationError(f"{name} must be +1 or -1, got {getattr(self, name)!r}")
        if isinstance(self.count, bool) or not isinstance(self.count, int) or self.count < 0:
            raise ValidationError(f"count must be a non-negative integer, got {self.count!r}")


def _outcome(text: str, where: str) -> int:
    token = text.strip()
    if token in ("+", "+1", "1"):
        return 1
    if token in ("-", "-1"):
        return -1
    raise SpecFormatError(f"outcome must be +1 or -1, got {text!r}", where)


def parse_counts(text: str) -> list[CountsRecord]:
    """Read a comma-delimited counts table with a ``context,v_outcome,w_outcome,count`` header."""
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise SpecFormatError("empty counts file", "line 1") from None
    if tuple(h.strip() for h in header) != COUNTS_HEADER:
        raise SpecFormatError(f"header must be {','.join(COUNTS_HEADER)}", "line 1")
    records = []
    for row in reader:
        line = f"line {reader.line_num}"
        if not row or all(not cell.strip() for cell in row):
            continue
        if len(row) != len(COUNTS_HEADER):
            raise SpecFormatError(f"expected 4 fields, got {len(row)}", line)
        try:
            context, count = int(row[0]), int(row[3])
        except ValueError:
            raise SpecFormatError("context and count must be integers", line) from None
        try:
            records.append(
                CountsRecord(context, _outcome(row[1], line), _outcome(row[2], line), count)
            )
        except SpecFormatError:
            raise
        except ValidationError as exc:
            raise SpecFormatError(str(exc), line) from exc
    return records


def counts_to_spec(records: Iterable[CountsRecord], n: Optional[int] = None) -> SystemSpec:
    """Relative frequencies of each context as a :class:`SystemSpec`.

    ``n`` defaults to the largest context mentioned.  Rows for the same cell
    are added up.
    """
    records = list(records)
    if n is None:
        if not records:
            raise ValidationError("no count records")
        n = max(r.context for r in records)
    table: dict[int, dict[tuple[int, int], int]] = {c: {} for c in range(1, n + 1)}
    for r in records:
        if r.context > n:
            raise ValidationError(f"context {r.context} exceeds n = {n}")
        cell = (r.v_outcome, r.w_outcome)
        table[r.context][cell] = table[r.context].get(cell, 0) + r.count
    bunches = []
    for ctx in range(1, n + 1):
        cells = table[ctx]
        if not cells:
            raise ValidationError(f"context {ctx} has no records")
        total = sum(cells.values())
        if total == 0:
            raise ValidationError(f"context {ctx} has a zero total count")
        v = Fraction(sum(c * a for (a, _), c in cells.items()), total)
        w = Fraction(sum(c * b for (_, b), c in cells.items()), total)
        p = Fraction(sum(c * a * b for (a, b), c in cells.items()), total)
        bunches.append(BunchStats(ctx, v, w, p))
    return require_valid(SystemSpec(tuple(bunches)))


def decimal_text(x: Fraction, digits: int = DECIMAL_DIGITS) -> str:
    """``x`` rounded to ``digits`` significant digits, for people to read."""
    with localcontext() as ctx:
        ctx.prec = digits
        d = Decimal(x.numerator) / Decimal(x.denominator)
        return format(d.normalize(), "f")


_REPORT_RATIONALS = ("delta0", "delta_min", "cntx", "s1_bunches", "main_criterion_lhs")


def emit_report(report: AnalysisReport) -> dict[str, Any]:
    doc: dict[str, Any] = {name: format_rational(getattr(report, name)) for name in _REPORT_RATIONALS}
    conns = report.optimal_connections.values
    doc.update(
        n=report.n,
        contextual=report.contextual,
        argmax_branch=report.argmax_branch,
        canonical_signs=list(report.canonical_signs),
        optimal_connections=[format_rational(c) for c in conns],
        connection_case=report.connection_case,
        notes=list(report.notes),
    )
    decimals = {name: decimal_text(getattr(report, name)) for name in _REPORT_RATIONALS}
    decimals["optimal_connections"] = [decimal_text(c) for c in conns]
    doc["decimal"] = decimals
    return doc


def parse_report(source: Union[str, Mapping[str, Any]]) -> AnalysisReport:
    """Inverse of :func:`emit_report`; the ``decimal`` block is ignored."""
    doc = _load(source)
    fields = _REPORT_RATIONALS + (
        "n",
        "contextual",
        "argmax_branch",
        "canonical_signs",
        "optimal_connections",
        "connection_case",
        "notes",
    )
    _check_keys(doc, fields, ("decimal",), "")
    return AnalysisReport(
        n=_integer(doc["n"], "n"),
        contextual=bool(doc["contextual"]),
        argmax_branch=str(doc["argmax_branch"]),
        canonical_signs=tuple(doc["canonical_signs"]),
        optimal_connections=ConnectionVector(
            tuple(
                _rational(c, f"optimal_connections[{i}]")
                for i, c in enumerate(doc["optimal_connections"])
            )
        ),
        connection_case=_integer(doc["connection_case"], "connection_case"),
        notes=tuple(doc["notes"]),
        **{name: _rational(doc[name], name) for name in _REPORT_RATIONALS},
    )


def emit_witness(pmf: CouplingPMF) -> dict[str, Any]:
    """Nonzero atoms of a coupling, labelled by outcome strings like ``"+-+-"``."""
    return {
        "n": pmf.n,
        "variables": variable_names(pmf.n),
        "atoms": [
            {
                "outcome": atom_label(atom),
                "probability": format_rational(p),
                "decimal": decimal_text(p),
            }
            for atom, p in pmf.atoms.items()
            if p
        ],
    }


def parse_witness(source: Union[str, Mapping[str, Any]]) -> CouplingPMF:
    doc = _load(source)
    _check_keys(doc, ("n", "atoms"), ("variables", "delta", "delta_min", "connections"), "")
    n = _integer(doc["n"], "n")
    atoms: dict = {}
    for pos, item in enumerate(doc["atoms"]):
        where = f"atoms[{pos}]"
        if not isinstance(item, Mapping):
            raise SpecFormatError("expected an object", where)
        _check_keys(item, ("outcome", "probability"), ("decimal",), where)
        try:
            atom = parse_atom_label(item["outcome"])
        except ValueError as exc:
            raise SpecFormatError(str(exc), f"{where}.outcome") from exc
        if len(atom) != 2 * n:
            raise SpecFormatError(f"outcome needs {2 * n} signs", f"{where}.outcome")
        if atom in atoms:
            raise SpecFormatError("outcome listed twice", f"{where}.outcome")
        atoms[atom] = _rational(item["probability"], f"{where}.probability")
    return CouplingPMF(n, atoms)
