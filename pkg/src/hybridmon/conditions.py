"""Event model, the condition language, and the interval abstraction.

Events carry a name and a real-valued payload.  Conditions are boolean
combinations of activity-name atoms and attribute-to-constant comparisons;
guards are the sub-language without name atoms.  The constants mentioned
across a model induce a finite partition of the reals into regions, and
every data question (satisfaction, satisfiability) reduces to finite
propositional reasoning over region assignments.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping

from .errors import (
    ConditionParseError,
    ConstantNotInPartitionError,
    MissingVariableError,
    UnknownIdentifierError,
)

# ---------------------------------------------------------------------------
# Signatures, events, traces
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EventSignature:
    """An activity name together with its attribute names."""

    name: str
    attributes: frozenset[str]


class SignatureSet:
    """The declared event signatures of a model.

    Names are unique; attribute sets may overlap across signatures.
    Activity names and attribute names must not collide, so that a bare
    identifier in a condition is unambiguous.
    """

    def __init__(self, signatures: Iterable[EventSignature]):
        self._by_name: dict[str, EventSignature] = {}
        for sig in signatures:
            if sig.name in self._by_name:
                raise UnknownIdentifierError(f"duplicate activity name {sig.name!r}")
            self._by_name[sig.name] = sig
        self.activity_names = frozenset(self._by_name)
        self.attribute_names = frozenset(
            a for sig in self._by_name.values() for a in sig.attributes
        )
        clash = self.activity_names & self.attribute_names
        if clash:
            raise UnknownIdentifierError(
                f"identifiers used both as activity and attribute: {sorted(clash)}"
            )

    def __iter__(self) -> Iterator[EventSignature]:
        return iter(self._by_name.values())

    def __contains__(self, name: str) -> bool:
        return name in self._by_name

    def __getitem__(self, name: str) -> EventSignature:
        return self._by_name[name]

    def attributes_of(self, name: str) -> frozenset[str]:
        return self._by_name[name].attributes


@dataclass(frozen=True)
class Event:
    """A named occurrence carrying one real value per payload attribute."""

    name: str
    payload: tuple[tuple[str, float], ...]

    @staticmethod
    def of(name: str, payload: Mapping[str, float] | None = None) -> "Event":
        items = tuple(sorted((payload or {}).items()))
        return Event(name, items)

    def value(self, attribute: str) -> float | None:
        for key, val in self.payload:
            if key == attribute:
                return val
        return None

    def payload_dict(self) -> dict[str, float]:
        return dict(self.payload)


Trace = tuple[Event, ...]


def make_trace(*events: Event) -> Trace:
    return tuple(events)


# ---------------------------------------------------------------------------
# Condition AST
# ---------------------------------------------------------------------------

COMPARISON_OPS = ("<", "=", ">")


class Condition:
    """Base class for condition AST nodes.  Instances are immutable."""

    __slots__ = ()


@dataclass(frozen=True)
class TrueCond(Condition):
    """The trivially true condition (used for absent guards)."""

    def __str__(self) -> str:
        return "true"


@dataclass(frozen=True)
class NameAtom(Condition):
    """Holds iff the event's activity name equals `name`."""

    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Comparison(Condition):
    """Holds iff the attribute is present and its value compares to `value`."""

    attribute: str
    op: str  # one of "<", "=", ">"
    value: float

    def __str__(self) -> str:
        return f"{self.attribute} {self.op} {format_number(self.value)}"


@dataclass(frozen=True)
class Neg(Condition):
    inner: Condition

    def __str__(self) -> str:
        return f"!({self.inner})"


@dataclass(frozen=True)
class Conj(Condition):
    left: Condition
    right: Condition

    def __str__(self) -> str:
        return f"({self.left} & {self.right})"


TRUE = TrueCond()
FALSE = Neg(TRUE)


def format_number(value: float) -> str:
    if value == int(value) and abs(value) < 1e15:
        return str(int(value))
    return repr(value)


def conj_all(parts: list[Condition]) -> Condition:
    """Conjunction of `parts`; the empty conjunction is true."""
    if not parts:
        return TRUE
    out = parts[0]
    for part in parts[1:]:
        out = Conj(out, part)
    return out


def disj_all(parts: list[Condition]) -> Condition:
    """Disjunction of `parts`, desugared to not-and; empty is false."""
    if not parts:
        return FALSE
    if len(parts) == 1:
        return parts[0]
    return Neg(conj_all([Neg(p) for p in parts]))


def condition_variables(cond: Condition) -> frozenset[str]:
    """The attributes mentioned in a condition (Var of a guard)."""
    if isinstance(cond, Comparison):
        return frozenset({cond.attribute})
    if isinstance(cond, Neg):
        return condition_variables(cond.inner)
    if isinstance(cond, Conj):
        return condition_variables(cond.left) | condition_variables(cond.right)
    return frozenset()


def condition_constants(cond: Condition) -> frozenset[float]:
    if isinstance(cond, Comparison):
        return frozenset({cond.value})
    if isinstance(cond, Neg):
        return condition_constants(cond.inner)
    if isinstance(cond, Conj):
        return condition_constants(cond.left) | condition_constants(cond.right)
    return frozenset()


def has_name_atoms(cond: Condition) -> bool:
    if isinstance(cond, NameAtom):
        return True
    if isinstance(cond, Neg):
        return has_name_atoms(cond.inner)
    if isinstance(cond, Conj):
        return has_name_atoms(cond.left) or has_name_atoms(cond.right)
    return False


def is_trivially_true(cond: Condition) -> bool:
    """Syntactic check that a guard is the literal true condition."""
    return isinstance(cond, TrueCond)


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------

_OP_TOKENS = ("<=", ">=", "!=", "<", ">", "=")
_SYNONYMS = {"∧": "&", "∨": "|", "¬": "!"}


class _Tokenizer:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def skip_ws(self) -> None:
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self) -> str:
        self.skip_ws()
        if self.pos >= len(self.text):
            return ""
        ch = self.text[self.pos]
        return _SYNONYMS.get(ch, ch)

    def match(self, token: str) -> bool:
        self.skip_ws()
        raw = self.text[self.pos : self.pos + len(token)]
        normalized = "".join(_SYNONYMS.get(c, c) for c in raw)
        if normalized == token:
            self.pos += len(token)
            return True
        return False

    def match_comparison_op(self) -> str | None:
        self.skip_ws()
        for op in _OP_TOKENS:
            if self.text.startswith(op, self.pos):
                self.pos += len(op)
                return op
        return None

    def read_identifier(self) -> str | None:
        self.skip_ws()
        start = self.pos
        while self.pos < len(self.text) and (
            self.text[self.pos].isalnum() or self.text[self.pos] == "_"
        ):
            self.pos += 1
        if self.pos == start:
            return None
        return self.text[start:self.pos]

    def read_number(self) -> float | None:
        self.skip_ws()
        start = self.pos
        if self.pos < len(self.text) and self.text[self.pos] in "+-":
            self.pos += 1
        digits = False
        while self.pos < len(self.text) and self.text[self.pos].isdigit():
            self.pos += 1
            digits = True
        if self.pos < len(self.text) and self.text[self.pos] == ".":
            self.pos += 1
            while self.pos < len(self.text) and self.text[self.pos].isdigit():
                self.pos += 1
                digits = True
        if not digits:
            self.pos = start
            return None
        if self.pos < len(self.text) and self.text[self.pos] in "eE":
            mark = self.pos
            self.pos += 1
            if self.pos < len(self.text) and self.text[self.pos] in "+-":
                self.pos += 1
            if self.pos < len(self.text) and self.text[self.pos].isdigit():
                while self.pos < len(self.text) and self.text[self.pos].isdigit():
                    self.pos += 1
            else:
                self.pos = mark
        value = float(self.text[start:self.pos])
        if not math.isfinite(value):
            raise ConditionParseError("non-finite constant", start)
        return value

    def at_end(self) -> bool:
        self.skip_ws()
        return self.pos >= len(self.text)

    def error(self, message: str) -> ConditionParseError:
        return ConditionParseError(message, self.pos)


EnumTable = Mapping[str, Mapping[str, float]]


def _desugar_comparison(attr: str, op: str, value: float) -> Condition:
    if op in COMPARISON_OPS:
        return Comparison(attr, op, value)
    if op == "<=":
        return Neg(Comparison(attr, ">", value))
    if op == ">=":
        return Neg(Comparison(attr, "<", value))
    if op == "!=":
        return Neg(Comparison(attr, "=", value))
    raise AssertionError(op)


class _ConditionParser:
    """Recursive-descent parser for the condition grammar.

    expr   := term ("|" term)*
    term   := factor ("&" factor)*
    factor := "!" factor | "(" expr ")" | atom
    atom   := "true" | IDENT | IDENT OP NUMBER-or-enum-label
    """

    def __init__(self, tok: _Tokenizer, signatures: SignatureSet, enums: EnumTable | None):
        self.tok = tok
        self.signatures = signatures
        self.enums = enums or {}

    def parse(self) -> Condition:
        cond = self.expr()
        if not self.tok.at_end():
            raise self.tok.error("unexpected trailing input")
        return cond

    def expr(self) -> Condition:
        parts = [self.term()]
        while self.tok.match("|"):
            parts.append(self.term())
        return disj_all(parts) if len(parts) > 1 else parts[0]

    def term(self) -> Condition:
        out = self.factor()
        while self.tok.match("&"):
            out = Conj(out, self.factor())
        return out

    def factor(self) -> Condition:
        if self.tok.match("!"):
            return Neg(self.factor())
        if self.tok.match("("):
            inner = self.expr()
            if not self.tok.match(")"):
                raise self.tok.error("expected ')'")
            return inner
        return self.atom()

    def atom(self) -> Condition:
        ident = self.tok.read_identifier()
        if ident is None:
            raise self.tok.error("expected identifier")
        if ident == "true":
            return TRUE
        op = self.tok.match_comparison_op()
        if op is None:
            if ident not in self.signatures.activity_names:
                raise UnknownIdentifierError(f"unknown activity {ident!r}")
            return NameAtom(ident)
        if ident not in self.signatures.attribute_names:
            raise UnknownIdentifierError(f"unknown attribute {ident!r}")
        value = self.tok.read_number()
        if value is None:
            label = self.tok.read_identifier()
            if label is None:
                raise self.tok.error("expected number or enum label")
            table = self.enums.get(ident, {})
            if label not in table:
                raise UnknownIdentifierError(
                    f"unknown enum label {label!r} for attribute {ident!r}"
                )
            value = float(table[label])
        return _desugar_comparison(ident, op, value)


def parse_condition(
    text: str, signatures: SignatureSet, enums: EnumTable | None = None
) -> Condition:
    """Parse a condition, resolving identifiers against `signatures`.

    Derived operators (<=, >=, !=, |) are desugared away so the returned
    AST contains only name atoms, {<,=,>} comparisons, negation and
    conjunction.  Enum labels on the right-hand side of a comparison are
    resolved through the per-attribute `enums` table.
    """
    return _ConditionParser(_Tokenizer(text), signatures, enums).parse()


def parse_guard(
    text: str, signatures: SignatureSet, enums: EnumTable | None = None
) -> Condition:
    """Parse a guard: a condition with no activity-name atoms."""
    cond = parse_condition(text, signatures, enums)
    if has_name_atoms(cond):
        raise UnknownIdentifierError(f"guard must not mention activity names: {text!r}")
    return cond


def condition_to_text(cond: Condition) -> str:
    """Render a condition so that parsing it back yields an equal AST."""
    return str(cond)


# ---------------------------------------------------------------------------
# Satisfaction
# ---------------------------------------------------------------------------


def eval_condition(cond: Condition, event: Event) -> bool:
    """Truth of a condition on a concrete event.

    A comparison on an attribute missing from the payload is false, never
    an error, so evaluation is total over heterogeneous events.
    """
    if isinstance(cond, TrueCond):
        return True
    if isinstance(cond, NameAtom):
        return cond.name == event.name
    if isinstance(cond, Comparison):
        value = event.value(cond.attribute)
        if value is None:
            return False
        return _compare(value, cond.op, cond.value)
    if isinstance(cond, Neg):
        return not eval_condition(cond.inner, event)
    if isinstance(cond, Conj):
        return eval_condition(cond.left, event) and eval_condition(cond.right, event)
    raise TypeError(f"not a condition: {cond!r}")


def eval_guard(cond: Condition, valuation: Mapping[str, float]) -> bool:
    """Truth of a guard on a variable valuation.

    Unlike event evaluation, the valuation must define every variable the
    guard mentions.
    """
    if isinstance(cond, TrueCond):
        return True
    if isinstance(cond, Comparison):
        if cond.attribute not in valuation:
            raise MissingVariableError(
                f"valuation does not define {cond.attribute!r}"
            )
        return _compare(valuation[cond.attribute], cond.op, cond.value)
    if isinstance(cond, Neg):
        return not eval_guard(cond.inner, valuation)
    if isinstance(cond, Conj):
        return eval_guard(cond.left, valuation) and eval_guard(cond.right, valuation)
    if isinstance(cond, NameAtom):
        raise MissingVariableError("guards must not mention activity names")
    raise TypeError(f"not a condition: {cond!r}")


def _compare(left: float, op: str, right: float) -> bool:
    if op == "<":
        return left < right
    if op == ">":
        return left > right
    if op == "=":
        return left == right
    raise AssertionError(op)


# ---------------------------------------------------------------------------
# Regions and partitions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Region:
    """One cell of the interval partition: a point [c,c] or an open interval."""

    lower: float
    upper: float

    @property
    def is_point(self) -> bool:
        return self.lower == self.upper

    def contains(self, value: float) -> bool:
        if self.is_point:
            return value == self.lower
        return self.lower < value < self.upper

    def sample(self) -> float:
        """A representative concrete value inside the region."""
        if self.is_point:
            return self.lower
        if math.isinf(self.lower) and math.isinf(self.upper):
            return 0.0
        if math.isinf(self.lower):
            return self.upper - 1.0
        if math.isinf(self.upper):
            return self.lower + 1.0
        return (self.lower + self.upper) / 2.0

    def __str__(self) -> str:
        if self.is_point:
            return f"[{format_number(self.lower)}, {format_number(self.upper)}]"
        lo = "-inf" if math.isinf(self.lower) else format_number(self.lower)
        hi = "inf" if math.isinf(self.upper) else format_number(self.upper)
        return f"({lo}, {hi})"


class Partition:
    """The ordered partition of the reals induced by a constant set.

    For m constants there are exactly 2m+1 regions: the two unbounded open
    intervals, one point region per constant, and the bounded open
    intervals between consecutive constants.  An empty constant set yields
    the single region (-inf, inf).
    """

    def __init__(self, constants: Iterable[float]):
        values = sorted(set(float(c) for c in constants))
        for c in values:
            if not math.isfinite(c):
                raise ValueError("partition constants must be finite")
        self.constants: tuple[float, ...] = tuple(values)
        regions: list[Region] = []
        if not values:
            regions.append(Region(-math.inf, math.inf))
        else:
            regions.append(Region(-math.inf, values[0]))
            for i, c in enumerate(values):
                regions.append(Region(c, c))
                upper = values[i + 1] if i + 1 < len(values) else math.inf
                regions.append(Region(c, upper))
        self.regions: tuple[Region, ...] = tuple(regions)
        self._index: dict[Region, int] = {r: i for i, r in enumerate(regions)}

    def __len__(self) -> int:
        return len(self.regions)

    def __iter__(self) -> Iterator[Region]:
        return iter(self.regions)

    def region_of(self, value: float) -> Region:
        """The unique region containing `value`."""
        if not self.constants:
            return self.regions[0]
        i = bisect_right(self.constants, value)
        if i > 0 and self.constants[i - 1] == value:
            return self.regions[2 * i - 1]
        return self.regions[2 * i]

    def index_of(self, region: Region) -> int:
        return self._index[region]


RegionAssignment = tuple[tuple[str, Region], ...]


def region_assignment(mapping: Mapping[str, Region]) -> RegionAssignment:
    return tuple(sorted(mapping.items()))


def assignment_get(assignment: RegionAssignment, attribute: str) -> Region | None:
    for key, region in assignment:
        if key == attribute:
            return region
    return None


def assignment_override(
    assignment: RegionAssignment, updates: Mapping[str, Region]
) -> RegionAssignment:
    merged = dict(assignment)
    merged.update(updates)
    return region_assignment(merged)


@dataclass(frozen=True)
class AbstractEvent:
    """An event with its payload lifted to partition regions."""

    name: str
    regions: RegionAssignment

    def region_of(self, attribute: str) -> Region | None:
        return assignment_get(self.regions, attribute)

    def __str__(self) -> str:
        if not self.regions:
            return self.name
        parts = ", ".join(f"{a}: {r}" for a, r in self.regions)
        return f"{self.name}({parts})"


AbstractTrace = tuple[AbstractEvent, ...]


def abstract_value(partition: Partition, value: float) -> Region:
    return partition.region_of(value)


def abstract_event(partition: Partition, event: Event) -> AbstractEvent:
    regions = tuple(
        (attr, partition.region_of(value)) for attr, value in event.payload
    )
    return AbstractEvent(event.name, regions)


def abstract_trace(partition: Partition, trace: Trace) -> AbstractTrace:
    return tuple(abstract_event(partition, e) for e in trace)


def concretize_event(abstract: AbstractEvent) -> Event:
    """One concrete event inside an abstract one (one sample per region)."""
    return Event.of(abstract.name, {a: r.sample() for a, r in abstract.regions})


# ---------------------------------------------------------------------------
# Region-level satisfaction and satisfiability
# ---------------------------------------------------------------------------


def _region_satisfies(region: Region, op: str, constant: float) -> bool:
    # Sound only when `constant` is a partition boundary, so regions never
    # straddle it; callers check that precondition.
    if op == "=":
        return region.is_point and region.lower == constant
    if op == "<":
        if region.is_point:
            return region.lower < constant
        return region.upper <= constant
    if op == ">":
        if region.is_point:
            return region.lower > constant
        return region.lower >= constant
    raise AssertionError(op)


def eval_condition_region(
    cond: Condition,
    name: str,
    assignment: RegionAssignment,
    partition: Partition | None = None,
) -> bool:
    """Truth of a condition on an abstract event.

    Agrees with `eval_condition` on every concrete event whose abstraction
    is (`name`, `assignment`).  Every constant mentioned must be a
    boundary of the partition that produced the regions; when `partition`
    is given this is checked and violations raise.
    """
    if isinstance(cond, TrueCond):
        return True
    if isinstance(cond, NameAtom):
        return cond.name == name
    if isinstance(cond, Comparison):
        if partition is not None and cond.value not in partition.constants:
            raise ConstantNotInPartitionError(
                f"constant {cond.value} missing from the partition"
            )
        region = assignment_get(assignment, cond.attribute)
        if region is None:
            return False
        return _region_satisfies(region, cond.op, cond.value)
    if isinstance(cond, Neg):
        return not eval_condition_region(cond.inner, name, assignment, partition)
    if isinstance(cond, Conj):
        return eval_condition_region(
            cond.left, name, assignment, partition
        ) and eval_condition_region(cond.right, name, assignment, partition)
    raise TypeError(f"not a condition: {cond!r}")


def eval_guard_region(
    cond: Condition, assignment: RegionAssignment, partition: Partition | None = None
) -> bool:
    """Region-level guard truth; the assignment must cover Var(guard)."""
    if isinstance(cond, TrueCond):
        return True
    if isinstance(cond, Comparison):
        if partition is not None and cond.value not in partition.constants:
            raise ConstantNotInPartitionError(
                f"constant {cond.value} missing from the partition"
            )
        region = assignment_get(assignment, cond.attribute)
        if region is None:
            raise MissingVariableError(f"assignment does not define {cond.attribute!r}")
        return _region_satisfies(region, cond.op, cond.value)
    if isinstance(cond, Neg):
        return not eval_guard_region(cond.inner, assignment, partition)
    if isinstance(cond, Conj):
        return eval_guard_region(cond.left, assignment, partition) and eval_guard_region(
            cond.right, assignment, partition
        )
    if isinstance(cond, NameAtom):
        raise MissingVariableError("guards must not mention activity names")
    raise TypeError(f"not a condition: {cond!r}")


def enumerate_abstract_events(
    signatures: SignatureSet, partition: Partition
) -> Iterator[AbstractEvent]:
    """All abstract events: one per activity and region combination."""
    for sig in sorted(signatures, key=lambda s: s.name):
        attrs = sorted(sig.attributes)
        for combo in _region_combinations(partition, attrs):
            yield AbstractEvent(sig.name, combo)


def _region_combinations(
    partition: Partition, attributes: list[str]
) -> Iterator[RegionAssignment]:
    if not attributes:
        yield ()
        return
    head, *rest = attributes
    for tail in _region_combinations(partition, rest):
        for region in partition.regions:
            yield region_assignment({head: region} | dict(tail))


def sat_condition_abstract(
    cond: Condition, signatures: SignatureSet, partition: Partition
) -> tuple[bool, AbstractEvent | None]:
    """Satisfiability of a condition over the finite abstract-event space.

    Returns (True, witness) for the first satisfying abstract event in
    enumeration order, else (False, None).
    """
    for candidate in enumerate_abstract_events(signatures, partition):
        if eval_condition_region(cond, candidate.name, candidate.regions):
            return True, candidate
    return False, None


# ---------------------------------------------------------------------------
# Shared abstract alphabet
# ---------------------------------------------------------------------------


class AbstractAlphabet:
    """The indexed, finite alphabet of abstract events for a model.

    Guards are evaluated against letters constantly during automaton
    construction, so results are memoized per (condition, letter) pair.
    """

    def __init__(self, signatures: SignatureSet, partition: Partition):
        self.signatures = signatures
        self.partition = partition
        self.letters: tuple[AbstractEvent, ...] = tuple(
            enumerate_abstract_events(signatures, partition)
        )
        self.index: dict[AbstractEvent, int] = {
            letter: i for i, letter in enumerate(self.letters)
        }
        self._guard_cache: dict[tuple[Condition, int], bool] = {}

    def __len__(self) -> int:
        return len(self.letters)

    def letter_of_event(self, event: Event) -> int:
        abstract = abstract_event(self.partition, event)
        try:
            return self.index[abstract]
        except KeyError:
            raise UnknownIdentifierError(
                f"event {event.name!r} does not match any declared signature"
            ) from None

    def satisfies(self, cond: Condition, letter_index: int) -> bool:
        key = (cond, letter_index)
        cached = self._guard_cache.get(key)
        if cached is None:
            letter = self.letters[letter_index]
            cached = eval_condition_region(cond, letter.name, letter.regions)
            self._guard_cache[key] = cached
        return cached

    def letters_satisfying(self, cond: Condition) -> list[int]:
        return [i for i in range(len(self.letters)) if self.satisfies(cond, i)]
