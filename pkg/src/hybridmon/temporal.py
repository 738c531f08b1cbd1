"""Linear temporal logic over finite traces, with condition leaves.

Formulas use six core constructors: true, a condition leaf, strong next,
strong until, negation, and conjunction.  Eventually/globally/or/implies
are desugared at parse time.  `eval_formula` is the reference semantics;
`formula_to_automaton` compiles a formula into a complete, deterministic
guarded automaton by progression over the satisfiable valuations of its
condition leaves.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

from .automata import DEFAULT_STATE_BOUND, GuardedAutomaton, GuardedEdge
from .conditions import (
    AbstractAlphabet,
    Condition,
    EnumTable,
    SignatureSet,
    Trace,
    _Tokenizer,
    _ConditionParser,
    conj_all,
    eval_condition,
)
from .errors import HybridmonError, ResourceLimitError, UnknownTemplateError
from .conditions import Neg as CondNeg

# ---------------------------------------------------------------------------
# Formula AST
# ---------------------------------------------------------------------------


class Formula:
    """Base class for temporal formula nodes.  Instances are immutable."""

    __slots__ = ()


@dataclass(frozen=True)
class Top(Formula):
    def __str__(self) -> str:
        return "true"


@dataclass(frozen=True)
class Leaf(Formula):
    condition: Condition

    def __str__(self) -> str:
        return str(self.condition)


@dataclass(frozen=True)
class Not(Formula):
    inner: Formula

    def __str__(self) -> str:
        return f"!({self.inner})"


@dataclass(frozen=True)
class And(Formula):
    left: Formula
    right: Formula

    def __str__(self) -> str:
        return f"({self.left} & {self.right})"


@dataclass(frozen=True)
class Next(Formula):
    inner: Formula

    def __str__(self) -> str:
        return f"X({self.inner})"


@dataclass(frozen=True)
class Until(Formula):
    left: Formula
    right: Formula

    def __str__(self) -> str:
        return f"({self.left} U {self.right})"


TOP = Top()
BOTTOM = Not(TOP)
# "some position exists": false on the empty suffix, true otherwise.
NONEMPTY = Until(TOP, TOP)


def lnot(formula: Formula) -> Formula:
    if isinstance(formula, Not):
        return formula.inner
    return Not(formula)


def land(left: Formula, right: Formula) -> Formula:
    if left == TOP:
        return right
    if right == TOP:
        return left
    if left == BOTTOM or right == BOTTOM:
        return BOTTOM
    return And(left, right)


def lor(left: Formula, right: Formula) -> Formula:
    if left == TOP or right == TOP:
        return TOP
    if left == BOTTOM:
        return right
    if right == BOTTOM:
        return left
    return lnot(And(lnot(left), lnot(right)))


def implies(left: Formula, right: Formula) -> Formula:
    return lor(lnot(left), right)


def eventually(formula: Formula) -> Formula:
    return Until(TOP, formula)


def always(formula: Formula) -> Formula:
    return lnot(eventually(lnot(formula)))


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------

_UNARY_OPS = {"X", "F", "G"}


class _FormulaParser:
    """Recursive-descent parser for the temporal grammar.

    implication := disjunction ("->" implication)?          right assoc
    disjunction := conjunction ("|" conjunction)*
    conjunction := until ("&" until)*
    until       := unary ("U" until)?                       right assoc
    unary       := ("X"|"F"|"G"|"!") unary | atom
    atom        := "(" implication ")" | "true" | condition atom

    X, F, G and U are reserved words and cannot name activities here.
    Condition leaves are single atoms (a name or one comparison); richer
    conditions enter formulas through template instantiation.
    """

    def __init__(self, tok: _Tokenizer, signatures: SignatureSet, enums: EnumTable | None):
        self.tok = tok
        self.signatures = signatures
        self.enums = enums
        self.cond_parser = _ConditionParser(tok, signatures, enums)

    def parse(self) -> Formula:
        formula = self.implication()
        if not self.tok.at_end():
            raise self.tok.error("unexpected trailing input")
        return formula

    def implication(self) -> Formula:
        left = self.disjunction()
        if self.tok.match("->"):
            return implies(left, self.implication())
        return left

    def disjunction(self) -> Formula:
        out = self.conjunction()
        while self.tok.match("|"):
            out = lor(out, self.conjunction())
        return out

    def conjunction(self) -> Formula:
        out = self.until()
        while self.tok.match("&"):
            out = land(out, self.until())
        return out

    def until(self) -> Formula:
        left = self.unary()
        if self._match_word("U"):
            return Until(left, self.until())
        return left

    def unary(self) -> Formula:
        if self.tok.match("!"):
            return lnot(self.unary())
        for op in _UNARY_OPS:
            if self._match_word(op):
                inner = self.unary()
                if op == "X":
                    return Next(inner)
                if op == "F":
                    return eventually(inner)
                return always(inner)
        return self.atom()

    def _match_word(self, word: str) -> bool:
        # A reserved word must not be a prefix of a longer identifier.
        self.tok.skip_ws()
        end = self.tok.pos + len(word)
        if self.tok.text[self.tok.pos : end] != word:
            return False
        if end < len(self.tok.text) and (
            self.tok.text[end].isalnum() or self.tok.text[end] == "_"
        ):
            return False
        self.tok.pos = end
        return True

    def atom(self) -> Formula:
        if self.tok.match("("):
            inner = self.implication()
            if not self.tok.match(")"):
                raise self.tok.error("expected ')'")
            return inner
        if self._match_word("true"):
            return TOP
        condition = self.cond_parser.atom()
        return Leaf(condition)


def parse_formula(
    text: str, signatures: SignatureSet, enums: EnumTable | None = None
) -> Formula:
    """Parse a temporal formula, desugaring F/G/|/-> to the core set."""
    return _FormulaParser(_Tokenizer(text), signatures, enums).parse()


# ---------------------------------------------------------------------------
# Finite-trace semantics
# ---------------------------------------------------------------------------


def eval_formula(formula: Formula, trace: Trace, position: int) -> bool:
    """Truth of a formula on `trace` at a 1-based position.

    This is the reference semantics the automaton construction is checked
    against.  The position must lie inside the trace.
    """
    if not 1 <= position <= len(trace):
        raise HybridmonError(
            f"position {position} outside trace of length {len(trace)}"
        )
    return _eval(formula, trace, position)


def _eval(formula: Formula, trace: Trace, i: int) -> bool:
    if isinstance(formula, Top):
        return True
    if isinstance(formula, Leaf):
        return eval_condition(formula.condition, trace[i - 1])
    if isinstance(formula, Not):
        return not _eval(formula.inner, trace, i)
    if isinstance(formula, And):
        return _eval(formula.left, trace, i) and _eval(formula.right, trace, i)
    if isinstance(formula, Next):
        return i < len(trace) and _eval(formula.inner, trace, i + 1)
    if isinstance(formula, Until):
        for j in range(i, len(trace) + 1):
            if _eval(formula.right, trace, j):
                return True
            if not _eval(formula.left, trace, j):
                return False
        return False
    raise TypeError(f"not a formula: {formula!r}")


def empty_trace_eval(formula: Formula) -> bool:
    """Satisfaction on the empty trace.

    True holds; condition leaves, strong next and strong until do not;
    negation and conjunction are compositional.
    """
    if isinstance(formula, Top):
        return True
    if isinstance(formula, (Leaf, Next, Until)):
        return False
    if isinstance(formula, Not):
        return not empty_trace_eval(formula.inner)
    if isinstance(formula, And):
        return empty_trace_eval(formula.left) and empty_trace_eval(formula.right)
    raise TypeError(f"not a formula: {formula!r}")


def satisfies(formula: Formula, trace: Trace) -> bool:
    """Whole-trace satisfaction, including the empty trace."""
    if not trace:
        return empty_trace_eval(formula)
    return eval_formula(formula, trace, 1)


# ---------------------------------------------------------------------------
# Template catalog
# ---------------------------------------------------------------------------


def _event_spec(name_atom: Condition, condition: Condition | None) -> Formula:
    if condition is None:
        return Leaf(name_atom)
    return Leaf(conj_all([name_atom, condition]))


_TemplateBuilder = Callable[[Formula, Formula], Formula]

_BINARY_TEMPLATES: dict[str, _TemplateBuilder] = {
    # Occurrence of the activation somewhere implies occurrence of the target.
    "responded existence": lambda a, t: implies(eventually(a), eventually(t)),
    "response": lambda a, t: always(implies(a, eventually(t))),
    "alternate response": lambda a, t: always(
        implies(a, Next(Until(lnot(a), t)))
    ),
    "chain response": lambda a, t: always(implies(a, Next(t))),
    # The target may only occur after the activation has occurred.
    "precedence": lambda a, t: lor(Until(lnot(t), a), always(lnot(t))),
    "chain precedence": lambda a, t: land(
        lnot(t), always(implies(Next(t), a))
    ),
    "not coexistence": lambda a, t: lnot(land(eventually(a), eventually(t))),
    "not response": lambda a, t: always(implies(a, lnot(Next(eventually(t))))),
    "not chain response": lambda a, t: always(implies(a, lnot(Next(t)))),
}


def template_names() -> list[str]:
    return ["existence"] + sorted(_BINARY_TEMPLATES)


def expand_template(
    name: str,
    activation: str | None = None,
    target: str | None = None,
    activation_condition: str | None = None,
    target_condition: str | None = None,
    signatures: SignatureSet | None = None,
    enums: EnumTable | None = None,
) -> Formula:
    """Instantiate a catalog template as a pure-future formula.

    Activities are given by name; the optional data conditions are parsed
    against the signature set and conjoined with the activity atom.
    """
    if signatures is None:
        raise ValueError("signatures are required to expand a template")

    def parse_part(activity: str | None, condition: str | None) -> Formula:
        if activity is None:
            raise UnknownTemplateError(f"template {name!r} misses an activity argument")
        from .conditions import NameAtom, parse_condition

        if activity not in signatures.activity_names:
            raise UnknownTemplateError(f"unknown activity {activity!r}")
        cond = parse_condition(condition, signatures, enums) if condition else None
        return _event_spec(NameAtom(activity), cond)

    key = name.strip().lower().replace("-", " ").replace("_", " ")
    if key == "existence":
        subject = target if target is not None else activation
        subject_cond = (
            target_condition if target is not None else activation_condition
        )
        return eventually(parse_part(subject, subject_cond))
    builder = _BINARY_TEMPLATES.get(key)
    if builder is None:
        raise UnknownTemplateError(f"unknown template {name!r}")
    return builder(
        parse_part(activation, activation_condition),
        parse_part(target, target_condition),
    )


# ---------------------------------------------------------------------------
# Compilation to a guarded automaton
# ---------------------------------------------------------------------------


def formula_leaves(formula: Formula) -> list[Condition]:
    """Syntactically distinct condition leaves, in first-occurrence order."""
    out: list[Condition] = []

    def walk(node: Formula) -> None:
        if isinstance(node, Leaf):
            if node.condition not in out:
                out.append(node.condition)
        elif isinstance(node, (Not, Next)):
            walk(node.inner)
        elif isinstance(node, (And, Until)):
            walk(node.left)
            walk(node.right)

    walk(formula)
    return out


def _temporal_atoms(formula: Formula) -> list[Formula]:
    """Non-boolean subformulas: leaves, nexts and untils.

    Progressed states are boolean combinations of exactly these atoms
    (plus NONEMPTY, which strong-next progression introduces), so they
    serve as the variables of the canonicalizing truth table.
    """
    atoms: list[Formula] = []
    has_next = False

    def walk(node: Formula) -> None:
        nonlocal has_next
        if isinstance(node, (Leaf, Next, Until)):
            if node not in atoms:
                atoms.append(node)
        if isinstance(node, Next):
            has_next = True
        if isinstance(node, (Not, Next)):
            walk(node.inner)
        elif isinstance(node, (And, Until)):
            walk(node.left)
            walk(node.right)

    walk(formula)
    if has_next and NONEMPTY not in atoms:
        atoms.append(NONEMPTY)
    return atoms


class _TruthTables:
    """Boolean-function keys for state formulas.

    A state formula is a boolean combination of the temporal atoms; its
    canonical key is the full truth table over those atoms, packed into an
    integer with one bit per assignment row.  Row 0 (all atoms false) is
    exactly empty-trace satisfaction, so it doubles as the finality bit.
    """

    MAX_ATOMS = 18

    def __init__(self, atoms: Sequence[Formula]):
        if len(atoms) > self.MAX_ATOMS:
            raise ResourceLimitError(
                f"formula has {len(atoms)} temporal atoms; "
                f"at most {self.MAX_ATOMS} are supported"
            )
        self.atoms = tuple(atoms)
        n = len(atoms)
        rows = 1 << n
        self.full = (1 << rows) - 1
        self._index = {atom: i for i, atom in enumerate(atoms)}
        self._atom_masks = []
        for i in range(n):
            mask = 0
            for row in range(rows):
                if row >> i & 1:
                    mask |= 1 << row
            self._atom_masks.append(mask)
        self._memo: dict[Formula, int] = {}

    def key(self, node: Formula) -> int:
        cached = self._memo.get(node)
        if cached is not None:
            return cached
        idx = self._index.get(node)
        if idx is not None:
            value = self._atom_masks[idx]
        elif isinstance(node, Top):
            value = self.full
        elif isinstance(node, Not):
            value = self.full ^ self.key(node.inner)
        elif isinstance(node, And):
            value = self.key(node.left) & self.key(node.right)
        else:
            raise AssertionError(f"unexpected node in state formula: {node!r}")
        self._memo[node] = value
        return value


def _progress(node: Formula, leaf_truth: Mapping[Condition, bool]) -> Formula:
    """One-step progression: the obligation on the remaining suffix.

    Strong next carries a NONEMPTY conjunct so that a next-requirement
    consumed at the last position still rejects.
    """
    if isinstance(node, Top):
        return TOP
    if isinstance(node, Leaf):
        return TOP if leaf_truth[node.condition] else BOTTOM
    if isinstance(node, Not):
        return lnot(_progress(node.inner, leaf_truth))
    if isinstance(node, And):
        return land(
            _progress(node.left, leaf_truth), _progress(node.right, leaf_truth)
        )
    if isinstance(node, Next):
        return land(node.inner, NONEMPTY)
    if isinstance(node, Until):
        stay = land(_progress(node.left, leaf_truth), node)
        return lor(_progress(node.right, leaf_truth), stay)
    raise TypeError(f"not a formula: {node!r}")


def formula_to_automaton(
    formula: Formula,
    alphabet: AbstractAlphabet,
    state_bound: int = DEFAULT_STATE_BOUND,
) -> GuardedAutomaton:
    """Compile a formula into a complete deterministic guarded automaton.

    Letters are the satisfiable complete valuations (minterms) of the
    formula's condition leaves; two abstract events drive the automaton
    identically iff they agree on every leaf.  States are progressed
    obligations, identified up to boolean equivalence over the temporal
    atoms so the construction terminates.
    """
    leaves = formula_leaves(formula)
    minterms = _satisfiable_minterms(leaves, alphabet)
    tables = _TruthTables(_temporal_atoms(formula))

    state_keys: dict[int, int] = {}
    state_reprs: list[Formula] = []
    finals: list[int] = []

    def intern(node: Formula) -> int:
        key = tables.key(node)
        idx = state_keys.get(key)
        if idx is None:
            idx = len(state_reprs)
            if idx >= state_bound:
                raise ResourceLimitError(
                    f"formula automaton exceeded {state_bound} states"
                )
            state_keys[key] = idx
            state_reprs.append(node)
            if key & 1:  # row 0 = all atoms false = empty-trace satisfaction
                finals.append(idx)
        return idx

    initial = intern(formula)
    edges: list[GuardedEdge] = []
    worklist = [initial]
    seen = {initial}
    while worklist:
        state = worklist.pop()
        repr_formula = state_reprs[state]
        for guard, leaf_truth in minterms:
            target = intern(_progress(repr_formula, leaf_truth))
            edges.append(GuardedEdge(state, guard, target))
            if target not in seen:
                seen.add(target)
                worklist.append(target)
    names = [str(node) for node in state_reprs]
    return GuardedAutomaton(len(state_reprs), initial, finals, edges, names)


def _satisfiable_minterms(
    leaves: Sequence[Condition], alphabet: AbstractAlphabet
) -> list[tuple[Condition, dict[Condition, bool]]]:
    """The realizable complete leaf valuations, each with its guard.

    A valuation is realizable iff some abstract event induces it, so
    enumerating the alphabet enumerates exactly the satisfiable minterms.
    The guard is the conjunction of matching literals; together the guards
    partition the alphabet, which keeps the automaton complete and
    deterministic by letter.
    """
    realized: dict[tuple[bool, ...], Condition] = {}
    for letter in range(len(alphabet)):
        valuation = tuple(alphabet.satisfies(leaf, letter) for leaf in leaves)
        if valuation not in realized:
            literals = [
                leaf if truth else CondNeg(leaf)
                for leaf, truth in zip(leaves, valuation)
            ]
            realized[valuation] = conj_all(list(literals))
    return [
        (guard, {leaf: truth for leaf, truth in zip(leaves, valuation)})
        for valuation, guard in realized.items()
    ]
