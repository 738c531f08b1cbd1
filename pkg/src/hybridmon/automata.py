"""Guarded finite-state automata and the operations the monitor needs.

Two representations cooperate here.  `GuardedAutomaton` is the general
form produced by compiling a process component: possibly nondeterministic,
with condition-labeled edges, silent steps, and edges marked as violating
(consuming an event that dooms the run).  `RegionDfa` is the letter-indexed
deterministic form over the finite abstract-event alphabet, which is what
verdict labeling and the product operate on.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Mapping, Sequence

from .conditions import AbstractAlphabet, AbstractEvent, Condition
from .errors import PreconditionError, ResourceLimitError

DEFAULT_STATE_BOUND = 100_000


class Verdict(str, Enum):
    """Four-valued monitoring verdict attached to automaton states."""

    TS = "TS"  # currently satisfied, may still be violated
    TV = "TV"  # currently violated, may still be satisfied
    PS = "PS"  # satisfied regardless of continuation
    PV = "PV"  # violated regardless of continuation


@dataclass(frozen=True)
class GuardedEdge:
    source: int
    guard: Condition | None  # None marks a silent step
    target: int
    violating: bool = False

    @property
    def silent(self) -> bool:
        return self.guard is None


class GuardedAutomaton:
    """Condition-labeled automaton; immutable after construction."""

    def __init__(
        self,
        n_states: int,
        initial: int,
        finals: Iterable[int],
        edges: Iterable[GuardedEdge],
        state_names: Sequence[str] | None = None,
    ):
        self.n_states = n_states
        self.initial = initial
        self.finals = frozenset(finals)
        self.edges = tuple(edges)
        self.state_names = tuple(state_names) if state_names is not None else None
        self._out: list[list[GuardedEdge]] = [[] for _ in range(n_states)]
        for edge in self.edges:
            self._out[edge.source].append(edge)

    def out_edges(self, state: int) -> list[GuardedEdge]:
        return self._out[state]

    def has_silent_edges(self) -> bool:
        return any(edge.silent for edge in self.edges)

    def silent_closure(self, states: Iterable[int]) -> frozenset[int]:
        """States reachable via silent edges only (reflexive)."""
        seen = set(states)
        stack = list(seen)
        while stack:
            q = stack.pop()
            for edge in self._out[q]:
                if edge.silent and edge.target not in seen:
                    seen.add(edge.target)
                    stack.append(edge.target)
        return frozenset(seen)

    def accepts(self, alphabet: AbstractAlphabet, trace: Sequence[AbstractEvent]) -> bool:
        """Existential acceptance of an abstract trace.

        Runs through violating edges are kept in the frontier (so every
        event is consumed) but can never accept.
        """
        frontier: set[tuple[int, bool]] = set()
        for q in self.silent_closure({self.initial}):
            frontier.add((q, False))
        for event in trace:
            letter = alphabet.index[event]
            step: set[tuple[int, bool]] = set()
            for state, tainted in frontier:
                for edge in self._out[state]:
                    if edge.silent or not alphabet.satisfies(edge.guard, letter):
                        continue
                    taint = tainted or edge.violating
                    for q in self.silent_closure({edge.target}):
                        step.add((q, taint))
            frontier = step
            if not frontier:
                return False
        return any(state in self.finals and not tainted for state, tainted in frontier)

    def to_dot(self, name: str = "automaton") -> str:
        return _dot(
            name,
            self.n_states,
            self.initial,
            self.finals,
            [
                (
                    e.source,
                    ("τ" if e.silent else str(e.guard))
                    + (" [violating]" if e.violating else ""),
                    e.target,
                )
                for e in self.edges
            ],
            self.state_names,
        )


class RegionDfa:
    """Deterministic automaton indexed by abstract-event letters.

    `delta[q][u]` is the successor state for letter `u`, or -1 when the
    run dies on that letter (only in incomplete automata).
    """

    def __init__(
        self,
        alphabet: AbstractAlphabet,
        delta: list[list[int]],
        initial: int,
        finals: Iterable[int],
        state_names: Sequence[str] | None = None,
        complete: bool = False,
        minimized: bool = False,
    ):
        self.alphabet = alphabet
        self.delta = delta
        self.n_states = len(delta)
        self.initial = initial
        self.finals = frozenset(finals)
        self.state_names = tuple(state_names) if state_names is not None else None
        self.complete = complete
        self.minimized = minimized

    def step(self, state: int, letter: int) -> int:
        return self.delta[state][letter]

    def run(self, letters: Iterable[int]) -> int:
        state = self.initial
        for letter in letters:
            state = self.delta[state][letter]
            if state < 0:
                return -1
        return state

    def accepts_letters(self, letters: Iterable[int]) -> bool:
        state = self.run(letters)
        return state >= 0 and state in self.finals

    def accepts(self, trace: Sequence[AbstractEvent]) -> bool:
        return self.accepts_letters(self.alphabet.index[e] for e in trace)

    def reachable_states(self) -> list[int]:
        seen = {self.initial}
        order = [self.initial]
        for q in order:
            for target in self.delta[q]:
                if target >= 0 and target not in seen:
                    seen.add(target)
                    order.append(target)
        return order

    def to_dot(self, name: str = "dfa", verdicts: Sequence[Verdict] | None = None) -> str:
        groups: dict[tuple[int, int], list[str]] = {}
        for q in range(self.n_states):
            for u, target in enumerate(self.delta[q]):
                if target >= 0:
                    groups.setdefault((q, target), []).append(
                        str(self.alphabet.letters[u])
                    )
        names = None
        if verdicts is not None:
            names = [
                f"{self.state_names[q] if self.state_names else q} {verdicts[q].value}"
                for q in range(self.n_states)
            ]
        elif self.state_names:
            names = list(self.state_names)
        return _dot(
            name,
            self.n_states,
            self.initial,
            self.finals,
            [(q, " | ".join(labels), target) for (q, target), labels in groups.items()],
            names,
        )


def _dot(
    name: str,
    n_states: int,
    initial: int,
    finals: frozenset[int],
    edges: list[tuple[int, str, int]],
    state_names: Sequence[str] | None,
) -> str:
    lines = [f"digraph {name} {{", "  rankdir=LR;"]
    for q in range(n_states):
        label = state_names[q] if state_names else str(q)
        shape = "doublecircle" if q in finals else "circle"
        lines.append(f'  q{q} [label="{label}", shape={shape}];')
    lines.append(f"  __start [shape=point];")
    lines.append(f"  __start -> q{initial};")
    for source, label, target in sorted(edges):
        escaped = label.replace('"', '\\"')
        lines.append(f'  q{source} -> q{target} [label="{escaped}"];')
    lines.append("}")
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# Subset construction, completion, minimization
# ---------------------------------------------------------------------------


def determinize(
    automaton: GuardedAutomaton,
    alphabet: AbstractAlphabet,
    state_bound: int = DEFAULT_STATE_BOUND,
) -> RegionDfa:
    """Subset construction over the abstract-event alphabet.

    Violating edges are dropped: a run taking one can never accept, so it
    contributes nothing to the recognized language.  The result may be
    partial; `complete` adds the trap state that absorbs dead letters.
    """
    n_letters = len(alphabet)
    start = automaton.silent_closure({automaton.initial})
    subsets: dict[frozenset[int], int] = {start: 0}
    order: list[frozenset[int]] = [start]
    delta: list[list[int]] = []
    for subset in order:
        row = [-1] * n_letters
        for letter in range(n_letters):
            targets: set[int] = set()
            for state in subset:
                for edge in automaton.out_edges(state):
                    if edge.silent or edge.violating:
                        continue
                    if alphabet.satisfies(edge.guard, letter):
                        targets.add(edge.target)
            if targets:
                closed = automaton.silent_closure(targets)
                idx = subsets.get(closed)
                if idx is None:
                    idx = len(order)
                    if idx >= state_bound:
                        raise ResourceLimitError(
                            f"determinization exceeded {state_bound} states"
                        )
                    subsets[closed] = idx
                    order.append(closed)
                row[letter] = idx
        delta.append(row)
    finals = [
        i for i, subset in enumerate(order) if subset & automaton.finals
    ]
    names = ["{" + ",".join(map(str, sorted(s))) + "}" for s in order]
    complete = all(target >= 0 for row in delta for target in row)
    return RegionDfa(alphabet, delta, 0, finals, names, complete=complete)


def complete(dfa: RegionDfa) -> RegionDfa:
    """Route every dead letter to a fresh non-final trap state."""
    if all(target >= 0 for row in dfa.delta for target in row):
        return RegionDfa(
            dfa.alphabet,
            [list(row) for row in dfa.delta],
            dfa.initial,
            dfa.finals,
            dfa.state_names,
            complete=True,
            minimized=dfa.minimized,
        )
    trap = dfa.n_states
    delta = [[target if target >= 0 else trap for target in row] for row in dfa.delta]
    delta.append([trap] * len(dfa.alphabet))
    names = list(dfa.state_names) + ["trap"] if dfa.state_names else None
    return RegionDfa(dfa.alphabet, delta, dfa.initial, dfa.finals, names, complete=True)


def minimize(dfa: RegionDfa) -> RegionDfa:
    """Partition-refinement minimization of a complete deterministic automaton.

    Equivalent states collapse, so every state with an empty residual
    language ends up in one trap block.
    """
    if not dfa.complete:
        raise PreconditionError("minimize requires a complete automaton")
    reachable = dfa.reachable_states()
    block: dict[int, int] = {
        q: (1 if q in dfa.finals else 0) for q in reachable
    }
    n_letters = len(dfa.alphabet)
    while True:
        signatures: dict[tuple, int] = {}
        new_block: dict[int, int] = {}
        for q in reachable:
            sig = (block[q],) + tuple(block[dfa.delta[q][u]] for u in range(n_letters))
            idx = signatures.setdefault(sig, len(signatures))
            new_block[q] = idx
        if len(signatures) == len(set(block.values())):
            block = new_block
            break
        block = new_block
    # Renumber blocks in first-occurrence order over reachable states.
    renumber: dict[int, int] = {}
    for q in reachable:
        renumber.setdefault(block[q], len(renumber))
    block = {q: renumber[b] for q, b in block.items()}
    n_blocks = len(renumber)
    delta = [[-1] * n_letters for _ in range(n_blocks)]
    names: list[str] = [""] * n_blocks
    finals = set()
    for q in reachable:
        b = block[q]
        if not names[b]:
            names[b] = dfa.state_names[q] if dfa.state_names else str(q)
        if q in dfa.finals:
            finals.add(b)
        for u in range(n_letters):
            delta[b][u] = block[dfa.delta[q][u]]
    return RegionDfa(
        dfa.alphabet,
        delta,
        block[dfa.initial],
        finals,
        names,
        complete=True,
        minimized=True,
    )


# ---------------------------------------------------------------------------
# Verdict labeling
# ---------------------------------------------------------------------------


def label_states(dfa: RegionDfa) -> tuple[Verdict, ...]:
    """Per-state verdicts via the self-loop rule.

    Sound only on complete, minimized automata: there all permanently
    violating runs sit in a single trap and all permanently satisfied
    behavior loops on final states.
    """
    if not (dfa.complete and dfa.minimized):
        raise PreconditionError("verdict labeling needs a complete, minimized automaton")
    verdicts = []
    for q in range(dfa.n_states):
        all_loops = all(target == q for target in dfa.delta[q])
        if q in dfa.finals:
            verdicts.append(Verdict.PS if all_loops else Verdict.TS)
        else:
            verdicts.append(Verdict.PV if all_loops else Verdict.TV)
    return tuple(verdicts)


def label_states_by_reachability(dfa: RegionDfa) -> tuple[Verdict, ...]:
    """Reachability-based verdicts; the oracle the self-loop rule must match.

    PS: final and no non-final state reachable.  PV: non-final and no
    final state reachable.  Reachability is reflexive.
    """
    if not dfa.complete:
        raise PreconditionError("verdict labeling needs a complete automaton")
    verdicts = []
    for q in range(dfa.n_states):
        seen = {q}
        stack = [q]
        final_reachable = q in dfa.finals
        nonfinal_reachable = q not in dfa.finals
        while stack:
            state = stack.pop()
            for target in dfa.delta[state]:
                if target not in seen:
                    seen.add(target)
                    stack.append(target)
                    if target in dfa.finals:
                        final_reachable = True
                    else:
                        nonfinal_reachable = True
        if q in dfa.finals:
            verdicts.append(Verdict.TS if nonfinal_reachable else Verdict.PS)
        else:
            verdicts.append(Verdict.TV if final_reachable else Verdict.PV)
    return tuple(verdicts)


# ---------------------------------------------------------------------------
# Annotated product
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LabeledComponent:
    """A compiled, labeled local automaton ready for the product."""

    component_id: str
    dfa: RegionDfa
    verdicts: tuple[Verdict, ...]


class ProductAutomaton:
    """Reachable synchronous product of labeled local automata.

    Each transition is indexed by a single abstract event, so the product
    is deterministic and complete whenever the locals are.  The product is
    deliberately not minimized: distinct combinations of violated locals
    must stay distinguishable for cost-based feedback.

    The global verdict refines the per-component combination rules with
    reachability: a state is PV exactly when no accepting product state is
    reachable from it.  That subsumes "some local is PV" and additionally
    captures cross-component conflicts, where every local still looks
    recoverable but their conjunction no longer is.
    """

    def __init__(
        self,
        components: Sequence[LabeledComponent],
        alphabet: AbstractAlphabet,
        state_bound: int = DEFAULT_STATE_BOUND,
    ):
        for component in components:
            if not (component.dfa.complete and component.dfa.minimized):
                raise PreconditionError(
                    f"component {component.component_id!r} must be complete and minimized"
                )
        self.components = tuple(components)
        self.alphabet = alphabet
        n_letters = len(alphabet)
        start = tuple(c.dfa.initial for c in self.components)
        self.states: list[tuple[int, ...]] = [start]
        self.index: dict[tuple[int, ...], int] = {start: 0}
        self.delta: list[list[int]] = []
        for state in self.states:
            row = []
            for letter in range(n_letters):
                successor = tuple(
                    c.dfa.delta[local][letter]
                    for c, local in zip(self.components, state)
                )
                idx = self.index.get(successor)
                if idx is None:
                    idx = len(self.states)
                    if idx >= state_bound:
                        raise ResourceLimitError(
                            f"product exceeded {state_bound} states"
                        )
                    self.index[successor] = idx
                    self.states.append(successor)
                row.append(idx)
            self.delta.append(row)
        self.n_states = len(self.states)
        self.initial = 0
        self.finals = frozenset(
            i
            for i, state in enumerate(self.states)
            if all(local in c.dfa.finals for c, local in zip(self.components, state))
        )
        self._coreachable = self._compute_coreachable()
        self.global_verdicts: list[Verdict] = []
        self.conflicts: list[bool] = []
        for i, state in enumerate(self.states):
            locals_ = self.local_verdicts(i)
            if i not in self._coreachable:
                verdict = Verdict.PV
            elif all(v is Verdict.PS for v in locals_):
                verdict = Verdict.PS
            elif all(v is Verdict.TS for v in locals_):
                verdict = Verdict.TS
            else:
                verdict = Verdict.TV
            self.global_verdicts.append(verdict)
            self.conflicts.append(
                verdict is Verdict.PV and Verdict.PV not in locals_
            )

    def _compute_coreachable(self) -> set[int]:
        reverse: list[list[int]] = [[] for _ in range(self.n_states)]
        for q, row in enumerate(self.delta):
            for target in row:
                reverse[target].append(q)
        seen = set(self.finals)
        stack = list(seen)
        while stack:
            q = stack.pop()
            for source in reverse[q]:
                if source not in seen:
                    seen.add(source)
                    stack.append(source)
        return seen

    def accepting_state_reachable(self, state: int) -> bool:
        return state in self._coreachable

    def local_verdicts(self, state: int) -> tuple[Verdict, ...]:
        return tuple(
            c.verdicts[local] for c, local in zip(self.components, self.states[state])
        )

    def step(self, state: int, letter: int) -> int:
        return self.delta[state][letter]

    def accepts(self, trace: Sequence[AbstractEvent]) -> bool:
        state = self.initial
        for event in trace:
            state = self.delta[state][self.alphabet.index[event]]
        return state in self.finals

    def to_dot(
        self,
        name: str = "product",
        cost_cur: Sequence[int] | None = None,
        cost_best: Sequence[int] | None = None,
    ) -> str:
        names = []
        for i, state in enumerate(self.states):
            label = "(" + ",".join(map(str, state)) + f") {self.global_verdicts[i].value}"
            if cost_cur is not None and cost_best is not None:
                label += f" cur={cost_cur[i]} best={cost_best[i]}"
            names.append(label)
        groups: dict[tuple[int, int], list[str]] = {}
        for q, row in enumerate(self.delta):
            for u, target in enumerate(row):
                groups.setdefault((q, target), []).append(str(self.alphabet.letters[u]))
        edges = [
            (q, " | ".join(labels), target) for (q, target), labels in groups.items()
        ]
        return _dot(name, self.n_states, self.initial, self.finals, edges, names)


@dataclass(frozen=True)
class CostAnnotation:
    """Per-state violation costs: current sum and best reachable sum."""

    cost_cur: tuple[int, ...]
    cost_best: tuple[int, ...]
    rounds: int


def annotate_costs(
    product: ProductAutomaton, costs: Mapping[str, int]
) -> CostAnnotation:
    """Fixpoint computation of the best achievable violation cost.

    `cost_cur` sums the costs of components whose local state is not
    accepting; `cost_best` iterates a minimum over successors until
    stable, which yields the least `cost_cur` value among all states
    reachable from each state (itself included).
    """
    for component in product.components:
        if component.component_id not in costs:
            raise ValueError(f"cost model misses component {component.component_id!r}")
    values = [int(costs[c.component_id]) for c in product.components]
    if any(v < 0 for v in values):
        raise ValueError("violation costs must be non-negative")
    if sum(values) >= 2**64:
        raise ValueError("violation costs overflow a 64-bit sum")
    cost_cur = []
    for state in product.states:
        total = 0
        for value, component, local in zip(values, product.components, state):
            if local not in component.dfa.finals:
                total += value
        cost_cur.append(total)
    best = list(cost_cur)
    rounds = 0
    while True:
        rounds += 1
        new = [
            min([best[target] for target in product.delta[q]] + [cost_cur[q]])
            for q in range(product.n_states)
        ]
        for q in range(product.n_states):
            if new[q] > best[q]:
                raise AssertionError("cost iterates must be non-increasing")
        if new == best:
            break
        best = new
    return CostAnnotation(tuple(cost_cur), tuple(best), rounds)
