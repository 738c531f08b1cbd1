"""Data Petri nets: execution semantics, validation, and compilation.

A net reads and writes real-valued variables through transition guards.
Compilation explores the finite quotient of its state space induced by
the interval partition, producing a guarded automaton that accepts
exactly the traces embeddable into a run reaching the final marking.
Three post-passes make the automaton usable as a monitor: silent steps
are compiled away, events foreign to the net are skipped in place, and
events blocked by data guards are consumed by violating self-loops that
doom the run.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .automata import DEFAULT_STATE_BOUND, GuardedAutomaton, GuardedEdge
from .conditions import (
    TRUE,
    Comparison,
    Condition,
    Conj,
    NameAtom,
    Partition,
    Region,
    RegionAssignment,
    SignatureSet,
    Trace,
    assignment_override,
    condition_constants,
    condition_variables,
    conj_all,
    disj_all,
    eval_guard,
    eval_guard_region,
    is_trivially_true,
    region_assignment,
)
from .errors import NetValidationError, ResourceLimitError

Marking = frozenset[str]


@dataclass(frozen=True)
class NetTransition:
    """A transition with an activity label (or None when silent) and guards."""

    tid: str
    label: str | None
    read_guard: Condition = TRUE
    write_guard: Condition = TRUE

    @property
    def silent(self) -> bool:
        return self.label is None

    @property
    def read_variables(self) -> frozenset[str]:
        return condition_variables(self.read_guard)

    @property
    def write_variables(self) -> frozenset[str]:
        return condition_variables(self.write_guard)


@dataclass
class DataPetriNet:
    """Places, transitions, flow relation and variable set."""

    places: tuple[str, ...]
    transitions: tuple[NetTransition, ...]
    pre: dict[str, dict[str, int]]  # transition id -> place -> weight
    post: dict[str, dict[str, int]]
    variables: frozenset[str]

    def transition(self, tid: str) -> NetTransition:
        for t in self.transitions:
            if t.tid == tid:
                return t
        raise KeyError(tid)

    def used_activity_names(self) -> frozenset[str]:
        return frozenset(t.label for t in self.transitions if t.label is not None)

    def marking_enabled(self, marking: Marking, transition: NetTransition) -> bool:
        return all(p in marking for p in self.pre[transition.tid])


@dataclass
class NetSystem:
    """A net with an initial state and a final marking."""

    net: DataPetriNet
    initial_marking: Marking
    initial_assignment: dict[str, float]
    final_marking: Marking
    net_id: str = "net"


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------


def validate_net(
    system: NetSystem,
    signatures: SignatureSet,
    partition: Partition | None = None,
    state_bound: int = DEFAULT_STATE_BOUND,
) -> None:
    """Structural, well-formedness and 1-safety checks.

    Raises `NetValidationError` with a witness description on failure.
    1-safety is decided by exhaustive exploration of the finite abstract
    state space, so the check is complete for the recognized language.
    """
    net = system.net
    ids = [t.tid for t in net.transitions]
    if len(set(ids)) != len(ids):
        raise NetValidationError("duplicate transition ids")
    if set(net.places) & set(ids):
        raise NetValidationError("places and transitions must be disjoint")
    for t in net.transitions:
        for flow in (net.pre[t.tid], net.post[t.tid]):
            for place, weight in flow.items():
                if place not in net.places:
                    raise NetValidationError(
                        f"arc references unknown place {place!r}", t.tid
                    )
                if weight > 1:
                    raise NetValidationError(
                        f"flow weight {weight} on {t.tid!r} is incompatible "
                        "with 1-safety",
                        t.tid,
                    )
        if t.silent:
            if not is_trivially_true(t.write_guard):
                raise NetValidationError(
                    f"silent transition {t.tid!r} must not write variables", t.tid
                )
        else:
            if t.label not in signatures.activity_names:
                raise NetValidationError(
                    f"transition {t.tid!r} labeled with unknown activity "
                    f"{t.label!r}",
                    t.tid,
                )
            expected = signatures.attributes_of(t.label)
            if t.write_variables != expected:
                raise NetValidationError(
                    f"transition {t.tid!r} writes {sorted(t.write_variables)} "
                    f"but its activity {t.label!r} carries {sorted(expected)}",
                    t.tid,
                )
        for v in t.read_variables | t.write_variables:
            if v not in net.variables:
                raise NetValidationError(
                    f"transition {t.tid!r} mentions undeclared variable {v!r}",
                    t.tid,
                )
    if set(system.initial_assignment) != set(net.variables):
        raise NetValidationError(
            "initial assignment must cover exactly the net variables "
            f"{sorted(net.variables)}"
        )
    for marking, which in ((system.initial_marking, "initial"), (system.final_marking, "final")):
        unknown = marking - set(net.places)
        if unknown:
            raise NetValidationError(f"{which} marking uses unknown places {sorted(unknown)}")
    _check_one_safety(system, partition, state_bound)


def _check_one_safety(
    system: NetSystem, partition: Partition | None, state_bound: int
) -> None:
    partition = partition or Partition(collect_net_constants(system))
    net = system.net
    initial = (
        system.initial_marking,
        region_assignment(
            {v: partition.region_of(c) for v, c in system.initial_assignment.items()}
        ),
    )
    seen = {initial}
    paths: dict[tuple, tuple[str, ...]] = {initial: ()}
    stack = [initial]
    while stack:
        marking, assignment = stack.pop()
        for transition, update in enabled_transitions(
            marking, assignment, net, partition
        ):
            doubled = [
                p
                for p in net.post[transition.tid]
                if p in marking and p not in net.pre[transition.tid]
            ]
            if doubled:
                witness = paths[(marking, assignment)] + (transition.tid,)
                raise NetValidationError(
                    f"net is unsafe: firing {' -> '.join(witness)} puts two "
                    f"tokens into {doubled[0]!r}",
                    transition.tid,
                )
            successor = fire_transition(marking, assignment, transition, update, net)
            if successor not in seen:
                if len(seen) >= state_bound:
                    raise ResourceLimitError(
                        f"safety exploration exceeded {state_bound} states"
                    )
                seen.add(successor)
                paths[successor] = paths[(marking, assignment)] + (transition.tid,)
                stack.append(successor)


def collect_net_constants(system: NetSystem) -> set[float]:
    out: set[float] = set(system.initial_assignment.values())
    for t in system.net.transitions:
        out |= condition_constants(t.read_guard)
        out |= condition_constants(t.write_guard)
    return out


# ---------------------------------------------------------------------------
# Region-level execution
# ---------------------------------------------------------------------------


def enabled_transitions(
    marking: Marking,
    assignment: RegionAssignment,
    net: DataPetriNet,
    partition: Partition,
) -> list[tuple[NetTransition, RegionAssignment]]:
    """All (transition, update) pairs fireable from an abstract state.

    The update assigns a region to every read or written variable: read
    variables copy the current assignment, written variables range over
    every region combination that satisfies both guards.
    """
    current = dict(assignment)
    out: list[tuple[NetTransition, RegionAssignment]] = []
    for transition in net.transitions:
        if not net.marking_enabled(marking, transition):
            continue
        read_vars = sorted(transition.read_variables)
        fixed = {v: current[v] for v in read_vars}
        free = sorted(transition.write_variables - transition.read_variables)
        for combo in itertools.product(partition.regions, repeat=len(free)):
            update = region_assignment(fixed | dict(zip(free, combo)))
            if eval_guard_region(transition.read_guard, update) and eval_guard_region(
                transition.write_guard, update
            ):
                out.append((transition, update))
    return out


def fire_transition(
    marking: Marking,
    assignment: RegionAssignment,
    transition: NetTransition,
    update: RegionAssignment,
    net: DataPetriNet,
) -> tuple[Marking, RegionAssignment]:
    """Token arithmetic plus overriding the written variables."""
    new_marking = (marking - set(net.pre[transition.tid])) | set(
        net.post[transition.tid]
    )
    written = {
        v: r for v, r in update if v in transition.write_variables
    }
    return frozenset(new_marking), assignment_override(assignment, written)


def _region_formula(variable: str, region: Region) -> Condition | None:
    if region.is_point:
        return Comparison(variable, "=", region.lower)
    parts: list[Condition] = []
    if region.lower != float("-inf"):
        parts.append(Comparison(variable, ">", region.lower))
    if region.upper != float("inf"):
        parts.append(Comparison(variable, "<", region.upper))
    if not parts:
        return None
    return conj_all(parts)


def _written_guard(transition: NetTransition, update: RegionAssignment) -> Condition | None:
    parts = []
    for variable, region in update:
        if variable in transition.write_variables:
            formula = _region_formula(variable, region)
            if formula is not None:
                parts.append(formula)
    if not parts:
        return None
    return conj_all(parts)


# ---------------------------------------------------------------------------
# Compilation to a guarded automaton
# ---------------------------------------------------------------------------

NetState = tuple[Marking, RegionAssignment]


@dataclass
class NetAutomaton:
    """A guarded automaton whose states remember their net state."""

    automaton: GuardedAutomaton
    payloads: tuple[NetState, ...]


def net_to_automaton(
    system: NetSystem,
    partition: Partition,
    state_bound: int = DEFAULT_STATE_BOUND,
) -> NetAutomaton:
    """Worklist exploration of the abstract reachability graph.

    States are (marking, region assignment) classes; each fireable
    (transition, update) pair contributes an edge whose guard names the
    activity and pins every written variable to its update region.
    Silent transitions become unguarded edges.  Final states are those
    whose marking equals the final marking, regardless of data.
    """
    net = system.net
    initial: NetState = (
        system.initial_marking,
        region_assignment(
            {
                v: partition.region_of(value)
                for v, value in system.initial_assignment.items()
            }
        ),
    )
    states: list[NetState] = [initial]
    index: dict[NetState, int] = {initial: 0}
    edges: list[GuardedEdge] = []
    for source in states:
        marking, assignment = source
        for transition, update in enabled_transitions(
            marking, assignment, net, partition
        ):
            successor = fire_transition(marking, assignment, transition, update, net)
            target = index.get(successor)
            if target is None:
                target = len(states)
                if target >= state_bound:
                    raise ResourceLimitError(
                        f"net exploration exceeded {state_bound} states"
                    )
                index[successor] = target
                states.append(successor)
            if transition.silent:
                edges.append(GuardedEdge(index[source], None, target))
            else:
                guard: Condition = NameAtom(transition.label)
                if not is_trivially_true(transition.write_guard):
                    written = _written_guard(transition, update)
                    if written is not None:
                        guard = Conj(guard, written)
                edges.append(GuardedEdge(index[source], guard, target))
    finals = [
        i for i, (marking, _) in enumerate(states) if marking == system.final_marking
    ]
    names = [_state_name(state) for state in states]
    automaton = GuardedAutomaton(len(states), 0, finals, edges, names)
    return NetAutomaton(automaton, tuple(states))


def _state_name(state: NetState) -> str:
    marking, assignment = state
    tokens = ",".join(sorted(marking)) or "-"
    values = ",".join(f"{v}:{r}" for v, r in assignment)
    return f"{{{tokens}}}|{values}" if values else f"{{{tokens}}}"


def remove_silent_steps(net_automaton: NetAutomaton) -> NetAutomaton:
    """Compile away unguarded edges via silent closures.

    A state inherits the outgoing visible edges of its closure and is
    accepting when the closure meets a final state, so trailing and
    leading silent runs are preserved.  The result can be
    nondeterministic.  State identities survive, which the later passes
    rely on.
    """
    ga = net_automaton.automaton
    closures = [ga.silent_closure({q}) for q in range(ga.n_states)]
    edges = []
    for q in range(ga.n_states):
        seen: set[tuple[Condition, int, bool]] = set()
        for member in closures[q]:
            for edge in ga.out_edges(member):
                if edge.silent:
                    continue
                key = (edge.guard, edge.target, edge.violating)
                if key not in seen:
                    seen.add(key)
                    edges.append(GuardedEdge(q, edge.guard, edge.target, edge.violating))
    finals = {q for q in range(ga.n_states) if closures[q] & ga.finals}
    automaton = GuardedAutomaton(ga.n_states, ga.initial, finals, edges, ga.state_names)
    return NetAutomaton(automaton, net_automaton.payloads)


def add_skip_loops(
    net_automaton: NetAutomaton, system: NetSystem, signatures: SignatureSet
) -> NetAutomaton:
    """Self-loops that ignore events whose activity the net never uses.

    One event carries exactly one activity name, so the loop guard is the
    disjunction of the unused name atoms.
    """
    unused = sorted(signatures.activity_names - system.net.used_activity_names())
    if not unused:
        return net_automaton
    guard = disj_all([NameAtom(name) for name in unused])
    ga = net_automaton.automaton
    edges = list(ga.edges)
    for q in range(ga.n_states):
        edges.append(GuardedEdge(q, guard, q))
    automaton = GuardedAutomaton(ga.n_states, ga.initial, ga.finals, edges, ga.state_names)
    return NetAutomaton(automaton, net_automaton.payloads)


def add_deadlock_loops(
    net_automaton: NetAutomaton,
    system: NetSystem,
    partition: Partition,
) -> NetAutomaton:
    """Violating self-loops for events blocked by data guards.

    Read part: a transition that is marking-enabled but whose read guard
    fails under the state's assignment can never fire there, whatever the
    payload; the loop consumes any event with its activity name.  Write
    part: for a marking-enabled transition with a nontrivial write guard,
    the loop consumes events whose payload regions violate the guard,
    collected in one disjunctive formula.  Both kinds are marked
    violating: they keep the automaton able to consume the event while
    trapping the run away from acceptance.
    """
    net = system.net
    ga = net_automaton.automaton
    edges = list(ga.edges)
    for q, (marking, assignment) in enumerate(net_automaton.payloads):
        current = dict(assignment)
        for transition in net.transitions:
            if transition.silent or not net.marking_enabled(marking, transition):
                continue
            read_ok = eval_guard_region(
                transition.read_guard,
                region_assignment(
                    {v: current[v] for v in transition.read_variables}
                ),
            )
            if not read_ok:
                edges.append(
                    GuardedEdge(q, NameAtom(transition.label), q, violating=True)
                )
            if not is_trivially_true(transition.write_guard):
                blocked = _blocked_write_formula(transition, partition)
                if blocked is not None:
                    edges.append(
                        GuardedEdge(
                            q,
                            Conj(NameAtom(transition.label), blocked),
                            q,
                            violating=True,
                        )
                    )
    automaton = GuardedAutomaton(ga.n_states, ga.initial, ga.finals, edges, ga.state_names)
    return NetAutomaton(automaton, net_automaton.payloads)


def _blocked_write_formula(
    transition: NetTransition, partition: Partition
) -> Condition | None:
    """Disjunction over written-region combinations violating the write guard."""
    variables = sorted(transition.write_variables)
    clauses: list[Condition] = []
    for combo in itertools.product(partition.regions, repeat=len(variables)):
        update = region_assignment(dict(zip(variables, combo)))
        if eval_guard_region(transition.write_guard, update):
            continue
        parts = []
        for variable, region in zip(variables, combo):
            formula = _region_formula(variable, region)
            if formula is not None:
                parts.append(formula)
        clauses.append(conj_all(parts))
    if not clauses:
        return None
    return disj_all(clauses)


def compile_net(
    system: NetSystem,
    signatures: SignatureSet,
    partition: Partition,
    state_bound: int = DEFAULT_STATE_BOUND,
) -> NetAutomaton:
    """Full pipeline: explore, drop silent steps, add skip and deadlock loops."""
    raw = net_to_automaton(system, partition, state_bound)
    without_tau = remove_silent_steps(raw)
    skipping = add_skip_loops(without_tau, system, signatures)
    return add_deadlock_loops(skipping, system, partition)


# ---------------------------------------------------------------------------
# Reference compliance oracle
# ---------------------------------------------------------------------------


def trace_complies(
    trace: Trace,
    system: NetSystem,
    silent_budget: int | None = None,
) -> bool:
    """Whether a concrete trace embeds into a run reaching the final marking.

    Bounded search over concrete states: every trace event must fire a
    transition with its name, with the payload driving the written
    variables; between consecutive events (and at both ends) up to
    `silent_budget` silent firings may be inserted.  The default budget,
    one per net transition, covers acyclic silent structure.
    """
    net = system.net
    budget = len(net.transitions) if silent_budget is None else silent_budget
    initial = (
        0,
        system.initial_marking,
        tuple(sorted(system.initial_assignment.items())),
    )
    best_used: dict[tuple, int] = {initial: 0}
    stack = [(initial, 0)]
    while stack:
        (position, marking, alpha_items), used = stack.pop()
        alpha = dict(alpha_items)
        if position == len(trace) and marking == system.final_marking:
            return True
        # Silent insertions within the current gap.
        if used < budget:
            for transition in net.transitions:
                if not transition.silent:
                    continue
                if not net.marking_enabled(marking, transition):
                    continue
                beta = {v: alpha[v] for v in transition.read_variables}
                if not eval_guard(transition.read_guard, beta):
                    continue
                new_marking = (marking - set(net.pre[transition.tid])) | set(
                    net.post[transition.tid]
                )
                key = (position, frozenset(new_marking), alpha_items)
                if best_used.get(key, budget + 1) > used + 1:
                    best_used[key] = used + 1
                    stack.append((key, used + 1))
        # Consume the next trace event.
        if position < len(trace):
            event = trace[position]
            payload = event.payload_dict()
            for transition in net.transitions:
                if transition.label != event.name:
                    continue
                if not net.marking_enabled(marking, transition):
                    continue
                beta = {v: alpha[v] for v in transition.read_variables}
                conflict = False
                for v in transition.write_variables:
                    value = payload.get(v)
                    if value is None or (v in beta and beta[v] != value):
                        conflict = True
                        break
                    beta[v] = value
                if conflict:
                    continue
                if not eval_guard(transition.read_guard, beta):
                    continue
                if not eval_guard(transition.write_guard, beta):
                    continue
                new_marking = (marking - set(net.pre[transition.tid])) | set(
                    net.post[transition.tid]
                )
                new_alpha = dict(alpha)
                for v in transition.write_variables:
                    new_alpha[v] = payload[v]
                key = (
                    position + 1,
                    frozenset(new_marking),
                    tuple(sorted(new_alpha.items())),
                )
                if best_used.get(key, budget + 1) > 0:
                    best_used[key] = 0
                    stack.append((key, 0))
    return False
