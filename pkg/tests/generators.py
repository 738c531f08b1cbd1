"""Random model generators shared by module tests and the acceptance suite."""

from __future__ import annotations

import random

from hybridmon.conditions import (
    TRUE,
    Comparison,
    Condition,
    Conj,
    EventSignature,
    NameAtom,
    Neg,
    Partition,
    SignatureSet,
    conj_all,
    disj_all,
)
from hybridmon.errors import NetValidationError, ResourceLimitError
from hybridmon.petri import DataPetriNet, NetSystem, NetTransition, validate_net
from hybridmon.temporal import And, Formula, Leaf, Next, Not, Until, eventually


def desk_signatures() -> SignatureSet:
    """Three small signatures: two carrying one attribute each, one plain."""
    return SignatureSet(
        [
            EventSignature("act0", frozenset({"v"})),
            EventSignature("act1", frozenset({"w"})),
            EventSignature("act2", frozenset()),
        ]
    )


def random_guard(rng: random.Random, variables: list[str], constants: list[float]) -> Condition:
    """A small guard over the given variables; may be unsatisfiable."""
    if not variables:
        return TRUE

    def atom() -> Condition:
        return Comparison(rng.choice(variables), rng.choice("<=>"), rng.choice(constants))

    roll = rng.random()
    if roll < 0.4:
        return atom()
    if roll < 0.6:
        return Neg(atom())
    if roll < 0.8:
        return Conj(atom(), atom())
    return disj_all([atom(), atom()])


def random_net_system(
    rng: random.Random,
    signatures: SignatureSet,
    constants: list[float],
    max_places: int = 6,
    max_transitions: int = 6,
    silent_probability: float = 0.2,
) -> NetSystem | None:
    """One random candidate net with control flow that actually moves.

    Transitions are laid along a simulated token game: each consumes
    currently marked places and produces into places that keep the game
    1-safe, so chains, choices and loops all occur.  The final marking is
    usually a marking visited during the simulation (data guards may
    still make it unreachable); sometimes it is arbitrary to cover empty
    languages.  Labeled transitions write exactly their activity's
    attributes, as well-formedness demands; silent ones only read.
    """
    n_places = rng.randint(3, max_places)
    places = tuple(f"p{i}" for i in range(n_places))
    n_transitions = rng.randint(2, max_transitions)
    names = sorted(signatures.activity_names)
    variables = sorted({a for sig in signatures for a in sig.attributes})
    initial_marking = frozenset(rng.sample(places, rng.randint(1, 2)))
    marked = set(initial_marking)
    marking_snapshots = [frozenset(marked)]
    transitions = []
    pre: dict[str, dict[str, int]] = {}
    post: dict[str, dict[str, int]] = {}
    for i in range(n_transitions):
        tid = f"t{i}"
        if rng.random() < silent_probability:
            label = None
            write: Condition = TRUE
        else:
            label = rng.choice(names)
            attrs = sorted(signatures.attributes_of(label))
            if attrs:
                write = random_guard(rng, attrs, constants)
                if not (set(attrs) <= _guard_vars(write)):
                    # Guarantee the write guard mentions every attribute.
                    write = conj_all(
                        [write]
                        + [
                            Comparison(a, "<", max(constants) + 1)
                            for a in attrs
                            if a not in _guard_vars(write)
                        ]
                    )
            else:
                write = TRUE
        read = random_guard(rng, variables, constants) if rng.random() < 0.5 else TRUE
        transitions.append(NetTransition(tid, label, read, write))
        source_pool = sorted(marked) if marked else list(places)
        consumed = rng.sample(source_pool, rng.randint(1, min(2, len(source_pool))))
        # Producing into a place that stays marked would break 1-safety.
        target_pool = sorted((set(places) - marked) | set(consumed))
        produced = rng.sample(target_pool, rng.randint(0, min(2, len(target_pool))))
        pre[tid] = {p: 1 for p in consumed}
        post[tid] = {p: 1 for p in produced}
        marked = (marked - set(consumed)) | set(produced)
        marking_snapshots.append(frozenset(marked))
    if rng.random() < 0.15:
        final_marking = frozenset(rng.sample(places, rng.randint(0, 2)))
    else:
        final_marking = rng.choice(marking_snapshots)
    net = DataPetriNet(places, tuple(transitions), pre, post, frozenset(variables))
    assignment = {v: float(rng.choice(constants)) for v in variables}
    return NetSystem(
        net, initial_marking, assignment, final_marking, f"net{rng.randrange(10**6)}"
    )


def _guard_vars(cond: Condition) -> set[str]:
    from hybridmon.conditions import condition_variables

    return set(condition_variables(cond))


def valid_random_net(
    rng: random.Random,
    signatures: SignatureSet,
    constants: list[float],
    partition: Partition,
    attempts: int = 400,
    **kwargs,
) -> NetSystem:
    """A validated random net; mostly ones whose state space actually moves.

    A fifth of the results may be degenerate (immediately deadlocked or
    with an unreachable final marking) to keep empty and near-empty
    languages in the corpus.
    """
    from hybridmon.petri import net_to_automaton

    allow_boring = rng.random() < 0.2
    fallback = None
    for _ in range(attempts):
        system = random_net_system(rng, signatures, constants, **kwargs)
        if system is None:
            continue
        try:
            validate_net(system, signatures, partition)
        except (NetValidationError, ResourceLimitError):
            continue
        if allow_boring:
            return system
        fallback = system
        raw = net_to_automaton(system, partition)
        if raw.automaton.n_states >= 4 and raw.automaton.finals:
            return system
    if fallback is not None:
        return fallback
    raise AssertionError("could not generate a valid random net")


def random_formula(
    rng: random.Random,
    signatures: SignatureSet,
    constants: list[float],
    depth: int = 4,
    max_leaves: int = 3,
) -> Formula:
    names = sorted(signatures.activity_names)
    attrs = sorted(signatures.attribute_names)
    leaves: list[Formula] = []
    for _ in range(max_leaves):
        if attrs and rng.random() < 0.5:
            leaves.append(
                Leaf(Comparison(rng.choice(attrs), rng.choice("<=>"), rng.choice(constants)))
            )
        else:
            leaves.append(Leaf(NameAtom(rng.choice(names))))

    def build(d: int) -> Formula:
        if d == 0 or rng.random() < 0.25:
            return rng.choice(leaves)
        op = rng.randrange(5)
        if op == 0:
            return Not(build(d - 1))
        if op == 1:
            return And(build(d - 1), build(d - 1))
        if op == 2:
            return Next(build(d - 1))
        if op == 3:
            return Until(build(d - 1), build(d - 1))
        return eventually(build(d - 1))

    return build(depth)
