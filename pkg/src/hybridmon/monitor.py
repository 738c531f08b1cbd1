"""Live monitoring sessions over the annotated product automaton.

A compiled monitor is immutable and shared; each session tracks its own
run frontier, event history and snapshot log.  Snapshots report the
global and per-component verdicts plus the current and best achievable
violation costs; recommendations enumerate the abstract events that keep
the best achievable cost unchanged.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .automata import LabeledComponent, ProductAutomaton, RegionDfa, Verdict
from .conditions import (
    AbstractAlphabet,
    AbstractEvent,
    EnumTable,
    Event,
    Region,
    SignatureSet,
)
from .errors import PayloadMismatchError, UnknownActivityError


@dataclass(frozen=True)
class MonitorComponent:
    """One process component of a compiled monitor."""

    component_id: str
    kind: str  # "net" or "constraint"
    cost: int
    dfa: RegionDfa
    verdicts: tuple[Verdict, ...]

    def labeled(self) -> LabeledComponent:
        return LabeledComponent(self.component_id, self.dfa, self.verdicts)


class MonitorAutomaton:
    """Product of all component monitors, annotated with violation costs."""

    def __init__(
        self,
        signatures: SignatureSet,
        alphabet: AbstractAlphabet,
        components: Sequence[MonitorComponent],
        enums: EnumTable | None = None,
        state_bound: int = 100_000,
    ):
        from .automata import annotate_costs

        self.signatures = signatures
        self.alphabet = alphabet
        self.components = tuple(components)
        self.enums = {k: dict(v) for k, v in (enums or {}).items()}
        self.product = ProductAutomaton(
            [c.labeled() for c in self.components], alphabet, state_bound
        )
        self.annotation = annotate_costs(
            self.product, {c.component_id: c.cost for c in self.components}
        )
        self._labels_by_value = {
            attr: {float(v): label for label, v in table.items()}
            for attr, table in self.enums.items()
        }

    def decode_value(self, attribute: str, value: float) -> str | None:
        return self._labels_by_value.get(attribute, {}).get(float(value))

    def validate_event(self, event: Event) -> int:
        """Check the event against its signature; return its letter index."""
        if event.name not in self.signatures:
            raise UnknownActivityError(f"unknown activity {event.name!r}")
        expected = self.signatures.attributes_of(event.name)
        got = frozenset(dict(event.payload))
        if got != expected:
            raise PayloadMismatchError(
                f"activity {event.name!r} carries attributes {sorted(expected)}, "
                f"event has {sorted(got)}"
            )
        for attr, value in event.payload:
            if not math.isfinite(value):
                raise PayloadMismatchError(
                    f"attribute {attr!r} must be a finite number"
                )
        return self.alphabet.letter_of_event(event)


@dataclass(frozen=True)
class ComponentVerdict:
    component_id: str
    verdict: Verdict
    state: int

    def to_dict(self) -> dict:
        return {
            "id": self.component_id,
            "verdict": self.verdict.value,
            "state": self.state,
        }


@dataclass(frozen=True)
class VerdictSnapshot:
    """One monitoring step: verdicts and costs after `index` events."""

    index: int
    event: Event | None
    global_verdict: Verdict
    components: tuple[ComponentVerdict, ...]
    cost_cur: int
    cost_best: int
    conflict: bool

    def to_dict(self) -> dict:
        return {
            "index": self.index,
            "event": (
                None
                if self.event is None
                else {"name": self.event.name, "attrs": self.event.payload_dict()}
            ),
            "global": self.global_verdict.value,
            "components": [c.to_dict() for c in self.components],
            "cost_cur": self.cost_cur,
            "cost_best": self.cost_best,
            "conflict": self.conflict,
        }


@dataclass(frozen=True)
class RecommendedEvent:
    """An abstract event that preserves the best achievable cost."""

    activity: str
    regions: tuple[tuple[str, Region], ...]
    sample: tuple[tuple[str, float], ...]
    labels: tuple[tuple[str, str], ...]

    def to_dict(self) -> dict:
        return {
            "activity": self.activity,
            "regions": {attr: str(region) for attr, region in self.regions},
            "sample": dict(self.sample),
            "labels": dict(self.labels),
        }


@dataclass(frozen=True)
class Recommendation:
    status: str  # "at-best" or "improvable"
    best_cost: int
    events: tuple[RecommendedEvent, ...]

    def to_dict(self) -> dict:
        return {
            "status": self.status,
            "best_cost": self.best_cost,
            "events": [e.to_dict() for e in self.events],
        }


class MonitorSession:
    """Mutable per-execution state over a shared monitor.

    The frontier is kept as a set of product states for robustness, but
    with letter-indexed deterministic products it stays a singleton; it
    is never empty because every component automaton is complete.
    """

    def __init__(self, monitor: MonitorAutomaton):
        self.monitor = monitor
        self.frontier: frozenset[int] = frozenset({monitor.product.initial})
        self.history: list[Event] = []
        self.snapshots: list[VerdictSnapshot] = []
        self._conflict_reported = False
        initial = self._snapshot(0, None, self.frontier, peek=False)
        self.snapshots.append(initial)

    # -- stepping -----------------------------------------------------------

    def step(self, event: Event) -> VerdictSnapshot:
        """Consume one event, advancing the session."""
        letter = self.monitor.validate_event(event)
        frontier = self._advance(self.frontier, letter)
        snapshot = self._snapshot(len(self.history) + 1, event, frontier, peek=False)
        self.frontier = frontier
        self.history.append(event)
        self.snapshots.append(snapshot)
        return snapshot

    def what_if(self, event: Event) -> VerdictSnapshot:
        """The snapshot `step(event)` would produce, without committing it."""
        letter = self.monitor.validate_event(event)
        frontier = self._advance(self.frontier, letter)
        return self._snapshot(len(self.history) + 1, event, frontier, peek=True)

    def _advance(self, frontier: frozenset[int], letter: int) -> frozenset[int]:
        product = self.monitor.product
        return frozenset(product.delta[q][letter] for q in frontier)

    def _best_states(self, frontier: frozenset[int]) -> list[int]:
        best = self.monitor.annotation.cost_best
        minimum = min(best[q] for q in frontier)
        return sorted(q for q in frontier if best[q] == minimum)

    def _snapshot(
        self, index: int, event: Event | None, frontier: frozenset[int], peek: bool
    ) -> VerdictSnapshot:
        monitor = self.monitor
        product = monitor.product
        state = self._best_states(frontier)[0]
        locals_ = product.states[state]
        components = tuple(
            ComponentVerdict(c.component_id, c.verdicts[local], local)
            for c, local in zip(monitor.components, locals_)
        )
        is_conflict_state = product.conflicts[state]
        flag = is_conflict_state and not self._conflict_reported
        if flag and not peek:
            self._conflict_reported = True
        return VerdictSnapshot(
            index=index,
            event=event,
            global_verdict=product.global_verdicts[state],
            components=components,
            cost_cur=monitor.annotation.cost_cur[state],
            cost_best=monitor.annotation.cost_best[state],
            conflict=flag,
        )

    # -- recommendations ----------------------------------------------------

    def recommend(self) -> Recommendation:
        """Events into successors that preserve the best achievable cost.

        When the current state already achieves its best cost there is
        nothing to improve and no events are listed.  Otherwise every
        abstract event leading into a best-cost successor is returned;
        concrete groundings within the same regions are interchangeable,
        so each carries one sample payload.
        """
        monitor = self.monitor
        annotation = monitor.annotation
        product = monitor.product
        best_states = self._best_states(self.frontier)
        best_cost = annotation.cost_best[best_states[0]]
        if all(annotation.cost_cur[q] == annotation.cost_best[q] for q in best_states):
            return Recommendation("at-best", best_cost, ())
        letters: set[int] = set()
        for q in best_states:
            for letter, target in enumerate(product.delta[q]):
                if annotation.cost_best[target] == best_cost:
                    letters.add(letter)
        events = tuple(
            self._recommended_event(monitor.alphabet.letters[letter])
            for letter in sorted(letters)
        )
        return Recommendation("improvable", best_cost, events)

    def _recommended_event(self, letter: AbstractEvent) -> RecommendedEvent:
        sample = {attr: region.sample() for attr, region in letter.regions}
        labels = {}
        for attr, value in sample.items():
            label = self.monitor.decode_value(attr, value)
            if label is not None:
                labels[attr] = label
        return RecommendedEvent(
            letter.name,
            letter.regions,
            tuple(sorted(sample.items())),
            tuple(sorted(labels.items())),
        )

    # -- reporting ----------------------------------------------------------

    def current_snapshot(self) -> VerdictSnapshot:
        return self.snapshots[-1]
