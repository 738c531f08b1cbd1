"""Model documents, the compile pipeline, and offline trace replay.

A model file is one JSON document with sections `signatures`, `enums`,
`dpns`, `constraints` and `costs`.  Loading validates the document
against the shipped schema and every guard/formula against the declared
signatures; compiling collects constants across all components into one
shared partition, compiles each component to a labeled deterministic
automaton, and builds the annotated product.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any, Mapping

import jsonschema

from .automata import (
    DEFAULT_STATE_BOUND,
    Verdict,
    complete,
    determinize,
    label_states,
    minimize,
)
from .conditions import (
    TRUE,
    AbstractAlphabet,
    Event,
    EventSignature,
    Partition,
    SignatureSet,
    Trace,
    condition_constants,
    parse_guard,
)
from .errors import HybridmonError, ModelError, TraceFormatError
from .monitor import (
    MonitorAutomaton,
    MonitorComponent,
    MonitorSession,
    VerdictSnapshot,
)
from .petri import (
    DataPetriNet,
    NetSystem,
    NetTransition,
    collect_net_constants,
    compile_net,
    validate_net,
)
from .temporal import (
    Formula,
    expand_template,
    formula_leaves,
    formula_to_automaton,
    parse_formula,
)


@dataclass(frozen=True)
class ConstraintDef:
    """A declarative component: an identifier and its temporal formula."""

    constraint_id: str
    formula: Formula
    source: dict[str, Any]


@dataclass
class HybridProcessModel:
    """Signatures, enum tables, net and constraint components, and costs."""

    model_id: str
    name: str
    signatures: SignatureSet
    enums: dict[str, dict[str, float]]
    nets: list[NetSystem]
    constraints: list[ConstraintDef]
    costs: dict[str, int]
    document: dict[str, Any] = field(repr=False, default_factory=dict)

    def component_ids(self) -> list[str]:
        return [n.net_id for n in self.nets] + [
            c.constraint_id for c in self.constraints
        ]


def _schema() -> dict:
    text = resources.files("hybridmon").joinpath("data/model.schema.json").read_text()
    return json.loads(text)


def model_from_dict(document: Mapping[str, Any], model_id: str = "model") -> HybridProcessModel:
    """Build and validate a model from a parsed document."""
    try:
        jsonschema.validate(document, _schema())
    except jsonschema.ValidationError as err:
        raise ModelError(f"model document invalid: {err.message}") from err
    signatures = SignatureSet(
        [
            EventSignature(name, frozenset(attrs))
            for name, attrs in document["signatures"].items()
        ]
    )
    enums = {
        attr: {label: float(value) for label, value in table.items()}
        for attr, table in document.get("enums", {}).items()
    }
    for attr in enums:
        if attr not in signatures.attribute_names:
            raise ModelError(f"enum table for unknown attribute {attr!r}")

    def resolve_value(attr: str, raw: Any) -> float:
        if isinstance(raw, (int, float)) and not isinstance(raw, bool):
            value = float(raw)
            if not math.isfinite(value):
                raise ModelError(f"non-finite value for {attr!r}")
            return value
        if isinstance(raw, str):
            table = enums.get(attr, {})
            if raw not in table:
                raise ModelError(f"unknown enum label {raw!r} for attribute {attr!r}")
            return table[raw]
        raise ModelError(f"bad value {raw!r} for attribute {attr!r}")

    nets = []
    for spec in document.get("dpns", []):
        transitions = []
        for t in spec["transitions"]:
            read = t.get("read")
            write = t.get("write")
            try:
                transitions.append(
                    NetTransition(
                        t["id"],
                        t.get("label"),
                        parse_guard(read, signatures, enums) if read else TRUE,
                        parse_guard(write, signatures, enums) if write else TRUE,
                    )
                )
            except HybridmonError as err:
                raise ModelError(
                    f"net {spec['id']!r}, transition {t['id']!r}: {err}"
                ) from err
        pre: dict[str, dict[str, int]] = {t.tid: {} for t in transitions}
        post: dict[str, dict[str, int]] = {t.tid: {} for t in transitions}
        places = list(spec["places"])
        tids = {t.tid for t in transitions}
        for arc in spec["arcs"]:
            source, target = arc["source"], arc["target"]
            weight = int(arc.get("weight", 1))
            if source in places and target in tids:
                pre[target][source] = weight
            elif source in tids and target in places:
                post[source][target] = weight
            else:
                raise ModelError(
                    f"net {spec['id']!r}: arc {source!r} -> {target!r} does not "
                    "connect a place and a transition"
                )
        assignment = {
            var: resolve_value(var, raw)
            for var, raw in spec["initial_assignment"].items()
        }
        nets.append(
            NetSystem(
                DataPetriNet(
                    tuple(places),
                    tuple(transitions),
                    pre,
                    post,
                    frozenset(assignment),
                ),
                frozenset(spec["initial_marking"]),
                assignment,
                frozenset(spec["final_marking"]),
                spec["id"],
            )
        )

    constraints = []
    for spec in document.get("constraints", []):
        try:
            if "ltlf" in spec:
                formula = parse_formula(spec["ltlf"], signatures, enums)
            else:
                formula = expand_template(
                    spec["template"],
                    activation=spec.get("activation"),
                    target=spec.get("target"),
                    activation_condition=spec.get("activation_condition"),
                    target_condition=spec.get("target_condition"),
                    signatures=signatures,
                    enums=enums,
                )
        except HybridmonError as err:
            raise ModelError(f"constraint {spec['id']!r}: {err}") from err
        constraints.append(ConstraintDef(spec["id"], formula, dict(spec)))

    ids = [n.net_id for n in nets] + [c.constraint_id for c in constraints]
    if len(set(ids)) != len(ids):
        raise ModelError("component ids must be unique")

    raw_costs = document.get("costs")
    if raw_costs is None:
        costs = {cid: 1 for cid in ids}
    else:
        unknown = set(raw_costs) - set(ids)
        if unknown:
            raise ModelError(f"costs for unknown components {sorted(unknown)}")
        missing = set(ids) - set(raw_costs)
        if missing:
            raise ModelError(f"costs missing for components {sorted(missing)}")
        costs = {cid: int(raw_costs[cid]) for cid in ids}
        if any(v < 0 for v in costs.values()):
            raise ModelError("violation costs must be non-negative")
        if sum(costs.values()) >= 2**64:
            raise ModelError("violation costs overflow a 64-bit sum")

    return HybridProcessModel(
        model_id=document.get("id", model_id),
        name=document.get("name", document.get("id", model_id)),
        signatures=signatures,
        enums=enums,
        nets=nets,
        constraints=constraints,
        costs=costs,
        document=dict(document),
    )


def load_model(path: str | Path) -> HybridProcessModel:
    path = Path(path)
    try:
        document = json.loads(path.read_text())
    except json.JSONDecodeError as err:
        raise ModelError(f"{path}: not valid JSON: {err}") from err
    return model_from_dict(document, model_id=path.stem)


def model_to_dict(model: HybridProcessModel) -> dict[str, Any]:
    """The document form of a model; loading it back compiles equivalently."""
    return dict(model.document)


def collect_constants(model: HybridProcessModel) -> list[float]:
    """Sorted union of constants over all components and initial states."""
    constants: set[float] = set()
    for net in model.nets:
        constants |= collect_net_constants(net)
    for constraint in model.constraints:
        for leaf in formula_leaves(constraint.formula):
            constants |= condition_constants(leaf)
    return sorted(constants)


def compile_model(
    model: HybridProcessModel, state_bound: int = DEFAULT_STATE_BOUND
) -> MonitorAutomaton:
    """Validate and compile every component, then build the product."""
    partition = Partition(collect_constants(model))
    alphabet = AbstractAlphabet(model.signatures, partition)
    components: list[MonitorComponent] = []
    for net in model.nets:
        validate_net(net, model.signatures, partition, state_bound)
        compiled = compile_net(net, model.signatures, partition, state_bound)
        dfa = minimize(complete(determinize(compiled.automaton, alphabet, state_bound)))
        components.append(
            MonitorComponent(
                net.net_id, "net", model.costs[net.net_id], dfa, label_states(dfa)
            )
        )
    for constraint in model.constraints:
        automaton = formula_to_automaton(constraint.formula, alphabet, state_bound)
        dfa = minimize(complete(determinize(automaton, alphabet, state_bound)))
        components.append(
            MonitorComponent(
                constraint.constraint_id,
                "constraint",
                model.costs[constraint.constraint_id],
                dfa,
                label_states(dfa),
            )
        )
    return MonitorAutomaton(
        model.signatures, alphabet, components, model.enums, state_bound
    )


# ---------------------------------------------------------------------------
# Traces
# ---------------------------------------------------------------------------


def parse_trace_line(
    line: str, line_number: int, model: HybridProcessModel
) -> Event:
    try:
        record = json.loads(line)
    except json.JSONDecodeError as err:
        raise TraceFormatError(f"not valid JSON: {err.msg}", line_number) from err
    if not isinstance(record, dict) or "name" not in record:
        raise TraceFormatError("record must be an object with a 'name'", line_number)
    name = record["name"]
    attrs = record.get("attrs", {})
    if not isinstance(attrs, dict):
        raise TraceFormatError("'attrs' must be an object", line_number)
    payload: dict[str, float] = {}
    for attr, raw in attrs.items():
        if isinstance(raw, str):
            table = model.enums.get(attr, {})
            if raw not in table:
                raise TraceFormatError(
                    f"unknown enum label {raw!r} for attribute {attr!r}", line_number
                )
            payload[attr] = table[raw]
        elif isinstance(raw, (int, float)) and not isinstance(raw, bool):
            payload[attr] = float(raw)
        else:
            raise TraceFormatError(f"bad value for attribute {attr!r}", line_number)
    return Event.of(name, payload)


def load_trace(path: str | Path, model: HybridProcessModel) -> Trace:
    """One JSON record per line; blank lines and # comments are skipped."""
    events = []
    for number, line in enumerate(Path(path).read_text().splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        events.append(parse_trace_line(stripped, number, model))
    return tuple(events)


# ---------------------------------------------------------------------------
# Replay
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ReplayReport:
    """Offline replay result: one snapshot per event plus the initial one.

    `final_verdicts` answer "if the case ended exactly here": a component
    whose current state is accepting is reported PS, otherwise PV.  The
    live verdicts of the last snapshot stay available for exit codes and
    for resuming.
    """

    snapshots: tuple[VerdictSnapshot, ...]
    final_verdicts: dict[str, Verdict]
    final_global: Verdict
    first_conflict_index: int | None
    total_cost: int

    def last(self) -> VerdictSnapshot:
        return self.snapshots[-1]

    def exit_code(self) -> int:
        live = self.last().global_verdict
        if live is Verdict.PS:
            return 0
        if live is Verdict.PV:
            return 1
        return 2

    def to_dict(self) -> dict[str, Any]:
        return {
            "snapshots": [s.to_dict() for s in self.snapshots],
            "final_verdicts": {k: v.value for k, v in self.final_verdicts.items()},
            "final_global": self.final_global.value,
            "first_conflict_index": self.first_conflict_index,
            "total_cost": self.total_cost,
        }


_FINAL_COLLAPSE = {
    Verdict.TS: Verdict.PS,
    Verdict.PS: Verdict.PS,
    Verdict.TV: Verdict.PV,
    Verdict.PV: Verdict.PV,
}


def replay(monitor: MonitorAutomaton, trace: Trace) -> ReplayReport:
    session = MonitorSession(monitor)
    for event in trace:
        session.step(event)
    last = session.current_snapshot()
    final_verdicts = {
        cv.component_id: _FINAL_COLLAPSE[cv.verdict] for cv in last.components
    }
    final_global = (
        Verdict.PV
        if any(v is Verdict.PV for v in final_verdicts.values())
        else Verdict.PS
    )
    first_conflict = next(
        (s.index for s in session.snapshots if s.conflict), None
    )
    return ReplayReport(
        snapshots=tuple(session.snapshots),
        final_verdicts=final_verdicts,
        final_global=final_global,
        first_conflict_index=first_conflict,
        total_cost=last.cost_cur,
    )


def snapshot_json(snapshot: VerdictSnapshot) -> str:
    """Canonical single-line serialization shared by the CLI and the API."""
    return json.dumps(snapshot.to_dict(), sort_keys=True)
