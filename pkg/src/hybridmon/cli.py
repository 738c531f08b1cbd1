"""Command-line interface: validate, compile, replay, explain, serve.

Replay exit codes: 0 when the final live verdict is permanently
satisfied, 1 when permanently violated, 2 when the outcome is still open
(temporarily satisfied/violated), 3 on errors.  All diagnostics go to
standard error; data output goes to standard out.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from .errors import HybridmonError
from .model import (
    compile_model,
    load_model,
    load_trace,
    replay,
    snapshot_json,
)
from .monitor import MonitorSession


def _fail(message: str, code: int = 1) -> None:
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


@click.group()
def main() -> None:
    """Monitor hybrid process specifications."""


@main.command()
@click.argument("model_path", type=click.Path(exists=True, dir_okay=False))
def validate(model_path: str) -> None:
    """Load a model and run every structural and safety check."""
    try:
        model = load_model(model_path)
        compile_model(model)
    except HybridmonError as err:
        _fail(str(err))
    click.echo(
        f"{model.model_id}: {len(model.nets)} net(s), "
        f"{len(model.constraints)} constraint(s) valid",
        err=True,
    )


@main.command(name="compile")
@click.argument("model_path", type=click.Path(exists=True, dir_okay=False))
@click.option(
    "--emit-graph",
    "graph_dir",
    type=click.Path(file_okay=False),
    default=None,
    help="Write DOT files for every component automaton and the product.",
)
def compile_command(model_path: str, graph_dir: str | None) -> None:
    """Compile a model and print the sizes of the resulting automata."""
    try:
        model = load_model(model_path)
        monitor = compile_model(model)
    except HybridmonError as err:
        _fail(str(err))
    for component in monitor.components:
        click.echo(
            f"{component.component_id}: {component.dfa.n_states} states", err=True
        )
    click.echo(
        f"product: {monitor.product.n_states} states over "
        f"{len(monitor.alphabet)} abstract events",
        err=True,
    )
    if graph_dir:
        out = Path(graph_dir)
        out.mkdir(parents=True, exist_ok=True)
        for component in monitor.components:
            path = out / f"{component.component_id}.dot"
            path.write_text(
                component.dfa.to_dot(component.component_id, component.verdicts)
            )
            click.echo(f"wrote {path}", err=True)
        product_path = out / "product.dot"
        product_path.write_text(
            monitor.product.to_dot(
                "product",
                monitor.annotation.cost_cur,
                monitor.annotation.cost_best,
            )
        )
        click.echo(f"wrote {product_path}", err=True)


@main.command(name="replay")
@click.argument("model_path", type=click.Path(exists=True, dir_okay=False))
@click.argument("trace_path", type=click.Path(exists=True, dir_okay=False))
@click.option(
    "--report",
    "report_dir",
    type=click.Path(file_okay=False),
    default=None,
    help="Write snapshots.jsonl, report.json and rendered figures here.",
)
@click.option("--verbose", is_flag=True, help="Print every snapshot, not just the last.")
def replay_command(
    model_path: str, trace_path: str, report_dir: str | None, verbose: bool
) -> None:
    """Replay a trace file against a model and report verdicts and costs."""
    try:
        model = load_model(model_path)
        monitor = compile_model(model)
        trace = load_trace(trace_path, model)
        result = replay(monitor, trace)
    except HybridmonError as err:
        _fail(str(err), code=3)
    snapshots = result.snapshots if verbose else result.snapshots[-1:]
    for snapshot in snapshots:
        click.echo(snapshot_json(snapshot))
    summary = {
        "final_verdicts": {k: v.value for k, v in result.final_verdicts.items()},
        "final_global": result.final_global.value,
        "first_conflict_index": result.first_conflict_index,
        "total_cost": result.total_cost,
    }
    click.echo(json.dumps(summary, sort_keys=True))
    if report_dir:
        from .report import write_report

        for path in write_report(result, report_dir):
            click.echo(f"wrote {path}", err=True)
    sys.exit(result.exit_code())


@main.command()
@click.argument("model_path", type=click.Path(exists=True, dir_okay=False))
@click.argument("trace_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--at", "index", type=int, required=True, help="Snapshot index to explain.")
def explain(model_path: str, trace_path: str, index: int) -> None:
    """Print the snapshot and the best-next-event recommendation at a step."""
    try:
        model = load_model(model_path)
        monitor = compile_model(model)
        trace = load_trace(trace_path, model)
    except HybridmonError as err:
        _fail(str(err), code=3)
    if not 0 <= index <= len(trace):
        _fail(f"--at must lie in 0..{len(trace)}", code=3)
    session = MonitorSession(monitor)
    for event in trace[:index]:
        session.step(event)
    click.echo(snapshot_json(session.current_snapshot()))
    click.echo(json.dumps(session.recommend().to_dict(), sort_keys=True))


@main.command()
@click.argument("models_path", type=click.Path(exists=True), required=False)
@click.option("--models-dir", type=click.Path(exists=True, file_okay=False), default=None)
@click.option("--port", type=int, default=8000, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
def serve(models_path: str | None, models_dir: str | None, port: int, host: str) -> None:
    """Serve the monitoring API (and the bundled UI, when built).

    MODELS_PATH may be one model file or a directory of model files; the
    --models-dir option is an alias for passing a directory.
    """
    import uvicorn

    from .service import build_registry, create_app

    path = models_path or models_dir
    if path is None:
        _fail("pass a model file, a models directory, or --models-dir")
    try:
        registry = build_registry(path)
    except HybridmonError as err:
        _fail(str(err))
    import os

    ui_dir = os.environ.get("HYBRIDMON_UI_DIR", "frontend/dist")
    app = create_app(registry, ui_dir=ui_dir if Path(ui_dir).is_dir() else None)
    uvicorn.run(app, host=host, port=port)


if __name__ == "__main__":
    main()
