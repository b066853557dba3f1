"""Command line entry points: check, explore, bench, serve."""
from __future__ import annotations

import csv as csv_mod
import sys
import time
from pathlib import Path

import click

from .egs import CompileError, CompiledModel, ModelError, compile_lks, parse_model
from .explorer import (
    BoundaryError,
    NoAlternative,
    PropertyHolds,
    alt_event,
    alt_state,
    enabled_types,
    init_session,
    set_event_type,
    step_backward,
    step_forward,
)
from .seltl import ParseError, UnknownAtomError, bind, parse_formula


class CliError(click.ClickException):
    exit_code = 2


def _load_compiled(model_path: str, add_idle: bool) -> CompiledModel:
    try:
        source = Path(model_path).read_text()
    except OSError as err:
        raise CliError(f"cannot read model: {err}")
    try:
        return compile_lks(parse_model(source), add_idle=add_idle)
    except (ModelError, CompileError) as err:
        raise CliError(f"model error: {err}")


def _load_property(compiled: CompiledModel, prop: str | None, prop_file: str | None):
    if (prop is None) == (prop_file is None):
        raise CliError("give exactly one of --prop or --prop-file")
    if prop_file is not None:
        try:
            prop = Path(prop_file).read_text()
        except OSError as err:
            raise CliError(f"cannot read property: {err}")
    try:
        return bind(parse_formula(prop), compiled.lks)
    except (ParseError, UnknownAtomError) as err:
        raise CliError(f"property error: {err}")


def _props_line(compiled: CompiledModel, state: int) -> str:
    parts = []
    for name, value in compiled.state_props(state).items():
        shown = {True: "true", False: "false"}.get(value, value)
        parts.append(f"{name}={shown}")
    return "{" + " ".join(parts) + "}"


def _print_listing(compiled: CompiledModel, lasso) -> None:
    lks = compiled.lks
    for pos in range(len(lasso)):
        s, e = lasso.states[pos], lasso.events[pos]
        ev = lks.events[e]
        marker = "  (loop starts here)" if pos == lasso.loop_start else ""
        click.echo(
            f"  {pos:>2}  {lks.state_names[s]}  {_props_line(compiled, s)}  "
            f"{ev.identity} :{lks.type_names[ev.type_id]}{marker}"
        )


def _print_trace(compiled: CompiledModel, state) -> None:
    click.echo("trace:")
    _print_listing(compiled, state.pi)


def _print_focus(compiled: CompiledModel, state) -> None:
    lks = compiled.lks
    s, e = state.pi.unroll(state.i)
    s2, _ = state.pi.unroll(state.i + 1)
    click.echo(
        f"focus {state.i}: {lks.state_names[s]} --{lks.events[e].identity}--> {lks.state_names[s2]}"
    )


_MODE = {"ce": "counterexample", "witness": "witness"}


@click.group()
def main() -> None:
    """Explore bounded behaviours of guarded-event models."""


@main.command()
@click.option("--model", required=True, help="model source file")
@click.option("--prop", default=None, help="property text")
@click.option("--prop-file", default=None, help="property file")
@click.option("--bound", default=10, show_default=True, help="maximum trace length")
@click.option("--mode", type=click.Choice(["ce", "witness"]), default="ce", show_default=True)
@click.option("--add-idle", is_flag=True, help="give deadlocked states an idle self-loop")
def check(model, prop, prop_file, bound, mode, add_idle):
    """Check a property; exit 0 when it holds within the bound, 1 otherwise."""
    compiled = _load_compiled(model, add_idle)
    phi = _load_property(compiled, prop, prop_file)
    outcome = init_session(compiled.lks, phi, bound, _MODE[mode])
    if isinstance(outcome, PropertyHolds):
        if mode == "witness":
            click.echo(f"no witness within bound {outcome.bound}")
        else:
            click.echo(f"valid within bound {outcome.bound}")
        sys.exit(0)
    label = "witness" if mode == "witness" else "counterexample"
    click.echo(f"{label} of length {len(outcome.pi)} (loop starts at {outcome.pi.loop_start}):")
    _print_listing(compiled, outcome.pi)
    sys.exit(1)


@main.command()
@click.option("--model", required=True)
@click.option("--prop", default=None)
@click.option("--prop-file", default=None)
@click.option("--bound", default=10, show_default=True)
@click.option("--mode", type=click.Choice(["ce", "witness"]), default="ce", show_default=True)
@click.option("--add-idle", is_flag=True)
@click.option("--script", "script_path", required=True, help="op script: fwd|back|alt-state|alt-event|type NAME|enabled")
def explore(model, prop, prop_file, bound, mode, add_idle, script_path):
    """Replay a scripted exploration and print a deterministic transcript."""
    compiled = _load_compiled(model, add_idle)
    phi = _load_property(compiled, prop, prop_file)
    try:
        lines = Path(script_path).read_text().splitlines()
    except OSError as err:
        raise CliError(f"cannot read script: {err}")
    st = init_session(compiled.lks, phi, bound, _MODE[mode])
    click.echo(
        f"session model={compiled.system.name} bound={bound} mode={_MODE[mode]}"
    )
    if isinstance(st, PropertyHolds):
        click.echo(f"property holds within bound {st.bound}; nothing to explore")
        sys.exit(0)
    _print_trace(compiled, st)
    _print_focus(compiled, st)
    for raw in lines:
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        click.echo(f"> {line}")
        parts = line.split()
        op, arg = parts[0], (parts[1] if len(parts) > 1 else None)
        if op == "fwd":
            st = step_forward(st)
            _print_focus(compiled, st)
        elif op == "back":
            try:
                st = step_backward(st)
                _print_focus(compiled, st)
            except BoundaryError as err:
                click.echo(f"  error: boundary: {err}")
        elif op == "enabled":
            probes = enabled_types(st)
            flags = " ".join(
                f"{t}={'enabled' if p.enabled else 'disabled'}" for t, p in probes.items()
            )
            click.echo(f"  {flags}")
        elif op in ("alt-state", "alt-event", "type"):
            if op == "alt-state":
                nxt = alt_state(st)
            elif op == "alt-event":
                nxt = alt_event(st)
            else:
                if arg is None:
                    raise CliError("type op needs an event type name")
                try:
                    nxt = set_event_type(st, arg)
                except KeyError as err:
                    raise CliError(f"unknown type: {err}")
            if isinstance(nxt, NoAlternative):
                click.echo("  no alternative")
            else:
                st = nxt
                _print_trace(compiled, st)
                _print_focus(compiled, st)
        else:
            raise CliError(f"unknown op {op!r} in script")
    sys.exit(0)


@main.command()
@click.option("--model", required=True)
@click.option("--prop", default=None)
@click.option("--prop-file", default=None)
@click.option("--bound", default=10, show_default=True)
@click.option("--add-idle", is_flag=True)
@click.option("--csv", "csv_path", default=None, help="write machine-readable rows here")
@click.option("--times/--no-times", default=True, show_default=True,
              help="include wall-clock times in the CSV (disable for byte-stable output)")
@click.option("--jobs", default=1, show_default=True, help="parallel dry-run queries")
def bench(model, prop, prop_file, bound, add_idle, csv_path, times, jobs):
    """Time the enabled-type dry run at every position of the first counterexample."""
    compiled = _load_compiled(model, add_idle)
    phi = _load_property(compiled, prop, prop_file)
    t0 = time.perf_counter()
    st = init_session(compiled.lks, phi, bound)
    first_ms = (time.perf_counter() - t0) * 1000
    if isinstance(st, PropertyHolds):
        click.echo(f"property holds within bound {st.bound}; no table")
        sys.exit(0)
    lks = compiled.lks
    click.echo(
        f"model={compiled.system.name} bound={bound} "
        f"first-counterexample: length={len(st.pi)} loopStart={st.pi.loop_start} T={first_ms/1000:.3f}s"
    )
    rows = []
    for i in range(len(st.pi)):
        focused = st
        for _ in range(i):
            focused = step_forward(focused)
        probes = enabled_types(focused, jobs=jobs)
        total_ms = sum(p.query_ms for p in probes.values())
        enabled = [t for t, p in probes.items() if p.enabled]
        executed = lks.type_names[lks.event_type(st.pi.unroll(i)[1])]
        rows.append((i, total_ms, enabled, executed))
    click.echo(f"{'i':>3}  {'T_i(s)':>8}  {'enabled':<40} executed")
    for i, total_ms, enabled, executed in rows:
        shown = ",".join(f"{t}*" if t == executed else t for t in enabled)
        click.echo(f"{i:>3}  {total_ms/1000:>8.3f}  {shown:<40} {executed}")
    if csv_path:
        with open(csv_path, "w", newline="") as fh:
            writer = csv_mod.writer(fh)
            writer.writerow(["i", "t_i_ms", "enabled_types", "executed_type"])
            for i, total_ms, enabled, executed in rows:
                cell = f"{total_ms:.3f}" if times else ""
                writer.writerow([i, cell, ";".join(enabled), executed])
    sys.exit(0)


@main.command()
@click.option("--port", default=8046, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--jobs", default=1, show_default=True)
@click.option("--max-concurrent", default=4, show_default=True)
def serve(port, host, jobs, max_concurrent):
    """Run the HTTP session service."""
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(jobs=jobs, max_concurrent=max_concurrent), host=host, port=port, log_level="warning")


if __name__ == "__main__":
    main()
