"""Command-line interface: ``arceval <command>``."""

from __future__ import annotations

import json
import re
import shutil
import sys
from dataclasses import replace
from importlib import resources
from pathlib import Path

import click

from arceval import analysis, catalogue, corpus, dsl, monitor, prioritiser, workspace
from arceval.errors import ArcEvalError, ParseError, ProcessError, VocabularyError
from arceval.measures import FAIL, evaluate_scenario
from arceval.model import AnalysisLedger
from arceval.telemetry import WindowSpec, ingest, read_lines

EXIT_OK = 0
EXIT_FINDINGS = 2
EXIT_VIOLATIONS = monitor.EXIT_VIOLATIONS
EXIT_PERSISTENT = monitor.EXIT_PERSISTENT
EXIT_PARSE = 5

_WINDOW_PART = re.compile(r"^(\d+(?:\.\d+)?)(s|m|h)?$")
_DURATION = {"s": 1, "m": 60, "h": 3600}


class Failure(click.ClickException):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.exit_code = code


def parse_window(text: str) -> WindowSpec:
    """``100`` or ``100/50`` for event counts; ``60s``, ``5m/1m``, ``1h`` for durations."""
    parts = text.split("/")
    if len(parts) > 2:
        raise click.BadParameter(f"bad window {text!r}")
    parsed = []
    for part in parts:
        m = _WINDOW_PART.match(part.strip())
        if not m:
            raise click.BadParameter(f"bad window {text!r}")
        parsed.append((float(m.group(1)), m.group(2)))
    units = {u is None for _, u in parsed}
    if len(units) != 1:
        raise click.BadParameter("window size and stride must both be counts or both durations")
    try:
        if parsed[0][1] is None:
            return WindowSpec("count", *(v for v, _ in parsed))
        return WindowSpec("duration", *(v * _DURATION[u] for v, u in parsed))
    except ArcEvalError as exc:
        raise click.BadParameter(str(exc)) from None


def parse_weights(text: str) -> tuple[float, float, float]:
    try:
        values = tuple(float(v) for v in text.split(","))
    except ValueError:
        raise click.BadParameter(f"bad weights {text!r}") from None
    if len(values) != 3:
        raise click.BadParameter("weights need three values: impact,risk,relevance")
    return values  # type: ignore[return-value]


def _load(path: str) -> workspace.Workspace:
    try:
        return workspace.load_workspace(path)
    except FileNotFoundError as exc:
        raise Failure(f"no workspace at {path}: {exc.filename}", EXIT_FINDINGS) from None


def _read_telemetry(source: str):
    records, rejected = ingest(read_lines(source))
    for lineno, reason in rejected:
        click.echo(f"telemetry line {lineno}: rejected: {reason}", err=True)
    return records


@click.group()
@click.version_option(package_name="artifact")
def main() -> None:
    """Scenario-based architecture evaluation for foundation-model agents."""


workspace_option = click.option(
    "--workspace", "ws_path", default=".", show_default=True, type=click.Path(file_okay=False),
    help="Workspace directory holding arceval.json.")
format_option = click.option(
    "--format", "fmt", type=click.Choice(["text", "machine"]), default="text", show_default=True)


def _guard(fn):
    """Map library errors to exit codes."""
    import functools

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except ParseError as exc:
            raise Failure(str(exc), EXIT_PARSE) from None
        except (ProcessError, VocabularyError, ArcEvalError) as exc:
            raise Failure(str(exc), EXIT_FINDINGS) from None

    return wrapper


@main.command()
@workspace_option
@click.option("--luna", is_flag=True, help="Start from the Luna tax copilot corpus.")
@_guard
def init(ws_path: str, luna: bool) -> None:
    """Create a workspace with the default governance tags."""
    root = Path(ws_path)
    if (root / workspace.MANIFEST).exists():
        raise Failure(f"{root / workspace.MANIFEST} already exists", EXIT_FINDINGS)
    if luna:
        root.mkdir(parents=True, exist_ok=True)
        with resources.as_file(corpus.luna_directory()) as src:
            for item in Path(src).iterdir():
                if item.is_file():
                    shutil.copy(item, root / item.name)
    else:
        ws = workspace.Workspace(governance=tuple(catalogue.default_governance_tags()))
        workspace.save_workspace(ws, root)
    click.echo(f"initialised workspace in {root}")


@main.command("catalogue")
@click.option("--file", "override", type=click.Path(exists=True, dir_okay=False),
              help="File of general blocks replacing built-in entries by quality.")
@click.option("--quality", help="Show one quality attribute only.")
@format_option
@_guard
def catalogue_cmd(override: str | None, quality: str | None, fmt: str) -> None:
    """Print the general-scenario catalogue."""
    text = Path(override).read_text(encoding="utf-8") if override else None
    entries = catalogue.load_catalogue(text, override or "<catalogue>")
    if quality:
        entries = [g for g in entries if g.quality == quality]
        if not entries:
            raise Failure(f"unknown quality {quality!r}", EXIT_FINDINGS)
    if fmt == "machine":
        click.echo(dsl.serialize(entries), nl=False)
        return
    for g in entries:
        click.echo(f"{g.quality}: artefacts {', '.join(g.artefacts)}; metrics {', '.join(g.metrics) or '-'}")


@main.group()
def scenario() -> None:
    """Context scenario drafting."""


@scenario.command("new")
@click.argument("quality")
@click.argument("scenario_id")
@click.option("--priority", default=None)
@click.option("--artefact", "artefacts", multiple=True, help="Repeat for each artefact.")
@click.option("--measure", "measures", multiple=True, help="Measure expression; repeatable.")
@click.option("--catalogue-file", type=click.Path(exists=True, dir_okay=False))
@click.option("--output", type=click.Path(dir_okay=False), help="Append to this file instead of printing.")
@_guard
def scenario_new(quality, scenario_id, priority, artefacts, measures, catalogue_file, output) -> None:
    """Draft a context scenario from the general scenario for QUALITY."""
    text = Path(catalogue_file).read_text(encoding="utf-8") if catalogue_file else None
    index = catalogue.catalogue_index(catalogue.load_catalogue(text))
    if quality not in index:
        raise Failure(f"unknown quality {quality!r}", EXIT_FINDINGS)
    overrides = {}
    if priority:
        overrides["priority"] = priority
    if artefacts:
        overrides["artefacts"] = list(artefacts)
    if measures:
        overrides["measures"] = list(measures)
    block = dsl.serialize([catalogue.instantiate(index[quality], scenario_id, overrides)])
    if output:
        path = Path(output)
        prefix = "\n" if path.exists() and path.stat().st_size else ""
        with path.open("a", encoding="utf-8") as fh:
            fh.write(prefix + block)
        click.echo(f"appended scenario {scenario_id} to {path}")
    else:
        click.echo(block, nl=False)


@main.command()
@click.argument("files", nargs=-1, type=click.Path(exists=True, dir_okay=False))
@click.option("--workspace", "ws_path", default=None, type=click.Path(file_okay=False),
              help="Check a whole workspace (default when no files are given: current directory).")
@_guard
def check(files, ws_path) -> None:
    """Parse documents and report validation findings."""
    findings = []
    cat = catalogue.catalogue_index()
    if files:
        for f in files:
            doc = dsl.parse_file(f)
            for s in doc.scenarios:
                findings.extend(dsl.validate(s, cat))
    else:
        ws = _load(ws_path or ".")
        for s in ws.scenarios:
            findings.extend(dsl.validate(s, cat))
        if "identify-requirements" in ws.completed:
            findings.extend(workspace.coverage_check(ws))
    for f in findings:
        click.echo(str(f))
    serious = [f for f in findings if f.severity in ("error", "warning")]
    click.echo(f"{len(findings)} finding(s), {len(serious)} warning(s) or error(s)")
    if serious:
        sys.exit(EXIT_FINDINGS)


@main.command()
@workspace_option
@click.option("--weights", default=None, help="impact,risk,relevance weights, e.g. 1,1,1.")
@format_option
@_guard
def prioritise(ws_path, weights, fmt) -> None:
    """Rank scenarios from stakeholder scores."""
    ws = _load(ws_path)
    if weights:
        ws = replace(ws, weights=parse_weights(weights))
    rows = analysis.scenario_priorities(ws)
    if fmt == "machine":
        out = []
        for r in rows:
            if isinstance(r, prioritiser.PriorityResult):
                out.append({"scenario": r.scenario, "rank": r.rank, "score": prioritiser.format_score(r.score),
                            "band": r.band, "computed_band": r.computed_band, "manual": r.manual})
            else:
                out.append({"scenario": r[0], "rank": None, "score": None, "band": r[1],
                            "computed_band": None, "manual": True})
        click.echo(json.dumps(out, indent=2))
        return
    for r in rows:
        if isinstance(r, prioritiser.PriorityResult):
            flag = " (declared)" if r.manual else ""
            click.echo(f"{r.rank:>3}  {r.scenario:<16} {prioritiser.format_score(r.score)}  {r.band}{flag}")
        else:
            click.echo(f"  -  {r[0]:<16} -      {r[1]} (declared, no scores)")


@main.command()
@workspace_option
@click.option("--architecture", default=None, help="Revision to analyse (default: current).")
@format_option
@_guard
def analyse(ws_path, architecture, fmt) -> None:
    """Gap analysis of scenarios against an architecture revision.

    Exits 2 when a high-priority scenario is not fully covered.
    """
    ws = _load(ws_path)
    name = architecture or ws.current_architecture
    if name is None:
        raise Failure("workspace has no architecture revision", EXIT_FINDINGS)
    try:
        arch = ws.architecture(name)
    except KeyError:
        raise Failure(f"unknown architecture revision {name!r}", EXIT_FINDINGS) from None
    bands = analysis.band_map(analysis.scenario_priorities(ws))
    results, risks = analysis.gap_analysis(ws.scenarios, arch, bands)
    if fmt == "machine":
        click.echo(json.dumps({
            "architecture": arch.name,
            "coverage": {c.scenario: {"coverage": c.level, "approaches": list(c.approaches),
                                      "untouched": list(c.untouched)} for c in results},
            "risks": [r.id for r in risks],
        }, indent=2, sort_keys=True))
    else:
        click.echo(f"architecture {arch.name}")
        for c in results:
            click.echo(f"  {c.scenario:<16} {c.quality:<15} {c.level:<8} {c.justification}")
        for r in risks:
            click.echo(f"risk {r.id}: {r.text}")
    if risks:
        sys.exit(EXIT_FINDINGS)


@main.command("monitor")
@workspace_option
@click.option("--telemetry", required=True, help="JSONL telemetry file, or - for standard input.")
@click.option("--window", "window_text", default="100", show_default=True,
              help="Window: 100, 100/50 (events) or 60s, 5m/1m, 1h (duration).")
@click.option("--persistence", default=monitor.DEFAULT_PERSISTENCE, show_default=True, type=click.IntRange(min=1))
@click.option("--apply", "apply_", is_flag=True,
              help="Record monitor-risks and, on persistent violations, reprioritise in the workspace.")
@format_option
@_guard
def monitor_cmd(ws_path, telemetry, window_text, persistence, apply_, fmt) -> None:
    """Replay telemetry through scenario measures.

    Alerts are written to standard output as JSON lines. Exit 0 means no
    violations, 3 violations, 4 persistent violations.
    """
    window = parse_window(window_text)
    ws = _load(ws_path)
    records = _read_telemetry(telemetry)
    prios = analysis.scenario_priorities(ws)
    bands = analysis.band_map(prios)
    result = monitor.run_monitor(ws.scenarios, records, window, persistence, bands)
    click.echo(result.alert_lines(), nl=False)
    if fmt == "text":
        for s in result.summaries:
            click.echo(
                f"{s.scenario} {s.spec}: {s.windows_failed}/{s.windows_evaluated} windows failed, "
                f"longest streak {s.consecutive_failures}{' (persistent)' if s.persistent else ''}",
                err=True)
        for t in result.triggers:
            click.echo(f"trigger {t.scenario}: {t}", err=True)
    if apply_:
        ws = workspace.advance(ws, "monitor-risks")
        ranked = [p for p in prios if isinstance(p, prioritiser.PriorityResult)]
        if result.triggers:
            _, ledger = monitor.feed_reprioritiser(result.triggers, ranked, AnalysisLedger(), ws.weights)
            ws = workspace.advance(ws, "reprioritise", {"audit": ledger.audit})
            click.echo(f"reprioritised {len(ledger.audit)} scenario(s); re-run analyse", err=True)
        workspace.save_manifest(ws, ws_path, workspace.manifest_documents(ws_path))
    sys.exit(result.exit_code)


@main.command()
@workspace_option
@click.option("--telemetry", default=None, help="Optional JSONL telemetry for the runtime section.")
@click.option("--window", "window_text", default="100", show_default=True)
@click.option("--persistence", default=monitor.DEFAULT_PERSISTENCE, show_default=True, type=click.IntRange(min=1))
@click.option("--output", type=click.Path(dir_okay=False), help="Write the report here instead of stdout.")
@click.option("--sidecar", type=click.Path(dir_okay=False), help="Also write the coverage table as JSON.")
@format_option
@_guard
def report(ws_path, telemetry, window_text, persistence, output, sidecar, fmt) -> None:
    """Render the evaluation report (machine format: coverage JSON)."""
    ws = _load(ws_path)
    if telemetry is None and "analyse-architecture" not in ws.completed:
        raise ProcessError("report", "analyse-architecture")
    verdicts, summaries = None, ()
    if telemetry is not None:
        window = parse_window(window_text)
        records = _read_telemetry(telemetry)
        verdicts = {s.id: evaluate_scenario(s, records) for s in ws.scenarios}
        bands = analysis.band_map(analysis.scenario_priorities(ws))
        summaries = monitor.run_monitor(ws.scenarios, records, window, persistence, bands).summaries
    text = analysis.coverage_sidecar(ws) if fmt == "machine" else analysis.render_report(ws, verdicts, summaries)
    if output:
        Path(output).write_text(text, encoding="utf-8")
    else:
        click.echo(text, nl=False)
    if sidecar:
        Path(sidecar).write_text(analysis.coverage_sidecar(ws), encoding="utf-8")
    if verdicts and any(v.outcome == FAIL for vs in verdicts.values() for v in vs):
        sys.exit(EXIT_VIOLATIONS)


@main.command()
@click.argument("profile", type=click.Choice(sorted(corpus.PROFILES)))
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("-n", "count", default=100, show_default=True, type=click.IntRange(min=1), help="Units to generate.")
@click.option("--rate", default=None, type=click.FloatRange(0, 1), help="Override the profile's pass rate.")
def generate(profile, seed, count, rate) -> None:
    """Write a synthetic Luna telemetry trace to standard output."""
    p = corpus.PROFILES[profile]
    if rate is not None:
        p = p.with_rate(rate)
    click.echo(corpus.generate_trace(p, seed, count), nl=False)

