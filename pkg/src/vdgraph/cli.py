"""``vdgraph`` command-line interface.

    vdgraph build SBOM OSV_REPORT --name flink --out build/
    vdgraph query paths build/flink.snapshot.json --top 5
    vdgraph query depth build/flink.snapshot.json
    vdgraph query chains build/flink.snapshot.json --vuln CVE-2022-45685
    vdgraph export csv build/flink.snapshot.json --out neo4j-import/
    vdgraph report build/*.snapshot.json --out reports/
    vdgraph batch projects.json --out build/ --jobs 4

Exit codes: 0 ok, 1 every batch project failed, 2 unparseable input,
3 merge or query failure, 4 I/O failure.  Diagnostics go to stderr,
results to stdout.
"""

from __future__ import annotations

import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from contextlib import contextmanager
from pathlib import Path
from typing import Optional

import click

from . import __version__
from .errors import CyclicDependencies, ParseError, VDGraphError
from .export import export_cypher, export_dot, export_graphdb_csv
from .model import Severity
from .pipeline import ProjectSpec, build_project_files
from .query import enumerate_paths, path_counts_by_severity, vulnerability_depths
from .report import ProjectResult, aggregate_projects, analyze_project, depth_histogram, vulnerability_depth_summary
from .sca import DEFAULT_SEVERITY_LADDER, SEVERITY_RULES
from .snapshot import dumps_snapshot, read_snapshot

logger = logging.getLogger("vdgraph")

OUT_DIR_ENV = "VDGRAPH_OUT_DIR"

EXIT_ALL_FAILED = 1
EXIT_PARSE = 2
EXIT_MERGE = 3
EXIT_IO = 4

SEVERITY_CHOICE = click.Choice([s.value for s in Severity], case_sensitive=False)


def _default_out() -> str:
    return os.environ.get(OUT_DIR_ENV, ".")


def _parse_ladder(text: str) -> tuple[str, ...]:
    rules = tuple(part.strip() for part in text.split(",") if part.strip())
    unknown = [r for r in rules if r not in SEVERITY_RULES]
    if unknown or not rules:
        raise click.BadParameter(f"expected a comma list of {sorted(SEVERITY_RULES)}, got {text!r}")
    return rules


def exit_code_for(exc: BaseException) -> int:
    if isinstance(exc, OSError):
        return EXIT_IO
    if isinstance(exc, ParseError):
        return EXIT_PARSE
    return EXIT_MERGE


@contextmanager
def _failures_exit():
    ctx = click.get_current_context()
    try:
        yield
    except (OSError, VDGraphError) as exc:
        if isinstance(exc, OSError) and exc.filename:
            click.echo(f"error: {exc.strerror or exc}: {exc.filename}", err=True)
        else:
            click.echo(f"error: {exc}", err=True)
        ctx.exit(exit_code_for(exc))


def _load(snapshot: str):
    with _failures_exit():
        return read_snapshot(snapshot)


@click.group()
@click.version_option(__version__, prog_name="vdgraph")
@click.option("-q", "--quiet", is_flag=True, help="Suppress warnings.")
@click.option("-v", "--verbose", is_flag=True, help="Debug logging.")
def cli(quiet: bool, verbose: bool) -> None:
    """Merge SBOM and SCA output into a vulnerability-dependency graph."""
    level = logging.DEBUG if verbose else logging.ERROR if quiet else logging.WARNING
    logging.basicConfig(level=level, stream=sys.stderr, format="%(levelname)s: %(message)s", force=True)


# -- build -------------------------------------------------------------------


@cli.command()
@click.argument("sbom", type=click.Path(dir_okay=False))
@click.argument("sca", type=click.Path(dir_okay=False))
@click.option("--name", help="Project name (default: SBOM file stem).")
@click.option("--out", "out_dir", default=_default_out, show_default=f"${OUT_DIR_ENV} or .", type=click.Path(file_okay=False))
@click.option("--strict", is_flag=True, help="Reject SBOM components without bom-ref.")
@click.option("--severity-source", default=",".join(DEFAULT_SEVERITY_LADDER), show_default=True,
              help="Order of severity rules to try (label, cvss).")
def build(sbom: str, sca: str, name: Optional[str], out_dir: str, strict: bool, severity_source: str) -> None:
    """Build a graph snapshot from an SBOM and an OSV-Scanner report."""
    ladder = _parse_ladder(severity_source)
    name = name or Path(sbom).name.split(".")[0]
    with _failures_exit():
        graph, report, _ = build_project_files(ProjectSpec(name, Path(sbom), Path(sca)), strict=strict, ladder=ladder)
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        target = out / f"{name}.snapshot.json"
        target.write_text(dumps_snapshot(graph, report, name), encoding="utf-8")
    click.echo(f"{name}: {len(graph.vertices)} vertices, {len(graph.edges)} edges -> {target}")
    click.echo(report.summary())


# -- query -------------------------------------------------------------------


@cli.group()
def query() -> None:
    """Query a graph snapshot."""


@query.command("paths")
@click.argument("snapshot", type=click.Path(dir_okay=False))
@click.option("--severity", type=SEVERITY_CHOICE, default="high", show_default=True)
@click.option("--include-critical", "--include-higher", "include_higher", is_flag=True,
              help="Also count advisories in buckets above --severity.")
@click.option("--top", type=click.IntRange(min=1), help="Only the N largest counts.")
@click.option("--json", "as_json", is_flag=True)
def query_paths(snapshot: str, severity: str, include_higher: bool, top: Optional[int], as_json: bool) -> None:
    """Root-to-component path counts for vulnerable components."""
    graph, _, _ = _load(snapshot)
    with _failures_exit():
        try:
            records = path_counts_by_severity(graph, Severity(severity.lower()), include_higher)
        except CyclicDependencies as exc:
            click.echo("cycle: " + " -> ".join(exc.cycle + exc.cycle[:1]), err=True)
            raise
    if top is not None:
        records = records[:top]
    if as_json:
        click.echo(json.dumps([r.__dict__ for r in records], indent=2))
        return
    click.echo(f"{'path_count':>12}  component")
    for rec in records:
        click.echo(f"{rec.path_count:>12}  {rec.component_name} [{rec.component_id}]")


@query.command("depth")
@click.argument("snapshot", type=click.Path(dir_okay=False))
@click.option("--json", "as_json", is_flag=True)
def query_depth(snapshot: str, as_json: bool) -> None:
    """Shortest root-to-vulnerability path length for every advisory."""
    graph, _, _ = _load(snapshot)
    with _failures_exit():
        records = vulnerability_depths(graph, skip_unreachable=True)
    skipped = len(graph.ids_with_label("vulnerability")) - len(records)
    if skipped:
        click.echo(f"warning: {skipped} advisories sit on components unreachable from the root; not listed", err=True)
    hist = depth_histogram(records)
    summary = vulnerability_depth_summary(hist)
    if as_json:
        payload = {
            "records": [{"vulnerability_id": r.vulnerability_id, "severity": r.severity.value, "depth": r.depth} for r in records],
            "histogram": hist.to_dict(),
            "summary": summary,
        }
        click.echo(json.dumps(payload, indent=2, sort_keys=True))
        return
    click.echo(f"{'depth':>6}  {'severity':<9} vulnerability")
    for rec in sorted(records, key=lambda r: (r.depth, r.vulnerability_id)):
        click.echo(f"{rec.depth:>6}  {rec.severity.value:<9} {rec.vulnerability_id}")
    if records:
        click.echo(
            f"mean {summary['mean_path_length']:.2f} (intermediate {summary['mean_intermediate_dependencies']:.2f}), "
            f"median {summary['median_path_length']:g}, <=4: {summary['cumulative_at_4']:.1%}"
        )


@query.command("chains")
@click.argument("snapshot", type=click.Path(dir_okay=False))
@click.option("--vuln", "vuln_id", required=True, help="Advisory id or alias.")
@click.option("--limit", type=click.IntRange(min=1), default=10, show_default=True)
@click.option("--json", "as_json", is_flag=True)
def query_chains(snapshot: str, vuln_id: str, limit: int, as_json: bool) -> None:
    """Dependency chains from the root to one advisory."""
    graph, _, _ = _load(snapshot)
    with _failures_exit():
        try:
            paths = enumerate_paths(graph, vuln_id, limit)
        except CyclicDependencies as exc:
            click.echo("cycle: " + " -> ".join(exc.cycle + exc.cycle[:1]), err=True)
            raise
    if as_json:
        click.echo(json.dumps(paths, indent=2))
        return
    for path in paths:
        click.echo(" -> ".join(graph.payload(v).name for v in path))


# -- export ------------------------------------------------------------------


@cli.group()
def export() -> None:
    """Serialize a graph snapshot."""


@export.command("csv")
@click.argument("snapshot", type=click.Path(dir_okay=False))
@click.option("--out", "out_dir", default=_default_out, type=click.Path(file_okay=False))
def export_csv_cmd(snapshot: str, out_dir: str) -> None:
    """Neo4j bulk-import CSV files (components, vulnerabilities, relationships)."""
    graph, _, _ = _load(snapshot)
    with _failures_exit():
        for path in export_graphdb_csv(graph).write(Path(out_dir)):
            click.echo(str(path))


def _emit(text: str, out_file: Optional[str]) -> None:
    if out_file is None:
        click.echo(text, nl=False)
        return
    with _failures_exit():
        Path(out_file).write_text(text, encoding="utf-8")
    click.echo(out_file)


@export.command("cypher")
@click.argument("snapshot", type=click.Path(dir_okay=False))
@click.option("-o", "--output", "out_file", type=click.Path(dir_okay=False), help="Write here instead of stdout.")
def export_cypher_cmd(snapshot: str, out_file: Optional[str]) -> None:
    """Cypher CREATE script."""
    graph, _, _ = _load(snapshot)
    with _failures_exit():
        text = export_cypher(graph)
    _emit(text, out_file)


@export.command("dot")
@click.argument("snapshot", type=click.Path(dir_okay=False))
@click.option("-o", "--output", "out_file", type=click.Path(dir_okay=False), help="Write here instead of stdout.")
def export_dot_cmd(snapshot: str, out_file: Optional[str]) -> None:
    """Graphviz DOT."""
    graph, _, _ = _load(snapshot)
    _emit(export_dot(graph), out_file)


# -- report / batch ----------------------------------------------------------


def _write_report(aggregate, out_dir: str) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.json").write_text(aggregate.to_json(), encoding="utf-8")
    (out / "report.csv").write_text(aggregate.stats_csv(), encoding="utf-8", newline="")
    (out / "depth_histogram.csv").write_text(aggregate.depth_histogram_csv(), encoding="utf-8", newline="")
    (out / "component_depths.csv").write_text(aggregate.component_depth_csv(), encoding="utf-8", newline="")


@cli.command()
@click.argument("snapshots", nargs=-1, required=True, type=click.Path(dir_okay=False))
@click.option("--out", "out_dir", default=_default_out, type=click.Path(file_okay=False))
@click.option("--top", type=click.IntRange(min=1), default=5, show_default=True)
@click.option("--severity", type=SEVERITY_CHOICE, default="high", show_default=True)
@click.option("--include-critical", "--include-higher", "include_higher", is_flag=True)
def report(snapshots, out_dir: str, top: int, severity: str, include_higher: bool) -> None:
    """Statistics and histograms over one or more snapshots."""
    results = []
    for snap in snapshots:
        graph, merge_report, project = _load(snap)
        with _failures_exit():
            results.append(analyze_project(
                graph, project or Path(snap).name.split(".")[0], None, merge_report,
                top, Severity(severity.lower()), include_higher,
            ))
    aggregate = aggregate_projects(results)
    with _failures_exit():
        _write_report(aggregate, out_dir)
    click.echo(aggregate.render_text(), nl=False)


def read_manifest(path: Path) -> list[ProjectSpec]:
    """JSON array of {name, sbom, sca} objects, or one ``name sbom sca`` per line.

    Relative paths resolve against the manifest's directory.
    """
    text = path.read_text(encoding="utf-8")
    base = path.parent
    entries: list[tuple[str, str, str]] = []
    if text.lstrip().startswith("["):
        try:
            data = json.loads(text)
            entries = [(str(e["name"]), str(e["sbom"]), str(e["sca"])) for e in data]
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            raise ParseError(f"bad manifest {path}: {exc}") from exc
    else:
        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 3:
                raise ParseError(f"{path}:{lineno}: expected 'name sbom sca'")
            entries.append((parts[0], parts[1], parts[2]))
    return [ProjectSpec(name, base / sbom, base / sca) for name, sbom, sca in entries]


def _batch_one(spec: ProjectSpec, strict: bool, ladder, top: int, severity: Severity, include_higher: bool):
    try:
        graph, merge_report, runtime = build_project_files(spec, strict=strict, ladder=ladder)
        result = analyze_project(graph, spec.name, runtime, merge_report, top, severity, include_higher)
        return spec.name, dumps_snapshot(graph, merge_report, spec.name), result, None
    except (OSError, VDGraphError) as exc:
        return spec.name, None, None, f"{type(exc).__name__}: {exc}"


@cli.command()
@click.argument("manifest", type=click.Path(dir_okay=False))
@click.option("--out", "out_dir", default=_default_out, type=click.Path(file_okay=False))
@click.option("-j", "--jobs", type=click.IntRange(min=1), default=1, show_default=True)
@click.option("--top", type=click.IntRange(min=1), default=5, show_default=True)
@click.option("--severity", type=SEVERITY_CHOICE, default="high", show_default=True)
@click.option("--include-critical", "--include-higher", "include_higher", is_flag=True)
@click.option("--strict", is_flag=True)
@click.option("--severity-source", default=",".join(DEFAULT_SEVERITY_LADDER), show_default=True)
def batch(manifest: str, out_dir: str, jobs: int, top: int, severity: str, include_higher: bool,
          strict: bool, severity_source: str) -> None:
    """Build and report every project listed in MANIFEST."""
    ladder = _parse_ladder(severity_source)
    with _failures_exit():
        specs = read_manifest(Path(manifest))
    if not specs:
        click.echo(f"error: manifest {manifest} lists no projects", err=True)
        click.get_current_context().exit(EXIT_PARSE)

    args = (strict, ladder, top, Severity(severity.lower()), include_higher)
    if jobs == 1:
        outcomes = [_batch_one(spec, *args) for spec in specs]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = [pool.submit(_batch_one, spec, *args) for spec in specs]
            outcomes = [f.result() for f in futures]

    out = Path(out_dir)
    results: list[ProjectResult] = []
    failures = []
    with _failures_exit():
        out.mkdir(parents=True, exist_ok=True)
        for name, snapshot_text, result, error in outcomes:
            if error is not None:
                logger.warning("project %s failed: %s", name, error)
                failures.append({"project": name, "error": error})
                continue
            (out / f"{name}.snapshot.json").write_text(snapshot_text, encoding="utf-8")
            results.append(result)
        aggregate = aggregate_projects(results, failures)
        _write_report(aggregate, out_dir)
    click.echo(aggregate.render_text(), nl=False)
    if not results:
        click.get_current_context().exit(EXIT_ALL_FAILED)


def main() -> None:
    cli(prog_name="vdgraph")


if __name__ == "__main__":
    main()
