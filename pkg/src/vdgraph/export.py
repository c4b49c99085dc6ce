"""Graph serializers: Neo4j bulk-import CSV (with a re-importer), Cypher, DOT."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from .errors import InvalidGraph, MalformedDocument
from .model import (
    Component,
    EdgeLabel,
    Severity,
    Source,
    VDGraph,
    VertexLabel,
    Vulnerability,
)

# relationship types follow the names used by the stock Cypher queries
RELATIONSHIP_TYPES = {EdgeLabel.DEPN: "dependency", EdgeLabel.HAS_V: "vulnerability"}
_EDGE_FROM_TYPE = {v: k for k, v in RELATIONSHIP_TYPES.items()}

COMPONENT_HEADER = [
    "id:ID", ":LABEL", "name", "general_name", "group", "version", "publisher",
    "type", "licenses_raw", "most_recent_license", "source",
]
VULNERABILITY_HEADER = [
    "id:ID", ":LABEL", "aliases:string[]", "severity", "summary", "published",
    "modified", "details_raw",
]
RELATIONSHIP_HEADER = [":START_ID", ":END_ID", ":TYPE"]

BUNDLE_FILES = ("components.csv", "vulnerabilities.csv", "relationships.csv")


@dataclass(frozen=True)
class CsvBundle:
    component_nodes: str
    vulnerability_nodes: str
    relationships: str

    def write(self, directory: Path) -> list[Path]:
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        written = []
        for name, text in zip(BUNDLE_FILES, (self.component_nodes, self.vulnerability_nodes, self.relationships)):
            path = directory / name
            path.write_text(text, encoding="utf-8", newline="")
            written.append(path)
        return written

    @classmethod
    def read(cls, directory: Path) -> "CsvBundle":
        directory = Path(directory)
        texts = []
        for name in BUNDLE_FILES:
            # csv writes \r\n; keep it so a read bundle compares equal to a fresh one
            with open(directory / name, encoding="utf-8", newline="") as fh:
                texts.append(fh.read())
        return cls(*texts)


def _require_valid(graph: VDGraph) -> None:
    problems = graph.validate()
    if problems:
        raise InvalidGraph(problems)


def _csv_text(header: list[str], rows: list[list[str]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def _opt(value: Optional[str]) -> str:
    return "" if value is None else value


def export_graphdb_csv(graph: VDGraph) -> CsvBundle:
    """Bulk-import node and relationship files, rows sorted by id.

    The root shares ``components.csv`` with the components, distinguished by
    its ``:LABEL``.  Severity is written upper-case (``HIGH``) so the stock
    ``v.severity = 'HIGH'`` filter works unchanged after import.
    """
    _require_valid(graph)
    comp_rows, vuln_rows = [], []
    for vid in sorted(graph.vertices):
        label, payload = graph.vertices[vid]
        if isinstance(payload, Component):
            comp_rows.append([
                vid, label.value, payload.name, payload.general_name, payload.group,
                payload.version, _opt(payload.publisher), _opt(payload.component_type),
                _opt(payload.licenses_raw), _opt(payload.most_recent_license), payload.source.value,
            ])
        else:
            vuln_rows.append([
                vid, label.value, ";".join(payload.aliases), payload.severity.value.upper(),
                _opt(payload.summary), _opt(payload.published), _opt(payload.modified),
                _opt(payload.details_raw),
            ])
    rel_rows = [[e.source, e.target, RELATIONSHIP_TYPES[e.label]] for e in sorted(graph.edges)]
    return CsvBundle(
        component_nodes=_csv_text(COMPONENT_HEADER, comp_rows),
        vulnerability_nodes=_csv_text(VULNERABILITY_HEADER, vuln_rows),
        relationships=_csv_text(RELATIONSHIP_HEADER, rel_rows),
    )


def _rows(text: str, header: list[str]) -> list[dict[str, str]]:
    reader = csv.DictReader(io.StringIO(text, newline=""))
    if reader.fieldnames != header:
        raise MalformedDocument(f"unexpected CSV header {reader.fieldnames}, want {header}")
    return list(reader)


def import_graphdb_csv(bundle: CsvBundle) -> VDGraph:
    """Rebuild a graph from :func:`export_graphdb_csv` output."""
    graph = VDGraph()
    for row in _rows(bundle.component_nodes, COMPONENT_HEADER):
        graph.add_vertex(VertexLabel(row[":LABEL"]), Component(
            id=row["id:ID"],
            general_name=row["general_name"],
            version=row["version"],
            group=row["group"],
            source=Source(row["source"]),
            publisher=row["publisher"] or None,
            component_type=row["type"] or None,
            licenses_raw=row["licenses_raw"] or None,
            most_recent_license=row["most_recent_license"] or None,
        ))
    for row in _rows(bundle.vulnerability_nodes, VULNERABILITY_HEADER):
        aliases = tuple(a for a in row["aliases:string[]"].split(";") if a)
        graph.add_vertex(VertexLabel(row[":LABEL"]), Vulnerability(
            id=row["id:ID"],
            severity=Severity.parse(row["severity"]),
            aliases=aliases,
            summary=row["summary"] or None,
            published=row["published"] or None,
            modified=row["modified"] or None,
            details_raw=row["details_raw"] or None,
        ))
    for row in _rows(bundle.relationships, RELATIONSHIP_HEADER):
        graph.add_edge(row[":START_ID"], row[":END_ID"], _EDGE_FROM_TYPE[row[":TYPE"]])
    return graph


# -- Cypher ------------------------------------------------------------------


def cypher_string(value: str) -> str:
    escaped = value.replace("\\", "\\\\").replace("'", "\\'")
    escaped = escaped.replace("\n", "\\n").replace("\r", "\\r").replace("\t", "\\t")
    return f"'{escaped}'"


def _cypher_props(props: dict[str, object]) -> str:
    parts = []
    for key, value in props.items():
        if value is None:
            continue
        if isinstance(value, (list, tuple)):
            rendered = "[" + ", ".join(cypher_string(v) for v in value) + "]"
        else:
            rendered = cypher_string(str(value))
        parts.append(f"`{key}`: {rendered}")
    return "{" + ", ".join(parts) + "}"


def _vertex_props(payload) -> dict[str, object]:
    if isinstance(payload, Component):
        return {
            "id": payload.id, "name": payload.name, "general_name": payload.general_name,
            "group": payload.group, "version": payload.version, "publisher": payload.publisher,
            "type": payload.component_type, "licenses_raw": payload.licenses_raw,
            "most_recent_license": payload.most_recent_license, "source": payload.source.value,
        }
    return {
        "id": payload.id, "aliases": list(payload.aliases), "severity": payload.severity.value.upper(),
        "summary": payload.summary, "published": payload.published, "modified": payload.modified,
    }


def export_cypher(graph: VDGraph) -> str:
    """CREATE script: every vertex, then every edge matched by ``id``."""
    _require_valid(graph)
    lines = []
    for vid in sorted(graph.vertices):
        label, payload = graph.vertices[vid]
        lines.append(f"CREATE (:`{label.value}` {_cypher_props(_vertex_props(payload))});")
    for edge in sorted(graph.edges):
        lines.append(
            f"MATCH (a {{id: {cypher_string(edge.source)}}}), (b {{id: {cypher_string(edge.target)}}}) "
            f"CREATE (a)-[:`{RELATIONSHIP_TYPES[edge.label]}`]->(b);"
        )
    return "\n".join(lines) + "\n"


# -- DOT ---------------------------------------------------------------------

_DOT_STYLE = {
    VertexLabel.ROOT: 'shape=box, style=filled, color=red, fillcolor="#ffd8b0"',
    VertexLabel.COMPONENT: 'shape=box, style=filled, color=cyan, fillcolor="#c0f0f0"',
    VertexLabel.VULNERABILITY: 'shape=box, style=filled, color=violet, fillcolor="#e8c8f0"',
}
_DOT_EDGE_LABEL = {EdgeLabel.DEPN: "depn.", EdgeLabel.HAS_V: "has_v"}


def dot_quote(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n") + '"'


def export_dot(graph: VDGraph) -> str:
    lines = ["digraph vdgraph {", "  rankdir=TB;"]
    for vid in sorted(graph.vertices):
        label, payload = graph.vertices[vid]
        lines.append(
            f"  {dot_quote(vid)} [label={dot_quote(payload.name)}, class={dot_quote(label.value)}, "
            f"{_DOT_STYLE[label]}];"
        )
    for edge in sorted(graph.edges):
        lines.append(
            f"  {dot_quote(edge.source)} -> {dot_quote(edge.target)} "
            f"[label={dot_quote(_DOT_EDGE_LABEL[edge.label])}];"
        )
    lines.append("}")
    return "\n".join(lines) + "\n"
