"""Canonical JSON snapshot of a merged graph, written by ``build`` and read by the other commands."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Optional, Union

from . import __version__
from .errors import GraphError, MalformedDocument
from .merge import MergeReport
from .model import Component, EdgeLabel, Severity, Source, VDGraph, VertexLabel, Vulnerability

SNAPSHOT_FORMAT = "vdgraph-snapshot"
SNAPSHOT_VERSION = 1


def _payload_dict(payload) -> dict[str, Any]:
    if isinstance(payload, Component):
        return {
            "id": payload.id,
            "general_name": payload.general_name,
            "version": payload.version,
            "group": payload.group,
            "source": payload.source.value,
            "publisher": payload.publisher,
            "component_type": payload.component_type,
            "licenses_raw": payload.licenses_raw,
            "most_recent_license": payload.most_recent_license,
        }
    return {
        "id": payload.id,
        "severity": payload.severity.value,
        "aliases": list(payload.aliases),
        "summary": payload.summary,
        "published": payload.published,
        "modified": payload.modified,
        "details_raw": payload.details_raw,
    }


def snapshot_dict(graph: VDGraph, report: Optional[MergeReport] = None, project: str = "") -> dict[str, Any]:
    vertices = []
    for vid in sorted(graph.vertices):
        label, payload = graph.vertices[vid]
        vertices.append({"label": label.value, **_payload_dict(payload)})
    return {
        "format": SNAPSHOT_FORMAT,
        "format_version": SNAPSHOT_VERSION,
        "tool": {"name": "vdgraph", "version": __version__},
        "project": project,
        "root": graph.root_id,
        "vertices": vertices,
        "edges": [[e.source, e.target, e.label.value] for e in sorted(graph.edges)],
        "merge_report": report.to_dict() if report is not None else None,
        "warnings": list(graph.warnings),
    }


def dumps_snapshot(graph: VDGraph, report: Optional[MergeReport] = None, project: str = "") -> str:
    return json.dumps(snapshot_dict(graph, report, project), indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def write_snapshot(path: Union[str, Path], graph: VDGraph, report: Optional[MergeReport] = None, project: str = "") -> Path:
    path = Path(path)
    path.write_text(dumps_snapshot(graph, report, project), encoding="utf-8")
    return path


def _vertex_from_dict(entry: dict[str, Any]):
    label = VertexLabel(entry["label"])
    if label is VertexLabel.VULNERABILITY:
        return label, Vulnerability(
            id=entry["id"],
            severity=Severity(entry.get("severity", "unknown")),
            aliases=tuple(entry.get("aliases") or ()),
            summary=entry.get("summary"),
            published=entry.get("published"),
            modified=entry.get("modified"),
            details_raw=entry.get("details_raw"),
        )
    return label, Component(
        id=entry["id"],
        general_name=entry["general_name"],
        version=entry.get("version", ""),
        group=entry.get("group", ""),
        source=Source(entry.get("source", "sbom")),
        publisher=entry.get("publisher"),
        component_type=entry.get("component_type"),
        licenses_raw=entry.get("licenses_raw"),
        most_recent_license=entry.get("most_recent_license"),
    )


def loads_snapshot(text: str) -> tuple[VDGraph, Optional[MergeReport], str]:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MalformedDocument(f"snapshot is not JSON: {exc}") from exc
    if not isinstance(data, dict) or data.get("format") != SNAPSHOT_FORMAT:
        raise MalformedDocument("not a vdgraph snapshot")
    if data.get("format_version") != SNAPSHOT_VERSION:
        raise MalformedDocument(f"unsupported snapshot version {data.get('format_version')!r}")
    try:
        graph = VDGraph()
        entries = sorted(data["vertices"], key=lambda e: e["label"] != "root")
        for entry in entries:
            graph.add_vertex(*_vertex_from_dict(entry))
        for source, target, label in data["edges"]:
            graph.add_edge(source, target, EdgeLabel(label))
    except (KeyError, TypeError, ValueError, GraphError) as exc:
        raise MalformedDocument(f"corrupt snapshot: {exc}") from exc
    graph.warnings = list(data.get("warnings") or [])
    report = MergeReport.from_dict(data["merge_report"]) if data.get("merge_report") else None
    return graph, report, data.get("project", "")


def read_snapshot(path: Union[str, Path]) -> tuple[VDGraph, Optional[MergeReport], str]:
    return loads_snapshot(Path(path).read_text(encoding="utf-8"))
