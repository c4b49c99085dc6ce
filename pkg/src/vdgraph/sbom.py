"""CycloneDX JSON ingestion: document -> SbomDoc -> dependency graph."""

from __future__ import annotations

import ast
import json
import logging
from dataclasses import dataclass, field
from typing import Any, Optional, Union

from packageurl import PackageURL

from .errors import MalformedDocument, MissingBomRef, MissingRoot
from .model import Component, EdgeLabel, Source, VDGraph, VertexLabel, unreachable_from_root

logger = logging.getLogger(__name__)

SUPPORTED_SPEC_VERSIONS = ("1.4", "1.5", "1.6")


@dataclass
class SbomDoc:
    root_component: dict[str, Any]
    components: list[dict[str, Any]] = field(default_factory=list)
    dependency_pairs: list[tuple[str, str]] = field(default_factory=list)
    spec_version: Optional[str] = None
    warnings: list[str] = field(default_factory=list)

    @property
    def root_ref(self) -> str:
        return self.root_component["bom-ref"]


def _load_json(document: Union[bytes, str]) -> Any:
    if isinstance(document, bytes):
        try:
            document = document.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise MalformedDocument(f"document is not UTF-8: {exc}") from exc
    try:
        return json.loads(document)
    except json.JSONDecodeError as exc:
        raise MalformedDocument(f"document is not JSON: {exc}") from exc


def _walk_components(records, warnings, strict, out):
    for record in records or []:
        if not isinstance(record, dict):
            raise MalformedDocument(f"component entry is not an object: {record!r}")
        if not record.get("bom-ref"):
            msg = f"component {record.get('name', '?')!r} has no bom-ref"
            if strict:
                raise MissingBomRef(msg)
            warnings.append(msg + "; skipped")
        else:
            out.append(record)
        # nested assemblies are flattened into the same list
        _walk_components(record.get("components"), warnings, strict, out)


def parse_sbom(document: Union[bytes, str], strict: bool = False) -> SbomDoc:
    """Parse a CycloneDX JSON SBOM.

    Only the metadata root, the component list, and the dependency list are
    read. With ``strict`` a component lacking a ``bom-ref`` raises instead of
    being skipped.
    """
    data = _load_json(document)
    if not isinstance(data, dict) or data.get("bomFormat") != "CycloneDX":
        raise MalformedDocument('missing "bomFormat": "CycloneDX"')

    warnings: list[str] = []
    spec_version = data.get("specVersion")
    if spec_version not in SUPPORTED_SPEC_VERSIONS:
        warnings.append(f"specVersion {spec_version!r} outside tested range {SUPPORTED_SPEC_VERSIONS}")

    metadata = data.get("metadata") or {}
    root = metadata.get("component") if isinstance(metadata, dict) else None
    if not isinstance(root, dict):
        raise MissingRoot("SBOM has no metadata.component")
    if not root.get("bom-ref"):
        raise MissingRoot("metadata.component has no bom-ref")

    components: list[dict[str, Any]] = []
    _walk_components(data.get("components"), warnings, strict, components)

    pairs: list[tuple[str, str]] = []
    for entry in data.get("dependencies") or []:
        if not isinstance(entry, dict) or not entry.get("ref"):
            raise MalformedDocument(f"dependency entry without ref: {entry!r}")
        for target in entry.get("dependsOn") or []:
            pairs.append((entry["ref"], target))

    for msg in warnings:
        logger.warning(msg)
    return SbomDoc(
        root_component=root,
        components=components,
        dependency_pairs=pairs,
        spec_version=spec_version,
        warnings=warnings,
    )


def normalize_name(raw_name: str) -> tuple[str, str]:
    """Split ``group:name`` on the first colon -> (group, general_name)."""
    group, sep, rest = raw_name.partition(":")
    if not sep:
        return "", raw_name
    return group, rest


def _license_label(entry: Any) -> Optional[str]:
    if not isinstance(entry, dict):
        return None
    if entry.get("expression"):
        return str(entry["expression"])
    lic = entry.get("license")
    if isinstance(lic, dict):
        value = lic.get("id") or lic.get("name")
        return str(value) if value else None
    return None


def extract_most_recent_license(licenses_raw: Any) -> Optional[str]:
    """License id/name of the last entry of a CycloneDX ``licenses`` list.

    Accepts the list itself or its serialized text, either JSON or the
    Python-literal form (single quotes).
    """
    entries = licenses_raw
    if isinstance(licenses_raw, str):
        text = licenses_raw.strip()
        if not text:
            return None
        try:
            entries = json.loads(text)
        except json.JSONDecodeError:
            try:
                entries = ast.literal_eval(text)
            except (ValueError, SyntaxError):
                logger.warning("unparseable license list: %.80s", text)
                return None
    if not isinstance(entries, list):
        if entries is not None:
            logger.warning("license field is not a list: %.80r", entries)
        return None
    if not entries:
        return None
    return _license_label(entries[-1])


def component_from_record(record: dict[str, Any], source: Source = Source.SBOM) -> Component:
    group, general_name = normalize_name(str(record.get("name") or ""))
    group = record.get("group") or group
    licenses = record.get("licenses")
    licenses_raw = json.dumps(licenses, separators=(",", ":"), sort_keys=True) if licenses else None
    return Component(
        id=record["bom-ref"],
        general_name=general_name,
        version=str(record.get("version") or ""),
        group=group,
        source=source,
        publisher=record.get("publisher") or None,
        component_type=record.get("type") or None,
        licenses_raw=licenses_raw,
        most_recent_license=extract_most_recent_license(licenses) if licenses else None,
    )


def stub_component(ref: str) -> Component:
    """Placeholder for a dependency reference with no component record."""
    try:
        purl = PackageURL.from_string(ref)
    except ValueError:
        return Component(id=ref, general_name=ref, source=Source.STUB)
    return Component(
        id=ref,
        general_name=purl.name,
        version=purl.version or "",
        group=purl.namespace or "",
        source=Source.STUB,
    )


def build_sbom_graph(doc: SbomDoc) -> VDGraph:
    """Root + one vertex per component + one ``depn`` edge per distinct pair."""
    graph = VDGraph(component_from_record(doc.root_component, Source.SBOM))
    graph.warnings.extend(doc.warnings)
    root_id = graph.root_id

    for record in doc.components:
        if record["bom-ref"] == root_id:
            graph.warn(f"component {root_id!r} duplicates the root; skipped")
            continue
        graph.add_vertex(VertexLabel.COMPONENT, component_from_record(record))

    for source, target in dict.fromkeys(doc.dependency_pairs):
        if source == target:
            graph.warn(f"self-dependency on {source!r} dropped")
            continue
        if target == root_id:
            graph.warn(f"dependency {source!r} -> root dropped")
            continue
        for ref in (source, target):
            if ref not in graph:
                graph.warn(f"dependency references unlisted bom-ref {ref!r}; stub vertex created")
                graph.add_vertex(VertexLabel.COMPONENT, stub_component(ref))
        graph.add_edge(source, target, EdgeLabel.DEPN)
    isolated = unreachable_from_root(graph)
    if isolated:
        graph.warn(f"{len(isolated)} components unreachable from the root: {isolated[:5]}")
    return graph


def load_sbom_graph(document: Union[bytes, str], strict: bool = False) -> VDGraph:
    return build_sbom_graph(parse_sbom(document, strict=strict))
