"""OSV-Scanner JSON report ingestion: document -> ScaDoc -> has_v forest."""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Optional, Sequence, Union

from cvss import CVSS3
from cvss.exceptions import CVSSError

from .errors import MalformedDocument
from .model import Component, EdgeLabel, Severity, Source, VDGraph, VertexLabel, Vulnerability, display_name
from .sbom import _load_json, normalize_name

logger = logging.getLogger(__name__)

_LABEL_TO_SEVERITY = {
    "low": Severity.LOW,
    "moderate": Severity.MODERATE,
    "medium": Severity.MODERATE,
    "high": Severity.HIGH,
    "critical": Severity.CRITICAL,
}


@dataclass(frozen=True)
class PackageRef:
    name: str
    version: str = ""
    ecosystem: str = ""


@dataclass
class ScaEntry:
    package: PackageRef
    vulnerabilities: list[dict[str, Any]] = field(default_factory=list)
    source_path: str = ""


@dataclass
class ScaDoc:
    entries: list[ScaEntry] = field(default_factory=list)
    source_path: str = ""

    def advisory_ids(self) -> set[str]:
        return {rec["id"] for entry in self.entries for rec in entry.vulnerabilities}


def parse_osv_report(document: Union[bytes, str]) -> ScaDoc:
    """Flatten ``results[*].packages[*]`` of an OSV-Scanner report."""
    data = _load_json(document)
    if not isinstance(data, dict) or not isinstance(data.get("results"), list):
        raise MalformedDocument('OSV report needs a top-level "results" list')

    entries: list[ScaEntry] = []
    first_path = ""
    for result in data["results"]:
        if not isinstance(result, dict):
            raise MalformedDocument(f"result entry is not an object: {result!r}")
        path = str((result.get("source") or {}).get("path") or "")
        first_path = first_path or path
        for pkg in result.get("packages") or []:
            info = pkg.get("package") if isinstance(pkg, dict) else None
            if not isinstance(info, dict) or not info.get("name"):
                raise MalformedDocument(f"package entry without name: {pkg!r}")
            vulns = pkg.get("vulnerabilities") or []
            for record in vulns:
                if not isinstance(record, dict) or not record.get("id"):
                    raise MalformedDocument(f"advisory without id under {info['name']!r}")
            entries.append(
                ScaEntry(
                    package=PackageRef(
                        name=str(info["name"]),
                        version=str(info.get("version") or ""),
                        ecosystem=str(info.get("ecosystem") or ""),
                    ),
                    vulnerabilities=list(vulns),
                    source_path=path,
                )
            )
    return ScaDoc(entries=entries, source_path=first_path)


# -- severity ----------------------------------------------------------------


def _severity_labels(advisory: dict[str, Any]) -> Iterable[Any]:
    yield (advisory.get("database_specific") or {}).get("severity")
    for affected in advisory.get("affected") or []:
        if isinstance(affected, dict):
            yield (affected.get("ecosystem_specific") or {}).get("severity")
            yield (affected.get("database_specific") or {}).get("severity")


def severity_from_label(advisory: dict[str, Any]) -> Optional[Severity]:
    for value in _severity_labels(advisory):
        if isinstance(value, str) and value.strip().lower() in _LABEL_TO_SEVERITY:
            return _LABEL_TO_SEVERITY[value.strip().lower()]
    return None


def bucket_cvss_score(score: float) -> Optional[Severity]:
    if score < 0.1 or score > 10.0:
        return None
    if score < 4.0:
        return Severity.LOW
    if score < 7.0:
        return Severity.MODERATE
    if score < 9.0:
        return Severity.HIGH
    return Severity.CRITICAL


def _cvss3_score(value: Any) -> Optional[float]:
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return float(value)
    if not isinstance(value, str):
        return None
    text = value.strip()
    if text.startswith("CVSS:3"):
        try:
            return float(CVSS3(text).base_score)
        except CVSSError:
            logger.warning("bad CVSS v3 vector %r", text)
            return None
    try:
        return float(text)
    except ValueError:
        return None


def severity_from_cvss(advisory: dict[str, Any]) -> Optional[Severity]:
    for entry in advisory.get("severity") or []:
        if not isinstance(entry, dict):
            continue
        kind = str(entry.get("type") or "")
        score_field = entry.get("score")
        if kind and kind != "CVSS_V3" and not str(score_field).startswith("CVSS:3"):
            continue
        score = _cvss3_score(score_field)
        if score is not None:
            bucket = bucket_cvss_score(score)
            if bucket is not None:
                return bucket
    cvss = (advisory.get("database_specific") or {}).get("cvss")
    if isinstance(cvss, dict):
        score = _cvss3_score(cvss.get("score"))
        if score is not None:
            return bucket_cvss_score(score)
    return None


SEVERITY_RULES: dict[str, Callable[[dict[str, Any]], Optional[Severity]]] = {
    "label": severity_from_label,
    "cvss": severity_from_cvss,
}
DEFAULT_SEVERITY_LADDER: tuple[str, ...] = ("label", "cvss")


def classify_severity(advisory: dict[str, Any], ladder: Sequence[str] = DEFAULT_SEVERITY_LADDER) -> Severity:
    """Bucket an OSV advisory; the first rule in ``ladder`` that answers wins."""
    for rule in ladder:
        found = SEVERITY_RULES[rule](advisory)
        if found is not None:
            return found
    return Severity.UNKNOWN


def vulnerability_from_record(record: dict[str, Any], ladder: Sequence[str] = DEFAULT_SEVERITY_LADDER) -> Vulnerability:
    summary = record.get("summary") or record.get("details")
    return Vulnerability(
        id=str(record["id"]),
        severity=classify_severity(record, ladder),
        aliases=tuple(str(a) for a in record.get("aliases") or ()),
        summary=str(summary) if summary else None,
        published=record.get("published"),
        modified=record.get("modified"),
        details_raw=json.dumps(record, sort_keys=True, separators=(",", ":")),
    )


def sca_component(package: PackageRef) -> Component:
    group, general_name = normalize_name(package.name)
    return Component(
        id=display_name(general_name, package.version),
        general_name=general_name,
        version=package.version,
        group=group,
        source=Source.SCA,
    )


def build_sca_forest(doc: ScaDoc, ladder: Sequence[str] = DEFAULT_SEVERITY_LADDER) -> VDGraph:
    """Rootless graph of SCA components joined to advisories by ``has_v``."""
    forest = VDGraph()
    for entry in doc.entries:
        comp = sca_component(entry.package)
        existing = forest.vertices.get(comp.id)
        if existing is None:
            forest.add_vertex(VertexLabel.COMPONENT, comp)
        elif existing.payload != comp:
            forest.warn(f"SCA packages {comp.id!r} disagree on group; first kept")

        for record in entry.vulnerabilities:
            vuln = vulnerability_from_record(record, ladder)
            seen = forest.vertices.get(vuln.id)
            if seen is None:
                forest.add_vertex(VertexLabel.VULNERABILITY, vuln)
            elif seen.payload != vuln:
                forest.warn(f"advisory {vuln.id!r} listed with differing properties; first record kept")
            forest.add_edge(comp.id, vuln.id, EdgeLabel.HAS_V)
    return forest


def load_sca_forest(document: Union[bytes, str], ladder: Sequence[str] = DEFAULT_SEVERITY_LADDER) -> VDGraph:
    return build_sca_forest(parse_osv_report(document), ladder)
