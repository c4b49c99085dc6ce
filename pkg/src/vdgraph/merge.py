"""Fold an SCA forest into an SBOM dependency graph.

Each SCA component is matched against SBOM components on
``(general_name, version)``.  Matches absorb the SCA component (the SBOM
payload survives) and inherit its ``has_v`` edges; a component without any
match is inserted as-is and hung directly off the root so every advisory
stays reachable.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

from .errors import InvalidGraph, NoRoot
from .model import Component, EdgeLabel, Source, VDGraph, VertexLabel
from .sbom import normalize_name


class MatchKey(NamedTuple):
    general_name: str
    version: str

    @classmethod
    def of(cls, component: Component) -> "MatchKey":
        # both sides pass through the same split so "group:name" never leaks into the key
        _, general_name = normalize_name(component.general_name)
        return cls(general_name, component.version)


@dataclass
class MergeReport:
    matched: int = 0
    multi_matched: int = 0
    unmatched: int = 0
    vulnerabilities_added: int = 0
    ambiguous_links: list[tuple[str, list[str]]] = field(default_factory=list)
    # SCA component id -> ids it ended up as in the merged graph
    resolution: dict[str, list[str]] = field(default_factory=dict)

    @property
    def sca_components(self) -> int:
        return self.matched + self.multi_matched + self.unmatched

    def summary(self) -> str:
        return (
            f"matched={self.matched} multi_matched={self.multi_matched} "
            f"unmatched={self.unmatched} vulnerabilities_added={self.vulnerabilities_added} "
            f"ambiguous_links={len(self.ambiguous_links)}"
        )

    def to_dict(self) -> dict:
        return {
            "matched": self.matched,
            "multi_matched": self.multi_matched,
            "unmatched": self.unmatched,
            "vulnerabilities_added": self.vulnerabilities_added,
            "ambiguous_links": [[vid, list(ids)] for vid, ids in self.ambiguous_links],
            "resolution": {k: list(v) for k, v in sorted(self.resolution.items())},
        }

    @classmethod
    def from_dict(cls, data: dict) -> "MergeReport":
        return cls(
            matched=data.get("matched", 0),
            multi_matched=data.get("multi_matched", 0),
            unmatched=data.get("unmatched", 0),
            vulnerabilities_added=data.get("vulnerabilities_added", 0),
            ambiguous_links=[(vid, list(ids)) for vid, ids in data.get("ambiguous_links", [])],
            resolution={k: list(v) for k, v in data.get("resolution", {}).items()},
        )


class MatchIndex:
    """MatchKey -> component ids, kept current as vertices are added."""

    def __init__(self, graph: VDGraph):
        self._index: dict[MatchKey, set[str]] = defaultdict(set)
        for comp in graph.components():
            self.add(comp)

    def add(self, component: Component) -> None:
        self._index[MatchKey.of(component)].add(component.id)

    def lookup(self, key: MatchKey) -> list[str]:
        return sorted(self._index.get(key, ()))


def find_matches(graph: VDGraph, key: MatchKey, index: Optional[MatchIndex] = None) -> list[str]:
    """Component ids (any source) whose match key equals ``key``, sorted."""
    if index is not None:
        return index.lookup(key)
    return sorted(c.id for c in graph.components() if MatchKey.of(c) == key)


def merge_graphs(g_sbom: VDGraph, g_sca: VDGraph) -> tuple[VDGraph, MergeReport]:
    if g_sbom.root_id is None:
        raise NoRoot("SBOM graph has no root vertex")
    merged = g_sbom.copy()
    report = MergeReport()
    index = MatchIndex(merged)
    root_id = merged.root_id

    # SCA ids are name_version keys, so sorted order is a stable, input-order-free walk
    for sca_id in g_sca.ids_with_label(VertexLabel.COMPONENT):
        sca_comp = g_sca.payload(sca_id)
        matches = find_matches(merged, MatchKey.of(sca_comp), index)
        if matches:
            if len(matches) == 1:
                report.matched += 1
            else:
                report.multi_matched += 1
            targets = matches
        else:
            report.unmatched += 1
            if sca_comp.source is not Source.SCA:
                sca_comp = Component(**{**sca_comp.__dict__, "source": Source.SCA})
            merged.add_vertex(VertexLabel.COMPONENT, sca_comp)
            merged.add_edge(root_id, sca_comp.id, EdgeLabel.DEPN)
            index.add(sca_comp)
            targets = [sca_comp.id]
        report.resolution[sca_id] = list(targets)

        for vuln_id in g_sca.successors(sca_id, EdgeLabel.HAS_V):
            if vuln_id not in merged:
                merged.add_vertex(VertexLabel.VULNERABILITY, g_sca.payload(vuln_id))
                report.vulnerabilities_added += 1
            for target in targets:
                merged.add_edge(target, vuln_id, EdgeLabel.HAS_V)
            if len(targets) > 1:
                report.ambiguous_links.append((vuln_id, list(targets)))

    # advisories with no component in the forest (hand-built inputs) have nowhere to attach
    orphans = [v for v in g_sca.ids_with_label(VertexLabel.VULNERABILITY) if v not in merged]
    if orphans:
        merged.warn(f"{len(orphans)} advisories without an SCA component were not merged: {orphans[:5]}")

    report.ambiguous_links.sort()
    merged.warnings.extend(g_sca.warnings)
    problems = merged.validate()
    if problems:
        raise InvalidGraph(problems)
    return merged, report
