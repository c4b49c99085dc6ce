"""Labeled property graph joining an SBOM dependency tree with SCA findings.

Vertices carry one of three labels (root, component, vulnerability) and
edges one of two (depn, has_v).  The container enforces the shape rules on
every insertion, so a graph assembled only through :meth:`VDGraph.add_vertex`
and :meth:`VDGraph.add_edge` always validates clean.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Iterator, NamedTuple, Optional, Union

from .errors import (
    DuplicateIdConflict,
    GraphError,
    IllegalEdgeShape,
    SelfLoop,
    UnknownEndpoint,
)

logger = logging.getLogger(__name__)


class VertexLabel(str, Enum):
    ROOT = "root"
    COMPONENT = "component"
    VULNERABILITY = "vulnerability"


class EdgeLabel(str, Enum):
    DEPN = "depn"
    HAS_V = "has_v"


class Severity(str, Enum):
    LOW = "low"
    MODERATE = "moderate"
    HIGH = "high"
    CRITICAL = "critical"
    UNKNOWN = "unknown"

    @property
    def rank(self) -> Optional[int]:
        """Position in the low < moderate < high < critical order; None for unknown."""
        return _SEVERITY_RANK.get(self)

    def at_least(self, other: "Severity") -> bool:
        if self.rank is None or other.rank is None:
            return False
        return self.rank >= other.rank

    @classmethod
    def parse(cls, text: str) -> "Severity":
        key = text.strip().lower()
        if key == "medium":
            key = "moderate"
        return cls(key)


_SEVERITY_RANK = {
    Severity.LOW: 0,
    Severity.MODERATE: 1,
    Severity.HIGH: 2,
    Severity.CRITICAL: 3,
}

RANKED_SEVERITIES = (Severity.LOW, Severity.MODERATE, Severity.HIGH, Severity.CRITICAL)


class Source(str, Enum):
    SBOM = "sbom"
    SCA = "sca"
    STUB = "stub"


def display_name(general_name: str, version: str) -> str:
    """``general_name_version`` form used for names and SCA-side ids."""
    return f"{general_name}_{version}" if version else general_name


@dataclass(frozen=True)
class Component:
    id: str
    general_name: str
    version: str = ""
    group: str = ""
    source: Source = Source.SBOM
    publisher: Optional[str] = None
    component_type: Optional[str] = None
    licenses_raw: Optional[str] = None
    most_recent_license: Optional[str] = None

    @property
    def name(self) -> str:
        return display_name(self.general_name, self.version)

    @property
    def match_key(self) -> tuple[str, str]:
        return (self.general_name, self.version)


@dataclass(frozen=True)
class Vulnerability:
    id: str
    severity: Severity = Severity.UNKNOWN
    aliases: tuple[str, ...] = ()
    summary: Optional[str] = None
    published: Optional[str] = None
    modified: Optional[str] = None
    details_raw: Optional[str] = None

    def __post_init__(self):
        # aliases never repeat the primary id
        cleaned = tuple(a for a in dict.fromkeys(self.aliases) if a and a != self.id)
        object.__setattr__(self, "aliases", cleaned)

    @property
    def name(self) -> str:
        return self.id


Payload = Union[Component, Vulnerability]


class Vertex(NamedTuple):
    label: VertexLabel
    payload: Payload


class Edge(NamedTuple):
    source: str
    target: str
    label: EdgeLabel


@dataclass(frozen=True)
class Violation:
    kind: str
    message: str
    ids: tuple[str, ...] = ()

    def __str__(self) -> str:
        return f"{self.kind}: {self.message}"


_EDGE_SHAPES = {
    EdgeLabel.DEPN: ({VertexLabel.ROOT, VertexLabel.COMPONENT}, {VertexLabel.COMPONENT}),
    EdgeLabel.HAS_V: ({VertexLabel.COMPONENT}, {VertexLabel.VULNERABILITY}),
}


class VDGraph:
    """Directed labeled property graph with at most one root vertex.

    A graph built without a root is an SCA forest: components and
    vulnerabilities joined by ``has_v`` edges only.

    Mutate through :meth:`add_vertex` / :meth:`add_edge`; the adjacency
    index is maintained by those calls alone.
    """

    def __init__(self, root: Optional[Component] = None):
        self.vertices: dict[str, Vertex] = {}
        self.edges: set[Edge] = set()
        self.root_id: Optional[str] = None
        self.warnings: list[str] = []
        self._out: dict[str, dict[EdgeLabel, set[str]]] = {}
        self._in: dict[str, dict[EdgeLabel, set[str]]] = {}
        if root is not None:
            self.add_vertex(VertexLabel.ROOT, root)

    def __repr__(self) -> str:
        return (
            f"VDGraph(root={self.root_id!r}, vertices={len(self.vertices)}, "
            f"edges={len(self.edges)})"
        )

    def __contains__(self, vertex_id: str) -> bool:
        return vertex_id in self.vertices

    def warn(self, message: str) -> None:
        self.warnings.append(message)
        logger.warning(message)

    def add_vertex(self, label: VertexLabel, payload: Payload) -> "VDGraph":
        label = VertexLabel(label)
        if not payload.id:
            raise GraphError("vertex id must be non-empty")
        if label is VertexLabel.VULNERABILITY:
            if not isinstance(payload, Vulnerability):
                raise GraphError(f"vulnerability vertex {payload.id!r} needs a Vulnerability payload")
        elif not isinstance(payload, Component):
            raise GraphError(f"{label.value} vertex {payload.id!r} needs a Component payload")

        existing = self.vertices.get(payload.id)
        if existing is not None:
            if existing.label is not label:
                raise DuplicateIdConflict(payload.id, existing.label.value, label.value)
            self.warn(f"duplicate {label.value} id {payload.id!r} ignored (first payload kept)")
            return self

        if label is VertexLabel.ROOT:
            if self.root_id is not None:
                raise GraphError(
                    f"graph already has root {self.root_id!r}; cannot add {payload.id!r}"
                )
            self.root_id = payload.id
        self.vertices[payload.id] = Vertex(label, payload)
        self._out[payload.id] = {}
        self._in[payload.id] = {}
        return self

    def add_edge(self, source: str, target: str, label: EdgeLabel) -> "VDGraph":
        label = EdgeLabel(label)
        for end in (source, target):
            if end not in self.vertices:
                raise UnknownEndpoint(f"edge {source!r} -> {target!r}: no vertex {end!r}")
        if source == target:
            raise SelfLoop(f"self-loop on {source!r}")
        allowed_from, allowed_to = _EDGE_SHAPES[label]
        src_label = self.vertices[source].label
        dst_label = self.vertices[target].label
        if src_label not in allowed_from or dst_label not in allowed_to:
            raise IllegalEdgeShape(
                f"{label.value} edge not allowed from {src_label.value} {source!r} "
                f"to {dst_label.value} {target!r}"
            )
        edge = Edge(source, target, label)
        if edge not in self.edges:
            self.edges.add(edge)
            self._out[source].setdefault(label, set()).add(target)
            self._in[target].setdefault(label, set()).add(source)
        return self

    # -- read access -------------------------------------------------------

    @property
    def root(self) -> Optional[Component]:
        if self.root_id is None:
            return None
        return self.vertices[self.root_id].payload  # type: ignore[return-value]

    def label_of(self, vertex_id: str) -> VertexLabel:
        return self.vertices[vertex_id].label

    def payload(self, vertex_id: str) -> Payload:
        return self.vertices[vertex_id].payload

    def ids_with_label(self, label: VertexLabel) -> list[str]:
        label = VertexLabel(label)
        return sorted(vid for vid, v in self.vertices.items() if v.label is label)

    def components(self) -> Iterator[Component]:
        for vid in self.ids_with_label(VertexLabel.COMPONENT):
            yield self.vertices[vid].payload  # type: ignore[misc]

    def vulnerabilities(self) -> Iterator[Vulnerability]:
        for vid in self.ids_with_label(VertexLabel.VULNERABILITY):
            yield self.vertices[vid].payload  # type: ignore[misc]

    def successors(self, vertex_id: str, label: Optional[EdgeLabel] = None) -> list[str]:
        """Sorted out-neighbours, optionally restricted to one edge label."""
        return _neighbours(self._out[vertex_id], label)

    def predecessors(self, vertex_id: str, label: Optional[EdgeLabel] = None) -> list[str]:
        return _neighbours(self._in[vertex_id], label)

    def edges_with_label(self, label: EdgeLabel) -> list[Edge]:
        return sorted(e for e in self.edges if e.label is label)

    def copy(self) -> "VDGraph":
        clone = VDGraph()
        clone.vertices = dict(self.vertices)
        clone.edges = set(self.edges)
        clone.root_id = self.root_id
        clone.warnings = list(self.warnings)
        clone._out = {k: {lbl: set(s) for lbl, s in v.items()} for k, v in self._out.items()}
        clone._in = {k: {lbl: set(s) for lbl, s in v.items()} for k, v in self._in.items()}
        return clone

    def structure(self) -> tuple[dict[str, VertexLabel], frozenset[Edge]]:
        """Ids with labels plus the edge triples; handy for equality checks."""
        return (
            {vid: v.label for vid, v in self.vertices.items()},
            frozenset(self.edges),
        )

    def validate(self, require_root: bool = True) -> list[Violation]:
        return validate(self, require_root=require_root)


def _neighbours(index: dict[EdgeLabel, set[str]], label: Optional[EdgeLabel]) -> list[str]:
    if label is not None:
        return sorted(index.get(label, ()))
    merged: set[str] = set()
    for ids in index.values():
        merged |= ids
    return sorted(merged)


def validate(graph: VDGraph, require_root: bool = True) -> list[Violation]:
    """Check every structural rule; an empty list means the graph is sound.

    ``require_root=False`` accepts a rootless SCA forest.
    """
    problems: list[Violation] = []
    roots = sorted(vid for vid, v in graph.vertices.items() if v.label is VertexLabel.ROOT)

    if len(roots) > 1:
        problems.append(Violation("multiple-roots", f"{len(roots)} root vertices: {roots}", tuple(roots)))
    if graph.root_id is None:
        if require_root or roots:
            problems.append(Violation("missing-root", "graph has no root id"))
    elif graph.root_id not in graph.vertices:
        problems.append(Violation("missing-root", f"root id {graph.root_id!r} is not a vertex", (graph.root_id,)))
    elif graph.vertices[graph.root_id].label is not VertexLabel.ROOT:
        problems.append(Violation("missing-root", f"root id {graph.root_id!r} is not labeled root", (graph.root_id,)))

    for vid, vertex in graph.vertices.items():
        if not vid or vertex.payload.id != vid:
            problems.append(Violation("bad-id", f"vertex key {vid!r} != payload id {vertex.payload.id!r}", (vid,)))

    for edge in sorted(graph.edges):
        ids = (edge.source, edge.target)
        missing = [end for end in ids if end not in graph.vertices]
        if missing:
            problems.append(Violation("dangling-edge", f"{edge.source!r} -> {edge.target!r} references missing {missing}", ids))
            continue
        if edge.source == edge.target:
            problems.append(Violation("self-loop", f"self-loop on {edge.source!r}", ids))
            continue
        allowed_from, allowed_to = _EDGE_SHAPES[edge.label]
        if graph.vertices[edge.source].label not in allowed_from or graph.vertices[edge.target].label not in allowed_to:
            problems.append(Violation("illegal-edge", f"{edge.label.value} edge {edge.source!r} -> {edge.target!r}", ids))
    return problems


def unreachable_from_root(graph: VDGraph) -> list[str]:
    """Vertices no root path reaches, sorted; empty for a rootless graph."""
    if graph.root_id is None or graph.root_id not in graph.vertices:
        return []
    seen = {graph.root_id}
    stack = [graph.root_id]
    while stack:
        for succ in graph.successors(stack.pop()):
            if succ not in seen:
                seen.add(succ)
                stack.append(succ)
    return sorted(set(graph.vertices) - seen)


def diagnostics(graph: VDGraph) -> list[Violation]:
    """Non-fatal findings.  Components missing from every dependency list stay
    in the graph but sit outside the root's reach, as do their advisories."""
    return [
        Violation("unreachable", f"{graph.vertices[vid].label.value} {vid!r} is not reachable from the root", (vid,))
        for vid in unreachable_from_root(graph)
    ]


def build_graph(
    root: Optional[Component],
    vertices: Iterable[tuple[VertexLabel, Payload]] = (),
    edges: Iterable[tuple[str, str, EdgeLabel]] = (),
) -> VDGraph:
    """Assemble a graph in one call; used by importers and test fixtures."""
    graph = VDGraph(root)
    for label, payload in vertices:
        graph.add_vertex(label, payload)
    for source, target, label in edges:
        graph.add_edge(source, target, label)
    return graph
