"""Reachability, path-count and depth queries over a merged graph."""

from __future__ import annotations

import heapq
from collections import deque
from dataclasses import dataclass
from typing import Iterable, Optional, Union

from .errors import CyclicDependencies, NoRoot, UnknownComponent, UnknownVulnerability, UnreachableVulnerability
from .model import EdgeLabel, Severity, VDGraph, VertexLabel


@dataclass(frozen=True)
class PathCountRecord:
    component_id: str
    component_name: str
    path_count: int


@dataclass(frozen=True)
class DepthRecord:
    vulnerability_id: str
    severity: Severity
    depth: int


def _require_root(graph: VDGraph) -> str:
    if graph.root_id is None:
        raise NoRoot("graph has no root vertex")
    return graph.root_id


def _dependency_nodes(graph: VDGraph) -> list[str]:
    return sorted(vid for vid, v in graph.vertices.items() if v.label is not VertexLabel.VULNERABILITY)


def _find_cycle(graph: VDGraph, candidates: set[str]) -> list[str]:
    # every vertex left over by Kahn's algorithm has an in-edge from another leftover
    start = min(candidates)
    seen_at: dict[str, int] = {}
    walk: list[str] = []
    node = start
    while node not in seen_at:
        seen_at[node] = len(walk)
        walk.append(node)
        node = min(p for p in graph.predecessors(node, EdgeLabel.DEPN) if p in candidates)
    cycle = walk[seen_at[node]:]
    cycle.reverse()
    pivot = cycle.index(min(cycle))
    return cycle[pivot:] + cycle[:pivot]


def assert_dag(graph: VDGraph) -> list[str]:
    """Topological order of root and components over ``depn`` edges.

    Ties are broken lexicographically with the root placed first, so the
    order is deterministic.  Raises CyclicDependencies with one concrete
    cycle when the dependency edges are not acyclic.
    """
    nodes = _dependency_nodes(graph)
    indegree = {n: len(graph.predecessors(n, EdgeLabel.DEPN)) for n in nodes}
    root = graph.root_id
    heap = [(n != root, n) for n, d in indegree.items() if d == 0]
    heapq.heapify(heap)
    order: list[str] = []
    while heap:
        _, node = heapq.heappop(heap)
        order.append(node)
        for succ in graph.successors(node, EdgeLabel.DEPN):
            indegree[succ] -= 1
            if indegree[succ] == 0:
                heapq.heappush(heap, (succ != root, succ))
    if len(order) < len(nodes):
        raise CyclicDependencies(_find_cycle(graph, set(nodes) - set(order)))
    return order


def all_path_counts(graph: VDGraph, order: Optional[list[str]] = None) -> dict[str, int]:
    """Number of distinct root->v ``depn`` paths for every root/component v."""
    root = _require_root(graph)
    if order is None:
        order = assert_dag(graph)
    counts = dict.fromkeys(order, 0)
    counts[root] = 1
    for node in order:
        here = counts[node]
        if here:
            for succ in graph.successors(node, EdgeLabel.DEPN):
                counts[succ] += here
    return counts


def count_paths(graph: VDGraph, target: str) -> int:
    if target not in graph or graph.label_of(target) is VertexLabel.VULNERABILITY:
        raise UnknownComponent(f"no component {target!r}")
    return all_path_counts(graph)[target]


def severity_buckets(severity: Severity = Severity.HIGH, include_higher: bool = False) -> frozenset[Severity]:
    """Buckets a severity filter selects; ``unknown`` is never widened into."""
    severity = Severity(severity)
    if not include_higher or severity is Severity.UNKNOWN:
        return frozenset({severity})
    return frozenset(s for s in Severity if s.at_least(severity))


def vulnerable_components(graph: VDGraph, buckets: Iterable[Severity]) -> set[str]:
    wanted = set(buckets)
    found = set()
    for edge in graph.edges:
        if edge.label is EdgeLabel.HAS_V and graph.payload(edge.target).severity in wanted:
            found.add(edge.source)
    return found


def path_counts_by_severity(
    graph: VDGraph,
    severity: Union[Severity, str] = Severity.HIGH,
    include_higher: bool = False,
) -> list[PathCountRecord]:
    """Path counts for components carrying an advisory in the chosen bucket(s).

    Default is the exact ``high`` bucket; ``include_higher`` widens to every
    ranked bucket at or above ``severity``.  Sorted by count desc, then id.
    """
    buckets = severity_buckets(Severity(severity), include_higher)
    counts = all_path_counts(graph)
    records = [
        PathCountRecord(cid, graph.payload(cid).name, counts.get(cid, 0))
        for cid in vulnerable_components(graph, buckets)
    ]
    records.sort(key=lambda r: (-r.path_count, r.component_id))
    return records


def _bfs(graph: VDGraph, label: Optional[EdgeLabel] = None) -> dict[str, int]:
    root = _require_root(graph)
    dist = {root: 0}
    queue = deque([root])
    while queue:
        node = queue.popleft()
        for succ in graph.successors(node, label):
            if succ not in dist:
                dist[succ] = dist[node] + 1
                queue.append(succ)
    return dist


def vulnerability_depths(graph: VDGraph, skip_unreachable: bool = False) -> list[DepthRecord]:
    """Shortest root->vulnerability edge count for every advisory, by BFS.

    Only component vertices have outgoing ``has_v`` edges and vulnerabilities
    have none, so an unrestricted BFS yields paths of ``depn`` hops followed
    by exactly one ``has_v`` hop.  An advisory whose only carriers are
    isolated components raises, or is left out with ``skip_unreachable``.
    """
    dist = _bfs(graph)
    records = []
    for vuln in graph.vulnerabilities():
        if vuln.id not in dist:
            if skip_unreachable:
                continue
            raise UnreachableVulnerability(f"{vuln.id!r} is not reachable from the root")
        records.append(DepthRecord(vuln.id, vuln.severity, dist[vuln.id]))
    return records


def component_depths(graph: VDGraph) -> list[tuple[str, Optional[int]]]:
    """BFS depth over ``depn`` edges for each component; None when unreachable."""
    dist = _bfs(graph, EdgeLabel.DEPN)
    return [(cid, dist.get(cid)) for cid in graph.ids_with_label(VertexLabel.COMPONENT)]


def resolve_vulnerability(graph: VDGraph, ident: str) -> str:
    """Map an advisory id or one of its aliases to the vertex id."""
    vertex = graph.vertices.get(ident)
    if vertex is not None and vertex.label is VertexLabel.VULNERABILITY:
        return ident
    hits = sorted(v.id for v in graph.vulnerabilities() if ident in v.aliases)
    if not hits:
        raise UnknownVulnerability(f"no vulnerability {ident!r}")
    return hits[0]


def enumerate_paths(graph: VDGraph, vulnerability_id: str, limit: int = 10) -> list[list[str]]:
    """Up to ``limit`` root->vulnerability paths, depth-first in lexicographic order."""
    if limit < 1:
        raise ValueError("limit must be positive")
    vuln = resolve_vulnerability(graph, vulnerability_id)
    root = _require_root(graph)
    assert_dag(graph)

    carriers = set(graph.predecessors(vuln, EdgeLabel.HAS_V))
    # prune to vertices that can still reach a carrier
    useful = set(carriers)
    frontier = list(carriers)
    while frontier:
        node = frontier.pop()
        for pred in graph.predecessors(node, EdgeLabel.DEPN):
            if pred not in useful:
                useful.add(pred)
                frontier.append(pred)

    paths: list[list[str]] = []
    if root not in useful:
        return paths
    stack: list[tuple[str, list[str]]] = [(root, [root])]
    while stack and len(paths) < limit:
        node, path = stack.pop()
        if node == vuln:
            paths.append(path)
            continue
        # a carrier ends a path via has_v; sorted(...) puts the vulnerability
        # hop in lexicographic position among the dependency hops
        steps = sorted(
            ([vuln] if node in carriers else [])
            + [s for s in graph.successors(node, EdgeLabel.DEPN) if s in useful]
        )
        for step in reversed(steps):
            stack.append((step, path + [step]))
    return paths
