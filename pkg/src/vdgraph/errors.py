"""Exception hierarchy shared across the package."""

from __future__ import annotations


class VDGraphError(Exception):
    """Base class for every error raised by vdgraph."""


class GraphError(VDGraphError):
    pass


class DuplicateIdConflict(GraphError):
    def __init__(self, vertex_id: str, existing: str, attempted: str):
        super().__init__(
            f"vertex {vertex_id!r} already exists with label {existing!r}, "
            f"cannot re-add it as {attempted!r}"
        )
        self.vertex_id = vertex_id


class UnknownEndpoint(GraphError):
    pass


class IllegalEdgeShape(GraphError):
    pass


class SelfLoop(GraphError):
    pass


class InvalidGraph(GraphError):
    def __init__(self, violations):
        self.violations = list(violations)
        preview = "; ".join(str(v) for v in self.violations[:5])
        super().__init__(f"graph failed validation ({len(self.violations)} violations): {preview}")


class ParseError(VDGraphError):
    pass


class MalformedDocument(ParseError):
    pass


class MissingRoot(ParseError):
    pass


class MissingBomRef(ParseError):
    pass


class NoRoot(VDGraphError):
    pass


class QueryError(VDGraphError):
    pass


class CyclicDependencies(QueryError):
    def __init__(self, cycle):
        self.cycle = list(cycle)
        super().__init__("dependency cycle: " + " -> ".join(self.cycle + self.cycle[:1]))


class UnknownComponent(QueryError):
    pass


class UnknownVulnerability(QueryError):
    pass


class UnreachableVulnerability(QueryError):
    pass
