"""Fuse a CycloneDX SBOM and an OSV-Scanner report into one queryable graph."""

__version__ = "0.1.0"

from .errors import VDGraphError
from .merge import MatchKey, MergeReport, find_matches, merge_graphs
from .model import (
    Component,
    EdgeLabel,
    Severity,
    Source,
    VDGraph,
    VertexLabel,
    Vulnerability,
    diagnostics,
    validate,
)
from .pipeline import build_project
from .query import (
    assert_dag,
    component_depths,
    count_paths,
    enumerate_paths,
    path_counts_by_severity,
    vulnerability_depths,
)
from .sbom import build_sbom_graph, parse_sbom
from .sca import build_sca_forest, classify_severity, parse_osv_report

__all__ = [
    "Component", "EdgeLabel", "MatchKey", "MergeReport", "Severity", "Source",
    "VDGraph", "VDGraphError", "VertexLabel", "Vulnerability", "assert_dag",
    "build_project", "build_sbom_graph", "build_sca_forest", "classify_severity",
    "component_depths", "count_paths", "diagnostics", "enumerate_paths", "find_matches",
    "merge_graphs", "parse_osv_report", "parse_sbom", "path_counts_by_severity",
    "validate", "vulnerability_depths",
]
