"""End-to-end build: SBOM + OSV report files -> merged graph."""

from __future__ import annotations

import time
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence, Union

from .merge import MergeReport, merge_graphs
from .model import VDGraph
from .sbom import build_sbom_graph, parse_sbom
from .sca import DEFAULT_SEVERITY_LADDER, build_sca_forest, parse_osv_report


@dataclass(frozen=True)
class ProjectSpec:
    name: str
    sbom_path: Path
    sca_path: Path


def build_project(
    sbom: Union[bytes, str],
    sca: Union[bytes, str],
    strict: bool = False,
    ladder: Sequence[str] = DEFAULT_SEVERITY_LADDER,
) -> tuple[VDGraph, MergeReport]:
    g_sbom = build_sbom_graph(parse_sbom(sbom, strict=strict))
    g_sca = build_sca_forest(parse_osv_report(sca), ladder)
    return merge_graphs(g_sbom, g_sca)


def build_project_files(
    spec: ProjectSpec,
    strict: bool = False,
    ladder: Sequence[str] = DEFAULT_SEVERITY_LADDER,
) -> tuple[VDGraph, MergeReport, float]:
    """Read both inputs and build; returns the wall-clock seconds spent."""
    start = time.perf_counter()
    sbom = Path(spec.sbom_path).read_bytes()
    sca = Path(spec.sca_path).read_bytes()
    graph, report = build_project(sbom, sca, strict=strict, ladder=ladder)
    return graph, report, time.perf_counter() - start
