"""Per-project statistics, depth histograms and cross-project aggregation."""

from __future__ import annotations

import csv
import io
import json
from collections import Counter
from dataclasses import dataclass, field
from typing import Any, Iterable, Optional, Sequence

from .merge import MergeReport
from .model import Severity, VDGraph, VertexLabel
from .query import (
    DepthRecord,
    PathCountRecord,
    component_depths,
    path_counts_by_severity,
    vulnerability_depths,
)

REPORT_SCHEMA_VERSION = "1.0"
SEVERITY_SERIES = tuple(s.value for s in Severity)
COMPONENT_SERIES = "component"


@dataclass
class ProjectStats:
    project_name: str
    components: int
    vulnerabilities: int
    build_runtime_seconds: Optional[float] = None

    def to_dict(self) -> dict[str, Any]:
        return {
            "project_name": self.project_name,
            "components": self.components,
            "vulnerabilities": self.vulnerabilities,
            "build_runtime_seconds": self.build_runtime_seconds,
        }


def project_stats(graph: VDGraph, name: str, runtime: Optional[float] = None) -> ProjectStats:
    return ProjectStats(
        project_name=name,
        components=len(graph.ids_with_label(VertexLabel.COMPONENT)),
        vulnerabilities=len(graph.ids_with_label(VertexLabel.VULNERABILITY)),
        build_runtime_seconds=runtime,
    )


def top_reachable(
    graph: VDGraph,
    n: int,
    severity: Severity = Severity.HIGH,
    include_higher: bool = False,
) -> list[PathCountRecord]:
    if n < 1:
        raise ValueError("n must be positive")
    return path_counts_by_severity(graph, severity, include_higher)[:n]


@dataclass
class DepthHistogram:
    """Counts per (depth, series).  Series are severity names or ``component``."""

    buckets: dict[int, Counter] = field(default_factory=dict)

    @classmethod
    def from_table(cls, table: dict[int, dict[str, int]]) -> "DepthHistogram":
        hist = cls()
        for depth, row in table.items():
            for series, count in row.items():
                hist.add(int(depth), str(getattr(series, "value", series)), count)
        return hist

    def add(self, depth: int, series: str, count: int = 1) -> None:
        if count:
            self.buckets.setdefault(depth, Counter())[series] += count

    def merge(self, other: "DepthHistogram") -> "DepthHistogram":
        merged = DepthHistogram.from_table({d: dict(c) for d, c in self.buckets.items()})
        for depth, row in other.buckets.items():
            for series, count in row.items():
                merged.add(depth, series, count)
        return merged

    def _totals(self, series: Optional[Iterable[str]] = None) -> dict[int, int]:
        wanted = None if series is None else {getattr(s, "value", s) for s in series}
        out: dict[int, int] = {}
        for depth, row in self.buckets.items():
            total = sum(c for s, c in row.items() if wanted is None or s in wanted)
            if total:
                out[depth] = total
        return dict(sorted(out.items()))

    def count(self, series: Optional[Iterable[str]] = None) -> int:
        return sum(self._totals(series).values())

    @property
    def total(self) -> int:
        return self.count()

    def mean(self, series: Optional[Iterable[str]] = None) -> Optional[float]:
        totals = self._totals(series)
        n = sum(totals.values())
        if not n:
            return None
        return sum(d * c for d, c in totals.items()) / n

    def median(self, series: Optional[Iterable[str]] = None) -> Optional[float]:
        totals = self._totals(series)
        n = sum(totals.values())
        if not n:
            return None

        def nth(k: int) -> int:
            seen = 0
            for depth, c in totals.items():
                seen += c
                if seen > k:
                    return depth
            raise AssertionError("unreachable")

        if n % 2:
            return float(nth(n // 2))
        return (nth(n // 2 - 1) + nth(n // 2)) / 2

    def cumulative_at(self, depth: float, series: Optional[Iterable[str]] = None) -> Optional[float]:
        """Fraction of entries whose depth is <= ``depth``."""
        totals = self._totals(series)
        n = sum(totals.values())
        if not n:
            return None
        return sum(c for d, c in totals.items() if d <= depth) / n

    def to_dict(self) -> dict[str, Any]:
        return {str(d): dict(sorted(self.buckets[d].items())) for d in sorted(self.buckets)}

    def rows(self, series: Sequence[str]) -> list[list[int]]:
        if not self.buckets:
            return []
        return [[d] + [self.buckets.get(d, Counter())[s] for s in series] for d in range(min(self.buckets), max(self.buckets) + 1)]


def depth_histogram(records: Iterable[DepthRecord]) -> DepthHistogram:
    hist = DepthHistogram()
    for rec in records:
        hist.add(rec.depth, rec.severity.value)
    return hist


def vulnerability_depth_summary(hist: DepthHistogram) -> dict[str, Any]:
    """Headline numbers; depth counts the final has_v hop, intermediate does not."""
    mean = hist.mean()
    median = hist.median()
    severe = (Severity.HIGH.value, Severity.CRITICAL.value)
    return {
        "count": hist.total,
        "mean_path_length": mean,
        "median_path_length": median,
        "mean_intermediate_dependencies": None if mean is None else mean - 1,
        "median_intermediate_dependencies": None if median is None else median - 1,
        "cumulative_at_4": hist.cumulative_at(4),
        "cumulative_at_4_high_or_critical": hist.cumulative_at(4, severe),
    }


@dataclass
class ComponentDepthSummary:
    histogram: DepthHistogram
    unreachable: int = 0

    def to_dict(self) -> dict[str, Any]:
        hist = self.histogram
        return {
            "histogram": {str(d): c for d, c in hist._totals().items()},
            "unreachable": self.unreachable,
            "mean": hist.mean(),
            "median": hist.median(),
            "cumulative_at_2": hist.cumulative_at(2),
            "cumulative_at_4": hist.cumulative_at(4),
        }


def component_depth_histogram(depths: Iterable[tuple[str, Optional[int]]]) -> ComponentDepthSummary:
    hist = DepthHistogram()
    unreachable = 0
    for _, depth in depths:
        if depth is None:
            unreachable += 1
        else:
            hist.add(depth, COMPONENT_SERIES)
    return ComponentDepthSummary(hist, unreachable)


@dataclass
class ProjectResult:
    stats: ProjectStats
    depth_hist: DepthHistogram
    component_depths: ComponentDepthSummary
    top: list[PathCountRecord] = field(default_factory=list)
    merge_report: Optional[MergeReport] = None
    # advisories carried only by isolated components; left out of depth_hist
    unreachable_vulnerabilities: int = 0

    def to_dict(self) -> dict[str, Any]:
        return {
            **self.stats.to_dict(),
            "merge": None if self.merge_report is None else {
                k: v for k, v in self.merge_report.to_dict().items() if k != "resolution"
            },
            "top_reachable": [
                {"component_id": r.component_id, "component_name": r.component_name, "path_count": r.path_count}
                for r in self.top
            ],
            "vulnerability_depths": {
                "histogram": self.depth_hist.to_dict(),
                "unreachable": self.unreachable_vulnerabilities,
                **vulnerability_depth_summary(self.depth_hist),
            },
            "component_depths": self.component_depths.to_dict(),
        }


def analyze_project(
    graph: VDGraph,
    name: str,
    runtime: Optional[float] = None,
    merge_report: Optional[MergeReport] = None,
    top_n: int = 5,
    severity: Severity = Severity.HIGH,
    include_higher: bool = False,
) -> ProjectResult:
    depths = vulnerability_depths(graph, skip_unreachable=True)
    stats = project_stats(graph, name, runtime)
    return ProjectResult(
        stats=stats,
        depth_hist=depth_histogram(depths),
        component_depths=component_depth_histogram(component_depths(graph)),
        top=top_reachable(graph, top_n, severity, include_higher),
        merge_report=merge_report,
        unreachable_vulnerabilities=stats.vulnerabilities - len(depths),
    )


@dataclass
class AggregateReport:
    projects: list[ProjectResult]
    failures: list[dict[str, str]] = field(default_factory=list)

    @property
    def total_components(self) -> int:
        return sum(p.stats.components for p in self.projects)

    @property
    def total_vulnerabilities(self) -> int:
        return sum(p.stats.vulnerabilities for p in self.projects)

    @property
    def depth_hist(self) -> DepthHistogram:
        merged = DepthHistogram()
        for p in self.projects:
            merged = merged.merge(p.depth_hist)
        return merged

    @property
    def component_depths(self) -> ComponentDepthSummary:
        merged = DepthHistogram()
        for p in self.projects:
            merged = merged.merge(p.component_depths.histogram)
        return ComponentDepthSummary(merged, sum(p.component_depths.unreachable for p in self.projects))

    def to_dict(self) -> dict[str, Any]:
        depth_hist = self.depth_hist
        return {
            "schema_version": REPORT_SCHEMA_VERSION,
            "projects": [p.to_dict() for p in self.projects],
            "failures": list(self.failures),
            "aggregate": {
                "projects": len(self.projects),
                "components": self.total_components,
                "vulnerabilities": self.total_vulnerabilities,
                "vulnerability_depths": {
                    "histogram": depth_hist.to_dict(),
                    "unreachable": sum(p.unreachable_vulnerabilities for p in self.projects),
                    **vulnerability_depth_summary(depth_hist),
                },
                "component_depths": self.component_depths.to_dict(),
            },
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def stats_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf)
        writer.writerow(["project", "components", "vulnerabilities", "runtime_seconds"])
        for p in self.projects:
            rt = p.stats.build_runtime_seconds
            writer.writerow([p.stats.project_name, p.stats.components, p.stats.vulnerabilities, "" if rt is None else f"{rt:.3f}"])
        return buf.getvalue()

    def depth_histogram_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf)
        writer.writerow(["depth", *SEVERITY_SERIES])
        writer.writerows(self.depth_hist.rows(SEVERITY_SERIES))
        return buf.getvalue()

    def component_depth_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf)
        writer.writerow(["depth", "components"])
        writer.writerows(self.component_depths.histogram.rows([COMPONENT_SERIES]))
        return buf.getvalue()

    def render_text(self) -> str:
        lines = [f"{'project':<28}{'components':>12}{'vulns':>8}{'runtime (s)':>13}"]
        for p in self.projects:
            rt = p.stats.build_runtime_seconds
            lines.append(
                f"{p.stats.project_name:<28}{p.stats.components:>12}{p.stats.vulnerabilities:>8}"
                f"{'-' if rt is None else f'{rt:.3f}':>13}"
            )
        lines.append(f"{'TOTAL':<28}{self.total_components:>12}{self.total_vulnerabilities:>8}")
        summary = vulnerability_depth_summary(self.depth_hist)
        if summary["count"]:
            lines.append(
                f"vulnerability depth: mean {summary['mean_path_length']:.2f} "
                f"(intermediate {summary['mean_intermediate_dependencies']:.2f}), "
                f"median {summary['median_path_length']:g}, "
                f"<=4: {summary['cumulative_at_4']:.1%}"
            )
        for failure in self.failures:
            lines.append(f"FAILED {failure['project']}: {failure['error']}")
        return "\n".join(lines) + "\n"


def aggregate_projects(projects: Sequence[ProjectResult], failures: Sequence[dict[str, str]] = ()) -> AggregateReport:
    """Projects are independent graphs; totals are plain sums, never deduplicated."""
    return AggregateReport(list(projects), list(failures))
