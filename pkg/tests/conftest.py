from pathlib import Path

import pytest

from vdgraph.merge import merge_graphs
from vdgraph.sbom import build_sbom_graph, parse_sbom
from vdgraph.sca import build_sca_forest, parse_osv_report

FIXTURES = Path(__file__).parent / "fixtures"

FLINK_ROOT = "pkg:maven/org.apache.flink/flink-parent@2.1-SNAPSHOT?type=pom"
K8S = "pkg:maven/org.apache.flink/flink-kubernetes@2.1-SNAPSHOT?type=jar"
YARN = "pkg:maven/org.apache.flink/flink-yarn@2.1-SNAPSHOT?type=jar"
RUNTIME = "pkg:maven/org.apache.flink/flink-runtime@2.1-SNAPSHOT?type=jar"
HADOOP = "pkg:maven/org.apache.hadoop/hadoop-common@2.10.2?type=jar"
JACKSON = "pkg:maven/org.codehaus.jackson/jackson-mapper-asl@1.9.13?type=jar"
PROTOBUF = "pkg:maven/com.google.protobuf/protobuf-java@2.5.0?type=jar"
JERSEY = "pkg:maven/com.sun.jersey/jersey-json@1.9?type=jar"
JETTISON = "pkg:maven/org.codehaus.jettison/jettison@1.1?type=jar"
WOODSTOX = "woodstox-core_5.4.0"
GHSA_WOODSTOX = "GHSA-3f7h-mf4q-vrm4"
GHSA_JACKSON = "GHSA-c27h-mcmw-48hv"
CVE_JETTISON = "CVE-2022-45685"


def fixture_bytes(name: str) -> bytes:
    return (FIXTURES / name).read_bytes()


@pytest.fixture
def merge_case_sbom_graph():
    return build_sbom_graph(parse_sbom(fixture_bytes("merge_case_sbom.json")))


@pytest.fixture
def merge_case_sca_forest():
    return build_sca_forest(parse_osv_report(fixture_bytes("merge_case_osv.json")))


@pytest.fixture
def merge_case_graph(merge_case_sbom_graph, merge_case_sca_forest):
    return merge_graphs(merge_case_sbom_graph, merge_case_sca_forest)[0]


@pytest.fixture
def chain_case_graph():
    g_sbom = build_sbom_graph(parse_sbom(fixture_bytes("chain_case_sbom.json")))
    g_sca = build_sca_forest(parse_osv_report(fixture_bytes("chain_case_osv.json")))
    return merge_graphs(g_sbom, g_sca)[0]


# one line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
