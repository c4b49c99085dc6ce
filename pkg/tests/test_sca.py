import json

import pytest

from conftest import GHSA_JACKSON, GHSA_WOODSTOX, WOODSTOX
from vdgraph.errors import MalformedDocument
from vdgraph.model import EdgeLabel, Severity, Source, VertexLabel
from vdgraph.sca import build_sca_forest, classify_severity, parse_osv_report

OSV_SAMPLE = {
    "results": [
        {
            "source": {"path": "/path/to/source", "type": "sbom"},
            "packages": [
                {
                    "package": {"name": "org.codehaus.jettison:jettison", "version": "1.1", "ecosystem": "Maven"},
                    "vulnerabilities": [
                        {
                            "modified": "2023-11-08T04:10:53Z",
                            "published": "2022-12-13T15:30:26Z",
                            "schema_version": "1.6.0",
                            "id": "GHSA-7rf3-mqpx-h7xg",
                        }
                    ],
                }
            ],
        }
    ]
}


def test_osv_sample():
    doc = parse_osv_report(json.dumps(OSV_SAMPLE).encode())
    assert doc.source_path == "/path/to/source"
    assert len(doc.entries) == 1
    entry = doc.entries[0]
    assert (entry.package.name, entry.package.version, entry.package.ecosystem) == (
        "org.codehaus.jettison:jettison", "1.1", "Maven")
    assert [v["id"] for v in entry.vulnerabilities] == ["GHSA-7rf3-mqpx-h7xg"]

    forest = build_sca_forest(doc)
    comp = forest.payload("jettison_1.1")
    assert (comp.general_name, comp.group, comp.source) == ("jettison", "org.codehaus.jettison", Source.SCA)
    vuln = forest.payload("GHSA-7rf3-mqpx-h7xg")
    assert vuln.published == "2022-12-13T15:30:26Z"
    assert vuln.modified == "2023-11-08T04:10:53Z"
    assert json.loads(vuln.details_raw)["schema_version"] == "1.6.0"


def test_empty_results():
    doc = parse_osv_report(b'{"results": []}')
    assert doc.entries == []
    forest = build_sca_forest(doc)
    assert forest.vertices == {} and forest.edges == set()


@pytest.mark.parametrize("payload", [b"{}", b"nope", b'{"results": [{"packages": [{"package": {}}]}]}'])
def test_malformed(payload):
    with pytest.raises(MalformedDocument):
        parse_osv_report(payload)


def _two_packages_one_advisory():
    adv = {"id": "GHSA-shared", "aliases": ["CVE-1"]}
    return {"results": [{"packages": [
        {"package": {"name": "g:a", "version": "1"}, "vulnerabilities": [adv]},
        {"package": {"name": "g:b", "version": "2"}, "vulnerabilities": [adv]},
        {"package": {"name": "g:clean", "version": "3"}, "vulnerabilities": []},
    ]}]}


def test_shared_advisory_flattening_and_dedup():
    doc = parse_osv_report(json.dumps(_two_packages_one_advisory()))
    assert len(doc.entries) == 3
    assert [e.vulnerabilities[0]["id"] for e in doc.entries[:2]] == ["GHSA-shared", "GHSA-shared"]
    forest = build_sca_forest(doc)
    assert forest.ids_with_label(VertexLabel.VULNERABILITY) == ["GHSA-shared"]
    assert sorted(forest.predecessors("GHSA-shared", EdgeLabel.HAS_V)) == ["a_1", "b_2"]
    assert "clean_3" in forest
    assert forest.validate(require_root=False) == []


def test_conflicting_advisory_records_warn():
    data = _two_packages_one_advisory()
    data["results"][0]["packages"][1]["vulnerabilities"] = [{"id": "GHSA-shared", "summary": "different"}]
    forest = build_sca_forest(parse_osv_report(json.dumps(data)))
    assert forest.payload("GHSA-shared").aliases == ("CVE-1",)
    assert any("differing" in w for w in forest.warnings)


def test_merge_case_forest(merge_case_sca_forest):
    f = merge_case_sca_forest
    assert len(f.ids_with_label(VertexLabel.COMPONENT)) == 3
    assert f.ids_with_label(VertexLabel.VULNERABILITY) == [GHSA_WOODSTOX, GHSA_JACKSON]
    assert {(e.source, e.target) for e in f.edges} == {
        (WOODSTOX, GHSA_WOODSTOX),
        ("protobuf-java_2.5.0", GHSA_WOODSTOX),
        ("jackson-mapper-asl_1.9.13", GHSA_JACKSON),
    }
    assert f.root_id is None
    assert all(e.label is EdgeLabel.HAS_V for e in f.edges)


@pytest.mark.parametrize(
    "record, expected",
    [
        ({"database_specific": {"severity": "HIGH"}}, Severity.HIGH),
        ({"database_specific": {"severity": "moderate"}}, Severity.MODERATE),
        ({"affected": [{"ecosystem_specific": {"severity": "MEDIUM"}}]}, Severity.MODERATE),
        ({"severity": [{"type": "CVSS_V3", "score": "9.8"}]}, Severity.CRITICAL),
        ({"severity": [{"type": "CVSS_V3", "score": "CVSS:3.1/AV:N/AC:L/PR:N/UI:N/S:U/C:H/I:H/A:H"}]}, Severity.CRITICAL),
        ({"severity": [{"type": "CVSS_V3", "score": "CVSS:3.1/AV:N/AC:L/PR:N/UI:N/S:U/C:H/I:N/A:N"}]}, Severity.HIGH),
        ({"database_specific": {"cvss": {"score": 5.3}}}, Severity.MODERATE),
        ({"severity": [{"type": "CVSS_V3", "score": "0.0"}]}, Severity.UNKNOWN),
        ({}, Severity.UNKNOWN),
    ],
)
def test_classify_severity(record, expected):
    assert classify_severity(record) is expected


@pytest.mark.parametrize(
    "score, expected",
    [(0.1, Severity.LOW), (3.9, Severity.LOW), (4.0, Severity.MODERATE), (6.9, Severity.MODERATE),
     (7.0, Severity.HIGH), (8.9, Severity.HIGH), (9.0, Severity.CRITICAL), (10.0, Severity.CRITICAL)],
)
def test_cvss_boundaries(score, expected):
    assert classify_severity({"severity": [{"type": "CVSS_V3", "score": str(score)}]}) is expected


def test_ladder_order_is_configurable():
    record = {"database_specific": {"severity": "LOW"}, "severity": [{"type": "CVSS_V3", "score": "9.1"}]}
    assert classify_severity(record) is Severity.LOW
    assert classify_severity(record, ladder=("cvss", "label")) is Severity.CRITICAL
    assert classify_severity({"database_specific": {"severity": "LOW"}}, ladder=("cvss",)) is Severity.UNKNOWN
