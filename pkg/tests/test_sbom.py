import json

import pytest

from conftest import FLINK_ROOT, HADOOP, JACKSON, K8S, PROTOBUF, YARN, fixture_bytes
from vdgraph.errors import MalformedDocument, MissingBomRef, MissingRoot
from vdgraph.model import EdgeLabel, Source, VertexLabel
from vdgraph.sbom import (
    build_sbom_graph,
    extract_most_recent_license,
    normalize_name,
    parse_sbom,
)

SBOM_SAMPLE = {
    "bomFormat": "CycloneDX",
    "specVersion": "1.4",
    "serialNumber": "urn:uuid:735aa69b-bd0a",
    "version": 1,
    "metadata": {
        "timestamp": "2025-03-19T01:03:52Z",
        "tools": [],
        "component": {
            "publisher": "The Apache Software Foundation",
            "group": "org.apache.flink",
            "name": "flink-parent",
            "version": "2.1-SNAPSHOT",
            "bom-ref": "pkg:maven/org.apache.flink/flink-parent@2.1-SNAPSHOT?type=pom",
        },
    },
    "components": [
        {
            "publisher": "The Apache Software Foundation",
            "group": "org.apache.flink",
            "name": "flink-shaded-force-shading",
            "version": "20.0",
            "type": "library",
            "licenses": [{"license": {"id": "Apache-2.0"}}],
            "bom-ref": "pkg:maven/org.apache.flink/flink-shaded-force-shading@20.0?type=jar",
        }
    ],
    "dependencies": [
        {
            "ref": "pkg:maven/org.apache.flink/flink-parent@2.1-SNAPSHOT?type=pom",
            "dependsOn": [
                "pkg:maven/org.apache.flink/flink-shaded-force-shading@20.0?type=jar",
                "pkg:maven/org.slf4j/slf4j-api@1.7.36?type=jar",
            ],
        }
    ],
}


def doc(**overrides):
    data = json.loads(json.dumps(SBOM_SAMPLE))
    data.update(overrides)
    return json.dumps(data).encode()


def test_sample_root_ref():
    parsed = parse_sbom(doc())
    assert parsed.root_ref == FLINK_ROOT
    assert len(parsed.components) == 1
    assert len(parsed.dependency_pairs) == 2


def test_empty_sections_leave_only_root():
    parsed = parse_sbom(doc(components=[], dependencies=[]))
    assert parsed.components == [] and parsed.dependency_pairs == []
    g = build_sbom_graph(parsed)
    assert len(g.vertices) == 1 and len(g.edges) == 0


def test_unlisted_ref_kept_verbatim():
    parsed = parse_sbom(doc())
    assert (FLINK_ROOT, "pkg:maven/org.slf4j/slf4j-api@1.7.36?type=jar") in parsed.dependency_pairs


@pytest.mark.parametrize("payload", [b"not json", b"[]", json.dumps({"bomFormat": "SPDX"}).encode()])
def test_malformed(payload):
    with pytest.raises(MalformedDocument):
        parse_sbom(payload)


def test_missing_root():
    data = json.loads(doc())
    del data["metadata"]["component"]
    with pytest.raises(MissingRoot):
        parse_sbom(json.dumps(data))


def test_component_without_bom_ref():
    data = json.loads(doc())
    data["components"].append({"name": "anonymous", "version": "1"})
    parsed = parse_sbom(json.dumps(data))
    assert len(parsed.components) == 1
    assert any("anonymous" in w for w in parsed.warnings)
    with pytest.raises(MissingBomRef):
        parse_sbom(json.dumps(data), strict=True)


@pytest.mark.parametrize(
    "raw, expected",
    [
        ("org.codehaus.jettison:jettison", ("org.codehaus.jettison", "jettison")),
        ("flink-shaded-force-shading", ("", "flink-shaded-force-shading")),
        ("a:b:c", ("a", "b:c")),
    ],
)
def test_normalize_name(raw, expected):
    assert normalize_name(raw) == expected


@pytest.mark.parametrize(
    "licenses, expected",
    [
        ([{"license": {"id": "Apache-2.0"}}], "Apache-2.0"),
        ("[{'license': {'id': 'Apache-2.0'}}]", "Apache-2.0"),
        ([], None),
        ([{"license": {"id": "MIT"}}, {"license": {"id": "Apache-2.0"}}], "Apache-2.0"),
        ([{"license": {"name": "Custom"}}], "Custom"),
        ([{"expression": "MIT OR Apache-2.0"}], "MIT OR Apache-2.0"),
        ("{{{ not a list", None),
    ],
)
def test_most_recent_license(licenses, expected):
    assert extract_most_recent_license(licenses) == expected


def test_component_fields():
    g = build_sbom_graph(parse_sbom(doc()))
    comp = g.payload("pkg:maven/org.apache.flink/flink-shaded-force-shading@20.0?type=jar")
    assert comp.name == "flink-shaded-force-shading_20.0"
    assert comp.general_name == "flink-shaded-force-shading"
    assert comp.group == "org.apache.flink"
    assert comp.version == "20.0"
    assert comp.component_type == "library"
    assert comp.publisher == "The Apache Software Foundation"
    assert comp.most_recent_license == "Apache-2.0"
    assert json.loads(comp.licenses_raw) == [{"license": {"id": "Apache-2.0"}}]
    assert comp.source is Source.SBOM


def test_merge_case_sbom_subgraph(merge_case_sbom_graph):
    g = merge_case_sbom_graph
    assert g.root_id == FLINK_ROOT
    assert set(g.ids_with_label(VertexLabel.COMPONENT)) == {K8S, YARN, HADOOP, JACKSON, PROTOBUF}
    assert g.edges_with_label(EdgeLabel.HAS_V) == []
    assert {(e.source, e.target) for e in g.edges} == {
        (FLINK_ROOT, K8S), (FLINK_ROOT, YARN), (FLINK_ROOT, HADOOP),
        (K8S, HADOOP), (YARN, HADOOP), (HADOOP, JACKSON), (HADOOP, PROTOBUF),
    }


def test_dangling_reference_becomes_stub():
    g = build_sbom_graph(parse_sbom(doc()))
    stub_id = "pkg:maven/org.slf4j/slf4j-api@1.7.36?type=jar"
    stub = g.payload(stub_id)
    assert stub.source is Source.STUB
    assert (stub.general_name, stub.version, stub.group) == ("slf4j-api", "1.7.36", "org.slf4j")
    assert stub_id in g.successors(FLINK_ROOT, EdgeLabel.DEPN)
    assert sum("unlisted" in w for w in g.warnings) == 1


def test_ghost_ref_stub_by_hand():
    data = json.loads(doc(components=[], dependencies=[{"ref": FLINK_ROOT, "dependsOn": ["ghost-ref"]}]))
    g = build_sbom_graph(parse_sbom(json.dumps(data)))
    assert g.payload("ghost-ref").source is Source.STUB
    assert g.payload("ghost-ref").general_name == "ghost-ref"
    assert len(g.vertices) == 2 and len(g.edges) == 1
    assert sum("ghost-ref" in w for w in g.warnings) == 1


def test_self_pairs_and_duplicates_collapse():
    ref = SBOM_SAMPLE["components"][0]["bom-ref"]
    data = json.loads(doc())
    data["dependencies"] = [
        {"ref": FLINK_ROOT, "dependsOn": [ref, ref]},
        {"ref": ref, "dependsOn": [ref]},
    ]
    data["components"].append(dict(data["components"][0], name="dupe"))
    g = build_sbom_graph(parse_sbom(json.dumps(data)))
    assert len(g.edges) == 1
    assert g.payload(ref).general_name == "flink-shaded-force-shading"
    assert any("self-dependency" in w for w in g.warnings)
    assert any("duplicate" in w for w in g.warnings)


def test_isolated_components_kept():
    data = json.loads(doc(dependencies=[]))
    g = build_sbom_graph(parse_sbom(json.dumps(data)))
    assert len(g.ids_with_label(VertexLabel.COMPONENT)) == 1
    assert g.edges == set()


def test_nested_components_flattened():
    data = json.loads(doc())
    data["components"][0]["components"] = [{"name": "inner", "version": "1", "bom-ref": "inner-ref"}]
    parsed = parse_sbom(json.dumps(data))
    assert [c["bom-ref"] for c in parsed.components][-1] == "inner-ref"


def test_vertex_count_invariant(merge_case_sbom_graph):
    parsed = parse_sbom(fixture_bytes("merge_case_sbom.json"))
    stubs = [c for c in merge_case_sbom_graph.components() if c.source is Source.STUB]
    assert len(merge_case_sbom_graph.vertices) == 1 + len(parsed.components) + len(stubs)
    assert len(merge_case_sbom_graph.edges) <= len(parsed.dependency_pairs)
