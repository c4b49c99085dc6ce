import pytest
from hypothesis import given, strategies as st

from vdgraph.errors import DuplicateIdConflict, GraphError, IllegalEdgeShape, SelfLoop, UnknownEndpoint
from vdgraph.model import (
    Component,
    Edge,
    EdgeLabel,
    Severity,
    VDGraph,
    Vertex,
    VertexLabel,
    Vulnerability,
)


def rooted():
    return VDGraph(Component("root", "app", "1.0"))


def test_label_sets_are_closed():
    assert {l.value for l in VertexLabel} == {"root", "component", "vulnerability"}
    assert {l.value for l in EdgeLabel} == {"depn", "has_v"}


def test_severity_order_excludes_unknown():
    assert Severity.CRITICAL.at_least(Severity.HIGH)
    assert Severity.HIGH.at_least(Severity.HIGH)
    assert not Severity.MODERATE.at_least(Severity.HIGH)
    assert not Severity.UNKNOWN.at_least(Severity.LOW)
    assert not Severity.LOW.at_least(Severity.UNKNOWN)
    assert Severity.parse("Medium") is Severity.MODERATE


def test_component_name_joins_version():
    c = Component("x", "flink-shaded-force-shading", "20.0")
    assert c.name == "flink-shaded-force-shading_20.0"
    assert Component("y", "bare").name == "bare"


def test_vulnerability_aliases_drop_own_id():
    v = Vulnerability("GHSA-1", aliases=("CVE-1", "GHSA-1", "CVE-1"))
    assert v.aliases == ("CVE-1",)


def test_add_component_to_rooted_graph():
    g = rooted().add_vertex(VertexLabel.COMPONENT, Component("a_1.0", "a", "1.0"))
    assert len(g.vertices) == 2


def test_add_same_component_twice_is_idempotent_with_warning():
    g = rooted()
    g.add_vertex(VertexLabel.COMPONENT, Component("a_1.0", "a", "1.0"))
    g.add_vertex(VertexLabel.COMPONENT, Component("a_1.0", "other", "2.0"))
    assert len(g.vertices) == 2
    assert len(g.warnings) == 1
    assert g.payload("a_1.0").general_name == "a"


def test_same_id_different_label_conflicts():
    g = rooted().add_vertex(VertexLabel.COMPONENT, Component("a_1.0", "a", "1.0"))
    with pytest.raises(DuplicateIdConflict):
        g.add_vertex(VertexLabel.VULNERABILITY, Vulnerability("a_1.0"))


def test_add_edge_rules():
    g = rooted()
    g.add_vertex(VertexLabel.COMPONENT, Component("c", "c", "1"))
    g.add_vertex(VertexLabel.VULNERABILITY, Vulnerability("v"))
    g.add_edge("root", "c", EdgeLabel.DEPN)
    assert Edge("root", "c", EdgeLabel.DEPN) in g.edges
    with pytest.raises(IllegalEdgeShape):
        g.add_edge("c", "v", EdgeLabel.DEPN)
    with pytest.raises(IllegalEdgeShape):
        g.add_edge("root", "v", EdgeLabel.HAS_V)
    with pytest.raises(IllegalEdgeShape):
        g.add_edge("c", "root", EdgeLabel.DEPN)
    with pytest.raises(UnknownEndpoint):
        g.add_edge("root", "ghost", EdgeLabel.DEPN)
    with pytest.raises(SelfLoop):
        g.add_edge("c", "c", EdgeLabel.DEPN)
    g.add_edge("root", "c", EdgeLabel.DEPN)
    assert len(g.edges) == 1


def test_validate_merge_case(merge_case_graph):
    assert merge_case_graph.validate() == []


def test_validate_two_roots():
    g = rooted()
    g.vertices["other"] = Vertex(VertexLabel.ROOT, Component("other", "o", "1"))
    problems = g.validate()
    assert len(problems) == 1
    assert problems[0].kind == "multiple-roots"


def test_validate_dangling_edge():
    g = rooted()
    g.edges.add(Edge("root", "missing", EdgeLabel.DEPN))
    problems = g.validate()
    assert len(problems) == 1
    assert "missing" in problems[0].ids


def test_forest_validates_without_root():
    g = VDGraph()
    g.add_vertex(VertexLabel.COMPONENT, Component("c", "c", "1"))
    assert g.validate(require_root=False) == []
    assert [p.kind for p in g.validate()] == ["missing-root"]


# random add sequences: whatever succeeds leaves a valid graph, and sizes never shrink
ops = st.lists(
    st.tuples(
        st.sampled_from(["vertex", "edge"]),
        st.sampled_from(list(VertexLabel) + list(EdgeLabel)),
        st.sampled_from(["root", "a", "b", "c", "v", "w"]),
        st.sampled_from(["root", "a", "b", "c", "v", "w"]),
    ),
    max_size=40,
)


@given(ops)
def test_random_adds_stay_valid_and_monotone(seq):
    g = rooted()
    sizes = (len(g.vertices), len(g.edges))
    for kind, label, x, y in seq:
        try:
            if kind == "vertex" and isinstance(label, VertexLabel):
                payload = Vulnerability(x) if label is VertexLabel.VULNERABILITY else Component(x, x, "1")
                g.add_vertex(label, payload)
            elif kind == "edge" and isinstance(label, EdgeLabel):
                g.add_edge(x, y, label)
        except GraphError:
            pass
        now = (len(g.vertices), len(g.edges))
        assert now[0] >= sizes[0] and now[1] >= sizes[1]
        sizes = now
        assert g.validate() == []
