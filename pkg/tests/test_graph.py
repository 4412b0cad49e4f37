import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import rdscount as rc
from rdscount.errors import InputError
from rdscount.graph import NodeAttributeSchema, _infer_schema


def test_degrees_and_neighbors(house_net):
    assert house_net.edge_count == 4
    assert list(house_net.degrees) == [2, 2, 3, 1, 0]
    assert list(house_net.neighbors(2)) == [0, 1, 3]
    assert house_net.has_edge(0, 2) and house_net.has_edge(2, 0)
    assert not house_net.has_edge(0, 3)
    assert list(house_net.isolates) == [4]


def test_subgroup_and_cross_ties(house_net):
    assert house_net.subgroup_counts("group") == {"A": 2, "B": 3}
    # cross-group edges: 0-2 and 1-2
    assert house_net.cross_tie_total("group") == 2


def test_edges_are_canonicalized():
    net = rc.AttributedNetwork(3, [[2, 1], [1, 0]], {"group": ["A", "A", "B"]})
    assert net.edges.tolist() == [[0, 1], [1, 2]]


def test_rejects_bad_edges():
    with pytest.raises(InputError):
        rc.AttributedNetwork(3, [[0, 0]], {})
    with pytest.raises(InputError):
        rc.AttributedNetwork(3, [[0, 1], [1, 0]], {})  # duplicate after sorting
    with pytest.raises(InputError):
        rc.AttributedNetwork(3, [[0, 5]], {})


def test_rejects_bad_attributes():
    with pytest.raises(InputError):
        rc.AttributedNetwork(3, [], {"group": ["A", "B"]})  # wrong length
    schema = NodeAttributeSchema({"group": ["A", "B"]})
    with pytest.raises(InputError):
        rc.AttributedNetwork(2, [], {"group": ["A", "C"]}, schema=schema)
    with pytest.raises(InputError):
        rc.AttributedNetwork(2, [], {"other": ["x", "y"]}, schema=schema)


def test_schema_codes_and_reference():
    schema = NodeAttributeSchema({"g": ["B", "A"]}, reference={"g": "A"})
    assert schema.level_code("g", "B") == 0
    assert schema.reference["g"] == "A"
    with pytest.raises(InputError):
        schema.level_code("g", "C")
    with pytest.raises(InputError):
        schema.level_code("nope", "A")
    with pytest.raises(InputError):
        NodeAttributeSchema({"g": ["A", "A"]})


def test_infer_schema_first_appearance_order():
    schema = _infer_schema({"g": ["z", "a", "z", "m"]})
    assert schema.levels["g"] == ("z", "a", "m")


def test_arrays_read_only(house_net):
    with pytest.raises(ValueError):
        house_net.degrees[0] = 99
    with pytest.raises(ValueError):
        house_net.edges[0, 0] = 99
    with pytest.raises(ValueError):
        house_net.attribute_codes("group")[0] = 1


def test_csv_round_trip(tmp_path, house_net):
    ep, np_ = tmp_path / "edges.csv", tmp_path / "nodes.csv"
    house_net.to_csv(ep, np_)
    back = rc.AttributedNetwork.from_csv(ep, np_)
    assert back.node_count == house_net.node_count
    assert back.edges.tolist() == house_net.edges.tolist()
    assert back.attribute_values("group") == house_net.attribute_values("group")


@st.composite
def random_graph(draw):
    n = draw(st.integers(min_value=2, max_value=12))
    all_dyads = [(i, j) for i in range(n) for j in range(i + 1, n)]
    edges = draw(st.sets(st.sampled_from(all_dyads)))
    groups = draw(st.lists(st.sampled_from(["A", "B"]), min_size=n, max_size=n))
    return n, sorted(edges), groups


@given(random_graph())
@settings(max_examples=60, deadline=None)
def test_degree_sum_invariant(g):
    n, edges, groups = g
    net = rc.AttributedNetwork(n, np.array(edges, dtype=np.int64).reshape(-1, 2),
                               {"group": groups})
    assert int(net.degrees.sum()) == 2 * net.edge_count
    assert 0 <= net.cross_tie_total("group") <= net.edge_count
    # neighbor lists are consistent with the edge list
    for i, j in edges:
        assert j in net.neighbors(i) and i in net.neighbors(j)
