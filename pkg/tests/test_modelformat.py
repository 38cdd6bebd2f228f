import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from nidkit import fixtures as F
from nidkit.bayesnet import query_marginal
from nidkit.modelformat import (
    FormatError,
    document,
    parse_document,
    serialize_document,
    structurally_equal,
    to_json_obj,
)


def all_fixture_models():
    out = dict(F.fixture_nids())
    out.update(F.fixture_maids())
    out.update({"steal-net": F.steal_network(), "steal-net-two": F.steal_network("two"),
                "pennies": F.matching_pennies_bg(), "dominant": F.dominant_bg()})
    return out


def random_model(seed: int):
    kind = seed % 4
    if kind == 0:
        return F.random_network(seed, 5)
    if kind == 1:
        return F.random_maid(seed)
    if kind == 2:
        return F.random_nid(seed)
    return F.random_bg(seed, 2, 2)


@pytest.mark.parametrize("name", sorted(all_fixture_models()))
def test_fixture_round_trip(name):
    doc = document(all_fixture_models()[name], {"name": name})
    text = serialize_document(doc)
    back = parse_document(text)
    assert structurally_equal(doc, back)
    assert serialize_document(back) == text
    assert back.metadata == {"name": name}


@given(st.integers(0, 10**6))
def test_random_round_trip(seed):
    doc = document(random_model(seed))
    text = serialize_document(doc)
    back = parse_document(text)
    assert structurally_equal(doc, back)
    assert serialize_document(back) == text
    # a second trip is exact: numbers are already canonical
    again = parse_document(serialize_document(back))
    assert again.body == back.body


def test_equal_documents_serialize_identically():
    a = serialize_document(document(F.expert_nid()))
    b = serialize_document(document(F.expert_nid()))
    assert a == b


def test_parsed_network_answers_queries():
    net = parse_document(serialize_document(document(F.steal_network()))).body
    post = query_marginal(net, ["Leader", "Steal", "PitchOut", "ThrownOut"])
    assert post.values[0, 0, 0, 0] == pytest.approx(0.216, abs=1e-12)


def test_default_mods_are_omitted_and_restored():
    doc = document(F.expert_nid())
    obj = to_json_obj(doc)
    tl = [b for b in obj["body"]["blocks"] if b["label"] == "TL"][0]
    assert {(m["observer"], m["decision"]) for m in tl["mods"]} == {("Bob", "Steal"), ("Alice", "PitchOut")}
    back = parse_document(serialize_document(doc)).body
    md = back.blocks["TL"].mods[("Alice", "Steal")]
    assert md.labels == ("TL",) and md.cpd.table.tolist() == [1.0]


def test_rows_are_keyed_by_parent_values():
    obj = to_json_obj(document(F.steal_maid()))
    steal_row = [n for n in obj["body"]["nodes"] if n["name"] == "ThrownOut"][0]["rows"][0]
    assert steal_row == {"given": ["true", "true"], "p": [0.8, 0.2]}


def test_twelve_significant_digits():
    obj = to_json_obj(document(F.steal_maid("two")))
    leader = [n for n in obj["body"]["nodes"] if n["name"] == "Leader"][0]
    assert leader["rows"][0]["p"] == [0.571428571429, 0.428571428571]


def test_empty_input_is_a_syntax_error_at_origin():
    with pytest.raises(FormatError) as e:
        parse_document(b"")
    assert (e.value.line, e.value.col) == (1, 1)


def test_syntax_error_position():
    with pytest.raises(FormatError) as e:
        parse_document(b'{\n  "kind": "maid",\n  oops\n}')
    assert (e.value.line, e.value.col) == (3, 3)


def test_unknown_version_rejected():
    obj = to_json_obj(document(F.rps_maid()))
    obj["format_version"] = 2
    with pytest.raises(FormatError, match="unsupported format version 2"):
        parse_document(json.dumps(obj))


def test_unknown_kind_names_path():
    obj = to_json_obj(document(F.rps_maid()))
    obj["kind"] = "spreadsheet"
    with pytest.raises(FormatError) as e:
        parse_document(json.dumps(obj))
    assert e.value.path == "$.kind"


def test_schema_error_names_path():
    obj = to_json_obj(document(F.steal_maid()))
    obj["body"]["nodes"][3]["rows"][1]["given"] = ["true", "maybe"]
    with pytest.raises(FormatError) as e:
        parse_document(json.dumps(obj))
    assert e.value.path == "$.body.nodes[3].rows[1].given"
    assert "maybe" in str(e.value)


def test_missing_rows_surface_in_validation():
    from nidkit.modelformat import validate_document
    obj = to_json_obj(document(F.steal_maid()))
    del obj["body"]["nodes"][3]["rows"][1]
    doc = parse_document(json.dumps(obj))
    rep = validate_document(doc)
    assert not rep.ok


def test_non_finite_numbers_rejected():
    with pytest.raises(FormatError):
        parse_document(b'{"format_version": 1, "kind": "network", "body": {"variables": [NaN]}}')


def test_bayesian_game_numbers_survive():
    g = F.random_bg(5, 2, 2)
    back = parse_document(serialize_document(document(g))).body
    for a in g.agents:
        np.testing.assert_allclose(back.utilities[a], g.utilities[a], rtol=1e-11)
        np.testing.assert_allclose(back.beliefs[a], g.beliefs[a], rtol=1e-11)
