import numpy as np
import pytest
from hypothesis import given, strategies as st

from nidkit import fixtures as F
from nidkit.bayesnet import Cpd
from nidkit.maid import (
    ChanceNode,
    DecisionNode,
    IncompleteProfileError,
    Maid,
    Strategy,
    UtilityNode,
    expected_utility,
    fast_expected_utility,
    group_best_response,
    implement_profile,
    local_best_response,
    uniform_profile,
    validate_maid,
)
from oracles import best_group_value, random_profile

TF = ("true", "false")


@pytest.mark.parametrize("name,m", sorted(F.fixture_maids().items()) + [("steal-two", F.steal_maid("two"))])
def test_fixtures_validate(name, m):
    assert validate_maid(m).ok, validate_maid(m).violations


def test_tabulated_expected_utility_when_alice_leads():
    m = F.steal_maid()
    p = F.steal_strategies(m)
    assert expected_utility(m, p, "Alice", {"Leader": "alice"}) == pytest.approx(-15.6, abs=1e-9)
    assert expected_utility(m, p, "Bob", {"Leader": "alice"}) == pytest.approx(15.6, abs=1e-9)


def test_perfect_recall_violation_is_reported():
    # D2 comes after D1 (through C) but does not observe D1
    nodes = [DecisionNode("D1", "A", TF), ChanceNode("C", TF, Cpd("C", ("D1",), np.full((2, 2), 0.5))),
             DecisionNode("D2", "A", TF, ("C",)), UtilityNode("U", "A", ("D1", "D2"), np.zeros((2, 2)))]
    rep = validate_maid(Maid(["A"], nodes))
    assert any("perfect recall" in v and "D1" in v for v in rep.violations)


def test_observed_proxy_satisfies_recall():
    c = ChanceNode("C", TF, Cpd("C", ("D1",), np.eye(2)))
    nodes = [DecisionNode("D1", "A", TF, observed_as="C"), c, DecisionNode("D2", "A", TF, ("C",)),
             UtilityNode("U", "A", ("D1", "D2"), np.zeros((2, 2)))]
    assert validate_maid(Maid(["A"], nodes)).ok


def test_missing_utility_entry_is_named():
    doms = {"D": TF}
    u = UtilityNode.from_rows("U", "A", ("D",), {("true",): 1.0}, doms)
    rep = validate_maid(Maid(["A"], [DecisionNode("D", "A", TF), u]))
    assert any("missing entry ('false',)" in v for v in rep.violations)


def test_unknown_owner_and_parent():
    m = Maid(["A"], [DecisionNode("D", "Z", TF, ("Q",))])
    rep = validate_maid(m)
    assert any("unknown parents" in v for v in rep.violations)


def test_incomplete_profile_rejected():
    m = F.rps_maid()
    with pytest.raises(IncompleteProfileError):
        implement_profile(m, {"A": Strategy.uniform(m, "A")})


def test_local_best_response_breaks_ties_low():
    m = F.rps_maid()
    br = local_best_response(m, uniform_profile(m), "A")
    assert br.table.tolist() == [1.0, 0.0, 0.0]


def test_unreachable_rows_default_to_first_action():
    m = F.steal_maid("three")
    p = uniform_profile(m)
    m2 = Maid(m.agents, [ChanceNode("Leader", ("alice", "bob", "none"), Cpd("Leader", (), [1.0, 0.0, 0.0]))]
              + [n for n in m.nodes.values() if n.name != "Leader"])
    br = local_best_response(m2, p, "Steal")
    assert br.row("bob").tolist() == [1.0, 0.0]
    assert br.row("none").tolist() == [1.0, 0.0]


@given(st.integers(0, 10**6))
def test_fast_expected_utility_matches_network_query(seed):
    m = F.random_maid(seed)
    p = random_profile(m, np.random.default_rng(seed))
    for a in m.agents:
        assert fast_expected_utility(m, p, a) == pytest.approx(expected_utility(m, p, a), abs=1e-9)


@given(st.integers(0, 10**6))
def test_local_best_response_is_optimal(seed):
    m = F.random_maid(seed)
    rng = np.random.default_rng(seed)
    p = random_profile(m, rng)
    d = m.decisions[int(rng.integers(len(m.decisions)))]
    q = dict(p)
    q[d.name] = local_best_response(m, p, d.name)
    got = expected_utility(m, q, d.owner)
    assert got == pytest.approx(best_group_value(m, p, [d.name], d.owner), abs=1e-9)


def test_group_best_response_exhaustive_single_agent():
    m = F.umbrella_maid()
    p = uniform_profile(m)
    br = group_best_response(m, p, "Agent")
    q = dict(p)
    q.update(br)
    assert expected_utility(m, q, "Agent") == pytest.approx(best_group_value(m, p, ["Look", "Take"], "Agent"),
                                                             abs=1e-9)


def test_group_best_response_on_two_pitch_alice():
    m = F.two_pitch_maid("two")
    rng = np.random.default_rng(3)
    p = random_profile(m, rng)
    br = group_best_response(m, p, "Alice")
    q = dict(p)
    q.update(br)
    value = expected_utility(m, q, "Alice")
    # no single-decision change improves on the group response
    for d in ("Steal1", "Steal2"):
        r = dict(q)
        r[d] = local_best_response(m, q, d)
        assert expected_utility(m, r, "Alice") <= value + 1e-9
