import numpy as np
import pytest
from hypothesis import given, strategies as st

from nidkit import fixtures as F
from nidkit.bayesnet import (
    Cpd,
    InconsistentEvidenceError,
    IncompleteAssignmentError,
    Network,
    Variable,
    brute_force_posterior,
    joint_probability,
    query_marginal,
    sample_assignment,
    validate_network,
)


def steal_net():
    return F.steal_network("three")


def test_tabulated_joint_entry():
    net = steal_net()
    full = {"Leader": "alice", "Steal": "true", "PitchOut": "true", "ThrownOut": "true"}
    post = query_marginal(net, list(full))
    assert post.values[0, 0, 0, 0] == pytest.approx(0.4 * 0.75 * 0.9 * 0.8, abs=1e-12)
    assert post.values[0, 0, 0, 0] == pytest.approx(0.216, abs=1e-12)


def test_joint_probability_needs_every_variable():
    net = steal_net()
    with pytest.raises(IncompleteAssignmentError):
        joint_probability(net, {"Leader": "alice"})


def test_joint_probability_of_complete_assignment():
    net = steal_net()
    full = {v: d[0] for v, d in net.domains.items()}
    full.update({"Leader": "alice", "Steal": "true", "PitchOut": "true", "ThrownOut": "true", "UA": "-60.0",
                 "UB": "60.0"})
    assert joint_probability(net, full) == pytest.approx(0.216)


def test_inconsistent_evidence_raises():
    net = steal_net()
    # no steal means nobody is thrown out
    with pytest.raises(InconsistentEvidenceError):
        query_marginal(net, ["Leader"], {"Steal": "false", "ThrownOut": "true"})


def test_validation_reports_bad_row():
    net = Network([Variable("A", ("a", "b"))], [Cpd("A", (), [0.5, 0.6])])
    rep = validate_network(net)
    assert not rep.ok and any("A" in v for v in rep.violations)


def test_validation_reports_cycle():
    net = Network([Variable("A", ("a", "b")), Variable("B", ("a", "b"))],
                  [Cpd("A", ("B",), np.full((2, 2), 0.5)), Cpd("B", ("A",), np.full((2, 2), 0.5))])
    assert any("cycle" in v for v in validate_network(net).violations)


def test_fixture_networks_validate():
    assert validate_network(steal_net()).ok
    assert validate_network(F.steal_network("two")).ok


@given(st.integers(0, 10**6), st.integers(2, 7))
def test_elimination_matches_enumeration(seed, n):
    net = F.random_network(seed, n)
    rng = np.random.default_rng(seed)
    names = list(net.variables)
    targets = list(rng.choice(names, size=int(rng.integers(1, 3)), replace=False))
    rest = [v for v in names if v not in targets]
    ev = {v: net.variables[v].domain[0] for v in rest[: int(rng.integers(0, 3))]}
    try:
        oracle = brute_force_posterior(net, targets, ev)
    except InconsistentEvidenceError:
        with pytest.raises(InconsistentEvidenceError):
            query_marginal(net, targets, ev)
        return
    got = query_marginal(net, targets, ev)
    assert got.scope == tuple(targets)
    np.testing.assert_allclose(got.values, oracle.values, atol=1e-9)


@given(st.integers(0, 10**6))
def test_posterior_is_normalized(seed):
    net = F.random_network(seed, 5)
    post = query_marginal(net, ["V4"], {"V0": "s0"})
    assert post.values.sum() == pytest.approx(1.0, abs=1e-9)
    assert (post.values >= 0).all()


def test_sampling_is_seeded():
    net = steal_net()
    assert sample_assignment(net, 7) == sample_assignment(net, 7)
    draws = [sample_assignment(net, s)["Leader"] for s in range(2000)]
    assert draws.count("alice") / 2000 == pytest.approx(0.4, abs=0.05)
