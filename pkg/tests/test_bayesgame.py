import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nidkit import fixtures as F
from nidkit.bayesgame import (
    BayesianGame,
    bg_regret,
    check_equivalence,
    convert_bg_to_nid,
    solve_bg_direct,
    validate_bg,
)
from nidkit.maid import UtilityNode
from nidkit.nid import solve_nid, validate_nid


def brute_interim(g: BayesianGame, sigma, i, k):
    """Expected utility of each action of (i, k-th type) by explicit enumeration of types and actions."""
    n = len(g.agents)
    pos = g.agents.index(i)
    out = np.zeros(len(g.actions[i]))
    for t in itertools.product(*[range(len(g.types[a])) for a in g.agents]):
        if t[pos] != k:
            continue
        p_t = g.beliefs[i][(k,) + tuple(x for a, x in zip(g.agents, t) if a != i)]
        for c in itertools.product(*[range(len(g.actions[a])) for a in g.agents]):
            w = p_t
            for j in range(n):
                if j != pos:
                    w *= sigma[(g.agents[j], g.types[g.agents[j]][t[j]])][c[j]]
            out[c[pos]] += w * g.utilities[i][t + c]
    return out


def test_validate_reports_bad_belief_row():
    g = F.matching_pennies_bg()
    assert validate_bg(g).ok
    g.beliefs["P1"] = np.array([[0.9]])
    rep = validate_bg(g)
    assert any("(P1, t)" in v for v in rep.violations)


def test_validate_reports_missing_cell():
    g = F.matching_pennies_bg()
    g.utilities["P2"] = g.utilities["P2"].copy()
    g.utilities["P2"][0, 0, 1, 0] = np.nan
    assert any("missing cell" in v for v in validate_bg(g).violations)


def test_matching_pennies_is_uniform():
    sol = solve_bg_direct(F.matching_pennies_bg())
    for v in sol.strategy.values():
        np.testing.assert_allclose(v, [0.5, 0.5], atol=1e-9)


def test_dominant_types_play_dominant_actions():
    sol = solve_bg_direct(F.dominant_bg())
    assert sol.strategy[("P1", "lo")].tolist() == [1.0, 0.0]
    assert sol.strategy[("P1", "hi")].tolist() == [0.0, 1.0]
    # P2 sees a 0.3/0.7 mix: matching b pays 0.7 against 0.6 for a
    assert sol.strategy[("P2", "only")].tolist() == [0.0, 1.0]


@pytest.mark.parametrize("seed", range(5))
def test_direct_solution_survives_grid_deviations(seed):
    g = F.random_bg(seed, 2, 2)
    sol = solve_bg_direct(g)
    grid = np.linspace(0, 1, 101)
    for i in g.agents:
        for k, t in enumerate(g.types[i]):
            v = brute_interim(g, sol.strategy, i, k)
            own = v @ sol.strategy[(i, t)]
            best_grid = max(v @ np.array([q, 1 - q]) for q in grid)
            assert best_grid <= own + 1e-6


@settings(max_examples=20)
@given(st.integers(0, 10**6))
def test_interim_values_match_enumeration(seed):
    g = F.random_bg(seed, 2, 3)
    rng = np.random.default_rng(seed)
    sigma = {(a, t): rng.dirichlet(np.ones(3)) for a in g.agents for t in g.types[a]}
    from nidkit.bayesgame import interim_values
    for i in g.agents:
        for k in range(2):
            np.testing.assert_allclose(interim_values(g, sigma, i, k), brute_interim(g, sigma, i, k), atol=1e-9)


def test_conversion_shape_two_by_two():
    g = F.random_bg(0, 2, 2)
    n, f = convert_bg_to_nid(g)
    assert len(n.blocks) == 4
    for b in n.blocks.values():
        assert len(b.maid.decisions) == 2 and len(b.maid.utilities) == 2
        assert sum(1 for c in b.maid.chance if c.name.startswith("Q_")) == 1
    assert f[("P1", "t0")] == ("P1.t0", "P1")
    assert validate_nid(n).ok


def test_single_type_blocks_have_point_mass_beliefs():
    n, _ = convert_bg_to_nid(F.matching_pennies_bg())
    for b in n.blocks.values():
        q = [c for c in b.maid.chance if c.name.startswith("Q_")][0]
        assert q.cpd.table.tolist() == [1.0]


@settings(max_examples=20)
@given(st.integers(0, 10**6), st.integers(1, 3), st.integers(1, 3))
def test_construction_size_is_linear(seed, n_types, n_actions):
    g = F.random_bg(seed, n_types, n_actions)
    n, f = convert_bg_to_nid(g)
    total_types = sum(len(t) for t in g.types.values())
    assert len(n.blocks) == total_types == len(f)
    nodes = sum(len(b.maid.nodes) + len(b.explicit_mods()) for b in n.blocks.values())
    cells = sum(u.size for u in g.utilities.values()) + sum(b.size for b in g.beliefs.values())
    assert nodes <= 3 * total_types * len(g.agents) + cells
    assert validate_nid(n).ok


@settings(max_examples=10)
@given(st.integers(0, 10**6))
def test_distinguished_actions_in_other_agents_blocks(seed):
    g = F.random_bg(seed, 2, 3)
    n, _ = convert_bg_to_nid(g)
    eq = solve_nid(n)
    for (label, d), th in eq.theta.items():
        owner = label.split(".")[0]
        if d != f"D_{owner}":
            assert th.table.tolist() == [1.0, 0.0, 0.0]


@pytest.mark.parametrize("g", [F.matching_pennies_bg(), F.dominant_bg()], ids=["pennies", "dominant"])
def test_equivalence_on_unique_equilibrium_fixtures(g):
    n, f = convert_bg_to_nid(g)
    rep = check_equivalence(g, n, f)
    assert rep.strategies_match and rep.cross_valid
    assert rep.max_deviation <= 1e-6


@settings(max_examples=10)
@given(st.integers(0, 10**6))
def test_equivalence_cross_validates(seed):
    g = F.random_bg(seed, 3, 3)
    n, f = convert_bg_to_nid(g)
    rep = check_equivalence(g, n, f)
    assert rep.cross_valid
    assert max(bg_regret(g, rep.nid_theta).values()) <= 1e-6


def test_corrupted_nid_is_flagged():
    g = F.dominant_bg()
    n, f = convert_bg_to_nid(g)
    b = n.blocks["P1.lo"]
    u = b.maid.nodes["U_P1"]
    b.maid.nodes["U_P1"] = UtilityNode(u.name, u.owner, u.parents, -u.table)
    b.maid._cache.clear()
    rep = check_equivalence(g, n, f)
    assert rep.max_deviation > rep.tolerance
    assert not rep.strategies_match
