"""End-to-end acceptance criteria; each test records one pass/fail line for the terminal summary."""

import contextlib
import itertools

import networkx as nx
import numpy as np
import pytest

from nidkit import fixtures as F
from nidkit.bayesgame import check_equivalence, convert_bg_to_nid
from nidkit.bayesnet import brute_force_posterior, query_marginal
from nidkit.maid import expected_utility, implement_profile
from nidkit.modelformat import document, parse_document, serialize_document, structurally_equal
from nidkit.nid import Block, NidModel, compile_nid_to_maid, solve_nid
from nidkit.reproduction import (
    MATCH_TOL,
    VARIANTS,
    marketing_entries,
    first_pitch_comparison,
    format_report,
    reproduction_report,
)
from nidkit.roshambo import MODEL_BLOCKS, AutomatonBot, NashBot, NidAgent, RotationBot, run_match
from nidkit.solver import solve_maid, verify_epsilon_nash

RESULTS: dict[int, tuple[bool, str, str]] = {}


@contextlib.contextmanager
def criterion(n: int, title: str):
    detail = {"text": ""}
    try:
        yield detail
    except BaseException as e:
        RESULTS[n] = (False, title, detail["text"] or f"{type(e).__name__}: {str(e).splitlines()[0] if str(e) else ''}")
        print(f"criterion {n} FAIL: {title}")
        raise
    RESULTS[n] = (True, title, detail["text"])
    print(f"criterion {n} PASS: {title} ({detail['text']})")


def fixture_networks():
    nets = {f"steal-{v}": F.steal_network(v) for v in VARIANTS}
    for v in VARIANTS:
        for name, m in F.fixture_maids(v).items():
            nets[f"{name}-{v}-equilibrium"] = implement_profile(m, solve_maid(m).profile)
    for seed in range(10):
        nets[f"random-{seed}"] = F.random_network(seed)
    return nets


def all_bgs():
    games = {"matching-pennies": F.matching_pennies_bg(), "dominant": F.dominant_bg()}
    for seed in range(20):
        games[f"random-{seed}"] = F.random_bg(seed, n_types=2 + seed % 2, n_actions=2 + (seed // 2) % 2)
    return games


def test_criterion_1_inference_oracle():
    with criterion(1, "variable elimination equals brute-force enumeration") as info:
        worst, count = 0.0, 0
        for name, net in fixture_networks().items():
            names = list(net.variables)
            assert sum(np.log2(max(2, net.variables[v].card)) for v in names) <= 12 + 1e-9, name
            full = query_marginal(net, names)
            worst = max(worst, float(np.abs(full.values - brute_force_posterior(net, names).values).max()))
            for t, e in itertools.permutations(names, 2):
                for val in net.variables[e].domain:
                    ev = {e: val}
                    if brute_force_posterior(net, [e]).values[net.variables[e].domain.index(val)] <= 0:
                        continue
                    a = query_marginal(net, [t], ev).values
                    b = brute_force_posterior(net, [t], ev).values
                    worst = max(worst, float(np.abs(a - b).max()))
                    count += 1
        info["text"] = f"{count} posteriors, max |diff| {worst:.1e}"
        assert worst <= 1e-9


def test_criterion_2_epsilon_nash():
    with criterion(2, "every fixture profile is a 1e-6 Nash equilibrium") as info:
        worst, count = 0.0, 0
        for v in VARIANTS:
            for m in F.fixture_maids(v).values():
                worst = max(worst, verify_epsilon_nash(m, solve_maid(m).profile, 1e-6).max_regret)
                count += 1
            for n in F.fixture_nids(v).values():
                eq = solve_nid(n)
                worst = max(worst, verify_epsilon_nash(eq.compiled.maid, eq.maid_report.profile, 1e-6).max_regret)
                count += 1
        for g in all_bgs().values():
            eq = solve_nid(convert_bg_to_nid(g)[0])
            worst = max(worst, verify_epsilon_nash(eq.compiled.maid, eq.maid_report.profile, 1e-6).max_regret)
            count += 1
        info["text"] = f"{count} models, worst regret {worst:.1e}"
        assert worst <= 1e-6


def test_criterion_3_roshambo_equilibrium():
    with criterion(3, "one-shot rock-paper-scissors solves to uniform with value 0") as info:
        m = F.rps_maid()
        rep = solve_maid(m)
        dev = max(float(np.abs(s.table - 1 / 3).max()) for s in rep.profile.values())
        value = expected_utility(m, rep.profile, "Alice")
        info["text"] = f"max deviation {dev:.1e}, value {value:+.1e}"
        assert dev <= 1e-6 and abs(value) <= 1e-6
        assert abs(value + expected_utility(m, rep.profile, "Bob")) <= 1e-6


def test_criterion_4_compiled_maids_are_acyclic():
    with criterion(4, "random and fixture NIDs compile to acyclic MAIDs") as info:
        models = [F.random_nid(seed) for seed in range(200)]
        for v in VARIANTS:
            models += list(F.fixture_nids(v).values())
        models += [convert_bg_to_nid(g)[0] for g in all_bgs().values()]
        for n in models:
            assert nx.is_directed_acyclic_graph(compile_nid_to_maid(n).maid.graph())
        info["text"] = f"{len(models)} models"


def test_criterion_5_bayesian_game_equivalence():
    with criterion(5, "direct and converted Bayesian-game solutions cross-validate") as info:
        worst = 0.0
        for name, g in all_bgs().items():
            n, mapping = convert_bg_to_nid(g)
            assert len(n.blocks) == sum(len(g.types[i]) for i in g.agents)
            rep = check_equivalence(g, n, mapping, tolerance=1e-6)
            assert rep.cross_valid, name
            worst = max(worst, rep.nid_profile_bg_regret, rep.bg_profile_maid_regret)
            if name in ("matching-pennies", "dominant"):
                assert rep.strategies_match, name
        info["text"] = f"{len(all_bgs())} games, worst cross regret {worst:.1e}"


def test_criterion_6_reduction_and_rationality():
    with criterion(6, "one-block NIDs reproduce MAIDs; self-directed models have theta = phi") as info:
        maids = list(F.fixture_maids().values()) + [F.random_maid(s) for s in range(20)]
        worst = 0.0
        for m in maids:
            direct = solve_maid(m)
            eq = solve_nid(NidModel(m.agents, [Block("TL", m)], "TL"))
            for d in m.decisions:
                worst = max(worst, float(np.abs(eq.theta[("TL", d.name)].table - direct.profile[d.name].table).max()))
        assert worst <= 1e-9
        count = 0
        for n in F.fixture_nids().values():
            selfish = NidModel(n.agents, [Block(b.label, b.maid) for b in n.blocks.values()], n.root)
            eq = solve_nid(selfish)
            for key in eq.theta:
                assert eq.theta[key].max_abs_diff(eq.phi[key]) == 0.0
                count += 1
        info["text"] = f"{len(maids)} one-block models (max diff {worst:.1e}), {count} self-directed entries"


def test_criterion_7_reproduction_report():
    with criterion(7, "reference reproduction report") as info:
        entries = reproduction_report()
        print(format_report(entries))
        assert max(e.regret for e in entries) <= 1e-6
        # Bob pitches out less on the first pitch when he may act irrationally on the second
        for v in VARIANTS:
            two, expert = first_pitch_comparison(v)
            assert two < expert, v
        # the advertise reversal presupposes that bias changes the post-advertising action
        rows = {e.quantity: e for e in marketing_entries()}
        premise = rows["TL played increase after advertising"].computed != \
            rows["unbiased increase after advertising"].computed
        if premise:
            assert rows["TL advertise"].computed == "false"
        matched = sum(e.matches for e in entries)
        info["text"] = (f"{matched}/{len(entries)} entries within {MATCH_TOL}; first-pitch claim holds; "
                        f"advertise reversal {'checked' if premise else 'premise unsupported, reported only'}")


@pytest.fixture(scope="module")
def arena():
    out = {}
    for seed in range(10):
        out[("rotation", seed)] = run_match(NidAgent(), RotationBot(), 3000, seed)
        out[("uniform-nash", seed)] = run_match(NidAgent(), NashBot(), 3000, seed)
        out[("automaton", seed)] = run_match(NidAgent(), AutomatonBot(), 3000, seed)
    return out


def test_criterion_8_arena(arena):
    with criterion(8, "arena properties over 10 seeded 3000-round matches") as info:
        rot = [arena[("rotation", s)].mean_after(200) for s in range(10)]
        nash = [arena[("uniform-nash", s)].mean_score for s in range(10)]
        col = 5 + MODEL_BLOCKS.index("Automaton")
        found = [any(float(r[col]) > 0.9 for r in arena[("automaton", s)].log[:300]) for s in range(10)]
        assert min(rot) >= 0.5
        assert all(-0.05 <= x <= 0.05 for x in nash)
        assert sum(found) >= 9
        again = {
            "rotation": lambda s: run_match(NidAgent(), RotationBot(), 3000, s),
            "uniform-nash": lambda s: run_match(NidAgent(), NashBot(), 3000, s),
            "automaton": lambda s: run_match(NidAgent(), AutomatonBot(), 3000, s),
        }
        for (bot, s), res in arena.items():
            assert again[bot](s).to_csv() == res.to_csv(), (bot, s)
        info["text"] = (f"rotation min {min(rot):+.3f}, nash range [{min(nash):+.3f}, {max(nash):+.3f}], "
                        f"automaton identified {sum(found)}/10, logs reproducible")


def test_criterion_9_format_round_trip():
    from test_modelformat import random_model

    with criterion(9, "parse/serialize round trip is structural identity and byte-stable") as info:
        models = []
        for v in VARIANTS:
            models += list(F.fixture_maids(v).values()) + list(F.fixture_nids(v).values())
            models.append(F.steal_network(v))
        models += [F.matching_pennies_bg(), F.dominant_bg()]
        models += [random_model(seed) for seed in range(100)]
        for model in models:
            doc = document(model, {"note": "round trip"})
            text = serialize_document(doc)
            back = parse_document(text)
            assert structurally_equal(doc, back)
            assert serialize_document(back) == text
        info["text"] = f"{len(models)} documents"
