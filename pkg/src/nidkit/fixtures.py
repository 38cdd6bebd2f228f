"""Worked example models used by tests, scripts and the CLI.

Boolean domains list "true" before "false", so the lowest-index tie-break favours "true".
"""

from __future__ import annotations

import numpy as np

from .bayesgame import BayesianGame
from .bayesnet import Cpd, Network, Variable
from .maid import ChanceNode, DecisionNode, Maid, Strategy, UtilityNode, implement_profile
from .nid import Block, ModNode, NidModel, find_self_loops

TF = ("true", "false")
MOVES = ("rock", "paper", "scissors")
RPS_PAYOFF = np.array([[0.0, -1.0, 1.0], [1.0, 0.0, -1.0], [-1.0, 1.0, 0.0]])

# thrown-out probability given (steal, pitch-out); no steal means no throw-out
THROWN_OUT = {("true", "true"): 0.8, ("true", "false"): 0.6}

# Alice's payoff keyed by (leader, steal, pitch-out, thrown-out); unlisted combinations pay 0
ALICE_PAYOFF = {
    ("alice", "true", "true", "true"): -60, ("alice", "true", "true", "false"): 110,
    ("alice", "true", "false", "true"): -80, ("alice", "true", "false", "false"): 110,
    ("alice", "false", "true", "false"): 10, ("alice", "false", "false", "false"): 0,
    ("bob", "true", "true", "true"): -90, ("bob", "true", "true", "false"): 110,
    ("bob", "true", "false", "true"): -100, ("bob", "true", "false", "false"): 110,
    ("bob", "false", "true", "false"): 20, ("bob", "false", "false", "false"): 0,
}


def leader_node(variant: str = "three") -> ChanceNode:
    """``three``: alice/bob/none as tabulated; ``two``: alice/bob renormalised."""
    if variant == "three":
        return ChanceNode("Leader", ("alice", "bob", "none"), Cpd("Leader", (), [0.4, 0.3, 0.3]))
    if variant == "two":
        return ChanceNode("Leader", ("alice", "bob"), Cpd("Leader", (), [4 / 7, 3 / 7]))
    raise ValueError(f"unknown leader variant {variant!r}")


def thrown_out_node(name="ThrownOut", steal="Steal", pitch="PitchOut") -> ChanceNode:
    table = np.zeros((2, 2, 2))
    for i, s in enumerate(TF):
        for j, p in enumerate(TF):
            q = THROWN_OUT.get((s, p), 0.0)
            table[i, j] = [q, 1 - q]
    return ChanceNode(name, TF, Cpd(name, (steal, pitch), table))


def payoff_nodes(leader: ChanceNode, steal="Steal", pitch="PitchOut", thrown="ThrownOut",
                 suffix="", bob_penalty_parent: str | None = None) -> list[UtilityNode]:
    doms = {"Leader": leader.domain, steal: TF, pitch: TF, thrown: TF}
    parents = ("Leader", steal, pitch, thrown)

    def alice(vals):
        return float(ALICE_PAYOFF.get(vals, 0.0))

    ua = UtilityNode.from_function(f"UA{suffix}", "Alice", parents, doms, alice)
    if bob_penalty_parent is None:
        ub = UtilityNode(f"UB{suffix}", "Bob", parents, -ua.table)
    else:
        # pitching out again after an earlier pitch-out costs Bob 20
        t = np.zeros(ua.table.shape + (2,))
        t[..., 0] = -ua.table
        t[..., 1] = -ua.table
        t[:, :, 0, :, 0] -= 20.0
        ub = UtilityNode(f"UB{suffix}", "Bob", parents + (bob_penalty_parent,), t)
    return [ua, ub]


def steal_maid(variant: str = "three", steal_chance: bool = False, pitch_chance: bool = False,
               speed: str | None = None) -> Maid:
    """One-pitch steal/pitch-out game; ``*_chance`` replaces a decision by a point mass on true.

    ``speed`` adds a Speed node fixed to "fast" or "slow" that changes the throw-out odds.
    """
    leader = leader_node(variant)
    doms = {"Leader": leader.domain}
    nodes: list = [leader]
    if steal_chance:
        nodes.append(ChanceNode("Steal", TF, Cpd.point_mass("Steal", ("Leader",), doms | {"Steal": TF},
                                                            lambda v: "true")))
    else:
        nodes.append(DecisionNode("Steal", "Alice", TF, ("Leader",)))
    if pitch_chance:
        nodes.append(ChanceNode("PitchOut", TF, Cpd.point_mass("PitchOut", ("Leader",),
                                                               doms | {"PitchOut": TF}, lambda v: "true")))
    else:
        nodes.append(DecisionNode("PitchOut", "Bob", TF, ("Leader",)))
    if speed is None:
        nodes.append(thrown_out_node())
    else:
        nodes.append(ChanceNode("Speed", ("fast", "slow"),
                                Cpd("Speed", (), [1.0, 0.0] if speed == "fast" else [0.0, 1.0])))
        odds = {("fast", "true"): 0.4, ("fast", "false"): 0.2, ("slow", "true"): 0.8, ("slow", "false"): 0.6}
        t = np.zeros((2, 2, 2, 2))
        for i, s in enumerate(TF):
            for j, p in enumerate(TF):
                for k, sp in enumerate(("fast", "slow")):
                    q = odds[(sp, p)] if s == "true" else 0.0
                    t[i, j, k] = [q, 1 - q]
        nodes.append(ChanceNode("ThrownOut", TF, Cpd("ThrownOut", ("Steal", "PitchOut", "Speed"), t)))
    nodes += payoff_nodes(leader)
    return Maid(["Alice", "Bob"], nodes)


def steal_strategies(m: Maid) -> dict[str, Strategy]:
    """The tabulated behaviour: Alice steals 0.75/0.65, Bob pitches out 0.9/0.5 (uniform if nobody leads)."""
    steal = {("alice",): (0.75, 0.25), ("bob",): (0.65, 0.35), ("none",): (0.5, 0.5)}
    pitch = {("alice",): (0.9, 0.1), ("bob",): (0.5, 0.5), ("none",): (0.5, 0.5)}
    dom = m.domains["Leader"]
    return {
        "Steal": Strategy.from_rows(m, "Steal", {k: v for k, v in steal.items() if k[0] in dom}),
        "PitchOut": Strategy.from_rows(m, "PitchOut", {k: v for k, v in pitch.items() if k[0] in dom}),
    }


def steal_network(variant: str = "three") -> Network:
    m = steal_maid(variant)
    return implement_profile(m, steal_strategies(m))


# --------------------------------------------------------------------------- NIDs


def expert_nid(variant: str = "three") -> NidModel:
    """Each player half-believes the other follows an expert's fixed advice."""
    tl = Block("TL", steal_maid(variant), [
        ModNode.from_probs("Bob", "Steal", {"TL": 0.3, "S": 0.7}),
        ModNode.from_probs("Alice", "PitchOut", {"TL": 0.3, "P": 0.7}),
    ])
    s = Block("S", steal_maid(variant, steal_chance=True))
    p = Block("P", steal_maid(variant, pitch_chance=True))
    return NidModel(["Alice", "Bob"], [tl, s, p], "TL")


SALES_TL = {"true": 0.7, "false": 0.5}
SALES_BIAS = {"true": 0.9, "false": 0.5}
PROFIT = {
    ("true", "true", "high"): 70, ("true", "true", "low"): -70,
    ("true", "false", "high"): 50, ("true", "false", "low"): -40,
    ("false", "true", "high"): 80, ("false", "true", "low"): -60,
    ("false", "false", "high"): 60, ("false", "false", "low"): -30,
}


def _marketing_maid(high: dict, advertise_chance: bool) -> Maid:
    doms = {"Advertise": TF, "Increase": TF, "Sales": ("high", "low")}
    if advertise_chance:
        adv = ChanceNode("Advertise", TF, Cpd("Advertise", (), [1.0, 0.0]))
    else:
        adv = DecisionNode("Advertise", "Company", TF)
    sales = ChanceNode("Sales", ("high", "low"),
                       Cpd("Sales", ("Advertise",), [[high["true"], 1 - high["true"]],
                                                     [high["false"], 1 - high["false"]]]))
    nodes = [adv, DecisionNode("Increase", "Company", TF, ("Advertise",)), sales,
             UtilityNode.from_rows("Profit", "Company", ("Advertise", "Increase", "Sales"), PROFIT, doms)]
    return Maid(["Company"], nodes)


def marketing_nid() -> NidModel:
    """After advertising, the company judges its price increase with an optimistic sales model."""
    doms = {"Advertise": TF}
    mod = ModNode.from_rows("Company", "Increase", ("TL", "Bias"), ("Advertise",),
                            {("true",): (0.0, 1.0), ("false",): (1.0, 0.0)}, doms)
    tl = Block("TL", _marketing_maid(SALES_TL, False), [mod])
    bias = Block("Bias", _marketing_maid(SALES_BIAS, True))
    return NidModel(["Company"], [tl, bias], "TL")


def two_pitch_maid(variant: str = "three") -> Maid:
    leader = leader_node(variant)
    first = ("Leader", "Steal1", "PitchOut1", "ThrownOut1")
    nodes = [
        leader,
        DecisionNode("Steal1", "Alice", TF, ("Leader",)),
        DecisionNode("PitchOut1", "Bob", TF, ("Leader",)),
        thrown_out_node("ThrownOut1", "Steal1", "PitchOut1"),
        DecisionNode("Steal2", "Alice", TF, first),
        DecisionNode("PitchOut2", "Bob", TF, first),
        thrown_out_node("ThrownOut2", "Steal2", "PitchOut2"),
    ]
    nodes += payoff_nodes(leader, "Steal1", "PitchOut1", "ThrownOut1", "1")
    nodes += payoff_nodes(leader, "Steal2", "PitchOut2", "ThrownOut2", "2", bob_penalty_parent="PitchOut1")
    return Maid(["Alice", "Bob"], nodes)


def two_pitch_nid(variant: str = "three") -> NidModel:
    """Alice thinks Bob may pitch out on the second pitch no matter what."""
    tl = Block("TL", two_pitch_maid(variant), [ModNode.from_probs("Bob", "PitchOut2", {"TL": 0.7, "L": 0.3})])
    leader = leader_node(variant)
    doms = {"Leader": leader.domain, "PitchOut2": TF}
    l_maid = Maid(["Alice", "Bob"], [
        leader, ChanceNode("PitchOut2", TF, Cpd.point_mass("PitchOut2", ("Leader",), doms, lambda v: "true"))])
    return NidModel(["Alice", "Bob"], [tl, Block("L", l_maid)], "TL")


def runner_speed_nid(variant: str = "three") -> NidModel:
    """Bob wrongly fears that Alice knows the runner is fast."""
    tl = Block("TL", steal_maid(variant, speed="slow"), [ModNode.from_probs("Bob", "Steal", {"TL": 0.2, "L": 0.8})])
    l_block = Block("L", steal_maid(variant, speed="fast"))
    return NidModel(["Alice", "Bob"], [tl, l_block], "TL")


def mutual_speed_nid(variant: str = "three") -> NidModel:
    """Each player thinks the other is the one mistaken about the runner."""
    tl = Block("TL", steal_maid(variant, speed="slow"), [ModNode.point_mass("Bob", "Steal", "L")])
    l_block = Block("L", steal_maid(variant, speed="fast"), [ModNode.point_mass("Alice", "PitchOut", "TL")])
    return NidModel(["Alice", "Bob"], [tl, l_block], "TL")


CANDIDATES = ("Alice", "Bob", "Carol")
COLLUDE = {"none": 0.2, "Bob": 0.3, "Carol": 0.5}


def _winner(votes: tuple[str, ...]) -> str:
    for c in CANDIDATES:
        if votes.count(c) >= 2:
            return c
    return "Alice"  # the incumbent keeps a three-way draw


def _voting_maid(fixed: str | None) -> Maid:
    doms = {"A": CANDIDATES, "B": CANDIDATES, "C": CANDIDATES}
    nodes: list = [DecisionNode("A", "Alice", CANDIDATES)]
    for name, owner in (("B", "Bob"), ("C", "Carol")):
        if fixed is None:
            nodes.append(DecisionNode(name, owner, CANDIDATES))
        else:
            nodes.append(ChanceNode(name, CANDIDATES, Cpd(name, (), [float(c == fixed) for c in CANDIDATES])))
    if fixed is None:
        nodes.append(ChanceNode("Collude", tuple(COLLUDE), Cpd("Collude", (), list(COLLUDE.values()))))

    def alice(v):
        w = _winner(v)
        return 2.0 if w == "Alice" else (1.0 if v[0] == w else 0.0)

    def rival(me):
        def f(v):
            w = _winner(v)
            return 2.0 if w == me else (-1.0 if w == "Alice" else 0.0)
        return f

    par = ("A", "B", "C")
    nodes += [UtilityNode.from_function("UA", "Alice", par, doms, alice),
              UtilityNode.from_function("UB", "Bob", par, doms, rival("Bob")),
              UtilityNode.from_function("UC", "Carol", par, doms, rival("Carol"))]
    return Maid(list(CANDIDATES), nodes)


def voting_nid() -> NidModel:
    """Alice suspects Bob and Carol of colluding behind one candidate."""
    doms = {"Collude": tuple(COLLUDE)}
    mb = ModNode.from_rows("Alice", "B", ("TL", "B", "C"), ("Collude",),
                           {("none",): (1, 0, 0), ("Bob",): (0, 1, 0), ("Carol",): (0, 0.1, 0.9)}, doms)
    mc = ModNode.from_rows("Alice", "C", ("TL", "B", "C"), ("Collude",),
                           {("none",): (1, 0, 0), ("Bob",): (0, 0.9, 0.1), ("Carol",): (0, 0, 1)}, doms)
    blocks = [Block("TL", _voting_maid(None), [mb, mc]),
              Block("B", _voting_maid("Bob")), Block("C", _voting_maid("Carol"))]
    return NidModel(list(CANDIDATES), blocks, "TL")


# --------------------------------------------------------------------------- small MAIDs


def rps_maid() -> Maid:
    ua = UtilityNode("UA", "Alice", ("A", "B"), RPS_PAYOFF.copy())
    ub = UtilityNode("UB", "Bob", ("A", "B"), -RPS_PAYOFF)
    return Maid(["Alice", "Bob"], [DecisionNode("A", "Alice", MOVES), DecisionNode("B", "Bob", MOVES), ua, ub])


def prisoners_dilemma_maid() -> Maid:
    acts = ("cooperate", "defect")
    row = np.array([[3.0, 0.0], [5.0, 1.0]])
    return Maid(["Row", "Col"], [
        DecisionNode("R", "Row", acts), DecisionNode("C", "Col", acts),
        UtilityNode("UR", "Row", ("R", "C"), row), UtilityNode("UC", "Col", ("R", "C"), row.T.copy()),
    ])


def umbrella_maid() -> Maid:
    """Single agent: pay 1 to look at a forecast, then decide on an umbrella."""
    weather = ChanceNode("Weather", ("rain", "sun"), Cpd("Weather", (), [0.3, 0.7]))
    forecast = ChanceNode("Forecast", ("wet", "dry"), Cpd("Forecast", ("Weather",), [[0.8, 0.2], [0.1, 0.9]]))
    obs_t = np.zeros((2, 2, 3))
    obs_t[0, 0, 0] = obs_t[0, 1, 1] = 1.0
    obs_t[1, :, 2] = 1.0
    seen = ChanceNode("Seen", ("wet", "dry", "unknown"), Cpd("Seen", ("Look", "Forecast"), obs_t))
    look = DecisionNode("Look", "Agent", ("yes", "no"))
    take = DecisionNode("Take", "Agent", ("yes", "no"), ("Look", "Seen"))
    cost = UtilityNode("Cost", "Agent", ("Look",), np.array([-1.0, 0.0]))
    comfort = UtilityNode("Comfort", "Agent", ("Take", "Weather"), np.array([[5.0, -2.0], [-10.0, 4.0]]))
    return Maid(["Agent"], [weather, forecast, look, seen, take, cost, comfort])


# --------------------------------------------------------------------------- Bayesian games


def matching_pennies_bg() -> BayesianGame:
    u = np.array([[1.0, -1.0], [-1.0, 1.0]])
    return BayesianGame(
        ["P1", "P2"], {"P1": ["t"], "P2": ["t"]}, {"P1": ["heads", "tails"], "P2": ["heads", "tails"]},
        {"P1": np.ones((1, 1)), "P2": np.ones((1, 1))},
        {"P1": u.reshape(1, 1, 2, 2), "P2": -u.reshape(1, 1, 2, 2)},
    )


def dominant_bg() -> BayesianGame:
    """P1's two types each have a dominant action; P2 best-responds to the type mix."""
    u1 = np.zeros((2, 1, 2, 2))
    u1[0, 0] = [[3, 3], [0, 0]]  # type lo prefers a
    u1[1, 0] = [[0, 0], [3, 3]]  # type hi prefers b
    u2 = np.zeros((2, 1, 2, 2))
    u2[:, 0] = [[2, 0], [0, 1]]  # P2 matches P1's action
    return BayesianGame(
        ["P1", "P2"], {"P1": ["lo", "hi"], "P2": ["only"]}, {"P1": ["a", "b"], "P2": ["x", "y"]},
        {"P1": np.ones((2, 1)), "P2": np.array([[0.3, 0.7]])}, {"P1": u1, "P2": u2},
    )


def random_bg(seed: int, n_types: int = 2, n_actions: int = 2, n_agents: int = 2) -> BayesianGame:
    rng = np.random.default_rng(seed)
    agents = [f"P{i + 1}" for i in range(n_agents)]
    types = {a: [f"t{k}" for k in range(n_types)] for a in agents}
    actions = {a: [f"c{k}" for k in range(n_actions)] for a in agents}
    beliefs = {}
    for a in agents:
        shape = (n_types,) + (n_types,) * (n_agents - 1)
        b = rng.dirichlet(np.ones(n_types ** (n_agents - 1)), size=n_types).reshape(shape)
        beliefs[a] = b
    shape = (n_types,) * n_agents + (n_actions,) * n_agents
    utilities = {a: np.round(rng.uniform(-5, 5, size=shape), 3) for a in agents}
    return BayesianGame(agents, types, actions, beliefs, utilities)


def random_network(seed: int, n_vars: int = 6, max_card: int = 3, max_parents: int = 3) -> Network:
    rng = np.random.default_rng(seed)
    variables, cpds, cards = [], [], []
    for i in range(n_vars):
        card = int(rng.integers(2, max_card + 1))
        k = int(rng.integers(0, min(i, max_parents) + 1))
        par = tuple(f"V{j}" for j in sorted(rng.choice(i, size=k, replace=False))) if k else ()
        shape = tuple(cards[int(p[1:])] for p in par)
        t = rng.dirichlet(np.ones(card) * 0.7, size=int(np.prod(shape, dtype=int))).reshape(shape + (card,))
        variables.append(Variable(f"V{i}", tuple(f"s{j}" for j in range(card))))
        cpds.append(Cpd(f"V{i}", par, t))
        cards.append(card)
    return Network(variables, cpds)


def random_maid(seed: int, n_agents: int = 2, n_chance: int = 2) -> Maid:
    """Small random MAID: binary chance nodes, one decision per agent observing a random subset."""
    rng = np.random.default_rng(seed)
    agents = [f"A{i}" for i in range(n_agents)]
    nodes: list = []
    names: list[str] = []
    dom = ("x", "y")
    for i in range(n_chance):
        par = tuple(p for p in names if rng.random() < 0.5)
        t = rng.dirichlet(np.ones(2), size=int(np.prod([2] * len(par)))).reshape((2,) * len(par) + (2,))
        nodes.append(ChanceNode(f"C{i}", dom, Cpd(f"C{i}", par, t)))
        names.append(f"C{i}")
    decs = []
    for a in agents:
        info = tuple(p for p in names if p.startswith("C") and rng.random() < 0.5)
        nodes.append(DecisionNode(f"D_{a}", a, dom, info))
        decs.append(f"D_{a}")
    for a in agents:
        par = tuple(decs) + tuple(p for p in names if rng.random() < 0.5)
        nodes.append(UtilityNode(f"U_{a}", a, par, np.round(rng.uniform(-3, 3, (2,) * len(par)), 2)))
    return Maid(agents, nodes)


def random_nid(seed: int, max_blocks: int = 4) -> NidModel:
    """Random valid NID over two agents with decisions D0, D1 (some blocks fix them as chance nodes)."""
    rng = np.random.default_rng(seed)
    agents = ["A0", "A1"]
    dom = ("x", "y")
    labels = [f"K{i}" for i in range(int(rng.integers(1, max_blocks + 1)))]
    for _ in range(100):
        blocks = []
        for k in labels:
            nodes: list = [ChanceNode("C0", dom, Cpd("C0", (), rng.dirichlet(np.ones(2))))]
            for i, a in enumerate(agents):
                d = f"D{i}"
                if k != labels[0] and rng.random() < 0.3:
                    nodes.append(ChanceNode(d, dom, Cpd(d, ("C0",), rng.dirichlet(np.ones(2), size=2))))
                else:
                    nodes.append(DecisionNode(d, a, dom, ("C0",) if rng.random() < 0.5 else ()))
            nodes.append(ChanceNode("C1", dom, Cpd("C1", ("D0", "D1"), rng.dirichlet(np.ones(2), size=(2, 2)))))
            for i, a in enumerate(agents):
                par = tuple(p for p in ("C0", "D0", "D1", "C1") if rng.random() < 0.6) or ("C1",)
                nodes.append(UtilityNode(f"U{i}", a, par, np.round(rng.uniform(-3, 3, (2,) * len(par)), 2)))
            maid = Maid(agents, nodes)
            mods = []
            for a in agents:
                for d in maid.decisions:
                    if rng.random() < 0.5:
                        continue
                    labs = tuple(lab for lab in labels if rng.random() < 0.6) or (k,)
                    if rng.random() < 0.5:
                        t = rng.dirichlet(np.ones(len(labs)), size=2)
                        t[rng.random(2) < 0.3] = np.eye(len(labs))[0]
                        mods.append(ModNode(a, d.name, labs, Cpd(f"Mod[{a},{d.name}]", ("C0",), t)))
                    else:
                        t = rng.dirichlet(np.ones(len(labs)))
                        mods.append(ModNode(a, d.name, labs, Cpd(f"Mod[{a},{d.name}]", (), t)))
            blocks.append(Block(k, maid, mods))
        n = NidModel(agents, blocks, labels[0])
        if not find_self_loops(n):
            return n
    raise RuntimeError("could not draw a NID without self-loops")


def fixture_nids(variant: str = "three") -> dict[str, NidModel]:
    return {
        "expert": expert_nid(variant),
        "marketing": marketing_nid(),
        "two-pitch": two_pitch_nid(variant),
        "runner-speed": runner_speed_nid(variant),
        "mutual-speed": mutual_speed_nid(variant),
        "voting": voting_nid(),
    }


def fixture_maids(variant: str = "three") -> dict[str, Maid]:
    return {
        "steal": steal_maid(variant),
        "rps": rps_maid(),
        "prisoners-dilemma": prisoners_dilemma_maid(),
        "umbrella": umbrella_maid(),
    }

