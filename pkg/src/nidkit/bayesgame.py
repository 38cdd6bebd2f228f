"""Explicit Bayesian games: validation, direct Bayes-Nash solving, conversion to a NID, equivalence checks."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .bayesnet import Cpd, ROW_TOL, ValidationReport
from .games import bimatrix_equilibria, damped_dynamics, pure_equilibria
from .maid import ChanceNode, DecisionNode, Maid, Strategy, UtilityNode
from .nid import Block, ModNode, NidModel, mod_name, solve_nid
from .solver import NoEquilibriumFound, SizeError, SolverConfig, verify_epsilon_nash

TypeStrategy = dict  # (agent, type) -> probability vector over the agent's actions


@dataclass
class BayesianGame:
    agents: list[str]
    types: dict[str, list[str]]
    actions: dict[str, list[str]]
    # beliefs[i][k] is p_i(. | k-th type of i), shaped by the other agents' type counts in agent order
    beliefs: dict[str, np.ndarray]
    # utilities[i] has shape (type counts of all agents) + (action counts of all agents)
    utilities: dict[str, np.ndarray]

    def others(self, i: str) -> list[str]:
        return [j for j in self.agents if j != i]

    def type_shape(self) -> tuple[int, ...]:
        return tuple(len(self.types[a]) for a in self.agents)

    def action_shape(self) -> tuple[int, ...]:
        return tuple(len(self.actions[a]) for a in self.agents)

    def __eq__(self, other):
        if not isinstance(other, BayesianGame):
            return NotImplemented
        return (self.agents == other.agents and self.types == other.types and self.actions == other.actions
                and all(np.array_equal(self.beliefs[a], other.beliefs[a]) for a in self.agents)
                and all(np.array_equal(self.utilities[a], other.utilities[a], equal_nan=True)
                        for a in self.agents))


def validate_bg(g: BayesianGame) -> ValidationReport:
    rep = ValidationReport()
    if len(set(g.agents)) != len(g.agents):
        rep.add("duplicate agent names")
    for a in g.agents:
        if not g.types.get(a):
            rep.add(f"agent {a}: no types")
        if not g.actions.get(a):
            rep.add(f"agent {a}: no actions")
    if not rep.ok:
        return rep
    for i in g.agents:
        want = (len(g.types[i]),) + tuple(len(g.types[j]) for j in g.others(i))
        b = np.asarray(g.beliefs.get(i, np.zeros(0)))
        if b.shape != want:
            rep.add(f"beliefs of {i}: shape {b.shape} != {want}")
            continue
        for k, t in enumerate(g.types[i]):
            row = b[k]
            if np.any(row < 0) or np.any(row > 1) or abs(row.sum() - 1.0) > ROW_TOL:
                rep.add(f"belief row ({i}, {t}) sums to {row.sum():.6g}")
        u = np.asarray(g.utilities.get(i, np.zeros(0)), float)
        shape = g.type_shape() + g.action_shape()
        if u.shape != shape:
            rep.add(f"utility of {i}: shape {u.shape} != {shape}")
            continue
        for idx in zip(*np.nonzero(np.isnan(u))):
            n = len(g.agents)
            t = tuple(g.types[a][x] for a, x in zip(g.agents, idx[:n]))
            c = tuple(g.actions[a][x] for a, x in zip(g.agents, idx[n:]))
            rep.add(f"utility of {i}: missing cell types={t} actions={c}")
    return rep


# --------------------------------------------------------------------------- Bayes-Nash conditions


def interim_values(g: BayesianGame, sigma: TypeStrategy, i: str, k: int) -> np.ndarray:
    """Expected utility of each action of agent i at its k-th type against sigma."""
    pos = g.agents.index(i)
    others = g.others(i)
    out = np.zeros(len(g.actions[i]))
    u = g.utilities[i]
    for t_other in itertools.product(*[range(len(g.types[j])) for j in others]):
        p = g.beliefs[i][(k,) + t_other]
        if p == 0:
            continue
        t_full = list(t_other)
        t_full.insert(pos, k)
        ut = u[tuple(t_full)]  # shape = action counts
        # contract every other agent's action axis with its mixed strategy
        for j, tj in sorted(zip(others, t_other), key=lambda x: -g.agents.index(x[0])):
            ax = g.agents.index(j)
            ut = np.tensordot(ut, sigma[(j, g.types[j][tj])], axes=([ax], [0]))
            ut = np.expand_dims(ut, ax)
        out += p * ut.reshape(-1)
    return out


def bg_regret(g: BayesianGame, sigma: TypeStrategy) -> dict[tuple[str, str], float]:
    out = {}
    for i in g.agents:
        for k, t in enumerate(g.types[i]):
            v = interim_values(g, sigma, i, k)
            out[(i, t)] = float(v.max() - v @ sigma[(i, t)])
    return out


@dataclass
class BgSolution:
    strategy: TypeStrategy
    regret: dict[tuple[str, str], float]
    method_used: str
    converged: bool

    @property
    def max_regret(self) -> float:
        return max(self.regret.values(), default=0.0)


def _maps(g: BayesianGame, i: str) -> list[tuple[int, ...]]:
    return list(itertools.product(range(len(g.actions[i])), repeat=len(g.types[i])))


def _map_form(g: BayesianGame, cap: int) -> tuple[list[np.ndarray], list[list[tuple[int, ...]]]]:
    """Payoff tensors over type-contingent pure maps; each type's objective is additive."""
    maps = [_maps(g, i) for i in g.agents]
    size = int(np.prod([len(m) for m in maps])) * len(g.agents)
    if size > cap:
        raise SizeError(f"map form has {size} entries (cap {cap})")
    shape = tuple(len(m) for m in maps)
    tensors = []
    for i in g.agents:
        pos = g.agents.index(i)
        T = np.zeros(shape)
        for prof in np.ndindex(*shape):
            total = 0.0
            for k in range(len(g.types[i])):
                for t_full in itertools.product(*[range(len(g.types[a])) for a in g.agents]):
                    if t_full[pos] != k:
                        continue
                    t_other = tuple(t for a, t in zip(g.agents, t_full) if a != i)
                    p = g.beliefs[i][(k,) + t_other]
                    if p == 0:
                        continue
                    acts = tuple(maps[a][prof[a]][t_full[a]] for a in range(len(g.agents)))
                    total += p * g.utilities[i][tuple(t_full) + acts]
            T[prof] = total
        tensors.append(T)
    return tensors, maps


def _marginals(g: BayesianGame, maps, mixes) -> TypeStrategy:
    out = {}
    for a, (i, mx) in enumerate(zip(g.agents, mixes)):
        for k, t in enumerate(g.types[i]):
            v = np.zeros(len(g.actions[i]))
            for w, mp in zip(mx, maps[a]):
                v[mp[k]] += w
            out[(i, t)] = v / v.sum()
    return out


def solve_bg_direct(g: BayesianGame, cfg: SolverConfig | None = None) -> BgSolution:
    cfg = cfg or SolverConfig()
    rep = validate_bg(g)
    if not rep.ok:
        raise ValueError("invalid Bayesian game: " + "; ".join(rep.violations))
    tensors, maps = _map_form(g, cfg.max_agent_form_entries)
    sizes = [len(m) for m in maps]
    best = (np.inf, None, "")

    def candidates():
        if len(tensors) == 2 and cfg.method != "best-response-dynamics":
            for x, y, label in bimatrix_equilibria(tensors[0], tensors[1], cfg.max_support_pairs):
                yield [x, y], label
        if cfg.method != "best-response-dynamics":
            for prof in pure_equilibria(tensors):
                yield [np.eye(s)[i] for s, i in zip(sizes, prof)], "pure-search"
        rng = np.random.default_rng(cfg.seed)
        for r in range(max(1, cfg.restarts)):
            init = [np.full(s, 1.0 / s) if r == 0 else rng.dirichlet(np.ones(s)) for s in sizes]
            yield damped_dynamics(tensors, init, cfg.max_iterations, tol=cfg.epsilon / 10), "best-response-dynamics"

    for mixes, label in candidates():
        sigma = _marginals(g, maps, mixes)
        reg = bg_regret(g, sigma)
        worst = max(reg.values())
        if worst < best[0]:
            best = (worst, (sigma, reg), label)
        if worst <= cfg.epsilon:
            return BgSolution(sigma, reg, label, True)
    raise NoEquilibriumFound("Bayesian game", best[0])


# --------------------------------------------------------------------------- conversion to a NID


def block_label(agent: str, type_: str) -> str:
    return f"{agent}.{type_}"


def decision_name(agent: str) -> str:
    return f"D_{agent}"


def utility_name(agent: str) -> str:
    return f"U_{agent}"


def belief_name(agent: str) -> str:
    return f"Q_{agent}"


def convert_bg_to_nid(g: BayesianGame) -> tuple[NidModel, dict[tuple[str, str], tuple[str, str]]]:
    """One block per type; the first declared action is each agent's distinguished action."""
    blocks = []
    mapping = {}
    for i in g.agents:
        others = g.others(i)
        q = belief_name(i)
        q_dom = tuple("|".join(g.types[j][x] for j, x in zip(others, idx))
                      for idx in itertools.product(*[range(len(g.types[j])) for j in others]))
        if not others:
            q_dom = ("-",)
        for k, t in enumerate(g.types[i]):
            nodes = []
            for j in g.agents:
                nodes.append(DecisionNode(decision_name(j), j, tuple(g.actions[j])))
            nodes.append(ChanceNode(q, q_dom, Cpd(q, (), np.asarray(g.beliefs[i][k], float).reshape(-1))))
            u_parents = tuple(decision_name(j) for j in g.agents) + (q,)
            u_i = np.zeros(g.action_shape() + (len(q_dom),))
            for qi, idx in enumerate(itertools.product(*[range(len(g.types[j])) for j in others])):
                t_full = list(idx)
                t_full.insert(g.agents.index(i), k)
                u_i[..., qi] = g.utilities[i][tuple(t_full)]
            nodes.append(UtilityNode(utility_name(i), i, u_parents, u_i))
            for j in others:
                tab = np.zeros(len(g.actions[j]))
                tab[0] = 1.0
                nodes.append(UtilityNode(utility_name(j), j, (decision_name(j),), tab))
            maid = Maid(g.agents, nodes)
            mods = []
            for oi, j in enumerate(others):
                labels = tuple(block_label(j, tj) for tj in g.types[j])
                table = np.zeros((len(q_dom), len(labels)))
                for qi, idx in enumerate(itertools.product(*[range(len(g.types[x])) for x in others])):
                    table[qi, idx[oi]] = 1.0
                mods.append(ModNode(i, decision_name(j), labels, Cpd(mod_name(i, decision_name(j)), (q,), table)))
            label = block_label(i, t)
            blocks.append(Block(label, maid, mods, g.agents))
            mapping[(i, t)] = (label, i)
    root = blocks[0].label
    return NidModel(g.agents, blocks, root), mapping


# --------------------------------------------------------------------------- equivalence


@dataclass
class EquivalenceReport:
    per_type_deviation: dict[tuple[str, str], float]
    theta_phi_deviation: float
    nid_profile_bg_regret: float
    bg_profile_maid_regret: float
    tolerance: float
    direct: BgSolution
    nid_theta: TypeStrategy = field(repr=False)

    @property
    def max_deviation(self) -> float:
        return max(self.per_type_deviation.values(), default=0.0)

    @property
    def strategies_match(self) -> bool:
        return self.max_deviation <= self.tolerance and self.theta_phi_deviation <= self.tolerance

    @property
    def cross_valid(self) -> bool:
        return self.nid_profile_bg_regret <= self.tolerance and self.bg_profile_maid_regret <= self.tolerance


def check_equivalence(g: BayesianGame, n: NidModel, f: dict, cfg: SolverConfig | None = None,
                      tolerance: float = 1e-6) -> EquivalenceReport:
    cfg = cfg or SolverConfig()
    direct = solve_bg_direct(g, cfg)
    eq = solve_nid(n, cfg)
    dev, tp = {}, 0.0
    tau = {}
    for (i, t), (label, agent) in f.items():
        d = decision_name(agent)
        th = eq.theta[(label, d)].table.reshape(-1)
        ph = eq.phi[(label, d)].table.reshape(-1)
        sg = direct.strategy[(i, t)]
        tau[(i, t)] = th
        dev[(i, t)] = float(max(np.abs(th - sg).max(), np.abs(ph - sg).max()))
        tp = max(tp, float(np.abs(th - ph).max()))
    nid_regret = max(bg_regret(g, tau).values())
    # the direct solution embedded in the compiled MAID, distinguished actions elsewhere
    c = eq.compiled
    prof = {}
    for name, s in eq.maid_report.profile.items():
        info = c.name_map[name]
        block, dec = info["block"], info["source"]
        owner_types = [(i, t) for (i, t), (lab, _) in f.items() if lab == block and decision_name(i) == dec]
        if owner_types:
            table = direct.strategy[owner_types[0]].reshape(s.table.shape)
        else:
            table = np.zeros_like(s.table)
            table[..., 0] = 1.0
        prof[name] = Strategy(s.decision, s.info_parents, s.info_domains, s.domain, table)
    maid_regret = verify_epsilon_nash(c.maid, prof, tolerance).max_regret
    return EquivalenceReport(dev, tp, nid_regret, maid_regret, tolerance, direct, tau)


__all__ = [
    "BayesianGame", "BgSolution", "EquivalenceReport", "TypeStrategy", "validate_bg", "solve_bg_direct",
    "convert_bg_to_nid", "check_equivalence", "bg_regret", "interim_values", "block_label",
]
