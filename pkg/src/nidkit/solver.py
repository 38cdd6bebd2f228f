"""Equilibrium computation and verification for MAIDs."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from math import prod
from typing import Mapping

import networkx as nx
import numpy as np

from .games import (
    bimatrix_equilibria,
    damped_dynamics,
    nplayer_support_enumeration,
    pure_equilibria,
    tensor_regret,
)
from .maid import (
    Maid,
    TIE_TOL,
    Strategy,
    action_values,
    fast_expected_utility,
    group_best_response,
    profile_factors,
    reach_mass,
    uniform_profile,
    utility_mass,
    validate_maid,
)

METHODS = ("auto", "backward-induction", "support-enumeration", "best-response-dynamics")


class SolverError(RuntimeError):
    pass


class SizeError(SolverError):
    pass


class NoEquilibriumFound(SolverError):
    def __init__(self, msg: str, best_regret: float, report: "EquilibriumReport | None" = None):
        super().__init__(f"{msg} (best regret {best_regret:.3g})")
        self.best_regret = best_regret
        self.report = report


@dataclass(frozen=True)
class SolverConfig:
    epsilon: float = 1e-6
    max_iterations: int = 2000
    restarts: int = 5
    seed: int = 0
    method: str = "auto"
    max_agent_form_entries: int = 10**6
    max_support_pairs: int = 20000

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}; expected one of {METHODS}")


@dataclass
class EquilibriumReport:
    profile: dict[str, Strategy]
    per_decision_regret: dict[str, float]
    method_used: str
    converged: bool
    epsilon: float = 1e-6
    group_regret: dict[str, float] = field(default_factory=dict)

    @property
    def max_regret(self) -> float:
        return max(self.per_decision_regret.values(), default=0.0)


def policy_count(m: Maid, decision: str) -> int:
    """Number of pure decision rules: |domain| ** (number of info assignments)."""
    d = m.nodes[decision]
    doms = m.domains
    return len(d.domain) ** prod(len(doms[p]) for p in d.info_parents)


# --------------------------------------------------------------------------- verification


def group_regret(m: Maid, p: Mapping[str, Strategy], group: str) -> float:
    owner = m.group_owner(group)
    dev = {**p, **group_best_response(m, p, group)}
    return max(0.0, fast_expected_utility(m, dev, owner) - fast_expected_utility(m, p, owner))


def verify_epsilon_nash(m: Maid, p: Mapping[str, Strategy], epsilon: float) -> EquilibriumReport:
    """Regret of every decision, measured over joint deviations of its whole recall group."""
    per_group = {g: group_regret(m, p, g) for g in m.groups()}
    per_decision = {}
    for g, decs in m.groups().items():
        for d in decs:
            per_decision[d] = per_group[g]
    worst = max(per_decision.values(), default=0.0)
    return EquilibriumReport(dict(p), per_decision, "verify", worst <= epsilon, epsilon, per_group)


# --------------------------------------------------------------------------- relevance


def relevance_graph(m: Maid) -> nx.DiGraph:
    """Edge H -> G when some decision of group H can influence what group G should do."""
    eg = nx.DiGraph()
    eg.add_nodes_from(m.nodes)
    for n in m.nodes:
        for par in m.effective_parents(n):
            eg.add_edge(par, n)
    groups = m.groups()
    rg = nx.DiGraph()
    rg.add_nodes_from(groups)
    where = {d: g for g, decs in groups.items() for d in decs}
    for g, decs in groups.items():
        owner = m.group_owner(g)
        desc = set()
        for d in decs:
            desc |= nx.descendants(eg, d)
        targets = {u.name for u in m.utilities_of(owner) if u.name in desc}
        for d in decs:
            targets |= set(m.nodes[d].info_parents)
        anc = set(targets)
        for t in targets:
            anc |= nx.ancestors(eg, t)
        for h in {where[x] for x in anc if x in where}:
            if h != g:
                rg.add_edge(h, g)
    return rg


def solve_order(m: Maid) -> list[list[str]]:
    """Strongly connected components of the relevance graph, dependencies first."""
    rg = relevance_graph(m)
    # groups rank by where their first decision is declared, so renaming nodes keeps the order
    pos = {n: i for i, n in enumerate(m.nodes)}
    rank = {g: min(pos[d] for d in ds) for g, ds in m.groups().items()}
    cond = nx.condensation(rg)
    comps = {c: sorted(cond.nodes[c]["members"], key=rank.get) for c in cond}
    order = nx.lexicographical_topological_sort(cond, key=lambda c: rank[comps[c][0]])
    return [comps[c] for c in order]


# --------------------------------------------------------------------------- agent form


class _AgentForm:
    """Reduced pure plans for a set of recall groups, evaluated through a payoff factor.

    Variables observed by every free decision split the form into independent slices.
    """

    def __init__(self, m: Maid, profile: Mapping[str, Strategy], groups: list[str]):
        self.m = m
        self.groups = groups
        self.decs = [d for g in groups for d in m.groups()[g]]
        doms = m.domains
        unif = profile_factors(m, profile, uniform=self.decs)
        infos = [m.nodes[d].info_parents for d in self.decs]
        self.common = tuple(v for v in infos[0] if all(v in i for i in infos[1:]))
        self.reach = {}
        self.info_grid = {}
        for d in self.decs:
            info = m.nodes[d].info_parents
            self.reach[d] = reach_mass(m, unif, info).values.reshape(-1) > 0
            cards = [len(doms[v]) for v in info]
            self.info_grid[d] = np.indices(cards).reshape(len(cards), -1) if cards else np.zeros((0, 1), int)
        scope: list[str] = []
        for d in self.decs:
            for v in m.nodes[d].info_parents + (d,):
                if v not in scope:
                    scope.append(v)
        self.scope = tuple(scope)
        shape = [len(doms[v]) for v in scope]
        grid = np.indices(shape).reshape(len(shape), -1)
        self.h_of = {}
        self.a_of = {}
        for d in self.decs:
            info = m.nodes[d].info_parents
            cards = [len(doms[v]) for v in info]
            idx = [grid[scope.index(v)] for v in info]
            self.h_of[d] = np.ravel_multi_index(idx, cards) if info else np.zeros(grid.shape[1], int)
            self.a_of[d] = grid[scope.index(d)]
        self.n_s = grid.shape[1]
        self.cons = {g: [self._constraints(m.groups()[g], j) for j in range(len(m.groups()[g]))]
                     for g in groups}
        self.free_factors = profile_factors(m, profile, free=self.decs)

    def slices(self):
        doms = self.m.domains
        return list(itertools.product(*[range(len(doms[v])) for v in self.common]))

    def _live(self, d: str, fix: tuple[int, ...]) -> np.ndarray:
        mask = self.reach[d].copy()
        info = self.m.nodes[d].info_parents
        for v, val in zip(self.common, fix):
            mask &= self.info_grid[d][info.index(v)] == val
        return mask

    def _constraints(self, decs: list[str], j: int) -> list[list[tuple[int, int, int]]]:
        """Per flat info assignment of decs[j]: (earlier index, earlier info flat, observed action)."""
        m, doms = self.m, self.m.domains
        dj = m.nodes[decs[j]]
        cards = [len(doms[v]) for v in dj.info_parents]
        out = []
        for h in np.ndindex(*cards):
            cons = []
            for i in range(j):
                di = m.nodes[decs[i]]
                pos = [dj.info_parents.index(v) for v in di.info_parents if v in dj.info_parents]
                if len(pos) != len(di.info_parents):
                    continue
                seen = decs[i] if decs[i] in dj.info_parents else di.observed_as
                if seen not in dj.info_parents:
                    continue
                hi = np.ravel_multi_index([h[k] for k in pos], [len(doms[v]) for v in di.info_parents]) \
                    if pos else 0
                cons.append((i, int(hi), h[dj.info_parents.index(seen)]))
            out.append(cons)
        return out

    def plans(self, g: str, fix: tuple[int, ...], cap: int) -> list[tuple[dict[int, int], ...]]:
        decs = self.m.groups()[g]
        plans: list[tuple[dict[int, int], ...]] = [()]
        for j, d in enumerate(decs):
            n_act = len(self.m.nodes[d].domain)
            live_all = np.flatnonzero(self._live(d, fix))
            nxt = []
            for partial in plans:
                live = [int(h) for h in live_all
                        if all(partial[i].get(hi) == a for i, hi, a in self.cons[g][j][h])]
                for acts in itertools.product(range(n_act), repeat=len(live)):
                    nxt.append(partial + (dict(zip(live, acts)),))
                    if len(nxt) > cap:
                        raise SizeError(f"group {g}: more than {cap} reduced plans")
            plans = nxt
        return plans

    def indicator(self, g: str, plans) -> np.ndarray:
        ind = np.ones((len(plans), self.n_s), dtype=bool)
        for j, d in enumerate(self.m.groups()[g]):
            tab = np.full((len(plans), int(self.reach[d].size)), -1)
            for k, plan in enumerate(plans):
                for h, a in plan[j].items():
                    tab[k, h] = a
            ind &= tab[:, self.h_of[d]] == self.a_of[d]
        return ind

    def payoff_factor(self, owner: str) -> np.ndarray:
        return utility_mass(self.m, self.free_factors, owner, self.scope).values.reshape(-1)

    def accumulate(self, g: str, plans, mu: np.ndarray, acc: dict[str, np.ndarray]):
        """Add the mixture's action weights per info assignment into ``acc``."""
        for j, d in enumerate(self.m.groups()[g]):
            if d not in acc:
                acc[d] = np.zeros((int(self.reach[d].size), len(self.m.nodes[d].domain)))
            for w, plan in zip(mu, plans):
                if w > 0:
                    for h, a in plan[j].items():
                        acc[d][h, a] += w

    def strategies(self, acc: dict[str, np.ndarray]) -> dict[str, Strategy]:
        m = self.m
        out = {}
        for d in self.decs:
            num = acc.get(d, np.zeros((int(self.reach[d].size), len(m.nodes[d].domain))))
            den = num.sum(axis=1)
            table = np.zeros_like(num)
            for h in range(num.shape[0]):
                if den[h] > 1e-12:
                    table[h] = num[h] / den[h]
                else:
                    table[h, 0] = 1.0
            dn = m.nodes[d]
            shape = tuple(len(m.domains[v]) for v in dn.info_parents) + (len(dn.domain),)
            out[d] = Strategy.for_decision(m, d, table.reshape(shape))
        return out


def _players(m: Maid, groups: list[str]) -> list[list[str]]:
    if len(groups) == 2:
        return [[g] for g in groups]
    by_owner: dict[str, list[str]] = {}
    for g in groups:
        by_owner.setdefault(m.group_owner(g), []).append(g)
    return list(by_owner.values())


def _slice_equilibria(tensors, sizes, cfg: SolverConfig, tol: float):
    """Candidate mixed profiles for one agent-form slice, in deterministic order."""
    n = len(tensors)
    if n == 2 and cfg.method != "best-response-dynamics":
        for x, y, label in bimatrix_equilibria(tensors[0], tensors[1], cfg.max_support_pairs):
            yield [x, y], label
        return
    if cfg.method != "best-response-dynamics":
        for prof in pure_equilibria(tensors):
            yield [np.eye(s)[i] for s, i in zip(sizes, prof)], "pure-search"
        for i, j in itertools.combinations(range(n), 2):
            rest = [k for k in range(n) if k not in (i, j)]
            for pure in itertools.product(*[range(sizes[k]) for k in rest]):
                sl = [slice(None)] * n
                for k, a in zip(rest, pure):
                    sl[k] = a
                for x, y, _ in bimatrix_equilibria(tensors[i][tuple(sl)], tensors[j][tuple(sl)],
                                                   cfg.max_support_pairs):
                    mixes = [np.eye(sizes[k])[pure[rest.index(k)]] if k in rest else None for k in range(n)]
                    mixes[i], mixes[j] = x, y
                    if tensor_regret(tensors, mixes) <= tol:
                        yield mixes, "pairwise-search"
        for mixes in nplayer_support_enumeration(tensors, tol, cfg.max_support_pairs, seed=cfg.seed):
            yield mixes, "support-enumeration"
    rng = np.random.default_rng(cfg.seed)
    for r in range(max(1, cfg.restarts)):
        init = [np.full(s, 1.0 / s) if r == 0 else rng.dirichlet(np.ones(s)) for s in sizes]
        yield damped_dynamics(tensors, init, cfg.max_iterations, tol=tol / 10), "best-response-dynamics"


def _component_regret(m: Maid, p, groups) -> float:
    return max(group_regret(m, p, g) for g in groups)


def _solve_component(m: Maid, profile: dict, groups: list[str], cfg: SolverConfig) -> tuple[dict, str]:
    players = _players(m, groups)
    af = _AgentForm(m, profile, groups)
    factors = [af.payoff_factor(m.group_owner(pl[0])) for pl in players]
    slices = af.slices()
    tol = cfg.epsilon / (2 * len(slices))
    acc: dict[str, np.ndarray] = {}
    labels: list[str] = []
    letters = "abcdefghijklmnopqrstuvwxy"
    subscripts = ",".join(f"{letters[i]}z" for i in range(len(players))) + ",z->" + letters[:len(players)]
    for fix in slices:
        group_plans = {g: af.plans(g, fix, cfg.max_agent_form_entries) for g in groups}
        inds, counts = [], []
        for pl in players:
            cnt = [len(group_plans[g]) for g in pl]
            ind = af.indicator(pl[0], group_plans[pl[0]])
            for g in pl[1:]:
                ind = (ind[:, None, :] & af.indicator(g, group_plans[g])[None, :, :]).reshape(-1, af.n_s)
            inds.append(ind.astype(float))
            counts.append(cnt)
        sizes = [ind.shape[0] for ind in inds]
        entries = prod(sizes) * len(players)
        if entries > cfg.max_agent_form_entries:
            raise SizeError(f"agent form for {groups} has {entries} entries (cap {cfg.max_agent_form_entries})")
        tensors = [np.einsum(subscripts, *inds, F) for F in factors]
        best = (np.inf, None, "")
        for mixes, label in _slice_equilibria(tensors, sizes, cfg, tol):
            r = tensor_regret(tensors, mixes)
            if r < best[0]:
                best = (r, mixes, label)
            if r <= tol:
                break
        if best[0] > tol:
            raise NoEquilibriumFound(f"component {groups}", best[0])
        for pl, cnt, x in zip(players, counts, best[1]):
            x = np.asarray(x).reshape(cnt)
            for k, g in enumerate(pl):
                axes = tuple(i for i in range(len(cnt)) if i != k)
                af.accumulate(g, group_plans[g], x.sum(axis=axes) if axes else x, acc)
        if best[2] not in labels:
            labels.append(best[2])
    out = {**profile, **af.strategies(acc)}
    r = _component_regret(m, out, groups)
    if r > cfg.epsilon:
        raise NoEquilibriumFound(f"component {groups}", r)
    return out, "+".join(labels)


def _fill_unreached(m: Maid, profile: dict, groups: list[str]) -> dict:
    """Replace rows the profile never reaches by backward-induction choices.

    Plans found in reduced form leave off-path rows at action 0; those rows carry no
    probability, so rewriting them changes no expected utility and no regret.
    """
    out = dict(profile)
    for g in groups:
        decs = m.groups()[g]
        for j in range(len(decs) - 1, -1, -1):
            d = decs[j]
            w, _ = action_values(m, out, d)
            if (w > 0).all():
                continue
            _, q = action_values(m, out, d, uniform=decs[:j])
            table = out[d].table.copy()
            for idx in zip(*np.nonzero(w <= 0)):
                row = q[idx]
                if not np.isnan(row).any():
                    top = row.max()
                    best = int(np.flatnonzero(row >= top - TIE_TOL * max(1.0, abs(top)))[0])
                    table[idx] = np.eye(len(row))[best]
            out[d] = Strategy.for_decision(m, d, table)
    return out


def solve_maid(m: Maid, cfg: SolverConfig | None = None) -> EquilibriumReport:
    cfg = cfg or SolverConfig()
    rep = validate_maid(m)
    if not rep.ok:
        raise ValueError("invalid MAID: " + "; ".join(rep.violations))
    profile = uniform_profile(m)
    used: list[str] = []
    for comp in solve_order(m):
        if len(comp) == 1:
            profile.update(group_best_response(m, profile, comp[0]))
            label = "backward-induction"
        else:
            if cfg.method == "backward-induction":
                raise SolverError(f"groups {comp} act simultaneously; backward induction does not apply")
            new, label = _solve_component(m, profile, comp, cfg)
            profile = _fill_unreached(m, new, comp)
        if label not in used:
            used.append(label)
    report = verify_epsilon_nash(m, profile, cfg.epsilon)
    report.method_used = "+".join(used) or "trivial"
    if not report.converged:
        raise NoEquilibriumFound("final verification failed", report.max_regret, report)
    return report


__all__ = [
    "SolverConfig", "EquilibriumReport", "SolverError", "SizeError", "NoEquilibriumFound",
    "solve_maid", "verify_epsilon_nash", "policy_count", "relevance_graph", "solve_order", "group_regret",
]
