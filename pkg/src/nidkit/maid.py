"""Multi-agent influence diagrams: nodes, strategies, expected utility and best responses."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import networkx as nx
import numpy as np

from .bayesnet import (
    Cpd,
    Factor,
    InconsistentEvidenceError,
    Network,
    ValidationReport,
    Variable,
    _check_table,
    eliminate,
    query_marginal,
    relevant_ancestors,
    restrict,
)

TIE_TOL = 1e-9


class IncompleteProfileError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class ChanceNode:
    name: str
    domain: tuple[str, ...]
    cpd: Cpd

    @property
    def parents(self) -> tuple[str, ...]:
        return self.cpd.parents

    def __eq__(self, other):
        return (isinstance(other, ChanceNode) and self.name == other.name
                and tuple(self.domain) == tuple(other.domain) and self.cpd == other.cpd)


@dataclass(frozen=True)
class DecisionNode:
    name: str
    owner: str
    domain: tuple[str, ...]
    info_parents: tuple[str, ...] = ()
    # recall group (defaults to the owner); decisions of one group must satisfy perfect recall
    group: str | None = None
    # chance node that later decisions of the group observe in place of this decision
    observed_as: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "domain", tuple(self.domain))
        object.__setattr__(self, "info_parents", tuple(self.info_parents))

    @property
    def parents(self) -> tuple[str, ...]:
        return self.info_parents


@dataclass(frozen=True, eq=False)
class UtilityNode:
    name: str
    owner: str
    parents: tuple[str, ...]
    table: np.ndarray  # shape = parent cards; NaN marks a missing entry

    @classmethod
    def from_rows(cls, name, owner, parents, rows: Mapping[tuple, float], domains) -> "UtilityNode":
        parents = tuple(parents)
        table = np.full(tuple(len(domains[p]) for p in parents), np.nan)
        for key, val in rows.items():
            key = (key,) if isinstance(key, str) else tuple(key)
            table[tuple(list(domains[p]).index(v) for p, v in zip(parents, key, strict=True))] = val
        return cls(name, owner, parents, table)

    @classmethod
    def from_function(cls, name, owner, parents, domains, fn) -> "UtilityNode":
        parents = tuple(parents)
        shape = tuple(len(domains[p]) for p in parents)
        table = np.zeros(shape)
        for idx in np.ndindex(*shape):
            table[idx] = fn(tuple(domains[p][i] for p, i in zip(parents, idx)))
        return cls(name, owner, parents, table)

    def rows(self, domains) -> dict[tuple, float]:
        return {
            tuple(domains[p][i] for p, i in zip(self.parents, idx)): float(self.table[idx])
            for idx in np.ndindex(*self.table.shape)
        }

    def __eq__(self, other):
        return (isinstance(other, UtilityNode) and self.name == other.name and self.owner == other.owner
                and self.parents == other.parents
                and np.array_equal(self.table, other.table, equal_nan=True))


Node = ChanceNode | DecisionNode | UtilityNode


class Maid:
    def __init__(self, agents: Iterable[str], nodes: Iterable[Node]):
        self.agents = list(agents)
        nodes = list(nodes)
        self.nodes: dict[str, Node] = {n.name: n for n in nodes}
        self.duplicate_names = sorted({n.name for n in nodes if sum(m.name == n.name for m in nodes) > 1})
        self._cache: dict = {}

    # ---- views
    @property
    def chance(self) -> list[ChanceNode]:
        return [n for n in self.nodes.values() if isinstance(n, ChanceNode)]

    @property
    def decisions(self) -> list[DecisionNode]:
        return [n for n in self.nodes.values() if isinstance(n, DecisionNode)]

    @property
    def utilities(self) -> list[UtilityNode]:
        return [n for n in self.nodes.values() if isinstance(n, UtilityNode)]

    @property
    def domains(self) -> dict[str, tuple[str, ...]]:
        return {n.name: tuple(n.domain) for n in self.nodes.values() if not isinstance(n, UtilityNode)}

    def utilities_of(self, agent: str) -> list[UtilityNode]:
        return [u for u in self.utilities if u.owner == agent]

    def parents(self, name: str) -> tuple[str, ...]:
        return tuple(self.nodes[name].parents)

    def parent_map(self) -> dict[str, tuple[str, ...]]:
        return {n: tuple(v.parents) for n, v in self.nodes.items()}

    def graph(self) -> nx.DiGraph:
        g = nx.DiGraph()
        g.add_nodes_from(self.nodes)
        for n in self.nodes.values():
            for p in n.parents:
                g.add_edge(p, n.name)
        return g

    def group_of(self, decision: str) -> str:
        d = self.nodes[decision]
        return d.group or d.owner

    def groups(self) -> dict[str, list[str]]:
        """Recall groups with their decisions in topological order."""
        if "groups" not in self._cache:
            order = {n: i for i, n in enumerate(nx.lexicographical_topological_sort(self.graph()))}
            out: dict[str, list[str]] = {}
            for d in sorted(self.decisions, key=lambda d: order[d.name]):
                out.setdefault(self.group_of(d.name), []).append(d.name)
            self._cache["groups"] = out
        return self._cache["groups"]

    def group_owner(self, group: str) -> str:
        return self.nodes[self.groups()[group][0]].owner

    def effective_parents(self, name: str) -> tuple[str, ...]:
        """Parents whose value can change the node's distribution (inert multiplexer inputs dropped)."""
        node = self.nodes[name]
        if not isinstance(node, ChanceNode):
            return tuple(node.parents)
        key = ("eff", name)
        if key not in self._cache:
            t = node.cpd.table
            keep = []
            for ax, p in enumerate(node.parents):
                first = np.take(t, [0], axis=ax)
                if not np.allclose(t, first, atol=0, rtol=0, equal_nan=True):
                    keep.append(p)
            self._cache[key] = tuple(keep)
        return self._cache[key]

    def __eq__(self, other):
        if not isinstance(other, Maid):
            return NotImplemented
        return self.agents == other.agents and list(self.nodes.values()) == list(other.nodes.values())


# --------------------------------------------------------------------------- strategies


@dataclass(frozen=True, eq=False)
class Strategy:
    decision: str
    info_parents: tuple[str, ...]
    info_domains: tuple[tuple[str, ...], ...]
    domain: tuple[str, ...]
    table: np.ndarray  # shape = info cards + (len(domain),)

    @classmethod
    def for_decision(cls, m: Maid, decision: str, table) -> "Strategy":
        d = m.nodes[decision]
        doms = m.domains
        return cls(decision, d.info_parents, tuple(doms[p] for p in d.info_parents), d.domain,
                   np.asarray(table, dtype=float))

    @classmethod
    def uniform(cls, m: Maid, decision: str) -> "Strategy":
        d = m.nodes[decision]
        shape = tuple(len(m.domains[p]) for p in d.info_parents) + (len(d.domain),)
        return cls.for_decision(m, decision, np.full(shape, 1.0 / len(d.domain)))

    @classmethod
    def pure(cls, m: Maid, decision: str, choose) -> "Strategy":
        """``choose(info_values) -> action label``; a constant label is also accepted."""
        d = m.nodes[decision]
        doms = m.domains
        shape = tuple(len(doms[p]) for p in d.info_parents) + (len(d.domain),)
        table = np.zeros(shape)
        for idx in np.ndindex(*shape[:-1]):
            vals = tuple(doms[p][i] for p, i in zip(d.info_parents, idx))
            a = choose(vals) if callable(choose) else choose
            table[idx + (d.domain.index(a),)] = 1.0
        return cls.for_decision(m, decision, table)

    @classmethod
    def from_rows(cls, m: Maid, decision: str, rows: Mapping[tuple, Sequence[float]]) -> "Strategy":
        d = m.nodes[decision]
        cpd = Cpd.from_rows(decision, d.info_parents, rows, m.domains)
        return cls.for_decision(m, decision, np.array(cpd.table))

    def rows(self) -> dict[tuple, tuple[float, ...]]:
        return {
            tuple(dom[i] for dom, i in zip(self.info_domains, idx)): tuple(float(x) for x in self.table[idx])
            for idx in np.ndindex(*self.table.shape[:-1])
        }

    def row(self, *info_values: str) -> np.ndarray:
        return self.table[tuple(dom.index(v) for dom, v in zip(self.info_domains, info_values))]

    def factor(self) -> Factor:
        return Factor(self.info_parents + (self.decision,), self.table)

    def renamed(self, decision: str, info_parents: Sequence[str]) -> "Strategy":
        return Strategy(decision, tuple(info_parents), self.info_domains, self.domain, self.table)

    def max_abs_diff(self, other: "Strategy") -> float:
        return float(np.max(np.abs(self.table - other.table))) if self.table.size else 0.0

    def __eq__(self, other):
        return (isinstance(other, Strategy) and self.decision == other.decision
                and self.info_parents == other.info_parents and self.domain == other.domain
                and np.array_equal(self.table, other.table))

    def __repr__(self):
        return f"Strategy({self.decision}: {self.rows()})"


StrategyProfile = dict  # decision name -> Strategy


def uniform_profile(m: Maid) -> StrategyProfile:
    return {d.name: Strategy.uniform(m, d.name) for d in m.decisions}


# --------------------------------------------------------------------------- validation


def validate_maid(m: Maid) -> ValidationReport:
    rep = ValidationReport()
    for name in m.duplicate_names:
        rep.add(f"node {name}: declared more than once")
    if len(set(m.agents)) != len(m.agents):
        rep.add("duplicate agent names")
    doms = m.domains
    for n in m.nodes.values():
        missing = [p for p in n.parents if p not in m.nodes]
        if missing:
            rep.add(f"node {n.name}: unknown parents {missing}")
            continue
        util_parents = [p for p in n.parents if isinstance(m.nodes[p], UtilityNode)]
        if util_parents:
            rep.add(f"node {n.name}: utility nodes {util_parents} cannot have children")
            continue
        if isinstance(n, ChanceNode):
            if not n.domain:
                rep.add(f"chance {n.name}: empty domain")
            if n.cpd.child != n.name:
                rep.add(f"chance {n.name}: cpd child mismatch")
            rep.extend(_check_table(n.cpd, doms), prefix=f"chance {n.name}: ")
        elif isinstance(n, DecisionNode):
            if not n.domain:
                rep.add(f"decision {n.name}: empty domain")
            if n.owner not in m.agents:
                rep.add(f"decision {n.name}: owner {n.owner!r} is not an agent")
            if n.observed_as is not None and n.observed_as not in m.nodes:
                rep.add(f"decision {n.name}: observed_as {n.observed_as!r} unknown")
        else:
            if n.owner not in m.agents:
                rep.add(f"utility {n.name}: owner {n.owner!r} is not an agent")
            shape = tuple(len(doms[p]) for p in n.parents)
            if n.table.shape != shape:
                rep.add(f"utility {n.name}: table shape {n.table.shape} != {shape}")
            elif np.isnan(n.table).any():
                for idx in zip(*np.nonzero(np.isnan(n.table))):
                    rep.add(f"utility {n.name}: missing entry "
                            f"{tuple(doms[p][i] for p, i in zip(n.parents, idx))}")
    if not rep.ok:
        return rep
    g = m.graph()
    try:
        cyc = nx.find_cycle(g)
        rep.add("cycle: " + " -> ".join(u for u, _ in cyc) + f" -> {cyc[0][0]}")
        return rep
    except nx.NetworkXNoCycle:
        pass
    for group, decs in m.groups().items():
        for j, later in enumerate(decs):
            info = set(m.nodes[later].info_parents)
            for earlier in decs[:j]:
                e = m.nodes[earlier]
                if earlier not in info and (e.observed_as is None or e.observed_as not in info):
                    rep.add(f"perfect recall ({group}): {earlier} is not an informational parent of {later}")
                lost = set(e.info_parents) - info
                if lost:
                    rep.add(f"perfect recall ({group}): informational parents {sorted(lost)} of "
                            f"{earlier} are not observed at {later}")
    return rep


# --------------------------------------------------------------------------- implementation & EU


def _utility_label(v: float) -> str:
    return repr(float(v))


def implement_profile(m: Maid, p: Mapping[str, Strategy]) -> Network:
    missing = [d.name for d in m.decisions if d.name not in p]
    if missing:
        raise IncompleteProfileError(f"profile is missing decisions {missing}")
    doms = dict(m.domains)
    variables, cpds = [], []
    for n in m.nodes.values():
        if isinstance(n, ChanceNode):
            variables.append(Variable(n.name, n.domain))
            cpds.append(n.cpd)
        elif isinstance(n, DecisionNode):
            variables.append(Variable(n.name, n.domain))
            cpds.append(Cpd(n.name, n.info_parents, p[n.name].table))
        else:
            labels = tuple(_utility_label(v) for v in sorted(set(n.table.ravel().tolist())))
            variables.append(Variable(n.name, labels))
            doms[n.name] = labels
            t = np.zeros(n.table.shape + (len(labels),))
            for idx in np.ndindex(*n.table.shape):
                t[idx + (labels.index(_utility_label(n.table[idx])),)] = 1.0
            cpds.append(Cpd(n.name, n.parents, t))
    return Network(variables, cpds)


def expected_utility(m: Maid, p: Mapping[str, Strategy], agent: str,
                     evidence: Mapping[str, str] | None = None) -> float:
    """Sum over the agent's utility nodes of E[U | evidence], each read off the implemented network."""
    net = implement_profile(m, p)
    total = 0.0
    for u in m.utilities_of(agent):
        post = query_marginal(net, [u.name], evidence or {})
        vals = np.array([float(x) for x in net.variables[u.name].domain])
        total += float(post.values @ vals)
    return total


def profile_factors(m: Maid, p: Mapping[str, Strategy], free: Iterable[str] = (),
                    uniform: Iterable[str] = ()) -> dict[str, Factor]:
    """One factor per chance/decision node; ``free`` decisions are left out, ``uniform`` ones are uniform."""
    free, uniform = set(free), set(uniform)
    out = {}
    for n in m.nodes.values():
        if isinstance(n, ChanceNode):
            out[n.name] = Factor(n.cpd.parents + (n.name,), n.cpd.table)
        elif isinstance(n, DecisionNode) and n.name not in free:
            if n.name in uniform:
                out[n.name] = Strategy.uniform(m, n.name).factor()
            else:
                out[n.name] = p[n.name].factor()
    return out


def _pruned(m: Maid, factors: Mapping[str, Factor], targets: Iterable[str]) -> list[Factor]:
    anc = relevant_ancestors(m.parent_map(), targets)
    return [f for name, f in factors.items() if name in anc]


def utility_mass(m: Maid, factors: Mapping[str, Factor], agent: str, keep: Sequence[str],
                 evidence: Mapping[str, int] | None = None) -> Factor:
    """Unnormalized sum over the agent's utilities of sum_{others} prod(factors) * u, over ``keep``."""
    doms = m.domains
    ev = evidence or {}
    total = np.zeros([len(doms[v]) for v in keep])
    for u in m.utilities_of(agent):
        fs = _pruned(m, factors, set(keep) | set(u.parents) | set(ev))
        fs.append(Factor(u.parents, u.table))
        fs = [restrict(f, ev) for f in fs]
        total = total + eliminate(fs, keep, doms).values
    return Factor(tuple(keep), total)


def reach_mass(m: Maid, factors: Mapping[str, Factor], keep: Sequence[str]) -> Factor:
    return eliminate(_pruned(m, factors, keep), keep, m.domains)


def fast_expected_utility(m: Maid, p: Mapping[str, Strategy], agent: str) -> float:
    """Expected utility by direct elimination onto each utility's parents (no evidence)."""
    f = profile_factors(m, p)
    return float(utility_mass(m, f, agent, ()).values)


def action_values(m: Maid, p: Mapping[str, Strategy], decision: str,
                  uniform: Iterable[str] = ()) -> tuple[np.ndarray, np.ndarray]:
    """Reach weight per info assignment and E[U_owner | info, action] (NaN where unreachable)."""
    d = m.nodes[decision]
    f = profile_factors(m, p, free=[decision], uniform=uniform)
    keep = d.info_parents + (decision,)
    w = reach_mass(m, f, d.info_parents).values
    g = utility_mass(m, f, d.owner, keep).values
    with np.errstate(invalid="ignore", divide="ignore"):
        q = g / w[..., None]
    q[w <= 0] = np.nan
    return w, q


def _argmax_rows(q: np.ndarray) -> np.ndarray:
    out = np.zeros(q.shape)
    for idx in np.ndindex(*q.shape[:-1]):
        row = q[idx]
        if np.isnan(row).any():
            best = 0
        else:
            top = row.max()
            best = int(np.flatnonzero(row >= top - TIE_TOL * max(1.0, abs(top)))[0])
        out[idx + (best,)] = 1.0
    return out


def local_best_response(m: Maid, p: Mapping[str, Strategy], decision: str) -> Strategy:
    """Pure best response at one decision holding every other strategy in ``p`` fixed.

    Ties go to the lowest action index; unreachable info assignments get action 0.
    """
    _, q = action_values(m, p, decision)
    return Strategy.for_decision(m, decision, _argmax_rows(q))


def group_best_response(m: Maid, p: Mapping[str, Strategy], group: str) -> dict[str, Strategy]:
    """Optimal pure policy for a recall group by backward induction over its decisions."""
    decs = m.groups()[group]
    cur = dict(p)
    out = {}
    for j in range(len(decs) - 1, -1, -1):
        d = decs[j]
        _, q = action_values(m, cur, d, uniform=decs[:j])
        out[d] = Strategy.for_decision(m, d, _argmax_rows(q))
        cur[d] = out[d]
    return {d: out[d] for d in decs}


__all__ = [
    "ChanceNode", "DecisionNode", "UtilityNode", "Maid", "Strategy", "StrategyProfile",
    "IncompleteProfileError", "InconsistentEvidenceError", "validate_maid", "implement_profile",
    "expected_utility", "local_best_response", "group_best_response", "uniform_profile",
    "fast_expected_utility", "action_values", "profile_factors", "utility_mass", "reach_mass",
]
