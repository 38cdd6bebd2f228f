"""Networks of influence diagrams: blocks, Mod nodes, compilation to a MAID, and theta/phi extraction."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import networkx as nx
import numpy as np

from .bayesnet import Cpd, Factor, ValidationReport, _check_table, eliminate, relevant_ancestors
from .maid import (
    ChanceNode,
    DecisionNode,
    Maid,
    Strategy,
    UtilityNode,
    implement_profile,
    validate_maid,
)
from .solver import EquilibriumReport, SolverConfig, solve_maid


class CompilationError(ValueError):
    pass


def mod_name(observer: str, decision: str) -> str:
    return f"Mod[{observer},{decision}]"


@dataclass(frozen=True, eq=False)
class ModNode:
    """Belief of ``observer`` about which block is used to make ``decision``."""

    observer: str
    decision: str
    labels: tuple[str, ...]
    cpd: Cpd  # child is mod_name(observer, decision); parents are in-block chance/decision nodes

    @property
    def name(self) -> str:
        return mod_name(self.observer, self.decision)

    @classmethod
    def point_mass(cls, observer: str, decision: str, label: str) -> "ModNode":
        return cls(observer, decision, (label,), Cpd(mod_name(observer, decision), (), np.ones(1)))

    @classmethod
    def from_probs(cls, observer: str, decision: str, probs: Mapping[str, float]) -> "ModNode":
        labels = tuple(probs)
        return cls(observer, decision, labels,
                   Cpd(mod_name(observer, decision), (), np.array([probs[k] for k in labels], float)))

    @classmethod
    def from_rows(cls, observer, decision, labels, parents, rows, domains) -> "ModNode":
        doms = dict(domains)
        doms[mod_name(observer, decision)] = tuple(labels)
        return cls(observer, decision, tuple(labels),
                   Cpd.from_rows(mod_name(observer, decision), parents, rows, doms))

    def is_point_mass_on(self, label: str) -> bool:
        """Unconditional (every row) point mass on ``label``."""
        if label not in self.labels:
            return False
        col = self.cpd.table[..., self.labels.index(label)]
        return bool(np.all(col == 1.0))

    def positive_labels(self) -> list[str]:
        flat = self.cpd.table.reshape(-1, len(self.labels))
        return [lab for i, lab in enumerate(self.labels) if np.any(flat[:, i] > 0)]

    def __eq__(self, other):
        return (isinstance(other, ModNode) and self.observer == other.observer
                and self.decision == other.decision and self.labels == other.labels and self.cpd == other.cpd)


class Block:
    def __init__(self, label: str, maid: Maid, mods: Iterable[ModNode] = (), agents: Sequence[str] | None = None):
        self.label = label
        self.maid = maid
        self.mods: dict[tuple[str, str], ModNode] = {}
        self.duplicate_mods = []
        for md in mods:
            key = (md.observer, md.decision)
            if key in self.mods:
                self.duplicate_mods.append(key)
            self.mods[key] = md
        # omitted Mod nodes default to a point mass on the block itself
        for a in agents if agents is not None else maid.agents:
            for d in maid.decisions:
                self.mods.setdefault((a, d.name), ModNode.point_mass(a, d.name, label))

    def is_default(self, md: ModNode) -> bool:
        return md.labels == (self.label,) and not md.cpd.parents

    def explicit_mods(self) -> list[ModNode]:
        return [md for md in self.mods.values() if not self.is_default(md)]

    def __eq__(self, other):
        if not isinstance(other, Block):
            return NotImplemented
        return self.label == other.label and self.maid == other.maid and self.mods == other.mods


class NidModel:
    def __init__(self, agents: Sequence[str], blocks: Iterable[Block], root: str):
        self.agents = list(agents)
        blocks = list(blocks)
        self.blocks: dict[str, Block] = {b.label: b for b in blocks}
        self.duplicate_labels = sorted({b.label for b in blocks if sum(c.label == b.label for c in blocks) > 1})
        self.root = root

    def __eq__(self, other):
        if not isinstance(other, NidModel):
            return NotImplemented
        return (self.agents == other.agents and self.root == other.root
                and list(self.blocks.values()) == list(other.blocks.values()))


# --------------------------------------------------------------------------- validation


def labeled_edges(n: NidModel) -> list[tuple[str, str, str, str]]:
    """(K, L, agent, decision) for every Mod[agent, decision] in K giving positive weight to L != K."""
    out = []
    for k, b in n.blocks.items():
        for (a, d), md in b.mods.items():
            for lab in md.positive_labels():
                if lab != k:
                    out.append((k, lab, a, d))
    return out


def find_self_loops(n: NidModel) -> list[list[str]]:
    by_label: dict[tuple[str, str], nx.DiGraph] = {}
    for k, lab, a, d in labeled_edges(n):
        by_label.setdefault((a, d), nx.DiGraph()).add_edge(k, lab)
    loops = []
    for (a, d), g in sorted(by_label.items()):
        try:
            cyc = nx.find_cycle(g)
        except nx.NetworkXNoCycle:
            continue
        loops.append([f"{{{a}, {d}}}"] + [u for u, _ in cyc] + [cyc[0][0]])
    return loops


def validate_nid(n: NidModel) -> ValidationReport:
    rep = ValidationReport()
    if n.root not in n.blocks:
        rep.add(f"root block {n.root!r} does not exist")
    for lab in n.duplicate_labels:
        rep.add(f"block {lab}: declared more than once")
    for k, b in n.blocks.items():
        rep.extend(validate_maid(b.maid), prefix=f"block {k}: ")
        for key in b.duplicate_mods:
            rep.add(f"block {k}: Mod{list(key)} declared more than once")
        mod_names = {md.name for md in b.mods.values()}
        for dnode in b.maid.decisions:
            bad = [p for p in dnode.info_parents if p in mod_names]
            if bad:
                rep.add(f"block {k}: Mod node {bad} is an informational parent of {dnode.name}")
        doms = b.maid.domains
        for (a, d), md in b.mods.items():
            where = f"block {k}: {md.name}"
            if a not in n.agents:
                rep.add(f"{where}: observer {a!r} is not an agent")
            dnode = b.maid.nodes.get(d)
            if not isinstance(dnode, DecisionNode):
                rep.add(f"{where}: {d!r} is not a decision of the block")
                continue
            bad_par = [p for p in md.cpd.parents
                       if p not in b.maid.nodes or isinstance(b.maid.nodes[p], UtilityNode)]
            if bad_par:
                rep.add(f"{where}: parents {bad_par} must be chance or decision nodes of the block")
                continue
            mdoms = dict(doms)
            mdoms[md.name] = md.labels
            rep.extend(_check_table(md.cpd, mdoms), prefix=f"{where}: ")
            for lab in md.labels:
                if lab not in n.blocks:
                    rep.add(f"{where}: references missing block {lab!r}")
            for lab in md.positive_labels():
                if lab not in n.blocks or lab == k:
                    continue
                target = n.blocks[lab].maid.nodes.get(d)
                if not isinstance(target, (DecisionNode, ChanceNode)):
                    rep.add(f"{where}: block {lab} has no decision or chance node {d!r}")
                elif tuple(target.domain) != tuple(dnode.domain):
                    rep.add(f"{where}: domain of {d!r} differs in block {lab}")
        g = b.maid.graph()
        for (a, d), md in b.mods.items():
            if d in b.maid.nodes and all(p in b.maid.nodes for p in md.cpd.parents):
                g.add_edges_from([(p, md.name) for p in md.cpd.parents] + [(md.name, d)])
        if nx.is_directed_acyclic_graph(b.maid.graph()) and not nx.is_directed_acyclic_graph(g):
            rep.add(f"block {k}: Mod node parents create a cycle through their decision")
    for loop in find_self_loops(n):
        rep.add(f"self-loop labeled {loop[0]}: " + " -> ".join(loop[1:]))
    return rep


# --------------------------------------------------------------------------- compilation


@dataclass
class CompiledMaid:
    maid: Maid
    name_map: dict[str, dict[str, str]]
    nid: NidModel

    def br(self, block: str, decision: str) -> str:
        return f"BR[{decision}]^{block}"

    def belief(self, block: str, decision: str, agent: str) -> str:
        return f"{decision}_{agent}^{block}"

    def copy_of(self, block: str, node: str, agent: str) -> str:
        """Name of ``agent``'s copy of a block node (belief node for decisions)."""
        rep = f"{node}_{agent}^{block}"
        return rep if rep in self.maid.nodes else f"{node}^{block}"


def _block_agents(n: NidModel, b: Block) -> list[str]:
    want = {d.owner for d in b.maid.decisions} | {u.owner for u in b.maid.utilities}
    want |= {md.observer for md in b.explicit_mods()}
    # owners of decisions that other blocks may read from this block as chance nodes
    for other in n.blocks.values():
        for d in other.maid.decisions:
            if isinstance(b.maid.nodes.get(d.name), ChanceNode):
                want.add(d.owner)
    return [a for a in n.agents if a in want]


def compile_nid_to_maid(n: NidModel) -> CompiledMaid:
    loops = find_self_loops(n)
    if loops:
        raise CompilationError(f"self-loop {loops[0]}")
    nodes: list = []
    name_map: dict[str, dict[str, str]] = {}

    def emit(node, kind, block, source, agent=""):
        nodes.append(node)
        name_map[node.name] = {"kind": kind, "block": block, "source": source, "agent": agent}

    agents_of = {k: _block_agents(n, b) for k, b in n.blocks.items()}
    desc_of = {}
    for k, b in n.blocks.items():
        g = b.maid.graph()
        desc = set()
        for d in b.maid.decisions:
            desc |= nx.descendants(g, d.name)
        desc_of[k] = desc

    def copy(k: str, node: str, agent: str) -> str:
        b = n.blocks[k]
        if isinstance(b.maid.nodes[node], DecisionNode):
            return f"{node}_{agent}^{k}"
        if node in desc_of[k]:
            return f"{node}_{agent}^{k}"
        return f"{node}^{k}"

    for k, b in n.blocks.items():
        m = b.maid
        agents = agents_of[k]
        # chance and utility nodes (replicated per agent below a decision)
        for node in m.nodes.values():
            if isinstance(node, ChanceNode):
                if node.name in desc_of[k]:
                    for a in agents:
                        name = f"{node.name}_{a}^{k}"
                        cpd = Cpd(name, tuple(copy(k, p, a) for p in node.parents), node.cpd.table)
                        emit(ChanceNode(name, node.domain, cpd), "replica", k, node.name, a)
                else:
                    name = f"{node.name}^{k}"
                    cpd = Cpd(name, tuple(copy(k, p, agents[0] if agents else "") for p in node.parents),
                              node.cpd.table)
                    emit(ChanceNode(name, node.domain, cpd), "copy", k, node.name)
            elif isinstance(node, UtilityNode):
                a = node.owner
                name = f"{node.name}_{a}^{k}" if node.name in desc_of[k] else f"{node.name}^{k}"
                emit(UtilityNode(name, a, tuple(copy(k, p, a) for p in node.parents), node.table),
                     "replica" if node.name in desc_of[k] else "copy", k, node.name, a)
        # Mod nodes
        for (a, d), md in b.mods.items():
            if a not in agents:
                continue
            name = f"{md.name}^{k}"
            cpd = Cpd(name, tuple(copy(k, p, a) for p in md.cpd.parents), md.cpd.table)
            emit(ChanceNode(name, md.labels, cpd), "mod", k, md.name, a)
        # best-response decisions
        for d in m.decisions:
            a = d.owner
            own_mod = b.mods[(a, d.name)]
            emit(DecisionNode(f"BR[{d.name}]^{k}", a, d.domain, tuple(copy(k, p, a) for p in d.info_parents),
                              group=f"{a}@{k}",
                              observed_as=f"{d.name}_{a}^{k}" if own_mod.is_point_mass_on(k) else None),
                 "br", k, d.name, a)
        # each agent's belief about each decision, multiplexed by its Mod node
        for d in m.decisions:
            owner = d.owner
            for a in agents:
                md = b.mods[(a, d.name)]
                here = f"BR[{d.name}]^{k}" if a == owner else f"{d.name}_{owner}^{k}"
                positive = set(md.positive_labels())

                def source(lab):
                    if lab == k:
                        return here
                    tgt = n.blocks[lab].maid.nodes[d.name]
                    if isinstance(tgt, DecisionNode):
                        return f"{d.name}_{tgt.owner}^{lab}"
                    if d.name in desc_of[lab]:
                        return f"{d.name}_{owner}^{lab}"
                    return f"{d.name}^{lab}"

                # labels that are never selected reuse a live source, so they add no structural parent
                srcs = [source(lab) if lab in positive else None for lab in md.labels]
                fallback = next((s for s in srcs if s is not None), here)
                srcs = [s or fallback for s in srcs]
                sources: list[str] = list(dict.fromkeys(srcs))
                pick = [sources.index(s) for s in srcs]
                card = len(d.domain)
                table = np.zeros((len(md.labels),) + (card,) * len(sources) + (card,))
                for li, si in enumerate(pick):
                    for idx in np.ndindex(*(card,) * len(sources)):
                        table[(li,) + idx + (idx[si],)] = 1.0
                name = f"{d.name}_{a}^{k}"
                cpd = Cpd(name, (f"{md.name}^{k}",) + tuple(sources), table)
                emit(ChanceNode(name, d.domain, cpd), "belief", k, d.name, a)

    maid = Maid(n.agents, nodes)
    _split_broken_groups(maid)
    if not nx.is_directed_acyclic_graph(maid.graph()):
        raise CompilationError("compiled MAID has a cycle: " + str(nx.find_cycle(maid.graph())))
    return CompiledMaid(maid, name_map, n)


def _split_broken_groups(maid: Maid):
    """Recall groups whose decisions do not satisfy perfect recall fall back to one group per decision."""
    rep = validate_maid(maid)
    bad = {v.split("(")[1].split(")")[0] for v in rep.violations if v.startswith("perfect recall (")}
    if not bad:
        return
    for name, node in list(maid.nodes.items()):
        if isinstance(node, DecisionNode) and node.group in bad:
            maid.nodes[name] = DecisionNode(node.name, node.owner, node.domain, node.info_parents,
                                            group=f"{node.group}:{node.name}", observed_as=node.observed_as)
    maid._cache.clear()


# --------------------------------------------------------------------------- equilibrium


@dataclass
class NidEquilibrium:
    theta: dict[tuple[str, str], Strategy]
    phi: dict[tuple[str, str], Strategy]
    maid_report: EquilibriumReport
    compiled: CompiledMaid = field(repr=False)


def _theta(c: CompiledMaid, report: EquilibriumReport, block: str, decision: str) -> Strategy:
    d = c.nid.blocks[block].maid.nodes[decision]
    s = report.profile[c.br(block, decision)]
    return Strategy(decision, d.info_parents, s.info_domains, s.domain, s.table)


def extract_actually_played(c: CompiledMaid, report: EquilibriumReport, block: str, decision: str) -> Strategy:
    """P(D_owner^K | informational parents) in the implemented network; theta where that is undefined."""
    d = c.nid.blocks[block].maid.nodes[decision]
    theta = _theta(c, report, block, decision)
    net = implement_profile(c.maid, report.profile)
    info = [c.copy_of(block, p, d.owner) for p in d.info_parents]
    target = c.belief(block, decision, d.owner)
    parents = {k: cpd.parents for k, cpd in net.cpds.items()}
    needed = relevant_ancestors(parents, set(info) | {target})
    factors = [Factor(cp.parents + (cp.child,), cp.table) for k, cp in net.cpds.items() if k in needed]
    joint = eliminate(factors, tuple(info) + (target,), net.domains).values
    table = np.array(theta.table, dtype=float)
    for idx in np.ndindex(*joint.shape[:-1]):
        z = joint[idx].sum()
        if z > 1e-15:
            table[idx] = joint[idx] / z
    return Strategy(decision, d.info_parents, theta.info_domains, theta.domain, table)


def solve_nid(n: NidModel, cfg: SolverConfig | None = None) -> NidEquilibrium:
    rep = validate_nid(n)
    if not rep.ok:
        raise ValueError("invalid NID: " + "; ".join(rep.violations))
    c = compile_nid_to_maid(n)
    report = solve_maid(c.maid, cfg or SolverConfig())
    theta, phi = {}, {}
    for k, b in n.blocks.items():
        for d in b.maid.decisions:
            theta[(k, d.name)] = _theta(c, report, k, d.name)
            phi[(k, d.name)] = extract_actually_played(c, report, k, d.name)
    return NidEquilibrium(theta, phi, report, c)


__all__ = [
    "ModNode", "Block", "NidModel", "CompiledMaid", "NidEquilibrium", "CompilationError",
    "validate_nid", "compile_nid_to_maid", "solve_nid", "extract_actually_played", "find_self_loops",
    "mod_name", "labeled_edges",
]
