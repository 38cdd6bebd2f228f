"""Categorical Bayesian networks with exact inference by variable elimination."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import networkx as nx
import numpy as np

ROW_TOL = 1e-9


class InferenceError(ValueError):
    """Raised when a query cannot be answered (e.g. zero-probability evidence)."""


class InconsistentEvidenceError(InferenceError):
    pass


class IncompleteAssignmentError(InferenceError):
    pass


@dataclass(frozen=True)
class Variable:
    name: str
    domain: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "domain", tuple(self.domain))

    @property
    def card(self) -> int:
        return len(self.domain)

    def index(self, value: str) -> int:
        return self.domain.index(value)


class Cpd:
    """P(child | parents) stored as an array of shape ``parent cards + (child card,)``.

    Rows are indexed row-major in declared parent order.  Missing rows built by
    :meth:`from_rows` are NaN so that validation can report them.
    """

    __slots__ = ("child", "parents", "table", "extra_rows")

    def __init__(self, child: str, parents: Sequence[str], table, extra_rows=()):
        self.child = child
        self.parents = tuple(parents)
        self.table = np.asarray(table, dtype=float)
        self.extra_rows = tuple(extra_rows)
        self.table.setflags(write=False)

    @classmethod
    def from_rows(
        cls,
        child: str,
        parents: Sequence[str],
        rows: Mapping[tuple, Sequence[float]],
        domains: Mapping[str, Sequence[str]],
    ) -> "Cpd":
        parents = tuple(parents)
        shape = tuple(len(domains[p]) for p in parents) + (len(domains[child]),)
        table = np.full(shape, np.nan)
        extra = []
        for key, probs in rows.items():
            key = tuple(key) if not isinstance(key, str) else (key,)
            try:
                idx = tuple(list(domains[p]).index(v) for p, v in zip(parents, key, strict=True))
            except ValueError:
                extra.append(key)
                continue
            if len(probs) != shape[-1]:
                extra.append(key)
                continue
            table[idx] = probs
        return cls(child, parents, table, extra)

    @classmethod
    def point_mass(cls, child, parents, domains, chooser) -> "Cpd":
        """Deterministic CPD; ``chooser(parent_values) -> child value``."""
        parents = tuple(parents)
        shape = tuple(len(domains[p]) for p in parents) + (len(domains[child]),)
        table = np.zeros(shape)
        for idx in np.ndindex(*shape[:-1]):
            vals = tuple(domains[p][i] for p, i in zip(parents, idx))
            table[idx + (list(domains[child]).index(chooser(vals)),)] = 1.0
        return cls(child, parents, table)

    def rows(self, domains: Mapping[str, Sequence[str]]) -> dict[tuple, tuple[float, ...]]:
        out = {}
        for idx in np.ndindex(*self.table.shape[:-1]):
            key = tuple(domains[p][i] for p, i in zip(self.parents, idx))
            out[key] = tuple(float(x) for x in self.table[idx])
        return out

    def __eq__(self, other):
        if not isinstance(other, Cpd):
            return NotImplemented
        return (
            self.child == other.child
            and self.parents == other.parents
            and self.table.shape == other.table.shape
            and np.array_equal(self.table, other.table, equal_nan=True)
            and self.extra_rows == other.extra_rows
        )

    def __repr__(self):
        return f"Cpd({self.child!r} | {', '.join(self.parents)})"


@dataclass(frozen=True, eq=False)
class Factor:
    scope: tuple[str, ...]
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "scope", tuple(self.scope))
        assert self.values.ndim == len(self.scope), (self.scope, self.values.shape)

    def value(self, assignment: Mapping[str, int]) -> float:
        return float(self.values[tuple(assignment[v] for v in self.scope)])

    def reorder(self, scope: Sequence[str]) -> "Factor":
        perm = [self.scope.index(v) for v in scope]
        return Factor(tuple(scope), np.transpose(self.values, perm))

    def normalized(self) -> "Factor":
        return Factor(self.scope, self.values / self.values.sum())


@dataclass
class ValidationReport:
    violations: list[str] = field(default_factory=list)

    def __bool__(self):
        return not self.violations

    @property
    def ok(self) -> bool:
        return not self.violations

    def add(self, msg: str):
        self.violations.append(msg)

    def extend(self, other: "ValidationReport", prefix: str = ""):
        self.violations.extend(prefix + v for v in other.violations)


class Network:
    """A DAG of categorical variables with one :class:`Cpd` per variable."""

    def __init__(self, variables: Iterable[Variable], cpds: Iterable[Cpd]):
        variables = list(variables)
        self.variables: dict[str, Variable] = {v.name: v for v in variables}
        self.duplicate_names = sorted({v.name for v in variables if sum(w.name == v.name for w in variables) > 1})
        self.cpds: dict[str, Cpd] = {c.child: c for c in cpds}

    @property
    def domains(self) -> dict[str, tuple[str, ...]]:
        return {n: v.domain for n, v in self.variables.items()}

    def parents(self, name: str) -> tuple[str, ...]:
        return self.cpds[name].parents

    def graph(self) -> nx.DiGraph:
        g = nx.DiGraph()
        g.add_nodes_from(self.variables)
        for c in self.cpds.values():
            for p in c.parents:
                g.add_edge(p, c.child)
        return g

    def topological_order(self) -> list[str]:
        return list(nx.topological_sort(self.graph()))

    def factors(self) -> list[Factor]:
        return [Factor(c.parents + (c.child,), c.table) for c in self.cpds.values()]

    def __eq__(self, other):
        if not isinstance(other, Network):
            return NotImplemented
        return (
            list(self.variables.values()) == list(other.variables.values())
            and self.cpds == other.cpds
        )


# --------------------------------------------------------------------------- validation


def validate_network(net: Network) -> ValidationReport:
    rep = ValidationReport()
    for name in net.duplicate_names:
        rep.add(f"variable {name}: declared more than once")
    for v in net.variables.values():
        if len(set(v.domain)) != len(v.domain):
            rep.add(f"variable {v.name}: duplicate domain labels")
        if not v.domain:
            rep.add(f"variable {v.name}: empty domain")
    for name in net.variables:
        if name not in net.cpds:
            rep.add(f"variable {name}: missing CPD")
    for child, cpd in net.cpds.items():
        if child not in net.variables:
            rep.add(f"cpd {child}: child is not a declared variable")
            continue
        bad = [p for p in cpd.parents if p not in net.variables]
        if bad:
            rep.add(f"cpd {child}: undeclared parents {bad}")
            continue
        rep.extend(_check_table(cpd, net.domains), prefix=f"cpd {child}: ")
    g = nx.DiGraph()
    for cpd in net.cpds.values():
        for p in cpd.parents:
            g.add_edge(p, cpd.child)
    try:
        cyc = nx.find_cycle(g)
        rep.add("cycle: " + " -> ".join(u for u, _ in cyc) + f" -> {cyc[0][0]}")
    except nx.NetworkXNoCycle:
        pass
    return rep


def _check_table(cpd: Cpd, domains) -> ValidationReport:
    rep = ValidationReport()
    expected = tuple(len(domains[p]) for p in cpd.parents) + (len(domains[cpd.child]),)
    if cpd.table.shape != expected:
        rep.add(f"table shape {cpd.table.shape} != {expected}")
        return rep
    for key in cpd.extra_rows:
        rep.add(f"extra row {key}")
    for idx in np.ndindex(*expected[:-1]):
        row = cpd.table[idx]
        label = tuple(domains[p][i] for p, i in zip(cpd.parents, idx))
        if np.isnan(row).any():
            rep.add(f"missing row {label}")
        elif (row < -ROW_TOL).any() or (row > 1 + ROW_TOL).any():
            rep.add(f"row {label} has entries outside [0,1]")
        elif abs(row.sum() - 1.0) > ROW_TOL:
            rep.add(f"row {label} sums to {row.sum():.12g}")
    return rep


# --------------------------------------------------------------------------- elimination


def _min_fill_order(scopes: list[set[str]], eliminate: set[str]) -> list[str]:
    adj: dict[str, set[str]] = {}
    for s in scopes:
        for v in s:
            adj.setdefault(v, set()).update(s - {v})
    order = []
    remaining = set(eliminate)
    while remaining:
        def fill(v):
            nb = adj.get(v, set())
            return sum(1 for a, b in itertools.combinations(nb, 2) if b not in adj[a]), len(nb), v
        v = min(remaining, key=fill)
        nb = adj.pop(v, set())
        for a in nb:
            adj[a].discard(v)
            adj[a].update(nb - {a})
        remaining.discard(v)
        order.append(v)
    return order


def _einsum(factors: list[Factor], out_scope: Sequence[str]) -> np.ndarray:
    ids: dict[str, int] = {}
    args = []
    for f in factors:
        args.append(f.values)
        args.append([ids.setdefault(v, len(ids)) for v in f.scope])
    for v in out_scope:
        ids.setdefault(v, len(ids))
    args.append([ids[v] for v in out_scope])
    return np.einsum(*args, optimize=len(factors) > 2)


def eliminate(
    factors: Sequence[Factor],
    keep: Sequence[str],
    domains: Mapping[str, Sequence[str]],
) -> Factor:
    """Sum out every variable not in ``keep``; returns an unnormalized factor over ``keep``.

    Variables in ``keep`` that appear in no factor are broadcast (constant along them).
    """
    keep = tuple(keep)
    keep_set = set(keep)
    pool = list(factors)
    scopes = [set(f.scope) for f in pool]
    all_vars = set().union(*scopes) if scopes else set()
    for v in _min_fill_order(scopes, all_vars - keep_set):
        touching = [f for f in pool if v in f.scope]
        if not touching:
            continue
        pool = [f for f in pool if v not in f.scope]
        out = tuple(dict.fromkeys(u for f in touching for u in f.scope if u != v))
        pool.append(Factor(out, _einsum(touching, out)))
    present = tuple(v for v in keep if any(v in f.scope for f in pool))
    vals = _einsum(pool, present) if pool else np.array(1.0)
    vals = vals.reshape([len(domains[v]) if v in present else 1 for v in keep])
    full = np.broadcast_to(vals, [len(domains[v]) for v in keep]).copy()
    return Factor(keep, full)


def restrict(f: Factor, evidence: Mapping[str, int]) -> Factor:
    idx = tuple(evidence[v] if v in evidence else slice(None) for v in f.scope)
    scope = tuple(v for v in f.scope if v not in evidence)
    return Factor(scope, np.asarray(f.values[idx]))


def relevant_ancestors(parents: Mapping[str, Sequence[str]], targets: Iterable[str]) -> set[str]:
    seen = set()
    stack = list(targets)
    while stack:
        v = stack.pop()
        if v in seen:
            continue
        seen.add(v)
        stack.extend(parents.get(v, ()))
    return seen


def _evidence_index(net: Network, evidence: Mapping[str, str]) -> dict[str, int]:
    out = {}
    for k, v in evidence.items():
        if k not in net.variables:
            raise InferenceError(f"unknown evidence variable {k!r}")
        if v not in net.variables[k].domain:
            raise InferenceError(f"value {v!r} not in domain of {k!r}")
        out[k] = net.variables[k].index(v)
    return out


def query_marginal(
    net: Network, targets: Sequence[str], evidence: Mapping[str, str] | None = None
) -> Factor:
    """Posterior P(targets | evidence) as a normalized factor (scope in ``targets`` order)."""
    evidence = dict(evidence or {})
    ev = _evidence_index(net, evidence)
    targets = tuple(targets)
    for t in targets:
        if t not in net.variables:
            raise InferenceError(f"unknown target variable {t!r}")
    parents = {n: c.parents for n, c in net.cpds.items()}
    needed = relevant_ancestors(parents, set(targets) | set(ev))
    factors = [restrict(Factor(c.parents + (c.child,), c.table), ev)
               for n, c in net.cpds.items() if n in needed]
    free = tuple(t for t in targets if t not in ev)
    f = eliminate(factors, free, net.domains)
    z = f.values.sum()
    if not z > 0:
        raise InconsistentEvidenceError(f"evidence {evidence} has zero probability")
    post = f.values / z
    # re-insert evidence targets as point masses
    shape = [net.variables[t].card for t in targets]
    out = np.zeros(shape)
    idx = tuple(ev[t] if t in ev else slice(None) for t in targets)
    out[idx] = post
    return Factor(targets, out)


def joint_probability(net: Network, full: Mapping[str, str]) -> float:
    missing = [v for v in net.variables if v not in full]
    if missing:
        raise IncompleteAssignmentError(f"unbound variables: {missing}")
    ev = _evidence_index(net, full)
    p = 1.0
    for c in net.cpds.values():
        p *= float(c.table[tuple(ev[v] for v in c.parents) + (ev[c.child],)])
    return p


def enumerate_joint(net: Network) -> Factor:
    """Brute-force full joint table; the independent oracle for small networks."""
    names = list(net.variables)
    cards = [net.variables[n].card for n in names]
    out = np.ones(cards)
    for c in net.cpds.values():
        axes = [names.index(v) for v in c.parents + (c.child,)]
        shape = [1] * len(names)
        for a, v in zip(axes, c.parents + (c.child,)):
            shape[a] = net.variables[v].card
        order = np.argsort(axes)
        arr = np.transpose(c.table, order).reshape(shape)
        out = out * arr
    return Factor(tuple(names), out)


def brute_force_posterior(net: Network, targets, evidence=None) -> Factor:
    joint = enumerate_joint(net)
    ev = _evidence_index(net, dict(evidence or {}))
    vals = joint.values.copy()
    for v, i in ev.items():
        ax = joint.scope.index(v)
        mask = np.zeros(vals.shape[ax], dtype=bool)
        mask[i] = True
        shape = [1] * vals.ndim
        shape[ax] = -1
        vals = vals * mask.reshape(shape)
    axes = tuple(i for i, v in enumerate(joint.scope) if v not in targets)
    marg = vals.sum(axis=axes)
    kept = [v for v in joint.scope if v in targets]
    z = marg.sum()
    if not z > 0:
        raise InconsistentEvidenceError("zero-probability evidence")
    return Factor(tuple(kept), marg / z).reorder(tuple(targets))


def sample_assignment(net: Network, seed: int) -> dict[str, str]:
    rng = np.random.default_rng(seed)
    out: dict[str, int] = {}
    for name in net.topological_order():
        c = net.cpds[name]
        row = c.table[tuple(out[p] for p in c.parents)]
        row = np.clip(row, 0, None)
        out[name] = int(rng.choice(len(row), p=row / row.sum()))
    return {n: net.variables[n].domain[i] for n, i in out.items()}
