"""JSON model documents for networks, MAIDs, NIDs and Bayesian games.

Every document is an object ``{"format_version": 1, "kind": ..., "metadata": {...}, "body": {...}}``.
CPD rows are keyed by explicit parent values (``{"given": [...], "p": [...]}``), so reordering a
domain never silently changes a table. Serialization is canonical: sorted keys, two-space indent,
numbers rounded to 12 significant digits.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .bayesgame import BayesianGame, validate_bg
from .bayesnet import Cpd, Network, ValidationReport, Variable, validate_network
from .maid import ChanceNode, DecisionNode, Maid, UtilityNode, validate_maid
from .nid import Block, ModNode, NidModel, mod_name, validate_nid

FORMAT_VERSION = 1
KINDS = ("network", "maid", "nid", "bayesian_game")
SIG_DIGITS = 12


class FormatError(ValueError):
    """Parse failure with a position: ``line``/``col`` for syntax errors, a JSON path for schema errors."""

    def __init__(self, message: str, line: int | None = None, col: int | None = None, path: str = ""):
        self.message = message
        self.line = line
        self.col = col
        self.path = path
        where = f"{line}:{col}: " if line is not None else ""
        at = f"at {path}: " if path else ""
        super().__init__(f"{where}{at}{message}")


@dataclass
class ModelDocument:
    kind: str
    body: Any  # Network | Maid | NidModel | BayesianGame
    metadata: dict[str, str] = field(default_factory=dict)
    format_version: int = FORMAT_VERSION


def _num(x: float) -> float | int:
    v = float(f"{float(x):.{SIG_DIGITS}g}")
    return 0.0 if v == 0 else v


# --------------------------------------------------------------------------- encoding


def _rows(parents, domains, table, key="p"):
    out = []
    for idx in np.ndindex(*table.shape[: len(parents)]):
        given = [domains[p][i] for p, i in zip(parents, idx)]
        v = table[idx]
        out.append({"given": given, key: [_num(x) for x in v] if np.ndim(v) else _num(v)})
    return out


def _enc_network(net: Network) -> dict:
    doms = net.domains
    return {"variables": [
        {"name": v.name, "domain": list(v.domain), "parents": list(net.cpds[v.name].parents),
         "rows": _rows(net.cpds[v.name].parents, doms, net.cpds[v.name].table)}
        for v in net.variables.values()
    ]}


def _enc_maid(m: Maid) -> dict:
    doms = m.domains
    nodes = []
    for n in m.nodes.values():
        if isinstance(n, ChanceNode):
            nodes.append({"type": "chance", "name": n.name, "domain": list(n.domain),
                          "parents": list(n.parents), "rows": _rows(n.parents, doms, n.cpd.table)})
        elif isinstance(n, DecisionNode):
            d = {"type": "decision", "name": n.name, "owner": n.owner, "domain": list(n.domain),
                 "info_parents": list(n.info_parents)}
            if n.group is not None:
                d["group"] = n.group
            if n.observed_as is not None:
                d["observed_as"] = n.observed_as
            nodes.append(d)
        else:
            nodes.append({"type": "utility", "name": n.name, "owner": n.owner, "parents": list(n.parents),
                          "rows": _rows(n.parents, doms, n.table, key="u")})
    return {"agents": list(m.agents), "nodes": nodes}


def _enc_nid(n: NidModel) -> dict:
    blocks = []
    for b in n.blocks.values():
        doms = b.maid.domains
        mods = [{"observer": md.observer, "decision": md.decision, "labels": list(md.labels),
                 "parents": list(md.cpd.parents), "rows": _rows(md.cpd.parents, doms, md.cpd.table)}
                for md in b.explicit_mods()]
        blocks.append({"label": b.label, "maid": _enc_maid(b.maid), "mods": mods})
    return {"agents": list(n.agents), "root": n.root, "blocks": blocks}


def _enc_bg(g: BayesianGame) -> dict:
    agents = [{"name": a, "types": list(g.types[a]), "actions": list(g.actions[a])} for a in g.agents]
    beliefs = []
    for i in g.agents:
        others = g.others(i)
        for k, t in enumerate(g.types[i]):
            dist = []
            for idx in itertools.product(*[range(len(g.types[j])) for j in others]):
                dist.append({"others": [g.types[j][x] for j, x in zip(others, idx)],
                             "p": _num(g.beliefs[i][(k,) + idx])})
            beliefs.append({"agent": i, "type": t, "dist": dist})
    utilities = []
    for i in g.agents:
        cells = []
        u = g.utilities[i]
        for idx in np.ndindex(*u.shape):
            n = len(g.agents)
            cells.append({"types": [g.types[a][x] for a, x in zip(g.agents, idx[:n])],
                          "actions": [g.actions[a][x] for a, x in zip(g.agents, idx[n:])],
                          "u": _num(u[idx])})
        utilities.append({"agent": i, "cells": cells})
    return {"agents": agents, "beliefs": beliefs, "utilities": utilities}


ENCODERS = {"network": _enc_network, "maid": _enc_maid, "nid": _enc_nid, "bayesian_game": _enc_bg}


def kind_of(model) -> str:
    for kind, cls in (("network", Network), ("maid", Maid), ("nid", NidModel), ("bayesian_game", BayesianGame)):
        if isinstance(model, cls):
            return kind
    raise TypeError(f"not a model: {type(model).__name__}")


def to_json_obj(doc: ModelDocument) -> dict:
    return {"format_version": doc.format_version, "kind": doc.kind,
            "metadata": {str(k): str(v) for k, v in doc.metadata.items()},
            "body": ENCODERS[doc.kind](doc.body)}


def serialize_document(doc: ModelDocument) -> bytes:
    text = json.dumps(to_json_obj(doc), sort_keys=True, indent=2, ensure_ascii=False, allow_nan=False)
    return (text + "\n").encode("utf-8")


def document(model, metadata: dict | None = None) -> ModelDocument:
    return ModelDocument(kind_of(model), model, dict(metadata or {}))


# --------------------------------------------------------------------------- decoding


class _Reader:
    """Typed access to a JSON value that raises FormatError naming the path."""

    def __init__(self, value, path: str):
        self.value = value
        self.path = path

    def fail(self, msg: str):
        raise FormatError(msg, path=self.path)

    def obj(self, required: tuple[str, ...] = (), optional: tuple[str, ...] = ()) -> "_Reader":
        if not isinstance(self.value, dict):
            self.fail("expected an object")
        missing = [k for k in required if k not in self.value]
        if missing:
            self.fail(f"missing key {missing[0]!r}")
        extra = sorted(set(self.value) - set(required) - set(optional))
        if extra:
            self.fail(f"unknown key {extra[0]!r}")
        return self

    def __getitem__(self, key: str) -> "_Reader":
        return _Reader(self.value[key], f"{self.path}.{key}")

    def get(self, key: str, default=None):
        return self[key] if key in self.value else _Reader(default, f"{self.path}.{key}")

    def items(self) -> list["_Reader"]:
        if not isinstance(self.value, list):
            self.fail("expected an array")
        return [_Reader(v, f"{self.path}[{i}]") for i, v in enumerate(self.value)]

    def string(self) -> str:
        if not isinstance(self.value, str):
            self.fail("expected a string")
        return self.value

    def opt_string(self) -> str | None:
        return None if self.value is None else self.string()

    def strings(self) -> tuple[str, ...]:
        return tuple(r.string() for r in self.items())

    def number(self) -> float:
        if isinstance(self.value, bool) or not isinstance(self.value, (int, float)):
            self.fail("expected a number")
        return float(self.value)

    def numbers(self) -> list[float]:
        return [r.number() for r in self.items()]


def _table(rows: _Reader, parents, domains, child_card: int | None, key="p") -> np.ndarray:
    """Dense table from keyed rows; absent rows stay NaN so validators report them."""
    shape = tuple(len(domains[p]) for p in parents) + ((child_card,) if child_card is not None else ())
    t = np.full(shape, np.nan)
    for r in rows.items():
        r.obj(("given", key))
        given = r["given"].strings()
        if len(given) != len(parents):
            r["given"].fail(f"expected {len(parents)} parent values")
        idx = []
        for p, v in zip(parents, given):
            if v not in domains[p]:
                r["given"].fail(f"{v!r} is not in the domain of {p}")
            idx.append(list(domains[p]).index(v))
        if child_card is None:
            t[tuple(idx)] = r[key].number()
        else:
            vals = r[key].numbers()
            if len(vals) != child_card:
                r[key].fail(f"expected {child_card} probabilities")
            t[tuple(idx)] = vals
    return t


def _parents_known(r: _Reader, parents, domains):
    for p in parents:
        if p not in domains:
            r.fail(f"unknown parent {p!r}")


def _dec_network(r: _Reader) -> Network:
    r.obj(("variables",))
    parsed = []
    for v in r["variables"].items():
        v.obj(("name", "domain", "parents", "rows"))
        parsed.append((v, v["name"].string(), v["domain"].strings(), v["parents"].strings()))
    domains = {name: dom for _, name, dom, _ in parsed}
    variables, cpds = [], []
    for v, name, dom, parents in parsed:
        _parents_known(v["parents"], parents, domains)
        variables.append(Variable(name, dom))
        cpds.append(Cpd(name, parents, _table(v["rows"], parents, domains, len(dom))))
    return Network(variables, cpds)


def _dec_maid(r: _Reader) -> Maid:
    r.obj(("agents", "nodes"))
    agents = r["agents"].strings()
    parsed = []
    for n in r["nodes"].items():
        n.obj(("type", "name"), ("domain", "parents", "rows", "owner", "info_parents", "group", "observed_as"))
        parsed.append((n, n["type"].string(), n["name"].string()))
    domains = {}
    for n, typ, name in parsed:
        if typ in ("chance", "decision"):
            n.obj(("type", "name", "domain"), ("parents", "rows", "owner", "info_parents", "group", "observed_as"))
            domains[name] = n["domain"].strings()
    nodes = []
    for n, typ, name in parsed:
        if typ == "chance":
            n.obj(("type", "name", "domain", "parents", "rows"))
            parents = n["parents"].strings()
            _parents_known(n["parents"], parents, domains)
            nodes.append(ChanceNode(name, domains[name],
                                    Cpd(name, parents, _table(n["rows"], parents, domains, len(domains[name])))))
        elif typ == "decision":
            n.obj(("type", "name", "domain", "owner", "info_parents"), ("group", "observed_as"))
            nodes.append(DecisionNode(name, n["owner"].string(), domains[name], n["info_parents"].strings(),
                                      n.get("group").opt_string(), n.get("observed_as").opt_string()))
        elif typ == "utility":
            n.obj(("type", "name", "owner", "parents", "rows"))
            parents = n["parents"].strings()
            _parents_known(n["parents"], parents, domains)
            nodes.append(UtilityNode(name, n["owner"].string(), parents,
                                     _table(n["rows"], parents, domains, None, key="u")))
        else:
            n["type"].fail(f"unknown node type {typ!r}")
    return Maid(agents, nodes)


def _dec_nid(r: _Reader) -> NidModel:
    r.obj(("agents", "root", "blocks"))
    agents = r["agents"].strings()
    blocks = []
    for b in r["blocks"].items():
        b.obj(("label", "maid"), ("mods",))
        label = b["label"].string()
        maid = _dec_maid(b["maid"])
        doms = maid.domains
        mods = []
        for md in b.get("mods", []).items():
            md.obj(("observer", "decision", "labels", "parents", "rows"))
            observer, decision = md["observer"].string(), md["decision"].string()
            labels = md["labels"].strings()
            parents = md["parents"].strings()
            _parents_known(md["parents"], parents, doms)
            t = _table(md["rows"], parents, doms, len(labels))
            mods.append(ModNode(observer, decision, labels, Cpd(mod_name(observer, decision), parents, t)))
        # omitted Mod nodes become point masses on their own block
        blocks.append(Block(label, maid, mods, agents))
    return NidModel(agents, blocks, r["root"].string())


def _dec_bg(r: _Reader) -> BayesianGame:
    r.obj(("agents", "beliefs", "utilities"))
    names, types, actions = [], {}, {}
    for a in r["agents"].items():
        a.obj(("name", "types", "actions"))
        name = a["name"].string()
        names.append(name)
        types[name] = list(a["types"].strings())
        actions[name] = list(a["actions"].strings())

    def index(reader, agent, label, table):
        if label not in table[agent]:
            reader.fail(f"{label!r} is not declared for {agent}")
        return table[agent].index(label)

    beliefs = {i: np.full((len(types[i]),) + tuple(len(types[j]) for j in names if j != i), np.nan)
               for i in names}
    for b in r["beliefs"].items():
        b.obj(("agent", "type", "dist"))
        i = b["agent"].string()
        if i not in types:
            b["agent"].fail(f"unknown agent {i!r}")
        k = index(b["type"], i, b["type"].string(), types)
        others = [j for j in names if j != i]
        for d in b["dist"].items():
            d.obj(("others", "p"))
            labs = d["others"].strings()
            if len(labs) != len(others):
                d["others"].fail(f"expected {len(others)} type labels")
            idx = tuple(index(d["others"], j, lab, types) for j, lab in zip(others, labs))
            beliefs[i][(k,) + idx] = d["p"].number()
    shape = tuple(len(types[a]) for a in names) + tuple(len(actions[a]) for a in names)
    utilities = {i: np.full(shape, np.nan) for i in names}
    for u in r["utilities"].items():
        u.obj(("agent", "cells"))
        i = u["agent"].string()
        if i not in types:
            u["agent"].fail(f"unknown agent {i!r}")
        for c in u["cells"].items():
            c.obj(("types", "actions", "u"))
            tl, al = c["types"].strings(), c["actions"].strings()
            if len(tl) != len(names) or len(al) != len(names):
                c.fail(f"expected {len(names)} type and action labels")
            idx = tuple(index(c["types"], a, x, types) for a, x in zip(names, tl))
            idx += tuple(index(c["actions"], a, x, actions) for a, x in zip(names, al))
            utilities[i][idx] = c["u"].number()
    return BayesianGame(names, types, actions, beliefs, utilities)


DECODERS = {"network": _dec_network, "maid": _dec_maid, "nid": _dec_nid, "bayesian_game": _dec_bg}


def _reject_constant(name):
    raise ValueError(f"non-finite number {name}")


def parse_document(text: bytes | str) -> ModelDocument:
    if isinstance(text, bytes):
        try:
            text = text.decode("utf-8")
        except UnicodeDecodeError as e:
            raise FormatError(f"invalid UTF-8 at byte {e.start}", 1, 1) from e
    try:
        raw = json.loads(text, parse_constant=_reject_constant)
    except json.JSONDecodeError as e:
        raise FormatError(e.msg, e.lineno, e.colno) from e
    except ValueError as e:
        raise FormatError(str(e), 1, 1) from e
    r = _Reader(raw, "$")
    r.obj(("format_version", "kind", "body"), ("metadata",))
    version = r["format_version"].value
    if isinstance(version, bool) or not isinstance(version, int):
        r["format_version"].fail("expected an integer")
    if version != FORMAT_VERSION:
        r["format_version"].fail(f"unsupported format version {version} (this reader understands {FORMAT_VERSION})")
    kind = r["kind"].string()
    if kind not in KINDS:
        r["kind"].fail(f"unknown kind {kind!r}; expected one of {', '.join(KINDS)}")
    meta = r.get("metadata", {})
    if not isinstance(meta.value, dict):
        meta.fail("expected an object")
    metadata = {k: meta[k].string() for k in meta.value}
    return ModelDocument(kind, DECODERS[kind](r["body"]), metadata, version)


def validate_document(doc: ModelDocument) -> ValidationReport:
    return {"network": validate_network, "maid": validate_maid, "nid": validate_nid,
            "bayesian_game": validate_bg}[doc.kind](doc.body)


def load(path) -> ModelDocument:
    with open(path, "rb") as fh:
        return parse_document(fh.read())


def save(doc: ModelDocument, path) -> None:
    with open(path, "wb") as fh:
        fh.write(serialize_document(doc))


def structurally_equal(a: ModelDocument, b: ModelDocument) -> bool:
    """Equality of the canonical structured form (numbers compared at 12 significant digits)."""
    return to_json_obj(a) == to_json_obj(b)


__all__ = [
    "FORMAT_VERSION", "KINDS", "FormatError", "ModelDocument", "parse_document", "serialize_document",
    "validate_document", "document", "load", "save", "structurally_equal", "kind_of", "to_json_obj",
]
