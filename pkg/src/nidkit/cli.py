"""Command-line interface: ``nidkit {validate,compile,solve,query,convert-bg,roshambo}``.

Exit codes: 0 success, 1 validation failure, 2 solver failure, 3 I/O or syntax error.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import roshambo
from .bayesgame import convert_bg_to_nid
from .bayesnet import InferenceError, query_marginal
from .modelformat import FormatError, ModelDocument, document, load, save, serialize_document, validate_document
from .nid import CompilationError, compile_nid_to_maid, solve_nid
from .solver import SolverConfig, SolverError, solve_maid

EXIT_OK, EXIT_INVALID, EXIT_SOLVER, EXIT_IO = 0, 1, 2, 3


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


def _load(path: str, kinds: tuple[str, ...] | None = None) -> ModelDocument:
    try:
        doc = load(path)
    except OSError as e:
        raise CliError(f"{path}: {e.strerror or e}", EXIT_IO) from e
    except FormatError as e:
        raise CliError(f"{path}:{e}", EXIT_IO) from e
    if kinds and doc.kind not in kinds:
        raise CliError(f"{path}: expected a {' or '.join(kinds)} document, got {doc.kind}", EXIT_INVALID)
    rep = validate_document(doc)
    if not rep.ok:
        raise CliError("\n".join(f"{path}: {v}" for v in rep.violations), EXIT_INVALID)
    return doc


def _write(doc: ModelDocument, path: str | None) -> None:
    try:
        if path:
            save(doc, path)
        else:
            sys.stdout.buffer.write(serialize_document(doc))
    except OSError as e:
        raise CliError(f"{path}: {e.strerror or e}", EXIT_IO) from e


def _fmt(v) -> str:
    return "[" + ", ".join(f"{x:.4f}" for x in v) + "]"


def cmd_validate(args) -> int:
    _load(args.file)
    print(f"{args.file}: valid")
    return EXIT_OK


def cmd_compile(args) -> int:
    doc = _load(args.file, ("nid",))
    try:
        c = compile_nid_to_maid(doc.body)
    except CompilationError as e:
        raise CliError(str(e), EXIT_INVALID) from e
    meta = {"name_map": json.dumps(c.name_map, sort_keys=True), "source_root": doc.body.root}
    _write(document(c.maid, meta), args.out)
    return EXIT_OK


def _strategy_obj(s) -> dict:
    return {"decision": s.decision, "info_parents": list(s.info_parents), "domain": list(s.domain),
            "rows": [{"given": list(k), "p": [round(x, 12) for x in v]} for k, v in s.rows().items()]}


def cmd_solve(args) -> int:
    doc = _load(args.file, ("maid", "nid"))
    try:
        cfg = SolverConfig(epsilon=args.epsilon, seed=args.seed, method=args.method)
    except ValueError as e:
        raise CliError(str(e), EXIT_INVALID) from e
    try:
        if doc.kind == "maid":
            rep = solve_maid(doc.body, cfg)
            if args.report == "structured":
                out = {"kind": "maid", "method": rep.method_used, "max_regret": rep.max_regret,
                       "profile": [_strategy_obj(s) for s in rep.profile.values()]}
                print(json.dumps(out, indent=2, sort_keys=True))
            else:
                print(f"method: {rep.method_used}  max regret: {rep.max_regret:.3g}")
                for s in rep.profile.values():
                    print(f"{s.decision} | {', '.join(s.info_parents) or '-'}  actions {list(s.domain)}")
                    for k, v in s.rows().items():
                        print(f"  {', '.join(k) or '()':<40} {_fmt(v)}")
        else:
            eq = solve_nid(doc.body, cfg)
            rep = eq.maid_report
            if args.report == "structured":
                out = {"kind": "nid", "method": rep.method_used, "max_regret": rep.max_regret,
                       "entries": [{"block": k, "decision": d, "theta": _strategy_obj(eq.theta[(k, d)]),
                                    "phi": _strategy_obj(eq.phi[(k, d)])} for (k, d) in eq.theta]}
                print(json.dumps(out, indent=2, sort_keys=True))
            else:
                print(f"method: {rep.method_used}  max regret: {rep.max_regret:.3g}")
                for (k, d), th in eq.theta.items():
                    ph = eq.phi[(k, d)]
                    print(f"[{k}] {d} | {', '.join(th.info_parents) or '-'}  actions {list(th.domain)}")
                    for key, v in th.rows().items():
                        print(f"  {', '.join(key) or '()':<40} theta {_fmt(v)}  phi {_fmt(ph.rows()[key])}")
    except SolverError as e:
        raise CliError(f"solver failed: {e}", EXIT_SOLVER) from e
    return EXIT_OK


def _pairs(text: str | None) -> dict[str, str]:
    out = {}
    for item in filter(None, (text or "").split(",")):
        if "=" not in item:
            raise CliError(f"bad evidence item {item!r} (expected VAR=value)", EXIT_INVALID)
        k, v = item.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def cmd_query(args) -> int:
    doc = _load(args.file, ("network",))
    targets = [t.strip() for t in args.target.split(",") if t.strip()]
    try:
        post = query_marginal(doc.body, targets, _pairs(args.evidence))
    except (InferenceError, KeyError) as e:
        raise CliError(f"query failed: {e}", EXIT_INVALID) from e
    doms = doc.body.domains
    print("  ".join(targets) + "  P")
    for idx in np.ndindex(*post.values.shape):
        print("  ".join(doms[t][i] for t, i in zip(post.scope, idx)) + f"  {post.values[idx]:.6f}")
    return EXIT_OK


def cmd_convert_bg(args) -> int:
    doc = _load(args.file, ("bayesian_game",))
    nid, mapping = convert_bg_to_nid(doc.body)
    meta = {"mapping": json.dumps({f"{a}.{t}": list(v) for (a, t), v in mapping.items()}, sort_keys=True)}
    _write(document(nid, meta), args.out)
    return EXIT_OK


def cmd_roshambo(args) -> int:
    if args.rounds < 1:
        raise CliError("--rounds must be at least 1", EXIT_INVALID)
    try:
        opponent = roshambo.make_bot(args.opponent)
    except ValueError as e:
        raise CliError(str(e), EXIT_INVALID) from e
    res = roshambo.run_match(roshambo.NidAgent(use_nid=args.solve_nid), opponent, args.rounds, args.seed)
    if args.csv:
        try:
            with open(args.csv, "w", newline="") as fh:
                fh.write(res.to_csv())
        except OSError as e:
            raise CliError(f"{args.csv}: {e.strerror or e}", EXIT_IO) from e
    last = res.log[-1]
    print(f"nid vs {args.opponent}: {res.rounds} rounds, total {res.total_score:+d}, "
          f"mean {res.mean_score:+.4f}")
    print("final weights: " + "  ".join(f"{b}={w}" for b, w in zip(roshambo.MODEL_BLOCKS, last[5:])))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="nidkit", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("validate", help="validate any model document")
    s.add_argument("file")
    s.set_defaults(func=cmd_validate)

    s = sub.add_parser("compile", help="compile a NID into a MAID document")
    s.add_argument("file")
    s.add_argument("--out")
    s.set_defaults(func=cmd_compile)

    s = sub.add_parser("solve", help="equilibrium of a MAID, or theta/phi of a NID")
    s.add_argument("file")
    s.add_argument("--epsilon", type=float, default=1e-6)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--method", default="auto",
                   choices=["auto", "backward-induction", "support-enumeration", "best-response-dynamics"])
    s.add_argument("--report", default="text", choices=["text", "structured"])
    s.set_defaults(func=cmd_solve)

    s = sub.add_parser("query", help="posterior marginal on a network")
    s.add_argument("file")
    s.add_argument("--target", required=True)
    s.add_argument("--evidence")
    s.set_defaults(func=cmd_query)

    s = sub.add_parser("convert-bg", help="Bayesian game to NID")
    s.add_argument("file")
    s.add_argument("--out")
    s.set_defaults(func=cmd_convert_bg)

    s = sub.add_parser("roshambo", help="play the NID agent against a baseline bot")
    s.add_argument("--rounds", type=int, default=1000)
    s.add_argument("--opponent", default="rotation")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--csv")
    s.add_argument("--solve-nid", action="store_true", help="solve the full NID each round (slow)")
    s.set_defaults(func=cmd_roshambo)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CliError as e:
        print(str(e), file=sys.stderr)
        return e.code


if __name__ == "__main__":
    sys.exit(main())
