"""Side-by-side comparison of computed equilibria with the published reference values.

Every entry is report-and-compare: a numeric entry matches when it lies within
``MATCH_TOL`` of the reference, a qualitative entry when the computed action equals it.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import fixtures as F
from .bayesnet import InconsistentEvidenceError, query_marginal
from .maid import implement_profile
from .nid import solve_nid
from .solver import solve_maid, verify_epsilon_nash

MATCH_TOL = 0.02
VARIANTS = ("three", "two")


@dataclass
class ReproEntry:
    example: str
    quantity: str
    reference: float | str
    computed: float | str | None
    variant: str = "-"
    regret: float = 0.0

    @property
    def matches(self) -> bool:
        if self.computed is None:
            return False
        if isinstance(self.reference, str):
            return self.reference == self.computed
        return abs(float(self.computed) - self.reference) <= MATCH_TOL

    def line(self) -> str:
        if self.computed is None:
            shown = "undefined"
        elif isinstance(self.computed, str):
            shown = self.computed
        else:
            shown = f"{self.computed:.4f}"
        verdict = "match within 0.02" if self.matches else f"differs (computed {shown})"
        if isinstance(self.reference, str):
            verdict = "match" if self.matches else f"differs (computed {shown})"
        ref = self.reference if isinstance(self.reference, str) else f"{self.reference:.2f}"
        return f"{self.example:<7} {self.variant:<5} {self.quantity:<46} ref {ref:<8} {verdict}"


def _p(strategy, *info: str, action: str = "true") -> float:
    return float(strategy.row(*info)[strategy.domain.index(action)])


def _argmax_label(strategy, *info: str) -> str:
    row = strategy.row(*info)
    return strategy.domain[int(row.argmax())]


def steal_entries(variant: str) -> list[ReproEntry]:
    m = F.steal_maid(variant)
    rep = solve_maid(m)
    r = verify_epsilon_nash(m, rep.profile, 1e-6).max_regret
    s, po = rep.profile["Steal"], rep.profile["PitchOut"]
    out = [
        ReproEntry("steal", "P(steal | alice leads)", 0.2, _p(s, "alice"), variant, r),
        ReproEntry("steal", "P(pitch out | alice leads)", 0.3, _p(po, "alice"), variant, r),
        ReproEntry("steal", "P(steal | bob leads)", 0.8, _p(s, "bob"), variant, r),
        ReproEntry("steal", "P(pitch out | bob leads)", 0.5, _p(po, "bob"), variant, r),
    ]
    net = implement_profile(m, rep.profile)
    out.append(ReproEntry("steal", "P(ThrownOut) under the equilibrium", 0.57,
                          float(query_marginal(net, ["ThrownOut"]).values[0]), variant, r))
    try:
        cond = float(query_marginal(net, ["ThrownOut"], {"Steal": "true"}).values[0])
    except InconsistentEvidenceError:
        cond = None
    out.append(ReproEntry("steal", "P(ThrownOut | steal) under the equilibrium", 0.57, cond, variant, r))
    return out


def expert_entries(variant: str) -> list[ReproEntry]:
    eq = solve_nid(F.expert_nid(variant))
    r = eq.maid_report.max_regret
    s, po = eq.theta[("TL", "Steal")], eq.theta[("TL", "PitchOut")]
    return [
        ReproEntry("expert", "TL P(steal | alice leads)", 0.56, _p(s, "alice"), variant, r),
        ReproEntry("expert", "TL P(pitch out | alice leads)", 0.47, _p(po, "alice"), variant, r),
        ReproEntry("expert", "TL P(steal | bob leads)", 0.0, _p(s, "bob"), variant, r),
        ReproEntry("expert", "TL P(pitch out | bob leads)", 0.0, _p(po, "bob"), variant, r),
    ]


def marketing_entries() -> list[ReproEntry]:
    eq = solve_nid(F.marketing_nid())
    r = eq.maid_report.max_regret
    adv, inc = eq.theta[("TL", "Advertise")], eq.theta[("TL", "Increase")]
    rational = solve_maid(F._marketing_maid(F.SALES_TL, False))
    return [
        ReproEntry("market", "TL advertise", "false", _argmax_label(adv), "-", r),
        ReproEntry("market", "TL increase after not advertising", "false", _argmax_label(inc, "false"), "-", r),
        ReproEntry("market", "Bias phi(increase)", 1.0, _p(eq.phi[("Bias", "Increase")], "true"), "-", r),
        ReproEntry("market", "TL phi(increase | advertise)", 1.0, _p(eq.phi[("TL", "Increase")], "true"), "-", r),
        ReproEntry("market", "unbiased company advertises", "true",
                   _argmax_label(rational.profile["Advertise"]), "-", rational.max_regret),
        ReproEntry("market", "TL played increase after advertising", "true",
                   _argmax_label(eq.phi[("TL", "Increase")], "true"), "-", r),
        ReproEntry("market", "unbiased increase after advertising", "false",
                   _argmax_label(rational.profile["Increase"], "true"), "-", rational.max_regret),
    ]


def _two_pitch_marginal(variant, eq, decision: str, source: str, leader: str) -> float:
    """P(decision = true | Leader) in the TL block with first-pitch play from the equilibrium."""
    m = F.two_pitch_maid(variant)
    prof = {d: eq.theta[("TL", d)] for d in ("Steal1", "PitchOut1", "Steal2", "PitchOut2")}
    if source == "phi":
        prof[decision] = eq.phi[("TL", decision)]
    net = implement_profile(m, prof)
    return float(query_marginal(net, [decision], {"Leader": leader}).values[0])


def two_pitch_entries(variant: str) -> list[ReproEntry]:
    eq = solve_nid(F.two_pitch_nid(variant))
    r = eq.maid_report.max_regret
    rows = [
        ("Steal1", "theta", "alice", 0.49), ("Steal1", "theta", "bob", 0.0),
        ("PitchOut1", "theta", "alice", 0.38), ("PitchOut1", "theta", "bob", 0.51),
        ("Steal2", "theta", "alice", 0.42), ("Steal2", "theta", "bob", 0.0),
        ("PitchOut2", "theta", "alice", 0.2), ("PitchOut2", "theta", "bob", 0.52),
        ("PitchOut2", "phi", "alice", 0.58), ("PitchOut2", "phi", "bob", 0.71),
    ]
    return [ReproEntry("2pitch", f"TL {src} P({d} | {lead} leads)", ref,
                       _two_pitch_marginal(variant, eq, d, src, lead), variant, r)
            for d, src, lead, ref in rows]


def runner_speed_entries(variant: str) -> list[ReproEntry]:
    eq = solve_nid(F.runner_speed_nid(variant))
    r = eq.maid_report.max_regret
    out = []
    for lead in ("alice", "bob"):
        out += [
            ReproEntry("runner", f"TL P(pitch out | {lead} leads)", 0.0, _p(eq.theta[("TL", "PitchOut")], lead), variant, r),
            ReproEntry("runner", f"TL P(steal | {lead} leads)", 0.0, _p(eq.theta[("TL", "Steal")], lead), variant, r),
            ReproEntry("runner", f"L P(steal | {lead} leads)", 1.0, _p(eq.theta[("L", "Steal")], lead), variant, r),
            ReproEntry("runner", f"L P(pitch out | {lead} leads)", 1.0, _p(eq.theta[("L", "PitchOut")], lead), variant, r),
        ]
    return out


def voting_entries() -> list[ReproEntry]:
    eq = solve_nid(F.voting_nid())
    r = eq.maid_report.max_regret
    a, b, c = (eq.theta[("TL", d)] for d in "ABC")
    return [
        ReproEntry("vote", "TL P(Alice votes Carol)", 1.0, _p(a, action="Carol"), "-", r),
        ReproEntry("vote", "TL P(Carol votes Carol)", 0.5, _p(c, action="Carol"), "-", r),
        ReproEntry("vote", "TL P(Carol votes Bob)", 0.5, _p(c, action="Bob"), "-", r),
        ReproEntry("vote", "TL P(Bob votes Bob)", 1.0, _p(b, action="Bob"), "-", r),
    ]


def mutual_speed_entries(variant: str) -> list[ReproEntry]:
    eq = solve_nid(F.mutual_speed_nid(variant))
    r = eq.maid_report.max_regret
    out = []
    for k in ("TL", "L"):
        for lead in ("alice", "bob"):
            out += [
                ReproEntry("mutual", f"{k} P(steal | {lead} leads)", 0.0, _p(eq.theta[(k, "Steal")], lead), variant, r),
                ReproEntry("mutual", f"{k} P(pitch out | {lead} leads)", 0.0,
                           _p(eq.theta[(k, "PitchOut")], lead), variant, r),
            ]
    return out


def first_pitch_comparison(variant: str) -> tuple[float, float]:
    """Bob's TL pitch-out probability (alice leading) with possible second-pitch irrationality vs the expert model."""
    two = solve_nid(F.two_pitch_nid(variant))
    expert = solve_nid(F.expert_nid(variant))
    return _p(two.theta[("TL", "PitchOut1")], "alice"), _p(expert.theta[("TL", "PitchOut")], "alice")


def reproduction_report() -> list[ReproEntry]:
    out: list[ReproEntry] = []
    for v in VARIANTS:
        out += steal_entries(v) + expert_entries(v)
    out += marketing_entries()
    for v in VARIANTS:
        out += two_pitch_entries(v) + runner_speed_entries(v)
    out += voting_entries()
    for v in VARIANTS:
        out += mutual_speed_entries(v)
    return out


def format_report(entries: list[ReproEntry]) -> str:
    lines = [e.line() for e in entries]
    n = sum(e.matches for e in entries)
    worst = max(e.regret for e in entries)
    lines.append(f"{n}/{len(entries)} entries match; worst equilibrium regret {worst:.2e}")
    return "\n".join(lines)
