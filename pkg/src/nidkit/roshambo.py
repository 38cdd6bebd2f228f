"""Repeated rock-paper-scissors against an opponent model expressed as a NID.

The modelling agent ("Bob") keeps a mixture over four explanations of the opponent ("Alice"):
uniform Nash play, an automaton that follows a sequence predictor P, and two levels of
iterated best response to P. Each round it best-responds to the mixture and then reweights
the explanations by how well each one predicted the opponent's actual move.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .fixtures import MOVES, RPS_PAYOFF
from .maid import TIE_TOL, ChanceNode, DecisionNode, Maid, UtilityNode
from .bayesnet import Cpd
from .nid import Block, ModNode, NidModel, solve_nid
from .solver import SolverConfig

MODEL_BLOCKS = ("Nash", "Automaton", "A1", "A2")
LOG_HEADER = ("round", "move_a", "move_b", "score_a", "cum_a", "w_nash", "w_automaton", "w_a1", "w_a2")

History = list  # of (own move index, opponent move index)


def score(a: int, b: int) -> int:
    """Round score for the player of move ``a`` against move ``b``."""
    return int(RPS_PAYOFF[a, b])


def _first_best(values: np.ndarray) -> int:
    top = values.max()
    return int(np.flatnonzero(values >= top - TIE_TOL * max(1.0, abs(top)))[0])


def best_response(dist: np.ndarray) -> int:
    """Move maximizing expected payoff against an opponent move distribution (lowest index on ties)."""
    return _first_best(RPS_PAYOFF @ np.asarray(dist, float))


# --------------------------------------------------------------------------- predictor


@dataclass
class Predictor:
    """Laplace-smoothed frequency of the opponent's next move given the last ``k`` joint moves."""

    k: int = 1
    alpha: float = 1.0
    counts: dict = field(default_factory=dict)

    def context(self, h: Sequence[tuple[int, int]]) -> tuple | None:
        if len(h) < self.k:
            return None
        return tuple(tuple(x) for x in h[len(h) - self.k:]) if self.k else ()

    def predict(self, h: Sequence[tuple[int, int]]) -> np.ndarray:
        ctx = self.context(h)
        c = self.counts.get(ctx) if ctx is not None else None
        if c is None:
            return np.full(3, 1.0 / 3)
        return (c + self.alpha) / (c.sum() + 3 * self.alpha)

    def observe(self, h: Sequence[tuple[int, int]], move: int) -> None:
        """Count ``move`` as the opponent's reply to the context at the end of ``h``."""
        ctx = self.context(h)
        if ctx is None:
            return
        c = self.counts.setdefault(ctx, np.zeros(3))
        c[move] += 1

    @classmethod
    def fit(cls, k: int, h: Sequence[tuple[int, int]], alpha: float = 1.0) -> "Predictor":
        p = cls(k, alpha)
        for t in range(len(h)):
            p.observe(h[:t], h[t][1])
        return p


@dataclass
class MixturePredictor:
    """Orders 0..max_k combined by their cumulative predictive likelihood."""

    max_k: int = 3
    alpha: float = 1.0
    members: list = field(default_factory=list)
    log_weights: np.ndarray | None = None

    def __post_init__(self):
        if not self.members:
            self.members = [Predictor(k, self.alpha) for k in range(self.max_k + 1)]
        if self.log_weights is None:
            self.log_weights = np.zeros(len(self.members))

    def mixture_weights(self) -> np.ndarray:
        w = np.exp(self.log_weights - self.log_weights.max())
        return w / w.sum()

    def predict(self, h: Sequence[tuple[int, int]]) -> np.ndarray:
        preds = np.array([m.predict(h) for m in self.members])
        out = self.mixture_weights() @ preds
        return out / out.sum()

    def observe(self, h: Sequence[tuple[int, int]], move: int) -> None:
        for i, m in enumerate(self.members):
            self.log_weights[i] += np.log(m.predict(h)[move])
            m.observe(h, move)


def predictor_predict(p, h: Sequence[tuple[int, int]]) -> np.ndarray:
    return p.predict(h)


# --------------------------------------------------------------------------- opponent model


@dataclass
class OpponentModelState:
    weights: np.ndarray = field(default_factory=lambda: np.full(len(MODEL_BLOCKS), 1.0 / len(MODEL_BLOCKS)))
    floor: float = 0.01
    predictor: MixturePredictor = field(default_factory=MixturePredictor)

    def weight(self, block: str) -> float:
        return float(self.weights[MODEL_BLOCKS.index(block)])


def floor_weights(w: np.ndarray, floor: float) -> np.ndarray:
    """Closest-by-scaling distribution with every entry at least ``floor``."""
    w = np.asarray(w, float) / np.sum(w)
    fixed = np.zeros(len(w), bool)
    for _ in range(len(w)):
        low = (w < floor) & ~fixed
        if not low.any():
            break
        fixed |= low
        free = ~fixed
        rest = 1.0 - floor * fixed.sum()
        w = np.where(fixed, floor, w * rest / w[free].sum() if free.any() else 0.0)
    return w


def posterior_weights(weights: np.ndarray, predicted: np.ndarray, observed: int) -> np.ndarray:
    """Bayes update w_b * P_b(observed), renormalized; unchanged if every block gives probability 0."""
    w = np.asarray(weights, float) * np.asarray(predicted, float)[:, observed]
    return w / w.sum() if w.sum() > 0 else np.asarray(weights, float).copy()


def update_weights(state: OpponentModelState, predicted: np.ndarray, observed: int,
                   history: Sequence[tuple[int, int]] | None = None) -> OpponentModelState:
    """New state with reweighted blocks; the predictor (shared) also learns the observed move."""
    w = floor_weights(posterior_weights(state.weights, predicted, observed), state.floor)
    if history is not None:
        state.predictor.observe(history, observed)
    return replace(state, weights=w)


def block_predictions(p: np.ndarray) -> tuple[np.ndarray, dict[str, int]]:
    """Opponent move distribution under each model block, plus the pure moves along the BR ladder."""
    b1 = best_response(p)
    a1 = best_response(np.eye(3)[b1])
    b2 = best_response(np.eye(3)[a1])
    a2 = best_response(np.eye(3)[b2])
    rows = np.array([np.full(3, 1.0 / 3), p, np.eye(3)[a1], np.eye(3)[a2]])
    return rows, {"B1": b1, "A1": a1, "B2": b2, "A2": a2}


def _rps_maid(fixed_alice: Cpd | None = None, with_p: np.ndarray | None = None) -> Maid:
    nodes: list = []
    if with_p is not None:
        nodes.append(ChanceNode("P", MOVES, Cpd("P", (), with_p)))
    if fixed_alice is not None:
        nodes.append(ChanceNode("Alice", MOVES, fixed_alice))
        return Maid(["Alice", "Bob"], nodes)
    nodes += [DecisionNode("Alice", "Alice", MOVES), DecisionNode("Bob", "Bob", MOVES),
              UtilityNode("UA", "Alice", ("Alice", "Bob"), RPS_PAYOFF.copy()),
              UtilityNode("UB", "Bob", ("Alice", "Bob"), RPS_PAYOFF.T.copy())]
    return Maid(["Alice", "Bob"], nodes)


def build_opponent_model_nid(state: OpponentModelState, h: Sequence[tuple[int, int]]) -> NidModel:
    p = np.asarray(state.predictor.predict(h), float)
    blocks = [
        Block("TL", _rps_maid(), [ModNode.from_probs("Bob", "Alice", dict(zip(MODEL_BLOCKS, state.weights)))]),
        Block("Nash", _rps_maid(fixed_alice=Cpd("Alice", (), np.full(3, 1.0 / 3)))),
        Block("Automaton", _rps_maid(fixed_alice=Cpd("Alice", ("P",), np.eye(3)), with_p=p)),
        Block("B1", _rps_maid(), [ModNode.point_mass("Bob", "Alice", "Automaton")]),
        Block("A1", _rps_maid(), [ModNode.point_mass("Alice", "Bob", "B1")]),
        Block("B2", _rps_maid(), [ModNode.point_mass("Bob", "Alice", "A1")]),
        Block("A2", _rps_maid(), [ModNode.point_mass("Alice", "Bob", "B2")]),
    ]
    return NidModel(["Alice", "Bob"], blocks, "TL")


def choose_move_nid(state: OpponentModelState, h: Sequence[tuple[int, int]], seed: int,
                    cfg: SolverConfig | None = None) -> int:
    """Solve the opponent-model NID and sample Bob's top-level best response."""
    eq = solve_nid(build_opponent_model_nid(state, h), cfg)
    dist = eq.theta[("TL", "Bob")].table.reshape(-1)
    return int(np.random.default_rng(seed).choice(3, p=dist / dist.sum()))


def choose_move(state: OpponentModelState, h: Sequence[tuple[int, int]], seed: int = 0) -> int:
    """Closed-form equivalent of :func:`choose_move_nid` (pure best response, so ``seed`` is unused)."""
    rows, _ = block_predictions(state.predictor.predict(h))
    return best_response(state.weights @ rows)


# --------------------------------------------------------------------------- bots


class Bot:
    name = "bot"

    def reset(self, rng: np.random.Generator) -> None:
        self.rng = rng

    def move(self, h: Sequence[tuple[int, int]]) -> int:
        raise NotImplementedError

    def observe(self, h: Sequence[tuple[int, int]], own: int, opp: int) -> None:
        """``h`` is the history before this round, from this bot's side."""

    def weights(self) -> np.ndarray | None:
        return None


class NashBot(Bot):
    name = "uniform-nash"

    def move(self, h):
        return int(self.rng.integers(3))


class RotationBot(Bot):
    name = "rotation"

    def move(self, h):
        return len(h) % 3


class CopyLastBot(Bot):
    name = "copy-last"

    def move(self, h):
        return h[-1][1] if h else int(self.rng.integers(3))


class FrequencyBot(Bot):
    """Best response to the opponent's most frequent move so far."""

    name = "frequency-br"

    def reset(self, rng):
        super().reset(rng)
        self.counts = np.zeros(3)

    def move(self, h):
        return best_response(np.eye(3)[int(np.argmax(self.counts))]) if h else int(self.rng.integers(3))

    def observe(self, h, own, opp):
        self.counts[opp] += 1


class AntiFrequencyBot(Bot):
    """Assumes the opponent plays the frequency best response to our own history and beats that."""

    name = "anti-frequency"

    def reset(self, rng):
        super().reset(rng)
        self.own = np.zeros(3)

    def move(self, h):
        if not h:
            return int(self.rng.integers(3))
        their = best_response(np.eye(3)[int(np.argmax(self.own))])
        return best_response(np.eye(3)[their])

    def observe(self, h, own, opp):
        self.own[own] += 1


def de_bruijn(k: int, n: int) -> list[int]:
    """Lexicographically least de Bruijn sequence B(k, n)."""
    a = [0] * k * n
    seq: list[int] = []

    def db(t, p):
        if t > n:
            if n % p == 0:
                seq.extend(a[1:p + 1])
        else:
            a[t] = a[t - p]
            db(t + 1, p)
            for j in range(a[t - p] + 1, k):
                a[t] = j
                db(t + 1, t)

    db(1, 1)
    return seq


class DeBruijnBot(Bot):
    name = "de-bruijn"
    pattern = de_bruijn(3, 3)

    def move(self, h):
        return self.pattern[len(h) % len(self.pattern)]


class AutomatonBot(Bot):
    """Plays the argmax of the same predictor the NID agent runs on this bot's moves."""

    name = "automaton"

    def reset(self, rng):
        super().reset(rng)
        self.predictor = MixturePredictor()

    def move(self, h):
        mirrored = [(o, s) for s, o in h]
        return _first_best(self.predictor.predict(mirrored))

    def observe(self, h, own, opp):
        self.predictor.observe([(o, s) for s, o in h], own)


class NidAgent(Bot):
    name = "nid"

    def __init__(self, floor: float = 0.01, max_k: int = 3, use_nid: bool = False):
        self.floor = floor
        self.max_k = max_k
        self.use_nid = use_nid

    def reset(self, rng):
        super().reset(rng)
        self.state = OpponentModelState(floor=self.floor, predictor=MixturePredictor(self.max_k))

    def move(self, h):
        if self.use_nid:
            return choose_move_nid(self.state, h, int(self.rng.integers(2**31)))
        return choose_move(self.state, h)

    def observe(self, h, own, opp):
        rows, _ = block_predictions(self.state.predictor.predict(h))
        self.state = update_weights(self.state, rows, opp, h)

    def weights(self):
        return self.state.weights


BOTS = {cls.name: cls for cls in (NashBot, RotationBot, CopyLastBot, FrequencyBot, AntiFrequencyBot,
                                  DeBruijnBot, AutomatonBot, NidAgent)}


def make_bot(name: str) -> Bot:
    if name not in BOTS:
        raise ValueError(f"unknown bot {name!r}; choose from {', '.join(sorted(BOTS))}")
    return BOTS[name]()


# --------------------------------------------------------------------------- matches


@dataclass
class MatchResult:
    rounds: int
    total_score: int
    log: list[tuple]

    @property
    def mean_score(self) -> float:
        return self.total_score / self.rounds

    def mean_after(self, burn_in: int) -> float:
        tail = self.log[burn_in:]
        return sum(r[3] for r in tail) / len(tail)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(LOG_HEADER)
        w.writerows(self.log)
        return buf.getvalue()


def run_match(agent_a: Bot, agent_b: Bot, rounds: int, seed: int) -> MatchResult:
    if rounds < 1:
        raise ValueError("rounds must be at least 1")
    ra, rb = (np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(2))
    agent_a.reset(ra)
    agent_b.reset(rb)
    ha: list[tuple[int, int]] = []
    hb: list[tuple[int, int]] = []
    cum = 0
    log = []
    for t in range(rounds):
        a = agent_a.move(ha)
        b = agent_b.move(hb)
        s = score(a, b)
        cum += s
        agent_a.observe(ha, a, b)
        agent_b.observe(hb, b, a)
        ha.append((a, b))
        hb.append((b, a))
        w = agent_a.weights()
        wcols = [f"{x:.6f}" for x in w] if w is not None else [""] * 4
        log.append((t + 1, MOVES[a], MOVES[b], s, cum, *wcols))
    return MatchResult(rounds, cum, log)


__all__ = [
    "MODEL_BLOCKS", "LOG_HEADER", "Predictor", "MixturePredictor", "OpponentModelState", "MatchResult",
    "predictor_predict", "update_weights", "posterior_weights", "floor_weights", "build_opponent_model_nid",
    "choose_move", "choose_move_nid", "block_predictions", "best_response", "run_match", "make_bot", "BOTS",
    "Bot", "NidAgent", "score", "de_bruijn",
]
