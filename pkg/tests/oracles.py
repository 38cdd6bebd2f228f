"""Brute-force reference computations shared by the tests."""

import itertools

import numpy as np

from nidkit.maid import Maid, Strategy, expected_utility


def pure_policies(m: Maid, decision: str):
    d = m.nodes[decision]
    doms = m.domains
    shape = tuple(len(doms[p]) for p in d.info_parents)
    rows = list(np.ndindex(*shape))
    for choice in itertools.product(range(len(d.domain)), repeat=len(rows)):
        t = np.zeros(shape + (len(d.domain),))
        for r, c in zip(rows, choice):
            t[r + (c,)] = 1.0
        yield Strategy.for_decision(m, decision, t)


def best_group_value(m: Maid, profile, decisions, agent) -> float:
    """Maximum expected utility over every combination of pure policies for ``decisions``."""
    best = -np.inf
    for combo in itertools.product(*[list(pure_policies(m, d)) for d in decisions]):
        p = dict(profile)
        p.update({d: s for d, s in zip(decisions, combo)})
        best = max(best, expected_utility(m, p, agent))
    return best


def random_profile(m: Maid, rng) -> dict:
    out = {}
    for d in m.decisions:
        shape = tuple(len(m.domains[p]) for p in d.info_parents)
        t = rng.dirichlet(np.ones(len(d.domain)), size=int(np.prod(shape, dtype=int))).reshape(
            shape + (len(d.domain),))
        out[d.name] = Strategy.for_decision(m, d.name, t)
    return out
