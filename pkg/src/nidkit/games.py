"""Normal-form equilibrium routines: support enumeration, Lemke-Howson, pure search, damped dynamics."""

from __future__ import annotations

import itertools
from math import comb
from typing import Iterator

import numpy as np

TOL = 1e-9


def _indifferent_mix(M: np.ndarray) -> np.ndarray | None:
    """Solve M z = v 1, sum z = 1 for a square M; returns z or None if singular."""
    k = M.shape[0]
    lhs = np.zeros((k + 1, k + 1))
    lhs[:k, :k] = M
    lhs[:k, k] = -1.0
    lhs[k, :k] = 1.0
    rhs = np.zeros(k + 1)
    rhs[k] = 1.0
    try:
        sol = np.linalg.solve(lhs, rhs)
    except np.linalg.LinAlgError:
        return None
    if not np.all(np.isfinite(sol)):
        return None
    return sol[:k]


def is_bimatrix_equilibrium(A, B, x, y, tol: float = 1e-9) -> bool:
    scale = max(1.0, float(np.abs(A).max(initial=0)), float(np.abs(B).max(initial=0)))
    ay = A @ y
    xb = x @ B
    return bool(ay.max() <= x @ ay + tol * scale and xb.max() <= xb @ y + tol * scale)


def support_pairs(m: int, n: int) -> int:
    return sum(comb(m, k) * comb(n, k) for k in range(1, min(m, n) + 1))


def support_enumeration(A, B, tol: float = TOL) -> Iterator[tuple[np.ndarray, np.ndarray]]:
    """Equilibria with equal-size supports, supports visited in lexicographic order."""
    A = np.asarray(A, float)
    B = np.asarray(B, float)
    m, n = A.shape
    scale = max(1.0, float(np.abs(A).max(initial=0)), float(np.abs(B).max(initial=0)))
    for k in range(1, min(m, n) + 1):
        for I in itertools.combinations(range(m), k):
            for J in itertools.combinations(range(n), k):
                yJ = _indifferent_mix(A[np.ix_(I, J)])
                if yJ is None or yJ.min() < -tol:
                    continue
                xI = _indifferent_mix(B[np.ix_(I, J)].T)
                if xI is None or xI.min() < -tol:
                    continue
                x = np.zeros(m)
                y = np.zeros(n)
                x[list(I)] = np.clip(xI, 0, None)
                y[list(J)] = np.clip(yJ, 0, None)
                x /= x.sum()
                y /= y.sum()
                if is_bimatrix_equilibrium(A, B, x, y, tol * scale):
                    yield x, y


def _pivot(tab: np.ndarray, basis: list[int], entering: int, lex_cols: list[int]) -> int:
    """Min-ratio pivot with lexicographic tie-breaking; returns the leaving label."""
    col = tab[:, entering]
    rows = [i for i in range(tab.shape[0]) if col[i] > TOL]
    if not rows:
        raise ArithmeticError("unbounded pivot")

    def key(i):
        return tuple(tab[i, c] / col[i] for c in [-1] + lex_cols)

    best = rows[0]
    for i in rows[1:]:
        ki, kb = key(i), key(best)
        for a, b in zip(ki, kb):
            if abs(a - b) > 1e-12 * max(1.0, abs(a), abs(b)):
                if a < b:
                    best = i
                break
    tab[best] /= tab[best, entering]
    for i in range(tab.shape[0]):
        if i != best and tab[i, entering] != 0:
            tab[i] -= tab[i, entering] * tab[best]
    leaving = basis[best]
    basis[best] = entering
    return leaving


def lemke_howson(A, B, initial_label: int = 0, max_steps: int = 100000) -> tuple[np.ndarray, np.ndarray]:
    """One Lemke-Howson path from the artificial equilibrium, dropping ``initial_label``.

    Labels 0..m-1 are row strategies, m..m+n-1 column strategies.
    """
    A = np.asarray(A, float)
    B = np.asarray(B, float)
    m, n = A.shape
    A = A - A.min() + 1.0
    B = B - B.min() + 1.0
    # Q tableau: A y + r = 1, r_i carries label i, y_j carries label m+j
    q_tab = np.hstack([np.eye(m), A, np.ones((m, 1))])
    q_basis = list(range(m))
    # P tableau: B^T x + s = 1, x_i carries label i, s_j carries label m+j
    p_tab = np.hstack([B.T, np.eye(n), np.ones((n, 1))])
    p_basis = list(range(m, m + n))
    q_lex = list(range(m))
    p_lex = list(range(m, m + n))

    entering = initial_label
    in_p = initial_label < m
    for _ in range(max_steps):
        if in_p:
            leaving = _pivot(p_tab, p_basis, entering, p_lex)
        else:
            leaving = _pivot(q_tab, q_basis, entering, q_lex)
        if leaving == initial_label:
            break
        entering = leaving
        in_p = not in_p
    else:
        raise ArithmeticError("Lemke-Howson did not terminate")

    x = np.zeros(m)
    y = np.zeros(n)
    for i, lab in enumerate(p_basis):
        if lab < m:
            x[lab] = p_tab[i, -1]
    for i, lab in enumerate(q_basis):
        if lab >= m:
            y[lab - m] = q_tab[i, -1]
    x = np.clip(x, 0, None)
    y = np.clip(y, 0, None)
    if x.sum() <= 0 or y.sum() <= 0:
        raise ArithmeticError("degenerate Lemke-Howson endpoint")
    return x / x.sum(), y / y.sum()


def bimatrix_equilibria(A, B, max_support_pairs: int = 20000) -> Iterator[tuple[np.ndarray, np.ndarray, str]]:
    """Candidate equilibria in a deterministic order: support enumeration when small, then Lemke-Howson."""
    A = np.asarray(A, float)
    B = np.asarray(B, float)
    m, n = A.shape
    seen: list[tuple[np.ndarray, np.ndarray]] = []

    def fresh(x, y):
        for sx, sy in seen:
            if np.allclose(sx, x, atol=1e-10) and np.allclose(sy, y, atol=1e-10):
                return False
        seen.append((x, y))
        return True

    if support_pairs(m, n) <= max_support_pairs:
        for x, y in support_enumeration(A, B):
            if fresh(x, y):
                yield x, y, "support-enumeration"
    for label in range(m + n):
        try:
            x, y = lemke_howson(A, B, label)
        except ArithmeticError:
            continue
        if is_bimatrix_equilibrium(A, B, x, y, 1e-7) and fresh(x, y):
            yield x, y, "lemke-howson"


# --------------------------------------------------------------------------- n-player tensors


def tensor_payoff(T: np.ndarray, mixes: list[np.ndarray]) -> float:
    out = T
    for x in reversed(mixes):
        out = out @ x
    return float(out)


def deviation_values(T: np.ndarray, mixes: list[np.ndarray], player: int) -> np.ndarray:
    """Payoff of each pure strategy of ``player`` against the others' mixes."""
    out = np.moveaxis(T, player, -1)
    others = [x for i, x in enumerate(mixes) if i != player]
    for x in others:
        out = np.tensordot(x, out, axes=([0], [0]))
    return out


def tensor_regret(tensors: list[np.ndarray], mixes: list[np.ndarray]) -> float:
    worst = 0.0
    for i, T in enumerate(tensors):
        dev = deviation_values(T, mixes, i)
        worst = max(worst, float(dev.max() - dev @ mixes[i]))
    return worst


def pure_equilibria(tensors: list[np.ndarray], tol: float = 1e-9) -> Iterator[tuple[int, ...]]:
    shape = tensors[0].shape
    for prof in np.ndindex(*shape):
        ok = True
        for i, T in enumerate(tensors):
            idx = list(prof)
            idx[i] = slice(None)
            row = T[tuple(idx)]
            if row.max() > row[prof[i]] + tol * max(1.0, abs(row.max())):
                ok = False
                break
        if ok:
            yield prof


def _contract_except(T: np.ndarray, mixes: list[np.ndarray], keep: tuple[int, ...]) -> np.ndarray:
    """Contract every axis not in ``keep`` with its mix; remaining axes stay in ``keep`` order."""
    out = T
    for ax in sorted((a for a in range(T.ndim) if a not in keep), reverse=True):
        out = np.tensordot(out, mixes[ax], axes=([ax], [0]))
    return out


def _newton_support(tensors, supports, start: list[np.ndarray], iterations: int = 60) -> list[np.ndarray] | None:
    """Solve the indifference equations on fixed supports by Newton's method."""
    n = len(tensors)
    sizes = [T.shape[i] for i, T in enumerate(tensors)]
    offs = np.cumsum([0] + [len(s) for s in supports])
    z = np.concatenate([start[i][list(supports[i])] for i in range(n)] + [np.zeros(n)])

    def unpack(z):
        mixes = []
        for i in range(n):
            x = np.zeros(sizes[i])
            x[list(supports[i])] = z[offs[i]:offs[i + 1]]
            mixes.append(x)
        return mixes, z[offs[-1]:]

    last = np.inf
    for it in range(iterations):
        mixes, v = unpack(z)
        res, jac = [], []
        for i, T in enumerate(tensors):
            dev = deviation_values(T, mixes, i)[list(supports[i])]
            res.append(dev - v[i])
            rows = np.zeros((len(supports[i]), z.size))
            rows[:, offs[-1] + i] = -1.0
            for j in range(n):
                if j != i:
                    d = _contract_except(T, mixes, (i, j)) if i < j else _contract_except(T, mixes, (j, i)).T
                    rows[:, offs[j]:offs[j + 1]] = d[np.ix_(list(supports[i]), list(supports[j]))]
            jac.append(rows)
        for i in range(n):
            row = np.zeros(z.size)
            row[offs[i]:offs[i + 1]] = 1.0
            res.append(np.array([z[offs[i]:offs[i + 1]].sum() - 1.0]))
            jac.append(row[None, :])
        r, J = np.concatenate(res), np.vstack(jac)
        norm = np.abs(r).max()
        if norm < 1e-13:
            break
        if it >= 8 and norm > 0.5 * last:
            return None  # not converging quadratically; this start is not near a root
        last = norm
        z = z + np.linalg.lstsq(J, -r, rcond=None)[0]
        p = z[:offs[-1]]
        if not np.isfinite(z).all() or p.min() < -0.5 or p.max() > 1.5:
            return None
    mixes, _ = unpack(z)
    if min(x.min() for x in mixes) < -1e-9:
        return None
    return [np.clip(x, 0, None) / np.clip(x, 0, None).sum() for x in mixes]


def _conditionally_dominated(tensors, supports) -> bool:
    """True if some support action is strictly beaten by another action against every opposing support cell."""
    for i, T in enumerate(tensors):
        sub = T[np.ix_(*[list(c) if j != i else range(T.shape[i]) for j, c in enumerate(supports)])]
        sub = np.moveaxis(sub, i, 0).reshape(T.shape[i], -1)
        for a in supports[i]:
            if (sub > sub[a] + 1e-12).all(axis=1).any():
                return True
    return False


def iterated_dominance(tensors: list[np.ndarray], tol: float = 1e-12) -> list[list[int]]:
    """Indices surviving iterated removal of pure strategies strictly dominated by a pure strategy."""
    keep = [list(range(T.shape[i])) for i, T in enumerate(tensors)]
    changed = True
    while changed:
        changed = False
        for i, T in enumerate(tensors):
            sub = np.moveaxis(T[np.ix_(*keep)], i, 0).reshape(len(keep[i]), -1)
            for a in range(len(keep[i])):
                if len(keep[i]) > 1 and (sub > sub[a] + tol).all(axis=1).any():
                    del keep[i][a]
                    changed = True
                    break
            if changed:
                break
    return keep


def _support_profiles(sizes: list[int]) -> Iterator[tuple[tuple[int, ...], ...]]:
    """Support profiles by increasing total size, balanced size vectors first."""
    for total in range(len(sizes), sum(sizes) + 1):
        shapes = [k for k in itertools.product(*[range(1, s + 1) for s in sizes]) if sum(k) == total]
        shapes.sort(key=lambda k: (max(k) - min(k), k))
        for k in shapes:
            yield from itertools.product(*[itertools.combinations(range(s), c) for s, c in zip(sizes, k)])


def nplayer_support_enumeration(tensors: list[np.ndarray], tol: float = 1e-9, max_supports: int = 20000,
                                starts: int = 3, seed: int = 0) -> Iterator[list[np.ndarray]]:
    """Mixed equilibria of an n-player game, searching support profiles from the smallest up.

    Strictly dominated strategies are removed first. Each remaining support profile is solved
    by Newton iterations from a uniform and a few seeded random starts; only profiles passing
    the exact regret check on the full game are yielded. At most ``max_supports`` profiles are tried.
    """
    n = len(tensors)
    keep = iterated_dominance(tensors)
    small = [T[np.ix_(*keep)] for T in tensors]
    sizes = [len(k) for k in keep]
    full = [T.shape[i] for i, T in enumerate(tensors)]
    rng = np.random.default_rng(seed)
    tried = 0
    for supports in _support_profiles(sizes):
        if all(len(c) == 1 for c in supports) or _conditionally_dominated(small, supports):
            continue
        tried += 1
        if tried > max_supports:
            return
        for k in range(starts):
            start = []
            for i in range(n):
                x = np.zeros(sizes[i])
                idx = list(supports[i])
                x[idx] = 1.0 / len(idx) if k == 0 else rng.dirichlet(np.ones(len(idx)))
                start.append(x)
            mixes = _newton_support(small, supports, start)
            if mixes is None:
                continue
            lifted = []
            for i in range(n):
                x = np.zeros(full[i])
                x[keep[i]] = mixes[i]
                lifted.append(x)
            if tensor_regret(tensors, lifted) <= tol:
                yield lifted
                break


def damped_dynamics(tensors: list[np.ndarray], init: list[np.ndarray], iterations: int,
                    damping: float = 0.5, tol: float = 1e-9) -> list[np.ndarray]:
    """Simultaneous damped best-response dynamics; returns the lowest-regret iterate seen."""
    mixes = [x.copy() for x in init]
    best, best_regret = [x.copy() for x in mixes], tensor_regret(tensors, mixes)
    for t in range(iterations):
        new = []
        for i, T in enumerate(tensors):
            dev = deviation_values(T, mixes, i)
            br = np.zeros_like(dev)
            br[int(np.flatnonzero(dev >= dev.max() - tol)[0])] = 1.0
            step = damping / (1.0 + t * 0.01)
            new.append((1 - step) * mixes[i] + step * br)
        mixes = new
        r = tensor_regret(tensors, mixes)
        if r < best_regret:
            best, best_regret = [x.copy() for x in mixes], r
        if r <= tol:
            break
    return best
