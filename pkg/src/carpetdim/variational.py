"""Entropy functionals on the probability simplex over cells.

For a probability vector ``q`` over the ``d`` cells::

    QQ = sum_l q_l log q_l          RA = sum_l q_l log a_{i_l}
    RR = sum_i R_i log R_i          SB = sum_l q_l log b_{j_l}
    SS = sum_j S_j log S_j

with column masses ``R_i`` and row masses ``S_j`` (``0 log 0 = 0``).  The
Hausdorff dimension is ``max(G1, G2)`` where ``G1 = max g1`` and
``G2 = max g2``::

    g1 = RR/RA + (QQ - RR)/SB       g2 = SS/SB + (QQ - SS)/RA

and the box dimension is the maximum of ``f``, built from ``f1``/``f2``.
Direction-2 quantities are computed as direction-1 quantities of the
transposed carpet.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .carpet import CarpetSpec
from .parallel import pmap
from .roots import assouad_lower_profile

SIMPLEX_TOL = 1e-12
TIE_TOL = 1e-9
LATTICE_LIMIT = 10**8

OBJECTIVES = ("g1", "g2", "g", "f1", "f2", "f")


class GuardError(RuntimeError):
    """A desk-scale size guard refused the request."""

    def __init__(self, guard: str, message: str):
        super().__init__(f"{guard}: {message}")
        self.guard = guard


def _xlogx(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    pos = x > 0
    out[pos] = x[pos] * np.log(x[pos])
    return out


def as_simplex_point(q, d: int | None = None) -> np.ndarray:
    """Validate ``q`` as a probability vector and return it as an array."""
    q = np.asarray(q, dtype=float)
    if q.ndim != 1:
        raise ValueError("q must be a vector")
    if d is not None and q.size != d:
        raise ValueError(f"q has {q.size} entries, carpet has {d} cells")
    if np.any(q < 0) or not np.all(np.isfinite(q)):
        raise ValueError("q has negative or non-finite entries")
    if abs(q.sum() - 1.0) > SIMPLEX_TOL * max(1, q.size):
        raise ValueError(f"q sums to {q.sum()!r}, not 1")
    return q


def is_interior(q) -> bool:
    return bool(np.min(q) > 0)


@dataclass(frozen=True)
class EntropyStats:
    QQ: float
    RR: float
    SS: float
    RA: float
    SB: float
    R: np.ndarray = field(repr=False)
    S: np.ndarray = field(repr=False)

    @property
    def in_S1(self) -> bool:
        return self.RA >= self.SB

    @property
    def in_S2(self) -> bool:
        return self.RA <= self.SB


def entropy_stats(spec: CarpetSpec, q) -> EntropyStats:
    q = as_simplex_point(q, spec.d)
    R = np.bincount(spec.col, q, minlength=spec.r)
    S = np.bincount(spec.row, q, minlength=spec.s)
    return EntropyStats(
        QQ=float(_xlogx(q).sum()),
        RR=float(_xlogx(R).sum()),
        SS=float(_xlogx(S).sum()),
        RA=float(q @ spec.log_widths),
        SB=float(q @ spec.log_heights),
        R=R,
        S=S,
    )


def _g1(st: EntropyStats) -> float:
    return st.RR / st.RA + (st.QQ - st.RR) / st.SB


def _g2(st: EntropyStats) -> float:
    return st.SS / st.SB + (st.QQ - st.SS) / st.RA


def eval_objective(spec: CarpetSpec, q, which: str) -> float:
    """Evaluate one of ``g1, g2, g, f1, f2, f`` at ``q``.

    ``g`` and ``f`` take the direction-1 branch on ``RA >= SB``.
    """
    if which not in OBJECTIVES:
        raise ValueError(f"unknown objective {which!r}")
    st = entropy_stats(spec, q)
    if st.RA == 0 or st.SB == 0:
        raise ZeroDivisionError("degenerate denominator")
    if which == "g":
        which = "g1" if st.in_S1 else "g2"
    elif which == "f":
        which = "f1" if st.in_S1 else "f2"
    if which == "g1":
        return _g1(st)
    if which == "g2":
        return _g2(st)
    prof = assouad_lower_profile(spec)
    if which == "f1":
        return (st.QQ - prof.t1 * (st.RA - st.SB)) / st.SB
    return (st.QQ - prof.t2 * (st.SB - st.RA)) / st.RA


def box_maximizers(spec: CarpetSpec) -> tuple[np.ndarray, np.ndarray]:
    """Maximizers of ``f1`` and ``f2``: ``(a^t1 b^(D1-t1))`` and ``(b^t2 a^(D2-t2))``."""
    p = assouad_lower_profile(spec)
    a, b = spec.cell_widths, spec.cell_heights
    q1 = a**p.t1 * b ** (p.D1 - p.t1)
    q2 = b**p.t2 * a ** (p.D2 - p.t2)
    return q1 / q1.sum(), q2 / q2.sum()


# ---------------------------------------------------------------------------
# Maximizer of g1 / g2


@dataclass(frozen=True)
class MaximizerResult:
    value: float
    q: np.ndarray = field(repr=False)
    theta: float
    lam: float
    rho: float
    converged: bool
    restarts: int
    iterations: int
    stationarity: float
    normalization: float
    distinct_argmaxes: tuple = field(default=(), repr=False)


def _stats1(q, col, r, la, lb):
    R = np.bincount(col, q, minlength=r)
    RR = float(_xlogx(R).sum())
    QQ = float(_xlogx(q).sum())
    return RR, QQ, float(q @ la), float(q @ lb)


def _multipliers(q, col, r, la, lb):
    RR, QQ, RA, SB = _stats1(q, col, r, la, lb)
    return RR / RA, (QQ - RR) / SB, RA / SB, RR / RA + (QQ - RR) / SB


def _closed_form(theta, lam, rho, col, r, la, lb):
    """The maximizer shape ``a^theta b^lam (sum_{m in I} b^lam)^(rho-1)``."""
    blam = np.exp(lam * lb)
    Z = np.bincount(col, blam, minlength=r)
    return np.exp(theta * la) * blam * Z[col] ** (rho - 1), Z


def _fixed_point(q, col, r, la, lb, tol, max_iter):
    q = np.maximum(q, 1e-16)
    q = q / q.sum()
    w = 1.0
    theta, lam, rho, value = _multipliers(q, col, r, la, lb)
    it = 0
    step_size = math.inf
    for it in range(1, max_iter + 1):
        raw, _ = _closed_form(theta, lam, rho, col, r, la, lb)
        target = raw / raw.sum()
        step_size = float(np.abs(target - q).max())
        if step_size < tol:
            break
        cand = np.maximum((1 - w) * q + w * target, 1e-16)
        cand /= cand.sum()
        c_theta, c_lam, c_rho, c_value = _multipliers(cand, col, r, la, lb)
        if c_value < value - 1e-15:
            w *= 0.5
            if w < 1e-9:
                break
            continue
        q, theta, lam, rho, value = cand, c_theta, c_lam, c_rho, c_value
    return q, value, it, step_size


def _direction_view(spec: CarpetSpec, which: str) -> CarpetSpec:
    if which == "g1":
        return spec
    if which == "g2":
        return spec.transpose()
    raise ValueError("maximize_objective handles 'g1' or 'g2'")


@lru_cache(maxsize=4096)
def maximize_objective(
    spec: CarpetSpec,
    which: str = "g1",
    starts: int = 16,
    seed: int = 0,
    tol: float = 1e-12,
    max_iter: int = 10_000,
) -> MaximizerResult:
    """Global maximum of ``g1`` or ``g2`` over the simplex.

    Multistart fixed-point iteration on the closed form that every
    maximizer must satisfy, damped by halving whenever the objective
    drops.  Seeds: the uniform vector, both box maximizers, then
    ``starts`` symmetric Dirichlet samples.  The best value wins, earlier
    seeds breaking ties.
    """
    view = _direction_view(spec, which)
    col, r = view.col, view.r
    la, lb = view.log_widths, view.log_heights
    d = spec.d
    rng = np.random.default_rng(seed)
    seeds = [np.full(d, 1.0 / d), *box_maximizers(spec)]
    seeds += [rng.dirichlet(np.ones(d)) for _ in range(starts)]

    runs = pmap(lambda q0: _fixed_point(q0, col, r, la, lb, tol, max_iter), seeds)
    order = sorted(range(len(runs)), key=lambda k: (-runs[k][1], k))
    best = order[0]
    q, value, iters, step = runs[best]
    theta, lam, rho, _ = _multipliers(q, col, r, la, lb)
    raw, Z = _closed_form(theta, lam, rho, col, r, la, lb)
    stationarity = float(np.abs(raw - q).max())
    normalization = float(q @ np.log(Z[col]))

    distinct = [q]
    for k in order[1:]:
        qk, vk = runs[k][0], runs[k][1]
        if value - vk > 1e-10:
            break
        if all(np.abs(qk - p).max() > 1e-6 for p in distinct):
            distinct.append(qk)
    q = q.copy()
    q.setflags(write=False)
    return MaximizerResult(
        value=float(value),
        q=q,
        theta=theta,
        lam=lam,
        rho=rho,
        converged=step < max(tol, 1e-9),
        restarts=len(seeds),
        iterations=iters,
        stationarity=stationarity,
        normalization=normalization,
        distinct_argmaxes=tuple(distinct[1:]),
    )


def dim_hausdorff(
    spec: CarpetSpec, tie_tol: float = TIE_TOL, starts: int = 16, seed: int = 0
) -> tuple[float, str]:
    """``(max(G1, G2), attained)`` with ``attained`` one of ``"1"``, ``"2"``, ``"both"``."""
    G1 = maximize_objective(spec, "g1", starts, seed).value
    G2 = maximize_objective(spec, "g2", starts, seed).value
    if abs(G1 - G2) <= tie_tol:
        return max(G1, G2), "both"
    return (G1, "1") if G1 > G2 else (G2, "2")


def dim_box(spec: CarpetSpec) -> float:
    return assouad_lower_profile(spec).dim_B


# ---------------------------------------------------------------------------
# Brute-force lattice oracle


def lattice_size(n: int, d: int) -> int:
    return math.comb(n + d - 1, d - 1)


def _all_compositions(n: int, d: int) -> np.ndarray:
    """Every nonnegative integer vector of length ``d`` summing to ``n``."""
    rows = np.zeros((1, 0), dtype=np.int64)
    used = np.zeros(1, dtype=np.int64)
    for _ in range(d - 1):
        counts = n - used + 1
        total = int(counts.sum())
        parent = np.repeat(np.arange(len(rows)), counts)
        starts = np.cumsum(counts) - counts
        vals = np.arange(total) - np.repeat(starts, counts)
        rows = np.hstack([rows[parent], vals[:, None]])
        used = used[parent] + vals
    return np.hstack([rows, (n - used)[:, None]])


def _composition_blocks(n: int, d: int, chunk: int):
    if d == 1:
        yield np.array([[n]], dtype=np.int64)
        return
    if lattice_size(n, d) <= chunk:
        yield _all_compositions(n, d)
        return
    for k in range(n + 1):
        for block in _composition_blocks(n - k, d - 1, chunk):
            yield np.hstack([np.full((len(block), 1), k, dtype=np.int64), block])


def simplex_lattice(n: int, d: int, chunk: int = 1 << 20):
    """Yield the lattice ``{k/n : sum k = n}`` in blocks of at most ``chunk`` rows."""
    for block in _composition_blocks(n, d, chunk):
        yield block / n


def _batch_objective(spec: CarpetSpec, Q: np.ndarray, which: str) -> np.ndarray:
    QQ = _xlogx(Q).sum(axis=1)
    RA = Q @ spec.log_widths
    SB = Q @ spec.log_heights
    col_onehot = np.eye(spec.r)[spec.col]
    row_onehot = np.eye(spec.s)[spec.row]
    out = {}
    if which in ("g1", "g"):
        RR = _xlogx(Q @ col_onehot).sum(axis=1)
        out["g1"] = RR / RA + (QQ - RR) / SB
    if which in ("g2", "g"):
        SS = _xlogx(Q @ row_onehot).sum(axis=1)
        out["g2"] = SS / SB + (QQ - SS) / RA
    if which in ("f1", "f2", "f"):
        p = assouad_lower_profile(spec)
        out["f1"] = (QQ - p.t1 * (RA - SB)) / SB
        out["f2"] = (QQ - p.t2 * (SB - RA)) / RA
    if which == "g":
        return np.where(RA >= SB, out["g1"], out["g2"])
    if which == "f":
        return np.where(RA >= SB, out["f1"], out["f2"])
    return out[which]


@dataclass(frozen=True)
class GridResult:
    value: float
    q: np.ndarray = field(repr=False)
    n: int
    points: int


def grid_oracle(spec: CarpetSpec, which: str, n: int = 60) -> GridResult:
    """Maximum of an objective over the simplex lattice with spacing ``1/n``.

    A lower bound for the true maximum.  Refuses lattices with more than
    ``10**8`` points.
    """
    if which not in OBJECTIVES:
        raise ValueError(f"unknown objective {which!r}")
    size = lattice_size(n, spec.d)
    if size > LATTICE_LIMIT:
        raise GuardError(
            "lattice_size", f"{size} lattice points for n={n}, d={spec.d} exceeds {LATTICE_LIMIT}"
        )
    best, best_q = -math.inf, None
    for Q in simplex_lattice(n, spec.d):
        vals = _batch_objective(spec, Q, which)
        k = int(np.argmax(vals))
        if vals[k] > best:
            best, best_q = float(vals[k]), Q[k].copy()
    return GridResult(best, best_q, n, size)
