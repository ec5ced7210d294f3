"""Exponents defined by monotone implicit equations.

Every exponent here is the unique root of ``h(x) = sum_l w_l * r_l**x = 1``
with positive weights and ratios in ``(0, 1)``, so ``h`` is strictly
decreasing and bisection always converges.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .carpet import CarpetSpec, CarpetType, classify_type, index_sets

ROOT_TOL = 1e-13
MAX_ITER = 200

E_SENTINEL = -1.0
F_SENTINEL = 3.0


class RootError(ArithmeticError):
    pass


def solve_weighted_exponent(weights, ratios, tol: float = ROOT_TOL) -> float:
    """Return ``x >= 0`` with ``sum(weights * ratios**x) == 1``.

    Requires ``sum(weights) >= 1`` (so the root is nonnegative).  Bisection
    on ``[0, 4]`` (the upper end doubles until it brackets), then Newton
    steps kept inside the bracket.
    """
    w = np.asarray(weights, dtype=float)
    logr = np.log(np.asarray(ratios, dtype=float))
    if w.size == 0:
        raise RootError("empty equation")

    def h(x):
        return float(np.dot(w, np.exp(logr * x))) - 1.0

    h0 = h(0.0)
    if abs(h0) <= tol:
        return 0.0
    if h0 < 0:
        raise RootError(f"no nonnegative root: h(0) = {h0 + 1.0!r} < 1")
    lo, hi = 0.0, 4.0
    while h(hi) > 0:
        lo, hi = hi, 2 * hi
        if hi > 1e6:
            raise RootError("failed to bracket root")

    # bisect until the bracket is tight, then polish with Newton
    for _ in range(MAX_ITER):
        mid = 0.5 * (lo + hi)
        if h(mid) > 0:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-6:
            break
    x = 0.5 * (lo + hi)
    for _ in range(MAX_ITER):
        terms = w * np.exp(logr * x)
        fx = float(terms.sum()) - 1.0
        if abs(fx) <= tol:
            return x
        if fx > 0:
            lo = x
        else:
            hi = x
        dfx = float(np.dot(terms, logr))
        step = x - fx / dfx
        x = step if lo < step < hi else 0.5 * (lo + hi)
        if hi - lo <= 4 * np.finfo(float).eps * max(1.0, hi):
            return x
    raise RootError(f"no convergence to residual {tol}")


def solve_partition_exponent(ratios, tol: float = ROOT_TOL) -> float:
    """Similarity exponent: ``sum(ratios**t) == 1``."""
    ratios = list(ratios)
    if not ratios:
        raise ValueError("ratios must be nonempty")
    if any(not (0.0 < x < 1.0) for x in ratios):
        raise ValueError("every ratio must lie in (0, 1)")
    return solve_weighted_exponent(np.ones(len(ratios)), ratios, tol)


def solve_box_exponent(
    spec: CarpetSpec, t: float, direction: int, tol: float = ROOT_TOL
) -> float:
    """Box candidate ``D`` with ``sum_l a^t b^(D-t) == 1`` (direction 1) or
    ``sum_l b^t a^(D-t) == 1`` (direction 2)."""
    if direction == 1:
        base, other = spec.cell_widths, spec.cell_heights
    elif direction == 2:
        base, other = spec.cell_heights, spec.cell_widths
    else:
        raise ValueError("direction must be 1 or 2")
    try:
        excess = solve_weighted_exponent(base**t, other, tol)
    except RootError as exc:
        raise RootError(f"box exponent (direction {direction}) does not bracket: {exc}")
    return t + excess


def projection_exponents(spec: CarpetSpec, tol: float = ROOT_TOL) -> tuple[float, float]:
    """``(t1, t2)``: dimensions of the two coordinate projections."""
    idx = index_sets(spec)
    t1 = solve_partition_exponent([spec.widths[i] for i in idx.J1], tol)
    t2 = solve_partition_exponent([spec.heights[j] for j in idx.J2], tol)
    return t1, t2


def fibre_exponents(
    spec: CarpetSpec, tol: float = ROOT_TOL
) -> tuple[dict[int, float], dict[int, float]]:
    """Per-column exponents ``S1[i]`` and per-row exponents ``S2[j]``.

    ``S1[i]`` solves ``sum_{l in I_i} b_{j_l}^S = 1``; a single-cell column
    gives exactly 0.
    """
    idx = index_sets(spec)
    b = spec.cell_heights
    a = spec.cell_widths
    S1 = {
        i: 0.0 if len(ls) == 1 else solve_partition_exponent(b[list(ls)], tol)
        for i, ls in idx.columns.items()
    }
    S2 = {
        j: 0.0 if len(ls) == 1 else solve_partition_exponent(a[list(ls)], tol)
        for j, ls in idx.rows.items()
    }
    return S1, S2


@dataclass(frozen=True)
class ExponentProfile:
    t1: float
    t2: float
    D1: float
    D2: float
    S1: dict
    S2: dict
    E1: float
    E2: float
    F1: float
    F2: float
    E1_tilde: float
    E2_tilde: float
    F1_tilde: float
    F2_tilde: float
    carpet_type: CarpetType

    @property
    def dim_B(self) -> float:
        return max(self.D1, self.D2)

    @property
    def dim_A(self) -> float:
        return max(self.E1, self.E2)

    @property
    def dim_L(self) -> float:
        return min(self.F1, self.F2)

    @property
    def S1_spread(self) -> float:
        v = list(self.S1.values())
        return max(v) - min(v)

    @property
    def S2_spread(self) -> float:
        v = list(self.S2.values())
        return max(v) - min(v)


@lru_cache(maxsize=4096)
def assouad_lower_profile(spec: CarpetSpec, tol: float = ROOT_TOL) -> ExponentProfile:
    t1, t2 = projection_exponents(spec, tol)
    D1 = solve_box_exponent(spec, t1, 1, tol)
    D2 = solve_box_exponent(spec, t2, 2, tol)
    S1, S2 = fibre_exponents(spec, tol)
    E1t = t1 + max(S1.values())
    F1t = t1 + min(S1.values())
    E2t = t2 + max(S2.values())
    F2t = t2 + min(S2.values())

    kind = classify_type(spec).label
    if kind is CarpetType.HORIZONTAL:
        E1, E2, F1, F2 = E1t, E_SENTINEL, F1t, F_SENTINEL
    elif kind is CarpetType.VERTICAL:
        E1, E2, F1, F2 = E_SENTINEL, E2t, F_SENTINEL, F2t
    else:
        E1, E2, F1, F2 = E1t, E2t, F1t, F2t
    return ExponentProfile(
        t1=t1, t2=t2, D1=D1, D2=D2, S1=S1, S2=S2,
        E1=E1, E2=E2, F1=F1, F2=F2,
        E1_tilde=E1t, E2_tilde=E2t, F1_tilde=F1t, F2_tilde=F2t,
        carpet_type=kind,
    )

