"""Words over the cell alphabet, approximate squares and empirical checks.

A word is a tuple of 0-based cell indices.  The rectangle of a word is the
image of the unit square under the composed maps; strips are packed from
the origin, so a carpet with gaps simply leaves empty space at the top and
right.  Side lengths are ``A`` (width) and ``B`` (height).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .carpet import CarpetSpec, CarpetType, classify_type
from .roots import solve_partition_exponent
from .parallel import pmap
from .variational import GuardError, box_maximizers

MAX_BRUTE_DEPTH = 12
MIN_STOP_DELTA = 2.0**-14
MAX_STOP_COUNT = 10**7
GEOM_TOL = 1e-12


@dataclass(frozen=True)
class Rect:
    x: float
    y: float
    width: float
    height: float

    @property
    def side(self) -> float:
        return max(self.width, self.height)

    def contains(self, other: Rect, tol: float = GEOM_TOL) -> bool:
        return (
            other.x >= self.x - tol
            and other.y >= self.y - tol
            and other.x + other.width <= self.x + self.width + tol
            and other.y + other.height <= self.y + self.height + tol
        )


def prefix_geometry(spec: CarpetSpec, word) -> tuple[np.ndarray, ...]:
    """Arrays ``x, y, A, B`` of length ``n + 1`` for the prefixes of ``word``.

    Entry ``k`` describes the rectangle of the first ``k`` letters; entry 0
    is the unit square.
    """
    n = len(word)
    x = np.zeros(n + 1)
    y = np.zeros(n + 1)
    A = np.ones(n + 1)
    B = np.ones(n + 1)
    xo, yo = spec.x_offsets, spec.y_offsets
    col, row = spec.col, spec.row
    aw, bh = spec.cell_widths, spec.cell_heights
    for k, e in enumerate(word):
        x[k + 1] = x[k] + A[k] * xo[col[e]]
        y[k + 1] = y[k] + B[k] * yo[row[e]]
        A[k + 1] = A[k] * aw[e]
        B[k + 1] = B[k] * bh[e]
    return x, y, A, B


def word_rect(spec: CarpetSpec, word) -> Rect:
    x, y, A, B = prefix_geometry(spec, word)
    return Rect(float(x[-1]), float(y[-1]), float(A[-1]), float(B[-1]))


def word_side(spec: CarpetSpec, word) -> float:
    """``L`` of a word: the longer side of its rectangle."""
    return word_rect(spec, word).side


@dataclass(frozen=True)
class ApproximateSquare:
    word: tuple[int, ...]
    delta: float
    k1: int
    k2: int
    kind: int
    rect: Rect

    @property
    def k_min(self) -> int:
        return min(self.k1, self.k2)

    @property
    def k_max(self) -> int:
        return max(self.k1, self.k2)


def approximate_square(spec: CarpetSpec, word, delta: float) -> ApproximateSquare:
    """The approximate square of side about ``delta`` around ``word``.

    ``k1`` (``k2``) is the deepest prefix whose width (height) is still at
    least ``delta``; the square takes its horizontal extent from prefix
    ``k1`` and its vertical extent from prefix ``k2``.  It is of 1-type when
    ``k1 >= k2``.
    """
    if not (0.0 < delta < 1.0):
        raise ValueError(f"delta must lie in (0, 1), got {delta!r}")
    word = tuple(int(e) for e in word)
    x, y, A, B = prefix_geometry(spec, word)
    if A[-1] >= delta or B[-1] >= delta:
        raise ValueError(
            f"word of length {len(word)} too short: sides {A[-1]:.3g} x {B[-1]:.3g} at delta {delta:.3g}"
        )
    # A and B are nonincreasing, so the cut is a count
    k1 = int(np.count_nonzero(A >= delta)) - 1
    k2 = int(np.count_nonzero(B >= delta)) - 1
    rect = Rect(float(x[k1]), float(y[k2]), float(A[k1]), float(B[k2]))
    return ApproximateSquare(
        word=word[: max(k1, k2)],
        delta=float(delta),
        k1=k1,
        k2=k2,
        kind=1 if k1 >= k2 else 2,
        rect=rect,
    )


def square_mass(spec: CarpetSpec, q, square: ApproximateSquare) -> float:
    """Self-affine measure of an approximate square by the product formula.

    The common prefix contributes ``q``; the remaining letters contribute
    column masses (1-type) or row masses (2-type).
    """
    q = np.asarray(q, dtype=float)
    if q.size != spec.d:
        raise ValueError("q has the wrong length")
    if np.min(q) <= 0:
        raise ValueError("square_mass needs an interior probability vector")
    R = np.bincount(spec.col, q, minlength=spec.r)
    S = np.bincount(spec.row, q, minlength=spec.s)
    w = square.word
    mass = 1.0
    for e in w[: square.k_min]:
        mass *= q[e]
    tail = w[square.k_min : square.k_max]
    if square.kind == 1:
        for e in tail:
            mass *= R[spec.col[e]]
    else:
        for e in tail:
            mass *= S[spec.row[e]]
    return float(mass)


def brute_mass_oracle(spec: CarpetSpec, q, square: ApproximateSquare) -> float:
    """Bernoulli mass of all depth-``k_max`` words whose rectangle lies in the square.

    Pure geometry: subtrees whose rectangle misses the square are pruned,
    survivors at depth ``k_max`` are tested for containment.
    """
    depth = square.k_max
    if depth > MAX_BRUTE_DEPTH:
        raise GuardError("brute_depth", f"k_max = {depth} exceeds {MAX_BRUTE_DEPTH}")
    q = np.asarray(q, dtype=float)
    T = square.rect
    X0, X1 = T.x, T.x + T.width
    Y0, Y1 = T.y, T.y + T.height
    tol = GEOM_TOL

    x = np.zeros(1)
    y = np.zeros(1)
    A = np.ones(1)
    B = np.ones(1)
    m = np.ones(1)
    xo = spec.x_offsets[spec.col]
    yo = spec.y_offsets[spec.row]
    for _ in range(depth):
        x = (x[:, None] + A[:, None] * xo[None, :]).ravel()
        y = (y[:, None] + B[:, None] * yo[None, :]).ravel()
        A = (A[:, None] * spec.cell_widths[None, :]).ravel()
        B = (B[:, None] * spec.cell_heights[None, :]).ravel()
        m = (m[:, None] * q[None, :]).ravel()
        keep = (x < X1 - tol) & (x + A > X0 + tol) & (y < Y1 - tol) & (y + B > Y0 + tol)
        x, y, A, B, m = x[keep], y[keep], A[keep], B[keep], m[keep]
    inside = (
        (x >= X0 - tol) & (x + A <= X1 + tol) & (y >= Y0 - tol) & (y + B <= Y1 + tol)
    )
    return float(m[inside].sum())


# ---------------------------------------------------------------------------
# Stopping sets and box counting


def _side_exponent(spec: CarpetSpec) -> float:
    L = np.maximum(spec.cell_widths, spec.cell_heights)
    return solve_partition_exponent(L)


def estimated_stopping_count(spec: CarpetSpec, delta: float) -> float:
    return delta ** (-_side_exponent(spec))


def _check_stop_guards(spec: CarpetSpec, delta: float):
    if delta < MIN_STOP_DELTA:
        raise GuardError("min_delta", f"delta = {delta!r} below {MIN_STOP_DELTA!r}")
    est = estimated_stopping_count(spec, delta)
    if est > MAX_STOP_COUNT:
        raise GuardError("stopping_count", f"about {est:.3g} words exceeds {MAX_STOP_COUNT}")


def stopping_set(spec: CarpetSpec, delta: float) -> list[tuple[int, ...]]:
    """Minimal words with ``L <= delta``: their parents all have ``L > delta``.

    At ``delta >= 1`` the empty word alone qualifies.
    """
    if delta >= 1.0:
        return [()]
    _check_stop_guards(spec, delta)
    done: list[tuple[int, ...]] = []
    frontier = [((), 1.0, 1.0)]
    a, b = spec.cell_widths, spec.cell_heights
    while frontier:
        nxt = []
        for w, A, B in frontier:
            for e in range(spec.d):
                cA, cB = A * a[e], B * b[e]
                child = (w + (e,), cA, cB)
                if max(cA, cB) <= delta:
                    done.append(child[0])
                else:
                    nxt.append(child)
        frontier = nxt
    done.sort()
    return done


def _mesh_span(x, y, A, B, delta, slack):
    """Index ranges of mesh cells whose interior meets each rectangle's interior."""
    i0 = np.floor(x / delta + slack).astype(np.int64)
    i1 = np.maximum(np.ceil((x + A) / delta - slack).astype(np.int64) - 1, i0)
    j0 = np.floor(y / delta + slack).astype(np.int64)
    j1 = np.maximum(np.ceil((y + B) / delta - slack).astype(np.int64) - 1, j0)
    return i0, i1, j0, j1


def mesh_count(spec: CarpetSpec, delta: float, slack: float = 1e-9, chunk: int = 1 << 16) -> int:
    """Number of ``delta``-mesh cells meeting the union of stopping rectangles.

    A cell counts when its interior meets a rectangle's interior.  The walk
    is depth first in bounded chunks.  A rectangle is settled without
    subdividing when it lies in a single mesh cell, and dropped when every
    cell it spans is already counted; in both cases its descendants cannot
    change the count.
    """
    xo = spec.x_offsets[spec.col]
    yo = spec.y_offsets[spec.row]
    aw, bh = spec.cell_widths, spec.cell_heights
    m = int(math.ceil(1 / delta)) + 2
    seen = np.zeros((m, m), dtype=bool)
    stack = [(np.zeros(1), np.zeros(1), np.ones(1), np.ones(1))]
    while stack:
        x, y, A, B = stack.pop()
        if len(x) > chunk:
            stack += [tuple(v[i : i + chunk] for v in (x, y, A, B)) for i in range(0, len(x), chunk)]
            continue
        i0, i1, j0, j1 = _mesh_span(x, y, A, B, delta, slack)
        done = (np.maximum(A, B) <= delta) | ((i0 == i1) & (j0 == j1))
        for ii, jj in ((i0, j0), (i0, j1), (i1, j0), (i1, j1)):
            seen[ii[done], jj[done]] = True
        small = (i1 - i0 <= 1) & (j1 - j0 <= 1)
        covered = small & seen[i0, j0] & seen[i0, j1] & seen[i1, j0] & seen[i1, j1]
        live = ~done & ~covered
        if not live.any():
            continue
        x, y, A, B = x[live], y[live], A[live], B[live]
        stack.append((
            (x[:, None] + A[:, None] * xo).ravel(),
            (y[:, None] + B[:, None] * yo).ravel(),
            (A[:, None] * aw).ravel(),
            (B[:, None] * bh).ravel(),
        ))
    return int(np.count_nonzero(seen))


@dataclass(frozen=True)
class BoxCountResult:
    slope: float
    stderr: float
    intercept: float
    exponents: tuple[int, ...]
    deltas: tuple[float, ...]
    counts: tuple[int, ...]

    def csv(self) -> str:
        lines = ["delta,count"]
        lines += [f"{d!r},{c}" for d, c in zip(self.deltas, self.counts)]
        return "\n".join(lines) + "\n"


def fit_loglog(inv_delta, counts) -> tuple[float, float, float]:
    """Least-squares slope, its standard error and intercept of log N on log(1/delta)."""
    xs = np.log(np.asarray(inv_delta, dtype=float))
    ys = np.log(np.asarray(counts, dtype=float))
    A = np.vstack([xs, np.ones_like(xs)]).T
    (slope, intercept), *_ = np.linalg.lstsq(A, ys, rcond=None)
    n = len(xs)
    if n > 2:
        resid = ys - (slope * xs + intercept)
        s2 = float(resid @ resid) / (n - 2)
        stderr = math.sqrt(s2 / float(((xs - xs.mean()) ** 2).sum()))
    else:
        stderr = float("nan")
    return float(slope), stderr, float(intercept)


def box_count_estimate(spec: CarpetSpec, k_min_exp: int = 4, k_max_exp: int = 11) -> BoxCountResult:
    """Box-counting slope over ``delta = 2**-k`` for ``k_min_exp <= k <= k_max_exp``."""
    if k_min_exp < 0 or k_max_exp < k_min_exp + 1:
        raise ValueError("need 0 <= k_min_exp < k_max_exp")
    if 2.0**-k_max_exp < MIN_STOP_DELTA:
        raise GuardError("min_delta", f"2**-{k_max_exp} below {MIN_STOP_DELTA!r}")
    exps = tuple(range(k_min_exp, k_max_exp + 1))
    deltas = tuple(2.0**-k for k in exps)
    counts = tuple(pmap(lambda d: mesh_count(spec, d), deltas))
    slope, stderr, intercept = fit_loglog([1 / d for d in deltas], counts)
    return BoxCountResult(slope, stderr, intercept, exps, deltas, counts)


# ---------------------------------------------------------------------------
# Ahlfors probe


@dataclass(frozen=True)
class AhlforsProbe:
    dimension: float
    measure: str
    ratio_min: float
    ratio_max: float
    slope: float
    exponents: tuple[int, ...]
    mean_log_ratio: tuple[float, ...]
    samples: int = field(default=0)

    @property
    def spread(self) -> float:
        return self.ratio_max / self.ratio_min


def probe_measures(spec: CarpetSpec) -> tuple[str, list[np.ndarray]]:
    """The measure(s) whose average is tested for Ahlfors regularity."""
    q1, q2 = box_maximizers(spec)
    kind = classify_type(spec).label
    if kind is CarpetType.HORIZONTAL:
        return "q1", [q1]
    if kind is CarpetType.VERTICAL:
        return "q2", [q2]
    return "average(q1,q2)", [q1, q2]


def ahlfors_probe(
    spec: CarpetSpec,
    n_samples: int = 200,
    delta_exps=range(2, 12),
    seed: int = 0,
    dimension: float | None = None,
) -> AhlforsProbe:
    """Sample points of the carpet and record ``mu(Q) / delta**dim`` over scales.

    Points are drawn from the probe measure itself.  The regression slope
    of the log-ratio against ``log delta`` is near zero when the measure is
    Ahlfors regular; a drift shows up as a nonzero slope.
    """
    from .conditions import dimensions

    exps = tuple(int(k) for k in delta_exps)
    if dimension is None:
        dimension = dimensions(spec).hausdorff
    name, qs = probe_measures(spec)
    rng = np.random.default_rng(seed)
    delta_min = 2.0 ** -max(exps)
    biggest = max(spec.cell_widths.max(), spec.cell_heights.max())
    length = int(math.ceil(math.log(delta_min) / math.log(biggest))) + 2

    log_d, log_r = [], []
    per_scale = {k: [] for k in exps}
    for _ in range(n_samples):
        q = qs[rng.integers(len(qs))]
        word = rng.choice(spec.d, size=length, p=q)
        for k in exps:
            delta = 2.0**-k
            sq = approximate_square(spec, word, delta)
            mass = sum(square_mass(spec, qq, sq) for qq in qs) / len(qs)
            lr = math.log(mass) - dimension * math.log(delta)
            log_d.append(math.log(delta))
            log_r.append(lr)
            per_scale[k].append(lr)
    log_d = np.array(log_d)
    log_r = np.array(log_r)
    slope = float(np.polyfit(log_d, log_r, 1)[0])
    return AhlforsProbe(
        dimension=float(dimension),
        measure=name,
        ratio_min=float(np.exp(log_r.min())),
        ratio_max=float(np.exp(log_r.max())),
        slope=slope,
        exponents=exps,
        mean_log_ratio=tuple(float(np.mean(per_scale[k])) for k in exps),
        samples=n_samples,
    )
