"""Carpet data model: specification, validation, index sets and type.

A carpet is described by column widths ``a_1..a_r``, row heights
``b_1..b_s`` and an ordered list of chosen cells ``(i_l, j_l)``.  Cell
``l`` is the image of the unit square under the map with diagonal
ratios ``(a_{i_l}, b_{j_l})``.  Indices are 0-based everywhere in code;
column 0 is the left strip and row 0 the bottom strip.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from pathlib import Path

import numpy as np

SUM_TOL = 1e-12
ASSUMPTION_TOL = 1e-12


class SpecError(ValueError):
    """Raised when a carpet file cannot be parsed into a specification."""

    def __init__(self, field_name: str, message: str):
        super().__init__(f"{field_name}: {message}")
        self.field = field_name


@dataclass(frozen=True)
class CarpetSpec:
    widths: tuple[float, ...]
    heights: tuple[float, ...]
    cells: tuple[tuple[int, int], ...]
    allow_gaps: bool = False

    def __post_init__(self):
        object.__setattr__(self, "widths", tuple(float(x) for x in self.widths))
        object.__setattr__(self, "heights", tuple(float(x) for x in self.heights))
        object.__setattr__(
            self, "cells", tuple((int(i), int(j)) for i, j in self.cells)
        )
        object.__setattr__(self, "allow_gaps", bool(self.allow_gaps))

    @property
    def r(self) -> int:
        return len(self.widths)

    @property
    def s(self) -> int:
        return len(self.heights)

    @property
    def d(self) -> int:
        return len(self.cells)

    # Per-cell arrays, in map order l = 0..d-1.  Read-only so that cached
    # values cannot be corrupted by callers.

    @cached_property
    def col(self) -> np.ndarray:
        return _frozen(np.array([i for i, _ in self.cells], dtype=np.intp))

    @cached_property
    def row(self) -> np.ndarray:
        return _frozen(np.array([j for _, j in self.cells], dtype=np.intp))

    @cached_property
    def cell_widths(self) -> np.ndarray:
        return _frozen(np.asarray(self.widths)[self.col])

    @cached_property
    def cell_heights(self) -> np.ndarray:
        return _frozen(np.asarray(self.heights)[self.row])

    @cached_property
    def log_widths(self) -> np.ndarray:
        return _frozen(np.log(self.cell_widths))

    @cached_property
    def log_heights(self) -> np.ndarray:
        return _frozen(np.log(self.cell_heights))

    @cached_property
    def x_offsets(self) -> np.ndarray:
        """Left edge of each column strip (strips packed from the origin)."""
        return _frozen(np.concatenate([[0.0], np.cumsum(self.widths)[:-1]]))

    @cached_property
    def y_offsets(self) -> np.ndarray:
        return _frozen(np.concatenate([[0.0], np.cumsum(self.heights)[:-1]]))

    def transpose(self) -> CarpetSpec:
        """Mirror the carpet in the diagonal, keeping the cell order.

        Every direction-2 quantity of a carpet equals the direction-1
        quantity of its transpose.
        """
        return CarpetSpec(
            widths=self.heights,
            heights=self.widths,
            cells=tuple((j, i) for i, j in self.cells),
            allow_gaps=self.allow_gaps,
        )

    def is_product(self) -> bool:
        """True when the chosen cells form the full product J1 x J2."""
        cols = {i for i, _ in self.cells}
        rows = {j for _, j in self.cells}
        return len(set(self.cells)) == len(cols) * len(rows)

    def to_dict(self) -> dict:
        return {
            "widths": list(self.widths),
            "heights": list(self.heights),
            "cells": [[i, j] for i, j in self.cells],
            "allow_gaps": self.allow_gaps,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, raw: dict) -> CarpetSpec:
        if not isinstance(raw, dict):
            raise SpecError("<root>", "expected a JSON object")
        for key in ("widths", "heights", "cells"):
            if key not in raw:
                raise SpecError(key, "missing field")
        widths = _number_list(raw["widths"], "widths")
        heights = _number_list(raw["heights"], "heights")
        cells_raw = raw["cells"]
        if not isinstance(cells_raw, list):
            raise SpecError("cells", "expected a list of [column, row] pairs")
        cells = []
        for k, c in enumerate(cells_raw):
            if (
                not isinstance(c, list)
                or len(c) != 2
                or not all(isinstance(v, int) and not isinstance(v, bool) for v in c)
            ):
                raise SpecError(f"cells[{k}]", "expected [column, row] integers")
            cells.append((c[0], c[1]))
        allow_gaps = raw.get("allow_gaps", False)
        if not isinstance(allow_gaps, bool):
            raise SpecError("allow_gaps", "expected a boolean")
        unknown = set(raw) - {"widths", "heights", "cells", "allow_gaps"}
        if unknown:
            raise SpecError(sorted(unknown)[0], "unknown field")
        return cls(tuple(widths), tuple(heights), tuple(cells), allow_gaps)

    @classmethod
    def from_json(cls, text: str) -> CarpetSpec:
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as exc:
            raise SpecError("<root>", f"invalid JSON ({exc.msg} at line {exc.lineno})")
        return cls.from_dict(raw)


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


def _number_list(value, name: str) -> list[float]:
    if not isinstance(value, list):
        raise SpecError(name, "expected a list of numbers")
    out = []
    for k, v in enumerate(value):
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise SpecError(f"{name}[{k}]", "expected a number")
        out.append(float(v))
    return out


def load_spec(path: str | Path, strict_partition: bool = False) -> CarpetSpec:
    """Read a carpet JSON file.  ``strict_partition`` forces ``allow_gaps=False``."""
    spec = CarpetSpec.from_json(Path(path).read_text())
    if strict_partition and spec.allow_gaps:
        spec = CarpetSpec(spec.widths, spec.heights, spec.cells, allow_gaps=False)
    return spec


# ---------------------------------------------------------------------------
# Validation


@dataclass(frozen=True)
class Violation:
    invariant: str
    message: str


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[Violation, ...] = ()
    warnings: tuple[Violation, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok

    def names(self) -> list[str]:
        return [v.invariant for v in self.violations]


def validate(spec: CarpetSpec) -> ValidationReport:
    """Check every carpet invariant; report problems, never repair them.

    The self-similar degenerate case (``a_{i_l} = b_{j_l}`` for all cells)
    is reported as a warning since every formula stays computable.
    """
    bad: list[Violation] = []
    warn: list[Violation] = []

    def fail(name, msg):
        bad.append(Violation(name, msg))

    for name, ratios in (("widths", spec.widths), ("heights", spec.heights)):
        if not ratios:
            fail(f"{name}_nonempty", f"no {name} given")
        for k, x in enumerate(ratios):
            if not (math.isfinite(x) and 0.0 < x < 1.0):
                fail(f"{name}_range", f"{name}[{k}] = {x!r} is not in (0, 1)")
        total = math.fsum(ratios)
        if spec.allow_gaps:
            if total > 1.0 + SUM_TOL:
                fail(f"{name}_sum", f"sum of {name} is {total!r} > 1")
        elif abs(total - 1.0) > SUM_TOL:
            fail(f"{name}_sum", f"sum of {name} is {total!r}, expected 1")

    if spec.d < 2:
        fail("cell_count", f"need at least 2 cells, got {spec.d}")
    seen = set()
    for k, (i, j) in enumerate(spec.cells):
        if not (0 <= i < spec.r):
            fail("cell_column_range", f"cells[{k}] column {i} outside 0..{spec.r - 1}")
        if not (0 <= j < spec.s):
            fail("cell_row_range", f"cells[{k}] row {j} outside 0..{spec.s - 1}")
        if (i, j) in seen:
            fail("cells_distinct", f"cells[{k}] = ({i}, {j}) is duplicated")
        seen.add((i, j))

    n_cols = len({i for i, _ in spec.cells})
    n_rows = len({j for _, j in spec.cells})
    if spec.d >= 1 and n_cols < 2:
        fail("not_in_vertical_line", f"#J1 = {n_cols}: carpet lies in a vertical line")
    if spec.d >= 1 and n_rows < 2:
        fail("not_in_horizontal_line", f"#J2 = {n_rows}: carpet lies in a horizontal line")

    if not bad:
        gaps = [
            abs(spec.widths[i] - spec.heights[j]) for i, j in spec.cells
        ]
        if max(gaps) <= ASSUMPTION_TOL:
            warn.append(
                Violation(
                    "self_similar_degenerate",
                    "every cell has equal width and height; the carpet is self-similar",
                )
            )
    return ValidationReport(tuple(bad), tuple(warn))


# ---------------------------------------------------------------------------
# Index sets and type


@dataclass(frozen=True)
class IndexSets:
    """Cells grouped by column (``I_i``) and by row (``J_j``).

    ``columns[i]`` lists the cell indices ``l`` with ``i_l = i``; only
    nonempty columns appear, so ``J1 == tuple(columns)``.
    """

    columns: dict[int, tuple[int, ...]] = field(hash=False)
    rows: dict[int, tuple[int, ...]] = field(hash=False)

    @property
    def J1(self) -> tuple[int, ...]:
        return tuple(self.columns)

    @property
    def J2(self) -> tuple[int, ...]:
        return tuple(self.rows)


def index_sets(spec: CarpetSpec) -> IndexSets:
    columns: dict[int, list[int]] = {}
    rows: dict[int, list[int]] = {}
    for l, (i, j) in enumerate(spec.cells):
        columns.setdefault(i, []).append(l)
        rows.setdefault(j, []).append(l)
    return IndexSets(
        columns={i: tuple(columns[i]) for i in sorted(columns)},
        rows={j: tuple(rows[j]) for j in sorted(rows)},
    )


class CarpetType(str, Enum):
    HORIZONTAL = "horizontal"
    VERTICAL = "vertical"
    MIXED = "mixed"


@dataclass(frozen=True)
class TypeClass:
    label: CarpetType
    self_similar_degenerate: bool = False


def classify_type(spec: CarpetSpec) -> TypeClass:
    """Horizontal if every cell is at least as wide as tall, vertical if at
    least as tall as wide, mixed otherwise.  Ties compare exactly."""
    a = spec.cell_widths
    b = spec.cell_heights
    degenerate = bool(np.all(np.abs(a - b) <= ASSUMPTION_TOL))
    if np.all(a >= b):
        label = CarpetType.HORIZONTAL
    elif np.all(a <= b):
        label = CarpetType.VERTICAL
    else:
        label = CarpetType.MIXED
    return TypeClass(label, degenerate)


# ---------------------------------------------------------------------------
# Random carpets for property tests

FAMILIES = (
    "generic",
    "uniform_vertical",
    "uniform_horizontal",
    "product",
    "horizontal",
    "vertical",
)


class GeneratorError(RuntimeError):
    pass


def random_carpet(
    r_max: int,
    s_max: int,
    seed: int,
    *,
    family: str | None = None,
    max_cells: int | None = None,
    margin: float | None = 1e-6,
    tol_eq: float = 1e-9,
    min_ratio: float = 0.08,
    max_tries: int = 10_000,
) -> CarpetSpec:
    """Draw a valid carpet with ``2 <= r <= r_max`` and ``2 <= s <= s_max``.

    Carpets are drawn from a mixture of structural families so that
    uniform fibres, product carpets and pure horizontal/vertical types all
    occur with fair frequency.  Width and height strips are floored at
    ``min_ratio`` (capped at half the even split).  When ``margin`` is set,
    draws whose decision margins fall strictly between ``tol_eq`` and
    ``margin`` are rejected.  Deterministic in ``seed``.
    """
    if r_max < 2 or s_max < 2:
        raise ValueError("r_max and s_max must be at least 2")
    rng = np.random.default_rng(seed)
    for _ in range(max_tries):
        fam = family or FAMILIES[rng.integers(len(FAMILIES))]
        spec = _draw(rng, fam, r_max, s_max, min_ratio)
        if spec is None or not validate(spec).ok:
            continue
        if validate(spec).warnings:
            continue
        if max_cells is not None and spec.d > max_cells:
            continue
        if margin is not None:
            from .conditions import knife_edges

            if knife_edges(spec, tol_eq=tol_eq, margin=margin):
                continue
        return spec
    raise GeneratorError(f"no acceptable carpet after {max_tries} draws (seed={seed})")


def _ratios(rng: np.random.Generator, n: int, floor: float) -> np.ndarray:
    floor = min(floor, 0.5 / n)
    while True:
        x = rng.dirichlet(np.full(n, 3.0))
        if x.min() >= floor:
            # renormalise so the sum is 1 to the last ulp we can manage
            x = x / math.fsum(x)
            return x


def _draw(rng, fam, r_max, s_max, min_ratio) -> CarpetSpec | None:
    r = int(rng.integers(2, r_max + 1))
    s = int(rng.integers(2, s_max + 1))
    a = _ratios(rng, r, min_ratio)
    b = _ratios(rng, s, min_ratio)

    if fam == "generic":
        mask = rng.random((r, s)) < 0.5
    elif fam in ("uniform_vertical", "uniform_horizontal"):
        n_lines, n_cross = (r, s) if fam == "uniform_vertical" else (s, r)
        k = int(rng.integers(1, n_cross + 1))
        lines = [ln for ln in range(n_lines) if rng.random() < 0.8]
        mask = np.zeros((n_lines, n_cross), dtype=bool)
        for ln in lines:
            mask[ln, rng.choice(n_cross, size=k, replace=False)] = True
        # equal cross ratios make the fibre exponent identical in every line
        if fam == "uniform_vertical":
            b = np.full(s, 1.0 / s)
        else:
            mask = mask.T
            a = np.full(r, 1.0 / r)
    elif fam == "product":
        cols = rng.random(r) < 0.7
        rows = rng.random(s) < 0.7
        mask = np.outer(cols, rows)
    elif fam == "horizontal":
        mask = (a[:, None] >= b[None, :]) & (rng.random((r, s)) < 0.7)
    elif fam == "vertical":
        mask = (a[:, None] <= b[None, :]) & (rng.random((r, s)) < 0.7)
    else:
        raise ValueError(f"unknown family {fam!r}")

    cells = [tuple(int(v) for v in c) for c in np.argwhere(mask)]
    if len(cells) < 2:
        return None
    order = rng.permutation(len(cells))
    cells = [cells[k] for k in order]
    return CarpetSpec(tuple(a), tuple(b), tuple(cells), allow_gaps=False)
