"""Uniform-fibre conditions and the resulting classifications.

The four conditions compare a pair of candidates (``G``, ``D``, ``E`` or the
carpet type) and ask for uniform fibres in the winning direction.  All
equalities are decided with one absolute tolerance; raw margins are kept
so callers can re-decide.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from .carpet import CarpetSpec, CarpetType
from .roots import ROOT_TOL, ExponentProfile, assouad_lower_profile
from .variational import TIE_TOL, maximize_objective


@dataclass(frozen=True)
class FibreReport:
    vertical_uniform: bool
    horizontal_uniform: bool
    S1: dict
    S2: dict
    S1_spread: float
    S2_spread: float
    tolerance: float
    vertical_exponent: float | None = None
    horizontal_exponent: float | None = None


def fibre_uniformity(
    spec: CarpetSpec, tol: float = TIE_TOL, tol_root: float = ROOT_TOL
) -> FibreReport:
    p = assouad_lower_profile(spec, tol_root)
    v_ok = p.S1_spread <= tol
    h_ok = p.S2_spread <= tol
    return FibreReport(
        vertical_uniform=v_ok,
        horizontal_uniform=h_ok,
        S1=dict(p.S1),
        S2=dict(p.S2),
        S1_spread=p.S1_spread,
        S2_spread=p.S2_spread,
        tolerance=tol,
        vertical_exponent=max(p.S1.values()) if v_ok else None,
        horizontal_exponent=max(p.S2.values()) if h_ok else None,
    )


def _compare(margin: float, tol: float) -> str:
    if margin > tol:
        return "1>2"
    if margin < -tol:
        return "1<2"
    return "1=2"


def _pair_condition(margin, tol, vertical, horizontal, tie_needs_both):
    branch = _compare(margin, tol)
    if branch == "1>2":
        return vertical, branch
    if branch == "1<2":
        return horizontal, branch
    if tie_needs_both:
        return vertical and horizontal, branch
    return vertical or horizontal, branch


@dataclass(frozen=True)
class ConditionReport:
    ufH: bool
    ufB: bool
    ufA: bool
    ufL: bool
    G1: float
    G2: float
    margin_G: float
    margin_D: float
    margin_E: float
    margin_F: float
    branches: dict = field(default_factory=dict)
    product: bool = False
    tolerance: float = TIE_TOL


def _maximizer_values(spec, starts, seed):
    G1 = maximize_objective(spec, "g1", starts, seed)
    G2 = maximize_objective(spec, "g2", starts, seed)
    return G1, G2


def condition_flags(
    spec: CarpetSpec,
    tol: float = TIE_TOL,
    starts: int = 16,
    seed: int = 0,
    tol_root: float = ROOT_TOL,
) -> ConditionReport:
    """Decide u.f.H (through its computable form u.f.H'), u.f.B, u.f.A, u.f.L.

    u.f.H' asks for fibres in the direction of the larger of ``G1``, ``G2``
    and for both on a tie; u.f.B and u.f.A ask for either fibre on a tie.
    u.f.L depends on the carpet type; a mixed carpet needs both fibres and
    ``F1 = F2``.  A full product carpet satisfies all four.
    """
    p = assouad_lower_profile(spec, tol_root)
    fib = fibre_uniformity(spec, tol, tol_root)
    v, h = fib.vertical_uniform, fib.horizontal_uniform
    m1, m2 = _maximizer_values(spec, starts, seed)
    G1, G2 = m1.value, m2.value
    margins = dict(
        margin_G=G1 - G2,
        margin_D=p.D1 - p.D2,
        margin_E=p.E1 - p.E2,
        margin_F=p.F1 - p.F2,
    )

    if spec.is_product():
        return ConditionReport(
            True, True, True, True, G1, G2, **margins,
            branches={"all": "product"}, product=True, tolerance=tol,
        )

    ufH, bH = _pair_condition(margins["margin_G"], tol, v, h, tie_needs_both=True)
    ufB, bB = _pair_condition(margins["margin_D"], tol, v, h, tie_needs_both=False)
    ufA, bA = _pair_condition(margins["margin_E"], tol, v, h, tie_needs_both=False)
    kind = p.carpet_type
    if kind is CarpetType.HORIZONTAL:
        ufL, bL = v, "horizontal"
    elif kind is CarpetType.VERTICAL:
        ufL, bL = h, "vertical"
    else:
        ufL = v and h and abs(margins["margin_F"]) <= tol
        bL = "mixed"
    return ConditionReport(
        ufH, ufB, ufA, ufL, G1, G2, **margins,
        branches={"H": bH, "B": bB, "A": bA, "L": bL},
        tolerance=tol,
    )


class MeasureClass(str, Enum):
    POSITIVE_FINITE = "PositiveFinite"
    INFINITE = "Infinite"


# Ordering patterns of (dim_L ? dim_H, dim_H ? dim_B, dim_B ? dim_A).
COR14_CASES = {
    ("=", "=", "="): "a",
    ("=", "=", "<"): "b",
    ("=", "<", "="): "c",
    ("=", "<", "<"): "d",
    ("<", "=", "="): "e",
    ("<", "=", "<"): "f",
    ("<", "<", "="): "g",
    ("<", "<", "<"): "h",
}
IMPOSSIBLE_CASES = frozenset("bcdg")


@dataclass(frozen=True)
class Dimensions:
    hausdorff: float
    box: float
    assouad: float
    lower: float

    def ordered(self, tol: float = 1e-8) -> bool:
        return (
            self.lower <= self.hausdorff + tol
            and self.hausdorff <= self.box + tol
            and self.box <= self.assouad + tol
        )


def dimensions(
    spec: CarpetSpec, starts: int = 16, seed: int = 0, tol_root: float = ROOT_TOL
) -> Dimensions:
    p: ExponentProfile = assouad_lower_profile(spec, tol_root)
    if spec.is_product():
        dim_H = p.t1 + p.t2
    else:
        m1, m2 = _maximizer_values(spec, starts, seed)
        dim_H = max(m1.value, m2.value)
    return Dimensions(dim_H, p.dim_B, p.dim_A, p.dim_L)


@dataclass(frozen=True)
class Classification:
    measure_dichotomy: MeasureClass
    equal_HB: bool
    equal_BA: bool
    equal_HA: bool
    equal_LH: bool
    equal_LA: bool
    ahlfors_regular: bool
    cor14_case: str
    dimensions: Dimensions
    diagnostics: tuple[str, ...] = ()


def _rel(x: float, y: float, tol: float) -> str:
    return "=" if abs(x - y) <= tol else "<"


def classify(
    spec: CarpetSpec,
    tol: float = TIE_TOL,
    starts: int = 16,
    seed: int = 0,
    tol_root: float = ROOT_TOL,
) -> Classification:
    """Measure dichotomy, dimension coincidences and ordering case.

    Coincidences come from the conditions; the ordering case comes from the
    numeric dimensions.  Any disagreement between the two is reported in
    ``diagnostics`` rather than resolved.
    """
    flags = condition_flags(spec, tol, starts, seed, tol_root)
    dims = dimensions(spec, starts, seed, tol_root)
    L, H, B, A = dims.lower, dims.hausdorff, dims.box, dims.assouad
    pattern = (_rel(L, H, tol), _rel(H, B, tol), _rel(B, A, tol))
    case = COR14_CASES[pattern]

    notes = []
    numeric = {
        "equal_HB": abs(H - B) <= tol,
        "equal_BA": abs(B - A) <= tol,
        "equal_HA": abs(H - A) <= tol,
        "equal_LH": abs(L - H) <= tol,
        "equal_LA": abs(L - A) <= tol,
    }
    from_flags = {
        "equal_HB": flags.ufB,
        "equal_BA": flags.ufA,
        "equal_HA": flags.ufA,
        "equal_LH": flags.ufL,
        "equal_LA": flags.ufL,
    }
    for key, val in from_flags.items():
        if numeric[key] != val:
            notes.append(f"{key}: condition says {val}, dimensions say {numeric[key]}")
    if case in IMPOSSIBLE_CASES:
        notes.append(f"ordering case {case} cannot occur; tolerance-boundary carpet")
    if not dims.ordered():
        notes.append("dimensions out of order: dim_L <= dim_H <= dim_B <= dim_A fails")
    chain = (
        (not flags.ufL or flags.ufA)
        and (not flags.ufA or flags.ufB)
        and (not flags.ufB or flags.ufH)
    )
    if not chain:
        notes.append("implication chain u.f.L => u.f.A => u.f.B => u.f.H fails")

    return Classification(
        measure_dichotomy=MeasureClass.POSITIVE_FINITE if flags.ufH else MeasureClass.INFINITE,
        ahlfors_regular=flags.ufL,
        cor14_case=case,
        dimensions=dims,
        diagnostics=tuple(notes),
        **from_flags,
    )


def knife_edges(
    spec: CarpetSpec, tol_eq: float = TIE_TOL, margin: float = 1e-6, starts: int = 16, seed: int = 0
) -> list[str]:
    """Names of decision margins lying strictly between ``tol_eq`` and ``margin``.

    Such carpets sit too close to a tie for the numeric decisions to be
    trusted and are rejected by the random generator.
    """
    p = assouad_lower_profile(spec)
    dims = dimensions(spec, starts, seed)
    values = {
        "S1_spread": p.S1_spread,
        "S2_spread": p.S2_spread,
        "D1-D2": p.D1 - p.D2,
        "F1-F2": p.F1 - p.F2,
        "dim_H-dim_B": dims.hausdorff - dims.box,
        "dim_B-dim_A": dims.box - dims.assouad,
        "dim_L-dim_H": dims.lower - dims.hausdorff,
        "dim_H-dim_A": dims.hausdorff - dims.assouad,
        "dim_L-dim_A": dims.lower - dims.assouad,
    }
    if p.carpet_type is CarpetType.MIXED:
        values["E1-E2"] = p.E1 - p.E2
    if not spec.is_product():
        m1, m2 = _maximizer_values(spec, starts, seed)
        values["G1-G2"] = m1.value - m2.value
    return [k for k, v in values.items() if tol_eq < abs(v) < margin]
