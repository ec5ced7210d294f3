"""Full analysis of one carpet, packaged as a serializable report.

The report is a tree of plain dicts with a fixed key order.  Floats are
written with 12 significant digits, so ``to_json`` output is stable and
``from_json(to_json(r)).to_json() == to_json(r)``.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from .carpet import CarpetSpec, classify_type
from .conditions import IMPOSSIBLE_CASES, classify, condition_flags, fibre_uniformity
from .roots import ROOT_TOL, assouad_lower_profile
from .variational import TIE_TOL, entropy_stats, maximize_objective

SIG_DIGITS = 12
CHECK_TOL = 1e-9


class ConvergenceError(ArithmeticError):
    """A solver finished without meeting its stopping rule."""


def round_floats(obj, digits: int = SIG_DIGITS):
    """Copy of ``obj`` with every float rounded to ``digits`` significant digits."""
    if isinstance(obj, bool) or obj is None or isinstance(obj, (int, str)):
        return obj
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if not math.isfinite(x):
            return x
        return float(f"{x:.{digits}g}")
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.ndarray):
        return [round_floats(v, digits) for v in obj.tolist()]
    if isinstance(obj, dict):
        return {str(k): round_floats(v, digits) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [round_floats(v, digits) for v in obj]
    raise TypeError(f"cannot serialize {type(obj).__name__}")


@dataclass(frozen=True)
class DimensionReport:
    hausdorff: float
    hausdorff_direction: str
    box: float
    assouad: float
    lower: float


SECTIONS = (
    "spec",
    "settings",
    "profile",
    "maximizers",
    "dimensions",
    "fibres",
    "conditions",
    "classification",
    "checks",
    "timings",
)


@dataclass
class AnalysisReport:
    spec: CarpetSpec
    settings: dict
    profile: dict
    maximizers: dict
    dimensions: DimensionReport
    fibres: dict
    conditions: dict
    classification: dict
    checks: dict
    timings: dict | None = field(default=None)

    @property
    def ok(self) -> bool:
        return all(self.checks.values())

    def to_dict(self) -> dict:
        out = {
            "spec": self.spec.to_dict(),
            "settings": self.settings,
            "profile": self.profile,
            "maximizers": self.maximizers,
            "dimensions": asdict(self.dimensions),
            "fibres": self.fibres,
            "conditions": self.conditions,
            "classification": self.classification,
            "checks": self.checks,
        }
        if self.timings is not None:
            out["timings"] = self.timings
        return round_floats(out)

    def to_json(self, indent: int | None = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent) + "\n"

    @classmethod
    def from_dict(cls, raw: dict) -> AnalysisReport:
        unknown = set(raw) - set(SECTIONS)
        if unknown:
            raise ValueError(f"unknown report section {sorted(unknown)[0]!r}")
        return cls(
            spec=CarpetSpec.from_dict(raw["spec"]),
            settings=raw["settings"],
            profile=raw["profile"],
            maximizers=raw["maximizers"],
            dimensions=DimensionReport(**raw["dimensions"]),
            fibres=raw["fibres"],
            conditions=raw["conditions"],
            classification=raw["classification"],
            checks=raw["checks"],
            timings=raw.get("timings"),
        )

    @classmethod
    def from_json(cls, text: str) -> AnalysisReport:
        return cls.from_dict(json.loads(text))


def _maximizer_section(res) -> dict:
    return {
        "value": res.value,
        "q": [float(v) for v in res.q],
        "theta": res.theta,
        "lambda": res.lam,
        "rho": res.rho,
        "converged": bool(res.converged),
        "iterations": res.iterations,
        "restarts": res.restarts,
        "stationarity": res.stationarity,
        "distinct_argmaxes": len(res.distinct_argmaxes) + 1,
    }


def _residuals(spec: CarpetSpec, p) -> dict:
    a, b = spec.cell_widths, spec.cell_heights
    cols = sorted(set(spec.col.tolist()))
    rows = sorted(set(spec.row.tolist()))
    w = np.array(spec.widths)[cols]
    h = np.array(spec.heights)[rows]
    return {
        "t1": abs(math.fsum(w**p.t1) - 1),
        "t2": abs(math.fsum(h**p.t2) - 1),
        "D1": abs(math.fsum(a**p.t1 * b ** (p.D1 - p.t1)) - 1),
        "D2": abs(math.fsum(b**p.t2 * a ** (p.D2 - p.t2)) - 1),
    }


def analyze(
    spec: CarpetSpec,
    tol_eq: float = TIE_TOL,
    tol_root: float = ROOT_TOL,
    starts: int = 16,
    seed: int = 0,
    timings: bool = False,
) -> AnalysisReport:
    """Run every computation on ``spec`` and cross-check the results.

    Raises ``ConvergenceError`` when a maximizer fails to converge.
    """
    clock = {}
    t0 = time.perf_counter()
    p = assouad_lower_profile(spec, tol_root)
    clock["roots"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    m1 = maximize_objective(spec, "g1", starts, seed)
    m2 = maximize_objective(spec, "g2", starts, seed)
    clock["maximizers"] = time.perf_counter() - t0
    for name, m in (("G1", m1), ("G2", m2)):
        if not m.converged:
            raise ConvergenceError(f"{name} maximizer did not converge after {m.iterations} iterations")

    t0 = time.perf_counter()
    fib = fibre_uniformity(spec, tol_eq, tol_root)
    flags = condition_flags(spec, tol_eq, starts, seed, tol_root)
    cls = classify(spec, tol_eq, starts, seed, tol_root)
    clock["conditions"] = time.perf_counter() - t0

    dims = cls.dimensions
    G1, G2 = m1.value, m2.value
    if spec.is_product():
        direction = "both"
    elif abs(G1 - G2) <= tol_eq:
        direction = "both"
    else:
        direction = "1" if G1 > G2 else "2"
    dim_report = DimensionReport(dims.hausdorff, direction, dims.box, dims.assouad, dims.lower)

    tc = classify_type(spec)
    profile = {
        "carpet_type": p.carpet_type.value,
        "self_similar_degenerate": tc.self_similar_degenerate,
        "t1": p.t1,
        "t2": p.t2,
        "D1": p.D1,
        "D2": p.D2,
        "S1": {str(k): v for k, v in sorted(p.S1.items())},
        "S2": {str(k): v for k, v in sorted(p.S2.items())},
        "E1": p.E1,
        "E2": p.E2,
        "F1": p.F1,
        "F2": p.F2,
        "E1_tilde": p.E1_tilde,
        "E2_tilde": p.E2_tilde,
        "F1_tilde": p.F1_tilde,
        "F2_tilde": p.F2_tilde,
    }
    fibres = {
        "vertical_uniform": fib.vertical_uniform,
        "horizontal_uniform": fib.horizontal_uniform,
        "S1_spread": fib.S1_spread,
        "S2_spread": fib.S2_spread,
    }
    conditions = {
        "ufH": flags.ufH,
        "ufB": flags.ufB,
        "ufA": flags.ufA,
        "ufL": flags.ufL,
        "product": flags.product,
        "margin_G": flags.margin_G,
        "margin_D": flags.margin_D,
        "margin_E": flags.margin_E,
        "margin_F": flags.margin_F,
        "branches": dict(sorted(flags.branches.items())),
    }
    classification = {
        "measure_dichotomy": cls.measure_dichotomy.value,
        "equal_HB": cls.equal_HB,
        "equal_BA": cls.equal_BA,
        "equal_HA": cls.equal_HA,
        "equal_LH": cls.equal_LH,
        "equal_LA": cls.equal_LA,
        "ahlfors_regular": cls.ahlfors_regular,
        "cor14_case": cls.cor14_case,
        "diagnostics": list(cls.diagnostics),
    }

    res = _residuals(spec, p)
    st1 = entropy_stats(spec, m1.q)
    st2 = entropy_stats(spec, m2.q)
    checks = {
        "dimensions_ordered": dims.ordered(CHECK_TOL),
        "implication_chain": (not flags.ufL or flags.ufA)
        and (not flags.ufA or flags.ufB)
        and (not flags.ufB or flags.ufH),
        "conditions_match_dimensions": not any(":" in n for n in cls.diagnostics),
        "case_possible": cls.cor14_case not in IMPOSSIBLE_CASES,
        "root_residuals": max(res.values()) <= 1e-12,
        "maximizers_converged": m1.converged and m2.converged,
        "stationarity": max(m1.stationarity, m2.stationarity) <= 1e-8,
        "entropy_inequality": all(s.QQ >= s.RR + s.SS - 1e-12 for s in (st1, st2)),
        "box_below_assouad_candidates": p.D1 <= p.E1_tilde + CHECK_TOL
        and p.D2 <= p.E2_tilde + CHECK_TOL,
        "lower_candidates_below_G": p.F1_tilde <= G1 + CHECK_TOL
        and p.F2_tilde <= G2 + CHECK_TOL,
        "hausdorff_below_box": dims.hausdorff <= dims.box + CHECK_TOL,
    }
    settings = {"tol_eq": tol_eq, "tol_root": tol_root, "starts": starts, "seed": seed}
    return AnalysisReport(
        spec=spec,
        settings=settings,
        profile=profile,
        maximizers={"G1": _maximizer_section(m1), "G2": _maximizer_section(m2)},
        dimensions=dim_report,
        fibres=fibres,
        conditions=conditions,
        classification=classification,
        checks=checks,
        timings=clock if timings else None,
    )
