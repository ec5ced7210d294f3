import math
import warnings

import numpy as np
import pytest
from hypothesis import given
from scipy.optimize import minimize

from carpetdim.carpet import CarpetSpec
from carpetdim.roots import assouad_lower_profile
from carpetdim.variational import (
    GuardError,
    as_simplex_point,
    box_maximizers,
    dim_hausdorff,
    entropy_stats,
    eval_objective,
    grid_oracle,
    lattice_size,
    maximize_objective,
    simplex_lattice,
)
from conftest import (
    alpha_82,
    bedford_mcmullen_spec,
    carpet_seeds,
    ex81_spec,
    ex82_spec,
    full_product_spec,
    seeded_carpet,
)


def slsqp_max(spec, which, starts=8, seed=0):
    """Independent optimizer: SLSQP over the simplex from several starts."""
    rng = np.random.default_rng(seed)
    best = -math.inf
    cons = [{"type": "eq", "fun": lambda q: q.sum() - 1}]
    bounds = [(1e-12, 1.0)] * spec.d

    def neg(q):
        q = np.clip(q, 1e-12, None)
        return -eval_objective(spec, q / q.sum(), which)

    for _ in range(starts):
        q0 = rng.dirichlet(np.ones(spec.d))
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            res = minimize(neg, q0, method="SLSQP", bounds=bounds, constraints=cons,
                           options={"ftol": 1e-14, "maxiter": 500})
        best = max(best, -res.fun)
    return best


def test_entropy_stats_product_uniform():
    spec = full_product_spec((0.5, 0.5), (0.25, 0.75))
    st = entropy_stats(spec, np.full(4, 0.25))
    assert st.QQ == pytest.approx(-math.log(4), abs=1e-15)
    assert st.RR == pytest.approx(-math.log(2), abs=1e-15)
    assert st.SS == pytest.approx(-math.log(2), abs=1e-15)


def test_entropy_stats_point_mass():
    spec = ex81_spec()
    st = entropy_stats(spec, [1, 0, 0, 0, 0, 0])
    assert st.QQ == 0.0
    assert st.RA == pytest.approx(math.log(0.0765), abs=1e-15)


def test_entropy_stats_ex81_uniform():
    st = entropy_stats(ex81_spec(), np.full(6, 1 / 6))
    assert st.QQ == pytest.approx(-math.log(6), abs=1e-14)
    assert st.RR == pytest.approx(-math.log(3), abs=1e-14)
    assert st.SS == pytest.approx(-math.log(3), abs=1e-14)


def test_entropy_stats_rejects_bad_q():
    spec = ex81_spec()
    with pytest.raises(ValueError):
        entropy_stats(spec, np.full(5, 0.2))
    with pytest.raises(ValueError):
        as_simplex_point([0.5, 0.6])


def test_g1_by_hand_ex81():
    spec = ex81_spec()
    q = np.full(6, 1 / 6)
    RA = sum(math.log(spec.widths[i]) for i, _ in spec.cells) / 6
    SB = math.log(0.2904)
    expected = -math.log(3) / RA + (-math.log(6) + math.log(3)) / SB
    assert eval_objective(spec, q, "g1") == pytest.approx(expected, abs=1e-14)


def test_box_maximizers_reach_D():
    for spec in (ex81_spec(), ex82_spec(), bedford_mcmullen_spec()):
        p = assouad_lower_profile(spec)
        q1, q2 = box_maximizers(spec)
        assert eval_objective(spec, q1, "f1") == pytest.approx(p.D1, abs=1e-10)
        assert eval_objective(spec, q2, "f2") == pytest.approx(p.D2, abs=1e-10)


def test_g_and_f_branching():
    spec = ex81_spec()
    q = np.full(6, 1 / 6)
    st = entropy_stats(spec, q)
    want = "g1" if st.RA >= st.SB else "g2"
    assert eval_objective(spec, q, "g") == eval_objective(spec, q, want)
    with pytest.raises(ValueError):
        eval_objective(spec, q, "h")


def test_ex81_maximizers():
    spec = ex81_spec()
    G1 = maximize_objective(spec, "g1")
    G2 = maximize_objective(spec, "g2")
    assert G1.value == pytest.approx(1.368858891, abs=1e-6)
    assert G2.value == pytest.approx(1.368381784, abs=1e-6)
    for m in (G1, G2):
        assert m.converged
        assert m.stationarity <= 1e-9
        assert abs(m.normalization) <= 1e-9
        assert m.theta + m.lam == pytest.approx(m.value, abs=1e-10)
        assert m.q.min() > 0
    st = entropy_stats(spec, G1.q)
    assert G1.rho == pytest.approx(st.RA / st.SB, abs=1e-12)


def test_ex81_hausdorff():
    value, direction = dim_hausdorff(ex81_spec())
    assert value == pytest.approx(1.368858891, abs=1e-6)
    assert direction == "1"


def test_ex82_hausdorff_is_box():
    value, _ = dim_hausdorff(ex82_spec())
    assert value == pytest.approx(1 + alpha_82(), abs=1e-9)


def test_product_hausdorff():
    spec = full_product_spec()
    value, _ = dim_hausdorff(spec)
    p = assouad_lower_profile(spec)
    assert value == pytest.approx(p.t1 + p.t2, abs=1e-9)


def test_bedford_mcmullen_uniform_fibres():
    spec = CarpetSpec((0.5, 0.5), (1 / 3,) * 3, ((0, 0), (0, 2), (1, 1), (1, 2)))
    p = assouad_lower_profile(spec)
    assert maximize_objective(spec, "g1").value == pytest.approx(p.D1, abs=1e-9)


def test_maximizer_matches_slsqp():
    for spec in (ex81_spec(), ex82_spec(), bedford_mcmullen_spec()):
        for which in ("g1", "g2"):
            ours = maximize_objective(spec, which).value
            theirs = slsqp_max(spec, which)
            assert ours >= theirs - 1e-9


def test_lattice_enumeration():
    pts = np.concatenate(list(simplex_lattice(5, 3)))
    assert len(pts) == lattice_size(5, 3) == 21
    assert np.allclose(pts.sum(axis=1), 1)
    assert len({tuple(np.round(p * 5).astype(int)) for p in pts}) == 21
    edge = np.concatenate(list(simplex_lattice(1, 4)))
    assert len(edge) == 4


def test_grid_oracle_toy_fine():
    spec = CarpetSpec((0.5, 0.5), (0.25, 0.75), ((0, 0), (1, 1)))
    for which in ("g1", "g2"):
        grid = grid_oracle(spec, which, n=1000)
        opt = maximize_objective(spec, which).value
        assert opt - 1e-4 <= grid.value <= opt + 1e-9


def test_grid_oracle_ex81():
    spec = ex81_spec()
    G1 = maximize_objective(spec, "g1").value
    grid = grid_oracle(spec, "g1", n=60)
    assert G1 - 0.01 <= grid.value <= G1 + 1e-9


def test_grid_oracle_guard():
    spec = full_product_spec((0.25,) * 4, (0.2, 0.3, 0.5))
    with pytest.raises(GuardError) as info:
        grid_oracle(spec, "g1", n=100)
    assert info.value.guard == "lattice_size"


@given(carpet_seeds)
def test_entropy_inequality(seed):
    spec = seeded_carpet(seed)
    rng = np.random.default_rng(seed)
    product = spec.is_product()
    for q in rng.dirichlet(np.ones(spec.d), size=10):
        st = entropy_stats(spec, q)
        assert st.QQ >= st.RR + st.SS - 1e-12
        if product:
            qp = st.R[spec.col] * st.S[spec.row]
            qp = qp / qp.sum()
            sp = entropy_stats(spec, qp)
            assert sp.QQ == pytest.approx(sp.RR + sp.SS, abs=1e-9)


@given(carpet_seeds)
def test_branch_comparison_and_domination(seed):
    spec = seeded_carpet(seed)
    rng = np.random.default_rng(seed + 1)
    for q in rng.dirichlet(np.ones(spec.d), size=10):
        st = entropy_stats(spec, q)
        g1 = eval_objective(spec, q, "g1")
        g2 = eval_objective(spec, q, "g2")
        if abs(st.RA - st.SB) <= 1e-12:
            assert g1 == pytest.approx(g2, abs=1e-12)
        elif st.RA > st.SB + 1e-9:
            assert g1 >= g2 - 1e-12
            assert g1 <= eval_objective(spec, q, "f1") + 1e-12
        elif st.SB > st.RA + 1e-9:
            assert g2 >= g1 - 1e-12
            assert g2 <= eval_objective(spec, q, "f2") + 1e-12


@given(carpet_seeds)
def test_maximizer_stationarity(seed):
    spec = seeded_carpet(seed)
    for which in ("g1", "g2"):
        m = maximize_objective(spec, which)
        assert m.converged
        assert m.stationarity <= 1e-9
        assert abs(m.normalization) <= 1e-9
        assert m.theta + m.lam == pytest.approx(m.value, abs=1e-9)
