import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.optimize import brentq

from carpetdim.carpet import CarpetSpec, CarpetType, classify_type
from carpetdim.roots import (
    E_SENTINEL,
    F_SENTINEL,
    RootError,
    assouad_lower_profile,
    fibre_exponents,
    projection_exponents,
    solve_box_exponent,
    solve_partition_exponent,
    solve_weighted_exponent,
)
from conftest import alpha_82, carpet_seeds, ex81_spec, ex82_spec, seeded_carpet


def brent_partition(ratios):
    return brentq(lambda t: sum(r**t for r in ratios) - 1, 0.0, 1e4, xtol=1e-15)


def test_partition_closed_forms():
    assert solve_partition_exponent([0.5, 0.5]) == pytest.approx(1.0, abs=1e-13)
    assert solve_partition_exponent([1 / 3, 1 / 3]) == pytest.approx(
        math.log(2) / math.log(3), abs=1e-13
    )


def test_partition_ex81_widths():
    t1 = solve_partition_exponent([0.0765, 0.2298, 0.499])
    assert t1 == pytest.approx(brent_partition([0.0765, 0.2298, 0.499]), abs=1e-12)
    assert round(t1, 4) == 0.8083


@pytest.mark.parametrize("bad", [[], [0.5, 1.0], [0.0, 0.5], [-0.1]])
def test_partition_rejects(bad):
    with pytest.raises(ValueError):
        solve_partition_exponent(bad)


def test_weighted_root_at_zero_and_below():
    assert solve_weighted_exponent([1.0], [0.5]) == 0.0
    # total weight below 1 puts the root at negative exponents
    with pytest.raises(RootError):
        solve_weighted_exponent([0.5], [0.5])


def test_large_root_brackets():
    # many tiny strips push the root past the initial bracket
    x = solve_partition_exponent([0.001] * 10**4)
    assert x == pytest.approx(4 / 3, abs=1e-12)


def test_box_exponents_ex81():
    spec = ex81_spec()
    t1, t2 = projection_exponents(spec)
    assert solve_box_exponent(spec, t1, 1) == pytest.approx(1.368858891, abs=1e-9)
    assert solve_box_exponent(spec, t2, 2) == pytest.approx(1.369071220, abs=1e-9)
    with pytest.raises(ValueError):
        solve_box_exponent(spec, t1, 3)


def test_box_exponents_ex82():
    spec = ex82_spec()
    t1, t2 = projection_exponents(spec)
    a = alpha_82()
    assert t1 == pytest.approx(1.0, abs=1e-12) and t2 == pytest.approx(1.0, abs=1e-12)
    assert solve_box_exponent(spec, t1, 1) == pytest.approx(1 + a, abs=1e-10)
    assert solve_box_exponent(spec, t2, 2) == pytest.approx(1 + a, abs=1e-10)
    assert (1 / 6) ** a + (1 / 3) ** a == pytest.approx(1.0, abs=1e-14)
    assert a == pytest.approx(0.48954, abs=1e-5)


def test_fibre_exponents_closed_forms():
    spec = ex82_spec()
    S1, _ = fibre_exponents(spec)
    # column 1 holds heights (1/6, 1/3) in the reconstruction; columns with
    # two equal heights give log2/log(1/h)
    values = sorted(S1.values())
    assert values[0] == pytest.approx(math.log(2) / math.log(6), abs=1e-12)
    assert values[-1] == pytest.approx(math.log(2) / math.log(3), abs=1e-12)


def test_single_cell_column_is_zero():
    spec = CarpetSpec((0.5, 0.5), (1 / 3,) * 3, ((0, 0), (1, 1), (1, 2)))
    S1, _ = fibre_exponents(spec)
    assert S1[0] == 0.0
    assert S1[1] == pytest.approx(math.log(2) / math.log(3), abs=1e-13)


def test_ex82_profile():
    p = assouad_lower_profile(ex82_spec())
    a = alpha_82()
    assert p.E1 == pytest.approx(1 + math.log(2) / math.log(3), abs=1e-12)
    assert p.F1 == pytest.approx(1 + math.log(2) / math.log(6), abs=1e-12)
    assert p.E2 == pytest.approx(1 + a, abs=1e-10)
    assert p.F2 == pytest.approx(1 + a, abs=1e-10)


def test_horizontal_sentinels():
    spec = CarpetSpec((0.5, 0.5), (1 / 3,) * 3, ((0, 0), (0, 1), (1, 2)))
    p = assouad_lower_profile(spec)
    assert p.carpet_type is CarpetType.HORIZONTAL
    assert p.E2 == E_SENTINEL and p.F2 == F_SENTINEL
    assert p.dim_A == p.E1 and p.dim_L == p.F1


def test_vertical_sentinels():
    spec = CarpetSpec((1 / 3,) * 3, (0.5, 0.5), ((0, 0), (1, 0), (2, 1)))
    p = assouad_lower_profile(spec)
    assert p.carpet_type is CarpetType.VERTICAL
    assert p.E1 == E_SENTINEL and p.F1 == F_SENTINEL


def test_uniform_vertical_tildes_agree():
    p = assouad_lower_profile(ex81_spec())
    assert p.E1_tilde == pytest.approx(p.F1_tilde, abs=1e-15)
    assert p.D1 == pytest.approx(p.E1_tilde, abs=1e-10)


@given(
    st.lists(st.floats(min_value=0.01, max_value=0.99), min_size=2, max_size=8)
)
def test_partition_matches_brent(ratios):
    if sum(ratios) < 1:
        ratios = ratios + [0.99] * 2
    t = solve_partition_exponent(ratios)
    assert abs(math.fsum(r**t for r in ratios) - 1) <= 1e-12
    assert t == pytest.approx(brent_partition(ratios), abs=1e-11)


@given(carpet_seeds)
def test_profile_residuals_and_bounds(seed):
    spec = seeded_carpet(seed)
    p = assouad_lower_profile(spec)
    a, b = spec.cell_widths, spec.cell_heights
    cols = sorted(set(spec.col.tolist()))
    rows = sorted(set(spec.row.tolist()))
    assert abs(math.fsum(np.array(spec.widths)[cols] ** p.t1) - 1) <= 1e-12
    assert abs(math.fsum(np.array(spec.heights)[rows] ** p.t2) - 1) <= 1e-12
    assert abs(math.fsum(a**p.t1 * b ** (p.D1 - p.t1)) - 1) <= 1e-12
    assert abs(math.fsum(b**p.t2 * a ** (p.D2 - p.t2)) - 1) <= 1e-12
    assert 0 <= p.D1 <= 2 + 1e-12 and 0 <= p.D2 <= 2 + 1e-12
    # box candidates never exceed the Assouad candidates; equality exactly
    # when the fibres in that direction are uniform
    assert p.D1 <= p.E1_tilde + 1e-12 and p.D2 <= p.E2_tilde + 1e-12
    assert (abs(p.D1 - p.E1_tilde) <= 1e-9) == (p.S1_spread <= 1e-9)
    assert (abs(p.D2 - p.E2_tilde) <= 1e-9) == (p.S2_spread <= 1e-9)
    # sentinels never win
    assert 0 <= p.dim_L <= p.dim_A <= 2 + 1e-12
    kind = classify_type(spec).label
    if kind is CarpetType.HORIZONTAL:
        assert p.E2 == E_SENTINEL and p.F2 == F_SENTINEL
    elif kind is CarpetType.VERTICAL:
        assert p.E1 == E_SENTINEL and p.F1 == F_SENTINEL
    else:
        assert (p.E1, p.E2, p.F1, p.F2) == (p.E1_tilde, p.E2_tilde, p.F1_tilde, p.F2_tilde)


@given(carpet_seeds)
def test_fibre_exponents_solve_their_equations(seed):
    spec = seeded_carpet(seed)
    S1, S2 = fibre_exponents(spec)
    for i, S in S1.items():
        hs = [spec.heights[j] for (c, j) in spec.cells if c == i]
        assert abs(math.fsum(h**S for h in hs) - 1) <= 1e-12 or (len(hs) == 1 and S == 0)
    for j, S in S2.items():
        ws = [spec.widths[i] for (i, r) in spec.cells if r == j]
        assert abs(math.fsum(w**S for w in ws) - 1) <= 1e-12 or (len(ws) == 1 and S == 0)
