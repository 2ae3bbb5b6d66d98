import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from auxskin import auc, spring_array as sa
from auxskin.errors import NoConvergence, ValidationError
from auxskin.types import MAX_STRAIN, ModelParams

from oracles import grid_search_angle

K_U = 1.0
RATIO = sa.MEASURED_STIFFNESS_RATIO


def cfg(rows=4, cols=5, ratio=RATIO, k_u=K_U, pitch=37e-3):
    return sa.ArrayConfig(rows, cols, k_u, ratio * k_u, column_pitch=pitch)


# ---- cell stiffness

def test_cell_pair_zero_voltage(geom, hfp):
    k_u, k_l = sa.cell_stiffness_pair(geom, hfp, ModelParams())
    assert k_l == pytest.approx(k_u, rel=1e-12)


def test_cell_pair_pinned_ratio(geom, hfp):
    k_u, k_l = sa.cell_stiffness_pair(geom, hfp, ModelParams(voltage=600.0), ratio=RATIO)
    assert k_l == 7.6 * k_u


def test_cell_pair_matches_stiffness_ratio(geom, hfp):
    p = ModelParams(voltage=600.0)
    k_u, k_l = sa.cell_stiffness_pair(geom, hfp, p)
    assert abs(k_l / k_u - auc.stiffness_ratio(geom, hfp, p)) < 1e-9


# ---- axial

def test_axial_closed_forms():
    c = cfg()
    none = np.zeros(c.shape, bool)
    assert sa.axial_stiffness(c, none) == 1.25
    assert sa.axial_stiffness(c, ~none) == 9.5
    bottom2 = sa.rows_locked_mask(c, 2)
    assert bottom2[2:].all() and not bottom2[:2].any()
    # per column 1/(2/k_u + 2/(7.6 k_u)) = k_u/(2 + 2/7.6)
    assert sa.axial_stiffness(c, bottom2) == pytest.approx(5 / (2 + 2 / 7.6), rel=1e-15)
    assert sa.axial_stiffness(c, bottom2) == pytest.approx(2.2093023, rel=1e-7)


@settings(max_examples=60, deadline=None)
@given(rows=st.integers(1, 6), cols=st.integers(1, 6), k=st.floats(0.1, 1e4))
def test_uniform_identity(rows, cols, k):
    c = sa.ArrayConfig(rows, cols, k, k)
    assert sa.axial_stiffness(c, np.zeros((rows, cols), bool)) == pytest.approx(cols / rows * k, rel=1e-14)


@settings(max_examples=60, deadline=None)
@given(data=st.data())
def test_axial_monotone_in_single_cell(data):
    rows, cols = data.draw(st.integers(1, 5)), data.draw(st.integers(1, 5))
    c = cfg(rows, cols)
    mask = np.array(data.draw(st.lists(st.booleans(), min_size=rows * cols, max_size=rows * cols)))
    mask = mask.reshape(rows, cols)
    i, j = data.draw(st.integers(0, rows - 1)), data.draw(st.integers(0, cols - 1))
    lo, hi = mask.copy(), mask.copy()
    lo[i, j], hi[i, j] = False, True
    assert sa.axial_stiffness(c, hi) >= sa.axial_stiffness(c, lo)


def test_linear_curve_equals_stiffness_times_displacement():
    c = cfg()
    mask = sa.rows_locked_mask(c, 1)
    curve = sa.axial_force_curve(c, mask, np.linspace(0, 0.05, 11))
    np.testing.assert_allclose(curve.force, sa.axial_stiffness(c, mask) * curve.displacement,
                               rtol=1e-12, atol=1e-15)


def test_series_split_two_identical():
    cell = sa.LinearCell(3.0, 3.0)
    f, ext = sa.solve_column([False, False], 1e-3, cell)
    np.testing.assert_allclose(ext, [0.5e-3, 0.5e-3], rtol=1e-12)
    assert f == pytest.approx(1.5e-3, rel=1e-12)


def test_series_split_locked_unlocked():
    cell = sa.LinearCell(1.0, 7.6)
    _, ext = sa.solve_column([True, False], 1e-3, cell)
    assert ext[1] == pytest.approx(7.6 / 8.6 * 1e-3, rel=1e-12)
    assert ext[1] == pytest.approx(0.88372e-3, abs=5e-9)
    assert ext.sum() == pytest.approx(1e-3, rel=1e-12)


def test_nonlinear_initial_slope(geom):
    c = cfg(k_u=13.48)
    cell = sa.ScaledAucCell(c.k_unlocked, c.k_locked, geom)
    for mask in (np.zeros(c.shape, bool), np.ones(c.shape, bool), sa.rows_locked_mask(c, 2)):
        for w in (0.005, 0.002):
            curve = sa.axial_force_curve(c, mask, np.linspace(0, w, 6), cell)
            slope = np.polyfit(curve.displacement, curve.force, 1)[0]
            assert slope == pytest.approx(sa.axial_stiffness(c, mask), rel=0.02)


def test_nonlinear_column_beyond_range(geom):
    cell = sa.ScaledAucCell(1.0, 7.6, geom)
    with pytest.raises(NoConvergence, match="column 3"):
        sa.solve_column([False, True], 2.5 * MAX_STRAIN * geom.reference_length, cell, column=3)


def test_mask_shape_checked():
    with pytest.raises(ValidationError):
        sa.axial_stiffness(cfg(), np.zeros((5, 4), bool))
    with pytest.raises(ValidationError):
        sa.ArrayConfig(4, 5, 2.0, 1.0)


# ---- bending

def test_bend_uniform_and_symmetric_masks():
    c = cfg()
    assert sa.bend_equilibrium(c, np.zeros(c.shape, bool), 0.05).total_angle == 0.0
    sym = np.zeros(c.shape, bool)
    sym[:, [0, 4]] = True
    sym[1, 2] = True
    assert abs(sa.bend_equilibrium(c, sym, 0.05).total_angle) < 1e-9


def test_bend_two_left_columns_grid_oracle():
    c = cfg()
    mask = sa.columns_locked_mask(c, 2)
    d = 1e-3
    strain = d / c.column_rest_length
    res = sa.bend_equilibrium(c, mask, strain)
    phi_grid, e_grid = grid_search_angle(c, mask, strain)
    assert abs(res.total_angle - phi_grid) < 2e-5
    assert res.energy <= e_grid + 1e-15
    assert res.total_angle > 0  # stiff side on the left stretches less


def test_bend_random_masks_grid_oracle():
    rng = np.random.default_rng(7)
    for n in range(2, 6):
        c = cfg(n, n)
        for _ in range(10):
            mask = rng.random((n, n)) < 0.5
            res = sa.bend_equilibrium(c, mask, 0.05)
            phi_grid, e_grid = grid_search_angle(c, mask, 0.05)
            assert abs(res.total_angle - phi_grid) < 2e-5
            assert res.energy <= e_grid * (1 + 1e-12)


@settings(max_examples=60, deadline=None)
@given(data=st.data())
def test_bend_mirror_and_scaling(data):
    rows, cols = data.draw(st.integers(1, 5)), data.draw(st.integers(2, 6))
    mask = np.array(data.draw(st.lists(st.booleans(), min_size=rows * cols, max_size=rows * cols)))
    mask = mask.reshape(rows, cols)
    strain = data.draw(st.floats(-0.2, 0.2))
    scale = data.draw(st.floats(1e-3, 1e3))
    c = cfg(rows, cols)
    phi = sa.bend_equilibrium(c, mask, strain).total_angle
    assert sa.bend_equilibrium(c, mask[:, ::-1], strain).total_angle == -phi
    scaled = cfg(rows, cols, k_u=scale)
    assert sa.bend_equilibrium(scaled, mask, strain).total_angle == pytest.approx(phi, rel=1e-12, abs=1e-15)


def test_single_column_has_no_rotation():
    c = cfg(4, 1)
    assert sa.bend_equilibrium(c, np.ones((4, 1), bool), 0.05).total_angle == 0.0


def test_sweep_endpoints_and_single_peak():
    c = cfg()
    rows = sa.bending_angle_sweep(c, 0.05)
    angles = [a for _, a, _ in rows]
    assert [n for n, _, _ in rows] == list(range(6))
    assert angles[0] == 0.0 and angles[-1] == 0.0
    np.testing.assert_allclose(angles, [0, 0.0725274725, 0.0920930233, 0.0920930233,
                                        0.0532258065, 0], rtol=1e-9, atol=0)
    d = np.sign(np.round(np.diff(angles), 12))
    d = d[d != 0]
    assert not np.any(np.diff(d) > 0)  # rises then falls
    text = sa.sweep_csv(rows)
    assert text.splitlines()[0] == "locked_count,total_angle_rad,energy_J"


@pytest.mark.parametrize("ratio", [1.5, 4.6, 7.0, 7.6, 20.0])
@pytest.mark.parametrize("cols", [3, 4, 5, 6])
def test_sweep_unimodal_for_any_ratio(ratio, cols):
    angles = [a for _, a, _ in sa.bending_angle_sweep(cfg(4, cols, ratio), 0.05)]
    peak = int(np.argmax(angles))
    assert all(x <= y + 1e-15 for x, y in zip(angles[:peak], angles[1:peak + 1]))
    assert all(x >= y - 1e-15 for x, y in zip(angles[peak:], angles[peak + 1:]))


def test_bend_strain_range():
    with pytest.raises(ValidationError):
        sa.bend_equilibrium(cfg(), np.zeros((4, 5), bool), 0.5)


def test_scaled_cell_inverse_round_trip(geom):
    cell = sa.ScaledAucCell(13.0, 98.8, geom)
    for locked in (False, True):
        for x in (1e-7, 1e-4, 3e-3, 0.9 * cell.max_extension):
            f = float(cell.force(x, locked))
            assert cell.extension(f, locked) == pytest.approx(x, rel=1e-10)
        assert cell.extension(10 * float(cell.force(cell.max_extension, locked)), locked) == math.inf
