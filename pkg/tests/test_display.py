import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from auxskin import display as dm
from auxskin.addressing import figure_presets
from auxskin.errors import ValidationError

mp.mp.dps = 40
NONE = np.zeros((5, 5), bool)
FULL = np.ones((5, 5), bool)


def test_flat_limit():
    arc = dm.arc_profile(0.2, 0.0)
    assert arc.curvature == 0.0 and arc.apex_height == 0.0
    assert np.all(arc.z == 0)


def test_five_percent_arc_against_root_find():
    th = mp.findroot(lambda t: mp.sin(t) / t - 1 / mp.mpf("1.05"), 0.5)
    R = mp.mpf("0.21") / (2 * th)
    h = R * (1 - mp.cos(th))
    arc = dm.arc_profile(0.2, 0.05)
    assert arc.half_angle == pytest.approx(float(th), rel=1e-13)
    assert arc.radius == pytest.approx(float(R), rel=1e-13)
    assert arc.apex_height == pytest.approx(float(h), rel=1e-12)
    # frozen values
    assert arc.half_angle == pytest.approx(0.5384116723, abs=1e-10)
    assert arc.radius == pytest.approx(0.1950180603, abs=1e-10)
    assert arc.apex_height == pytest.approx(0.02759033307, abs=1e-11)
    assert arc.arc_length == pytest.approx(0.21, rel=1e-14)
    assert arc.chord == pytest.approx(0.2, rel=1e-14)


def test_arc_points_on_circle():
    arc = dm.arc_profile(0.3, 0.08, n_points=51)
    cz = arc.apex_height - arc.radius
    r = np.hypot(arc.x, arc.z - cz)  # x is centred on the span
    np.testing.assert_allclose(r, arc.radius, rtol=1e-12)
    assert arc.z[0] == pytest.approx(0, abs=1e-15) and arc.z[-1] == pytest.approx(0, abs=1e-15)


@settings(max_examples=200, deadline=None)
@given(eps=st.floats(1e-9, 0.4), span=st.floats(1e-3, 10.0))
def test_arc_residual(eps, span):
    assert dm.arc_profile(span, eps).residual < 1e-12


def test_height_and_curvature_strictly_increasing():
    eps = np.linspace(1e-4, 0.4, 100)
    arcs = [dm.arc_profile(0.2, e) for e in eps]
    h = np.array([a.apex_height for a in arcs])
    k = np.array([a.curvature for a in arcs])
    assert np.all(np.diff(h) > 0) and np.all(np.diff(k) > 0)
    assert dm.arc_profile(0.2, 0.10).apex_height > dm.arc_profile(0.2, 0.05).apex_height


def test_strain_limit_domain():
    with pytest.raises(ValidationError):
        dm.arc_profile(0.2, -0.01)
    with pytest.raises(ValidationError):
        dm.arc_profile(-0.2, 0.05)


# ---- cross-sections

def test_uniform_section_is_the_arc():
    sec = dm.cross_section(0.2, [0.05] * 5)
    arc = dm.arc_profile(0.2, 0.05, n_points=41)
    np.testing.assert_allclose(sec.height(arc.x + 0.1), arc.z, atol=1e-12)


def test_section_mixed_is_slope_continuous_and_clamped():
    sec = dm.cross_section(0.2, [0.05, 0.05, 0.05, 0.01, 0.01])
    x = np.linspace(0, 0.2, 2001)
    z = sec.height(x)
    assert z[0] == pytest.approx(0, abs=1e-14) and z[-1] == pytest.approx(0, abs=1e-14)
    assert np.all(z >= -1e-15)
    slope = np.diff(z) / np.diff(x)
    assert np.max(np.abs(np.diff(slope))) < 1e-3  # no kinks at cell edges
    assert x[np.argmax(z)] < 0.1


# ---- heightmaps

def test_all_locked_zero_limit_is_flat():
    cfg = dm.DisplayConfig(strain_limit_locked=0.0)
    assert np.all(dm.heightmap(cfg, FULL).z == 0.0)


def test_unlocked_map_rotation_symmetric():
    hm = dm.heightmap(dm.DisplayConfig(), NONE)
    np.testing.assert_allclose(hm.z, np.rot90(hm.z), atol=1e-15)


@pytest.mark.parametrize("name", list(figure_presets()))
def test_heightmap_nonnegative_and_clamped(name):
    hm = dm.heightmap(dm.DisplayConfig(), figure_presets()[name])
    assert np.all(hm.z >= 0)
    assert np.all(hm.z[0] == 0) and np.all(hm.z[-1] == 0)
    assert np.all(hm.z[:, 0] == 0) and np.all(hm.z[:, -1] == 0)


def test_right_40_peak_left_of_centre():
    cfg = dm.DisplayConfig()
    hm = dm.heightmap(cfg, figure_presets()["right-40"])
    i, j = np.unravel_index(np.argmax(hm.z), hm.z.shape)
    assert hm.x[j] < cfg.base_length / 2


def test_swapped_limits_complemented_mask():
    a = dm.DisplayConfig(strain_limit_unlocked=0.05, strain_limit_locked=0.02)
    rng = np.random.default_rng(5)
    for _ in range(5):
        mask = rng.random((5, 5)) < 0.4
        hm_a = dm.heightmap(a, mask)
        # swapping which value belongs to which state and complementing the mask
        # leaves every cell's strain limit, hence the surface, unchanged
        limits = np.where(~mask, 0.05, 0.02)  # locked 0.05, unlocked 0.02
        np.testing.assert_array_equal(a.strain_limits(mask), limits)
        hm_b = dm.heightmap_from_limits(limits, a.base_length, a.samples_per_cell)
        np.testing.assert_array_equal(hm_a.z, hm_b.z)


def test_heightmap_text_layout():
    hm = dm.heightmap(dm.DisplayConfig(samples_per_cell=2), figure_presets()["top-40"])
    lines = hm.to_text().splitlines()
    meta = [ln for ln in lines if ln.startswith("#")]
    assert "# provenance.strain_limit_locked=calibration" in meta
    header = lines[len(meta)]
    assert header.startswith("y_m\\x_m,")
    assert len(header.split(",")) == 1 + 12
    assert len(lines) == len(meta) + 1 + 12


# ---- curvature

def test_identical_masks_ratio_one():
    cfg = dm.DisplayConfig()
    for m in (NONE, figure_presets()["right-60"]):
        assert dm.curvature_ratio(cfg, m, m).ratio == pytest.approx(1.0, rel=1e-12)


def test_calibrated_default_ratio_with_provenance():
    cfg = dm.DisplayConfig()
    assert cfg.strain_limit_locked == pytest.approx(0.008475027, abs=1e-9)
    cmp = dm.curvature_ratio(cfg, NONE, FULL)
    assert cmp.ratio == pytest.approx(dm.TARGET_CURVATURE_RATIO, rel=0.05)
    assert cmp.ratio == pytest.approx(2.3, rel=1e-9)
    assert cmp.provenance["strain_limit_locked"] == "calibration"
    assert not cmp.degenerate


def test_user_locked_limit_drops_calibration_tag():
    cfg = dm.DisplayConfig(strain_limit_locked=0.0214)
    assert cfg.provenance == {"strain_limit_locked": "user"}
    # with strain-limited arcs this limit gives a much smaller contrast than 2.3
    assert dm.curvature_ratio(cfg, NONE, FULL).ratio == pytest.approx(1.4725250, rel=1e-6)


@pytest.mark.parametrize("scale", [0.1, 0.5, 3.0])
def test_ratio_scale_invariant(scale):
    base = dm.DisplayConfig()
    scaled = dm.DisplayConfig(base_length=base.base_length * scale)
    m = figure_presets()["right-40"]
    assert dm.curvature_ratio(scaled, NONE, m).ratio == pytest.approx(
        dm.curvature_ratio(base, NONE, m).ratio, rel=1e-9)


def test_flat_profile_marks_degenerate():
    cfg = dm.DisplayConfig(strain_limit_locked=0.0)
    cmp = dm.curvature_ratio(cfg, NONE, FULL)
    assert cmp.degenerate and math.isinf(cmp.ratio)


def test_circle_fit_recovers_radius():
    t = np.linspace(-0.4, 0.4, 81)
    assert dm.fit_circle_curvature(2.0 * np.sin(t), 2.0 * np.cos(t) - 1.0) == pytest.approx(0.5, rel=1e-10)


def test_slope_ratio_diagnostic_reported():
    cfg = dm.DisplayConfig()
    mask = np.zeros((5, 5), bool)
    mask[:, 1:] = True  # 80 % locked
    r = dm.side_slope_ratio(cfg, mask)
    assert r > 1.0
    assert r == pytest.approx(1.43, abs=0.01)
    assert dm.side_slope_ratio(cfg, NONE) == pytest.approx(1.0, rel=1e-9)


def test_display_config_validation():
    with pytest.raises(ValidationError):
        dm.DisplayConfig(strain_limit_unlocked=0.05, strain_limit_locked=0.06)
    with pytest.raises(ValidationError):
        dm.DisplayConfig().strain_limits(np.zeros((4, 5), bool))
