import numpy as np
import pytest

from auxskin import auc, fitting
from auxskin.errors import BracketFailure, EmptyInput, NoLockedData, NoUnlockedData
from auxskin.types import HysteresisTrace, ModelParams

from conftest import synthetic_traces


def zero_voltage_curve(E, geom, hfp, n=101):
    return auc.force_strain_curve(np.linspace(0, 0.05, n), geom, hfp, ModelParams(E=E))


@pytest.mark.parametrize("E", [2.1e9, 4.0e9])
def test_youngs_modulus_recovery(geom, hfp, E):
    fit = fitting.fit_youngs_modulus([zero_voltage_curve(E, geom, hfp)], geom, hfp)
    assert fit.value == pytest.approx(E, rel=1e-3)
    assert not fit.at_bound
    assert fit.history and fit.n_points == 101


def test_all_zero_force_hits_lower_bound(geom, hfp):
    tr = zero_voltage_curve(2.1e9, geom, hfp)
    tr.force[:] = 0.0
    fit = fitting.fit_youngs_modulus([tr], geom, hfp)
    assert fit.value == pytest.approx(fitting.E_BRACKET[0], rel=1e-3)
    assert fit.at_bound


def test_non_unimodal_objective_raises_with_best(geom, hfp, monkeypatch):
    tr = zero_voltage_curve(2.1e9, geom, hfp)

    def bumpy(trace, params, geom, dielectric):
        # two basins, at 0.5 GPa and 8 GPa
        x = np.log(params.E)
        depth = min((x - np.log(0.5e9)) ** 2, (x - np.log(8e9)) ** 2 + 0.1)
        return np.full(len(trace), np.sqrt(depth))

    monkeypatch.setattr(fitting, "trace_residuals", bumpy)
    with pytest.raises(BracketFailure) as exc:
        fitting.fit_youngs_modulus([tr], geom, hfp)
    assert exc.value.best == pytest.approx(0.5e9, rel=0.1)


def test_unimodality_check():
    assert fitting._unimodal([5, 3, 1, 1, 2, 4])
    assert fitting._unimodal([1, 2, 3])
    assert not fitting._unimodal([3, 1, 2, 0, 4])


@pytest.mark.parametrize("mu", [0.13, 0.34])
def test_mu_recovery(geom, hfp, mu):
    trs = synthetic_traces(2.1e9, mu, geom, hfp)
    fit = fitting.fit_mu_eff(trs, 2.1e9, geom, hfp)
    assert fit.value == pytest.approx(mu, rel=1e-2)


def test_mu_frictionless_limit(geom, hfp):
    trs = synthetic_traces(2.1e9, 0.0, geom, hfp)
    fit = fitting.fit_mu_eff(trs, 2.1e9, geom, hfp)
    assert abs(fit.value) < 1e-3
    assert fit.at_bound


def test_missing_data_errors(geom, hfp):
    free, held = synthetic_traces(2.1e9, 0.13, geom, hfp)
    with pytest.raises(NoUnlockedData):
        fitting.fit_youngs_modulus([held], geom, hfp)
    with pytest.raises(NoLockedData):
        fitting.fit_mu_eff([free], 2.1e9, geom, hfp)
    with pytest.raises(EmptyInput):
        fitting.model_rmse([], ModelParams(), geom, hfp)


def test_rmse_examples(geom, hfp):
    p = ModelParams(voltage=500.0)
    tr = auc.hysteresis_loop(0.05, 51, geom, hfp, p)
    assert fitting.model_rmse([tr], p, geom, hfp) < 1e-12
    shifted = HysteresisTrace(tr.strain, tr.force + 0.1, tr.voltage, tr.branch)
    assert fitting.model_rmse([shifted], p, geom, hfp) == pytest.approx(0.1, rel=1e-12)
    four = auc.force_strain_curve(np.linspace(0, 0.03, 4), geom, hfp, p)
    four.force = four.force + np.array([0.1, -0.1, 0.1, -0.1])
    assert fitting.model_rmse([four], p, geom, hfp) == pytest.approx(0.1, rel=1e-12)


def test_rmse_invariant_under_reordering(geom, hfp):
    p = ModelParams(voltage=300.0)
    tr = auc.hysteresis_loop(0.05, 41, geom, hfp, p)
    noisy = HysteresisTrace(tr.strain, tr.force + np.random.default_rng(3).normal(0, 0.02, len(tr)),
                            tr.voltage, tr.branch)
    perm = np.random.default_rng(4).permutation(len(tr))
    a = fitting.model_rmse([noisy], p, geom, hfp)
    b = fitting.model_rmse([noisy.select(perm)], p, geom, hfp)
    assert a == pytest.approx(b, rel=1e-13)


def test_subsampling_invariance(geom, hfp):
    tr = zero_voltage_curve(3.3e9, geom, hfp, n=201)
    full = fitting.fit_youngs_modulus([tr], geom, hfp).value
    half = fitting.fit_youngs_modulus([tr.select(slice(None, None, 2))], geom, hfp).value
    assert half == pytest.approx(full, rel=1e-4)


def test_random_ground_truths_noiseless(geom, hfp):
    rng = np.random.default_rng(2024)
    for _ in range(20):
        E = float(np.exp(rng.uniform(np.log(0.5e9), np.log(10e9))))
        mu = float(rng.uniform(0.02, 0.5))
        report = fitting.fit_traces(synthetic_traces(E, mu, geom, hfp), geom, hfp)
        assert report.E_hat == pytest.approx(E, rel=1e-3)
        assert report.mu_hat == pytest.approx(mu, rel=1e-2)
        assert report.rmse < 1e-6


def test_noise_recovery_over_20_seeds(geom, hfp):
    for seed in range(20):
        trs = synthetic_traces(2.1e9, 0.13, geom, hfp, n_points=2001, noise=0.01, seed=seed)
        fit = fitting.fit_youngs_modulus(trs[:1], geom, hfp)
        assert fit.value == pytest.approx(2.1e9, rel=0.05)


def test_layer_count_from_metadata(geom, hfp):
    p = ModelParams(voltage=600.0, n_layers=3)
    tr = auc.hysteresis_loop(0.05, 41, geom, hfp, p)
    assert tr.metadata["n_layers"] == 3
    fit = fitting.fit_mu_eff([tr], 2.1e9, geom, hfp)
    assert fit.value == pytest.approx(0.13, rel=1e-2)


def test_strain_max_restricts_e_fit(geom, hfp):
    tr = zero_voltage_curve(2.1e9, geom, hfp)
    tr.force[tr.strain > 0.02] += 5.0  # corrupt the tail
    fit = fitting.fit_youngs_modulus([tr], geom, hfp, strain_max=0.02)
    assert fit.value == pytest.approx(2.1e9, rel=1e-3)


def test_report_text(geom, hfp):
    report = fitting.fit_traces(synthetic_traces(2.1e9, 0.13, geom, hfp), geom, hfp)
    lines = report.summary_text().splitlines()
    assert lines[0] == "key,value"
    keys = [ln.split(",")[0] for ln in lines[1:]]
    assert keys[:6] == ["E_hat_Pa", "mu_hat", "rmse_N", "n_points", "E_at_bound", "mu_at_bound"]
    log = report.log_text()
    assert "stage 1" in log and "stage 2" in log
    assert log.count("sse =") == len(report.E_history) + len(report.mu_history)
