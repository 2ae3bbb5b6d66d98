"""Two-stage fit of the cell model to pull-test traces.

Stage one fits the substrate modulus ``E`` to traces recorded with no voltage.
Stage two holds ``E`` fixed and fits the effective friction coefficient to
traces recorded with the clutch energised.  Both stages minimise the sum of
squared force residuals with a bounded Brent search.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

from . import auc
from .errors import BracketFailure, EmptyInput, NoLockedData, NoUnlockedData
from .types import LOADING, AucGeometry, DielectricSpec, HysteresisTrace, ModelParams

E_BRACKET = (0.1e9, 20e9)  # Pa
MU_BRACKET = (0.0, 1.0)
PRESCAN_POINTS = 50


@dataclass
class ScalarFit:
    value: float
    sse: float
    at_bound: bool
    n_points: int
    history: list = field(default_factory=list)  # (parameter, sse) per evaluation


@dataclass
class FitReport:
    E_hat: float
    mu_hat: float
    rmse: float
    n_points: int
    per_trace_rmse: list
    E_at_bound: bool = False
    mu_at_bound: bool = False
    E_history: list = field(default_factory=list)
    mu_history: list = field(default_factory=list)

    def summary_text(self) -> str:
        lines = ["key,value",
                 f"E_hat_Pa,{self.E_hat:.9g}",
                 f"mu_hat,{self.mu_hat:.9g}",
                 f"rmse_N,{self.rmse:.9g}",
                 f"n_points,{self.n_points}",
                 f"E_at_bound,{int(self.E_at_bound)}",
                 f"mu_at_bound,{int(self.mu_at_bound)}"]
        lines += [f"trace_{i}_rmse_N,{r:.9g}" for i, r in enumerate(self.per_trace_rmse)]
        return "\n".join(lines) + "\n"

    def log_text(self) -> str:
        buf = io.StringIO()
        buf.write("stage 1: Young's modulus, sum of squared residuals per evaluation\n")
        for i, (e, sse) in enumerate(self.E_history):
            buf.write(f"  {i:4d}  E = {e / 1e9:.9g} GPa  sse = {sse:.9g} N^2\n")
        buf.write(f"  result E = {self.E_hat / 1e9:.9g} GPa"
                  f"{' (at bracket bound)' if self.E_at_bound else ''}\n")
        buf.write("stage 2: effective friction coefficient\n")
        for i, (mu, sse) in enumerate(self.mu_history):
            buf.write(f"  {i:4d}  mu = {mu:.9g}  sse = {sse:.9g} N^2\n")
        buf.write(f"  result mu = {self.mu_hat:.9g}"
                  f"{' (at bracket bound)' if self.mu_at_bound else ''}\n")
        buf.write(f"rmse over {self.n_points} samples = {self.rmse:.9g} N\n")
        return buf.getvalue()


def _trace_params(trace: HysteresisTrace, base: ModelParams) -> ModelParams:
    n = trace.metadata.get("n_layers", base.n_layers)
    return base.replace(n_layers=int(n))


def trace_residuals(trace: HysteresisTrace, params: ModelParams, geom: AucGeometry,
                    dielectric: DielectricSpec) -> np.ndarray:
    p = _trace_params(trace, params)
    model = auc.predict_force(trace.strain, trace.voltage, trace.branch == LOADING,
                              geom, dielectric, p)
    return trace.force - model


def is_unlocked(trace: HysteresisTrace) -> bool:
    return bool(np.all(trace.voltage == 0))


def _restrict(trace, branches, strain_max):
    sel = np.isin(trace.branch, list(branches))
    if strain_max is not None:
        sel &= trace.strain <= strain_max
    return trace.select(sel)


def _unimodal(values) -> bool:
    # non-increasing then non-decreasing, ignoring exact ties
    d = np.sign(np.diff(values))
    d = d[d != 0]
    return not np.any(np.diff(d) < 0)


def fit_youngs_modulus(traces, geom: AucGeometry, dielectric: DielectricSpec | None = None,
                       base: ModelParams | None = None, bracket=E_BRACKET,
                       rtol: float = 1e-4, branches=(LOADING,),
                       strain_max: float | None = None) -> ScalarFit:
    """Fit ``E`` to the traces recorded without voltage.

    A 50-point log-spaced pre-scan locates the basin, then bounded Brent refines
    ``log E`` inside the neighbouring grid cells.  Raises :class:`BracketFailure`
    carrying the best grid point if the pre-scan is not unimodal.
    """
    base = ModelParams() if base is None else base
    dielectric = dielectric or DielectricSpec("none", 1.0, 1.0)
    data = [_restrict(t, branches, strain_max) for t in traces if is_unlocked(t)]
    data = [t for t in data if len(t)]
    if not data:
        raise NoUnlockedData("no unlocked (zero-voltage) samples to fit E")
    history = []

    def sse(log_e):
        e = math.exp(log_e)
        p = base.replace(E=e, voltage=0.0)
        total = math.fsum(float(np.dot(r, r)) for r in
                          (trace_residuals(t, p, geom, dielectric) for t in data))
        history.append((e, total))
        return total

    lo, hi = math.log(bracket[0]), math.log(bracket[1])
    grid = np.linspace(lo, hi, PRESCAN_POINTS)
    scan = np.array([sse(x) for x in grid])
    best = int(np.argmin(scan))
    if not _unimodal(scan):
        raise BracketFailure(
            f"objective is not unimodal on E in [{bracket[0]:.3g}, {bracket[1]:.3g}] Pa; "
            f"best grid point E = {math.exp(grid[best]):.6g} Pa", best=math.exp(grid[best]))
    a = grid[max(best - 1, 0)]
    b = grid[min(best + 1, len(grid) - 1)]
    res = minimize_scalar(sse, bounds=(a, b), method="bounded", options={"xatol": rtol / 10})
    log_e, value = (res.x, res.fun) if res.fun <= scan[best] else (grid[best], scan[best])
    at_bound = bool(abs(log_e - lo) < rtol or abs(log_e - hi) < rtol)
    return ScalarFit(math.exp(log_e), float(value), at_bound, sum(len(t) for t in data), history)


def fit_mu_eff(traces, E: float, geom: AucGeometry, dielectric: DielectricSpec,
               base: ModelParams | None = None, bracket=MU_BRACKET,
               xatol: float = 1e-4) -> ScalarFit:
    """Fit the effective friction coefficient with ``E`` fixed.

    Residuals are taken over every sample of each energised trace, so on the
    loading branch they equal observed minus predicted extra locking force.
    """
    base = (ModelParams() if base is None else base).replace(E=E)
    data = [t for t in traces if not is_unlocked(t)]
    if not data:
        raise NoLockedData("no energised (voltage > 0) traces to fit mu")
    history = []

    def sse(mu):
        p = base.replace(mu=max(float(mu), 0.0))
        total = math.fsum(float(np.dot(r, r)) for r in
                          (trace_residuals(t, p, geom, dielectric) for t in data))
        history.append((float(mu), total))
        return total

    res = minimize_scalar(sse, bounds=bracket, method="bounded", options={"xatol": xatol})
    mu = float(res.x)
    candidates = [(res.fun, mu), (sse(bracket[0]), bracket[0]), (sse(bracket[1]), bracket[1])]
    value, mu = min(candidates)
    at_bound = bool(abs(mu - bracket[0]) <= xatol or abs(mu - bracket[1]) <= xatol)
    return ScalarFit(mu, float(value), at_bound, sum(len(t) for t in data), history)


def model_rmse(traces, params: ModelParams, geom: AucGeometry, dielectric: DielectricSpec) -> float:
    residuals = [trace_residuals(t, params, geom, dielectric) for t in traces]
    n = sum(r.size for r in residuals)
    if n == 0:
        raise EmptyInput("no samples to evaluate")
    return math.sqrt(math.fsum(float(np.dot(r, r)) for r in residuals) / n)


def fit_traces(traces, geom: AucGeometry, dielectric: DielectricSpec,
               base: ModelParams | None = None, e_bracket=E_BRACKET, mu_bracket=MU_BRACKET,
               strain_max: float | None = None) -> FitReport:
    base = ModelParams() if base is None else base
    traces = list(traces)
    e_fit = fit_youngs_modulus(traces, geom, dielectric, base, e_bracket, strain_max=strain_max)
    mu_fit = fit_mu_eff(traces, e_fit.value, geom, dielectric, base, mu_bracket)
    params = base.replace(E=e_fit.value, mu=mu_fit.value)
    per_trace = [model_rmse([t], params, geom, dielectric) for t in traces]
    return FitReport(
        E_hat=e_fit.value,
        mu_hat=mu_fit.value,
        rmse=model_rmse(traces, params, geom, dielectric),
        n_points=sum(len(t) for t in traces),
        per_trace_rmse=per_trace,
        E_at_bound=e_fit.at_bound,
        mu_at_bound=mu_fit.at_bound,
        E_history=e_fit.history,
        mu_history=mu_fit.history,
    )
