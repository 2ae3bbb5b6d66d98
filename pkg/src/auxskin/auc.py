"""Planar kinematic model of one electroadhesive rotating-squares unit cell.

Torques act about the centre of a square: the applied pull ``tau_f``, the
bending of the four flexure hinges ``tau_j`` and the electroadhesive friction
``tau_ea``.  A stack of ``n_layers`` sheets has ``n_layers - 1`` clutch
interfaces and only one actively strained sheet.
"""

from __future__ import annotations

import math
from typing import Callable

import numpy as np

from .errors import DomainError, InsufficientData, NoConvergence
from .types import (
    LOADING,
    MAX_STRAIN,
    UNLOADING,
    AucGeometry,
    DielectricSpec,
    EquilibriumResult,
    HysteresisTrace,
    ModelParams,
)

EPS0 = 8.854e-12  # N/V^2
# integral of r over the unit square centred at the origin, times 6
FRICTION_SHAPE_FACTOR = math.asinh(1.0) + math.sqrt(2.0)
QUARTER_PI = math.pi / 4

SOLVER_TOL = 1e-12  # N m
SOLVER_MAXITER = 200


def _check_angle(theta):
    theta_arr = np.asarray(theta, dtype=float)
    if np.any(~np.isfinite(theta_arr)) or np.any(theta_arr < 0) or np.any(theta_arr > QUARTER_PI):
        raise DomainError(f"angle must lie in [0, pi/4], got {theta}")


def strain_from_angle(theta):
    """Axial engineering strain of the rotating-squares cell at node angle ``theta``."""
    _check_angle(theta)
    return np.cos(theta) + np.sin(theta) - 1.0


def angle_from_strain(strain):
    """Inverse of :func:`strain_from_angle`, closed form via cos + sin = sqrt(2) sin(theta + pi/4)."""
    strain_arr = np.asarray(strain, dtype=float)
    if np.any(~np.isfinite(strain_arr)) or np.any(strain_arr < 0) or np.any(strain_arr > MAX_STRAIN + 1e-15):
        raise DomainError(f"strain must lie in [0, sqrt(2) - 1], got {strain}")
    s = np.clip((1.0 + strain_arr) / math.sqrt(2.0), -1.0, 1.0)
    theta = np.clip(np.arcsin(s) - QUARTER_PI, 0.0, QUARTER_PI)
    return float(theta) if theta.ndim == 0 else theta


def moment_arm(theta, geom: AucGeometry):
    # a (cos - sin) written so it vanishes exactly at pi/4
    return geom.a * math.sqrt(2.0) * np.sin(QUARTER_PI - np.asarray(theta, dtype=float))


def torque_applied(f, theta, geom: AucGeometry):
    if np.any(np.asarray(f) < 0):
        raise DomainError("applied force must be non-negative")
    _check_angle(theta)
    return f * moment_arm(theta, geom)


def hinge_rotational_stiffness(geom: AucGeometry, params: ModelParams) -> float:
    """d tau_j / d theta for all four hinges: 4EI/c per unit bending angle 2 theta."""
    return 2.0 * params.E / 3.0 * (geom.delta**3 * geom.t / geom.c)


def hinge_torque(theta, geom: AucGeometry, params: ModelParams):
    if np.any(np.asarray(theta) < 0):
        raise DomainError("hinge angle must be non-negative")
    return hinge_rotational_stiffness(geom, params) * theta


def electrostatic_pressure(voltage, dielectric: DielectricSpec):
    if np.any(np.asarray(voltage) < 0):
        raise DomainError("voltage must be non-negative")
    return EPS0 * dielectric.epsilon_r / 2.0 * (np.asarray(voltage, dtype=float) / dielectric.d) ** 2


def ea_normal_force(voltage, dielectric: DielectricSpec, overlap_area: float):
    return electrostatic_pressure(voltage, dielectric) * overlap_area


def ea_friction_torque(voltage, dielectric: DielectricSpec, mu: float, a_ov: float):
    """Coulomb friction torque of a square pad of side ``a_ov`` spinning about its centre."""
    if mu < 0:
        raise DomainError("friction coefficient must be non-negative")
    sigma = electrostatic_pressure(voltage, dielectric)
    return mu * sigma * a_ov**3 / 6.0 * FRICTION_SHAPE_FACTOR


OverlapHook = Callable[[float], float]


def stack_friction_torque(geom: AucGeometry, dielectric: DielectricSpec, params: ModelParams,
                          theta=0.0, n_layers: int | None = None,
                          overlap: OverlapHook | None = None):
    """Total friction torque of the stack, one ``tau_ea`` per clutch interface.

    ``overlap`` optionally maps angle to the equivalent overlap side; by default
    the unstretched ``geom.a_ov`` is used at every angle.
    """
    n = params.n_layers if n_layers is None else n_layers
    if n < 2:
        raise DomainError("a stack needs at least two layers")
    a_ov = geom.a_ov if overlap is None else np.vectorize(overlap)(theta)
    return (n - 1) * ea_friction_torque(params.voltage, dielectric, params.mu, a_ov)


def _safeguarded_newton(g, dg, lo, hi, x0, tol, maxiter):
    glo, ghi = g(lo), g(hi)
    if abs(glo) < tol:
        return lo, glo, 0
    if abs(ghi) < tol:
        return hi, ghi, 0
    x = min(max(x0, lo), hi)
    gx = g(x)
    it = 0
    for it in range(1, maxiter + 1):
        if abs(gx) < tol:
            return x, gx, it
        if (gx > 0) == (glo > 0):
            lo, glo = x, gx
        else:
            hi = x
        slope = dg(x)
        step_ok = slope != 0 and math.isfinite(slope)
        xn = x - gx / slope if step_ok else lo
        if not (lo < xn < hi):
            xn = 0.5 * (lo + hi)
        if xn == x or hi - lo <= 4 * np.finfo(float).eps * max(1.0, abs(x)):
            x, gx = xn, g(xn)
            break
        x, gx = xn, g(xn)
    if abs(gx) < tol:
        return x, gx, it
    raise NoConvergence(f"torque residual {gx:.3e} N m exceeds {tol:.1e} after {maxiter} iterations")


def solve_equilibrium(f: float, geom: AucGeometry, dielectric: DielectricSpec, params: ModelParams,
                      theta_prev: float = 0.0, *, tol: float = SOLVER_TOL,
                      maxiter: int = SOLVER_MAXITER,
                      overlap: OverlapHook | None = None) -> EquilibriumResult:
    """Equilibrium node angle under pull ``f`` starting from ``theta_prev``.

    Static friction holds the cell where it is while the net drive torque
    ``|tau_f - tau_j|`` does not exceed the stack friction torque.  Otherwise the
    cell slides towards the drive until ``tau_f - tau_j - s tau_ea = 0`` with
    ``s`` the sign of the motion.  The root is bracketed between ``theta_prev``
    and the end of the range in the direction of motion.
    """
    if f < 0:
        raise DomainError("applied force must be non-negative")
    _check_angle(theta_prev)
    k_j = hinge_rotational_stiffness(geom, params)

    def tau_ea(theta):
        return float(stack_friction_torque(geom, dielectric, params, theta, overlap=overlap))

    def net(theta):
        return f * geom.a * (math.cos(theta) - math.sin(theta)) - k_j * theta

    drive = net(theta_prev)
    hold = tau_ea(theta_prev)
    if abs(drive) <= hold:
        return EquilibriumResult(theta=theta_prev, strain=float(strain_from_angle(theta_prev)),
                                 residual_torque=0.0, locked=True, friction_torque=drive)

    s = 1.0 if drive > 0 else -1.0
    lo, hi = (theta_prev, QUARTER_PI) if s > 0 else (0.0, theta_prev)

    def g(theta):
        return net(theta) - s * tau_ea(theta)

    def dg(theta):
        return -f * geom.a * (math.sin(theta) + math.cos(theta)) - k_j

    if (g(lo) > 0) == (g(hi) > 0) and abs(g(lo)) >= tol and abs(g(hi)) >= tol:
        # only possible with an angle-dependent overlap; friction wins at the far end
        edge = hi if s > 0 else lo
        return EquilibriumResult(theta=edge, strain=float(strain_from_angle(edge)),
                                 residual_torque=g(edge), locked=True,
                                 friction_torque=net(edge))
    x0 = theta_prev + s * min(abs(drive) - hold, 1.0) / (f * geom.a * math.sqrt(2.0) + k_j)
    theta, resid, iters = _safeguarded_newton(g, dg, lo, hi, x0, tol, maxiter)
    return EquilibriumResult(theta=theta, strain=float(strain_from_angle(theta)),
                             residual_torque=resid, locked=False, iterations=iters)


def max_hold_force(geom: AucGeometry, dielectric: DielectricSpec, params: ModelParams,
                   theta: float = 0.0, overlap: OverlapHook | None = None) -> float:
    """Largest pull the stack resists by static friction while parked at ``theta``."""
    _check_angle(theta)
    arm = float(moment_arm(theta, geom))
    if arm <= 1e-15 * geom.a:
        return math.inf
    return float((stack_friction_torque(geom, dielectric, params, theta, overlap=overlap)
                  + hinge_torque(theta, geom, params)) / arm)


def _check_grid(strain_grid) -> np.ndarray:
    eps = np.atleast_1d(np.asarray(strain_grid, dtype=float))
    if eps.ndim != 1:
        raise DomainError("strain grid must be one-dimensional")
    if np.any(np.diff(eps) < 0):
        raise DomainError("strain grid must be sorted ascending")
    if np.any(eps < 0) or np.any(eps >= MAX_STRAIN):
        raise DomainError("strain grid must lie in [0, sqrt(2) - 1)")
    return eps


def predict_force(strain, voltage, loading, geom: AucGeometry, dielectric: DielectricSpec,
                  params: ModelParams, overlap: OverlapHook | None = None) -> np.ndarray:
    """Model force for arbitrary samples; ``voltage`` and ``loading`` broadcast per sample.

    ``params.voltage`` is ignored in favour of the per-sample voltages.
    """
    eps = np.atleast_1d(np.asarray(strain, dtype=float))
    if np.any(eps < 0) or np.any(eps >= MAX_STRAIN):
        raise DomainError("strain must lie in [0, sqrt(2) - 1)")
    theta = angle_from_strain(eps)
    arm = moment_arm(theta, geom)
    hinge = hinge_torque(theta, geom, params) / arm
    v = np.broadcast_to(np.asarray(voltage, dtype=float), eps.shape)
    a_ov = geom.a_ov if overlap is None else np.vectorize(overlap)(theta)
    friction = (params.n_layers - 1) * ea_friction_torque(v, dielectric, params.mu, a_ov) / arm
    loading = np.broadcast_to(np.asarray(loading, dtype=bool), eps.shape)
    return np.where(loading, hinge + friction, np.maximum(hinge - friction, 0.0))


def force_components(strain_grid, geom: AucGeometry, dielectric: DielectricSpec,
                     params: ModelParams, overlap: OverlapHook | None = None):
    """Hinge-only force and friction force needed to hold each strain."""
    eps = _check_grid(strain_grid)
    theta = angle_from_strain(eps)
    arm = moment_arm(theta, geom)
    hinge = hinge_torque(theta, geom, params) / arm
    friction = stack_friction_torque(geom, dielectric, params, theta, overlap=overlap) / arm
    return eps, np.asarray(hinge, dtype=float), np.broadcast_to(friction, eps.shape).astype(float)


def force_strain_curve(strain_grid, geom: AucGeometry, dielectric: DielectricSpec,
                       params: ModelParams, loading: bool = True,
                       overlap: OverlapHook | None = None) -> HysteresisTrace:
    """Quasi-static pull force along one branch of the hysteresis loop.

    Friction adds to the hinge force while stretching and subtracts while
    relaxing; relaxing force is floored at zero.
    """
    eps, hinge, friction = force_components(strain_grid, geom, dielectric, params, overlap)
    if loading:
        force = hinge + friction
    else:
        force = np.maximum(hinge - friction, 0.0)
    meta = {"dielectric": dielectric.name, "n_layers": params.n_layers}
    return HysteresisTrace(eps, force, params.voltage, LOADING if loading else UNLOADING, meta)


def hysteresis_loop(strain_max: float, n_points: int, geom: AucGeometry, dielectric: DielectricSpec,
                    params: ModelParams, unloading_voltage: float | None = None) -> HysteresisTrace:
    """One stretch-and-release cycle: ascending loading samples then descending unloading.

    ``unloading_voltage`` defaults to ``params.voltage``; pass 0 to mimic applying
    the voltage only while stretching.
    """
    grid = np.linspace(0.0, strain_max, n_points)
    up = force_strain_curve(grid, geom, dielectric, params, loading=True)
    v_down = params.voltage if unloading_voltage is None else unloading_voltage
    down = force_strain_curve(grid, geom, dielectric, params.replace(voltage=v_down), loading=False)
    down = down.select(slice(None, None, -1))
    return HysteresisTrace.concat([up, down])


def _window(strain_window):
    if np.ndim(strain_window) == 0:
        return 0.0, float(strain_window)
    lo, hi = (float(v) for v in strain_window)
    if hi <= lo:
        raise DomainError("strain window must have hi > lo")
    return lo, hi


def linear_stiffness(trace: HysteresisTrace, strain_window, reference_length: float,
                     branch: str | None = LOADING) -> float:
    """Least-squares slope of force against displacement inside a strain window.

    ``strain_window`` is a width starting at zero strain or a ``(lo, hi)`` pair.
    Displacement is strain times ``reference_length``.  ``branch=None`` uses all
    samples.
    """
    if not reference_length > 0:
        raise DomainError("reference_length must be positive")
    lo, hi = _window(strain_window)
    pad = 1e-12
    sel = (trace.strain >= lo - pad) & (trace.strain <= hi + pad)
    if branch is not None:
        sel &= trace.branch == branch
    if np.count_nonzero(sel) < 3:
        raise InsufficientData(f"need at least 3 samples in strain window [{lo}, {hi}], "
                               f"found {np.count_nonzero(sel)}")
    x = trace.strain[sel] * reference_length
    y = trace.force[sel]
    dx = x - x.mean()
    denom = float(np.dot(dx, dx))
    if denom == 0:
        raise InsufficientData("all samples in the window share one strain value")
    return float(np.dot(dx, y - y.mean()) / denom)


def stiffness_pair(geom: AucGeometry, dielectric: DielectricSpec, params: ModelParams,
                   strain_window=0.01, n_samples: int = 101) -> tuple[float, float]:
    """Unlocked and locked loading-branch stiffness (N/m) over the same window."""
    lo, hi = _window(strain_window)
    grid = np.linspace(lo, hi, n_samples)
    locked = force_strain_curve(grid, geom, dielectric, params, loading=True)
    unlocked = force_strain_curve(grid, geom, dielectric, params.replace(voltage=0.0), loading=True)
    k_l = linear_stiffness(locked, (lo, hi), geom.reference_length)
    k_u = linear_stiffness(unlocked, (lo, hi), geom.reference_length)
    return k_u, k_l


def stiffness_ratio(geom: AucGeometry, dielectric: DielectricSpec, params: ModelParams,
                    strain_window=0.01, n_samples: int = 101) -> float:
    k_u, k_l = stiffness_pair(geom, dielectric, params, strain_window, n_samples)
    return k_l / k_u


def multilayer_extra_force(n_layers: int, voltage: float, strain, geom: AucGeometry,
                           dielectric: DielectricSpec, params: ModelParams):
    """Extra loading force of an ``n_layers`` stack when locked versus unlocked."""
    p = params.replace(n_layers=n_layers, voltage=voltage)
    theta = angle_from_strain(strain)
    return stack_friction_torque(geom, dielectric, p, theta) / moment_arm(theta, geom)
