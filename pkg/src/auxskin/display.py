"""Inflated shape of a pouch under a partially locked strain-limiting skin.

Every cross-section of the skin is idealised as a chain of circular arcs.  A
uniform region at strain limit ``eps`` bulges into the arc whose length is
``span * (1 + eps)``; a mixed cross-section joins, with matching slope, arcs of
the curvature each cell's strain limit would give over the whole span, and the
start slope is chosen so both clamped edges sit at zero height.  The 2-D
height is the pointwise minimum of the row and column cross-sections.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.optimize import brentq

from .errors import DegenerateFit, NoConvergence, ValidationError
from .types import MAX_STRAIN

TARGET_CURVATURE_RATIO = 2.3  # unlocked over fully locked global curvature
MEASURED_SLOPE_RATIO_80 = 2.0  # left/right slope change with 80% of columns locked
DEFAULT_STRAIN_UNLOCKED = 0.05
DEFAULT_BASE_LENGTH = 0.2  # m, 20 cm skin


@dataclass
class ArcProfile:
    span: float
    strain_limit: float
    half_angle: float  # rad
    radius: float  # m, inf when flat
    curvature: float  # 1/m
    apex_height: float  # m
    x: np.ndarray
    z: np.ndarray

    @property
    def chord(self) -> float:
        if self.curvature == 0:
            return self.span
        return 2 * self.radius * math.sin(self.half_angle)

    @property
    def arc_length(self) -> float:
        if self.curvature == 0:
            return self.span
        return 2 * self.radius * self.half_angle

    @property
    def residual(self) -> float:
        if self.half_angle == 0:
            return 0.0
        return math.sin(self.half_angle) / self.half_angle - 1.0 / (1.0 + self.strain_limit)


def arc_half_angle(strain_limit: float) -> float:
    """Half-angle ``t`` in (0, pi) with sin(t)/t = 1/(1 + strain_limit)."""
    if not strain_limit >= 0 or not math.isfinite(strain_limit):
        raise ValidationError("strain limit must be finite and >= 0")
    if strain_limit == 0:
        return 0.0
    target = 1.0 / (1.0 + strain_limit)

    def h(t):
        return math.sin(t) / t - target

    try:
        t = brentq(h, 1e-300, math.pi, xtol=1e-300, rtol=1e-15, maxiter=500)
    except (ValueError, RuntimeError) as exc:
        raise NoConvergence(f"arc half-angle solve failed: {exc}") from None
    return t


def arc_profile(span: float, strain_limit: float, n_points: int = 101) -> ArcProfile:
    if not span > 0:
        raise ValidationError("span must be positive")
    x = np.linspace(-span / 2, span / 2, n_points)
    t = arc_half_angle(strain_limit)
    if t == 0:
        return ArcProfile(span, strain_limit, 0.0, math.inf, 0.0, 0.0, x, np.zeros_like(x))
    radius = span * (1.0 + strain_limit) / (2.0 * t)
    base = radius * math.cos(t)
    z = np.sqrt(np.maximum(radius**2 - x**2, 0.0)) - base
    z[0] = z[-1] = 0.0
    return ArcProfile(span, strain_limit, t, radius, 1.0 / radius,
                      radius * (1.0 - math.cos(t)), x, z)


def arc_curvature(span: float, strain_limit: float) -> float:
    t = arc_half_angle(strain_limit)
    return 2.0 * t / (span * (1.0 + strain_limit))


@dataclass
class CrossSection:
    """Slope-continuous chain of circular arcs over equal-width cells."""

    span: float
    curvature: np.ndarray  # per cell, 1/m
    start_sine: float  # sine of the slope angle at x = 0

    @property
    def cell_width(self) -> float:
        return self.span / len(self.curvature)

    def _nodes(self, u):
        w = self.cell_width
        s = u - np.concatenate([[0.0], np.cumsum(self.curvature * w)])
        z = np.zeros_like(s)
        for k, kappa in enumerate(self.curvature):
            ca = math.sqrt(max(1.0 - s[k] ** 2, 0.0))
            if kappa > 0:
                cb = math.sqrt(max(1.0 - s[k + 1] ** 2, 0.0))
                z[k + 1] = z[k] + (cb - ca) / kappa
            else:
                z[k + 1] = z[k] + (s[k] / ca * w if ca > 0 else math.copysign(math.inf, s[k]))
        return s, z

    def height(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        s_nodes, z_nodes = self._nodes(self.start_sine)
        w = self.cell_width
        n = len(self.curvature)
        k = np.clip((x // w).astype(int), 0, n - 1)
        dx = x - k * w
        kappa = self.curvature[k]
        sa = s_nodes[k]
        ca = np.sqrt(np.maximum(1.0 - sa**2, 0.0))
        sx = sa - kappa * dx
        cx = np.sqrt(np.maximum(1.0 - sx**2, 0.0))
        with np.errstate(divide="ignore", invalid="ignore"):
            curved = (cx - ca) / kappa
            straight = np.where(ca > 0, sa / ca, 0.0) * dx
        z = z_nodes[k] + np.where(kappa > 0, curved, straight)
        z = np.where((x <= 0) | (x >= self.span), 0.0, z)
        return np.maximum(z, 0.0)

    def edge_slopes(self) -> tuple[float, float]:
        """Slope magnitudes dz/dx at the left and right clamps."""
        s, _ = self._nodes(self.start_sine)
        return tuple(abs(v) / math.sqrt(max(1.0 - v * v, 1e-300)) for v in (s[0], s[-1]))


def cross_section(span: float, strain_limits) -> CrossSection:
    limits = np.asarray(strain_limits, dtype=float)
    if limits.ndim != 1 or limits.size == 0:
        raise ValidationError("need one strain limit per cell")
    kappa = np.array([arc_curvature(span, e) for e in limits])
    if not np.any(kappa > 0):
        return CrossSection(span, kappa, 0.0)
    w = span / limits.size
    total_turn = float(np.sum(kappa) * w)
    lo, hi = max(0.0, total_turn - 1.0), 1.0
    probe = CrossSection(span, kappa, 0.0)

    def end_height(u):
        return probe._nodes(u)[1][-1]

    f_lo, f_hi = end_height(lo), end_height(hi)
    if not (f_lo <= 0.0 <= f_hi):
        raise NoConvergence("no start slope closes the cross-section at both clamps")
    u = brentq(end_height, lo, hi, xtol=1e-16, rtol=1e-15, maxiter=500) if f_lo < 0 < f_hi \
        else (lo if f_lo == 0 else hi)
    return CrossSection(span, kappa, u)


@lru_cache(maxsize=None)
def calibrate_locked_strain(strain_limit_unlocked: float = DEFAULT_STRAIN_UNLOCKED,
                            target_ratio: float = TARGET_CURVATURE_RATIO) -> float:
    """Locked strain limit whose uniform arc is ``target_ratio`` times flatter.

    Span cancels from the ratio, so unit span is used.
    """
    k_u = arc_curvature(1.0, strain_limit_unlocked)
    return brentq(lambda e: k_u / arc_curvature(1.0, e) - target_ratio,
                  1e-12, strain_limit_unlocked, xtol=1e-16, rtol=1e-15)


@dataclass(frozen=True)
class DisplayConfig:
    rows: int = 5
    cols: int = 5
    base_length: float = DEFAULT_BASE_LENGTH
    strain_limit_unlocked: float = DEFAULT_STRAIN_UNLOCKED
    strain_limit_locked: float | None = None  # None: calibrated to the curvature ratio
    samples_per_cell: int = 5
    provenance: dict = field(default_factory=dict, compare=False, hash=False)

    def __post_init__(self):
        if self.strain_limit_locked is None:
            eps_l = calibrate_locked_strain(self.strain_limit_unlocked, TARGET_CURVATURE_RATIO)
            object.__setattr__(self, "strain_limit_locked", eps_l)
            object.__setattr__(self, "provenance", {
                "strain_limit_locked": "calibration",
                "calibration_target": f"unlocked/locked curvature ratio {TARGET_CURVATURE_RATIO}",
                "calibration_method": "root-find on the uniform arc curvature ratio",
            })
        elif not self.provenance:
            object.__setattr__(self, "provenance", {"strain_limit_locked": "user"})
        if self.rows < 1 or self.cols < 1 or self.samples_per_cell < 1:
            raise ValidationError("display grid dimensions must be >= 1")
        if not self.base_length > 0:
            raise ValidationError("base_length must be positive")
        if not 0 <= self.strain_limit_locked <= self.strain_limit_unlocked < MAX_STRAIN:
            raise ValidationError("need 0 <= strain_limit_locked <= strain_limit_unlocked < sqrt(2)-1")

    def strain_limits(self, mask) -> np.ndarray:
        mask = np.asarray(mask, dtype=bool)
        if mask.shape != (self.rows, self.cols):
            raise ValidationError(f"lock mask is {mask.shape}, display is {(self.rows, self.cols)}")
        return np.where(mask, self.strain_limit_locked, self.strain_limit_unlocked)


@dataclass
class Heightmap:
    x: np.ndarray  # m, left to right
    y: np.ndarray  # m, top (row 0) to bottom
    z: np.ndarray  # m, shape (len(y), len(x))
    metadata: dict = field(default_factory=dict)

    def to_text(self) -> str:
        lines = [f"# {k}={v}" for k, v in sorted(self.metadata.items())]
        lines.append("y_m\\x_m," + ",".join(f"{v:.9g}" for v in self.x))
        for yi, row in zip(self.y, self.z):
            lines.append(f"{yi:.9g}," + ",".join(f"{v:.9g}" for v in row))
        return "\n".join(lines) + "\n"


def sample_positions(length: float, n_cells: int, per_cell: int):
    """Clamp points plus ``per_cell`` evenly spread interior points per cell."""
    w = length / n_cells
    inner = [(j + (q + 0.5) / per_cell) * w for j in range(n_cells) for q in range(per_cell)]
    cell = [j for j in range(n_cells) for _ in range(per_cell)]
    return np.array([0.0] + inner + [length]), np.array([-1] + cell + [-1])


def heightmap_from_limits(limits, base_length: float, samples_per_cell: int = 5,
                          metadata: dict | None = None) -> Heightmap:
    limits = np.asarray(limits, dtype=float)
    n_rows, n_cols = limits.shape
    x, cell_x = sample_positions(base_length, n_cols, samples_per_cell)
    y, cell_y = sample_positions(base_length, n_rows, samples_per_cell)
    along_x = [cross_section(base_length, limits[r, :]).height(x) for r in range(n_rows)]
    along_y = [cross_section(base_length, limits[:, c]).height(y) for c in range(n_cols)]
    z = np.zeros((y.size, x.size))
    for i in range(y.size):
        if cell_y[i] < 0:
            continue
        for j in range(x.size):
            if cell_x[j] < 0:
                continue
            z[i, j] = min(along_x[cell_y[i]][j], along_y[cell_x[j]][i])
    return Heightmap(x, y, z, dict(metadata or {}))


def heightmap(cfg: DisplayConfig, mask) -> Heightmap:
    meta = {"base_length_m": f"{cfg.base_length:.9g}",
            "strain_limit_unlocked": f"{cfg.strain_limit_unlocked:.9g}",
            "strain_limit_locked": f"{cfg.strain_limit_locked:.9g}"}
    meta.update({f"provenance.{k}": v for k, v in cfg.provenance.items()})
    return heightmap_from_limits(cfg.strain_limits(mask), cfg.base_length,
                                 cfg.samples_per_cell, meta)


def center_section(cfg: DisplayConfig, mask) -> CrossSection:
    """Left-to-right cross-section through the middle row of cells."""
    limits = cfg.strain_limits(mask)
    return cross_section(cfg.base_length, limits[cfg.rows // 2, :])


def fit_circle_curvature(x, z) -> float:
    """Curvature of the algebraic least-squares circle through ``(x, z)``."""
    x = np.asarray(x, dtype=float)
    z = np.asarray(z, dtype=float)
    if np.allclose(z, 0.0, atol=1e-15):
        return 0.0
    A = np.column_stack([x, z, np.ones_like(x)])
    b = -(x**2 + z**2)
    (D, E, F), *_ = np.linalg.lstsq(A, b, rcond=None)
    r2 = (D**2 + E**2) / 4.0 - F
    if r2 <= 0:
        raise DegenerateFit("least-squares circle has non-positive radius")
    return 1.0 / math.sqrt(r2)


@dataclass
class CurvatureComparison:
    ratio: float
    curvature_a: float
    curvature_b: float
    degenerate: bool
    provenance: dict


def center_curvature(cfg: DisplayConfig, mask, n_points: int = 401) -> float:
    section = center_section(cfg, mask)
    x = np.linspace(0.0, cfg.base_length, n_points)
    return fit_circle_curvature(x, section.height(x))


def curvature_ratio(cfg: DisplayConfig, mask_a, mask_b, n_points: int = 401) -> CurvatureComparison:
    """Best-fit global curvature of case ``a`` over case ``b``, centre section.

    A flat profile on either side gives ``ratio = inf`` with ``degenerate`` set.
    """
    k_a = center_curvature(cfg, mask_a, n_points)
    k_b = center_curvature(cfg, mask_b, n_points)
    if k_a == 0 or k_b == 0:
        return CurvatureComparison(math.inf, k_a, k_b, True, dict(cfg.provenance))
    return CurvatureComparison(k_a / k_b, k_a, k_b, False, dict(cfg.provenance))


def side_slope_ratio(cfg: DisplayConfig, mask) -> float:
    """Steeper over shallower clamp slope of the centre section (diagnostic only)."""
    left, right = center_section(cfg, mask).edge_slopes()
    lo, hi = sorted((left, right))
    return math.inf if lo == 0 else hi / lo
