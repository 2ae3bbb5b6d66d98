"""Axial stiffness and bending of an AUC array treated as a spring network.

Each column is a chain of ``rows`` cells in series; columns act in parallel
between two rigid end bars.  Mask convention: ``mask[i, j]`` is row ``i`` of
column ``j``, ``True`` = locked, column 0 on the left.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from . import auc
from .errors import DegenerateGeometry, NoConvergence, ValidationError
from .types import MAX_STRAIN, AucGeometry, DielectricSpec, ModelParams

MEASURED_STIFFNESS_RATIO = 7.6  # best locked/unlocked ratio measured on one AUC


@dataclass(frozen=True)
class ArrayConfig:
    rows: int  # cells in series per column
    cols: int  # columns in parallel
    k_unlocked: float  # N/m per cell
    k_locked: float  # N/m per cell
    column_pitch: float = 37e-3  # m between column axes
    cell_length: float = 37e-3  # m, unstretched span of one cell along the pull axis

    def __post_init__(self):
        if self.rows < 1 or self.cols < 1:
            raise ValidationError("ArrayConfig needs rows >= 1 and cols >= 1")
        if not 0 < self.k_unlocked <= self.k_locked:
            raise ValidationError("ArrayConfig needs 0 < k_unlocked <= k_locked")
        if not self.column_pitch > 0 or not self.cell_length > 0:
            raise ValidationError("column_pitch and cell_length must be positive")

    @property
    def column_rest_length(self) -> float:
        return self.rows * self.cell_length

    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    def column_offsets(self) -> np.ndarray:
        """Signed lateral offset of each column axis from the array centreline."""
        return (np.arange(self.cols) - (self.cols - 1) / 2.0) * self.column_pitch


def check_mask(cfg: ArrayConfig, mask) -> np.ndarray:
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != cfg.shape:
        raise ValidationError(f"lock mask is {mask.shape}, array is {cfg.shape}")
    return mask


def columns_locked_mask(cfg: ArrayConfig, count: int) -> np.ndarray:
    """Leftmost ``count`` columns locked."""
    if not 0 <= count <= cfg.cols:
        raise ValidationError(f"locked column count must be in [0, {cfg.cols}]")
    mask = np.zeros(cfg.shape, dtype=bool)
    mask[:, :count] = True
    return mask


def rows_locked_mask(cfg: ArrayConfig, count: int) -> np.ndarray:
    """Bottom ``count`` rows locked."""
    if not 0 <= count <= cfg.rows:
        raise ValidationError(f"locked row count must be in [0, {cfg.rows}]")
    mask = np.zeros(cfg.shape, dtype=bool)
    if count:
        mask[-count:, :] = True
    return mask


def cell_stiffness_pair(geom: AucGeometry, dielectric: DielectricSpec, params: ModelParams,
                        strain_window=0.01, ratio: float | None = None) -> tuple[float, float]:
    """Per-cell (k_unlocked, k_locked) in N/m.

    With ``ratio`` given the locked stiffness is pinned to ``ratio * k_unlocked``
    (pass :data:`MEASURED_STIFFNESS_RATIO` to use the measured value); otherwise
    both come from the cell model over ``strain_window``.
    """
    k_u, k_l = auc.stiffness_pair(geom, dielectric, params, strain_window)
    if ratio is not None:
        if ratio < 1:
            raise ValidationError("stiffness ratio must be >= 1")
        k_l = ratio * k_u
    return k_u, k_l


def cell_stiffness_grid(cfg: ArrayConfig, mask) -> np.ndarray:
    mask = check_mask(cfg, mask)
    return np.where(mask, cfg.k_locked, cfg.k_unlocked)


def column_stiffness(cfg: ArrayConfig, mask) -> np.ndarray:
    k = cell_stiffness_grid(cfg, mask)
    return 1.0 / np.sum(1.0 / k, axis=0)


def axial_stiffness(cfg: ArrayConfig, mask) -> float:
    """Series cells per column, columns in parallel."""
    return math.fsum(column_stiffness(cfg, mask))


class LinearCell:
    """Hookean cell, force = k * extension."""

    def __init__(self, k_unlocked: float, k_locked: float):
        self.k = {False: float(k_unlocked), True: float(k_locked)}
        self.max_extension = math.inf

    def force(self, extension, locked: bool):
        return self.k[bool(locked)] * extension

    def extension(self, force, locked: bool):
        return force / self.k[bool(locked)]


class ScaledAucCell:
    """Cell with the kinematic model's geometric stiffening, scaled to a small-strain stiffness.

    Force is ``k * L * u(x / L)`` with ``u(strain) = theta / (cos theta - sin theta)``,
    the unlocked hinge-force curve of the unit cell normalised to unit initial
    slope.  Locked and unlocked cells share the curve shape and differ by their
    initial stiffness.
    """

    def __init__(self, k_unlocked: float, k_locked: float, geom: AucGeometry):
        self.k = {False: float(k_unlocked), True: float(k_locked)}
        self.length = geom.reference_length
        self.max_extension = 0.999 * MAX_STRAIN * self.length

    @staticmethod
    def _shape(strain):
        theta = auc.angle_from_strain(strain)
        return theta / (np.cos(theta) - np.sin(theta))

    def force(self, extension, locked: bool):
        return self.k[bool(locked)] * self.length * self._shape(np.asarray(extension) / self.length)

    def extension(self, force, locked: bool):
        if force <= 0:
            return 0.0
        if self.force(self.max_extension, locked) < force:
            return math.inf
        # invert in angle space, where the shape function needs no arcsin
        target = force / (self.k[bool(locked)] * self.length)
        theta_max = auc.angle_from_strain(self.max_extension / self.length)
        theta = brentq(lambda th: th - target * (math.cos(th) - math.sin(th)), 0.0, theta_max,
                       xtol=1e-18, rtol=1e-15)
        return self.length * (math.cos(theta) + math.sin(theta) - 1.0)


def solve_column(locked, total_extension: float, cell, column: int = 0):
    """Common force and per-cell extensions of a series chain stretched by ``total_extension``."""
    locked = [bool(v) for v in locked]
    if total_extension <= 0:
        return 0.0, np.zeros(len(locked))
    counts = {s: locked.count(s) for s in set(locked)}

    def mismatch(force):
        return math.fsum(n * cell.extension(force, s) for s, n in counts.items()) - total_extension

    reach = min(total_extension, cell.max_extension)
    cap = min(float(cell.force(cell.max_extension, s)) for s in counts)
    hi = min(max(float(cell.force(reach, s)) for s in counts), cap)
    if mismatch(hi) < 0:
        raise NoConvergence(f"column {column}: extension {total_extension:.6g} m exceeds the "
                            f"cells' kinematic range")
    force = brentq(mismatch, 0.0, hi, xtol=1e-300, rtol=1e-15, maxiter=500)
    return force, np.array([cell.extension(force, s) for s in locked])


@dataclass
class AxialCurve:
    strain: np.ndarray
    displacement: np.ndarray  # m
    force: np.ndarray  # N, summed over columns
    column_force: np.ndarray  # (cols, n_points)


def axial_force_curve(cfg: ArrayConfig, mask, strain_grid, cell=None) -> AxialCurve:
    """Force-strain curve of the whole array, solving each column's series chain."""
    mask = check_mask(cfg, mask)
    cell = LinearCell(cfg.k_unlocked, cfg.k_locked) if cell is None else cell
    eps = np.asarray(strain_grid, dtype=float)
    if np.any(np.diff(eps) < 0):
        raise ValidationError("strain grid must be monotone ascending")
    disp = eps * cfg.column_rest_length
    col_force = np.zeros((cfg.cols, eps.size))
    for j in range(cfg.cols):
        for n, d in enumerate(disp):
            col_force[j, n] = solve_column(mask[:, j], d, cell, column=j)[0]
    return AxialCurve(eps, disp, col_force.sum(axis=0), col_force)


@dataclass
class BendResult:
    total_angle: float  # rad, top plus bottom end-bar rotation
    per_column_extension: np.ndarray  # m
    energy: float  # J
    column_stiffness: np.ndarray  # N/m
    column_offsets: np.ndarray  # m


def bend_equilibrium(cfg: ArrayConfig, mask, target_strain: float) -> BendResult:
    """Rigid end-bar rotation that minimises the stored spring energy.

    Column ``j`` extends by ``d + x_j * phi`` with ``d`` the imposed mean
    extension and ``x_j`` its signed offset; the quadratic energy
    ``sum(k_j (d + x_j phi)^2) / 2`` is minimised in closed form.
    """
    if not abs(target_strain) < MAX_STRAIN:
        raise ValidationError("target strain outside the cell's kinematic range")
    k = column_stiffness(cfg, mask)
    x = cfg.column_offsets()
    d = target_strain * cfg.column_rest_length
    kx2 = math.fsum(k * x * x)
    if cfg.cols == 1:
        phi = 0.0
    elif kx2 == 0:
        raise DegenerateGeometry("sum of k x^2 is zero; rotation is undetermined")
    else:
        phi = -d * math.fsum(k * x) / kx2 + 0.0  # no negative zero
    ext = d + x * phi
    energy = 0.5 * math.fsum(k * ext * ext)
    return BendResult(phi, ext, energy, k, x)


def bending_angle_sweep(cfg: ArrayConfig, target_strain: float, locked_column_counts=None):
    """``(count, total_angle, energy)`` with the leftmost ``count`` columns locked."""
    counts = range(cfg.cols + 1) if locked_column_counts is None else locked_column_counts
    out = []
    for count in counts:
        res = bend_equilibrium(cfg, columns_locked_mask(cfg, int(count)), target_strain)
        out.append((int(count), res.total_angle, res.energy))
    return out


def sweep_csv(rows) -> str:
    lines = ["locked_count,total_angle_rad,energy_J"]
    lines += [f"{c},{a:.9g},{e:.9g}" for c, a, e in rows]
    return "\n".join(lines) + "\n"
