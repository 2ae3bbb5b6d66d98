"""Row-column electrode addressing, drive electronics and cost estimates.

One sheet's electrodes are switched by row, the other's by column, so a static
energisation locks exactly the cells in (energised rows) x (energised cols).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .catalog import DEFAULT_LEAKAGE_RESISTANCE
from .errors import IndexOutOfRange, ValidationError, VoltageOutOfRange
from .types import AucGeometry, DielectricSpec

QUOTED_COST_PER_AUC = 0.88  # USD, 100-board quantity incl. high-voltage logic


@dataclass
class AddressPlan:
    rows_energized: frozenset
    cols_energized: frozenset
    achieved: np.ndarray
    unreachable_extra: frozenset  # locked but not requested
    unreachable_missing: frozenset  # requested but not locked

    @property
    def exact(self) -> bool:
        return not self.unreachable_extra and not self.unreachable_missing

    def to_text(self) -> str:
        def cells(s):
            return ";".join(f"({r},{c})" for r, c in sorted(s))
        return "\n".join([
            "field,value",
            f"rows_energized,{' '.join(str(r) for r in sorted(self.rows_energized))}",
            f"cols_energized,{' '.join(str(c) for c in sorted(self.cols_energized))}",
            f"exact,{int(self.exact)}",
            f"unreachable_extra,{cells(self.unreachable_extra)}",
            f"unreachable_missing,{cells(self.unreachable_missing)}",
        ]) + "\n"


def verify_plan(rows, cols, shape) -> np.ndarray:
    """Cells locked when ``rows`` and ``cols`` are energised on a grid of ``shape``."""
    n_rows, n_cols = shape
    rows, cols = set(rows), set(cols)
    for r in rows:
        if not 0 <= r < n_rows:
            raise IndexOutOfRange(f"row {r} outside 0..{n_rows - 1}")
    for c in cols:
        if not 0 <= c < n_cols:
            raise IndexOutOfRange(f"column {c} outside 0..{n_cols - 1}")
    r_sel = np.zeros(n_rows, dtype=bool)
    c_sel = np.zeros(n_cols, dtype=bool)
    r_sel[list(rows)] = True
    c_sel[list(cols)] = True
    return np.outer(r_sel, c_sel)


def _cells(grid) -> frozenset:
    return frozenset((int(r), int(c)) for r, c in zip(*np.nonzero(grid)))


def is_combinatorial_rectangle(target) -> bool:
    target = np.asarray(target, dtype=bool)
    rows = target.any(axis=1)
    cols = target.any(axis=0)
    return bool(np.array_equal(target, np.outer(rows, cols)))


def plan_locking(target) -> AddressPlan:
    """Energise every row and column that holds a requested cell.

    The plan is exact when the request is a combinatorial rectangle; any other
    pattern also locks the cells listed in ``unreachable_extra``.
    """
    target = np.asarray(target, dtype=bool)
    if target.ndim != 2 or target.size == 0:
        raise ValidationError("target must be a non-empty 2-D grid")
    rows = frozenset(int(r) for r in np.flatnonzero(target.any(axis=1)))
    cols = frozenset(int(c) for c in np.flatnonzero(target.any(axis=0)))
    achieved = verify_plan(rows, cols, target.shape)
    return AddressPlan(rows, cols, achieved,
                       _cells(achieved & ~target), _cells(target & ~achieved))


def figure_presets(shape=(5, 5)) -> dict[str, np.ndarray]:
    """Lock patterns demonstrated on the 5x5 display skin (row 0 = top)."""
    n_rows, n_cols = shape
    full = np.ones(shape, dtype=bool)
    none = np.zeros(shape, dtype=bool)

    def block(rows, cols):
        g = none.copy()
        g[rows, cols] = True
        return g

    def frac(n, f):
        return int(round(n * f))

    side = frac(n_rows, 0.6)  # 3 x 3 of 25 cells = 36%
    return {
        "full": full,
        "none": none,
        "top-right-36": block(slice(0, side), slice(n_cols - frac(n_cols, 0.6), n_cols)),
        "right-40": block(slice(None), slice(n_cols - frac(n_cols, 0.4), n_cols)),
        "right-60": block(slice(None), slice(n_cols - frac(n_cols, 0.6), n_cols)),
        "top-40": block(slice(0, frac(n_rows, 0.4)), slice(None)),
    }


@dataclass(frozen=True)
class CircuitModel:
    """Per-AUC drive circuit: the cell is a capacitor behind two series resistances."""

    C_cell: float = 8.3e-9  # F
    R_cell: float = 1.2  # ohm, each of the two in series
    R1: float = 1e7  # ohm, current limiter
    R2: float = 1e3  # ohm, microcontroller burden limiter
    v_min: float = 200.0  # V, converter output range
    v_max: float = 600.0
    leakage_resistance: float = DEFAULT_LEAKAGE_RESISTANCE  # ohm per AUC
    logic_current_max: float = 72.2e-6  # A per AUC at v_max

    def __post_init__(self):
        for name in ("C_cell", "R_cell", "R1", "R2", "v_min", "v_max",
                     "leakage_resistance", "logic_current_max"):
            if not getattr(self, name) > 0:
                raise ValidationError(f"CircuitModel.{name} must be positive")
        if self.v_min >= self.v_max:
            raise ValidationError("CircuitModel needs v_min < v_max")

    @classmethod
    def for_dielectric(cls, dielectric: DielectricSpec, **kw) -> CircuitModel:
        if dielectric.leakage_resistance is not None:
            kw.setdefault("leakage_resistance", dielectric.leakage_resistance)
        return cls(**kw)


@dataclass(frozen=True)
class ElectricalEstimate:
    voltage: float
    n_cells_locked: int
    leak_power_per_cell: float  # W
    logic_current_per_cell: float  # A
    total_power: float  # W
    charge_time_constant: float  # s


def electrical_estimate(model: CircuitModel, voltage: float, n_cells_locked: int) -> ElectricalEstimate:
    """Power draw of ``n_cells_locked`` held cells at ``voltage``.

    Logic current grows in proportion to voltage and reaches the configured
    ceiling at the top of the converter range.
    """
    if not model.v_min <= voltage <= model.v_max:
        raise VoltageOutOfRange(f"voltage {voltage} V outside converter range "
                                f"{model.v_min:g}-{model.v_max:g} V")
    if n_cells_locked < 0:
        raise ValidationError("n_cells_locked must be >= 0")
    leak = voltage**2 / model.leakage_resistance
    logic = model.logic_current_max * voltage / model.v_max
    tau = (model.R1 + 2 * model.R_cell) * model.C_cell
    total = n_cells_locked * (leak + voltage * logic)
    return ElectricalEstimate(voltage, n_cells_locked, leak, logic, total, tau)


@dataclass(frozen=True)
class CostEstimate:
    n_cells: int
    dielectric_per_cell: float  # USD
    per_cell: float  # USD
    total: float  # USD


def cell_area_cm2(geom: AucGeometry) -> float:
    return (geom.a * 100.0) ** 2


def cost_estimate(shape, dielectric: DielectricSpec, geom: AucGeometry,
                  per_cell_overhead: float = 0.0) -> CostEstimate:
    n_rows, n_cols = shape
    if n_rows < 0 or n_cols < 0 or per_cell_overhead < 0:
        raise ValidationError("cost inputs must be non-negative")
    film = dielectric.cost_per_area * cell_area_cm2(geom)
    per_cell = film + per_cell_overhead
    n = n_rows * n_cols
    return CostEstimate(n, film, per_cell, per_cell * n)


def calibrate_overhead(dielectric: DielectricSpec, geom: AucGeometry,
                       per_cell_target: float = QUOTED_COST_PER_AUC) -> float:
    """Per-cell board and electronics cost that brings the total to ``per_cell_target``."""
    overhead = per_cell_target - dielectric.cost_per_area * cell_area_cm2(geom)
    if overhead < 0:
        raise ValidationError("dielectric alone already exceeds the per-cell target")
    return overhead
