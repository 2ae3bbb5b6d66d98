"""Data types shared across the model, fitting and CLI layers.

All quantities are SI (m, N, Pa, V) unless a field name says otherwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvariantViolation, ValidationError

MAX_STRAIN = math.sqrt(2.0) - 1.0
LOADING = "loading"
UNLOADING = "unloading"
BRANCHES = (LOADING, UNLOADING)


@dataclass(frozen=True)
class AucGeometry:
    """Dimensions of one square auxetic unit cell.

    a : square side length
    c : hinge joint length
    delta : hinge joint width
    t : out-of-plane substrate thickness
    overlap_area : electrode overlap area when unstretched
    a_ov : side of the equivalent square overlap
    reference_length : unstretched axial span used to turn strain into displacement
    """

    a: float
    c: float
    delta: float
    t: float
    overlap_area: float
    a_ov: float
    reference_length: float

    def __post_init__(self):
        for name in ("a", "c", "delta", "t", "overlap_area", "a_ov", "reference_length"):
            value = getattr(self, name)
            if not (value > 0 and math.isfinite(value)):
                raise ValidationError(f"AucGeometry.{name} must be positive and finite, got {value}")
        if not self.delta < self.c < self.a:
            raise ValidationError("AucGeometry requires delta < c < a")
        if abs(self.a_ov**2 - self.overlap_area) / self.overlap_area >= 0.05:
            raise ValidationError("AucGeometry.a_ov squared must be within 5% of overlap_area")

    @property
    def second_moment(self) -> float:
        """Hinge area moment of inertia, delta^3 t / 12."""
        return self.delta**3 * self.t / 12.0


@dataclass(frozen=True)
class DielectricSpec:
    name: str
    epsilon_r: float
    d: float
    cost_per_area: float = 0.0  # USD/cm^2
    leakage_resistance: float | None = None  # ohm per AUC

    def __post_init__(self):
        if not self.epsilon_r >= 1:
            raise ValidationError(f"{self.name}: epsilon_r must be >= 1")
        if not self.d > 0:
            raise ValidationError(f"{self.name}: thickness d must be > 0")
        if not self.cost_per_area >= 0:
            raise ValidationError(f"{self.name}: cost_per_area must be >= 0")
        if self.leakage_resistance is not None and not self.leakage_resistance > 0:
            raise ValidationError(f"{self.name}: leakage_resistance must be > 0")


@dataclass(frozen=True)
class ModelParams:
    E: float = 2.1e9
    mu: float = 0.13
    n_layers: int = 2
    voltage: float = 0.0

    def __post_init__(self):
        if not self.E > 0:
            raise ValidationError("ModelParams.E must be > 0")
        if not self.mu >= 0:
            raise ValidationError("ModelParams.mu must be >= 0")
        if int(self.n_layers) != self.n_layers or self.n_layers < 2:
            raise ValidationError("ModelParams.n_layers must be an integer >= 2")
        if not self.voltage >= 0:
            raise ValidationError("ModelParams.voltage must be >= 0")

    def replace(self, **changes) -> ModelParams:
        values = {"E": self.E, "mu": self.mu, "n_layers": self.n_layers, "voltage": self.voltage}
        values.update(changes)
        return ModelParams(**values)


@dataclass(frozen=True)
class EquilibriumResult:
    theta: float
    strain: float
    residual_torque: float
    locked: bool
    # torque static friction must supply when locked; 0 when sliding
    friction_torque: float = 0.0
    iterations: int = 0


@dataclass
class HysteresisTrace:
    """Ordered pull-test samples.

    ``branch`` holds ``"loading"`` or ``"unloading"`` per sample.
    """

    strain: np.ndarray
    force: np.ndarray
    voltage: np.ndarray
    branch: np.ndarray
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.strain = np.asarray(self.strain, dtype=float)
        self.force = np.asarray(self.force, dtype=float)
        self.voltage = np.broadcast_to(np.asarray(self.voltage, dtype=float), self.strain.shape).copy()
        self.branch = np.broadcast_to(np.asarray(self.branch, dtype=object), self.strain.shape).copy()

    def __len__(self):
        return len(self.strain)

    def validate(self) -> HysteresisTrace:
        n = len(self.strain)
        if not (len(self.force) == len(self.voltage) == len(self.branch) == n):
            raise InvariantViolation("trace columns have different lengths")
        if not np.all(np.isfinite(self.strain)):
            raise InvariantViolation("strain values must be finite")
        bad = np.flatnonzero((self.strain < 0) | (self.strain >= MAX_STRAIN))
        if bad.size:
            raise InvariantViolation(
                f"strain out of range [0, sqrt(2)-1) at sample {bad[0]}: {self.strain[bad[0]]}")
        if not np.all(np.isfinite(self.force)):
            raise InvariantViolation("forces must be finite")
        if not np.all(np.isfinite(self.voltage)) or np.any(self.voltage < 0):
            raise InvariantViolation("voltages must be finite and non-negative")
        unknown = set(self.branch.tolist()) - set(BRANCHES)
        if unknown:
            raise InvariantViolation(f"unknown branch label(s): {sorted(unknown)}")
        return self

    def select(self, mask) -> HysteresisTrace:
        if not isinstance(mask, slice):
            mask = np.asarray(mask)
        return HysteresisTrace(self.strain[mask], self.force[mask], self.voltage[mask],
                               self.branch[mask], dict(self.metadata))

    @staticmethod
    def concat(traces, metadata=None) -> HysteresisTrace:
        traces = list(traces)
        return HysteresisTrace(
            np.concatenate([t.strain for t in traces]),
            np.concatenate([t.force for t in traces]),
            np.concatenate([t.voltage for t in traces]),
            np.concatenate([t.branch for t in traces]),
            dict(metadata if metadata is not None else (traces[0].metadata if traces else {})),
        )
