from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..kernels import InteractionKernel
from ..lattice import SpinField


@dataclass(frozen=True, eq=False)
class CellSpec:
    """Cell problem on Q_T = offset + (0, T)^m with average target z.

    ``eta=None`` is the sharp constraint (average exactly z); a positive
    ``eta`` relaxes it to |average - z| <= eta.
    """

    T: int
    z: tuple[float, ...]
    kernel: InteractionKernel
    m: int = 1
    eta: float | None = None
    offset: int = 0

    def __post_init__(self):
        object.__setattr__(self, "z", tuple(float(c) for c in np.ravel(self.z)))
        if self.T < 2:
            raise ValueError(f"T must be >= 2, got {self.T}")
        if self.eta is not None and self.eta <= 0:
            raise ValueError("relaxed constraint needs eta > 0")

    @property
    def N(self) -> int:
        return len(self.z)

    @property
    def sharp(self) -> bool:
        return self.eta is None


@dataclass(frozen=True)
class Budget:
    restarts: int = 8
    sweeps: int = 2000
    seed: int = 0
    polish_iters: int = 400
    cooling: float = 0.95
    max_redraws: int = 2
    projection: str = "auto"

    def __post_init__(self):
        if self.restarts < 1 or self.sweeps < 0 or self.polish_iters < 0:
            raise ValueError("budget entries must be positive")
        if self.projection not in ("auto", "retract", "lemma"):
            raise ValueError(f"unknown projection {self.projection!r}")


@dataclass
class SolveResult:
    value: float
    minimizer: SpinField
    restarts: int
    best_restart_seed: int
    constraint_residual: float
    restart_values: list[float] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "value": self.value,
            "restarts": self.restarts,
            "best_restart_seed": self.best_restart_seed,
            "constraint_residual": self.constraint_residual,
            "restart_values": self.restart_values,
        }


@dataclass
class HomogenizationCurve:
    points: list[tuple[int, float]]
    extrapolated: float
    slope: float
    residual: float
    unweighted_extrapolated: float
    results: list[SolveResult] = field(default_factory=list, repr=False)
