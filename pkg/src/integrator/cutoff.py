"""
Smooth cut-off φ_N gating the nonlinear drift.
"""
import math
from dataclasses import dataclass

from src.core.errors import ConfigurationError


@dataclass(frozen=True)
class CutoffSpec:
    """
    φ_N(x) = 1 on [0, N], 1 - 3s² + 2s³ with s = (x-N)/N on (N, 2N), 0 on [2N, ∞).

    N = inf disables the gate.
    """

    N: float = math.inf
    shape: str = "smoothstep3"

    def __post_init__(self):
        if not self.N > 0.0:
            raise ConfigurationError(f"cut-off threshold N must be > 0, got {self.N}")
        if self.shape != "smoothstep3":
            raise ConfigurationError(f"unknown cut-off shape {self.shape!r}")

    @property
    def enabled(self) -> bool:
        return math.isfinite(self.N)


def cutoff_value(x: float, spec: CutoffSpec) -> float:
    """
    Evaluate φ_N(x).

    Args:
        x: Norm of the state (≥ 0)
        spec: Cut-off threshold and shape

    Returns:
        Gate value in [0, 1]

    Raises:
        ConfigurationError: If x is negative
    """
    if x < 0.0:
        raise ConfigurationError(f"cut-off argument must be >= 0, got {x}")
    if x <= spec.N:
        return 1.0
    if x >= 2.0 * spec.N:
        return 0.0
    s = (x - spec.N) / spec.N
    return 1.0 - 3.0 * s * s + 2.0 * s * s * s
