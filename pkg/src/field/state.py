"""
Galerkin coefficient state and its plain-text serialization.

File format:
    n_max alpha1 time
    k_x k_y parity coefficient      (one row per mode, basis order)
Floats are written with 17 significant digits so finite doubles round-trip exactly.
"""
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Union

import numpy as np

from src.core.errors import ConfigurationError
from src.field.basis import ModeSet

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SpectralState:
    """Coefficients c_j(t) of U_n(t) = Σ c_j v_j."""

    coeffs: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        coeffs = np.array(self.coeffs, dtype=float)
        if coeffs.ndim != 1:
            raise ConfigurationError(f"coeffs must be one-dimensional, got shape {coeffs.shape}")
        if not np.all(np.isfinite(coeffs)):
            raise ConfigurationError("coeffs must be finite")
        coeffs.setflags(write=False)
        object.__setattr__(self, "coeffs", coeffs)

    @property
    def n(self) -> int:
        return self.coeffs.shape[0]

    @classmethod
    def zeros(cls, basis: ModeSet, time: float = 0.0) -> "SpectralState":
        return cls(np.zeros(basis.n), time)

    def check_basis(self, basis: ModeSet) -> None:
        """Raise ConfigurationError when the state does not live on `basis`."""
        if self.n != basis.n:
            raise ConfigurationError(f"state has {self.n} coefficients but basis has {basis.n} modes")


def coefficients(state: Union[SpectralState, np.ndarray]) -> np.ndarray:
    """Coefficient array of a state or of a raw coefficient sequence."""
    if isinstance(state, SpectralState):
        return state.coeffs
    return np.asarray(state, dtype=float)


def format_state(state: SpectralState, basis: ModeSet) -> str:
    """
    Render a state in the plain-text coefficient format.

    Args:
        state: State to serialize
        basis: Basis the state lives on

    Returns:
        File contents ending with a newline
    """
    state.check_basis(basis)
    lines = [f"{basis.n_max} {basis.alpha1:.17g} {state.time:.17g}"]
    for mode, c in zip(basis.modes, state.coeffs):
        kx, ky = mode.wavevector
        lines.append(f"{kx} {ky} {mode.parity} {c:.17g}")
    return "\n".join(lines) + "\n"


def parse_state(text: str, basis: ModeSet) -> SpectralState:
    """
    Parse the plain-text coefficient format onto `basis`.

    Modes absent from the file are zero; modes outside the basis are an error.
    """
    rows = [line.split() for line in text.splitlines() if line.strip() and not line.startswith("#")]
    if not rows:
        raise ConfigurationError("empty state file")
    header = rows[0]
    if len(header) != 3:
        raise ConfigurationError(f"state header must be 'n_max alpha1 time', got {' '.join(header)!r}")
    n_max, alpha1, time = int(header[0]), float(header[1]), float(header[2])
    if n_max > basis.n_max:
        raise ConfigurationError(f"state file has n_max={n_max}, basis only {basis.n_max}")
    if alpha1 != basis.alpha1:
        logger.warning(f"State file alpha1={alpha1} differs from basis alpha1={basis.alpha1}")

    coeffs = np.zeros(basis.n)
    for row in rows[1:]:
        if len(row) != 4:
            raise ConfigurationError(f"state row must be 'k_x k_y parity coefficient', got {' '.join(row)!r}")
        kx, ky, parity = int(row[0]), int(row[1]), int(row[2])
        try:
            coeffs[basis.index_of((kx, ky), parity)] = float(row[3])
        except KeyError as e:
            raise ConfigurationError(str(e)) from e
    return SpectralState(coeffs, time)


def save_state(path: Union[str, Path], state: SpectralState, basis: ModeSet) -> None:
    Path(path).write_text(format_state(state, basis))
    logger.info(f"Saved state (t={state.time:g}) to {path}")


def load_state(path: Union[str, Path], basis: ModeSet) -> SpectralState:
    return parse_state(Path(path).read_text(), basis)
