"""Stiffness, damping, and force-loop gains expressed in the path frame."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from ..errors import InvalidInput

# path-frame axis order for the 6 diagonal entries:
# translation (t, n, s), then rotation (t, n, s)
DEFAULT_K = np.array([1000.0, 50.0, 1000.0, 50.0, 50.0, 50.0])


@dataclass(frozen=True)
class ControlGains:
    """Diagonal impedance gains in the path frame plus the normal-force loop.

    Stiffness is high in the tangential plane (t, s) and low along the
    surface normal, where the force loop takes over.
    """

    K_diag: np.ndarray = field(default_factory=lambda: DEFAULT_K.copy())
    D_diag: np.ndarray = field(default_factory=lambda: 2.0 * np.sqrt(DEFAULT_K))
    k_p: float = 50.0
    k_d: float = 0.1
    f_n: float = 10.0
    torque_limit: float = 150.0
    null_space_damping: float = 2.0

    def __post_init__(self):
        k = np.asarray(self.K_diag, dtype=float)
        d = np.asarray(self.D_diag, dtype=float)
        if k.shape != (6,) or d.shape != (6,):
            raise InvalidInput("K_diag and D_diag must be 6-vectors")
        if np.any(k < 0) or np.any(d < 0):
            raise InvalidInput("stiffness and damping must be >= 0")
        if self.f_n < 0:
            raise InvalidInput("desired contact force must be >= 0")
        if self.torque_limit <= 0:
            raise InvalidInput("torque limit must be positive")
        if k[1] > k[0]:
            warnings.warn(
                "normal-axis stiffness exceeds tangential stiffness; the "
                "force loop expects a compliant normal direction",
                stacklevel=2,
            )
        object.__setattr__(self, "K_diag", k)
        object.__setattr__(self, "D_diag", d)


def critically_damped(k_diag: np.ndarray, task_mass: np.ndarray, frame_basis: np.ndarray) -> np.ndarray:
    """Per-axis critical damping d = 2 sqrt(k * m) with m the diagonal of the
    task-space mass expressed in the path frame (`frame_basis` = [t | n | s])."""
    k_diag = np.asarray(k_diag, dtype=float)
    w = np.zeros((6, 6))
    w[:3, :3] = frame_basis
    w[3:, 3:] = frame_basis
    m_pf = w.T @ task_mass @ w
    return 2.0 * np.sqrt(k_diag * np.clip(np.diag(m_pf), 0.0, None))
