"""Named potential presets (the only potentials a scenario config can ask for)."""

from __future__ import annotations

import numpy as np

from .errors import ParameterError
from .lattice import Grid1D

PRESETS = ("zero", "cosine", "random_smooth")
RANDOM_MODES = 4


def random_smooth(g: Grid1D, amplitude: float, seed: int, modes: int = RANDOM_MODES) -> np.ndarray:
    """Periodic Fourier sum with N(0, 1) coefficients damped by ``1/m^2``."""
    rng = np.random.default_rng(seed)
    a, b = rng.standard_normal((2, modes))
    x = g.points / g.length
    v = np.zeros(g.point_count)
    for m in range(1, modes + 1):
        v += (a[m - 1] * np.cos(2 * np.pi * m * x) + b[m - 1] * np.sin(2 * np.pi * m * x)) / m**2
    return amplitude * v


def preset_potential(name: str, g: Grid1D, amplitude: float = 0.0, seed: int = 0) -> np.ndarray:
    if name == "zero":
        return np.zeros(g.point_count)
    if name == "cosine":
        return amplitude * np.cos(2 * np.pi * g.points / g.length)
    if name == "random_smooth":
        return random_smooth(g, amplitude, seed)
    raise ParameterError(f"unknown potential preset {name!r}; choose from {PRESETS}")
