"""Closed-form reference solutions used by the verification suites."""

from __future__ import annotations

import numpy as np

# Mass of s**(-1/3) * (c - x^2 / (12 s^(2/3)))_+ is (4/3) * sqrt(12) * c^(3/2),
# independent of s.


def barenblatt_constant(total_mass: float = 1.0) -> float:
    """Profile constant making the self-similar solution carry total_mass."""
    return (total_mass / (np.sqrt(12.0) * 4.0 / 3.0)) ** (2.0 / 3.0)


def barenblatt(s: float, x: np.ndarray, total_mass: float = 1.0) -> np.ndarray:
    """Self-similar spreading profile B(s, x) of dB/ds = d^2(B^2)/dx^2.

    u(t, x) = B(t/2, x) then solves the local model du/dt = d^2(u^2/2)/dx^2.
    """
    c = barenblatt_constant(total_mass)
    return s ** (-1.0 / 3.0) * np.maximum(c - x * x / (12.0 * s ** (2.0 / 3.0)), 0.0)


def fokker_planck_steady_constant(total_mass: float = 1.0) -> float:
    """Height constant of the confined steady state (c - x^2/2)_+.

    Zero steady flux forces u' = -x on the support; the mass constraint
    (2/3)(2c)^(3/2) = total_mass fixes c (unit mass: c = (3/2)^(2/3) / 2).
    """
    return 0.5 * (1.5 * total_mass) ** (2.0 / 3.0)


def fokker_planck_steady(x: np.ndarray, total_mass: float = 1.0) -> np.ndarray:
    """Steady state of the drift model du/dt = d/dx(u u_x) + d/dx(x u)."""
    c = fokker_planck_steady_constant(total_mass)
    return np.maximum(c - 0.5 * x * x, 0.0)
