"""Transmission amplitude and intensity, resonances, sidebands and spectrum sweeps.

All scalar functions broadcast over numpy arrays.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import NamedTuple, Optional, Sequence

import numpy as np

from .errors import InvalidParams, SingularDenominator
from .model import SystemParams, detuning_a, detuning_e, effective_detuning


def _check(epsilon, gamma, g, Delta_e):
    if np.any(np.asarray(epsilon) <= 0):
        raise InvalidParams("epsilon must be > 0")
    if np.any(np.asarray(gamma) < 0):
        raise InvalidParams("gamma must be >= 0")
    singular = (np.asarray(gamma) == 0) & (np.asarray(Delta_e) == 0) & (np.asarray(g) != 0)
    if np.any(singular):
        raise SingularDenominator("gamma = 0 and Delta_e = 0 with g > 0")


def transmission_amplitude(eta, epsilon, gamma, g, Delta, Delta_e):
    """Complex amplitude ``A_T = eta**2 / [(epsilon/2 + i Delta) + g**2/(gamma/2 + i Delta_e)]``."""
    _check(epsilon, gamma, g, Delta_e)
    g2 = np.asarray(g, dtype=float) ** 2
    atom = np.asarray(gamma, dtype=float) / 2 + 1j * np.asarray(Delta_e, dtype=float)
    # g == 0 contributes nothing even where atom == 0
    with np.errstate(divide="ignore", invalid="ignore"):
        atom_term = np.where(g2 == 0, 0.0, g2 / np.where(atom == 0, 1.0, atom))
    denom = np.asarray(epsilon, dtype=float) / 2 + 1j * np.asarray(Delta, dtype=float) + atom_term
    out = np.asarray(eta, dtype=float) ** 2 / denom
    return out[()] if out.ndim == 0 else out


def transmission_intensity(eta, epsilon, gamma, g, Delta, Delta_e):
    """Transmitted intensity from the expanded real formula.

    ``T = eta**4 / [(epsilon**2/4 + Delta**2)
    + (g**4 + (epsilon gamma/2 - 2 Delta Delta_e) g**2) / (gamma**2/4 + Delta_e**2)]``
    """
    _check(epsilon, gamma, g, Delta_e)
    eta, epsilon, gamma, g, Delta, Delta_e = (np.asarray(v, dtype=float) for v in (eta, epsilon, gamma, g, Delta, Delta_e))
    g2 = g**2
    K = gamma**2 / 4 + Delta_e**2
    with np.errstate(divide="ignore", invalid="ignore"):
        coupling = np.where(g2 == 0, 0.0, (g2**2 + (epsilon * gamma / 2 - 2 * Delta * Delta_e) * g2) / np.where(K == 0, 1.0, K))
    out = eta**4 / ((epsilon**2 / 4 + Delta**2) + coupling)
    return out[()] if out.ndim == 0 else out


class Resonance(NamedTuple):
    Delta_res: float
    T_max: float


def resonance(eta: float, epsilon: float, gamma: float, g: float, Delta_e: float) -> Resonance:
    """Effective detuning of peak transmission and the peak value.

    Completing the square in the denominator of ``T`` gives
    ``Delta_res = g**2 Delta_e / (gamma**2/4 + Delta_e**2)`` and
    ``T_max = eta**4 / (epsilon/2 + g**2 (gamma/2) / (gamma**2/4 + Delta_e**2))**2``.
    """
    _check(epsilon, gamma, g, Delta_e)
    if g == 0:
        return Resonance(0.0, eta**4 / (epsilon / 2) ** 2)
    K = gamma**2 / 4 + Delta_e**2
    return Resonance(g**2 * Delta_e / K, eta**4 / (epsilon / 2 + g**2 * (gamma / 2) / K) ** 2)


class Sideband(enum.Enum):
    UPPER = "upper"
    LOWER = "lower"

    @property
    def physical(self) -> bool:
        # the lower branch would need an imaginary mirror displacement
        return self is Sideband.UPPER


class SidebandDetuning(NamedTuple):
    Delta: float
    physical: bool
    Q_s: Optional[float]


def sideband_detuning(params: SystemParams, branch: Sideband) -> SidebandDetuning:
    """Effective detuning ``Delta_a +- omega_m`` for the chosen sideband.

    For the upper branch ``2 g_op Q_s**2 = omega_m`` fixes the mirror quadrature
    to ``Q_s = +-sqrt(omega_m / (2 g_op))``; the non-negative root is returned.
    """
    branch = Sideband(branch)
    Da = detuning_a(params)
    if branch is Sideband.LOWER:
        return SidebandDetuning(Da - params.omega_m, False, None)
    if params.g_op <= 0:
        raise InvalidParams(f"upper sideband displacement needs g_op > 0, got {params.g_op}")
    return SidebandDetuning(Da + params.omega_m, True, math.sqrt(params.omega_m / (2 * params.g_op)))


class SweepAxis(enum.Enum):
    DELTA = "Delta"
    G = "g"
    OMEGA_D_UPPER_SIDEBAND = "omega_D_upper_sideband"


@dataclass(frozen=True)
class SpectrumPoint:
    sweep_value: float
    amplitude: complex
    intensity: float


def spectrum_arrays(base: SystemParams, axis: SweepAxis, values, Q_s_squared: float = 0.0):
    """Vectorized core of :func:`spectrum_sweep`; returns ``(amplitude, intensity)`` arrays.

    ``Delta`` sweeps the effective detuning directly. ``g`` sweeps the emitter
    coupling at ``Delta = effective_detuning(base, Q_s_squared)``. The upper
    sideband axis sweeps the drive frequency, with ``Delta = omega_a - omega_D + omega_m``
    and ``Delta_e = omega_e - omega_D``.
    """
    axis = SweepAxis(axis)
    x = np.asarray(values, dtype=float)
    p = base
    if axis is SweepAxis.DELTA:
        args = (p.eta, p.epsilon, p.gamma, p.g, x, detuning_e(p))
    elif axis is SweepAxis.G:
        if np.any(x < 0):
            raise InvalidParams("g sweep values must be >= 0")
        args = (p.eta, p.epsilon, p.gamma, x, effective_detuning(p, Q_s_squared), detuning_e(p))
    else:
        args = (p.eta, p.epsilon, p.gamma, p.g, p.omega_a - x + p.omega_m, p.omega_e - x)
    args = np.broadcast_arrays(*(np.asarray(a, dtype=float) for a in args))
    return transmission_amplitude(*args), transmission_intensity(*args)


def sweep_grid(start: float, stop: float, n_points: int) -> np.ndarray:
    if n_points < 2:
        raise InvalidParams(f"n_points must be >= 2, got {n_points}")
    return np.linspace(start, stop, n_points)


def spectrum_sweep(
    base: SystemParams,
    axis: SweepAxis,
    range: tuple[float, float],
    n_points: int,
    Q_s_squared: float = 0.0,
) -> list[SpectrumPoint]:
    x = sweep_grid(range[0], range[1], n_points)
    amp, intensity = spectrum_arrays(base, axis, x, Q_s_squared)
    return [SpectrumPoint(float(v), complex(a), float(t)) for v, a, t in zip(x, amp, intensity)]


def peak(points: Sequence[SpectrumPoint]) -> SpectrumPoint:
    """Grid maximum of a sweep (first occurrence on ties)."""
    return max(points, key=lambda pt: pt.intensity)
