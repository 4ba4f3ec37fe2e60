"""Time integration of the mean-field equations and of the linear fluctuation dynamics.

The stepper is classical fourth-order Runge-Kutta. In adaptive mode every step
is taken once with ``h`` and twice with ``h/2``; the difference estimates the
local error and the two half steps, Richardson-corrected, are kept. A fixed
step mode is available for convergence-order checks.

Runs that blow up are not errors: once any state component exceeds
``DIVERGENCE_LIMIT`` (or turns non-finite) integration stops and the returned
:class:`Trajectory` is flagged ``diverged`` with the truncation time.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterator, NamedTuple, Optional, Sequence

import numpy as np

from .errors import InvalidParams, StepUnderflow
from .linearization import DriftMatrix, NoiseVector
from .model import SystemParams, detuning_a, detuning_e

DIVERGENCE_LIMIT = 1e12

FULL_LABELS = ("re_a", "im_a", "re_b", "im_b", "re_e", "im_e")
ADIABATIC_LABELS = ("re_a", "im_a", "Q", "P")
FLUCTUATION_LABELS = ("dXa", "dPa", "dQ", "dP")


class TrajectoryPoint(NamedTuple):
    t: float
    state: tuple


@dataclass
class Trajectory:
    """Sampled solution; ``y[k]`` is the real state vector at ``t[k]``."""

    t: np.ndarray
    y: np.ndarray
    model: str
    labels: tuple
    diverged: bool = False
    t_stop: float = 0.0
    n_rejected: int = 0
    extra: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.t)

    def __iter__(self) -> Iterator[TrajectoryPoint]:
        for t, y in zip(self.t, self.y):
            yield TrajectoryPoint(float(t), self.unpack(y))

    def unpack(self, y: np.ndarray) -> tuple:
        if self.model == "full":
            return complex(y[0], y[1]), complex(y[2], y[3]), complex(y[4], y[5])
        if self.model == "adiabatic":
            return complex(y[0], y[1]), float(y[2]), float(y[3])
        return tuple(float(v) for v in y)

    @property
    def final(self) -> tuple:
        return self.unpack(self.y[-1])


def _rk4(f, t, y, h):
    k1 = f(t, y)
    k2 = f(t + h / 2, y + h / 2 * k1)
    k3 = f(t + h / 2, y + h / 2 * k2)
    k4 = f(t + h, y + h * k3)
    return y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)


def _blown(y) -> bool:
    return not np.all(np.isfinite(y)) or np.max(np.abs(y)) > DIVERGENCE_LIMIT


def integrate(
    f: Callable[[float, np.ndarray], np.ndarray],
    y0: Sequence[float],
    t_end: float,
    dt_max: float = 0.1,
    tol: float = 1e-10,
    fixed_dt: Optional[float] = None,
):
    """Integrate ``y' = f(t, y)`` on ``[0, t_end]``.

    Returns ``(t, y, diverged, n_rejected)``. ``tol`` bounds the local error per
    step relative to ``max(1, max|y|)``. With ``fixed_dt`` set the step is
    constant (the last one is shortened to land on ``t_end``).
    """
    if t_end <= 0:
        raise InvalidParams(f"t_end must be > 0, got {t_end}")
    if fixed_dt is None and (tol <= 0 or dt_max <= 0):
        raise InvalidParams("tol and dt_max must be > 0")
    y = np.array(y0, dtype=float)
    ts, ys = [0.0], [y.copy()]
    t = 0.0
    rejected = 0

    if fixed_dt is not None:
        if fixed_dt <= 0:
            raise InvalidParams(f"fixed_dt must be > 0, got {fixed_dt}")
        n = max(1, int(math.ceil(t_end / fixed_dt - 1e-9)))
        for k in range(1, n + 1):
            t_next = min(k * fixed_dt, t_end)
            y = _rk4(f, t, y, t_next - t)
            t = t_next
            ts.append(t)
            ys.append(y.copy())
            if _blown(y):
                return np.array(ts), np.array(ys), True, 0
        return np.array(ts), np.array(ys), False, 0

    h = min(dt_max, t_end / 10)
    t_eps = 1e-12 * max(1.0, t_end)
    while t < t_end:
        h = min(h, dt_max)
        last = t + h >= t_end - t_eps
        if last:
            h = t_end - t
        if h < 1e-14 * max(1.0, t):
            raise StepUnderflow(f"step size {h:.3e} underflowed at t={t:.6g}")
        full = _rk4(f, t, y, h)
        half = _rk4(f, t + h / 2, _rk4(f, t, y, h / 2), h / 2)
        if not np.all(np.isfinite(half)):
            # a finite state with a non-finite update means we are past the blow-up point
            if _blown(y) or h < 1e-10:
                ts.append(t + h)
                ys.append(half)
                return np.array(ts), np.array(ys), True, rejected
            h /= 4
            rejected += 1
            continue
        err = np.max(np.abs(half - full)) / 15
        scale = tol * max(1.0, float(np.max(np.abs(half))))
        if err <= scale:
            t = t_end if last else t + h
            y = half + (half - full) / 15
            ts.append(t)
            ys.append(y.copy())
            if _blown(y):
                return np.array(ts), np.array(ys), True, rejected
            grow = 4.0 if err == 0 else min(4.0, 0.9 * (scale / err) ** 0.2)
            h *= max(grow, 0.2)
        else:
            rejected += 1
            h *= max(0.1, 0.9 * (scale / err) ** 0.2)
    return np.array(ts), np.array(ys), False, rejected


def _finish(ts, ys, diverged, rejected, model, labels) -> Trajectory:
    return Trajectory(
        t=ts, y=ys, model=model, labels=labels, diverged=diverged, t_stop=float(ts[-1]), n_rejected=rejected
    )


def full_field(params: SystemParams):
    """Right-hand side of the three-mode mean-field model on ``(Re a, Im a, Re b, Im b, Re e, Im e)``."""
    Da, De = detuning_a(params), detuning_e(params)
    ca = complex(params.epsilon / 2, Da)
    cb = complex(params.Gamma / 2, params.omega_m)
    ce = complex(params.gamma / 2, De)
    g, gop, eta = params.g, params.g_op, params.eta

    def f(t, y):
        a, b, e = complex(y[0], y[1]), complex(y[2], y[3]), complex(y[4], y[5])
        x = 2 * b.real
        da = -ca * a - 1j * g * e - 1j * gop * a * x * x - eta
        db = -cb * b - 2j * gop * (a.real**2 + a.imag**2) * x
        de = -ce * e - 1j * g * a
        return np.array([da.real, da.imag, db.real, db.imag, de.real, de.imag])

    return f


def adiabatic_field(params: SystemParams):
    """Right-hand side of the adiabatic model on ``(Re a, Im a, Q, P)``."""
    ca = complex(params.epsilon / 2, detuning_a(params))
    gop, eta, wm, half_Gam = params.g_op, params.eta, params.omega_m, params.Gamma / 2

    def f(t, y):
        a, Q, P = complex(y[0], y[1]), y[2], y[3]
        da = -ca * a - 2j * gop * a * Q * Q - eta
        dQ = wm * P
        dP = -wm * Q - 4 * gop * (a.real**2 + a.imag**2) * Q - half_Gam * P
        return np.array([da.real, da.imag, dQ, dP])

    return f


def integrate_full(
    params: SystemParams,
    initial: tuple[complex, complex, complex],
    t_end: float,
    dt_max: float = 0.1,
    tol: float = 1e-10,
    fixed_dt: Optional[float] = None,
) -> Trajectory:
    """Evolve ``(a, b, e)`` under the noiseless three-mode mean-field equations."""
    a, b, e = (complex(v) for v in initial)
    y0 = [a.real, a.imag, b.real, b.imag, e.real, e.imag]
    out = integrate(full_field(params), y0, t_end, dt_max, tol, fixed_dt)
    return _finish(*out, "full", FULL_LABELS)


def integrate_adiabatic(
    params: SystemParams,
    initial: tuple[complex, float, float],
    t_end: float,
    dt_max: float = 0.1,
    tol: float = 1e-10,
    fixed_dt: Optional[float] = None,
) -> Trajectory:
    """Evolve ``(a, Q, P)`` under the noiseless adiabatic model."""
    a, Q, P = initial
    a = complex(a)
    out = integrate(adiabatic_field(params), [a.real, a.imag, float(Q), float(P)], t_end, dt_max, tol, fixed_dt)
    return _finish(*out, "adiabatic", ADIABATIC_LABELS)


def integrate_fluctuations(
    M: DriftMatrix,
    N: Optional[NoiseVector],
    x0: Sequence[float],
    t_end: float,
    dt_max: float = 0.1,
    tol: float = 1e-10,
    fixed_dt: Optional[float] = None,
) -> Trajectory:
    """Evolve ``X' = M X + N`` with a constant drive ``N``."""
    m = np.asarray(M.m if isinstance(M, DriftMatrix) else M, dtype=float)
    n = np.zeros(4) if N is None else np.asarray(N.n if isinstance(N, NoiseVector) else N, dtype=float)

    def f(t, x):
        return m @ x + n

    out = integrate(f, x0, t_end, dt_max, tol, fixed_dt)
    return _finish(*out, "fluctuation", FLUCTUATION_LABELS)
