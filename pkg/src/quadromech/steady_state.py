"""Mean-field fixed points of the three-mode model and the adiabatic two-mode model.

The operator products of the Langevin equations are factorized at mean-field
level: ``<a^dag a> -> |a_s|**2`` and ``(b + b^dag) -> b_s + b_s*``.

For the mechanical mode the self-consistent condition reduces to

    Q_s * [1 + 4 g_op |a_s|**2 omega_m / (Gamma**2/4 + omega_m**2)] = 0

(full model) or ``Q_s * (omega_m + 4 g_op |a_s|**2) = 0`` (adiabatic model), so
``Q_s = 0`` unless the bracket vanishes, which needs ``g_op < 0``. That
degenerate family is reported through :class:`DegenerateBranch` rather than
followed. :class:`PrescribedDisplacement` pins ``Q_s`` to a supplied value and
treats ``(b + b^dag)**2`` as a c-number, which is how sideband detunings
``Delta_a +- omega_m`` are reached.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import DegenerateBranch, InvalidParams, NoConvergence, SingularDenominator
from .model import SQRT2, SystemParams, detuning_a, detuning_e, effective_detuning

DEFAULT_TOL = 1e-12
DEFAULT_MAX_ITER = 10_000
DAMPING = 0.5


@dataclass(frozen=True)
class SelfConsistent:
    """Solve for ``Q_s`` from the mechanical equation, starting at ``initial_Q``."""

    initial_Q: float = 0.0


@dataclass(frozen=True)
class PrescribedDisplacement:
    """Hold the mirror quadrature fixed at ``Q_s``."""

    Q_s: float


SolveMode = Union[SelfConsistent, PrescribedDisplacement]


@dataclass(frozen=True)
class SteadyState:
    a_s: complex
    e_s: complex
    b_s: complex
    X_s: float
    P_s: float
    Q_s: float
    Pm_s: float
    effective_delta: float
    mode: SolveMode
    model: str = "full"
    iterations: int = 0

    @property
    def photon_number(self) -> float:
        return abs(self.a_s) ** 2


def _make_state(a_s, e_s, Q_s, Pm_s, delta, mode, model, iterations) -> SteadyState:
    a_s = complex(a_s)
    return SteadyState(
        a_s=a_s,
        e_s=complex(e_s),
        b_s=complex(Q_s, Pm_s) / SQRT2,
        X_s=SQRT2 * a_s.real,
        P_s=SQRT2 * a_s.imag,
        Q_s=float(Q_s),
        Pm_s=float(Pm_s),
        effective_delta=float(delta),
        mode=mode,
        model=model,
        iterations=iterations,
    )


def _check_mode(mode: SolveMode) -> None:
    if not isinstance(mode, (SelfConsistent, PrescribedDisplacement)):
        raise TypeError(f"unknown solve mode {mode!r}")


def cavity_amplitude(params: SystemParams, Delta: float) -> complex:
    """Closed-form ``<a>`` with the emitter eliminated at its own fixed point."""
    atom = complex(params.gamma / 2, detuning_e(params))
    denom = complex(params.epsilon / 2, Delta)
    if params.g != 0.0:
        if atom == 0:
            raise SingularDenominator("gamma = 0 and Delta_e = 0 with g > 0")
        denom += params.g**2 / atom
    return -params.eta / denom


def mechanical_bracket_full(params: SystemParams, photon_number: float) -> float:
    w, G = params.omega_m, params.Gamma
    return 1.0 + 4.0 * params.g_op * photon_number * w / (G**2 / 4 + w**2)


def mechanical_bracket_adiabatic(params: SystemParams, photon_number: float) -> float:
    return params.omega_m + 4.0 * params.g_op * photon_number


def solve_full(
    params: SystemParams,
    mode: SolveMode = SelfConsistent(),
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> SteadyState:
    """Fixed point of the noiseless three-mode mean-field equations.

    Each pass forms ``Delta`` from the current ``Q_s**2``, evaluates the cavity
    amplitude in closed form, the emitter amplitude from it, and then updates
    ``Q_s`` toward the root of the mechanical equation with damping 0.5.

    Raises
    ------
    NoConvergence
        ``max_iter`` passes without the ``Q_s`` update falling below ``tol``.
    DegenerateBranch
        The mechanical bracket is within ``tol`` of zero.
    """
    if not isinstance(params, SystemParams):
        raise InvalidParams("params must be a SystemParams")
    if tol <= 0:
        raise InvalidParams(f"tol must be > 0, got {tol}")
    _check_mode(mode)
    Delta_e = detuning_e(params)
    atom = complex(params.gamma / 2, Delta_e)

    if isinstance(mode, PrescribedDisplacement):
        Q = float(mode.Q_s)
        delta = effective_detuning(params, Q * Q)
        a = cavity_amplitude(params, delta)
        e = -1j * params.g * a / atom if params.g != 0.0 else 0j
        # real part of the mechanical equation, independent of |a|^2
        Pm = params.Gamma * Q / (2 * params.omega_m)
        return _make_state(a, e, Q, Pm, delta, mode, "full", 1)

    Q = float(mode.initial_Q)
    for it in range(1, max_iter + 1):
        delta = effective_detuning(params, Q * Q)
        a = cavity_amplitude(params, delta)
        bracket = mechanical_bracket_full(params, abs(a) ** 2)
        if abs(bracket) < tol:
            raise DegenerateBranch(
                f"mechanical bracket {bracket:.3e} vanishes; Q_s is undetermined (g_op={params.g_op})"
            )
        # homogeneous linear equation in Q with nonzero coefficient: target is 0
        target = 0.0
        Q_new = Q + DAMPING * (target - Q)
        if abs(Q_new - Q) < tol:
            Q = target
            delta = effective_detuning(params, 0.0)
            a = cavity_amplitude(params, delta)
            e = -1j * params.g * a / atom if params.g != 0.0 else 0j
            return _make_state(a, e, 0.0, 0.0, delta, mode, "full", it)
        Q = Q_new
    raise NoConvergence(f"Q_s update still above tol={tol} after {max_iter} iterations")


def solve_adiabatic(
    params: SystemParams,
    mode: SolveMode = SelfConsistent(),
    tol: float = DEFAULT_TOL,
) -> SteadyState:
    """Fixed point of the two-mode model obtained by dropping the emitter.

    ``Pm_s = 0``; ``Q_s = 0`` in self-consistent mode, or the prescribed value;
    ``a_s = -eta / (epsilon/2 + i Delta_tilde)`` with
    ``Delta_tilde = Delta_a + 2 g_op Q_s**2``. ``g`` is ignored.
    """
    _check_mode(mode)
    Q = float(mode.Q_s) if isinstance(mode, PrescribedDisplacement) else 0.0
    delta = effective_detuning(params, Q * Q)
    a = -params.eta / complex(params.epsilon / 2, delta)
    if isinstance(mode, SelfConsistent):
        bracket = mechanical_bracket_adiabatic(params, abs(a) ** 2)
        if abs(bracket) < tol:
            raise DegenerateBranch(
                f"omega_m + 4 g_op |a_s|^2 = {bracket:.3e} vanishes; Q_s is undetermined"
            )
    return _make_state(a, 0j, Q, 0.0, delta, mode, "adiabatic", 1)


def full_rhs(params: SystemParams, a: complex, b: complex, e: complex) -> tuple[complex, complex, complex]:
    """Noiseless mean-field time derivatives ``(da, db, de)`` of the three-mode model."""
    Da, De = detuning_a(params), detuning_e(params)
    x = b + b.conjugate()
    da = -(1j * Da + params.epsilon / 2) * a - 1j * params.g * e - 1j * params.g_op * a * x * x - params.eta
    db = -(1j * params.omega_m + params.Gamma / 2) * b - 2j * params.g_op * abs(a) ** 2 * x
    de = -(1j * De + params.gamma / 2) * e - 1j * params.g * a
    return da, db, de


def adiabatic_rhs(params: SystemParams, a: complex, Q: float, P: float) -> tuple[complex, float, float]:
    """Noiseless time derivatives ``(da, dQ, dP)`` of the adiabatic model."""
    Da = detuning_a(params)
    da = -(1j * Da + params.epsilon / 2) * a - 2j * params.g_op * a * Q * Q - params.eta
    dQ = params.omega_m * P
    dP = -params.omega_m * Q - 4 * params.g_op * abs(a) ** 2 * Q - params.Gamma / 2 * P
    return da, dQ, dP


def residuals(params: SystemParams, state: SteadyState) -> np.ndarray:
    """Magnitudes of the equation-of-motion right-hand sides at ``state``.

    Full model: ``(|da|, |db|, |de|)``; adiabatic: ``(|da|, |dQ|, |dP|)``. In
    prescribed mode the mechanical entry is generally nonzero by construction.
    """
    if state.model == "adiabatic":
        da, dQ, dP = adiabatic_rhs(params, state.a_s, state.Q_s, state.Pm_s)
        return np.array([abs(da), abs(dQ), abs(dP)])
    da, db, de = full_rhs(params, state.a_s, state.b_s, state.e_s)
    return np.array([abs(da), abs(db), abs(de)])
