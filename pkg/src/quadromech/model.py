"""Physical parameters, rotating-frame detunings and quadrature conventions.

Everything here lives in the frame rotating at the drive frequency. Frequencies
and rates are plain dimensionless angular frequencies; nothing is rescaled by
``epsilon`` internally.

Quadrature convention
---------------------
Bosonic amplitudes map to quadratures as ``b = (Q + iP)/sqrt(2)``, so that
``(b + b*)**2 == 2 Q**2`` and ``[Q, P] = i``. The cavity amplitude uses the same
rule: ``X_s = sqrt(2) Re(a_s)``, ``P_s = sqrt(2) Im(a_s)``, and fluctuations
``da = (dX_a + i dP_a)/sqrt(2)``.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields, replace

from .errors import InvalidParams

SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class SystemParams:
    """All rates and frequencies of the driven cavity / mirror / emitter model.

    Detunings are never stored; use :func:`detuning_a` and :func:`detuning_e`.
    """

    omega_a: float = 0.0
    omega_m: float = 1.0
    omega_e: float = 0.0
    omega_D: float = 0.0
    g: float = 0.0
    g_op: float = 0.0
    eta: float = 1.0
    epsilon: float = 2.0
    Gamma: float = 0.0
    gamma: float = 0.0

    def __post_init__(self):
        for f in fields(self):
            value = getattr(self, f.name)
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise InvalidParams(f"{f.name} must be a real number, got {value!r}")
            if not math.isfinite(value):
                raise InvalidParams(f"{f.name} must be finite, got {value!r}")
            object.__setattr__(self, f.name, float(value))
        if self.epsilon <= 0:
            raise InvalidParams(f"epsilon must be > 0, got {self.epsilon}")
        if self.omega_m <= 0:
            raise InvalidParams(f"omega_m must be > 0, got {self.omega_m}")
        for name in ("g", "eta", "Gamma", "gamma"):
            if getattr(self, name) < 0:
                raise InvalidParams(f"{name} must be >= 0, got {getattr(self, name)}")

    @classmethod
    def from_detunings(cls, Delta_a: float = 0.0, Delta_e: float = 0.0, **kwargs) -> "SystemParams":
        """Build parameters with ``omega_D = 0`` so the detunings equal the mode frequencies."""
        return cls(omega_a=Delta_a, omega_e=Delta_e, omega_D=0.0, **kwargs)

    def replace(self, **changes) -> "SystemParams":
        return replace(self, **changes)

    def as_dict(self) -> dict[str, float]:
        return asdict(self)


PARAM_NAMES: tuple[str, ...] = tuple(f.name for f in fields(SystemParams))


def detuning_a(params: SystemParams) -> float:
    """Cavity detuning ``omega_a - omega_D``."""
    return params.omega_a - params.omega_D


def detuning_e(params: SystemParams) -> float:
    """Emitter detuning ``omega_e - omega_D``."""
    return params.omega_e - params.omega_D


def effective_detuning(params: SystemParams, Q_s_squared: float) -> float:
    """Cavity detuning shifted by a static mirror displacement.

    Returns ``Delta_a + g_op (b + b*)**2 = Delta_a + 2 g_op Q_s**2``.
    """
    if Q_s_squared < 0:
        raise InvalidParams(f"Q_s_squared must be >= 0, got {Q_s_squared}")
    return detuning_a(params) + 2.0 * params.g_op * Q_s_squared


def amplitude_to_quadratures(z: complex) -> tuple[float, float]:
    """``(sqrt(2) Re z, sqrt(2) Im z)``."""
    return SQRT2 * z.real, SQRT2 * z.imag


def quadratures_to_amplitude(x: float, p: float) -> complex:
    return complex(x, p) / SQRT2
