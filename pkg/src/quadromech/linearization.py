"""Drift matrix of the linearized adiabatic model and its stability analysis.

Fluctuations are ordered ``(dX_a, dP_a, dQ, dP)``. The drift matrix is

    [[-eps/2,      Dt,   G P_s,     0],
     [   -Dt,  -eps/2,  -G X_s,     0],
     [     0,       0,       0,    wm],
     [-G X_s,       0,     -Wt, -Gam/2]]

with ``Dt = Delta_a + 2 g_op Q_s**2``, ``Wt = omega_m + 4 g_op |a_s|**2`` and
``G = 4 g_op Q_s``.

Stability is decided from the coefficients of ``det(lambda I - M)`` and checked
against the eigenvalues. The printed closed forms ``l1, l2, l3`` are evaluated
for comparison. ``l1`` and ``l2`` equal ``c2`` and ``c1`` identically, while
expanding the determinant gives ``c0 - l3 = G**2 X_s**2 omega_m (Wt - Dt)``.
That difference is reported as ``l3_discrepancy``.
"""
from __future__ import annotations

import cmath
from dataclasses import dataclass
from itertools import combinations
from typing import NamedTuple, Optional

import numpy as np

from .model import SystemParams, detuning_a
from .steady_state import SteadyState

MARGINAL_BAND = 1e-9


@dataclass(frozen=True)
class DriftMatrix:
    m: np.ndarray
    delta_tilde: float
    omega_tilde: float
    G: float
    X_s: float = 0.0
    P_s: float = 0.0

    @property
    def trace(self) -> float:
        return float(np.trace(self.m))


def drift_matrix(params: SystemParams, steady: SteadyState) -> DriftMatrix:
    eps, wm, Gam = params.epsilon, params.omega_m, params.Gamma
    Q, X, P = steady.Q_s, steady.X_s, steady.P_s
    Dt = detuning_a(params) + 2 * params.g_op * Q * Q
    Wt = wm + 4 * params.g_op * abs(steady.a_s) ** 2
    G = 4 * params.g_op * Q
    m = np.array(
        [
            [-eps / 2, Dt, G * P, 0.0],
            [-Dt, -eps / 2, -G * X, 0.0],
            [0.0, 0.0, 0.0, wm],
            [-G * X, 0.0, -Wt, -Gam / 2],
        ]
    )
    m.setflags(write=False)
    return DriftMatrix(m=m, delta_tilde=Dt, omega_tilde=Wt, G=G, X_s=X, P_s=P)


@dataclass(frozen=True)
class NoiseVector:
    n: np.ndarray


def noise_vector(params: SystemParams, inputs) -> NoiseVector:
    """Scale the input fluctuations ``(dX_a_in, dP_a_in, dQ_in, dP_in)`` by their damping weights."""
    inputs = np.asarray(inputs, dtype=float)
    if inputs.shape != (4,):
        raise ValueError(f"expected 4 noise inputs, got shape {inputs.shape}")
    ce, cg = np.sqrt(2 * params.epsilon), np.sqrt(2 * params.Gamma)
    return NoiseVector(inputs * np.array([ce, ce, cg, cg]))


def _as_array(M) -> np.ndarray:
    return np.asarray(M.m if isinstance(M, DriftMatrix) else M, dtype=float)


def _det2(a, i, j) -> float:
    return a[i][i] * a[j][j] - a[i][j] * a[j][i]


def _det3(a, i, j, k) -> float:
    return (
        a[i][i] * (a[j][j] * a[k][k] - a[j][k] * a[k][j])
        - a[i][j] * (a[j][i] * a[k][k] - a[j][k] * a[k][i])
        + a[i][k] * (a[j][i] * a[k][j] - a[j][j] * a[k][i])
    )


def _det4(a) -> float:
    # cofactor expansion along row 0; each 3x3 minor uses rows 1..3
    total = 0.0
    for j in range(4):
        if a[0][j] == 0.0:
            continue
        c = [x for x in range(4) if x != j]
        m = [[a[r][c[0]], a[r][c[1]], a[r][c[2]]] for r in (1, 2, 3)]
        minor = (
            m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
        )
        total += (-1) ** j * a[0][j] * minor
    return total


class CharPoly(NamedTuple):
    c3: float
    c2: float
    c1: float
    c0: float


def char_poly(M) -> CharPoly:
    """Coefficients of the monic quartic ``det(lambda I - M)``.

    ``c_k = (-1)**(4-k)`` times the sum of principal minors of order ``4 - k``.
    """
    a = _as_array(M)
    if a.shape != (4, 4):
        raise ValueError(f"expected a 4x4 matrix, got shape {a.shape}")
    a = a.tolist()
    s1 = a[0][0] + a[1][1] + a[2][2] + a[3][3]
    s2 = sum(_det2(a, i, j) for i, j in combinations(range(4), 2))
    s3 = sum(_det3(a, i, j, k) for i, j, k in combinations(range(4), 3))
    return CharPoly(-s1, s2, -s3, _det4(a))


class PaperL(NamedTuple):
    l1: float
    l2: float
    l3: float


def paper_l_coefficients(params: SystemParams, steady: SteadyState, drift: DriftMatrix) -> PaperL:
    """The printed ``l1, l2, l3``, with the steady cavity quadrature ``X_s`` in ``l3``."""
    eps, wm, Gam = params.epsilon, params.omega_m, params.Gamma
    Dt, Wt, G = drift.delta_tilde, drift.omega_tilde, drift.G
    X, P = steady.X_s, steady.P_s
    cav = eps**2 / 4 + Dt**2
    l1 = cav + eps * Gam / 2 + wm * Wt
    l2 = eps * wm * Wt + G**2 * X * P * wm + cav * Gam / 2
    l3 = wm * Wt * cav + G**2 * eps / 2 * P * X * wm - G**2 * X**2 * wm * Wt
    return PaperL(l1, l2, l3)


def _cbrt(z: complex) -> complex:
    return z ** (1 / 3) if z != 0 else 0j


def quartic_roots(coeffs) -> np.ndarray:
    """Roots of ``x**4 + c3 x**3 + c2 x**2 + c1 x + c0`` by Ferrari's method.

    Each root is polished with a few Newton steps on the original quartic.
    """
    c3, c2, c1, c0 = (complex(c) for c in coeffs)
    s = c3 / 4
    # depressed quartic y^4 + p y^2 + q y + r, x = y - s
    p = c2 - 6 * s * s
    q = c1 - 2 * c2 * s + 8 * s**3
    r = c0 - c1 * s + c2 * s * s - 3 * s**4
    if abs(q) < 1e-14 * max(1.0, abs(p), abs(r)):
        disc = cmath.sqrt(p * p - 4 * r)
        ys = []
        for z in ((-p + disc) / 2, (-p - disc) / 2):
            w = cmath.sqrt(z)
            ys += [w, -w]
    else:
        # resolvent cubic 8 m^3 + 8 p m^2 + (2 p^2 - 8 r) m - q^2 = 0, need m != 0
        A, B, C = p, (p * p / 4 - r), -q * q / 8
        # depress m = t - A/3
        pp = B - A * A / 3
        qq = 2 * A**3 / 27 - A * B / 3 + C
        d = cmath.sqrt(qq * qq / 4 + pp**3 / 27)
        u = _cbrt(-qq / 2 + d)
        if abs(u) < 1e-300:
            u = _cbrt(-qq / 2 - d)
        omega = complex(-0.5, np.sqrt(3) / 2)
        cands = []
        for k in range(3):
            uk = u * omega**k
            t = uk - pp / (3 * uk) if uk != 0 else 0j
            cands.append(t - A / 3)
        m = max(cands, key=abs)
        sq = cmath.sqrt(2 * m)
        ys = []
        for sign in (1, -1):
            # y^2 - sign*sq*y + (p/2 + m + sign*q/(2 sq)) = 0
            bq = -sign * sq
            cq = p / 2 + m + sign * q / (2 * sq)
            disc = cmath.sqrt(bq * bq - 4 * cq)
            ys += [(-bq + disc) / 2, (-bq - disc) / 2]
    roots = []
    for y in ys:
        x = y - s
        for _ in range(4):
            f = (((x + c3) * x + c2) * x + c1) * x + c0
            df = ((4 * x + 3 * c3) * x + 2 * c2) * x + c1
            if df == 0:
                break
            step = f / df
            x -= step
            if abs(step) <= 1e-16 * max(1.0, abs(x)):
                break
        roots.append(x)
    return _sort_roots(np.array(roots, dtype=complex))


def _sort_roots(z: np.ndarray) -> np.ndarray:
    order = np.lexsort((-z.imag, -z.real))
    return z[order]


def eigenvalues(M) -> np.ndarray:
    """Eigenvalues of the drift matrix, sorted by real part then imaginary part, descending.

    Uses the LAPACK dense eigensolver; if it fails to converge the quartic
    closed form on :func:`char_poly` is used instead.
    """
    a = _as_array(M)
    try:
        lam = np.linalg.eigvals(a)
    except np.linalg.LinAlgError:
        lam = quartic_roots(char_poly(a))
    return _sort_roots(np.asarray(lam, dtype=complex))


def hurwitz_conditions(c: CharPoly) -> dict[str, bool]:
    """Routh-Hurwitz conditions of a monic quartic, keyed by name."""
    c3, c2, c1, c0 = c
    return {
        "c3_pos": c3 > 0,
        "l1_pos": c2 > 0,
        "l2_pos": c1 > 0,
        "l3_pos": c0 > 0,
        "hurwitz_2": c2 * c3 > c1,
        "hurwitz_3": c2 * c1 * c3 > c3 * c3 * c0 + c1 * c1,
    }


@dataclass(frozen=True)
class StabilityReport:
    coeffs: CharPoly
    paper_l: PaperL
    eigenvalues: np.ndarray
    conditions: dict
    paper_conditions: dict
    verdict_hurwitz: bool
    verdict_eigen: bool
    marginal: bool
    agreement: Optional[bool]
    l3_discrepancy: float
    max_real: float

    def to_dict(self) -> dict:
        return {
            "coeffs": dict(self.coeffs._asdict()),
            "paper_l": dict(self.paper_l._asdict()),
            "eigenvalues": [[float(z.real), float(z.imag)] for z in self.eigenvalues],
            "conditions": {k: bool(v) for k, v in self.conditions.items()},
            "paper_conditions": {k: bool(v) for k, v in self.paper_conditions.items()},
            "verdict_hurwitz": bool(self.verdict_hurwitz),
            "verdict_eigen": bool(self.verdict_eigen),
            "marginal": bool(self.marginal),
            "agreement": self.agreement,
            "l3_discrepancy": float(self.l3_discrepancy),
            "max_real": float(self.max_real),
        }


def routh_hurwitz(
    params: SystemParams,
    steady: SteadyState,
    drift: Optional[DriftMatrix] = None,
    marginal_band: float = MARGINAL_BAND,
) -> StabilityReport:
    """Full stability report for the linearized dynamics about ``steady``.

    The verdict uses determinant-based coefficients. The same inequalities
    evaluated with the printed ``l1, l2, l3`` are kept in ``paper_conditions``.
    When any eigenvalue has ``|Re| < marginal_band`` the case is flagged
    marginal and ``agreement`` is ``None``.
    """
    if drift is None:
        drift = drift_matrix(params, steady)
    c = char_poly(drift)
    l = paper_l_coefficients(params, steady, drift)
    conds = hurwitz_conditions(c)
    paper_conds = hurwitz_conditions(CharPoly(params.epsilon + params.Gamma / 2, *l))
    lam = eigenvalues(drift)
    max_real = float(np.max(lam.real))
    verdict_h = all(conds.values())
    verdict_e = max_real < 0
    marginal = bool(np.any(np.abs(lam.real) < marginal_band))
    return StabilityReport(
        coeffs=c,
        paper_l=l,
        eigenvalues=lam,
        conditions=conds,
        paper_conditions=paper_conds,
        verdict_hurwitz=verdict_h,
        verdict_eigen=verdict_e,
        marginal=marginal,
        agreement=None if marginal else verdict_h == verdict_e,
        l3_discrepancy=c.c0 - l.l3,
        max_real=max_real,
    )
