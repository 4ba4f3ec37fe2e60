import math

import numpy as np
import pytest
from scipy.linalg import expm

from quadromech.dynamics import integrate, integrate_adiabatic, integrate_fluctuations, integrate_full
from quadromech.errors import InvalidParams, StepUnderflow
from quadromech.linearization import DriftMatrix, drift_matrix, eigenvalues, noise_vector
from quadromech.model import SystemParams
from quadromech.steady_state import solve_adiabatic, solve_full


def test_bare_cavity_decay():
    p = SystemParams(eta=0.0, g=0.0, g_op=0.0, epsilon=2.0, omega_a=0.7)
    tr = integrate_full(p, (1.0, 0.0, 0.0), 1.0, tol=1e-12)
    assert abs(tr.final[0]) == pytest.approx(math.exp(-1.0), abs=1e-8)
    assert tr.t[-1] == pytest.approx(1.0) and np.all(np.diff(tr.t) > 0)


def test_driven_cavity_reaches_full_steady_state():
    p = SystemParams.from_detunings(0.0, 0.0, epsilon=2.0, gamma=2.0, g=2.0, eta=1.0)
    s = solve_full(p)
    assert s.a_s == pytest.approx(-0.2)
    # linear in (a, e) when g_op = 0: compare with the exact propagator at t = 20/eps
    L = np.array([[-1.0, -2j], [-2j, -1.0]])
    z_s = np.array([s.a_s, s.e_s])
    t1 = 20 / p.epsilon
    z1 = z_s + expm(L * t1) @ (np.zeros(2) - z_s)
    a, b, e = integrate_full(p, (0.0, 0.0, 0.0), t1).final
    assert abs(a - z1[0]) < 1e-8 and abs(e - z1[1]) < 1e-8
    # slowest rate is 1, so the residual e^{-10}|a_s| ~ 1e-5 only drops below 1e-6 later
    a, b, e = integrate_full(p, (0.0, 0.0, 0.0), 40 / p.epsilon).final
    assert abs(a - s.a_s) < 1e-6 and abs(e - s.e_s) < 1e-6


def test_mechanical_ring_down():
    p = SystemParams(eta=0.0, g_op=0.0, Gamma=0.2, omega_m=1.0)
    tr = integrate_full(p, (0.0, 1.0, 0.0), 10.0, tol=1e-12)
    for t, (a, b, e) in list(tr)[:: max(1, len(tr) // 20)]:
        assert abs(b) == pytest.approx(math.exp(-0.1 * t), abs=1e-8)


def test_adiabatic_free_oscillator_closed_form():
    p = SystemParams(eta=0.0, g_op=0.0, Gamma=0.3, omega_m=1.2)
    tr = integrate_adiabatic(p, (0.0, 1.0, 0.0), 15.0, tol=1e-12)
    # Q'' + (Gamma/2) Q' + omega_m^2 Q = 0, Q(0) = 1, Q'(0) = 0
    sigma = p.Gamma / 4
    nu = math.sqrt(p.omega_m**2 - sigma**2)
    Q = np.exp(-sigma * tr.t) * (np.cos(nu * tr.t) + sigma / nu * np.sin(nu * tr.t))
    np.testing.assert_allclose(tr.y[:, 2], Q, atol=1e-6)


def test_adiabatic_fixed_point_is_stationary():
    p = SystemParams.from_detunings(0.7, epsilon=1.5, Gamma=0.4, omega_m=0.9, g_op=0.2, eta=0.8)
    s = solve_adiabatic(p)
    tr = integrate_adiabatic(p, (s.a_s, s.Q_s, s.Pm_s), 10.0)
    assert np.max(np.abs(tr.y[:, :2] - [s.a_s.real, s.a_s.imag])) < 1e-10
    assert np.max(np.abs(tr.y[:, 2:])) < 1e-10


def test_bare_cavity_charging():
    p = SystemParams.from_detunings(0.0, eta=1.0, epsilon=2.0, g_op=0.0)
    tr = integrate_adiabatic(p, (0.0, 0.0, 0.0), 10.0)
    a = tr.y[:, 0] + 1j * tr.y[:, 1]
    np.testing.assert_allclose(a, -1 + np.exp(-tr.t), atol=1e-8)
    assert abs(tr.final[0] + 1) < 1e-4
    assert abs(integrate_adiabatic(p, (0.0, 0.0, 0.0), 15.0).final[0] + 1) < 1e-6


def test_fluctuations_decay_for_stable_matrix():
    p = SystemParams.from_detunings(1.0, epsilon=2.0, Gamma=0.2, omega_m=1.0)
    M = drift_matrix(p, solve_adiabatic(p))
    slowest = np.min(np.abs(eigenvalues(M).real))
    x0 = np.array([0.3, -0.2, 1.0, 0.5])
    tr = integrate_fluctuations(M, None, x0, 40 / slowest, dt_max=0.5)
    assert np.linalg.norm(tr.y[-1]) < 1e-6 * np.linalg.norm(x0)


def test_fluctuations_grow_along_unstable_eigenvector():
    m = np.array([[-1.0, 0.5, 0, 0], [0.2, -0.8, 0, 0], [0, 0, 0, 1.0], [0, 0, 0.4, -0.1]])
    lam, vec = np.linalg.eig(m)
    k = int(np.argmax(lam.real))
    assert lam[k].real > 0
    v = np.real(vec[:, k])
    t_end = 5.0
    tr = integrate_fluctuations(m, None, v, t_end)
    ratio = np.linalg.norm(tr.y[-1]) / np.linalg.norm(v)
    assert ratio == pytest.approx(math.exp(lam[k].real * t_end), rel=0.05)


def test_pure_drive_integration():
    tr = integrate_fluctuations(np.zeros((4, 4)), [1.0, 0, 0, 0], np.zeros(4), 2.0)
    np.testing.assert_allclose(tr.y[-1], [2.0, 0, 0, 0], atol=1e-12)


def test_fluctuations_match_matrix_exponential(rng):
    p = SystemParams.from_detunings(0.5, epsilon=1.0, Gamma=0.4, omega_m=1.0, g_op=0.3, eta=1.0)
    s = solve_adiabatic(p)
    M = drift_matrix(p, s)
    N = noise_vector(p, [0.1, -0.2, 0.05, 0.3])
    x0 = rng.normal(size=4)
    tr = integrate_fluctuations(M, N, x0, 3.0)
    # X(t) = e^{Mt} x0 + M^{-1}(e^{Mt} - I) N
    E = expm(M.m * 3.0)
    expected = E @ x0 + np.linalg.solve(M.m, (E - np.eye(4)) @ N.n)
    np.testing.assert_allclose(tr.y[-1], expected, atol=1e-8)


def test_divergence_is_flagged_not_raised():
    m = np.diag([2.0, -1.0, -1.0, -1.0])
    tr = integrate_fluctuations(m, None, [1.0, 0, 0, 0], 100.0)
    assert tr.diverged and 0 < tr.t_stop < 100.0
    assert np.max(np.abs(tr.y[-1])) > 1e12


def test_fixed_step_is_fourth_order():
    p = SystemParams(eta=0.0, epsilon=2.0, omega_a=3.0)
    exact = math.exp(-2.0)
    errs = []
    for dt in (0.1, 0.05, 0.025):
        a = integrate_full(p, (1.0, 0.0, 0.0), 2.0, fixed_dt=dt).final[0]
        errs.append(abs(a - exact * complex(math.cos(6.0), -math.sin(6.0))))
    assert errs[0] / errs[1] >= 8 and errs[1] / errs[2] >= 8


def test_conservative_limit():
    # no damping, no drive, no coupling: |a|^2 and |b|^2 are invariants
    p = SystemParams(omega_a=1.3, omega_m=1.0, eta=0.0, epsilon=1e-300, Gamma=0.0, gamma=0.0)
    periods = 100
    tr = integrate_full(p, (0.6 + 0.2j, 0.5 - 0.4j, 0.0), periods * 2 * math.pi, dt_max=0.1, tol=1e-13)
    a = tr.y[:, 0] + 1j * tr.y[:, 1]
    b = tr.y[:, 2] + 1j * tr.y[:, 3]
    assert np.max(np.abs(np.abs(a) ** 2 - 0.4)) < 1e-8
    assert np.max(np.abs(np.abs(b) ** 2 - 0.41)) < 1e-8


def test_emitter_exchange_conserves_total_excitation():
    p = SystemParams(omega_a=0.2, omega_e=-0.3, g=0.8, eta=0.0, epsilon=1e-300, gamma=0.0)
    tr = integrate_full(p, (1.0, 0.0, 0.0), 50.0, tol=1e-13)
    n = tr.y[:, 0] ** 2 + tr.y[:, 1] ** 2 + tr.y[:, 4] ** 2 + tr.y[:, 5] ** 2
    assert np.max(np.abs(n - 1.0)) < 1e-8


def test_linear_and_nonlinear_deviation_agree_to_first_order():
    p = SystemParams.from_detunings(0.6, epsilon=1.4, Gamma=0.3, omega_m=1.0, g_op=0.25, eta=0.9)
    s = solve_adiabatic(p)
    M = drift_matrix(p, s)
    for scale in (1e-3, 1e-4):
        delta = scale * np.array([0.4, -0.3, 0.8, 0.2])
        T = 2 * math.pi / p.omega_m
        da = complex(delta[0], delta[1]) / math.sqrt(2)
        nl = integrate_adiabatic(p, (s.a_s + da, s.Q_s + delta[2], s.Pm_s + delta[3]), T, fixed_dt=1e-2)
        lin = integrate_fluctuations(M, None, delta, T, fixed_dt=1e-2)
        dev = np.column_stack([
            math.sqrt(2) * (nl.y[:, 0] - s.a_s.real),
            math.sqrt(2) * (nl.y[:, 1] - s.a_s.imag),
            nl.y[:, 2] - s.Q_s,
            nl.y[:, 3] - s.Pm_s,
        ])
        rel = np.max(np.linalg.norm(dev - lin.y, axis=1)) / np.max(np.linalg.norm(lin.y, axis=1))
        assert rel <= 10 * np.linalg.norm(delta)


def test_bad_arguments():
    with pytest.raises(InvalidParams):
        integrate_fluctuations(np.zeros((4, 4)), None, np.zeros(4), 0.0)
    with pytest.raises(InvalidParams):
        integrate_fluctuations(np.zeros((4, 4)), None, np.zeros(4), 1.0, tol=0.0)


def test_step_underflow():
    # finite-time blow-up of y' = y^2 from y(0) = 1 at t = 1, with an unreachable divergence cap
    import quadromech.dynamics as dyn

    old = dyn.DIVERGENCE_LIMIT
    dyn.DIVERGENCE_LIMIT = float("inf")
    try:
        with pytest.raises(StepUnderflow):
            integrate(lambda t, y: y * y, [1.0], 2.0, tol=1e-12)
    finally:
        dyn.DIVERGENCE_LIMIT = old
