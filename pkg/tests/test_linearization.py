import cmath

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from quadromech.linearization import (
    char_poly,
    drift_matrix,
    eigenvalues,
    noise_vector,
    paper_l_coefficients,
    quartic_roots,
    routh_hurwitz,
)
from quadromech.model import SystemParams
from quadromech.steady_state import PrescribedDisplacement, solve_adiabatic

from _helpers import match_roots

BLOCK = SystemParams.from_detunings(1.0, epsilon=2.0, Gamma=0.2, omega_m=1.0, g_op=0.0, eta=1.0)


def quad_roots(b, c):
    # roots of x^2 + b x + c
    d = cmath.sqrt(b * b - 4 * c)
    return [(-b + d) / 2, (-b - d) / 2]


def test_block_diagonal_drift():
    s = solve_adiabatic(BLOCK)
    d = drift_matrix(BLOCK, s)
    assert d.G == 0 and d.delta_tilde == 1.0 and d.omega_tilde == 1.0
    assert np.all(d.m[:2, 2:] == 0) and np.all(d.m[2:, :2] == 0)
    lam = eigenvalues(d)
    expected = quad_roots(2.0, 2.0) + quad_roots(0.1, 1.0)  # -1 +- i, -0.05 +- 0.99875 i
    assert match_roots(lam, expected) < 1e-12
    assert match_roots(lam, [-1 + 1j, -1 - 1j, -0.05 + 0.99875j, -0.05 - 0.99875j]) < 1e-5


def test_self_consistent_drift_has_no_cross_coupling():
    p = BLOCK.replace(g_op=0.3, omega_a=0.2)
    s = solve_adiabatic(p)
    d = drift_matrix(p, s)
    assert d.G == 0.0 and d.delta_tilde == 0.2
    assert d.omega_tilde == pytest.approx(1.0 + 4 * 0.3 * abs(s.a_s) ** 2)


def test_coupling_entries_follow_layout():
    p = BLOCK.replace(g_op=0.2)
    s = solve_adiabatic(p, PrescribedDisplacement(0.7))
    d = drift_matrix(p, s)
    assert d.G == pytest.approx(4 * 0.2 * 0.7)
    assert d.m[3, 0] == -d.G * s.X_s
    assert d.m[0, 2] == d.G * s.P_s
    assert d.m[1, 2] == -d.G * s.X_s
    assert d.m[2, 3] == p.omega_m and d.m[3, 2] == -d.omega_tilde
    assert d.trace == pytest.approx(-(p.epsilon + p.Gamma / 2))


def test_char_poly_examples():
    c = char_poly(drift_matrix(BLOCK, solve_adiabatic(BLOCK)))
    assert c.c3 == pytest.approx(2.1)
    # block determinant product omega_m^2 (eps^2/4 + Delta_a^2)
    assert c.c0 == pytest.approx(2.0)
    assert tuple(char_poly(np.zeros((4, 4)))) == (0.0, 0.0, 0.0, 0.0)


def test_char_poly_matches_numpy(rng):
    for _ in range(200):
        a = rng.normal(size=(4, 4))
        np.testing.assert_allclose(char_poly(a), np.poly(a)[1:], rtol=1e-10, atol=1e-12)


def test_paper_l_without_coupling():
    s = solve_adiabatic(BLOCK)
    d = drift_matrix(BLOCK, s)
    l = paper_l_coefficients(BLOCK, s, d)
    assert l.l1 == pytest.approx(3.2)
    c = char_poly(d)
    np.testing.assert_allclose([c.c2, c.c1, c.c0], list(l), rtol=1e-12)


def test_l3_discrepancy_formula():
    p = SystemParams.from_detunings(0.4, epsilon=1.5, Gamma=0.3, omega_m=0.8, g_op=0.35, eta=1.2)
    s = solve_adiabatic(p, PrescribedDisplacement(0.9))
    d = drift_matrix(p, s)
    r = routh_hurwitz(p, s, d)
    expected = d.G**2 * s.X_s**2 * p.omega_m * (d.omega_tilde - d.delta_tilde)
    assert r.l3_discrepancy == pytest.approx(expected, rel=1e-10)
    assert abs(expected) > 1e-3


def test_eigen_examples():
    assert np.allclose(eigenvalues(np.diag([-1.0, -2.0, -3.0, -4.0])), [-1, -2, -3, -4])
    assert np.allclose(quartic_roots(char_poly(np.diag([-1.0, -2.0, -3.0, -4.0]))), [-1, -2, -3, -4])


def test_eigenvalues_sorted(rng):
    lam = eigenvalues(rng.normal(size=(4, 4)))
    assert np.all(np.diff(lam.real) <= 1e-12)


def test_companion_consistency(rng):
    for _ in range(500):
        a = rng.normal(size=(4, 4)) * rng.uniform(0.1, 5)
        assert match_roots(eigenvalues(a), quartic_roots(char_poly(a))) < 1e-8 * max(1, np.abs(a).max())


def test_stable_block_report():
    r = routh_hurwitz(BLOCK, solve_adiabatic(BLOCK))
    assert r.verdict_hurwitz and r.verdict_eigen and r.agreement and not r.marginal
    assert sorted(np.round(r.eigenvalues.real, 12)) == [-1, -1, -0.05, -0.05]
    assert all(r.conditions.values())


def test_undamped_mirror_is_marginal():
    p = BLOCK.replace(Gamma=0.0)
    r = routh_hurwitz(p, solve_adiabatic(p))
    mech = r.eigenvalues[np.abs(r.eigenvalues.real) < 1e-9]
    assert match_roots(mech, [1j, -1j]) < 1e-12
    assert r.marginal and r.agreement is None and not r.verdict_eigen
    assert not r.verdict_hurwitz


def test_noise_vector():
    assert np.all(noise_vector(BLOCK, [0, 0, 0, 0]).n == 0)
    np.testing.assert_allclose(noise_vector(BLOCK.replace(epsilon=2.0, Gamma=0.5), [1, 1, 1, 1]).n, [2, 2, 1, 1])
    # epsilon cannot be zero in SystemParams; the scaling itself handles it
    n = noise_vector(BLOCK.replace(Gamma=0.0), [0, 0, 1, 1]).n
    assert np.all(n == 0)
    with pytest.raises(ValueError):
        noise_vector(BLOCK, [1, 2, 3])


finite = dict(allow_nan=False, allow_infinity=False)
drift_inputs = st.tuples(
    st.floats(-3, 3, **finite),  # Delta_a
    st.floats(0.1, 4, **finite),  # epsilon
    st.floats(0.0, 2, **finite),  # Gamma
    st.floats(0.1, 3, **finite),  # omega_m
    st.floats(-1, 1, **finite),  # g_op
    st.floats(0.0, 2, **finite),  # eta
    st.floats(-2, 2, **finite),  # Q_s
)


def _build(args):
    Da, eps, Gam, wm, gop, eta, Q = args
    p = SystemParams.from_detunings(Da, epsilon=eps, Gamma=Gam, omega_m=wm, g_op=gop, eta=eta)
    s = solve_adiabatic(p, PrescribedDisplacement(Q))
    return p, s, drift_matrix(p, s)


@given(drift_inputs)
def test_trace_identity(args):
    p, s, d = _build(args)
    assert char_poly(d).c3 == pytest.approx(p.epsilon + p.Gamma / 2, rel=1e-15)


@given(drift_inputs, st.integers(0, 2**32 - 1))
def test_similarity_invariance(args, seed):
    _, _, d = _build(args)
    r = np.random.default_rng(seed)
    S = np.eye(4) + 0.3 * r.normal(size=(4, 4))
    if np.linalg.cond(S) > 50:
        return
    lam = eigenvalues(d)
    lam2 = eigenvalues(S @ d.m @ np.linalg.inv(S))
    assert match_roots(lam, lam2) < 1e-8 * max(1.0, np.abs(d.m).max())
