"""Relaxation of the adiabatic model toward its steady state.

Kicks the self-consistent fixed point and integrates the nonlinear mean-field
equations next to the linearized fluctuation dynamics, printing the distance
to the fixed point over time and the slowest linear decay rate.

    python scripts/ringdown.py --g_op 0.2 --t_end 60
"""
from __future__ import annotations

import argparse

import numpy as np

from quadromech import SelfConsistent, SystemParams, drift_matrix, eigenvalues, solve_adiabatic
from quadromech.dynamics import integrate_adiabatic, integrate_fluctuations
from quadromech.model import amplitude_to_quadratures


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--Delta_a", type=float, default=0.5)
    ap.add_argument("--epsilon", type=float, default=2.0)
    ap.add_argument("--eta", type=float, default=1.0)
    ap.add_argument("--omega_m", type=float, default=1.0)
    ap.add_argument("--Gamma", type=float, default=0.4)
    ap.add_argument("--g_op", type=float, default=0.2)
    ap.add_argument("--kick", type=float, default=1e-3)
    ap.add_argument("--t_end", type=float, default=60.0)
    args = ap.parse_args()

    p = SystemParams.from_detunings(
        args.Delta_a, 0.0, epsilon=args.epsilon, eta=args.eta, omega_m=args.omega_m, Gamma=args.Gamma, g_op=args.g_op
    )
    s = solve_adiabatic(p, SelfConsistent())
    M = drift_matrix(p, s)
    lam = eigenvalues(M)
    print("eigenvalues:", ", ".join(f"{z.real:+.4f}{z.imag:+.4f}i" for z in lam))

    nl = integrate_adiabatic(p, (s.a_s, s.Q_s + args.kick, s.Pm_s), args.t_end, dt_max=0.2)
    lin = integrate_fluctuations(M, None, [0.0, 0.0, args.kick, 0.0], args.t_end, dt_max=0.2)
    X_s, P_s = amplitude_to_quadratures(s.a_s)
    for t in np.linspace(0.0, args.t_end, 7):
        i = min(np.searchsorted(nl.t, t), len(nl) - 1)
        j = min(np.searchsorted(lin.t, t), len(lin) - 1)
        a, Q, P = nl.unpack(nl.y[i])
        X, Pa = amplitude_to_quadratures(a)
        dev_nl = np.abs([X - X_s, Pa - P_s, Q - s.Q_s, P - s.Pm_s]).max()
        dev_lin = np.abs(lin.y[j]).max()
        print(f"t = {nl.t[i]:7.2f}   nonlinear {dev_nl:.3e}   linear {dev_lin:.3e}")


if __name__ == "__main__":
    main()
