"""Reference computations that share no code path with the library's solver.

``shoot_eigenpair`` integrates the boundary value problem directly
(-u_i'' = lam F_i) with an adaptive ODE solver and closes the boundary and
normalisation conditions with a root finder; it never touches the Green's
kernels or the quadrature.
"""

import numpy as np
from scipy.integrate import quad, solve_ivp
from scipy.optimize import fsolve

from hameig.problem import BcKind


def kernel_integral_quad(ks, t, lo, hi):
    from hameig.kernels import kernel_value

    pts = [x for x in (ks.eta, t) if lo < x < hi]
    val, _ = quad(lambda s: kernel_value(ks, t, s), lo, hi, points=pts or None, epsabs=1e-14, epsrel=1e-14)
    return val


def _trajectory(problem, lam, y0):
    F1, F2 = (c.F for c in problem.components)

    def rhs(t, y):
        u1, du1, u2, du2 = y
        return [du1, -lam * float(F1(t, u1, u2)), du2, -lam * float(F2(t, u1, u2))]

    return solve_ivp(rhs, (0.0, 1.0), y0, method="DOP853", rtol=1e-12, atol=1e-13, dense_output=True)


def _sup(sol, fine):
    vals = np.abs(sol.sol(fine)[[0, 2]])
    k = np.unravel_index(np.argmax(vals), vals.shape)
    comp, j = k
    # refine an interior maximum with a parabola through neighbours
    if 0 < j < len(fine) - 1:
        y = vals[comp, j - 1:j + 2]
        denom = y[0] - 2 * y[1] + y[2]
        if denom < 0:
            off = 0.5 * (y[0] - y[2]) / denom
            x = fine[j] + off * (fine[1] - fine[0])
            return abs(sol.sol(x)[2 * comp])
    return vals[comp, j]


def shoot_eigenpair(problem, R, guess_lam, guess_u0):
    """Solve the BVP by shooting. ``guess_u0`` = (u1(0), u1'(0), u2(0), u2'(0))."""
    fine = np.linspace(0.0, 1.0, 4001)
    scale = np.array([1.0, 1.0, 1.0, 1.0, 1.0])

    def equations(z):
        lam, y0 = z[0], z[1:]
        sol = _trajectory(problem, lam, y0)
        if sol.status != 0:
            return 1e3 * scale
        def at(comp):
            return lambda p: float(sol.sol(p)[2 * (comp - 1)])
        u1, u2 = at(1), at(2)
        out = []
        for i, comp in enumerate(problem.components):
            u, du = sol.sol(0.0)[2 * i], sol.sol(0.0)[2 * i + 1]
            H = comp.H(u1, u2)
            G = comp.G(u1, u2)
            if comp.bc is BcKind.DIRICHLET0:
                out.append(u - lam * H)
            else:
                out.append(du + lam * H)
            p = comp.params
            d1 = sol.sol(1.0)[2 * i + 1]
            out.append(float(p.beta) * d1 + float(sol.sol(float(p.eta))[2 * i]) - lam * G)
        out.append(_sup(sol, fine) - R)
        return np.array(out)

    z, info, ier, msg = fsolve(equations, np.concatenate([[guess_lam], guess_u0]), full_output=True, xtol=1e-13)
    if ier != 1:
        raise RuntimeError(f"shooting failed: {msg}")
    sol = _trajectory(problem, z[0], z[1:])
    return z[0], sol


def shooting_guess(pair, bump=1.001):
    """Initial state (u1, u1', u2, u2') at t = 0 read off a grid solution, slightly perturbed."""
    h = pair.u.grid.h
    out = []
    for v in (pair.u.u1.values, pair.u.u2.values):
        out += [v[0], (-3 * v[0] + 4 * v[1] - v[2]) / (2 * h)]
    return pair.lam * bump, [x * bump for x in out]
