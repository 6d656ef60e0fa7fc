#!/usr/bin/env python3
"""Regenerates the frozen reference data in this directory.

Smooth case: p = sin x, u = cos x - 1, rho = e^x on [0,1]. The transformed
first-order system is integrated with SciPy's DOP853 at tight tolerances,
using closed forms for the coefficient antiderivatives. Delta case: the plane
wave pieces are obtained by direct ODE integration with an explicit derivative
jump at the interface, not by interface algebra, so the C++ transfer matrix is
checked against an independent route.
"""

import numpy as np
from scipy.integrate import solve_ivp

RTOL = 1e-12
ATOL = 1e-14


def smooth_case(lam, path_prefix):
    # closed-form t(x), sigma(x), f(x) for p = sin x, u = cos x - 1, rho = e^x
    h = 2.0 * (np.exp(0.5) - 1.0)

    def sigma(x):
        return np.exp(-0.5 * x) * (0.8 * np.cos(x) + 0.4 * np.sin(x)) - 0.8

    def f(x):
        return np.exp(-0.5 * x) * (np.sin(x) - 0.5)

    def rhs(x, s):
        y1, y2 = s
        sg = sigma(x)
        fv = f(x)
        g = fv * sg - sg * sg
        sr = np.exp(0.5 * x)
        return [sr * (sg * y1 + y2), sr * ((-lam * lam + g) * y1 + (fv - sg) * y2)]

    xs = np.linspace(0.0, 1.0, 101)
    mu = -1j * lam

    # minus branch: anchored at x = 0 with (y, y^[1]) = (1, mu)
    sol = solve_ivp(rhs, (0.0, 1.0), [1.0 + 0j, mu], t_eval=xs, rtol=RTOL, atol=ATOL,
                    method="DOP853")
    write_branch(path_prefix + "_minus.csv", xs, sol.y[0], np.exp(0.5 * xs) * sol.y[1])

    # plus branch: anchored at x = 1 with (y, y^[1]) = e^{-mu h} (1, -mu)
    eb = np.exp(-mu * h)
    sol = solve_ivp(rhs, (1.0, 0.0), [eb, -mu * eb], t_eval=xs[::-1], rtol=RTOL, atol=ATOL,
                    method="DOP853")
    write_branch(path_prefix + "_plus.csv", xs, sol.y[0][::-1],
                 np.exp(0.5 * xs) * sol.y[1][::-1])


def delta_case(lam, c, x0):
    """q = c delta(x - x0) on [0,1]: integrate y'' = -lam^2 y piecewise and jump
    y' by c y(x0) at the interface. Returns frozen probe values."""

    def rhs(x, s):
        return [s[1], -lam * lam * s[0]]

    def run(y0, dy0, forward):
        if forward:
            s1 = solve_ivp(rhs, (0.0, x0), [y0, dy0], rtol=RTOL, atol=ATOL, method="DOP853",
                           dense_output=True)
            yl, dyl = s1.y[0][-1], s1.y[1][-1]
            s2 = solve_ivp(rhs, (x0, 1.0), [yl, dyl + c * yl], rtol=RTOL, atol=ATOL,
                           method="DOP853", dense_output=True)
            return s1, s2
        s2 = solve_ivp(rhs, (1.0, x0), [y0, dy0], rtol=RTOL, atol=ATOL, method="DOP853",
                       dense_output=True)
        yr, dyr = s2.y[0][-1], s2.y[1][-1]
        s1 = solve_ivp(rhs, (x0, 0.0), [yr, dyr - c * yr], rtol=RTOL, atol=ATOL,
                       method="DOP853", dense_output=True)
        return s1, s2

    probes = {}
    # minus branch: (y, y^[1])(0) = (1, -i lam); u(0) = 0 so y'(0) = -i lam
    s1, s2 = run(1.0 + 0j, -1j * lam, True)
    probes["minus"] = {
        "y@0.25": s1.sol(0.25)[0],
        "y@0.75": s2.sol(0.75)[0],
        "yq@0.75": s2.sol(0.75)[1] - c * s2.sol(0.75)[0],
    }
    # plus branch: (y, y^[1])(1) = e^{i lam}(1, i lam); u(1) = c so y'(1) = (i lam + c) y(1)
    yb = np.exp(1j * lam)
    s1, s2 = run(yb, (1j * lam + c) * yb, False)
    probes["plus"] = {
        "y@0.25": s1.sol(0.25)[0],
        "y@0.75": s2.sol(0.75)[0],
        "yq@0.75": s2.sol(0.75)[1] - c * s2.sol(0.75)[0],
    }
    return probes


def write_branch(path, xs, y, yq):
    with open(path, "w") as fh:
        fh.write("# singular-sl v1\n")
        fh.write("x,re_y,im_y,re_y_quasi,im_y_quasi\n")
        for i in range(len(xs)):
            fh.write("%.17g,%.17g,%.17g,%.17g,%.17g\n"
                     % (xs[i], y[i].real, y[i].imag, yq[i].real, yq[i].imag))


if __name__ == "__main__":
    smooth_case(30.0 + 3.0j, "golden_smooth_l30p3i")
    pr = delta_case(40.0, 2.0, 0.5)
    for branch, vals in pr.items():
        for key, v in vals.items():
            print("%s %s = Complex{%.17g, %.17g}" % (branch, key, v.real, v.imag))
