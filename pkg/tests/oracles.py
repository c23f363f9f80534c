"""Reference values computed independently of the package's quadrature."""
import math

import numpy as np
from scipy.integrate import quad
from scipy.special import erfc, erfcx


def roots(d, c, beta):
    s = math.sqrt(c * c + 4 * beta * d)
    return (c - s) / (2 * d), (c + s) / (2 * d)


def bounded_solution_quad(d, c, beta, g, t):
    """u(t) by adaptive quadrature of the two-sided exponential integral."""
    l1, l2 = roots(d, c, beta)
    pre = 1.0 / (d * (l2 - l1))
    out = []
    for ti in np.atleast_1d(t):
        a, _ = quad(lambda s: math.exp(l1 * (ti - s)) * g(s), -np.inf, ti, epsabs=1e-14, epsrel=1e-13, limit=200)
        b, _ = quad(lambda s: math.exp(l2 * (ti - s)) * g(s), ti, np.inf, epsabs=1e-14, epsrel=1e-13, limit=200)
        out.append(pre * (a + b))
    return np.array(out)


def _gauss_tail(lam, t, upper):
    """int e^{lam (t - s)} e^{-s^2} ds over s < t (upper=False) or s > t (upper=True)."""
    x = t + lam / 2
    arg = x if upper else -x
    # (sqrt(pi)/2) e^{lam t + lam^2/4} erfc(arg), written with erfcx where it is stable
    with np.errstate(over="ignore", invalid="ignore"):
        stable = 0.5 * math.sqrt(math.pi) * np.exp(-t * t) * erfcx(arg)
        direct = 0.5 * math.sqrt(math.pi) * np.exp(lam * t + lam * lam / 4) * erfc(arg)
    return np.where(arg >= 0, stable, direct)


def gaussian_bounded_solution(d, c, beta, t):
    """Closed form of the bounded solution for g = exp(-t^2)."""
    l1, l2 = roots(d, c, beta)
    t = np.asarray(t, dtype=float)
    return (_gauss_tail(l1, t, False) + _gauss_tail(l2, t, True)) / (d * (l2 - l1))


def exponential_multiplier(d, c, beta, rho):
    """G[e^{rho s}] = e^{rho t} / (beta + c rho - d rho^2)."""
    return 1.0 / (beta + c * rho - d * rho * rho)
