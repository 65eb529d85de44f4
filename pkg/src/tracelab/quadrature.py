"""Shared quadrature helpers.

Adaptive integration is delegated to scipy's QUADPACK (Gauss-Kronrod);
whole-line and half-line integrals of closed-form integrands are mapped to
a finite interval with the x = tan(theta) substitution before integrating,
which removes the infinite domain without tail heuristics.
"""

import numpy as np
from scipy.integrate import quad

from .errors import DomainError, NumericError

# surface area of the unit sphere S^{d-1}
def sphere_area(d: int) -> float:
    from .kernels import gamma_ln_scalar

    return float(2.0 * np.pi ** (d / 2.0) * np.exp(-gamma_ln_scalar(d / 2.0)))


def integrate_halfline(f, epsrel=1e-10, epsabs=1e-13, singular_origin=False):
    """integral of f over (0, inf) via r = tan(theta) on (0, pi/2)."""

    def g(theta):
        r = np.tan(theta)
        c = np.cos(theta)
        return f(r) / (c * c)

    pts = None
    if singular_origin:
        pts = [1e-8, 1e-4, 1e-2]
    val, err = quad(g, 0.0, 0.5 * np.pi, epsrel=epsrel, epsabs=epsabs, limit=300, points=pts)
    if not np.isfinite(val):
        raise NumericError("half-line quadrature returned a non-finite value")
    return val, err


def integrate_radial(f, d, epsrel=1e-10, r_lo=0.0):
    """integral over {x in R^d : |x| >= r_lo} of the radial function f(|x|)."""
    if d < 1:
        raise DomainError("dimension must be >= 1")
    area = sphere_area(d)

    def g(r):
        return f(r) * r ** (d - 1)

    if r_lo == 0.0:
        val, err = integrate_halfline(g, epsrel=epsrel)
    else:
        # split at r_lo, map the unbounded piece by r = r_lo + tan(theta)
        def gt(theta):
            r = r_lo + np.tan(theta)
            c = np.cos(theta)
            return g(r) / (c * c)

        val, err = quad(gt, 0.0, 0.5 * np.pi, epsrel=epsrel, epsabs=1e-13, limit=300)
    return area * val, area * err


def trapezoid(y, x):
    return float(np.trapezoid(y, x))
