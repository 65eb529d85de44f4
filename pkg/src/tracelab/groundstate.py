"""Ground states of the two Gagliardo-Nirenberg families and the
one-bound-state constants built from them.

standard family (q > 1):   Delta u + u^{2q-1} - u = 0, positive, radial,
                           decaying like e^{-r}; closed form in d = 1.
dual family (0 < q < 1):   -Delta u = u - u^{2q-1} on its support, i.e.
                           u'' + (d-1)/r u' = u^{2q-1} - u, compactly
                           supported with a double zero (u = u' = 0) at the
                           free boundary.

Both are solved by bisection shooting on u(0) with the monotone
overshoot/undershoot criterion; the Lagrange multipliers are normalized
away by scaling (the quotients below are invariant, so the convention is
harmless).  With this normalization the induced optimal potentials are
V_u = -u^{2(q-1)} (standard, lambda_1 = -1 exactly) and V_u = u^{2(q-1)}
extended by +infinity outside the support (dual, lambda_1 = +1 exactly).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad

from .constants import kappa_dual, kappa_standard, one_bound_state_readings, one_bound_state_via_kappa
from .errors import ConsistencyError, DomainError, NumericError
from .kernels import shoot_classify, shoot_profile
from .potentials import Potential
from .quadrature import sphere_area
from .spectra import dirichlet_solve, radial_solve

BISECTION_CAP = 200


@dataclass
class GroundState:
    family: str
    q: float
    d: int
    r: np.ndarray = field(repr=False)
    u: np.ndarray = field(repr=False)
    du: np.ndarray = field(repr=False)
    u0: float
    support_radius: float  # np.inf for the decaying family
    norms: dict  # l2 = ||u||_2^2, grad_l2 = ||grad u||_2^2, l2q = int |u|^{2q}
    residual: float
    bracket_log: list = field(default_factory=list, repr=False)

    def export_text(self, path):
        np.savetxt(path, np.column_stack([self.r, self.u]), header="r u(r)")

    def to_dict(self):
        return {
            "family": self.family,
            "q": self.q,
            "d": self.d,
            "u0": self.u0,
            "support_radius": None if np.isinf(self.support_radius) else self.support_radius,
            "norms": dict(self.norms),
            "residual": self.residual,
            "r": self.r.tolist(),
            "u": self.u.tolist(),
        }


def _angular(d):
    return sphere_area(d)


# ---------------------------------------------------------------------------
# closed form in d = 1 (standard family)
# ---------------------------------------------------------------------------


def soliton_1d(q, rmax=30.0, h=5e-3):
    """The d=1 decaying solution u(x) = [q sech^2((q-1)x)]^{1/(2(q-1))}.

    Sampled on a uniform mesh with norms from adaptive quadrature of the
    closed form; serves as the oracle for shoot_ground_state in d = 1.
    """
    if not q > 1.0:
        raise DomainError("soliton_1d needs q > 1")
    a = q - 1.0
    expo = 1.0 / (2.0 * a)

    def u_of(x):
        # q^expo * sech(a x)^{2 expo}, evaluated in log form to avoid overflow
        ax = np.abs(a * x)
        log_sech = -ax + np.log(2.0) - np.log1p(np.exp(-2.0 * ax))
        return q**expo * np.exp(2.0 * expo * log_sech)

    def du_of(x):
        return -u_of(x) * np.tanh(a * x)

    x = np.arange(0.0, rmax + 0.5 * h, h)
    u = u_of(x)
    du = du_of(x)
    l2 = 2.0 * quad(lambda t: u_of(t) ** 2, 0.0, np.inf, epsabs=0.0, epsrel=1e-12)[0]
    gr = 2.0 * quad(lambda t: du_of(t) ** 2, 0.0, np.inf, epsabs=0.0, epsrel=1e-12)[0]
    l2q = 2.0 * quad(lambda t: u_of(t) ** (2.0 * q), 0.0, np.inf, epsabs=0.0, epsrel=1e-12)[0]
    gs = GroundState(
        family="standard",
        q=float(q),
        d=1,
        r=x,
        u=u,
        du=du,
        u0=float(q**expo),
        support_radius=np.inf,
        norms={"l2": float(l2), "grad_l2": float(gr), "l2q": float(l2q)},
        residual=0.0,
        bracket_log=[("closed-form", float(q**expo))],
    )
    gs.residual = el_residual(gs)
    return gs


# ---------------------------------------------------------------------------
# radial shooting
# ---------------------------------------------------------------------------


def _find_bracket(d, p, dual, h, rmax, floor, b_max):
    """Geometric scan for an (undershoot, overshoot) pair of u(0) values."""
    log = []
    b_lo = None
    b = 1.0 + 1e-3
    while b <= b_max:
        status = shoot_classify(b, d, p, dual, h, rmax, floor)
        log.append((float(b), int(status)))
        if status < 0:
            b_lo = b
        elif b_lo is not None:
            return b_lo, b, log
        else:
            # overshoot before any undershoot: refine downward
            b_hi = b
            b = 0.5 * (1.0 + b)
            for _ in range(60):
                status = shoot_classify(b, d, p, dual, h, rmax, floor)
                log.append((float(b), int(status)))
                if status < 0:
                    return b, b_hi, log
                b_hi = b
                b = 0.5 * (1.0 + b)
            raise NumericError("no undershoot found above u(0)=1")
        b = 1.0 + 2.0 * (b - 1.0)
    raise NumericError(f"shooting bracket not found for u(0) up to {b_max}")


def shoot_ground_state(q, d, h=None, rmax=40.0, floor=1e-12, b_max=512.0, save_stride=None):
    """Radial ground state by bisection shooting on u(0).

    standard (q > 1, with 2q < 2d/(d-2) when d >= 3): homoclinic-to-zero
    target; dual (0 < q < 1): double-zero free-boundary target.  Bisection
    uses the monotone overshoot/undershoot criterion with a 200-step cap;
    integration stops at u < ``floor`` (the sublinear dual nonlinearity is
    non-Lipschitz at u = 0, so integrating past the zero is meaningless).

    Returns the profile on the saved mesh, the norm integrals accumulated
    by the integrator, the bracket log, and the finite-difference residual
    of the Euler-Lagrange equation.
    """
    if q <= 0.0 or q == 1.0:
        raise DomainError("q must be positive and different from 1")
    dual = 0 if q > 1.0 else 1
    if not dual and d >= 3 and not 2.0 * q < 2.0 * d / (d - 2.0):
        raise DomainError(f"supercritical exponent: 2q = {2*q} >= 2d/(d-2)")
    p = 2.0 * q - 1.0
    if h is None:
        h = 5e-4 if d == 1 else 1e-3
    last = None
    for _ in range(3):
        gs = _shoot_once(q, d, p, dual, h, rmax, floor, b_max, save_stride)
        if gs.residual <= 1e-8:
            return gs
        last, h = gs, h / 2.0  # refine and retry
    raise NumericError(f"EL residual {last.residual:.2e} above 1e-8 after refinement")


def _shoot_once(q, d, p, dual, h, rmax, floor, b_max, save_stride):
    if save_stride is None:
        # keep the saved mesh at ~1e-3 so the residual stencils stay accurate
        save_stride = max(1, int(round(1e-3 / h)))

    b_lo, b_hi, log = _find_bracket(d, p, dual, h, rmax, floor, b_max)
    converged = False
    for _ in range(BISECTION_CAP):
        mid = 0.5 * (b_lo + b_hi)
        status = shoot_classify(mid, d, p, dual, h, rmax, floor)
        log.append((float(mid), int(status)))
        if status >= 0:
            b_hi = mid
        else:
            b_lo = mid
        if b_hi - b_lo <= 1e-15 * b_hi:
            converged = True
            break
    if not converged and b_hi - b_lo > 1e-12 * b_hi:
        raise NumericError("u(0) bisection did not converge within the 200-step cap")
    b = 0.5 * (b_lo + b_hi)

    npts, rs, us, dus, il2, igr, iq, r_stop = shoot_profile(
        b, d, p, dual, h, rmax, floor, save_stride
    )
    if npts < 16:
        raise NumericError("shooting profile collapsed; refine the step size")

    if dual:
        support = float(r_stop)
    else:
        support = np.inf
        # trim the diverging branch past the matching point
        imin = int(np.argmin(us))
        rs, us, dus = rs[: imin + 1], us[: imin + 1], dus[: imin + 1]
    if np.any(np.diff(us) > 1e-9 * us[0]):
        raise NumericError("non-monotone profile: solver failure")

    ang = _angular(d)
    gs = GroundState(
        family="dual" if dual else "standard",
        q=float(q),
        d=int(d),
        r=rs,
        u=us,
        du=dus,
        u0=float(b),
        support_radius=support,
        norms={"l2": float(ang * il2), "grad_l2": float(ang * igr), "l2q": float(ang * iq)},
        residual=0.0,
        bracket_log=log,
    )
    gs.residual = el_residual(gs)
    return gs


def el_residual(gs: GroundState, exclude_touchdown=0.1):
    """Max-norm finite-difference residual of the EL equation on the mesh.

    Fourth-order central stencils on the uniformly spaced part of the
    profile.  For the dual family a band of width ``exclude_touchdown``
    before the free boundary is excluded: u ~ (R-r)^{1/(1-q)} there, so
    high derivatives blow up and finite differences are meaningless, while
    the integrator's local power-law handling is validated separately.
    """
    r, u = gs.r, gs.u
    n = len(r)
    if n < 16:
        return np.nan
    hs = np.diff(r)
    H = hs[len(hs) // 2]
    good = np.abs(hs - H) <= 1e-9 * H
    i0 = len(hs) // 2
    while i0 > 0 and good[i0 - 1]:
        i0 -= 1
    i1 = len(hs) // 2
    while i1 < len(hs) - 1 and good[i1 + 1]:
        i1 += 1
    if i1 - i0 < 8:
        return np.nan
    q, d = gs.q, gs.d
    p = 2.0 * q - 1.0
    i = np.arange(i0 + 2, i1 - 1)
    upp = (-u[i + 2] + 16.0 * u[i + 1] - 30.0 * u[i] + 16.0 * u[i - 1] - u[i - 2]) / (12.0 * H * H)
    up = (-u[i + 2] + 8.0 * u[i + 1] - 8.0 * u[i - 1] + u[i - 2]) / (12.0 * H)
    uu = u[i]
    if gs.family == "dual":
        rhs = np.where(uu > 0.0, uu**p, 0.0) - uu
    else:
        rhs = uu - uu**p
    res = upp - rhs
    if d > 1:
        res += (d - 1.0) / r[i] * up
    keep = np.ones(len(i), dtype=bool)
    if gs.family == "dual":
        keep &= gs.support_radius - r[i] >= exclude_touchdown
        keep &= uu > 1e-9
    else:
        keep &= uu > 1e-7  # below this the e^{-r} tail is pure roundoff
    if not np.any(keep):
        return np.nan
    return float(np.max(np.abs(res[keep])))


# ---------------------------------------------------------------------------
# Gagliardo-Nirenberg constants
# ---------------------------------------------------------------------------


def _gn_q_standard(gamma, d):
    if not gamma > max(0.0, 1.0 - d / 2.0):
        raise DomainError("standard family needs gamma > max(0, 1-d/2)")
    return (2.0 * gamma + d) / (2.0 * gamma + d - 2.0)


def _gn_q_dual(gamma, d):
    if not gamma > d / 2.0:
        raise DomainError("dual family needs gamma > d/2")
    return (2.0 * gamma - d) / (2.0 * (gamma + 1.0) - d)


def quotient_standard(norms, gamma, d, q):
    theta = d / (2.0 * gamma + d)
    return norms["grad_l2"] ** (theta / 2.0) * norms["l2"] ** ((1.0 - theta) / 2.0) / norms["l2q"] ** (1.0 / (2.0 * q))


def quotient_dual(norms, gamma, d, q):
    a = d / (2.0 * gamma)
    return norms["grad_l2"] ** (a / 2.0) * norms["l2q"] ** ((1.0 - a) / (2.0 * q)) / norms["l2"] ** 0.5


def grid_norms(r, u, d, q):
    """Trapezoid norms of a sampled radial profile (forward-difference gradient).

    Deliberately exact under the rescalings r -> r/lambda and u -> c u, so
    the scale-invariance checks probe the exponent algebra, not quadrature.
    """
    w = r ** (d - 1.0) if d > 1 else np.ones_like(r)
    ang = _angular(d)
    du = np.diff(u) / np.diff(r)
    rmid = 0.5 * (r[1:] + r[:-1])
    wmid = rmid ** (d - 1.0) if d > 1 else np.ones_like(rmid)
    return {
        "l2": float(ang * np.trapezoid(u * u * w, r)),
        "grad_l2": float(ang * np.sum(du * du * wmid * np.diff(r))),
        "l2q": float(ang * np.trapezoid(np.abs(u) ** (2.0 * q) * w, r)),
    }


def _check_scale_invariance(state: GroundState, gamma, quotient, q, tol=1e-8):
    base = quotient(grid_norms(state.r, state.u, state.d, q), gamma, state.d, q)
    for lam in (0.5, 2.0, 5.0):
        nrm = grid_norms(state.r / lam, state.u, state.d, q)
        val = quotient(nrm, gamma, state.d, q)
        if abs(val - base) > tol * abs(base):
            raise ConsistencyError(f"scale invariance violated at lambda={lam}", first=base, second=val)
    for c in (0.5, 3.0):
        nrm = grid_norms(state.r, c * state.u, state.d, q)
        val = quotient(nrm, gamma, state.d, q)
        if abs(val - base) > tol * abs(base):
            raise ConsistencyError(f"homogeneity violated at c={c}", first=base, second=val)


def gn_constant_standard(gamma, d, state=None):
    """Optimal constant of ||grad u||^theta ||u||^{1-theta} >= C ||u||_{2q},
    theta = d/(2 gamma + d), evaluated at the computed ground state."""
    q = _gn_q_standard(gamma, d)
    if state is None:
        state = soliton_1d(q) if d == 1 else shoot_ground_state(q, d)
    _check_scale_invariance(state, gamma, quotient_standard, q)
    return float(quotient_standard(state.norms, gamma, d, q))


def gn_constant_dual(gamma, d, state=None):
    """Optimal constant of the compact-support family, evaluated at the
    shooting ground state: ||grad u||^{d/2g} (int u^{2q})^{(1/2q)(1-d/2g)} / ||u||_2."""
    q = _gn_q_dual(gamma, d)
    if state is None:
        state = shoot_ground_state(q, d)
    _check_scale_invariance(state, gamma, quotient_dual, q)
    return float(quotient_dual(state.norms, gamma, d, q))


# ---------------------------------------------------------------------------
# optimal potentials and the one-bound-state constants
# ---------------------------------------------------------------------------


def optimal_potential(state: GroundState, n_samples=4001):
    """The induced optimal potential V_u on a uniform sampling mesh.

    standard: V_u = -u^{2(q-1)} on the whole line/space (negative well).
    dual:     V_u = u^{2(q-1)} inside the support (blows up like
              (R-r)^{-2} at the free boundary), +infinity outside; returned
              as a Dirichlet well of radius R.
    """
    q, d = state.q, state.d
    expo = 2.0 * (q - 1.0)
    if state.family == "standard":
        rmax = state.r[-1]
        r = np.linspace(0.0, rmax, n_samples)
        u = np.interp(r, state.r, state.u)
        vals = -np.abs(u) ** expo
        if d == 1:
            x = np.concatenate([-r[::-1], r[1:]])
            v = np.concatenate([vals[::-1], vals[1:]])
            return Potential.sampled(x, v, d=1)
        return Potential.sampled(r, vals, d=d)
    R = state.support_radius
    r = np.linspace(0.0, R * (1.0 - 1e-9), n_samples)
    u = np.interp(r, state.r, state.u)
    u = np.maximum(u, state.u[-1] if state.u[-1] > 0 else 1e-12)
    vals = u**expo  # expo < 0: wall at the free boundary
    if d == 1:
        # symmetric profile on (-R, R); the sample ends carry the Dirichlet wall
        x = np.concatenate([-r[::-1], r[1:]])
        v = np.concatenate([vals[::-1], vals[1:]])
        return Potential.sampled(x, v, d=1)
    return Potential.dirichlet_well(R, r, vals, d=d)


@dataclass
class OneBoundStateReport:
    family: str
    gamma: float
    d: int
    direct: float
    via_kappa: float
    readings: dict
    lam1: float
    lam1_expected: float
    gn: float
    kappa1: float
    kappa2: float
    q: float
    potential_integral: float

    def to_dict(self):
        return self.__dict__.copy()


def one_bound_state_constant(family, gamma, d, state=None, n_grid=6000, rel_tol=1e-3):
    """Two independent routes to the one-bound-state constant.

    ``direct``: evaluate the trace quotient at the optimal pair (u, V_u) --
    standard: |lambda_1(V_u)|^gamma / int |V_u|^{gamma+d/2}, dual:
    [lambda_1(V_u)]^{-gamma} / int V_u^{d/2-gamma} -- with lambda_1 from the
    finite-difference eigensolver on the induced potential.  The potential
    integral collapses to int |u|^{2q} by the proportionality relation, and
    is taken from the integrator's norm accumulation.

    ``via_kappa``: kappa_1 C_GN^{-kappa_2} in the proof-consistent reading
    (raised to gamma for the standard family); both readings are attached.

    Raises ConsistencyError when the two routes disagree beyond ``rel_tol``.
    """
    if family == "standard":
        q = _gn_q_standard(gamma, d)
        kp = kappa_standard(gamma, d)
    elif family == "dual":
        q = _gn_q_dual(gamma, d)
        kp = kappa_dual(gamma, d)
    else:
        raise DomainError(f"unknown family {family!r}")
    if state is None:
        state = soliton_1d(q) if (d == 1 and family == "standard") else shoot_ground_state(q, d)

    v = optimal_potential(state)
    if d == 1:
        spec = dirichlet_solve(v, 1, n_grid)
    else:
        spec = radial_solve(v, d, 1, n_grid, rmax=float(v.grid[-1]))
    lam1 = float(spec.eigenvalues[0])

    # int |V_u|^{gamma + d/2} (standard) or int V_u^{d/2-gamma} (dual) both
    # reduce to the |u|^{2q} norm under V_u = +-|u|^{2(q-1)}
    pot_integral = state.norms["l2q"]

    if family == "standard":
        direct = abs(lam1) ** gamma / pot_integral
        lam_expected = -1.0
        gn = quotient_standard(state.norms, gamma, d, q)
    else:
        direct = lam1 ** (-gamma) / pot_integral
        lam_expected = 1.0
        gn = quotient_dual(state.norms, gamma, d, q)

    via = one_bound_state_via_kappa(family, gamma, d, gn)
    if abs(direct - via) > rel_tol * abs(via):
        raise ConsistencyError(
            f"one-bound-state routes disagree: direct={direct}, via_kappa={via}",
            first=direct,
            second=via,
        )
    return OneBoundStateReport(
        family=family,
        gamma=float(gamma),
        d=int(d),
        direct=float(direct),
        via_kappa=float(via),
        readings=one_bound_state_readings(family, gamma, d, gn),
        lam1=lam1,
        lam1_expected=lam_expected,
        gn=float(gn),
        kappa1=kp.kappa1,
        kappa2=kp.kappa2,
        q=float(q),
        potential_integral=float(pot_integral),
    )


# ---------------------------------------------------------------------------
# the scale-invariant trace quotients R(u, V) of the two families
# ---------------------------------------------------------------------------


def ratio_standard(r, u, vvals, gamma, d):
    """R(u,V) = -(int V u^2 + int |grad u|^2) / (int u^2 ||V||_{g+d/2}^{1+d/2g});
    sup over (u, V <= 0) equals [C_LT^(1)]^{1/gamma}."""
    nrm = grid_norms(r, u, d, q=1.0)
    w = r ** (d - 1.0) if d > 1 else np.ones_like(r)
    ang = _angular(d)
    vu2 = ang * np.trapezoid(vvals * u * u * w, r)
    vnorm = (ang * np.trapezoid(np.abs(vvals) ** (gamma + d / 2.0) * w, r)) ** (1.0 / (gamma + d / 2.0))
    return float(-(vu2 + nrm["grad_l2"]) / (nrm["l2"] * vnorm ** (1.0 + d / (2.0 * gamma))))


def ratio_dual(r, u, vvals, gamma, d):
    """R(u,V) = int u^2 / [(int |grad u|^2 + int V u^2) (int V^{d/2-g})^{1/g}];
    sup over (u, V >= 0) equals [C^(1)]^{1/gamma}.

    Note the V-integral factor sits in the denominator: that placement is
    forced by scale invariance under (u, V) -> (u(lam .), lam^2 V(lam .))
    and by sup R = [C^(1)]^{1/gamma}.
    """
    nrm = grid_norms(r, u, d, q=1.0)
    w = r ** (d - 1.0) if d > 1 else np.ones_like(r)
    ang = _angular(d)
    vu2 = ang * np.trapezoid(vvals * u * u * w, r)
    vint = ang * np.trapezoid(np.where(vvals > 0, vvals, np.inf) ** (d / 2.0 - gamma) * w, r)
    return float(nrm["l2"] / ((nrm["grad_l2"] + vu2) * vint ** (1.0 / gamma)))
