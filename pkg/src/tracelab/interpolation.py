"""Legendre-type constructions turning trace inequalities into interpolation
inequalities for systems of orthonormal functions with occupation numbers:

    beta(s) = -int_0^s (F')^{-1}(-t) dt,     H(s) = int_s^0 (G')^{-1}(-t) dt,

    K[nu, psi] + sum_i beta(nu_i)  >=  int H(rho),   rho = sum nu_i |psi_i|^2.

Closed forms: power families give beta = +-c_m nu^m and H = +-K s^q (the
dual-family H is negative, H(s) = -K s^q, consistent with dH/ds =
-(G')^{-1}(-s)); the exponential family gives the entropy pair
beta = nu log nu - nu and H(s) = s log s - s + (d/2) log(4 pi) s, i.e. a
logarithmic Sobolev inequality for systems once int rho = sum nu_i is used.

The one-function sharp variant of the log-Sobolev pair (built on the
one-bound-state constant (2/e)^d instead of the full system constant) is
exposed separately: it is an equality at the optimal-width Gaussian but is
NOT valid for systems.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq

from .constants import interp_constant, sharp_constant
from .errors import DomainError, InputError, MissingInputError
from .mixedstate import MixedState
from .quadrature import sphere_area
from .riesz import WeightPair, weight_pair

_LOG_4PI = float(np.log(4.0 * np.pi))
_RHO_FLOOR = 1e-300  # 0 log 0 = 0 on vacuum regions


@dataclass(frozen=True)
class LegendrePair:
    """(beta, H) built from a weight pair, with closed-form tag if known.

    closed_form is one of "power_standard", "power_dual", "log_sobolev",
    "log_sobolev_sharp" or None (numeric construction only).  params carries
    the constants of the closed form (K and q for the power families).
    """

    family: str
    d: int
    gamma: float | None
    beta: Callable = field(repr=False)
    H: Callable = field(repr=False)
    closed_form: str | None = None
    params: dict = field(default_factory=dict)
    system_valid: bool = True
    source: WeightPair | None = field(default=None, repr=False)


# ---------------------------------------------------------------------------
# numeric Legendre constructions
# ---------------------------------------------------------------------------


def _invert_monotone(f, target, domain):
    """Solve f(x) = target for strictly decreasing f on the open interval."""
    lo_open, hi_open = domain
    a = -1.0 if np.isinf(lo_open) else lo_open + 1e-13 * (1.0 + abs(lo_open))
    b = 1.0 if np.isinf(hi_open) else hi_open - 1e-13 * (1.0 + abs(hi_open))
    if not np.isinf(lo_open) and a >= b:
        a = lo_open + 0.5 * (b - lo_open)
    for _ in range(300):
        if f(a) >= target:
            break
        a = 2.0 * a if np.isinf(lo_open) and a < 0 else (-1.0 if np.isinf(lo_open) else lo_open + (a - lo_open) / 8.0)
    else:
        raise DomainError("inverse out of bracket; F'/G' not invertible at this value")
    for _ in range(300):
        if f(b) <= target:
            break
        b = 2.0 * b if np.isinf(hi_open) and b > 0 else (1.0 if np.isinf(hi_open) else hi_open - (hi_open - b) / 8.0)
    else:
        raise DomainError("inverse out of bracket; F'/G' not invertible at this value")
    return brentq(lambda x: f(x) - target, a, b, xtol=1e-15, rtol=8.9e-16)


def beta_from_F(w: WeightPair):
    """beta(nu) = -int_0^nu (F')^{-1}(-t) dt by inversion + quadrature."""

    def sigma_inv(t):
        # sigma = -F' is positive decreasing; solve sigma(s) = t
        return _invert_monotone(lambda s: -w.F_prime(s), t, w.F_domain)

    def beta(nu):
        if np.ndim(nu) > 0:
            return np.array([beta(float(x)) for x in np.asarray(nu)])
        nu = float(nu)
        if nu == 0.0:
            return 0.0
        val, _ = quad(sigma_inv, 0.0, nu, epsabs=1e-13, epsrel=1e-10, limit=300)
        return -val

    return beta


def H_from_G(w: WeightPair):
    """H(s) = int_s^0 (G')^{-1}(-t) dt; needs (G')^{-1} integrable at 0+."""

    def ginv(t):
        return _invert_monotone(lambda s: -w.G_prime(s), t, w.G_domain)

    def H(s):
        if np.ndim(s) > 0:
            return np.array([H(float(x)) for x in np.asarray(s)])
        s = float(s)
        if s == 0.0:
            return 0.0
        val, err = quad(ginv, 0.0, s, epsabs=1e-13, epsrel=1e-10, limit=300)
        if not np.isfinite(val):
            raise DomainError("(G')^{-1} is not integrable near 0")
        return -val

    return H


# ---------------------------------------------------------------------------
# closed-form pairs
# ---------------------------------------------------------------------------


def legendre_pair(family, gamma=None, d=1, c_lt=None) -> LegendrePair:
    """Build the (beta, H) pair for one of the closed-form families.

    "power_dual":  beta = -c_m nu^m (m = g/(g+1)), H(s) = -K s^q with
                   q = (2g-d)/(2(g+1)-d) and K from interp_constant.
    "power_standard": beta = c_m nu^m (m = g/(g-1)), H(s) = K s^q with
                   q = (2g+d)/(2g+d-2); the open constant C_LT(gamma) must
                   be supplied, results are conditional on it.
    "log_sobolev": beta = nu log nu - nu,
                   H(s) = s log s - s + (d/2) log(4 pi) s  (system constant).
    "log_sobolev_sharp": same beta, H shifted by d log(e/2) s; equality case
                   of the one-function inequality, not valid for systems.
    """
    if family == "power_dual":
        if gamma is None or not gamma > d / 2.0:
            raise DomainError("power_dual needs gamma > d/2")
        m = gamma / (gamma + 1.0)
        c_m = (1.0 - m) ** (m - 1.0) * m ** (-m)
        q = (2.0 * gamma - d) / (2.0 * (gamma + 1.0) - d)
        K = interp_constant("dual", gamma, d)
        return LegendrePair(
            family=family,
            d=d,
            gamma=float(gamma),
            beta=lambda nu: -c_m * np.asarray(nu, dtype=float) ** m,
            H=lambda s: -K * np.asarray(s, dtype=float) ** q,
            closed_form="power_dual",
            params={"K": K, "q": q, "m": m, "c_m": c_m},
            source=weight_pair("power", gamma, d),
        )
    if family == "power_standard":
        if gamma is None or not gamma > max(0.0, 1.0 - d / 2.0):
            raise DomainError("power_standard needs gamma > max(0, 1-d/2)")
        if c_lt is None:
            raise MissingInputError("power_standard needs the caller-supplied c_lt (open constant)")
        m = gamma / (gamma - 1.0)
        c_m = (m - 1.0) ** (m - 1.0) * m ** (-m)
        q = (2.0 * gamma + d) / (2.0 * gamma + d - 2.0)
        K = interp_constant("standard", gamma, d, c_lt=c_lt)
        g_exp = gamma + d / 2.0
        wp = WeightPair(
            family="power_standard",
            d=d,
            gamma=float(gamma),
            F=lambda s: np.maximum(-s, 0.0) ** gamma,
            G=lambda s: c_lt * np.abs(s) ** g_exp,
            F_prime=lambda s: -gamma * np.maximum(-s, 1e-300) ** (gamma - 1.0),
            G_prime=lambda s: -c_lt * g_exp * np.abs(s) ** (g_exp - 1.0),
            f_descriptor="standard Lieb-Thirring side (negative spectra)",
            F_domain=(-np.inf, 0.0),
            G_domain=(-np.inf, 0.0),
        )
        return LegendrePair(
            family=family,
            d=d,
            gamma=float(gamma),
            beta=lambda nu: c_m * np.asarray(nu, dtype=float) ** m,
            H=lambda s: K * np.asarray(s, dtype=float) ** q,
            closed_form="power_standard",
            params={"K": K, "q": q, "m": m, "c_m": c_m, "c_lt": c_lt, "conditional_on_c_lt": True},
            source=wp,
        )
    if family in ("log_sobolev", "log_sobolev_sharp"):
        sharp = family.endswith("sharp")
        shift = 0.5 * d * _LOG_4PI + (d * np.log(np.e / 2.0) if sharp else 0.0)

        def beta(nu):
            nu = np.asarray(nu, dtype=float)
            return np.where(nu > 0.0, nu * np.log(np.maximum(nu, _RHO_FLOOR)) - nu, 0.0)

        def H(s):
            s = np.asarray(s, dtype=float)
            return np.where(s > 0.0, s * np.log(np.maximum(s, _RHO_FLOOR)) - s + shift * s, 0.0)

        return LegendrePair(
            family=family,
            d=d,
            gamma=None,
            beta=beta,
            H=H,
            closed_form=family,
            params={"shift": float(shift), "sharp_constant": (2.0 / np.e) ** d if sharp else 1.0},
            system_valid=not sharp,
            source=weight_pair("exponential", d=d),
        )
    raise DomainError(f"unknown LegendrePair family {family!r}")


# ---------------------------------------------------------------------------
# system interpolation check
# ---------------------------------------------------------------------------


def kinetic_energy(mesh, psi):
    """int |grad psi|^2 by a 4th-order central-difference gradient.

    Accurate to O(h^4) on smooth decaying states; used where the
    interpolation checks need quadrature-level accuracy rather than the
    discrete-Hamiltonian identity (see mixedstate.grid_energy for that).
    """
    h = float(mesh[1] - mesh[0])
    n = mesh.size
    g = np.zeros(n, dtype=complex)
    g[2:-2] = (-psi[4:] + 8.0 * psi[3:-1] - 8.0 * psi[1:-3] + psi[:-4]) / (12.0 * h)
    g[0] = (psi[1] - 0.0) / (2.0 * h)
    g[1] = (psi[2] - psi[0]) / (2.0 * h)
    g[-2] = (psi[-1] - psi[-3]) / (2.0 * h)
    g[-1] = (0.0 - psi[-2]) / (2.0 * h)
    return float(np.sum(np.abs(g) ** 2) * h)


@dataclass
class InterpReport:
    kinetic: float
    entropy: float
    rhs: float
    gap: float
    family: str
    mass: float

    def to_dict(self):
        return self.__dict__.copy()


def system_interp_check(state: MixedState, pair: LegendrePair, ortho_tol=1e-8) -> InterpReport:
    """K[nu,psi] + sum beta(nu_i) - int H(rho) for an orthonormal state.

    The gap must be >= -tolerance whenever the pair is system-valid.  For
    the sharp one-function log-Sobolev pair the inequality only holds for
    single-function states (it is an equality at the optimal Gaussian).
    """
    defect = state.orthonormality_defect()
    if defect > ortho_tol:
        raise InputError(f"state is not orthonormal (defect {defect:.2e})")
    if not pair.system_valid and np.count_nonzero(state.occupations) > 1:
        raise DomainError(f"{pair.family} is a one-function inequality; state has several occupied levels")
    h = state.h
    kin = float(
        sum(nu * kinetic_energy(state.mesh, psi) for nu, psi in zip(state.occupations, state.wavefunctions) if nu > 0)
    )
    ent = float(np.sum(pair.beta(state.occupations)))
    rho = state.density()
    rhs = float(np.sum(pair.H(rho)) * h)
    return InterpReport(
        kinetic=kin,
        entropy=ent,
        rhs=rhs,
        gap=kin + ent - rhs,
        family=pair.family,
        mass=float(np.sum(rho) * h),
    )


# ---------------------------------------------------------------------------
# scale-optimized (product) forms
# ---------------------------------------------------------------------------


def _golden_min(f, a, b, iters=200):
    phi = (np.sqrt(5.0) - 1.0) / 2.0
    x1 = b - phi * (b - a)
    x2 = a + phi * (b - a)
    f1, f2 = f(x1), f(x2)
    for _ in range(iters):
        if f1 > f2:
            a, x1, f1 = x1, x2, f2
            x2 = a + phi * (b - a)
            f2 = f(x2)
        else:
            b, x2, f2 = x2, x1, f1
            x1 = b - phi * (b - a)
            f1 = f(x1)
    return 0.5 * (x1 + x2), min(f1, f2)


@dataclass
class ScaledFormReport:
    family: str
    theta: float
    L: float
    lhs: float
    rhs: float
    gap: float
    lambda_opt: float
    scan_min: float
    scaled_at_opt: float

    def to_dict(self):
        return self.__dict__.copy()


def scaled_form_check(state: MixedState, family, gamma, d, c_lt=None) -> ScaledFormReport:
    """The product (scale-optimized) forms of the power corollaries.

    standard: K^theta (sum nu^m)^{1-theta} >= L int rho^q,
              theta = d/(2(gamma-1)+d);
    dual:     K^theta (int rho^q)^{1-theta} >= L sum nu^m,
              theta = d/(2(gamma+1)).

    L is obtained by carrying out the one-parameter scaling optimization of
    the unscaled inequality numerically; the report also carries the raw
    lambda-scan minimum so the equality 'scaled form at the lambda-optimum
    = unscaled minimum' can be asserted.
    """
    pair = legendre_pair(
        "power_dual" if family == "dual" else "power_standard", gamma, d, c_lt=c_lt
    )
    K_const, q, m, c_m = (pair.params[k] for k in ("K", "q", "m", "c_m"))
    h = state.h
    X = float(
        sum(nu * kinetic_energy(state.mesh, psi) for nu, psi in zip(state.occupations, state.wavefunctions) if nu > 0)
    )
    rho = state.density()
    W = float(np.sum(rho**q) * h)
    Y = float(np.sum(state.occupations**m))

    if family == "standard":
        theta = d / (2.0 * (gamma - 1.0) + d)
        a = 4.0 * gamma / (2.0 * gamma + d)          # K scales as lambda^-a
        b = 2.0 * m * d / (2.0 * gamma + d)          # sum nu^m scales as lambda^b
        # min over lambda of the invariant-normalized unscaled left side
        def g(loglam):
            lam = np.exp(loglam)
            return (lam ** (-a) * X + lam**b * c_m * Y) / W

        loglam, scan_min = _golden_min(g, -12.0, 12.0)
        cab = (a / b) ** (b / (a + b)) + (b / a) ** (a / (a + b))
        L = K_const / (cab * c_m ** (1.0 - theta))
        lhs = X**theta * Y ** (1.0 - theta)
        rhs = L * W
        scaled_at_opt = cab * X**theta * (c_m * Y) ** (1.0 - theta) / W
    elif family == "dual":
        theta = d / (2.0 * (gamma + 1.0))
        a = 2.0
        b = d * (1.0 - q)

        def g(loglam):
            lam = np.exp(loglam)
            return (lam ** (-a) * X + lam**b * K_const * W) / Y

        loglam, scan_min = _golden_min(g, -12.0, 12.0)
        cab = (a / b) ** (b / (a + b)) + (b / a) ** (a / (a + b))
        L = c_m / (cab * K_const ** (1.0 - theta))
        lhs = X**theta * W ** (1.0 - theta)
        rhs = L * Y
        scaled_at_opt = cab * X**theta * (K_const * W) ** (1.0 - theta) / Y
    else:
        raise DomainError(f"unknown scaled family {family!r}")
    return ScaledFormReport(
        family=family,
        theta=float(theta),
        L=float(L),
        lhs=float(lhs),
        rhs=float(rhs),
        gap=float(lhs - rhs),
        lambda_opt=float(np.exp(loglam)),
        scan_min=float(scan_min),
        scaled_at_opt=float(scaled_at_opt),
    )


def log_sobolev_scaled_check(state: MixedState):
    """int rho log rho <= sum nu log nu + (d/2) log(e/(2 pi d) K/M) M, d = 1."""
    h = state.h
    d = 1
    K = float(
        sum(nu * kinetic_energy(state.mesh, psi) for nu, psi in zip(state.occupations, state.wavefunctions) if nu > 0)
    )
    rho = state.density()
    M = float(np.sum(rho) * h)
    ent_rho = float(np.sum(np.where(rho > 0, rho * np.log(np.maximum(rho, _RHO_FLOOR)), 0.0)) * h)
    nu = state.occupations
    ent_nu = float(np.sum(np.where(nu > 0, nu * np.log(np.maximum(nu, _RHO_FLOOR)), 0.0)))
    rhs = ent_nu + 0.5 * d * M * np.log(np.e / (2.0 * np.pi * d) * K / M)
    return {"lhs": ent_rho, "rhs": float(rhs), "gap": float(rhs - ent_rho), "kinetic": K, "mass": M}


# ---------------------------------------------------------------------------
# the one-function log-Sobolev constant (2/e)^d
# ---------------------------------------------------------------------------


def log_sobolev_constant_check(d, widths=(0.05, 8.0)):
    """Maximize e^{-E[phi, V_phi]} / ((4 pi)^{-d/2} int e^{-V_phi}) over
    L2-normalized Gaussians with V_phi = -log |phi|^2.

    The kinetic and entropy integrals are evaluated by adaptive quadrature
    on the radial profile; the maximum must equal (2/e)^d.
    """
    if d < 1:
        raise DomainError("d must be >= 1")
    area = sphere_area(d)

    def ratio_of(v):
        # phi = (2 pi v)^{-d/4} exp(-r^2/(4v)), normalization int phi^2 = 1
        lognorm = -0.25 * d * np.log(2.0 * np.pi * v)

        def phi2(r):
            return np.exp(2.0 * lognorm - r * r / (2.0 * v))

        kin, _ = quad(lambda r: (r / (2.0 * v)) ** 2 * phi2(r) * r ** (d - 1), 0.0, np.inf, epsabs=0.0, epsrel=1e-12)
        kin *= area
        ent, _ = quad(
            lambda r: phi2(r) * (2.0 * lognorm - r * r / (2.0 * v)) * r ** (d - 1), 0.0, np.inf, epsabs=0.0, epsrel=1e-12
        )
        ent *= area  # int phi^2 log phi^2
        # E[phi, V_phi] = K - int phi^2 log phi^2; denominator (4 pi)^{-d/2}
        return (4.0 * np.pi) ** (d / 2.0) * np.exp(-kin + ent)

    lv, fv = _golden_min(lambda lg: -ratio_of(np.exp(lg)), np.log(widths[0]), np.log(widths[1]))
    return {
        "d": d,
        "maximum": float(-fv),
        "expected": float((2.0 / np.e) ** d),
        "width_sq_opt": float(np.exp(lv)),
        "deviation": float(abs(-fv - (2.0 / np.e) ** d)),
    }


# ---------------------------------------------------------------------------
# randomized orthonormal corpus
# ---------------------------------------------------------------------------


def random_corpus_states(n_states, n_modes=6, seed=0, nu_max=None, mesh_half_width=10.0, n_grid=1200):
    """Seeded random orthonormal mixed states from mixed oscillator modes.

    Each state mixes the lowest oscillator eigenfunctions with a random
    orthogonal matrix (QR of a Gaussian matrix) and carries random
    nonincreasing occupations; the generator is recorded by the seed.
    """
    from .potentials import Potential
    from .spectra import dirichlet_eigensystem

    v = Potential.harmonic(1.0, 0.0, 1)
    x, h, _, psis = dirichlet_eigensystem(v, n_modes, n_grid, domain=(-mesh_half_width, mesh_half_width))
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(n_states):
        qmat, _ = np.linalg.qr(rng.standard_normal((n_modes, n_modes)))
        mixed = qmat @ psis
        nu = np.sort(rng.exponential(scale=1.0, size=n_modes))[::-1]
        if nu_max is not None:
            nu = nu_max * nu / (nu[0] * (1.0 + 1e-9))
        out.append(MixedState(x, nu, mixed))
    return out
