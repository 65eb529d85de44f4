"""Closed-form constants: Gamma ratios, the sharp semiclassical constant,
kappa pairs for the one-bound-state relations, and interpolation constants.

All functions are pure; identical inputs give bit-identical outputs.  The
log-Gamma evaluation is the fixed Lanczos(g=7) kernel so that regression
fixtures stay stable.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, MissingInputError
from .kernels import gamma_ln_scalar

_LOG_4PI = float(np.log(4.0 * np.pi))


def gamma_ln(x: float) -> float:
    """ln Gamma(x) for x > 0 (relative accuracy ~1e-13 on (0, 170])."""
    if not x > 0.0:
        raise DomainError(f"gamma_ln requires x > 0, got {x}")
    return float(gamma_ln_scalar(float(x)))


@dataclass(frozen=True)
class SemiclassicalParams:
    """Exponent gamma, dimension d, and the physical constants hbar, m."""

    gamma: float
    d: int
    hbar: float = 1.0
    mass: float = 0.5

    def __post_init__(self):
        if self.d < 1 or int(self.d) != self.d:
            raise DomainError(f"dimension must be a positive integer, got {self.d}")
        if self.hbar <= 0.0 or self.mass <= 0.0:
            raise DomainError("hbar and mass must be strictly positive")


@dataclass(frozen=True)
class KappaPair:
    """The (kappa1, kappa2) pair of a one-bound-state relation.

    For the dual family ``q`` is the Lebesgue half-exponent in (0, 1) and
    kappa2 = 2*gamma exactly; for the standard family q > 1 and
    kappa2 = 2 + d/gamma exactly.
    """

    kappa1: float
    kappa2: float
    q: float
    family: str


def sharp_constant(gamma, d, hbar=1.0, mass=0.5):
    """Sharp semiclassical constant (m/(2 pi hbar^2))^{d/2} Gamma(g-d/2)/Gamma(g).

    With hbar=1, m=1/2 this is Gamma(gamma-d/2) / ((4 pi)^{d/2} Gamma(gamma)),
    the coefficient of the inverse-power trace bound for confining potentials.
    Requires gamma > d/2 (Gamma pole at gamma = d/2).
    """
    p = gamma if isinstance(gamma, SemiclassicalParams) else SemiclassicalParams(gamma, d, hbar, mass)
    if not p.gamma > p.d / 2.0:
        raise DomainError(f"sharp_constant requires gamma > d/2, got gamma={p.gamma}, d={p.d}")
    log_c = (
        gamma_ln(p.gamma - p.d / 2.0)
        - gamma_ln(p.gamma)
        + 0.5 * p.d * np.log(p.mass / (2.0 * np.pi * p.hbar**2))
    )
    return float(np.exp(log_c))


def semiclassical_c_lt(gamma, d):
    """Semiclassical value of the standard Lieb-Thirring constant.

    Gamma(gamma+1) / ((4 pi)^{d/2} Gamma(gamma+1+d/2)).  The sharp constant
    itself is open in general; this preset is the usual reference value (and
    is sharp for gamma >= 3/2).
    """
    if gamma <= 0:
        raise DomainError("semiclassical_c_lt requires gamma > 0")
    return float(np.exp(gamma_ln(gamma + 1.0) - gamma_ln(gamma + 1.0 + d / 2.0) - 0.5 * d * _LOG_4PI))


def kappa_standard(gamma, d):
    """kappa1 = (2g/d) (d/(2g+d))^{1+d/(2g)}, kappa2 = 2 + d/g; q = (2g+d)/(2g+d-2)."""
    if not gamma > max(0.0, 1.0 - d / 2.0):
        raise DomainError(f"kappa_standard requires gamma > max(0, 1-d/2), got {gamma}")
    g = float(gamma)
    k1 = (2.0 * g / d) * (d / (2.0 * g + d)) ** (1.0 + d / (2.0 * g))
    k2 = 2.0 + d / g
    q = (2.0 * g + d) / (2.0 * g + d - 2.0)
    return KappaPair(kappa1=float(k1), kappa2=float(k2), q=float(q), family="standard")


def kappa_dual(gamma, d):
    """Dual-family pair: q = (2g-d)/(2(g+1)-d) in (0,1), kappa2 = 2g,
    kappa1 = (2q)^{g-d/2} (d(1-q))^{d/2} / (d(1-q)+2q)^g.
    """
    if not gamma > d / 2.0:
        raise DomainError(f"kappa_dual requires gamma > d/2, got gamma={gamma}, d={d}")
    g = float(gamma)
    q = (2.0 * g - d) / (2.0 * (g + 1.0) - d)
    k1 = (2.0 * q) ** (g - d / 2.0) * (d * (1.0 - q)) ** (d / 2.0) / (d * (1.0 - q) + 2.0 * q) ** g
    return KappaPair(kappa1=float(k1), kappa2=float(2.0 * g), q=float(q), family="dual")


def dual_exponent_identity(gamma, d):
    """Both sides of 2q/(d(1-q)+2q) = 1 - d/(2 gamma) for the dual pair."""
    q = kappa_dual(gamma, d).q
    return 2.0 * q / (d * (1.0 - q) + 2.0 * q), 1.0 - d / (2.0 * gamma)


def one_bound_state_via_kappa(family, gamma, d, gn_value):
    """One-bound-state constant from a Gagliardo-Nirenberg constant.

    standard: [C^(1)]^{1/gamma} = kappa1 * C_GN^{-kappa2}, i.e. the value
    returned is (kappa1 * gn^{-kappa2})^gamma.  This is the proof-consistent
    reading of the displayed relation; the literal reading (without the
    1/gamma power) is inconsistent with the optimization that produces the
    kappas and with the d=1, gamma=3/2 closed form.  Use
    ``one_bound_state_readings`` to see both.

    dual: C^(1) = kappa1 * C*_GN^{-kappa2} directly (here statement and
    proof agree).
    """
    if gn_value <= 0.0:
        raise DomainError("gn_value must be positive")
    if family == "standard":
        kp = kappa_standard(gamma, d)
        return float((kp.kappa1 * gn_value ** (-kp.kappa2)) ** gamma)
    if family == "dual":
        kp = kappa_dual(gamma, d)
        return float(kp.kappa1 * gn_value ** (-kp.kappa2))
    raise DomainError(f"unknown family {family!r}")


def one_bound_state_readings(family, gamma, d, gn_value):
    """dict with both readings of the kappa relation (see above)."""
    if family == "standard":
        kp = kappa_standard(gamma, d)
        base = kp.kappa1 * gn_value ** (-kp.kappa2)
        return {"proof_consistent": float(base**gamma), "literal": float(base)}
    val = one_bound_state_via_kappa(family, gamma, d, gn_value)
    return {"proof_consistent": val, "literal": val}


def interp_constant(family, gamma, d, c_lt=None):
    """Constant K of the system interpolation inequalities.

    dual:     K^{-1} = q [C(gamma) (gamma - d/2)]^{q-1} with q in (0,1) and
              C(gamma) the sharp constant at hbar=1, m=1/2.
    standard: K^{-1} = q [c_lt (gamma + d/2)]^{q-1} with q > 1; the sharp
              standard Lieb-Thirring constant is an open problem, so c_lt
              must be supplied by the caller (e.g. ``semiclassical_c_lt``).
    """
    if family == "dual":
        if not gamma > d / 2.0:
            raise DomainError("dual interp_constant requires gamma > d/2")
        q = (2.0 * gamma - d) / (2.0 * (gamma + 1.0) - d)
        c = sharp_constant(gamma, d)
        k_inv = q * (c * (gamma - d / 2.0)) ** (q - 1.0)
        return float(1.0 / k_inv)
    if family == "standard":
        if c_lt is None:
            raise MissingInputError(
                "standard interp_constant needs c_lt; the sharp C_LT(gamma) is open "
                "(semiclassical_c_lt gives the usual preset)"
            )
        if not gamma > max(0.0, 1.0 - d / 2.0):
            raise DomainError("standard interp_constant requires gamma > max(0, 1-d/2)")
        q = (2.0 * gamma + d) / (2.0 * gamma + d - 2.0)
        k_inv = q * (c_lt * (gamma + d / 2.0)) ** (q - 1.0)
        return float(1.0 / k_inv)
    raise DomainError(f"unknown family {family!r}")
