"""Potentials on R^d: closed forms (box, harmonic, power, Dirichlet well)
and grid-sampled profiles, plus the heat-bound right-hand side

    gt_rhs(V, t) = (4 pi t)^{-d/2} int e^{-t V(x)} dx.

Closed-form potentials are radial (the box is a product domain and only
enters through its exact volume).  Sampled potentials live on a strictly
increasing 1D or radial mesh with Dirichlet ends.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, InputError
from .quadrature import integrate_halfline, integrate_radial, sphere_area, trapezoid


@dataclass(frozen=True)
class Potential:
    """A potential with dimension and integrability metadata.

    kind is one of "box", "harmonic", "power", "dirichlet_well", "sampled".
    Closed-form parameters: box(eps), harmonic(A, B) for A^2 |x|^2 + B,
    power(c, p) for c |x|^p.  A dirichlet_well is +infinity outside radius R
    with a sampled profile inside; a sampled potential carries its own mesh.
    """

    kind: str
    d: int
    eps: float = 0.0
    A: float = 0.0
    B: float = 0.0
    c: float = 0.0
    p: float = 0.0
    R: float = 0.0
    grid: np.ndarray | None = field(default=None, repr=False)
    values: np.ndarray | None = field(default=None, repr=False)

    # --- constructors ------------------------------------------------------

    @classmethod
    def box(cls, eps, d=1):
        if eps <= 0.0:
            raise DomainError("box potential needs eps > 0")
        return cls(kind="box", d=int(d), eps=float(eps))

    @classmethod
    def harmonic(cls, A, B=0.0, d=1):
        if A <= 0.0:
            raise DomainError("harmonic potential needs A > 0")
        return cls(kind="harmonic", d=int(d), A=float(A), B=float(B))

    @classmethod
    def power(cls, c, p, d=1):
        if c <= 0.0 or p <= 0.0:
            raise DomainError("power potential needs c > 0 and p > 0")
        return cls(kind="power", d=int(d), c=float(c), p=float(p))

    @classmethod
    def dirichlet_well(cls, R, grid, values, d=1):
        grid = np.asarray(grid, dtype=float)
        values = np.asarray(values, dtype=float)
        _check_samples(grid, values)
        if R <= 0.0 or grid[-1] > R:
            raise DomainError("well radius must be positive and contain the sampled profile")
        return cls(kind="dirichlet_well", d=int(d), R=float(R), grid=grid, values=values)

    @classmethod
    def sampled(cls, grid, values, d=1):
        grid = np.asarray(grid, dtype=float)
        values = np.asarray(values, dtype=float)
        _check_samples(grid, values)
        return cls(kind="sampled", d=int(d), grid=grid, values=values)

    # --- evaluation --------------------------------------------------------

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        if self.kind == "harmonic":
            return self.A**2 * r**2 + self.B
        if self.kind == "power":
            return self.c * np.abs(r) ** self.p
        if self.kind in ("sampled", "dirichlet_well"):
            return np.interp(r, self.grid, self.values)
        if self.kind == "box":
            # 1 inside (0, pi/eps)^d; only meaningful pointwise in d=1
            inside = (r > 0.0) & (r < np.pi / self.eps)
            return np.where(inside, 1.0, np.inf)
        raise DomainError(f"cannot evaluate potential kind {self.kind!r}")

    @property
    def is_radial(self):
        return self.kind != "box"

    def lower_bound(self):
        if self.kind == "box":
            return 1.0
        if self.kind == "harmonic":
            return self.B
        if self.kind == "power":
            return 0.0
        return float(np.min(self.values))

    def suggest_domain(self, n_eigs):
        """Radius R with V(R) >= margin * lambda_{n_eigs} (margin 4).

        Dirichlet truncation error decays exponentially in the distance past
        the classical turning point, so a factor-4 margin on the target level
        keeps it far below the discretization error.
        """
        margin = 4.0
        if self.kind == "harmonic":
            lam = self.B + self.A * (2.0 * n_eigs + self.d)
            target = self.B + margin * max(lam - self.B, self.A)
            return float(np.sqrt((target - self.B)) / self.A)
        if self.kind == "power":
            lam = _power_level_estimate(self.c, self.p, self.d, n_eigs)
            return float((margin * lam / self.c) ** (1.0 / self.p))
        if self.kind in ("sampled", "dirichlet_well"):
            return float(self.grid[-1] if self.kind == "sampled" else self.R)
        if self.kind == "box":
            return float(np.pi / self.eps)
        raise DomainError(self.kind)

    # --- metadata checks ---------------------------------------------------

    def check_dual_integrability(self, gamma):
        """V >= 0 and V^{d/2-gamma} integrable (the confining trace setting).

        Closed forms are decided analytically; sampled profiles by requiring
        strict positivity (the finite mesh then gives a finite integral).
        """
        if not gamma > self.d / 2.0:
            return False
        if self.kind == "box":
            return True
        if self.kind == "harmonic":
            return self.B > 0.0 and gamma > self.d
        if self.kind == "power":
            # V vanishes at the origin, so V^{d/2-gamma} is never integrable
            # at 0 once it is at infinity
            return False
        vmin = float(np.min(self.values))
        if vmin < 0.0:
            return False
        if vmin == 0.0:
            return False
        return True

    # --- serialization -----------------------------------------------------

    def to_dict(self):
        out = {"kind": self.kind, "d": self.d}
        if self.kind == "box":
            out["eps"] = self.eps
        elif self.kind == "harmonic":
            out["A"], out["B"] = self.A, self.B
        elif self.kind == "power":
            out["c"], out["p"] = self.c, self.p
        else:
            out["grid"] = np.asarray(self.grid).tolist()
            out["values"] = np.asarray(self.values).tolist()
            if self.kind == "dirichlet_well":
                out["R"] = self.R
        return out


def _check_samples(grid, values):
    if grid.ndim != 1 or grid.size < 3:
        raise InputError("sampled grids need at least 3 points")
    if not np.all(np.diff(grid) > 0.0):
        raise InputError("sampled grids must be strictly increasing")
    if values.shape != grid.shape:
        raise InputError("grid and values must have matching shapes")
    if not np.all(np.isfinite(values)):
        raise InputError("potential samples must be finite")


def _power_level_estimate(c, p, d, n):
    """Weyl (phase-space) estimate of the n-th level of c |x|^p in d dims.

    N(E) = (2 pi)^{-d} vol{(x, xi): xi^2 + c|x|^p <= E}
         = C_d,p * c^{-d/p} * E^{d/2 + d/p};    invert at N = n.
    """
    from .kernels import gamma_ln_scalar as _gl

    log_beta = _gl(d / p) + _gl(d / 2.0 + 1.0) - _gl(d / p + d / 2.0 + 1.0)
    # (2 pi)^{-d} * v_d * |S^{d-1}| * (1/p) * B(d/p, d/2+1) * c^{-d/p}
    log_cd = (
        -d * np.log(2.0 * np.pi)
        + 0.5 * d * np.log(np.pi)
        - _gl(d / 2.0 + 1.0)
        + np.log(2.0)
        + 0.5 * d * np.log(np.pi)
        - _gl(d / 2.0)
        - np.log(p)
        + log_beta
        - (d / p) * np.log(c)
    )
    expo = d / 2.0 + d / p
    e = (max(n, 1) * np.exp(-log_cd)) ** (1.0 / expo)
    return float(max(e, c))


def load_sampled(path, d=1):
    """Read a sampled potential from two-column text or JSON.

    JSON accepts either an array of [x, V] pairs or an object with "x" and
    "v" arrays.
    """
    text = open(path).read().strip()
    if text.startswith("[") or text.startswith("{"):
        data = json.loads(text)
        if isinstance(data, dict):
            x = np.asarray(data["x"], dtype=float)
            v = np.asarray(data["v"], dtype=float)
        else:
            arr = np.asarray(data, dtype=float)
            x, v = arr[:, 0], arr[:, 1]
    else:
        arr = np.loadtxt(path)
        x, v = arr[:, 0], arr[:, 1]
    return Potential.sampled(x, v, d=d)


# ---------------------------------------------------------------------------
# Golden-Thompson right-hand side
# ---------------------------------------------------------------------------


def gt_rhs(v: Potential, t: float) -> float:
    """(4 pi t)^{-d/2} int e^{-t V} dx.

    Closed-form radial potentials are integrated adaptively after the
    r = tan(theta) substitution (relative tolerance 1e-10); the box uses its
    exact volume; sampled potentials use the trapezoid rule on their mesh.
    """
    if t <= 0.0:
        raise DomainError("gt_rhs needs t > 0")
    d = v.d
    pref = (4.0 * np.pi * t) ** (-d / 2.0)
    if v.kind == "box":
        return pref * np.exp(-t) * (np.pi / v.eps) ** d

    if v.kind in ("harmonic", "power"):
        fun = v

        def f(r):
            return np.exp(-t * float(fun(r)))

        if d == 1:
            val, _ = integrate_halfline(f, epsrel=1e-10)
            return pref * 2.0 * val
        val, _ = integrate_radial(f, d, epsrel=1e-10)
        return pref * val

    if v.kind in ("sampled", "dirichlet_well"):
        w = np.exp(-t * v.values)
        if d == 1:
            # mesh interpreted as a 1D interval
            return pref * trapezoid(w, v.grid)
        area = sphere_area(d)
        return pref * area * trapezoid(w * v.grid ** (d - 1), v.grid)

    raise DomainError(f"gt_rhs: unsupported potential kind {v.kind!r}")
