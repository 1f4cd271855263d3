"""First eigenvalue of the mixed problem on concentric spherical shells.

The eigenfunction of the inner-Dirichlet / outer-Neumann p-Laplacian on
B_R \\ B_r is radial, reducing the problem to

    (sinh^{n-1} t |v'|^{p-2} v')' + tau sinh^{n-1} t |v|^{p-2} v = 0,
    v(r) = 0,  v'(R) = 0.

The solver shoots in the flux variable W = sinh^{n-1} t |v'|^{p-2} v'
(which stays C^1 through critical points of v), brackets tau by the sign
of W(R) with interior-zero rejection, and polishes the root by brentq.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import PchipInterpolator
from scipy.optimize import brentq

from .core import check_dimension
from .errors import DomainValidationError, NumericError, SearchError

DENSE_POINTS = 512


@dataclass(frozen=True)
class ShellSpec:
    """Concentric geodesic annulus B_R \\ B_r with exponent p."""

    n: int
    p: float
    r: float
    R: float

    def __post_init__(self):
        check_dimension(self.n)
        if not self.p > 1.0:
            raise DomainValidationError(f"exponent p must exceed 1, got {self.p}")
        if not 0.0 < self.r < self.R:
            raise DomainValidationError(f"need 0 < r < R, got r={self.r}, R={self.R}")

    @property
    def p_conj(self):
        return self.p / (self.p - 1.0)


@dataclass(frozen=True)
class EigResult:
    """Eigenvalue with a sampled eigenfunction and solver diagnostics.

    Radial solves fill (t, v, dv); mesh solves fill u with nodal values.
    """

    tau1: float
    t: np.ndarray = None
    v: np.ndarray = None
    dv: np.ndarray = None
    u: np.ndarray = None
    residuals: dict = field(default_factory=dict)
    meta: dict = field(default_factory=dict)


def _integrate(spec, tau, rtol=1e-11, atol=1e-13, dense=False, slope=1.0):
    """Shoot once from v(r) = 0, v'(r) = slope; stop early if v crosses zero."""
    n, p, r, R = spec.n, spec.p, spec.r, spec.R
    expo = 1.0 / (p - 1.0)

    def rhs(t, y):
        v, W = y
        s = np.sinh(t) ** (n - 1)
        vp = np.sign(W) * (abs(W) / s) ** expo
        f = tau * s * abs(v) ** (p - 2.0) * v if v != 0.0 else 0.0
        return (vp, -f)

    eps = 1e-9 * (R - r)

    def crossing(t, y):
        return y[0] if t > r + eps else 1.0

    crossing.terminal = True
    crossing.direction = -1.0

    flux0 = np.sinh(r) ** (n - 1) * abs(slope) ** (p - 2.0) * slope
    sol = solve_ivp(rhs, (r, R), [0.0, flux0], rtol=rtol, atol=atol,
                    events=crossing, dense_output=dense, max_step=(R - r) / 40.0)
    if not sol.success and len(sol.t_events[0]) == 0:
        raise NumericError(f"radial integration failed: {sol.message}")
    crossed = len(sol.t_events[0]) > 0
    return sol, crossed


def _classify(spec, tau):
    """+1 while tau is below the eigenvalue, -1 beyond it."""
    sol, crossed = _integrate(spec, tau)
    if crossed:
        return -1.0
    return 1.0 if sol.y[1][-1] > 0.0 else -1.0


def shell_eigen(spec, tol=1e-12, max_iter=200, initial_slope=1.0):
    """Locate tau_1 and return the eigenvalue with its radial profile.

    The bracket starts from the flat-interval estimate (pi/(2(R-r)))^2 and
    expands geometrically; 25 sign bisections isolate the first branch
    (where v is interior-positive) before brentq refines W(R) = 0.
    initial_slope only rescales the eigenfunction (the problem is
    homogeneous), which makes it a cheap simplicity cross-check.
    """
    if initial_slope <= 0.0:
        raise DomainValidationError("initial slope must be > 0")
    n, p, r, R = spec.n, spec.p, spec.r, spec.R
    tau_flat = (np.pi / (2.0 * (R - r))) ** 2
    lo, hi = 0.5 * tau_flat, 4.0 * tau_flat
    budget = max_iter
    while _classify(spec, lo) < 0.0:
        lo /= 4.0
        budget -= 1
        if budget <= 0 or lo < 1e-300:
            raise SearchError("no lower bracket for the shell eigenvalue")
    while _classify(spec, hi) > 0.0:
        hi *= 4.0
        budget -= 1
        if budget <= 0 or hi > 1e12 * tau_flat:
            raise SearchError("no upper bracket for the shell eigenvalue")
    for _ in range(25):
        mid = 0.5 * (lo + hi)
        if _classify(spec, mid) > 0.0:
            lo = mid
        else:
            hi = mid

    def flux_at_R(tau):
        sol, crossed = _integrate(spec, tau, slope=initial_slope)
        return -1.0 if crossed else sol.y[1][-1]

    tau1 = brentq(flux_at_R, lo, hi, xtol=tol * tau_flat, rtol=8.9e-16,
                  maxiter=max_iter)

    sol, crossed = _integrate(spec, tau1, dense=True, slope=initial_slope)
    if crossed:
        raise NumericError("interior zero at the converged eigenvalue; wrong branch")
    t = np.linspace(r, R, DENSE_POINTS)
    y = sol.sol(t)
    v, W = y[0], y[1]
    if np.any(v[1:] < 0.0):
        raise NumericError("profile fails interior positivity; wrong branch")
    s = np.sinh(t) ** (n - 1)
    dv = np.sign(W) * (np.abs(W) / s) ** (1.0 / (p - 1.0))
    # re-integration at looser tolerance bounds the ODE error
    sol_f, _ = _integrate(spec, tau1, rtol=1e-9, atol=1e-11, dense=True,
                          slope=initial_slope)
    ode_max = float(np.max(np.abs(sol_f.sol(t)[0] - v)))
    residuals = {
        "bc_inner": float(abs(v[0])),
        "bc_outer": float(abs(dv[-1])),
        "ode_max": ode_max,
    }
    meta = {"n": n, "p": p, "r": r, "R": R, "dense_points": DENSE_POINTS,
            "bracket": (float(lo), float(hi)), "tol": tol}
    return EigResult(tau1=float(tau1), t=t, v=v, dv=dv, residuals=residuals, meta=meta)


def radial_profile_eval(res, t):
    """Monotone-cubic interpolation of the stored profile; exact at nodes."""
    t_arr = np.asarray(t, dtype=float)
    lo, hi = res.t[0], res.t[-1]
    if np.any(t_arr < lo - 1e-12) or np.any(t_arr > hi + 1e-12):
        raise DomainValidationError(f"evaluation point outside [{lo}, {hi}]")
    interp = PchipInterpolator(res.t, res.v)
    return interp(np.clip(t_arr, lo, hi))


def rayleigh_quotient_radial(spec, res, n_quad=4096):
    """Rayleigh quotient of the stored profile in the shell weight sinh^{n-1}."""
    t = np.linspace(spec.r, spec.R, n_quad)
    v = PchipInterpolator(res.t, res.v)(t)
    dv = PchipInterpolator(res.t, res.dv)(t)
    w = np.sinh(t) ** (spec.n - 1)
    num = np.trapezoid(np.abs(dv) ** spec.p * w, t)
    den = np.trapezoid(np.abs(v) ** spec.p * w, t)
    return float(num / den)
