"""Thermal-insulation energy of a shell around a heated convex core.

The core is held at unit value, the shell is the outer parallel body at
distance delta, and the outer boundary carries a Robin penalty with
parameter beta.  For radial weights the minimizer has constant flux and
the energy reduces to a scalar closed form; the production route is a 1-D
convex minimization cross-checked against that closed form.  In the plane
a conformal P1 finite element solve evaluates the energy on non-circular
cores; for revolution cores (n >= 3) the parallel-coordinate test function
gives a certified upper bound, which suffices for the one-sided comparison
against the quermass-matched ball.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_banded
from scipy.sparse.linalg import splu

from .core import sphere_measure, geodesic_step
from .bodies import (
    Body2D,
    convexity_report,
    curvature_profile,
    parallel_perimeter_direct,
)
from .nagy import equivalent_ball
from .fem2d import (
    AnnularDomain2D,
    _periodic_radius_interpolant,
    assemble_p2,
    boundary_mass_outer,
    build_mesh,
)
from .errors import DomainValidationError, PreconditionError

EULER_LAGRANGE_RTOL = 1e-6


@dataclass(frozen=True)
class InsulationSpec:
    """Core body, shell thickness delta and Robin parameter beta."""

    p: float
    body: object
    delta: float
    beta: float

    def __post_init__(self):
        if not self.p > 1.0:
            raise DomainValidationError("exponent p must exceed 1")
        if self.delta <= 0.0:
            raise DomainValidationError("shell thickness delta must be > 0")
        if self.beta <= 0.0:
            raise DomainValidationError("Robin parameter beta must be > 0")

    @property
    def n(self):
        return self.body.n


def _closed_form_energy(weight_fn, span, boundary_weight, p, n_quad=384):
    """Energy of the constant-flux minimizer for a general 1-D weight.

    With Q = int_0^span w^{-1/(p-1)} and W_b the Robin weight, the flux
    scale is s = W_b^{1/(p-1)} / (1 + W_b^{1/(p-1)} Q) and the energy is
    s^{p-1}.  Q is integrated by Gauss-Legendre (the weights in use are
    analytic).
    """
    x, gw = np.polynomial.legendre.leggauss(n_quad)
    t = 0.5 * span * (1.0 + x)
    w = weight_fn(t)
    q = 0.5 * span * float(np.sum(gw * w ** (-1.0 / (p - 1.0))))
    wb = boundary_weight ** (1.0 / (p - 1.0))
    s = wb / (1.0 + wb * q)
    return float(s ** (p - 1.0))


def radial_energy_closed_form(n, p, r, delta, beta):
    """Closed-form shell energy for a ball core of radius r."""
    om = sphere_measure(n - 1)
    span = delta
    wb = beta * om * math.sinh(r + delta) ** (n - 1)
    return _closed_form_energy(lambda t: om * np.sinh(r + t) ** (n - 1), span, wb, p)


def _interval_weights(n, r, R, grid):
    """Per-interval integrals of omega_{n-1} sinh^{n-1} by 5-point Gauss."""
    om = sphere_measure(n - 1)
    xg, wg = np.polynomial.legendre.leggauss(5)
    h = np.diff(grid)
    mid = 0.5 * (grid[:-1] + grid[1:])
    w = np.zeros(len(h))
    for q in range(5):
        tq = mid + 0.5 * h * xg[q]
        w += 0.5 * h * wg[q] * om * np.sinh(tq) ** (n - 1)
    return w


def _newton_minimize(energy_grad, u_free, w, h, robin, p, max_iter=80):
    """Damped Newton on the convex discrete energy, started from the p = 2
    minimizer.

    The Hessian is tridiagonal and positive definite on monotone profiles,
    so Newton with an energy line search converges globally and drives the
    Euler-Lagrange gradient (constant-flux optimality) to roundoff; the
    quasi-Newton alternative crawls here because conditioning scales like
    the squared cell count.
    """
    n_free = len(u_free)
    u = u_free.copy()
    e, g = energy_grad(u)
    scale = max(abs(e), 1.0)
    for _ in range(max_iter):
        if np.max(np.abs(g)) <= 1e-13 * scale:
            break
        uu = np.concatenate([[1.0], u])
        du = np.diff(uu) / h
        d2 = p * (p - 1.0) * w * np.abs(du) ** (p - 2.0) / h ** 2
        main = np.zeros(n_free)
        main[:-1] = d2[:-1] + d2[1:]
        main[-1] = d2[-1] + robin * p * (p - 1.0) * abs(u[-1]) ** (p - 2.0)
        off = -d2[1:]
        ab = np.zeros((3, n_free))
        ab[0, 1:] = off
        ab[1] = main
        ab[2, :-1] = off
        step = solve_banded((1, 1), ab, g)
        t = 1.0
        for _ in range(30):
            e_new, g_new = energy_grad(u - t * step)
            if e_new <= e:
                break
            t *= 0.5
        u = u - t * step
        e, g = e_new, g_new
    return u


def radial_energy(n, p, r, delta, beta, n_cells=2048, return_profile=False):
    """Shell energy of a ball core by 1-D convex minimization.

    P1 elements on [r, r+delta] with exactly integrated weights; for p = 2
    the optimality system is a tridiagonal solve, otherwise L-BFGS-B on the
    convex discrete functional (with analytic gradient) from the p = 2
    minimizer.
    """
    if delta <= 0.0 or beta <= 0.0 or r <= 0.0:
        raise DomainValidationError("r, delta, beta must be positive")
    R = r + delta
    om = sphere_measure(n - 1)
    grid = np.linspace(r, R, n_cells + 1)
    h = np.diff(grid)
    w = _interval_weights(n, r, R, grid)
    robin = beta * om * math.sinh(R) ** (n - 1)

    def solve_p2():
        k = w / h ** 2
        main = np.zeros(n_cells)
        main[:-1] = k[:-1] + k[1:]
        main[-1] = k[-1] + robin
        off = -k[1:]
        ab = np.zeros((3, n_cells))
        ab[0, 1:] = off
        ab[1] = main
        ab[2, :-1] = off
        rhs = np.zeros(n_cells)
        rhs[0] = k[0]
        return solve_banded((1, 1), ab, rhs)

    u_free = solve_p2()
    if p != 2.0:
        def energy_grad(uf):
            uu = np.concatenate([[1.0], uf])
            du = np.diff(uu) / h
            e = float(np.sum(w * np.abs(du) ** p) + robin * abs(uf[-1]) ** p)
            flux = w * p * np.abs(du) ** (p - 1.0) * np.sign(du) / h
            g = np.zeros(n_cells)
            g += flux
            g[:-1] -= flux[1:]
            g[-1] += robin * p * abs(uf[-1]) ** (p - 1.0) * np.sign(uf[-1])
            return e, g

        u_free = _newton_minimize(energy_grad, u_free, w=w, h=h, robin=robin, p=p)
    u = np.concatenate([[1.0], u_free])
    du = np.diff(u) / h
    energy = float(np.sum(w * np.abs(du) ** p) + robin * abs(u[-1]) ** p)
    if return_profile:
        return energy, grid, u, w
    return energy


def discrete_flux(n, p, r, delta, beta, n_cells=2048):
    """Per-interval fluxes (w_i/h_i)|du|^{p-2} du of the 1-D minimizer."""
    energy, grid, u, w = radial_energy(n, p, r, delta, beta, n_cells=n_cells,
                                       return_profile=True)
    h = np.diff(grid)
    du = np.diff(u) / h
    return (w / h) * np.abs(du) ** (p - 2.0) * du


def parallel_bound_energy(body, p, delta, beta, n_grid=1024):
    """Upper bound on the core's shell energy via parallel-coordinate profiles.

    Test functions constant on the equidistants of the core reduce the
    energy to the 1-D functional with weight L(s) = P(core_s) (the parallel
    perimeter) and Robin weight beta L(delta); its constant-flux minimum is
    evaluated in closed form.  The true energy can only be lower.
    """
    rep = convexity_report(body)
    if not rep.is_convex:
        raise PreconditionError("parallel-coordinate bound needs a convex core")
    prof = curvature_profile(body)
    s = np.linspace(0.0, delta, n_grid)
    L = np.array([parallel_perimeter_direct(body, sv, profile=prof) for sv in s])
    q = float(np.trapezoid(L ** (-1.0 / (p - 1.0)), s))
    wb = (beta * L[-1]) ** (1.0 / (p - 1.0))
    flux_scale = wb / (1.0 + wb * q)
    return float(flux_scale ** (p - 1.0))


def insulation_domain(body, delta, n_samples=8192):
    """Annulus-like domain whose outer boundary is the core's delta-parallel.

    The outer chart curve is the normal geodesic flow of the core boundary,
    resampled into a polar table for the mesher.
    """
    if not isinstance(body, Body2D):
        raise DomainValidationError("planar insulation domains need a Body2D core")
    theta = np.linspace(0.0, 2.0 * np.pi, n_samples, endpoint=False)
    z0 = body.chart_curve(theta)
    tangent = body.chart_tangent(theta)
    normal = -1j * tangent / np.abs(tangent)
    return z0, geodesic_step(z0, normal, delta)


class _ParallelOuterDomain(AnnularDomain2D):
    """AnnularDomain2D whose outer boundary is a sampled parallel curve."""

    def __init__(self, inner, outer_samples):
        object.__setattr__(self, "inner", inner)
        object.__setattr__(self, "outer", inner)  # placeholder, not used
        object.__setattr__(self, "offset", 0.0)
        object.__setattr__(self, "offset_angle", 0.0)
        object.__setattr__(self, "_outer_table", _periodic_radius_interpolant(outer_samples))

    def polar_tables(self, n_samples=8192):
        theta = np.linspace(0.0, 2.0 * np.pi, n_samples, endpoint=False)
        rho_in = _periodic_radius_interpolant(self.inner_chart(theta))
        return rho_in, self._outer_table


def fem_energy_p2(body, delta, beta, h_mesh=0.01):
    """Planar insulation energy at p = 2 by a conformal P1 solve.

    Minimizes int |grad u|^2 dx + beta int_{outer} u^2 lambda ds over P1
    functions pinned to 1 on the core boundary (Dirichlet energy is
    conformally invariant; only the Robin term sees the metric).
    """
    _, outer_samples = insulation_domain(body, delta)
    dom = _ParallelOuterDomain(body, outer_samples)
    mesh = build_mesh(dom, h_mesh)
    K, _ = assemble_p2(mesh)
    B = boundary_mass_outer(mesh)
    A = (K + beta * B).tocsr()
    nv = mesh.vertices.shape[0]
    free = np.setdiff1d(np.arange(nv), mesh.inner_nodes)
    g = np.zeros(nv)
    g[mesh.inner_nodes] = 1.0
    rhs = -(A @ g)[free]
    lu = splu(A[np.ix_(free, free)].tocsc())
    u = g.copy()
    u[free] = lu.solve(rhs)
    return float(u @ (A @ u))


@dataclass(frozen=True)
class InsulationReport:
    energy_body: float
    energy_ball: float
    margin: float
    r_star: float
    equality_detected: bool
    one_sided: bool
    meta: dict = field(default_factory=dict)


def insulation_verdict(spec, h_mesh=0.005, equality_rtol=1e-4):
    """Compare the core's energy against the quermass-matched ball core.

    Planar cores are evaluated by FEM (Richardson extrapolated over h and
    h/2); revolution cores use the one-sided parallel-coordinate bound.
    The ball side is the radial closed form at the matched radius.
    """
    body = spec.body
    rep = convexity_report(body)
    if body.n == 2:
        if not rep.is_convex:
            raise PreconditionError("planar insulation comparison needs a convex core")
    else:
        if not rep.is_h_convex:
            raise PreconditionError("insulation comparison in n >= 3 needs an h-convex core")
    r_star = equivalent_ball(body)
    e_ball = radial_energy_closed_form(body.n, spec.p, r_star, spec.delta, spec.beta)
    one_sided = False
    if isinstance(body, Body2D):
        if body.is_round:
            e_body = radial_energy_closed_form(2, spec.p, body.a0, spec.delta, spec.beta)
        elif spec.p == 2.0:
            e_h = fem_energy_p2(body, spec.delta, spec.beta, h_mesh=h_mesh)
            e_h2 = fem_energy_p2(body, spec.delta, spec.beta, h_mesh=h_mesh / 2.0)
            e_body = e_h2 + (e_h2 - e_h) / 3.0
        else:
            e_body = parallel_bound_energy(body, spec.p, spec.delta, spec.beta)
            one_sided = True
    else:
        if body.is_round:
            e_body = radial_energy_closed_form(body.n, spec.p, body.a0, spec.delta, spec.beta)
        else:
            e_body = parallel_bound_energy(body, spec.p, spec.delta, spec.beta)
            one_sided = True
    margin = e_ball - e_body
    equality = bool(abs(margin) <= equality_rtol * e_ball)
    meta = {"p": spec.p, "delta": spec.delta, "beta": spec.beta, "n": body.n,
            "h_mesh": h_mesh if isinstance(body, Body2D) else None}
    return InsulationReport(energy_body=float(e_body), energy_ball=float(e_ball),
                            margin=float(margin), r_star=float(r_star),
                            equality_detected=equality, one_sided=one_sided, meta=meta)
