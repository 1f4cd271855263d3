"""Convex bodies in hyperbolic space as radial graphs.

Two representations are supported: closed curves in the hyperbolic plane
given by a truncated Fourier series r(theta) about a base point, and
rotationally symmetric bodies in dimension n >= 3 given by an even cosine
series h(u) over the polar angle u in [0, pi].  Both make every geometric
quantity (curvature profile, measures, curvature integrals, quermass
vector, parallel-body perimeters) a one-dimensional quadrature.

Planar profiles sample uniformly in theta (the trapezoid rule is spectral
for periodic integrands); revolution profiles sample at Gauss-Legendre
nodes of [0, pi], which never touch the poles.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .core import (
    check_dimension,
    gauss_legendre_nodes,
    sphere_measure,
    sinh_power_integral_vec,
    quermass_from_curvature_integrals,
    QuermassVector,
)
from .errors import DomainValidationError, PreconditionError, NumericError, ConsistencyError

CONVEXITY_TOL = 1e-9
GAUSS_BONNET_RTOL = 1e-8
BODY_TERMINAL_RTOL = 1e-6
RESOLUTION_CHECK_RTOL = 1e-6


def _as_coeffs(c):
    return np.atleast_1d(np.asarray(c, dtype=float)) if c is not None and len(np.atleast_1d(c)) else np.zeros(0)


@dataclass(frozen=True)
class Body2D:
    """Closed curve r(theta) = a0 + sum a_k cos(k theta) + b_k sin(k theta)."""

    a0: float
    cos: np.ndarray = field(default_factory=lambda: np.zeros(0))
    sin: np.ndarray = field(default_factory=lambda: np.zeros(0))
    n_theta: int = 2048

    def __post_init__(self):
        object.__setattr__(self, "cos", _as_coeffs(self.cos))
        object.__setattr__(self, "sin", _as_coeffs(self.sin))
        if self.a0 <= 0:
            raise DomainValidationError("mean radius a0 must be > 0")
        if self.n_theta < 16:
            raise DomainValidationError("n_theta too small")
        r = self.radius(np.linspace(0.0, 2.0 * np.pi, 4096, endpoint=False))
        if r.min() <= 0.0:
            raise DomainValidationError("radial graph must stay positive")

    @property
    def n(self):
        return 2

    def _series(self, theta, derivative):
        theta = np.asarray(theta, dtype=float)
        out = np.full_like(theta, self.a0 if derivative == 0 else 0.0)
        for k, a in enumerate(self.cos, start=1):
            if a == 0.0:
                continue
            if derivative == 0:
                out = out + a * np.cos(k * theta)
            elif derivative == 1:
                out = out - a * k * np.sin(k * theta)
            else:
                out = out - a * k * k * np.cos(k * theta)
        for k, b in enumerate(self.sin, start=1):
            if b == 0.0:
                continue
            if derivative == 0:
                out = out + b * np.sin(k * theta)
            elif derivative == 1:
                out = out + b * k * np.cos(k * theta)
            else:
                out = out - b * k * k * np.sin(k * theta)
        return out

    def radius(self, theta):
        return self._series(theta, 0)

    def radius_d1(self, theta):
        return self._series(theta, 1)

    def radius_d2(self, theta):
        return self._series(theta, 2)

    @property
    def is_round(self):
        return len(self.cos) == 0 and len(self.sin) == 0

    def chart_curve(self, theta):
        """Poincare-disk image of the boundary (base point at the origin)."""
        r = self.radius(theta)
        return np.tanh(r / 2.0) * np.exp(1j * np.asarray(theta, dtype=float))

    def chart_tangent(self, theta):
        """d/dtheta of chart_curve, analytic through the series."""
        theta = np.asarray(theta, dtype=float)
        r = self.radius(theta)
        rp = self.radius_d1(theta)
        t = np.tanh(r / 2.0)
        dt = rp / (2.0 * np.cosh(r / 2.0) ** 2)
        return (dt + 1j * t) * np.exp(1j * theta)


@dataclass(frozen=True)
class RevolutionBody:
    """Rotationally symmetric body in H^n, n >= 3: radial graph h(u), u in [0, pi].

    The profile is an even cosine series h(u) = a0 + sum c_j cos(2j u), which
    enforces the pole regularity h'(0) = h'(pi) = 0 automatically.
    """

    n: int
    a0: float
    cos_even: np.ndarray = field(default_factory=lambda: np.zeros(0))
    n_u: int = 2048

    def __post_init__(self):
        check_dimension(self.n)
        if self.n < 3:
            raise DomainValidationError("revolution bodies need ambient dimension >= 3")
        object.__setattr__(self, "cos_even", _as_coeffs(self.cos_even))
        if self.a0 <= 0:
            raise DomainValidationError("mean radius a0 must be > 0")
        if self.n_u < 16:
            raise DomainValidationError("n_u too small")
        h = self.height(np.linspace(0.0, np.pi, 2049))
        if h.min() <= 0.0:
            raise DomainValidationError("radial graph must stay positive")

    def _series(self, u, derivative):
        u = np.asarray(u, dtype=float)
        out = np.full_like(u, self.a0 if derivative == 0 else 0.0)
        for j, c in enumerate(self.cos_even, start=1):
            if c == 0.0:
                continue
            k = 2 * j
            if derivative == 0:
                out = out + c * np.cos(k * u)
            elif derivative == 1:
                out = out - c * k * np.sin(k * u)
            else:
                out = out - c * k * k * np.cos(k * u)
        return out

    def height(self, u):
        return self._series(u, 0)

    def height_d1(self, u):
        return self._series(u, 1)

    def height_d2(self, u):
        return self._series(u, 2)

    @property
    def is_round(self):
        return len(self.cos_even) == 0


def make_ball(n, r):
    """Geodesic ball as a body of the appropriate representation."""
    n = check_dimension(n)
    if r <= 0:
        raise DomainValidationError("ball radius must be > 0")
    if n == 2:
        return Body2D(a0=float(r))
    return RevolutionBody(n=n, a0=float(r))


# ---------------------------------------------------------------------------
# Curvature profiles

@dataclass(frozen=True)
class CurvatureProfile:
    """Sampled principal curvatures and area-element weights of a boundary.

    kappas has one column per distinct principal curvature; multiplicity[k]
    counts how many times column k occurs among the n-1 curvatures.  weights
    already include the quadrature rule, so sum(weights) is the perimeter.
    """

    n: int
    params: np.ndarray
    kappas: np.ndarray
    multiplicity: tuple
    weights: np.ndarray

    def __post_init__(self):
        if np.any(~np.isfinite(self.kappas)) or np.any(~np.isfinite(self.weights)):
            raise NumericError("non-finite entries in curvature profile")
        if np.any(self.weights < 0.0):
            raise NumericError("negative area-element weight")
        if sum(self.multiplicity) != self.n - 1:
            raise DomainValidationError("multiplicities must sum to n-1")

    @property
    def perimeter(self):
        return float(np.sum(self.weights))

    def min_curvature(self):
        return float(self.kappas.min())

    def symmetric_means(self):
        """H_j = sigma_j(principal curvatures)/C(n-1, j) for j = 0..n-1.

        With at most two distinct curvatures (kappa_a mult 1, kappa_b mult
        n-2) the elementary symmetric functions have a binomial closed form.
        """
        n = self.n
        m = len(self.params)
        H = np.ones((n, m))
        if n == 2:
            H[1] = self.kappas[:, 0]
            return H
        ka = self.kappas[:, 0]
        kb = self.kappas[:, 1]
        nb = self.multiplicity[1]
        for j in range(1, n):
            sig = np.zeros(m)
            if j <= nb:
                sig += math.comb(nb, j) * kb ** j
            if 0 <= j - 1 <= nb:
                sig += math.comb(nb, j - 1) * kb ** (j - 1) * ka
            H[j] = sig / math.comb(n - 1, j)
        return H


def _gauss_legendre(n_nodes, a, b):
    x, w = gauss_legendre_nodes(n_nodes)
    return 0.5 * (b - a) * x + 0.5 * (a + b), 0.5 * (b - a) * w


def _memo(body, key, builder):
    """Per-body cache; bodies are immutable so derived data never expires."""
    cache = getattr(body, "_derived_cache", None)
    if cache is None:
        cache = {}
        object.__setattr__(body, "_derived_cache", cache)
    if key not in cache:
        cache[key] = builder()
    return cache[key]


def _geodesic_curvature_polar(r, rp, rpp):
    """Geodesic curvature of a polar radial graph in the metric dr^2 + sinh^2 r dth^2."""
    f = np.sinh(r)
    fp = np.cosh(r)
    kg = (-rpp * f + 2.0 * rp ** 2 * fp + f ** 2 * fp) / (rp ** 2 + f ** 2) ** 1.5
    if np.any(~np.isfinite(kg)):
        raise NumericError("non-finite geodesic curvature")
    return kg


def curvature_2d(body, n_theta=None):
    """Curvature profile of a planar body at uniform angular samples."""
    if not isinstance(body, Body2D):
        raise DomainValidationError("curvature_2d expects a Body2D")
    m = n_theta or body.n_theta
    theta = np.linspace(0.0, 2.0 * np.pi, m, endpoint=False)
    r = body.radius(theta)
    rp = body.radius_d1(theta)
    rpp = body.radius_d2(theta)
    kg = _geodesic_curvature_polar(r, rp, rpp)
    ds = np.sqrt(rp ** 2 + np.sinh(r) ** 2) * (2.0 * np.pi / m)
    return CurvatureProfile(n=2, params=theta, kappas=kg[:, None],
                            multiplicity=(1,), weights=ds)


def revolution_pole_curvature(body, at_zero=True):
    """Umbilic curvature at a pole: (sinh h cosh h - h'')/sinh^2 h."""
    u = 0.0 if at_zero else np.pi
    h = float(body.height(u))
    hpp = float(body.height_d2(u))
    return (math.sinh(h) * math.cosh(h) - hpp) / math.sinh(h) ** 2


def curvature_revolution(body, n_u=None):
    """Curvature profile of a revolution body at Gauss-Legendre nodes.

    The meridian curvature comes from the planar polar formula applied to the
    generating curve; the orbit curvature (multiplicity n-2) is the normal
    derivative of the distance-to-axis rho times coth rho, with
    sinh rho = sinh h sin u.  The area element collapses the orbit sphere:
    dS = omega_{n-2} sinh^{n-2} rho sqrt(h'^2 + sinh^2 h) du.
    """
    if not isinstance(body, RevolutionBody):
        raise DomainValidationError("curvature_revolution expects a RevolutionBody")
    m = n_u or body.n_u
    u, qw = _gauss_legendre(m, 0.0, np.pi)
    h = body.height(u)
    hp = body.height_d1(u)
    hpp = body.height_d2(u)
    km = _geodesic_curvature_polar(h, hp, hpp)
    sh = np.sinh(h)
    speed = np.sqrt(hp ** 2 + sh ** 2)
    sinh_rho = sh * np.sin(u)
    ko = (sh * np.cosh(h) * np.sin(u) - hp * np.cos(u)) / (sinh_rho * speed)
    if np.any(~np.isfinite(ko)):
        raise NumericError("non-finite orbit curvature")
    n = body.n
    ds = sphere_measure(n - 2) * sinh_rho ** (n - 2) * speed * qw
    kappas = np.stack([km, ko], axis=1)
    return CurvatureProfile(n=n, params=u, kappas=kappas,
                            multiplicity=(1, n - 2), weights=ds)


def curvature_profile(body):
    if isinstance(body, Body2D):
        return _memo(body, "profile", lambda: curvature_2d(body))
    if isinstance(body, RevolutionBody):
        return _memo(body, "profile", lambda: curvature_revolution(body))
    raise DomainValidationError(f"unsupported body type {type(body).__name__}")


def _resolution_guard(body):
    """Richardson-style check: perimeter at full vs half resolution."""
    def run():
        if isinstance(body, Body2D):
            p_full = curvature_profile(body).perimeter
            p_half = curvature_2d(body, n_theta=body.n_theta // 2).perimeter
        else:
            p_full = curvature_profile(body).perimeter
            p_half = curvature_revolution(body, n_u=body.n_u // 2).perimeter
        if abs(p_full - p_half) > RESOLUTION_CHECK_RTOL * abs(p_full):
            raise NumericError(
                "sampling resolution too coarse for this body; "
                "increase n_theta/n_u and retry"
            )
        return True

    _memo(body, "resolution_ok", run)


@dataclass(frozen=True)
class ConvexityReport:
    min_curvature: float
    is_convex: bool
    is_h_convex: bool


def convexity_report(body):
    """Minimum principal curvature and the resulting convexity flags.

    Pole curvatures of revolution bodies are appended explicitly since the
    interior quadrature nodes only approach the poles.
    """
    _resolution_guard(body)
    prof = curvature_profile(body)
    kmin = prof.min_curvature()
    if isinstance(body, RevolutionBody):
        kmin = min(kmin, revolution_pole_curvature(body, True),
                   revolution_pole_curvature(body, False))
    return ConvexityReport(
        min_curvature=kmin,
        is_convex=bool(kmin >= -CONVEXITY_TOL),
        is_h_convex=bool(kmin >= 1.0 - CONVEXITY_TOL),
    )


# ---------------------------------------------------------------------------
# Measures and curvature integrals

def boundary_measures(body):
    """Perimeter and volume of a body; Gauss-Bonnet cross-check in the plane.

    The planar area is computed twice: by polar integration of
    integral_0^r sinh and through integral kappa_g ds - 2 pi (curvature -1
    Gauss-Bonnet); disagreement flags a bad curvature profile.
    """
    def run():
        prof = curvature_profile(body)
        perimeter = prof.perimeter
        if isinstance(body, Body2D):
            theta = prof.params
            r = body.radius(theta)
            volume = float(np.sum(np.cosh(r) - 1.0) * (2.0 * np.pi / len(theta)))
            area_gb = float(np.sum(prof.kappas[:, 0] * prof.weights) - 2.0 * np.pi)
            if abs(area_gb - volume) > GAUSS_BONNET_RTOL * abs(volume):
                raise ConsistencyError(
                    f"Gauss-Bonnet area {area_gb!r} disagrees with polar area {volume!r}"
                )
        else:
            n = body.n
            u, qw = _gauss_legendre(body.n_u, 0.0, np.pi)
            radial = sinh_power_integral_vec(n - 1, body.height(u))
            volume = float(sphere_measure(n - 2) * np.sum(qw * np.sin(u) ** (n - 2) * radial))
        return {"perimeter": perimeter, "volume": volume}

    return dict(_memo(body, "measures", run))


@dataclass(frozen=True)
class CurvatureIntegrals:
    """v[i] = V_i(K) = integral of H_{n-1-i} over the boundary; v[n-1] = P(K)."""

    n: int
    v: np.ndarray

    def __post_init__(self):
        if len(self.v) != self.n:
            raise DomainValidationError("curvature integral vector must have n entries")


def curvature_integrals_from_profile(prof):
    H = prof.symmetric_means()
    n = prof.n
    v = np.zeros(n)
    for j in range(n):
        v[n - j - 1] = float(np.sum(H[j] * prof.weights))
    return CurvatureIntegrals(n=n, v=v)


def curvature_integrals(body):
    return _memo(body, "curvature_integrals",
                 lambda: curvature_integrals_from_profile(curvature_profile(body)))


def quermassintegrals(body):
    """QuermassVector of a body via the curvature-integral recursion.

    The terminal convention W_n = omega_{n-1}/n (checked at 1e-6 relative)
    doubles as the smoothness/closedness certificate of the sampled body.
    """
    meas = boundary_measures(body)
    ci = curvature_integrals(body)
    w = quermass_from_curvature_integrals(body.n, meas["volume"], ci.v,
                                          BODY_TERMINAL_RTOL)
    return QuermassVector(n=body.n, w=w)


# ---------------------------------------------------------------------------
# Parallel bodies

def _require_convex(body):
    rep = convexity_report(body)
    if not rep.is_convex:
        raise PreconditionError(
            f"operation needs a convex body (min curvature {rep.min_curvature:.6f})"
        )


def parallel_perimeter_direct(body, delta, profile=None):
    """Perimeter of the outer parallel body at distance delta.

    Normal-exponential Jacobian form: integral over the boundary of
    prod_i (cosh delta + kappa_i sinh delta) dS.  Convexity keeps the normal
    map injective, so the integrand is exactly the area-element stretch.
    """
    if delta < 0:
        raise DomainValidationError("parallel distance must be >= 0")
    if profile is None:
        _require_convex(body)
        profile = curvature_profile(body)
    c, s = math.cosh(delta), math.sinh(delta)
    jac = np.ones(len(profile.params))
    for col, mult in enumerate(profile.multiplicity):
        jac *= (c + profile.kappas[:, col] * s) ** mult
    return float(np.sum(jac * profile.weights))


def steiner_evaluate(ci, delta):
    """Parallel perimeter from curvature integrals.

    Binomial expansion of the Jacobian product:
    P(K_delta) = sum_j C(n-1, j) V_{n-j-1}(K) sinh^j(delta) cosh^{n-1-j}(delta).
    """
    if delta < 0:
        raise DomainValidationError("parallel distance must be >= 0")
    n = ci.n
    c, s = math.cosh(delta), math.sinh(delta)
    total = 0.0
    for j in range(n):
        total += math.comb(n - 1, j) * ci.v[n - j - 1] * s ** j * c ** (n - 1 - j)
    return float(total)


def parallel_volume(body, delta):
    """Volume of the outer parallel body: Vol(K) + integral_0^delta P(K_t) dt.

    The kernel integrals sum_j C(n-1,j) V_{n-j-1} int_0^delta sinh^j cosh^{n-1-j}
    are evaluated by Gauss-Legendre; exact for balls up to quadrature.
    """
    if delta < 0:
        raise DomainValidationError("parallel distance must be >= 0")
    _require_convex(body)
    meas = boundary_measures(body)
    if delta == 0.0:
        return meas["volume"]
    ci = curvature_integrals(body)
    t, w = _gauss_legendre(96, 0.0, delta)
    vals = np.array([steiner_evaluate(ci, tv) for tv in t])
    return meas["volume"] + float(np.sum(w * vals))


def flow_profile(prof, delta):
    """Curvature profile of the parallel boundary at distance delta.

    Principal curvatures follow the Riccati flow
    kappa(delta) = (kappa cosh delta + sinh delta)/(cosh delta + kappa sinh delta)
    and the weights pick up the Jacobian stretch.  h-convexity (kappa >= 1)
    is preserved since kappa(delta) - 1 has the sign of kappa - 1.
    """
    c, s = math.cosh(delta), math.sinh(delta)
    denom = c + prof.kappas * s
    flowed = (prof.kappas * c + s) / denom
    jac = np.ones(len(prof.params))
    for col, mult in enumerate(prof.multiplicity):
        jac *= denom[:, col] ** mult
    return CurvatureProfile(n=prof.n, params=prof.params, kappas=flowed,
                            multiplicity=prof.multiplicity, weights=prof.weights * jac)
