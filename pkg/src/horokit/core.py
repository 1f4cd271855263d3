"""Closed-form hyperbolic primitives.

Everything here is about the hyperbolic space of curvature -1: measures of
geodesic balls, the quermassintegral vector of a ball (computed through the
curvature-integral recursion and validated by its terminal convention
W_n = omega_{n-1}/n), inverse radius lookups, and distances in the Poincare
ball chart.  These functions are the oracles the rest of the toolkit is
checked against, so they favour closed forms and extended precision over
generality.
"""

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.optimize import brentq

from .errors import DomainValidationError, ConsistencyError, SearchError

_LD = np.longdouble

# log-space switch-over for sinh/cosh powers, safely under double overflow
_LOG_SPACE_THRESHOLD = 700.0 * math.log(2.0)


@lru_cache(maxsize=32)
def gauss_legendre_nodes(n_nodes):
    x, w = np.polynomial.legendre.leggauss(n_nodes)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def check_dimension(n):
    """Validate an ambient dimension; only n >= 2 is meaningful here."""
    if not isinstance(n, (int, np.integer)):
        raise DomainValidationError(f"dimension must be an integer, got {n!r}")
    if n < 2:
        raise DomainValidationError(f"dimension must be >= 2, got {n}")
    return int(n)


def sphere_measure(i):
    """Hausdorff measure omega_i of the unit i-sphere.

    Uses the exact recurrence omega_i = 2*pi*omega_{i-2}/(i-1) seeded by
    omega_0 = 2 and omega_1 = 2*pi, which keeps small indices free of
    Gamma-function rounding (omega_2 == 4*pi exactly).
    """
    if i < 0:
        raise DomainValidationError(f"sphere index must be >= 0, got {i}")
    if i == 0:
        return 2.0
    if i == 1:
        return 2.0 * math.pi
    return 2.0 * math.pi * sphere_measure(i - 2) / (i - 1)


def sinh_pow(r, k):
    """sinh(r)**k with a log-space branch for arguments that would overflow."""
    if k == 0:
        return 1.0
    if r <= 0:
        raise DomainValidationError(f"sinh_pow needs r > 0, got {r}")
    if k * r > _LOG_SPACE_THRESHOLD:
        log_sinh = r + math.log1p(-math.exp(-2.0 * r)) - math.log(2.0)
        return math.exp(k * log_sinh)
    return math.sinh(r) ** k


def cosh_pow(r, k):
    """cosh(r)**k, log-space above the overflow threshold."""
    if k == 0:
        return 1.0
    if k * r > _LOG_SPACE_THRESHOLD:
        log_cosh = r + math.log1p(math.exp(-2.0 * r)) - math.log(2.0)
        return math.exp(k * log_cosh)
    return math.cosh(r) ** k


def sinh_power_integral(m, r, dtype=float):
    """integral_0^r sinh(t)**m dt.

    For r above 0.25 the exact binomial antiderivative of
    ((e^t - e^-t)/2)^m is used (a sum of expm1 terms, the middle one
    integrating to r).  Small radii would suffer catastrophic cancellation
    there (the result scales like r^{m+1} while the terms stay O(r)), so
    they go through Gauss-Legendre on the positive integrand instead.
    """
    if m < 0:
        raise DomainValidationError("power must be >= 0")
    if r < 0:
        raise DomainValidationError("upper limit must be >= 0")
    if r == 0:
        return dtype(0.0)
    if r <= 0.25:
        x, w = gauss_legendre_nodes(48)
        t = dtype(0.5) * dtype(r) * (dtype(1.0) + x.astype(dtype))
        return dtype(0.5) * dtype(r) * np.sum(w.astype(dtype) * np.sinh(t) ** m)
    rr = dtype(r)
    total = dtype(0.0)
    for k in range(m + 1):
        a = m - 2 * k
        c = dtype(math.comb(m, k)) * dtype((-1.0) ** k)
        if a == 0:
            total += c * rr
        else:
            total += c * np.expm1(dtype(a) * rr) / dtype(a)
    return total / dtype(2.0) ** m


def sinh_power_integral_vec(m, r):
    """Vectorized float64 integral_0^r sinh^m t dt over an array of radii."""
    r = np.asarray(r, dtype=float)
    out = np.zeros_like(r)
    small = r <= 0.25
    if np.any(small):
        x, w = gauss_legendre_nodes(48)
        rs = r[small]
        t = 0.5 * rs[:, None] * (1.0 + x[None, :])
        out[small] = 0.5 * rs * (np.sinh(t) ** m @ w)
    if np.any(~small):
        rl = r[~small]
        total = np.zeros_like(rl)
        for k in range(m + 1):
            a = m - 2 * k
            c = math.comb(m, k) * (-1.0) ** k
            if a == 0:
                total += c * rl
            else:
                total += c * np.expm1(a * rl) / a
        out[~small] = total / 2.0 ** m
    return out


def ball_volume(n, r):
    """Volume of the geodesic ball B_r, omega_{n-1} * integral_0^r sinh^{n-1}."""
    n = check_dimension(n)
    if r <= 0:
        raise DomainValidationError(f"ball radius must be > 0, got {r}")
    if n == 2:
        # 2*pi*(cosh r - 1), written cancellation-free
        return 4.0 * math.pi * math.sinh(0.5 * r) ** 2
    if n == 3:
        # pi*(sinh 2r - 2r); series for small arguments
        x = 2.0 * r
        if x < 1e-2:
            x2 = x * x
            return math.pi * (x ** 3 / 6.0) * (1.0 + x2 / 20.0 + x2 * x2 / 840.0)
        return math.pi * (math.sinh(x) - x)
    return float(sphere_measure(n - 1) * sinh_power_integral(n - 1, r, dtype=_LD))


def ball_perimeter(n, r):
    """Perimeter (boundary measure) of B_r: omega_{n-1} * sinh^{n-1} r."""
    n = check_dimension(n)
    if r <= 0:
        raise DomainValidationError(f"ball radius must be > 0, got {r}")
    return sphere_measure(n - 1) * sinh_pow(r, n - 1)


@dataclass(frozen=True)
class QuermassVector:
    """Quermassintegrals (W_0, ..., W_n) of a convex body in dimension n.

    Conventions baked in: W_0 = volume, W_1 = perimeter / n and
    W_n = omega_{n-1}/n exactly.
    """

    n: int
    w: np.ndarray

    def __post_init__(self):
        check_dimension(self.n)
        if len(self.w) != self.n + 1:
            raise DomainValidationError("quermass vector must have n+1 entries")
        if np.any(np.asarray(self.w) <= 0.0):
            raise DomainValidationError("quermassintegrals of a nonempty body are positive")

    def __getitem__(self, j):
        return float(self.w[j])


def quermass_from_curvature_integrals(n, volume, v, terminal_rtol, dtype=float):
    """Solve the triangular curvature-integral relation for (W_0..W_n).

    v[n-j-1] holds the boundary integral of the j-th normalized symmetric
    curvature function; the relation V_{n-j-1} = n*(W_{j+1} + j/(n-j+1) W_{j-1})
    is marched upward from W_0 = volume.  The terminal entry must land on
    omega_{n-1}/n; a miss beyond `terminal_rtol` invalidates the inputs.
    """
    w = np.zeros(n + 1, dtype=dtype)
    w[0] = dtype(volume)
    for j in range(n):
        vj = dtype(v[n - j - 1])
        if j == 0:
            w[1] = vj / n
        else:
            w[j + 1] = vj / n - (dtype(j) / dtype(n - j + 1)) * w[j - 1]
    w_n_expected = dtype(sphere_measure(n - 1)) / n
    rel = abs(float((w[n] - w_n_expected) / w_n_expected))
    if rel > terminal_rtol:
        raise ConsistencyError(
            f"quermass recursion terminal mismatch: W_n relative error {rel:.3e} "
            f"exceeds {terminal_rtol:.1e}"
        )
    return w.astype(float)


def ball_quermass(n, r):
    """QuermassVector of the geodesic ball B_r.

    The curvature integrals of a ball are omega_{n-1} cosh^j r sinh^{n-1-j} r
    (all principal curvatures equal coth r).  The recursion is evaluated in
    extended precision: its terminal entry is a cancellation of terms that
    grow like sinh^{n-1} r, and the 1e-10 terminal guarantee would not
    survive double rounding at r ~ 4, n = 5.
    """
    n = check_dimension(n)
    if r <= 0:
        raise DomainValidationError(f"ball radius must be > 0, got {r}")
    rl = _LD(r)
    om = _LD(sphere_measure(n - 1))
    sh, ch = np.sinh(rl), np.cosh(rl)
    v = [om * ch ** j * sh ** (n - 1 - j) for j in range(n)]  # v[j] = V_{n-j-1}
    v_by_index = np.zeros(n, dtype=_LD)
    for j in range(n):
        v_by_index[n - j - 1] = v[j]
    vol = om * sinh_power_integral(n - 1, r, dtype=_LD)
    w = quermass_from_curvature_integrals(n, vol, v_by_index, 1e-10, dtype=_LD)
    return QuermassVector(n=n, w=w)


def quermass_inverse_radius(n, m, w):
    """Radius r with W_m(B_r) = w, for 0 <= m <= n-1.

    r -> W_m(B_r) is strictly increasing, so the root is unique; located by
    geometric bracket expansion followed by brentq, then residual-checked.
    """
    n = check_dimension(n)
    if not 0 <= m <= n - 1:
        raise DomainValidationError(f"index m must be in 0..{n - 1}, got {m}")
    if w <= 0:
        raise DomainValidationError(f"target quermassintegral must be > 0, got {w}")

    def f(r):
        return ball_quermass(n, r)[m] - w

    lo, hi = 1e-8, 1.0
    for _ in range(80):
        if f(lo) < 0.0:
            break
        lo *= 1e-2
    else:
        raise SearchError("could not bracket quermass inverse from below")
    for _ in range(60):
        if f(hi) > 0.0:
            break
        hi *= 2.0
    else:
        raise SearchError("could not bracket quermass inverse from above")
    r = brentq(f, lo, hi, xtol=1e-15, rtol=8.9e-16, maxiter=200)
    resid = abs(ball_quermass(n, r)[m] - w)
    if resid > 1e-12 * w:
        raise SearchError(f"inverse radius residual {resid:.3e} exceeds 1e-12 relative")
    return float(r)


def _validate_chart_points(x):
    x = np.asarray(x, dtype=float)
    if x.shape[-1] < 1:
        raise DomainValidationError("chart points need at least one coordinate")
    if np.any(np.sum(x * x, axis=-1) >= 1.0):
        raise DomainValidationError("chart point outside the open unit ball")
    return x


def poincare_distance(x, y):
    """Hyperbolic distance between Poincare-ball chart points (broadcasting).

    Evaluated as 2*asinh(|x-y| / sqrt((1-|x|^2)(1-|y|^2))), which is the
    cancellation-free form of acosh(1 + 2|x-y|^2/((1-|x|^2)(1-|y|^2))).
    """
    x = _validate_chart_points(x)
    y = _validate_chart_points(y)
    diff2 = np.sum((x - y) ** 2, axis=-1)
    ax = 1.0 - np.sum(x * x, axis=-1)
    ay = 1.0 - np.sum(y * y, axis=-1)
    return 2.0 * np.arcsinh(np.sqrt(diff2 / (ax * ay)))


# ---------------------------------------------------------------------------
# Poincare-disk helpers (2-D chart plumbing used by the planar solvers)

def mobius_shift(z, c):
    """Disk automorphism sending 0 -> c applied to complex chart points z."""
    return (z + c) / (1.0 + np.conj(c) * z)


def chart_radius(rho):
    """Euclidean chart radius of a point at hyperbolic distance rho from 0."""
    return np.tanh(np.asarray(rho, dtype=float) / 2.0)


def hyperbolic_radius(t):
    """Inverse of chart_radius."""
    return 2.0 * np.arctanh(np.asarray(t, dtype=float))


def conformal_factor(z):
    """Metric weight lambda = 2/(1-|z|^2) of the Poincare disk at z."""
    z = np.asarray(z)
    return 2.0 / (1.0 - np.abs(z) ** 2)


def geodesic_step(z0, direction, delta):
    """Point at hyperbolic distance delta from z0 along a unit chart direction.

    Directions at z0 are preserved by the automorphism centring z0, so the
    step reduces to tanh(delta/2) at the origin followed by mobius_shift.
    """
    w = np.tanh(delta / 2.0) * direction
    return mobius_shift(w, z0)
