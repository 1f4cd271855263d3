"""P1 finite elements on doubly connected domains in the Poincare disk.

At p = 2 the Dirichlet integral is conformally invariant in two dimensions,
so the stiffness matrix is the flat one and only the mass matrix carries the
metric weight lambda(x)^2 = (2/(1-|x|^2))^2.  General p is handled by
minimizing the discrete Rayleigh quotient directly with a stiffness-
preconditioned (Sobolev) gradient and Armijo backtracking.

Meshes are structured polar triangulations between two boundary curves that
are star-shaped about the inner base point; the construction is intrinsic
(the inner base point is always centred), so hyperbolic isometries of the
input domain produce identical meshes and eigenvalues.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.sparse import coo_matrix
from scipy.sparse.linalg import splu

from .core import chart_radius, mobius_shift
from .bodies import Body2D
from .shell import EigResult
from .errors import DomainValidationError, NumericError, DataFormatError

MIN_ANGLE_DEG = 20.0
EIG_RESIDUAL_RTOL = 1e-10
DESCENT_WINDOW = 50
DESCENT_DECREASE = 1e-10


@dataclass(frozen=True)
class AnnularDomain2D:
    """Domain between a Dirichlet hole and an outer Neumann boundary.

    The inner body's base point sits at the chart origin; the outer body's
    base point is offset by a hyperbolic distance along a fixed direction.
    Both boundaries must be star-shaped about the origin.
    """

    inner: Body2D
    outer: Body2D
    offset: float = 0.0
    offset_angle: float = 0.0

    def __post_init__(self):
        if not isinstance(self.inner, Body2D) or not isinstance(self.outer, Body2D):
            raise DomainValidationError("annular domains are built from two Body2D")
        if self.offset < 0.0:
            raise DomainValidationError("offset must be >= 0")
        ri, ro = self.polar_tables()
        a = np.linspace(0.0, 2.0 * np.pi, 4096, endpoint=False)
        if np.min(ro(a) - ri(a)) <= 1e-9:
            raise DomainValidationError("inner boundary touches or crosses the outer one")

    def inner_chart(self, theta):
        return self.inner.chart_curve(theta)

    def outer_chart(self, theta):
        z = self.outer.chart_curve(theta)
        if self.offset == 0.0:
            return z
        c = chart_radius(self.offset) * np.exp(1j * self.offset_angle)
        return mobius_shift(z, c)

    def polar_tables(self, n_samples=8192):
        cached = getattr(self, "_tables", None)
        if cached is None or cached[0] != n_samples:
            theta = np.linspace(0.0, 2.0 * np.pi, n_samples, endpoint=False)
            rho_in = _periodic_radius_interpolant(self.inner_chart(theta))
            rho_out = _periodic_radius_interpolant(self.outer_chart(theta))
            cached = (n_samples, rho_in, rho_out)
            object.__setattr__(self, "_tables", cached)
        return cached[1], cached[2]


def _periodic_radius_interpolant(z):
    """Chart radius as a periodic cubic spline of the polar angle about 0."""
    ang = np.unwrap(np.angle(z))
    if ang[-1] < ang[0]:
        z = z[::-1]
        ang = np.unwrap(np.angle(z))
    if np.any(np.diff(ang) <= 0.0):
        raise DomainValidationError("boundary curve is not star-shaped about the base point")
    rad = np.abs(z)
    a0 = ang[0]
    angs = np.append(ang, a0 + 2.0 * np.pi)
    rads = np.append(rad, rad[0])
    spline = CubicSpline(angs, rads, bc_type="periodic")

    def table(a):
        a = np.asarray(a, dtype=float)
        return spline(a0 + np.mod(a - a0, 2.0 * np.pi))

    return table


@dataclass(frozen=True)
class Mesh:
    """Conforming triangulation with tagged inner/outer boundary loops."""

    vertices: np.ndarray
    triangles: np.ndarray
    inner_nodes: np.ndarray
    outer_nodes: np.ndarray
    h_mesh: float
    n_theta: int
    n_layers: int

    @property
    def boundary_edges(self):
        """(a, b, tag) rows; tag 'D' on the inner loop, 'N' on the outer."""
        rows = []
        for loop, tag in ((self.inner_nodes, "D"), (self.outer_nodes, "N")):
            nxt = np.roll(loop, -1)
            rows.extend((int(a), int(b), tag) for a, b in zip(loop, nxt))
        return rows

    def edge_lengths(self):
        v = self.vertices
        t = self.triangles
        e = np.concatenate([t[:, [0, 1]], t[:, [1, 2]], t[:, [2, 0]]])
        d = v[e[:, 0]] - v[e[:, 1]]
        return np.hypot(d[:, 0], d[:, 1])

    def min_angle_deg(self):
        v = self.vertices
        t = self.triangles
        p = v[t]
        angles = []
        for k in range(3):
            a = p[:, (k + 1) % 3] - p[:, k]
            b = p[:, (k + 2) % 3] - p[:, k]
            cosang = np.sum(a * b, axis=1) / (np.hypot(a[:, 0], a[:, 1]) * np.hypot(b[:, 0], b[:, 1]))
            angles.append(np.degrees(np.arccos(np.clip(cosang, -1.0, 1.0))))
        return float(np.min(angles))


def _polar_mesh(rho_in_fn, rho_out_fn, n_theta, n_layers):
    a = np.linspace(0.0, 2.0 * np.pi, n_theta, endpoint=False)
    ri, ro = rho_in_fn(a), rho_out_fn(a)
    s = np.linspace(0.0, 1.0, n_layers + 1)
    rho = ri[None, :] + s[:, None] * (ro - ri)[None, :]
    verts = np.stack([(rho * np.cos(a)[None, :]).ravel(),
                      (rho * np.sin(a)[None, :]).ravel()], axis=1)
    idx = np.arange((n_layers + 1) * n_theta).reshape(n_layers + 1, n_theta)
    tris = []
    for j in range(n_layers):
        i0 = idx[j]
        i1 = np.roll(idx[j], -1)
        i2 = idx[j + 1]
        i3 = np.roll(idx[j + 1], -1)
        even = (np.arange(n_theta) + j) % 2 == 0
        tris.append(np.where(even[:, None], np.stack([i0, i1, i3], 1), np.stack([i0, i1, i2], 1)))
        tris.append(np.where(even[:, None], np.stack([i0, i3, i2], 1), np.stack([i1, i3, i2], 1)))
    # the (theta, layer) frame is left-handed in the chart; flip to CCW
    triangles = np.concatenate(tris, axis=0)[:, [0, 2, 1]]
    return verts, triangles, idx[0].copy(), idx[n_layers].copy()


def build_mesh(dom, h_mesh):
    """Triangulate the domain with chart edges <= h_mesh and angles >= 20 deg."""
    if h_mesh <= 0:
        raise DomainValidationError("h_mesh must be > 0")
    rho_in_fn, rho_out_fn = dom.polar_tables()
    a = np.linspace(0.0, 2.0 * np.pi, 4096, endpoint=False)
    ri, ro = rho_in_fn(a), rho_out_fn(a)
    gap = ro - ri
    # boundary arc element sqrt(rho'^2 + rho^2) governs the angular density
    dro = np.gradient(ro, a)
    arc = float(np.max(np.sqrt(dro ** 2 + ro ** 2)))
    target = h_mesh / math.sqrt(2.0)
    n_theta = int(np.ceil(2.0 * np.pi * arc / target))
    n_layers = max(2, int(np.ceil(gap.max() / target)))
    for _ in range(8):
        verts, tris, inner, outer = _polar_mesh(rho_in_fn, rho_out_fn, n_theta, n_layers)
        mesh = Mesh(vertices=verts, triangles=tris, inner_nodes=inner,
                    outer_nodes=outer, h_mesh=h_mesh, n_theta=n_theta,
                    n_layers=n_layers)
        max_edge = float(mesh.edge_lengths().max())
        min_ang = mesh.min_angle_deg()
        if max_edge <= h_mesh and min_ang >= MIN_ANGLE_DEG:
            return mesh
        if max_edge > h_mesh:
            scale = max_edge / h_mesh
            n_theta = int(np.ceil(n_theta * min(scale, 2.0)))
            n_layers = int(np.ceil(n_layers * min(scale, 2.0)))
        elif min_ang < MIN_ANGLE_DEG:
            # thin cells: grow resolution transverse to the short direction
            ang_edge = 2.0 * np.pi * arc / n_theta
            rad_edge = gap.max() / n_layers
            if rad_edge > ang_edge:
                n_layers = int(np.ceil(n_layers * 1.5))
            else:
                n_theta = int(np.ceil(n_theta * 1.5))
    raise NumericError("mesh quality targets not reached; domain too distorted")


def _conformal_weight_sq(x, y):
    return (2.0 / (1.0 - (x * x + y * y))) ** 2


_MID_PAIRS = ((0, 1), (1, 2), (2, 0))
_MID_PHI = (np.array([0.5, 0.5, 0.0]), np.array([0.0, 0.5, 0.5]), np.array([0.5, 0.0, 0.5]))


def _element_geometry(mesh):
    v = mesh.vertices
    t = mesh.triangles
    x = v[t, 0]
    y = v[t, 1]
    det = ((x[:, 1] - x[:, 0]) * (y[:, 2] - y[:, 0])
           - (x[:, 2] - x[:, 0]) * (y[:, 1] - y[:, 0]))
    if np.any(det == 0.0):
        raise NumericError("degenerate triangle in mesh")
    area = 0.5 * np.abs(det)
    b = np.stack([y[:, 1] - y[:, 2], y[:, 2] - y[:, 0], y[:, 0] - y[:, 1]], 1) / det[:, None]
    c = np.stack([x[:, 2] - x[:, 1], x[:, 0] - x[:, 2], x[:, 1] - x[:, 0]], 1) / det[:, None]
    return x, y, area, b, c


def assemble_p2(mesh):
    """Flat stiffness matrix and lambda^2-weighted mass matrix."""
    x, y, area, b, c = _element_geometry(mesh)
    ke = (b[:, :, None] * b[:, None, :] + c[:, :, None] * c[:, None, :]) * area[:, None, None]
    me = np.zeros_like(ke)
    for q, (i, j) in enumerate(_MID_PAIRS):
        mx = 0.5 * (x[:, i] + x[:, j])
        my = 0.5 * (y[:, i] + y[:, j])
        w = _conformal_weight_sq(mx, my) * (area / 3.0)
        phi = _MID_PHI[q]
        me += w[:, None, None] * (phi[:, None] * phi[None, :])[None, :, :]
    t = mesh.triangles
    ii = np.repeat(t, 3, axis=1).ravel()
    jj = np.tile(t, (1, 3)).ravel()
    nv = mesh.vertices.shape[0]
    K = coo_matrix((ke.ravel(), (ii, jj)), shape=(nv, nv)).tocsr()
    M = coo_matrix((me.ravel(), (ii, jj)), shape=(nv, nv)).tocsr()
    return K, M


def boundary_mass_outer(mesh):
    """Robin (trace) mass matrix on the outer loop with hyperbolic length weight."""
    v = mesh.vertices
    loop = mesh.outer_nodes
    nxt = np.roll(loop, -1)
    ax, ay = v[loop, 0], v[loop, 1]
    bx, by = v[nxt, 0], v[nxt, 1]
    ell = np.hypot(bx - ax, by - ay)
    mx, my = 0.5 * (ax + bx), 0.5 * (ay + by)
    lam = 2.0 / (1.0 - (mx * mx + my * my))
    w = ell * lam
    ii = np.concatenate([loop, nxt, loop, nxt])
    jj = np.concatenate([loop, nxt, nxt, loop])
    vals = np.concatenate([w / 3.0, w / 3.0, w / 6.0, w / 6.0])
    nv = v.shape[0]
    return coo_matrix((vals, (ii, jj)), shape=(nv, nv)).tocsr()


def hyperbolic_area(mesh):
    """Hyperbolic area of the meshed region from the weighted mass matrix."""
    _, M = assemble_p2(mesh)
    return float(M.sum())


def eigen_p2(mesh, max_iter=400):
    """Smallest eigenvalue of (K, M) with inner-Dirichlet elimination.

    Shifted (at zero) inverse power iteration on a sparse LU factorization,
    stopping on ||K u - tau M u|| <= 1e-10 ||M u||.
    """
    K, M = assemble_p2(mesh)
    nv = mesh.vertices.shape[0]
    free = np.setdiff1d(np.arange(nv), mesh.inner_nodes)
    Kf = K[np.ix_(free, free)].tocsc()
    Mf = M[np.ix_(free, free)].tocsr()
    lu = splu(Kf)
    u = np.ones(len(free))
    u /= math.sqrt(u @ (Mf @ u))
    tau = float(u @ (Kf @ u))
    res = np.inf
    for it in range(max_iter):
        z = lu.solve(Mf @ u)
        z /= math.sqrt(z @ (Mf @ z))
        tau = float(z @ (Kf @ z))
        resid = Kf @ z - tau * (Mf @ z)
        res = float(np.linalg.norm(resid) / np.linalg.norm(Mf @ z))
        u = z
        if res <= EIG_RESIDUAL_RTOL:
            break
    else:
        raise NumericError(f"inverse iteration stalled at residual {res:.2e}")
    if u[np.argmax(np.abs(u))] < 0.0:
        u = -u
    full = np.zeros(nv)
    full[free] = u
    residuals = {"eig_residual": res, "dirichlet_trace": float(np.max(np.abs(full[mesh.inner_nodes])))}
    meta = {"n_vertices": nv, "n_triangles": mesh.triangles.shape[0],
            "h_mesh": mesh.h_mesh, "iterations": it + 1, "p": 2.0}
    return EigResult(tau1=tau, residuals=residuals, meta=meta, u=full)


class _RayleighP:
    """Discrete Rayleigh quotient for general p on a fixed mesh."""

    def __init__(self, mesh, p):
        self.mesh = mesh
        self.p = p
        x, y, area, b, c = _element_geometry(mesh)
        self.b, self.c = b, c
        self.t = mesh.triangles
        self.nv = mesh.vertices.shape[0]
        self.nu = np.zeros(len(area))
        self.mass_w = np.zeros((len(area), 3))
        for q, (i, j) in enumerate(_MID_PAIRS):
            mx = 0.5 * (x[:, i] + x[:, j])
            my = 0.5 * (y[:, i] + y[:, j])
            lam = 2.0 / (1.0 - (mx * mx + my * my))
            self.nu += (area / 3.0) * lam ** (2.0 - p)
            self.mass_w[:, q] = (area / 3.0) * lam ** 2

    def value_and_grad(self, u):
        p = self.p
        t = self.t
        gx = np.sum(self.b * u[t], axis=1)
        gy = np.sum(self.c * u[t], axis=1)
        g2 = gx * gx + gy * gy + 1e-300
        num = float(np.sum(self.nu * g2 ** (p / 2.0)))
        coef = self.nu * p * g2 ** (p / 2.0 - 1.0)
        g_num = np.zeros(self.nv)
        for loc in range(3):
            g_num += np.bincount(t[:, loc], coef * (gx * self.b[:, loc] + gy * self.c[:, loc]),
                                 minlength=self.nv)
        den = 0.0
        g_den = np.zeros(self.nv)
        for q, (i, j) in enumerate(_MID_PAIRS):
            uq = 0.5 * (u[t[:, i]] + u[t[:, j]])
            w = self.mass_w[:, q]
            den += float(np.sum(w * np.abs(uq) ** p))
            dd = 0.5 * w * p * np.abs(uq) ** (p - 1.0) * np.sign(uq)
            g_den += np.bincount(t[:, i], dd, minlength=self.nv)
            g_den += np.bincount(t[:, j], dd, minlength=self.nv)
        return num, den, g_num, g_den


def eigen_p_general(mesh, p, max_iter=2000):
    """Upper-bound approximation of tau_1 for general p in (1, inf).

    Minimizes the P1 Rayleigh quotient with a stiffness-preconditioned
    gradient (Armijo backtracking, renormalizing the p-norm each step),
    multi-started from the p = 2 eigenvector and from the constant 1.
    Global optimality is not certified; the result is an upper bound whose
    quality is established by the radial cross-checks.
    """
    if not p > 1.0:
        raise DomainValidationError(f"exponent p must exceed 1, got {p}")
    rq = _RayleighP(mesh, p)
    nv = rq.nv
    free = np.setdiff1d(np.arange(nv), mesh.inner_nodes)
    K, _ = assemble_p2(mesh)
    lu = splu(K[np.ix_(free, free)].tocsc())

    p2 = eigen_p2(mesh)
    starts = {"p2_eigenvector": np.abs(p2.u), "constant": None}
    const = np.zeros(nv)
    const[free] = 1.0
    starts["constant"] = const

    best = None
    for label, u0 in starts.items():
        u = u0.copy()
        num, den, _, _ = rq.value_and_grad(u)
        u /= den ** (1.0 / p)
        history = []
        value = num / den
        iterations = 0
        for it in range(max_iter):
            num, den, g_num, g_den = rq.value_and_grad(u)
            value = num / den
            grad = (g_num - value * g_den) / den
            grad[mesh.inner_nodes] = 0.0
            z = np.zeros(nv)
            z[free] = lu.solve(grad[free])
            slope = float(grad @ z)
            if slope <= 0.0:
                break
            step, ok = 1.0, False
            for _ in range(50):
                trial = u - step * z
                t_num, t_den, _, _ = rq.value_and_grad(trial)
                if t_num / t_den < value - 1e-4 * step * slope:
                    ok = True
                    break
                step *= 0.5
            if not ok:
                break
            u = trial / t_den ** (1.0 / p)
            value = t_num / t_den
            history.append(value)
            iterations = it + 1
            if len(history) > DESCENT_WINDOW and \
                    history[-DESCENT_WINDOW - 1] - value < DESCENT_DECREASE * value:
                break
        if best is None or value < best[0]:
            best = (value, u, label, iterations)

    value, u, label, iterations = best
    if iterations >= max_iter:
        raise NumericError("Rayleigh descent hit the iteration limit without settling")
    residuals = {"dirichlet_trace": float(np.max(np.abs(u[mesh.inner_nodes])))}
    meta = {"n_vertices": nv, "h_mesh": mesh.h_mesh, "p": p, "start": label,
            "iterations": iterations, "upper_bound_only": True}
    return EigResult(tau1=float(value), residuals=residuals, meta=meta, u=u)


# ---------------------------------------------------------------------------
# Mesh text format: counts, vertices, triangles, tagged boundary edges

def save_mesh(mesh, path):
    with open(path, "w", encoding="utf-8") as fh:
        edges = mesh.boundary_edges
        fh.write("horokit-mesh 1\n")
        fh.write(f"{mesh.vertices.shape[0]} {mesh.triangles.shape[0]} {len(edges)}\n")
        for vx, vy in mesh.vertices:
            fh.write(f"{vx:.17g} {vy:.17g}\n")
        for a, b, c in mesh.triangles:
            fh.write(f"{a} {b} {c}\n")
        for a, b, tag in edges:
            fh.write(f"{a} {b} {tag}\n")
        fh.write(f"meta {mesh.h_mesh:.17g} {mesh.n_theta} {mesh.n_layers}\n")


def load_mesh(path):
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines or not lines[0].startswith("horokit-mesh"):
        raise DataFormatError(f"{path}: not a horokit mesh file")
    nv, nt, nb = (int(s) for s in lines[1].split())
    verts = np.array([[float(x) for x in ln.split()] for ln in lines[2:2 + nv]])
    tris = np.array([[int(x) for x in ln.split()] for ln in lines[2 + nv:2 + nv + nt]])
    inner, outer = [], []
    for ln in lines[2 + nv + nt:2 + nv + nt + nb]:
        a, b, tag = ln.split()
        (inner if tag == "D" else outer).append(int(a))
    meta = lines[2 + nv + nt + nb].split()
    return Mesh(vertices=verts, triangles=tris,
                inner_nodes=np.array(inner, dtype=int),
                outer_nodes=np.array(outer, dtype=int),
                h_mesh=float(meta[1]), n_theta=int(meta[2]), n_layers=int(meta[3]))
