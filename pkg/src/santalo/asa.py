"""Affine surface area: curvature closed forms and the region-deficit limit.

For smooth bodies the affine surface area is the boundary integral of the
Gaussian curvature to the power 1/(n+1); balls and ellipsoids have closed
forms and polytopes have value exactly zero (their generalized curvature
vanishes almost everywhere). Independently, the scaled volume deficit
t^(2/(n+1)) (|K| - |S_t|) of the level regions converges to
(1/2) (|K|/v_n)^(2/(n+1)) times the affine surface area as t grows, giving a
numerical estimator that needs no boundary derivatives. Deficits are
computed as a single boundary integral (difference form) wherever a boundary
quadrature scheme exists, which cancels the systematic part of the error.
"""
from dataclasses import dataclass, field

import numpy as np

from . import bodies, regions
from .errors import InputError, NotSmoothError
from .quadrature import gauss_legendre, sphere_rule, unit_ball_volume


def asa_direct(body):
    """Affine surface area from closed forms.

    Balls of radius r: n v_n r^(n(n-1)/(n+1)); ellipsoids by the
    determinant-power covariance of the functional under linear maps;
    polytopes: exactly 0.
    """
    n = body.dim
    conc = bodies.as_concrete(body)
    if isinstance(conc, bodies.Ball):
        return n * unit_ball_volume(n) * conc.radius ** (n * (n - 1) / (n + 1))
    if isinstance(conc, bodies.Ellipsoid):
        det = np.linalg.det(conc.shape)
        return n * unit_ball_volume(n) * det ** (-(n - 1) / (2.0 * (n + 1)))
    if isinstance(conc, (bodies.VPolytope, bodies.HPolytope)):
        return 0.0
    raise NotSmoothError(f"no curvature integral for body variant {type(body).__name__}")


# ---------------------------------------------------------------------------
# boundary integrals
# ---------------------------------------------------------------------------

def boundary_volume_difference(body, l_radial, rule=None, center=None, edge_order=6):
    """|K| - |L| as one boundary integral over the outer body K.

    Evaluates (1/n) times the surface integral of
    <x - c, N(x)> (1 - (||x_L - c|| / ||x - c||)^n), where x_L is where the
    segment from the ray center c to x crosses the boundary of L;
    ``l_radial`` is the radial function of L about c (which must be interior
    to L, L inside K). Supported boundaries: balls/ellipsoids in any
    dimension (sphere-rule transplantation), polygons (per-edge panels with
    geometric grading into the corners), and 3-d polytope facets.
    """
    n = body.dim
    if center is None:
        center = np.asarray(body.interior, dtype=float)
    center = np.asarray(center, dtype=float)
    conc = bodies.as_concrete(body)
    if isinstance(conc, (bodies.Ball, bodies.Ellipsoid)):
        return _ellipsoid_boundary_integral(conc, l_radial, center, rule)
    if isinstance(conc, (bodies.VPolytope, bodies.HPolytope)):
        if n == 2:
            return _polygon_boundary_integral(conc, l_radial, center, edge_order)
        if n == 3:
            return _polyhedron_boundary_integral(conc, l_radial, center)
    raise InputError("no boundary quadrature scheme for this body variant/dimension")


def _deficit_factor(rho_in, rho, n):
    return 1.0 - (rho_in / rho) ** n


def _ellipsoid_boundary_integral(conc, l_radial, center, rule):
    """Transplant the surface integral to the sphere: x = c_E + T u."""
    n = conc.dim
    if rule is None:
        rule = sphere_rule(n)
    if isinstance(conc, bodies.Ball):
        T = np.eye(n) * conc.radius
        det = conc.radius ** n
        Tti = np.eye(n) / conc.radius
        cE = conc.center
    else:
        w, Q = np.linalg.eigh(conc.shape)
        T = Q @ np.diag(w ** -0.5) @ Q.T          # M^{-1/2}
        Tti = Q @ np.diag(w ** 0.5) @ Q.T          # (T^{-1})^T = M^{1/2}
        det = float(np.prod(w ** -0.5))
        cE = conc.center
    total = 0.0
    X = cE + rule.nodes @ T.T
    NU = rule.nodes @ Tti.T                       # unnormalized outward normals
    D = X - center
    rho = np.linalg.norm(D, axis=1)
    vals = np.empty(rule.size)
    for i in range(rule.size):
        u_hat = D[i] / rho[i]
        vals[i] = (D[i] @ NU[i]) * _deficit_factor(float(l_radial(u_hat)), rho[i], n)
    total = det * float(rule.weights @ vals)
    return total / n


def _edge_panels(length, order, min_frac=1e-9, ratio=0.25):
    """Panel breakpoints on [0, length], geometrically graded into both ends."""
    pts = {0.0, length}
    w = 0.5 * length
    while w > min_frac * length:
        pts.add(w)
        pts.add(length - w)
        w *= ratio
    return np.array(sorted(pts))


def _polygon_boundary_integral(conc, l_radial, center, edge_order):
    n = 2
    V = bodies.polytope_vertices(conc)
    from scipy.spatial import ConvexHull

    hull = ConvexHull(V)
    P = V[hull.vertices]                          # counterclockwise
    gl = gauss_legendre(edge_order)
    total = 0.0
    m = len(P)
    for i in range(m):
        p, q = P[i], P[(i + 1) % m]
        edge = q - p
        L = float(np.linalg.norm(edge))
        tang = edge / L
        normal = np.array([tang[1], -tang[0]])    # outward for CCW order
        d_e = float((p - center) @ normal)
        bp = _edge_panels(L, edge_order)

        def g(s):
            s = np.atleast_1d(s)
            out = np.empty(s.size)
            for k, sk in enumerate(s):
                x = p + sk * tang
                D = x - center
                rho = float(np.linalg.norm(D))
                out[k] = _deficit_factor(float(l_radial(D / rho)), rho, n)
            return out

        acc = 0.0
        for a, b in zip(bp[:-1], bp[1:]):
            acc += gl.integrate(g, a, b)
        total += d_e * acc
    return total / n


# degree-5 symmetric 7-point rule on the reference triangle
_TRI_W = np.array([0.225] + [0.125939180544827] * 3 + [0.132394152788506] * 3)
_A1, _B1 = 0.797426985353087, 0.101286507323456
_A2, _B2 = 0.059715871789770, 0.470142064105115
_TRI_P = np.array(
    [
        [1 / 3, 1 / 3, 1 / 3],
        [_A1, _B1, _B1], [_B1, _A1, _B1], [_B1, _B1, _A1],
        [_A2, _B2, _B2], [_B2, _A2, _B2], [_B2, _B2, _A2],
    ]
)


def _triangle_quad(f, tri, levels=1):
    """Integrate f over a 3-d triangle with the 7-point rule, optionally subdivided."""
    if levels > 0:
        a, b, c = tri
        ab, bc, ca = (a + b) / 2, (b + c) / 2, (c + a) / 2
        return sum(
            _triangle_quad(f, np.array(t), levels - 1)
            for t in ((a, ab, ca), (ab, b, bc), (ca, bc, c), (ab, bc, ca))
        )
    area = 0.5 * np.linalg.norm(np.cross(tri[1] - tri[0], tri[2] - tri[0]))
    pts = _TRI_P @ tri
    return area * float(sum(w * f(x) for w, x in zip(_TRI_W, pts)))


def _polyhedron_boundary_integral(conc, l_radial, center, levels=2):
    n = 3
    V = bodies.polytope_vertices(conc)
    from scipy.spatial import ConvexHull

    hull = ConvexHull(V)
    z = V[hull.vertices].mean(axis=0)
    total = 0.0
    for simplex, eq in zip(hull.simplices, hull.equations):
        tri = V[simplex]
        normal = eq[:3]
        if (tri[0] - z) @ normal < 0:
            normal = -normal
        d_e = float((tri[0] - center) @ normal)

        def f(x):
            D = x - center
            rho = float(np.linalg.norm(D))
            return _deficit_factor(float(l_radial(D / rho)), rho, n)

        total += d_e * _triangle_quad(f, tri, levels=levels)
    return total / n


# ---------------------------------------------------------------------------
# the limit estimator
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AsaEstimate:
    """Per-level deficit estimates and their extrapolated limit.

    ``estimates[i]`` is t_i^(2/(n+1)) (|K| - |S_{t_i}|); ``extrapolated`` is
    the Richardson value at infinite level; ``as_value`` rescales it to the
    affine-surface-area normalization, and ``direct`` / ``predicted_limit``
    hold the closed-form counterpart when one exists.
    """

    t_values: np.ndarray
    estimates: np.ndarray
    extrapolated: float
    as_value: float
    direct: float
    predicted_limit: float
    monotone_warning: bool = False

    def __post_init__(self):
        t = np.asarray(self.t_values, dtype=float)
        e = np.asarray(self.estimates, dtype=float)
        if t.ndim != 1 or np.any(np.diff(t) <= 0):
            raise InputError("t_values must be strictly increasing")
        if not np.all(np.isfinite(e)):
            raise InputError("estimates must be finite")
        object.__setattr__(self, "t_values", t)
        object.__setattr__(self, "estimates", e)


def default_t_schedule(product):
    """Geometric level schedule {8, 32, 128, 512, 2048} x minimal product."""
    return [c * product for c in (8.0, 32.0, 128.0, 512.0, 2048.0)]


def region_deficit(body, region, rule=None, radial_tol=None):
    """|K| - |S(K, t)| for one region, by the difference boundary integral.

    Falls back to (radial-integral of K) - (region volume) over a shared
    direction rule when no boundary scheme exists; the shared rule cancels
    the direction-discretization error common to both terms.
    """
    x0 = region.x0
    l_rad = lambda u: regions.region_radial(region, u, radial_tol)
    try:
        return boundary_volume_difference(body, l_rad, rule=rule, center=x0)
    except InputError:
        pass
    dir_rule = rule or region.kernel.rule
    rho_K = np.array([bodies.radial(body, x0, u) for u in dir_rule.nodes])
    vol_K = float(dir_rule.weights @ rho_K ** body.dim) / body.dim
    return vol_K - regions.region_volume(region, dir_rule, radial_tol)


def asa_limit(body, t_schedule=None, rule=None, tol=None, solution=None):
    """Estimate the affine surface area from the region-deficit limit.

    Parameters
    ----------
    body : ConvexBody
    t_schedule : sequence of float, optional
        Strictly increasing levels; defaults to the geometric schedule
        scaled by the body's minimal product. The smallest level must be at
        least twice the minimal product.
    rule : SphereRule, optional
        Quadrature rule for the polar functional (and boundary transplant).
    tol : float, optional
        Radial root tolerance; defaults to 1e-10 times the diameter.
    solution : SantaloSolution, optional

    The extrapolation fits a quadratic in s = t^(-2/(n+1)) through the last
    three estimates and reads off s = 0; the exponent comes from the limit
    law, not from fitting, because three to five points cannot identify it
    stably.
    """
    n = body.dim
    if rule is None:
        rule = sphere_rule(n)
    if solution is None:
        solution = regions.santalo_point(body, rule)
    product = regions.volume_product(body, solution)
    if t_schedule is None:
        t_schedule = default_t_schedule(product)
    t_schedule = [float(t) for t in t_schedule]
    if any(b <= a for a, b in zip(t_schedule, t_schedule[1:])):
        raise InputError("t_schedule must be strictly increasing")
    if t_schedule[0] < 2.0 * product:
        raise InputError(f"smallest level {t_schedule[0]} below twice the minimal product {product:.6g}")
    if tol is None:
        tol = 1e-10 * bodies.diameter(body)
    ests = []
    for t in t_schedule:
        region = regions.santalo_region(body, t, solution, rule)
        deficit = region_deficit(body, region, rule=rule, radial_tol=tol)
        ests.append(t ** (2.0 / (n + 1)) * deficit)
    ests = np.array(ests)
    s = np.array(t_schedule) ** (-2.0 / (n + 1))
    if len(ests) >= 3:
        coef = np.polyfit(s[-3:], ests[-3:], 2)
        extrapolated = float(np.polyval(coef, 0.0))
    else:
        extrapolated = float(ests[-1])
    vn = unit_ball_volume(n)
    volK = bodies.volume(body)
    as_value = 2.0 * (vn / volK) ** (2.0 / (n + 1)) * extrapolated
    try:
        direct = asa_direct(body)
        predicted = 0.5 * (volK / vn) ** (2.0 / (n + 1)) * direct
    except NotSmoothError:
        direct, predicted = float("nan"), float("nan")
    diffs = np.diff(ests)
    monotone = bool(np.all(diffs >= -1e-9 * np.abs(ests[:-1])) or np.all(diffs <= 1e-9 * np.abs(ests[:-1])))
    return AsaEstimate(
        np.array(t_schedule), ests, extrapolated, as_value, direct, predicted,
        monotone_warning=not monotone,
    )
