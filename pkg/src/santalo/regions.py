"""Minimizing the polar volume and querying its sublevel regions.

The functional F(x) = integral over the sphere of (h_K(u) - <u,x>)^-n is
smooth and strictly convex on the interior of K with F(x)/n = |K^x|; its
unique minimizer is the point about which the polar body has minimal volume
and centroid zero. Regions {x : |K||K^x|/v_n^2 <= t} are star-shaped about
that minimizer (convex, in fact), so membership, radial functions, volumes,
and inclusion comparisons against scaled ellipsoids or scaled copies of the
body all reduce to one-dimensional root finding along rays.
"""
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from . import bodies
from .errors import ConvergenceError, DomainError, EmptyRegionError, InputError, PoleError
from .polar import POLE_GUARD, support_gaps
from .quadrature import Sampler, sphere_rule, unit_ball_volume
from .util import parallel_map, unit_vector

#: region membership compares |K^x| to the threshold with this relative slack
MEMBERSHIP_RTOL = 1e-9


class _PolarKernel:
    """Cached evaluation of F, its gradient and Hessian on one sphere rule.

    Support values at the rule nodes do not depend on x, so they are computed
    once; every subsequent evaluation is a dense dot product.
    """

    def __init__(self, body, rule):
        self.body = body
        self.rule = rule
        self.n = body.dim
        self.nodes = rule.nodes
        self.weights = rule.weights
        self.h = body.support_many(rule.nodes)

    def gaps(self, x):
        g = self.h - self.nodes @ np.asarray(x, dtype=float)
        bad = g <= POLE_GUARD
        if bad.any():
            i = int(np.argmax(bad))
            raise PoleError(
                f"point not strictly interior: support gap {g[i]:.3e} at node {i}",
                node=self.nodes[i],
                index=i,
            )
        return g

    def strictly_interior(self, x, margin=10 * POLE_GUARD):
        g = self.h - self.nodes @ np.asarray(x, dtype=float)
        return bool(np.all(g > margin))

    def F(self, x):
        g = self.gaps(x)
        return float(self.weights @ g ** (-self.n))

    def polar_volume(self, x):
        return self.F(x) / self.n

    def grad(self, x):
        g = self.gaps(x)
        w = self.weights * g ** (-(self.n + 1))
        return self.n * (w @ self.nodes)

    def hess(self, x):
        g = self.gaps(x)
        w = self.weights * g ** (-(self.n + 2))
        return self.n * (self.n + 1) * (self.nodes.T * w) @ self.nodes


@dataclass(frozen=True)
class SantaloSolution:
    """Result of minimizing F: the minimizing point and solver diagnostics."""

    x0: np.ndarray
    f_min: float
    iterations: int
    gradient_norm: float
    rule: str
    dim: int

    @property
    def polar_volume(self):
        """|K^{x0}| = F(x0) / n."""
        return self.f_min / self.dim


def santalo_point(body, rule=None, tol=1e-9, max_iter=100):
    """Find the interior point minimizing the polar volume.

    Damped Newton iteration on F with its analytic gradient and Hessian,
    started at the centroid and line-searched so every iterate stays strictly
    interior; stops when ||grad F|| <= tol * F.

    Raises
    ------
    ConvergenceError
        If the iteration cap is exceeded; the last iterate is attached.
    """
    if rule is None:
        rule = sphere_rule(body.dim)
    kern = _PolarKernel(body, rule)
    x = np.asarray(bodies.centroid(body), dtype=float)
    fx = kern.F(x)
    it = 0
    for it in range(1, max_iter + 1):
        g = kern.grad(x)
        gn = float(np.linalg.norm(g))
        if gn <= tol * fx:
            return SantaloSolution(x, fx, it - 1, gn, rule.descriptor, body.dim)
        H = kern.hess(x)
        try:
            step = np.linalg.solve(H, -g)
        except np.linalg.LinAlgError:
            step = -g / np.linalg.norm(g) * body.inner_radius * 0.1
        t = 1.0
        for _ in range(60):
            cand = x + t * step
            if kern.strictly_interior(cand):
                fc = kern.F(cand)
                if fc < fx:
                    x, fx = cand, fc
                    break
                # near the minimum F is flat to rounding; the full Newton step
                # still contracts the (analytic) gradient quadratically
                if t == 1.0 and fc <= fx * (1.0 + 1e-12) and np.linalg.norm(kern.grad(cand)) < gn:
                    x, fx = cand, min(fc, fx)
                    break
            t *= 0.5
        else:
            raise ConvergenceError("line search failed to make progress", last_iterate=x)
    raise ConvergenceError(f"no convergence in {max_iter} iterations", last_iterate=x)


def volume_product(body, solution=None, rule=None):
    """|K| |K^{x0}| / v_n^2: affine invariant in (0, 1], and 1 for ellipsoids."""
    if solution is None:
        solution = santalo_point(body, rule)
    vn = unit_ball_volume(body.dim)
    return bodies.volume(body) * solution.polar_volume / vn ** 2


@dataclass(frozen=True)
class CentroidResidual:
    """Norm of the MC-estimated centroid of the polar body, with its stderr."""

    residual: float
    sigma: float
    n_samples: int


def polar_centroid_residual(body, x, sampler=None, n_samples=200_000, replicates=8):
    """MC estimate of || centroid of (K - x)^0 ||; near zero iff x minimizes |K^x|."""
    x = np.asarray(x, dtype=float)
    n = body.dim
    if sampler is None:
        sampler = Sampler(0)
    try:
        pol = bodies.polar_body(body, x)
        lo, hi = bodies.bounding_box(pol)
        member = pol.contains_many
    except InputError:
        R = 1.0 / float(min(support_gaps(body, x, np.vstack([np.eye(n), -np.eye(n)]))))
        lo, hi = -2.0 * R * np.ones(n), 2.0 * R * np.ones(n)
        member = lambda Y: body.support_many(Y) - Y @ x <= 1.0 + 1e-12
    per = max(1, n_samples // replicates)
    means, total = [], 0
    for _ in range(replicates):
        Y = lo + sampler.spawn().sobol(n, per) * (hi - lo)
        inside = Y[member(Y)]
        if inside.shape[0] < 8:
            continue
        means.append(inside.mean(axis=0))
        total += inside.shape[0]
    if len(means) < 3:
        raise DomainError("too few polar-body hits for a centroid estimate")
    means = np.array(means)
    grand = means.mean(axis=0)
    sigma = float(np.sqrt(np.sum(means.var(axis=0, ddof=1) / len(means))))
    return CentroidResidual(float(np.linalg.norm(grand)), sigma, total)


# ---------------------------------------------------------------------------
# level regions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SantaloRegion:
    """Handle for the sublevel set {x in K : |K||K^x|/v_n^2 <= t}."""

    body: object
    t: float
    solution: SantaloSolution
    threshold: float            # cutoff on |K^x| itself: t v_n^2 / |K|
    product: float              # minimal normalized product of the body
    kernel: _PolarKernel = field(repr=False)

    @property
    def degenerate(self):
        """True when t sits at the minimal product: the region is the single point x0."""
        return self.t <= self.product * (1.0 + 1e-12)

    @property
    def x0(self):
        return self.solution.x0


def santalo_region(body, t, solution=None, rule=None):
    """Construct the level-t region handle (solves for x0 if not supplied)."""
    if rule is None:
        rule = sphere_rule(body.dim)
    if solution is None:
        solution = santalo_point(body, rule)
    kern = _PolarKernel(body, rule)
    vn = unit_ball_volume(body.dim)
    vol = bodies.volume(body)
    product = vol * solution.polar_volume / vn ** 2
    t = float(t)
    if t < product * (1.0 - 1e-12):
        raise EmptyRegionError(
            f"level t = {t} is below the minimal product {product:.12g}: the region is empty"
        )
    threshold = t * vn ** 2 / vol
    return SantaloRegion(body, t, solution, threshold, product, kern)


def region_contains(region, x):
    """Membership of x in the region; boundary-proximal points report False."""
    x = np.asarray(x, dtype=float)
    if region.degenerate:
        return bool(np.linalg.norm(x - region.x0) <= 1e-9)
    try:
        val = region.kernel.polar_volume(x)
    except PoleError:
        return False
    return bool(val <= region.threshold * (1.0 + MEMBERSHIP_RTOL))


def region_radial(region, u, tol=None):
    """Distance from x0 to the region boundary along the unit direction u.

    Valid because F is strictly convex with its minimum at x0: membership
    along each ray is an interval, so the boundary crossing is a simple root.
    """
    u = unit_vector(u)
    if region.degenerate:
        return 0.0
    if tol is None:
        tol = 1e-8 * bodies.diameter(region.body)
    x0 = region.x0
    rho_body = bodies.radial(region.body, x0, u)
    kern = region.kernel
    target = region.threshold * kern.n

    def F_at(rho):
        return kern.F(x0 + rho * u)

    hi = rho_body * (1.0 - 1e-9)
    for _ in range(80):
        try:
            f_hi = F_at(hi)
            break
        except PoleError:
            hi *= 1.0 - 1e-6
    else:
        raise PoleError("could not evaluate F anywhere near the body boundary")
    if f_hi < target:
        # threshold unreachable before the pole guard: the region boundary is
        # within the guard layer of the body boundary
        return hi
    f0 = kern.F(x0)
    if f0 >= target:
        return 0.0
    return float(brentq(lambda r: F_at(r) - target, 0.0, hi, xtol=tol, rtol=1e-15, maxiter=300))


def region_radial_from(region, center, u, tol=None):
    """Radial function of the region about an arbitrary interior point of it.

    Convexity makes membership along any ray from an interior point an
    interval, so the same root bracketing applies; returns 0 when the center
    itself is outside the region.
    """
    u = unit_vector(u)
    center = np.asarray(center, dtype=float)
    if region.degenerate:
        return 0.0
    if tol is None:
        tol = 1e-8 * bodies.diameter(region.body)
    kern = region.kernel
    target = region.threshold * kern.n
    if kern.F(center) > target:
        return 0.0
    rho_body = bodies.radial(region.body, center, u)
    hi = rho_body * (1.0 - 1e-9)
    for _ in range(80):
        try:
            f_hi = kern.F(center + hi * u)
            break
        except PoleError:
            hi *= 1.0 - 1e-6
    else:
        raise PoleError("could not evaluate F near the body boundary")
    if f_hi < target:
        return hi
    return float(
        brentq(lambda r: kern.F(center + r * u) - target, 0.0, hi, xtol=tol, rtol=1e-15, maxiter=300)
    )


def region_volume(region, rule=None, tol=None):
    """Volume of the region: (1/n) integral of the radial function to the n-th power."""
    if region.degenerate:
        return 0.0
    if rule is None:
        rule = region.kernel.rule
    rad = parallel_map(lambda u: region_radial(region, u, tol), rule.nodes)
    r = np.asarray(rad)
    return float(rule.weights @ r ** region.kernel.n) / region.kernel.n


# ---------------------------------------------------------------------------
# Binet ellipsoids (normalized second-moment ellipsoids)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BinetMatrix:
    """SPD matrix M with ||u||^2 = u^T M u = (1/|K|) integral of <x,u>^2 over K."""

    matrix: np.ndarray

    def __post_init__(self):
        M = np.asarray(self.matrix, dtype=float)
        object.__setattr__(self, "matrix", M)
        w = np.linalg.eigvalsh(M)
        if w[0] <= 0:
            raise DomainError("second-moment matrix must be positive definite")

    def norm(self, u):
        u = np.asarray(u, dtype=float)
        return float(np.sqrt(u @ self.matrix @ u))

    def radial(self, u):
        """Radial function of the ellipsoid {u : ||u|| <= 1} defined by this norm."""
        return 1.0 / self.norm(unit_vector(u))


def binet_matrix(body, center=None, sampler=None):
    """Second-moment matrix of the body about the given center (default centroid).

    Exact for balls, ellipsoids, and polytopes up to dimension 3 (simplex
    decomposition); Monte Carlo above that.
    """
    M = bodies.second_moment_matrix(body, center=center, sampler=sampler)
    return BinetMatrix(M)


def polar_binet_matrix(body, x0, rule=None):
    """Second-moment matrix of the polar body (K - x0)^0 by spherical quadrature.

    In polar coordinates the moment integral reduces to the same support-gap
    sums as the polar volume, so no explicit polar body or sampling is needed:
    M_ij = [ (1/(n+2)) sum w u_i u_j gap^-(n+2) ] / |K^{x0}|.
    """
    if rule is None:
        rule = sphere_rule(body.dim)
    n = body.dim
    g = support_gaps(body, x0, rule.nodes)
    w2 = rule.weights * g ** (-(n + 2))
    raw = (rule.nodes.T * w2) @ rule.nodes / (n + 2)
    pvol = float(rule.weights @ g ** (-n)) / n
    return BinetMatrix(raw / pvol)


def polar_center_section(body, x0, u, level=None):
    """(n-1)-volume of the central section of (K - x0)^0 orthogonal to u.

    Uses the identity: the central section of the polar equals the polar (in
    the hyperplane) of the projection, whose support function is the body's
    support restricted to the hyperplane.
    """
    u = unit_vector(u)
    n = body.dim
    x0 = np.asarray(x0, dtype=float)
    from .bodies import _plane_basis

    B = _plane_basis(u)
    if n == 2:
        w = B[:, 0]
        g = support_gaps(body, x0, np.vstack([w, -w]))
        return float(1.0 / g[0] + 1.0 / g[1])
    sub = sphere_rule(n - 1, level)
    dirs = sub.nodes @ B.T
    g = support_gaps(body, x0, dirs)
    return float(sub.weights @ g ** (-(n - 1))) / (n - 1)


# ---------------------------------------------------------------------------
# sandwich scale factors
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SandwichConstants:
    """Scale factors bounding the level region between known bodies.

    ``ellipsoid_*`` scale the second-moment ellipsoid of the polar body
    (inner always valid; outer_symmetric needs a symmetric body, outer_general
    holds for all bodies). ``body_*`` scale the body itself about x0.
    """

    t: float
    product: float
    ellipsoid_inner: float
    ellipsoid_outer_symmetric: float
    ellipsoid_outer_general: float
    body_inner: float
    body_outer_general: float
    body_outer_symmetric: float


def sandwich_constants(body, t, product=None, solution=None, rule=None):
    """Evaluate all sandwich scale factors at level t (needs t >= product)."""
    if product is None:
        product = volume_product(body, solution, rule)
    t = float(t)
    if t < product * (1.0 - 1e-12):
        raise DomainError(f"level t = {t} below the minimal product {product:.12g}")
    n = body.dim
    q = min(product / t, 1.0)
    root = np.sqrt(max(0.0, 1.0 - q))
    expr1 = np.sqrt(2.0 / ((n + 1) * (n + 2))) * np.sqrt(1.0 / q) * root
    expr2 = np.sqrt(2.0) * np.sqrt(max(0.0, 1.0 - q ** (1.0 / n)))
    return SandwichConstants(
        t=t,
        product=product,
        ellipsoid_inner=root / (np.sqrt(3.0) * n),
        ellipsoid_outer_symmetric=float(min(expr1, expr2)),
        ellipsoid_outer_general=2.0 * np.sqrt(2.0) / np.sqrt((np.e - 2.0) * (n + 1) * (n + 2))
        * np.sqrt(1.0 / q) * root,
        body_inner=float(1.0 - q ** (1.0 / n)),
        body_outer_general=float(1.0 - q / np.e),
        body_outer_symmetric=float(root),
    )


# ---------------------------------------------------------------------------
# directional inclusion checks
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class InclusionReport:
    """Per-direction radial comparison of two star-shaped sets about one center."""

    label: str
    directions: np.ndarray = field(repr=False)
    inner_radii: np.ndarray = field(repr=False)
    outer_radii: np.ndarray = field(repr=False)
    tol: float

    @property
    def margins(self):
        """inner - outer per direction; positive beyond tol is a violation."""
        return self.inner_radii - self.outer_radii

    @property
    def violations(self):
        return np.nonzero(self.margins > self.tol)[0]

    @property
    def worst_margin(self):
        return float(self.margins.max())

    @property
    def ok(self):
        return self.violations.size == 0

    def summary(self):
        v = self.violations
        status = "pass" if self.ok else f"FAIL({v.size})"
        return f"{self.label}: {status}, worst margin {self.worst_margin:.3e} (tol {self.tol:.1e})"


def verify_inclusion(inner_radial, outer_radial, center, dirs, tol, label="inclusion"):
    """Check inner <= outer directionally: radial_in(u) <= radial_out(u) + tol.

    ``inner_radial`` / ``outer_radial`` are callables giving the radial
    function about the shared center. Violations are reported, not raised.
    """
    dirs = np.atleast_2d(np.asarray(dirs, dtype=float))
    inner = np.array([float(inner_radial(u)) for u in dirs])
    outer = np.array([float(outer_radial(u)) for u in dirs])
    return InclusionReport(label, dirs, inner, outer, float(tol))


def direction_set(n, count, antipodal=True):
    """A spread-out antipodally symmetric set of unit directions."""
    if n == 2:
        m = count // 2 if antipodal else count
        ang = (np.arange(m) + 0.25) * (np.pi / m)
        half = np.column_stack([np.cos(ang), np.sin(ang)])
        return np.vstack([half, -half]) if antipodal else half
    rule = None
    level = 2
    while True:
        rule = sphere_rule(n, level)
        if rule.size >= count:
            break
        level += 1
    return rule.nodes[:: max(1, rule.size // count)]


def ellipsoid_sandwich_reports(body, t, symmetric, dirs, tol, solution=None, rule=None):
    """Inner/outer reports comparing the level region with the scaled polar-moment ellipsoid."""
    if rule is None:
        rule = sphere_rule(body.dim)
    if solution is None:
        solution = santalo_point(body, rule)
    region = santalo_region(body, t, solution, rule)
    sc = sandwich_constants(body, t, product=region.product)
    binet = polar_binet_matrix(body, solution.x0, rule)
    outer_scale = sc.ellipsoid_outer_symmetric if symmetric else sc.ellipsoid_outer_general
    reg = lambda u: region_radial(region, u)
    inner = verify_inclusion(
        lambda u: sc.ellipsoid_inner * binet.radial(u), reg,
        solution.x0, dirs, tol, label=f"moment-ellipsoid inner (t={t})",
    )
    outer = verify_inclusion(
        reg, lambda u: outer_scale * binet.radial(u),
        solution.x0, dirs, tol, label=f"moment-ellipsoid outer (t={t})",
    )
    return inner, outer


def body_sandwich_reports(body, t, symmetric, dirs, tol, solution=None, rule=None):
    """Inner/outer reports comparing the level region with scaled copies of the body."""
    if rule is None:
        rule = sphere_rule(body.dim)
    if solution is None:
        solution = santalo_point(body, rule)
    region = santalo_region(body, t, solution, rule)
    sc = sandwich_constants(body, t, product=region.product)
    outer_scale = sc.body_outer_symmetric if symmetric else sc.body_outer_general
    x0 = solution.x0
    body_rad = lambda s: (lambda u: s * bodies.radial(body, x0, u))
    reg = lambda u: region_radial(region, u)
    inner = verify_inclusion(
        body_rad(sc.body_inner), reg, x0, dirs, tol, label=f"scaled-body inner (t={t})"
    )
    outer = verify_inclusion(
        reg, body_rad(outer_scale), x0, dirs, tol, label=f"scaled-body outer (t={t})"
    )
    return inner, outer
