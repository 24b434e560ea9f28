"""Polar-body volume |K^x| by three independent routes, plus closed forms.

The spherical route integrates the inverse support gap over the sphere, the
dual-domain route integrates a pole kernel over the polar body itself, and
the section route reduces to a one-dimensional integral of a section profile
of the polar. The closed forms (ball polar volume, the weighted profile
integrals, and the cone-cap bodies) serve as analytic oracles for all three.
"""
from dataclasses import dataclass
from math import factorial

import numpy as np
from scipy.integrate import quad
from scipy.special import gammaln

from . import bodies
from .errors import DomainError, InputError, PoleError
from .quadrature import Sampler, gauss_legendre, half_rule, unit_ball_volume
from .util import unit_vector

#: minimum admissible support gap / pole distance; integrands grow like
#: gap^-n, so quadrature error is unbounded closer to the boundary
POLE_GUARD = 1e-9


@dataclass(frozen=True)
class PolarVolumeResult:
    """A polar-volume value with its route and error information."""

    value: float
    route: str
    rule: str
    estimated_error: float

    def __post_init__(self):
        if not (np.isfinite(self.value) and self.value > 0):
            raise DomainError(f"polar volume must be positive and finite, got {self.value}")


def support_gaps(body, x, nodes):
    """h_K(u) - <u, x> for each node direction u, with the pole guard applied."""
    x = np.asarray(x, dtype=float)
    gaps = body.support_many(nodes) - nodes @ x
    bad = gaps <= POLE_GUARD
    if bad.any():
        i = int(np.argmax(bad))
        raise PoleError(
            "point not strictly interior: support gap "
            f"{gaps[i]:.3e} <= {POLE_GUARD} at node {i} (direction {nodes[i]})",
            node=nodes[i],
            index=i,
        )
    return gaps


def polar_volume_value(body, x, rule):
    """Bare spherical-route value (1/n) sum w_i gap_i^-n; no error estimate."""
    gaps = support_gaps(body, x, rule.nodes)
    n = body.dim
    return float(rule.weights @ gaps ** (-n)) / n


def polar_volume_spherical(body, x, rule, error_estimate=True):
    """|K^x| via the spherical integral of the inverse support gap.

    Parameters
    ----------
    body : ConvexBody
    x : array_like
        Strictly interior point (gap above the pole guard at every node).
    rule : SphereRule
    error_estimate : bool
        When true, the value is recomputed on a half-level rule and the
        difference reported as the error estimate.
    """
    val = polar_volume_value(body, x, rule)
    err = np.nan
    if error_estimate:
        coarse = polar_volume_value(body, x, half_rule(rule))
        err = abs(val - coarse)
    return PolarVolumeResult(val, "spherical", rule.descriptor, err)


def polar_volume_dual(body, x, sampler=None, n_samples=200_000, center=None, replicates=8):
    """|K^x| as the integral of (1 - <x - c, y>)^-(n+1) over the polar about c.

    The body is translated so the designated center c sits at the origin
    (the identity holds for the polar about any fixed interior origin); c
    defaults to the centroid, and callers that have solved for the minimizing
    point should pass it instead. Sampling is scrambled-QMC rejection with
    replicate-based standard errors.
    """
    x = np.asarray(x, dtype=float)
    n = body.dim
    if sampler is None:
        sampler = Sampler(0)
    if center is None:
        center = bodies.centroid(body)
    center = np.asarray(center, dtype=float)
    xt = x - center
    try:
        polar = bodies.polar_body(body, center)
    except InputError:
        polar = None
    if polar is not None:
        lo, hi = bodies.bounding_box(polar)
        member = polar.contains_many
    else:
        lo, hi = _polar_box_by_probing(body, center)
        member = lambda Y: body.support_many(Y) - Y @ center <= 1.0 + 1e-12

    box = float(np.prod(hi - lo))
    per = 1 << max(9, int(np.ceil(np.log2(max(1, n_samples // replicates)))))
    vals = []
    for _ in range(replicates):
        Y = lo + sampler.spawn().sobol(n, per) * (hi - lo)
        inside = Y[member(Y)]
        dens = 1.0 - inside @ xt
        if np.any(dens <= POLE_GUARD):
            i = int(np.argmax(dens <= POLE_GUARD))
            raise PoleError(
                "dual-domain integrand pole: 1 - <x, y> <= "
                f"{POLE_GUARD} at sample y = {inside[i]}",
                node=inside[i],
            )
        vals.append(box * float(np.sum(dens ** (-(n + 1)))) / per)
    vals = np.array(vals)
    sigma = float(vals.std(ddof=1) / np.sqrt(replicates))
    return PolarVolumeResult(float(vals.mean()), "dual_domain", f"sobol(N={per * replicates},rep={replicates})", sigma)


def _polar_box_by_probing(body, center):
    """Safe axis box around the polar body when no explicit polar exists."""
    from .quadrature import sphere_rule

    probe = sphere_rule(body.dim, max(32, 2 ** (9 - body.dim)))
    gaps = support_gaps(body, center, probe.nodes)
    r_in = float(gaps.min())
    # support-gap minimum over finitely many directions overestimates the true
    # inradius by at most diam * gap-angle; pad generously
    R = 1.25 / max(r_in - bodies.diameter(body) * (np.pi / probe.size), 0.5 * r_in)
    return -R * np.ones(body.dim), R * np.ones(body.dim)


def polar_volume_section(profile, lam, quad_tol=1e-11):
    """|K^x| for x = lam * u from the section profile of the polar body.

    ``profile`` must be the SectionProfile of the polar body K^0 (about the
    same center x is measured from) along the direction u of x.
    """
    n = profile.dim
    lam = float(lam)
    hi, lo = profile.support_plus, -profile.support_minus
    if lam * hi >= 1.0 - POLE_GUARD or lam * lo >= 1.0 - POLE_GUARD:
        raise PoleError(f"section-route pole: lam * support = {max(lam * hi, lam * lo):.6f} too close to 1")
    f = lambda t: profile.evaluate(t) / (1.0 - lam * t) ** (n + 1)
    inner_pts = [p for p in (0.0,) if lo < p < hi]
    val, err = quad(f, lo, hi, points=inner_pts or None, limit=300, epsabs=quad_tol, epsrel=quad_tol)
    return PolarVolumeResult(float(val), "section", f"adaptive(tol={quad_tol})", float(err))


# ---------------------------------------------------------------------------
# closed forms
# ---------------------------------------------------------------------------

def ball_polar_volume(r, lam, n):
    """|B(0,r)^x| for x at distance lam from the center: v_n / (r^n (1-(lam/r)^2)^((n+1)/2))."""
    if not 0.0 <= lam < r:
        raise DomainError(f"need 0 <= lam < r, got lam={lam}, r={r}")
    return unit_ball_volume(n) / (r ** n * (1.0 - (lam / r) ** 2) ** ((n + 1) / 2.0))


def ball_profile_integral(alpha, n):
    """Closed form of the ball-section profile integrated against the pole kernel.

    Equals the integral over [-1, 1] of (1-x^2)^((n-1)/2) (1-alpha x)^-(n+1),
    which is 2^n Gamma((n+1)/2)^2 / ((1-alpha^2)^((n+1)/2) n!).
    """
    if not 0.0 <= alpha < 1.0:
        raise DomainError(f"need 0 <= alpha < 1, got {alpha}")
    c = 2.0 ** n * np.exp(2.0 * gammaln((n + 1) / 2.0) - gammaln(n + 1.0))
    return float(c / (1.0 - alpha * alpha) ** ((n + 1) / 2.0))


def half_profile_ratio(alpha, n, quad_tol=1e-12):
    """Normalized half-range profile integral; bounded by 1 and -> 1 as alpha -> 1.

    Computed by adaptive quadrature after the variable change that stretches
    the boundary layer at x = 1 (width (1-alpha)/alpha) to unit scale, which
    keeps the integrand benign for alpha arbitrarily close to 1.
    """
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"need 0 < alpha < 1, got {alpha}")
    p = (n - 1) / 2.0
    c = np.exp(gammaln(n + 1.0) - 2.0 * gammaln((n + 1) / 2.0)) / 2.0 ** p
    t = (1.0 - alpha) / alpha
    f = lambda w: w ** p * (2.0 - t * w) ** p / (1.0 + w) ** (n + 1)
    hi = alpha / (1.0 - alpha)
    val, _ = quad(f, 0.0, hi, points=[min(1.0, hi)], limit=400, epsabs=quad_tol, epsrel=quad_tol)
    return float(c * val)


def half_profile_ratio_direct(alpha, n, quad_tol=1e-12):
    """Same ratio from the defining integral on [0, 1]; only stable for moderate alpha."""
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"need 0 < alpha < 1, got {alpha}")
    p = (n - 1) / 2.0
    c = (
        alpha ** ((n + 1) / 2.0)
        * (1.0 - alpha) ** ((n + 1) / 2.0)
        * np.exp(gammaln(n + 1.0) - 2.0 * gammaln((n + 1) / 2.0))
        / 2.0 ** p
    )
    f = lambda x: (1.0 - x * x) ** p / (1.0 - alpha * x) ** (n + 1)
    val, _ = quad(f, 0.0, 1.0, limit=400, epsabs=quad_tol, epsrel=quad_tol)
    return float(c * val)


def cone_profile_integral(a, b, lam, n):
    """Closed form of the cone profile (1-y/a)^(n-1) against the pole kernel on [-b, a].

    Valid while the kernel pole stays outside the interval: lam*a < 1 and
    lam*b > -1.
    """
    if a <= 0 or b <= 0:
        raise DomainError("cone profile needs a, b > 0")
    if lam * a >= 1.0:
        raise DomainError(f"pole inside interval: lam*a = {lam * a} >= 1")
    if lam * b <= -1.0:
        raise DomainError(f"pole inside interval: lam*b = {lam * b} <= -1")
    return float((a + b) ** n / (n * a ** (n - 1) * (1.0 - lam * a) * (1.0 + lam * b) ** n))


# ---------------------------------------------------------------------------
# cone-cap bodies (rotationally symmetric cap-plus-cone unions)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ConeCapShape:
    """A body of revolution: a cap of a radius-r ball joined to a cone part.

    ``kind="truncated_cone_cap"``: the cone part is a frustum whose lateral
    surface is tangent to the sphere at the joining circle, of height h
    measured from that circle.

    ``kind="cone_cap"``: the cone part has its base on the joining circle and
    its apex on the axis at depth h below the base plane.

    Distances are measured from the polar evaluation point x on the symmetry
    axis: ``a`` to the cone part (the joining plane), ``b`` to the spherical
    part of the cap boundary. Requires r > a + b so that x is interior and
    the joining circle is real.
    """

    r: float
    a: float
    b: float
    h: float
    dim: int
    kind: str = "truncated_cone_cap"

    def __post_init__(self):
        if self.kind not in ("truncated_cone_cap", "cone_cap"):
            raise InputError(f"unknown cone-cap kind {self.kind!r}")
        if not (self.r > 0 and self.b > 0 and self.h >= 0 and self.a >= 0):
            raise DomainError("cone-cap shape needs r, b > 0 and a, h >= 0")
        if self.r <= self.a + self.b:
            raise DomainError(f"need r > a + b, got r={self.r}, a+b={self.a + self.b}")
        if self.a + self.h <= 0:
            raise DomainError("cone part has zero extent (a + h = 0)")
        if self.kind == "cone_cap" and self.h <= 0:
            raise DomainError("cone_cap kind needs h > 0")
        if not (2 <= self.dim <= 6):
            raise InputError(f"dim must be in [2, 6], got {self.dim}")

    @property
    def junction_radius(self):
        """Radius of the circle where the cone part meets the sphere."""
        s = self.a + self.b
        return float(np.sqrt(2.0 * self.r * s - s * s))

    @property
    def junction_coordinate(self):
        """Reciprocal axis coordinate 1/b0 where the polar profile switches pieces.

        b0 is derived from the tangency geometry of the polar profile:
        (a + b0)(r - (a+b)) equals the squared junction radius, giving
        b0 = (r b + (a+b)(r-b)) / (r - (a+b)) for both kinds.
        """
        s = self.a + self.b
        b0 = (self.r * self.b + s * (self.r - self.b)) / (self.r - s)
        return 1.0 / b0


def cone_cap_profile(shape):
    """(l, lo, junction, hi): the polar section-radius profile and its domain.

    The polar body of the shape about x is rotationally symmetric; its
    section orthogonal to the axis at coordinate t is a ball of radius l(t)
    for t in [lo, hi], with the formula switching at the junction.
    """
    r, a, b, h, n = shape.r, shape.a, shape.b, shape.h, shape.dim
    RJ = shape.junction_radius
    xj = shape.junction_coordinate
    b0 = 1.0 / xj
    lo = -1.0 / (a + h)
    hi = 1.0 / b

    if shape.kind == "truncated_cone_cap":
        C = RJ / ((a + h + b0) * (r - (a + b)))
        def l_low(t):
            return (1.0 + (a + h) * t) * C
    else:
        def l_low(t):
            return (1.0 + a * t) / RJ

    def l_high(t):
        t = np.asarray(t, dtype=float)
        disc = (1.0 + t * (r - b)) ** 2 - (r * t) ** 2
        return np.sqrt(np.maximum(disc, 0.0)) / r

    def l(t):
        t = np.asarray(t, dtype=float)
        return np.where(t <= xj, l_low(t), l_high(t))

    return l, lo, xj, hi


def cone_cap_polar_volume(shape, order=80):
    """|M^x| for the cone-cap body, integrating the polar radius profile.

    v_{n-1} times the integral of l(t)^(n-1) over the profile domain; the
    spherical piece is integrated after the substitution t = (1 - u^2)/b
    which absorbs the square-root endpoint behavior.
    """
    n = shape.dim
    r, b = shape.r, shape.b
    l, lo, xj, hi = cone_cap_profile(shape)
    gl = gauss_legendre(order)
    low = gl.integrate(lambda t: l(t) ** (n - 1), lo, xj)
    uj = np.sqrt(max(0.0, 1.0 - b * xj))

    def sph(u):
        t = (1.0 - u * u) / b
        disc = (1.0 + t * (r - b)) ** 2 - (r * t) ** 2
        return (np.sqrt(np.maximum(disc, 0.0)) / r) ** (n - 1) * (2.0 * u / b)

    high = gl.integrate(sph, 0.0, uj)
    return float(unit_ball_volume(n - 1) * (low + high))


def cone_cap_polar_volume_closed(shape, order=120):
    """|M^x| from the cap-plus-cone closed expression (cross-check route).

    The spherical term is the pole-kernel profile integral truncated at
    y = r/((r-b) + b0); the cone term is in closed form. The junction
    parameter b0 is the geometrically derived one (see ConeCapShape).
    """
    n = shape.dim
    r, a, b, h = shape.r, shape.a, shape.b, shape.h
    RJ = shape.junction_radius
    b0 = 1.0 / shape.junction_coordinate
    mu = (r - b) / r
    yj = r / ((r - b) + b0)
    gl = gauss_legendre(order)

    # substitution y = 1 - w^2 regularizes the (1-y)^((n-1)/2) endpoint factor
    def ker(w):
        y = 1.0 - w * w
        return (w * w * (2.0 - w * w)) ** ((n - 1) / 2.0) / (1.0 - mu * y) ** (n + 1) * 2.0 * w

    sph = gl.integrate(ker, 0.0, np.sqrt(1.0 - yj)) / r ** n
    if shape.kind == "truncated_cone_cap":
        cone = (1.0 / n) * (1.0 / b0 + 1.0 / (a + h)) * (RJ / (r * b + (a + b) * (r - b))) ** (n - 1)
    else:
        if a <= 0:
            raise DomainError("closed cone_cap expression needs a > 0")
        cone = ((a + b0) ** n / b0 ** n - h ** n / (a + h) ** n) / (n * a * RJ ** (n - 1))
    return float(unit_ball_volume(n - 1) * (sph + cone))


def cone_cap_junction_mismatch(shape):
    """|l(junction-) - l(junction+)|: zero for a consistent profile."""
    l, lo, xj, hi = cone_cap_profile(shape)
    eps = 0.0
    r, a, b, h = shape.r, shape.a, shape.b, shape.h
    RJ = shape.junction_radius
    b0 = 1.0 / xj
    if shape.kind == "truncated_cone_cap":
        low = (1.0 + (a + h) * xj) * RJ / ((a + h + b0) * (r - (a + b)))
    else:
        low = (1.0 + a * xj) / RJ
    disc = (1.0 + xj * (r - b)) ** 2 - (r * xj) ** 2
    high = np.sqrt(max(disc, 0.0)) / r
    return float(abs(low - high))
