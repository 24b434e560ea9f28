"""Convex floating bodies by finitely many halfspace cuts.

For a relative volume fraction delta, each direction u contributes the cut
height a with |{x in K : <x,u> >= a}| = delta |K|; the floating body is the
intersection over all directions of the complementary halfspaces
{<x,u> <= a}. A finite direction set yields an H-polytope that contains the
true floating body, overshooting radially by at most a factor cos(gap)^-1
where gap is the largest angular hole in the direction set; inclusion checks
that use the approximation on the inner side shrink by that factor.
"""
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from . import bodies, lp, regions
from .errors import DomainError, InputError
from .quadrature import Sampler, sphere_rule, unit_ball_volume
from .util import unit_vector

DEFAULT_CUT_COUNTS = {2: 256, 3: 1024, 4: 2048, 5: 4096, 6: 8192}


def cut_height(body, u, delta, xtol_scale=1e-12):
    """The level a with |{x in K : <x,u> >= a}| = delta * |K|, 0 < delta < 1/2.

    Root of the monotone cap-volume function; balls and ellipsoids use the
    closed-form cap fraction, polytopes the exact clipped volume, and other
    bodies fall back to quadrature of the section profile.
    """
    if not 0.0 < delta < 0.5:
        raise DomainError(f"delta must be in (0, 1/2), got {delta}")
    u = unit_vector(u)
    conc = bodies.as_concrete(body)
    n = body.dim
    if isinstance(conc, bodies.Ball):
        s = brentq(lambda t: bodies._unit_ball_cap_fraction(t, n) - delta, -1.0, 1.0, xtol=1e-14)
        return float(conc.center @ u + s * conc.radius)
    if isinstance(conc, bodies.Ellipsoid):
        s = brentq(lambda t: bodies._unit_ball_cap_fraction(t, n) - delta, -1.0, 1.0, xtol=1e-14)
        nu = float(np.sqrt(u @ conc._inv_shape @ u))
        return float(conc.center @ u + s * nu)
    target = delta * bodies.volume(body)
    lo = -body.support(-u)
    hi = body.support(u)
    xtol = xtol_scale * bodies.diameter(body)
    work = conc if conc is not None else body
    f = lambda a: bodies.cap_volume(work, u, a) - target
    return float(brentq(f, lo, hi, xtol=xtol, maxiter=300))


@dataclass(frozen=True)
class FloatingBodyQuery:
    """Finite-cut outer approximation of the floating body at one delta.

    ``directions`` must be antipodally symmetric; ``cuts`` holds the matching
    cut heights, so the approximation is {x : directions @ x <= cuts}.
    """

    body: object
    delta: float
    directions: np.ndarray = field(repr=False)
    cuts: np.ndarray = field(repr=False)
    gap_angle: float

    @property
    def n_cuts(self):
        return self.directions.shape[0]


def _direction_gap(dirs, probes=4096, seed=1234):
    """Largest angle from any sphere point to the nearest direction (estimated)."""
    n = dirs.shape[1]
    if n == 2:
        ang = np.sort(np.arctan2(dirs[:, 1], dirs[:, 0]))
        gaps = np.diff(np.append(ang, ang[0] + 2 * np.pi))
        return float(gaps.max() / 2.0)
    g = Sampler(seed).uniform(-1.0, 1.0, (probes, n))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    cos = np.clip(np.abs(g @ dirs.T).max(axis=1), -1.0, 1.0)
    return float(np.arccos(cos.min()))


def floating_body(body, delta, directions=None, count=None):
    """Build the finite-cut floating-body approximation.

    Cut heights are computed per direction (independent, hence
    parallelizable); the resulting query object is immutable.
    """
    if directions is None:
        count = count or DEFAULT_CUT_COUNTS[body.dim]
        directions = regions.direction_set(body.dim, count)
    directions = np.atleast_2d(np.asarray(directions, dtype=float))
    directions = directions / np.linalg.norm(directions, axis=1, keepdims=True)
    from .util import parallel_map

    cuts = np.asarray(parallel_map(lambda u: cut_height(body, u, delta), directions))
    return FloatingBodyQuery(body, float(delta), directions, cuts, _direction_gap(directions))


def floating_contains(query, x):
    """Membership in the finite-cut approximation (outer bound for the true body)."""
    x = np.asarray(x, dtype=float)
    return bool(np.all(query.directions @ x - query.cuts <= 1e-12))


def floating_radial(query, center, u):
    """Radial function of the cut intersection about an interior center.

    The approximation is an H-polytope, so the exit along the ray is the
    binding-cut ratio (the limit the membership bisection converges to).
    """
    u = unit_vector(u)
    center = np.asarray(center, dtype=float)
    slack = query.cuts - query.directions @ center
    if np.any(slack < -1e-10):
        raise InputError("floating radial center violates a cut halfspace")
    den = query.directions @ u
    mask = den > 1e-14
    if not mask.any():
        raise InputError("direction set does not bound the ray (too few cuts)")
    return float(np.min(np.maximum(slack[mask], 0.0) / den[mask]))


def floating_feasible_point(query):
    """(center, radius) of the largest ball inside the cut intersection.

    radius <= 0 means the approximation (hence the floating body) is empty.
    """
    try:
        return lp.chebyshev_center(query.directions, query.cuts)
    except Exception:
        return None, -1.0


def centroid_halfspace_fraction(body, u):
    """Volume fraction of K on the side {<x - centroid, u> >= 0}.

    Bounded in (1/e, 1 - 1/e) for every convex body and direction; equals
    1/2 for centrally symmetric bodies.
    """
    u = unit_vector(u)
    c = bodies.centroid(body)
    return bodies.cap_volume(body, u, float(c @ u)) / bodies.volume(body)


# ---------------------------------------------------------------------------
# floating body vs level region comparisons
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FloatingCheck:
    """One labeled comparison; ``report`` is None when the check is vacuous."""

    label: str
    report: object
    note: str = ""

    @property
    def ok(self):
        return self.report.ok if self.report is not None else True

    def summary(self):
        if self.report is None:
            return f"{self.label}: pass ({self.note})"
        s = self.report.summary()
        return f"{s} {self.note}".rstrip()


def _smooth(body):
    return isinstance(bodies.as_concrete(body), (bodies.Ball, bodies.Ellipsoid))


def _is_ball(body):
    return isinstance(bodies.as_concrete(body), bodies.Ball)


def ball_sandwich_delta_max(n):
    """Largest delta for which the small-delta two-sided ball comparison applies."""
    return 2.0 ** ((n + 1) / 2.0) * unit_ball_volume(n - 1) / (
        np.sqrt(np.e) * (n + 1) * unit_ball_volume(n)
    )


def inclusion_report(body, delta, dirs, solution=None, rule=None, cut_directions=None,
                     tol=None, smooth_delta_max=0.05):
    """Floating-body / level-region inclusion checks at one delta.

    Three comparisons, each radial against radial about a shared center:

    * outer: the floating body is inside the region at level 1/(4 delta (1-delta))
      (all bodies); the floating approximation is shrunk by its facet-gap
      factor since it over-covers the true floating body.
    * inner (smooth bodies, small delta): the region at level
      v_{n-1} / (2 (n+1) v_n delta) is inside the floating body.
    * ball two-sided: for balls and delta below the applicability bound, the
      floating body is sandwiched between the regions at the sqrt(e)-scaled
      levels.

    Returns a list of FloatingCheck results (violations are data, not errors).
    """
    if not 0.0 < delta < 0.5:
        raise DomainError(f"delta must be in (0, 1/2), got {delta}")
    n = body.dim
    if rule is None:
        rule = sphere_rule(n)
    if solution is None:
        solution = regions.santalo_point(body, rule)
    if tol is None:
        tol = 1e-6 * bodies.diameter(body)
    dirs = np.atleast_2d(np.asarray(dirs, dtype=float))
    query = floating_body(body, delta, directions=cut_directions)
    shrink = float(np.cos(query.gap_angle))
    vn, vn1 = unit_ball_volume(n), unit_ball_volume(n - 1)
    checks = []

    x0 = solution.x0
    center, cheb_r = floating_feasible_point(query)
    empty = cheb_r is None or cheb_r <= 0

    # (outer) floating subset of region at 1/(4 d (1-d))
    t_a = 1.0 / (4.0 * delta * (1.0 - delta))
    label_a = f"floating-in-region(delta={delta})"
    if empty:
        checks.append(FloatingCheck(label_a, None, "empty floating body, inclusion vacuous"))
    else:
        c = x0 if floating_contains(query, x0) else center
        reg_a = regions.santalo_region(body, t_a, solution, rule)
        rep = regions.verify_inclusion(
            lambda u: shrink * floating_radial(query, c, u),
            lambda u: regions.region_radial_from(reg_a, c, u),
            c, dirs, tol, label=label_a,
        )
        checks.append(FloatingCheck(label_a, rep))

    # (inner) region at the curvature-scale level inside the floating body
    if _smooth(body) and delta <= smooth_delta_max and not empty:
        t_b = vn1 / (2.0 * (n + 1) * vn * delta)
        label_b = f"region-in-floating(delta={delta})"
        if t_b >= regions.volume_product(body, solution) and floating_contains(query, x0):
            reg_b = regions.santalo_region(body, t_b, solution, rule)
            rep = regions.verify_inclusion(
                lambda u: regions.region_radial(reg_b, u),
                lambda u: floating_radial(query, x0, u),
                x0, dirs, tol, label=label_b,
            )
            checks.append(FloatingCheck(label_b, rep))
        else:
            checks.append(FloatingCheck(label_b, None, "level below minimal product, vacuous"))

    # (ball) two-sided small-delta comparison with the sqrt(e)-scaled levels
    if _is_ball(body) and delta <= ball_sandwich_delta_max(n) and not empty:
        t_in = vn1 / (np.sqrt(np.e) * delta * (n + 1) * vn)
        t_out = np.e ** ((n + 1) / 4.0) * vn1 / (delta * (n + 1) * vn)
        if t_in >= regions.volume_product(body, solution) and floating_contains(query, x0):
            reg_in = regions.santalo_region(body, t_in, solution, rule)
            rep = regions.verify_inclusion(
                lambda u: regions.region_radial(reg_in, u),
                lambda u: floating_radial(query, x0, u),
                x0, dirs, tol, label=f"ball-inner(delta={delta})",
            )
            checks.append(FloatingCheck(rep.label, rep))
            reg_out = regions.santalo_region(body, t_out, solution, rule)
            rep = regions.verify_inclusion(
                lambda u: shrink * floating_radial(query, x0, u),
                lambda u: regions.region_radial(reg_out, u),
                x0, dirs, tol, label=f"ball-outer(delta={delta})",
            )
            checks.append(FloatingCheck(rep.label, rep))
    return checks
