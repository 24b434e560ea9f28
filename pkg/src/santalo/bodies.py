"""Convex body representations and their basic functionals.

Five variants -- balls, ellipsoids, H- and V-polytopes, and affine images of
any of these -- share one interface: exact support function, membership,
volume, centroid, hyperplane-section volume, and radial function. Everything
is immutable after construction; derived quantities (interior point, inner
and outer radii, polytope vertex/facet data) are computed once up front, so
bodies can be shared freely between threads. Dimensions are capped at 6.
"""
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.spatial import ConvexHull
from scipy.special import betainc

from . import lp
from .errors import InputError, MalformedBodyError, AccuracyError
from .quadrature import MAX_DIM, MIN_DIM, Sampler, unit_ball_volume
from .util import unit_vector

_DET_TOL = 1e-12
DEFAULT_MC_SAMPLES = 200_000


# ---------------------------------------------------------------------------
# body variants
# ---------------------------------------------------------------------------

class ConvexBody:
    """Common interface; concrete variants populate the geometry caches."""

    dim: int
    interior: np.ndarray      # a strictly interior point z
    inner_radius: float       # B(z, inner_radius) is inside the body
    outer_radius: float       # the body is inside B(z, outer_radius)

    def support(self, y):
        """h(y) = max over the body of <z, y>; positively homogeneous in y."""
        raise NotImplementedError

    def support_many(self, Y):
        """Vectorized support over the rows of Y."""
        raise NotImplementedError

    def contains(self, x, tol=1e-9):
        raise NotImplementedError

    def contains_many(self, X, tol=1e-9):
        return np.array([self.contains(x, tol) for x in np.asarray(X, dtype=float)])

    def _check_dim(self, n):
        if not (MIN_DIM <= n <= MAX_DIM):
            raise InputError(f"dimension must be in [{MIN_DIM}, {MAX_DIM}], got {n}")


@dataclass(frozen=True)
class Ball(ConvexBody):
    center: np.ndarray
    radius: float

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.center, dtype=float))
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "radius", float(self.radius))
        self._check_dim(c.size)
        if not (self.radius > 0 and np.isfinite(self.radius)):
            raise MalformedBodyError(f"ball radius must be positive, got {self.radius}")
        object.__setattr__(self, "dim", c.size)
        object.__setattr__(self, "interior", c.copy())
        object.__setattr__(self, "inner_radius", self.radius)
        object.__setattr__(self, "outer_radius", self.radius)

    def support(self, y):
        y = np.asarray(y, dtype=float)
        return float(self.center @ y + self.radius * np.linalg.norm(y))

    def support_many(self, Y):
        Y = np.asarray(Y, dtype=float)
        return Y @ self.center + self.radius * np.linalg.norm(Y, axis=1)

    def contains(self, x, tol=1e-9):
        return float(np.linalg.norm(np.asarray(x, dtype=float) - self.center)) <= self.radius + tol

    def contains_many(self, X, tol=1e-9):
        X = np.asarray(X, dtype=float)
        return np.linalg.norm(X - self.center, axis=1) <= self.radius + tol


@dataclass(frozen=True)
class Ellipsoid(ConvexBody):
    """Body {x : (x - center)^T shape (x - center) <= 1} with SPD shape."""

    center: np.ndarray
    shape: np.ndarray

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.center, dtype=float))
        M = np.asarray(self.shape, dtype=float)
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "shape", M)
        self._check_dim(c.size)
        if M.shape != (c.size, c.size):
            raise MalformedBodyError(f"shape matrix must be {c.size}x{c.size}, got {M.shape}")
        if not np.allclose(M, M.T, atol=1e-10):
            raise MalformedBodyError("shape matrix must be symmetric")
        try:
            np.linalg.cholesky(M)
        except np.linalg.LinAlgError:
            raise MalformedBodyError("shape matrix must be positive definite")
        w = np.linalg.eigvalsh(M)
        object.__setattr__(self, "dim", c.size)
        object.__setattr__(self, "interior", c.copy())
        object.__setattr__(self, "inner_radius", 1.0 / np.sqrt(w[-1]))
        object.__setattr__(self, "outer_radius", 1.0 / np.sqrt(w[0]))
        object.__setattr__(self, "_inv_shape", np.linalg.inv(M))

    def support(self, y):
        y = np.asarray(y, dtype=float)
        return float(self.center @ y + np.sqrt(y @ self._inv_shape @ y))

    def support_many(self, Y):
        Y = np.asarray(Y, dtype=float)
        q = np.einsum("ij,jk,ik->i", Y, self._inv_shape, Y)
        return Y @ self.center + np.sqrt(np.maximum(q, 0.0))

    def gauge(self, x):
        d = np.asarray(x, dtype=float) - self.center
        return float(np.sqrt(max(0.0, d @ self.shape @ d)))

    def contains(self, x, tol=1e-9):
        return self.gauge(x) <= 1.0 + tol / self.inner_radius

    def contains_many(self, X, tol=1e-9):
        D = np.asarray(X, dtype=float) - self.center
        q = np.einsum("ij,jk,ik->i", D, self.shape, D)
        return np.sqrt(np.maximum(q, 0.0)) <= 1.0 + tol / self.inner_radius


@dataclass(frozen=True)
class HPolytope(ConvexBody):
    """Body {x : A x <= b}; rows are normalized and must be bounded with interior."""

    A: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        b = np.atleast_1d(np.asarray(self.b, dtype=float))
        n = A.shape[1]
        self._check_dim(n)
        if A.shape[0] != b.size:
            raise MalformedBodyError("A and b row counts differ")
        norms = np.linalg.norm(A, axis=1)
        if np.any(norms < 1e-13):
            raise MalformedBodyError("H-polytope has a zero row in A")
        A = A / norms[:, None]
        b = b / norms
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "dim", n)
        z, r = lp.chebyshev_center(A, b)   # raises MalformedBodyError if unbounded
        if z is None or r <= 1e-12:
            raise MalformedBodyError("H-polytope is empty or has empty interior")
        if np.any(b - A @ z <= 0):
            raise MalformedBodyError("interior point does not satisfy all constraints strictly")
        object.__setattr__(self, "interior", z)
        object.__setattr__(self, "inner_radius", float(r))
        verts = _hpoly_vertices(A, b, n) if n <= 3 else None
        object.__setattr__(self, "vertices", verts)
        if verts is not None:
            outer = float(np.max(np.linalg.norm(verts - z, axis=1)))
        else:
            half = np.array([
                max(lp.polytope_support(A, b, e) - z[i], z[i] - (-lp.polytope_support(A, b, -e)))
                for i, e in enumerate(np.eye(n))
            ])
            outer = float(np.linalg.norm(half))
        object.__setattr__(self, "outer_radius", outer)

    def support(self, y):
        if self.vertices is not None:
            return float(np.max(self.vertices @ np.asarray(y, dtype=float)))
        return lp.polytope_support(self.A, self.b, y)

    def support_many(self, Y):
        Y = np.asarray(Y, dtype=float)
        if self.vertices is not None:
            return np.max(Y @ self.vertices.T, axis=1)
        return np.array([lp.polytope_support(self.A, self.b, y) for y in Y])

    def contains(self, x, tol=1e-9):
        return bool(np.all(self.A @ np.asarray(x, dtype=float) - self.b <= tol))

    def contains_many(self, X, tol=1e-9):
        return np.all(np.asarray(X, dtype=float) @ self.A.T - self.b <= tol, axis=1)


@dataclass(frozen=True)
class VPolytope(ConvexBody):
    """Convex hull of a finite point set with nonempty interior."""

    points: np.ndarray

    def __post_init__(self):
        V = np.atleast_2d(np.asarray(self.points, dtype=float))
        object.__setattr__(self, "points", V)
        n = V.shape[1]
        self._check_dim(n)
        if V.shape[0] < n + 1:
            raise MalformedBodyError("V-polytope needs at least dim + 1 points")
        try:
            hull = ConvexHull(V)
        except Exception as exc:
            raise MalformedBodyError(f"V-polytope is degenerate (empty interior): {exc}")
        object.__setattr__(self, "vertices", V[hull.vertices])
        # qhull equations are (normal, offset) with normal . x + offset <= 0
        object.__setattr__(self, "_facet_A", hull.equations[:, :-1])
        object.__setattr__(self, "_facet_b", -hull.equations[:, -1])
        object.__setattr__(self, "_hull_volume", float(hull.volume))
        z = self.vertices.mean(axis=0)
        object.__setattr__(self, "dim", n)
        object.__setattr__(self, "interior", z)
        object.__setattr__(self, "inner_radius", float(np.min(self._facet_b - self._facet_A @ z)))
        object.__setattr__(self, "outer_radius", float(np.max(np.linalg.norm(self.vertices - z, axis=1))))
        if self.inner_radius <= 1e-12:
            raise MalformedBodyError("V-polytope has (numerically) empty interior")

    def support(self, y):
        return float(np.max(self.vertices @ np.asarray(y, dtype=float)))

    def support_many(self, Y):
        return np.max(np.asarray(Y, dtype=float) @ self.vertices.T, axis=1)

    def contains(self, x, tol=1e-9):
        # facet test is equivalent to the LP feasibility test and much cheaper;
        # lp.hull_contains remains the reference implementation
        return bool(np.all(self._facet_A @ np.asarray(x, dtype=float) - self._facet_b <= tol))

    def contains_many(self, X, tol=1e-9):
        return np.all(np.asarray(X, dtype=float) @ self._facet_A.T - self._facet_b <= tol, axis=1)


@dataclass(frozen=True)
class AffineImage(ConvexBody):
    """L K + a for an invertible matrix L and an inner body K."""

    L: np.ndarray
    a: np.ndarray
    inner: ConvexBody

    def __post_init__(self):
        L = np.atleast_2d(np.asarray(self.L, dtype=float))
        a = np.atleast_1d(np.asarray(self.a, dtype=float))
        object.__setattr__(self, "L", L)
        object.__setattr__(self, "a", a)
        n = self.inner.dim
        if L.shape != (n, n) or a.size != n:
            raise MalformedBodyError("affine map shape does not match the inner body dimension")
        det = np.linalg.det(L)
        if abs(det) <= _DET_TOL:
            raise MalformedBodyError(f"affine map is singular (|det| = {abs(det):.3e})")
        sv = np.linalg.svd(L, compute_uv=False)
        object.__setattr__(self, "dim", n)
        object.__setattr__(self, "_det", float(det))
        object.__setattr__(self, "_Linv", np.linalg.inv(L))
        object.__setattr__(self, "_smin", float(sv[-1]))
        object.__setattr__(self, "_smax", float(sv[0]))
        object.__setattr__(self, "interior", L @ self.inner.interior + a)
        object.__setattr__(self, "inner_radius", self.inner.inner_radius * self._smin)
        object.__setattr__(self, "outer_radius", self.inner.outer_radius * self._smax)

    def support(self, y):
        y = np.asarray(y, dtype=float)
        return self.inner.support(self.L.T @ y) + float(self.a @ y)

    def support_many(self, Y):
        Y = np.asarray(Y, dtype=float)
        return self.inner.support_many(Y @ self.L) + Y @ self.a

    def contains(self, x, tol=1e-9):
        z = self._Linv @ (np.asarray(x, dtype=float) - self.a)
        return self.inner.contains(z, tol / self._smax)

    def contains_many(self, X, tol=1e-9):
        Z = (np.asarray(X, dtype=float) - self.a) @ self._Linv.T
        return self.inner.contains_many(Z, tol / self._smax)


def affine_image(body, L, a=None):
    """The image L*body + a as a new ConvexBody."""
    if a is None:
        a = np.zeros(body.dim)
    return AffineImage(L, a, body)


def translate(body, vec):
    """Translate a body by vec, keeping its variant."""
    vec = np.asarray(vec, dtype=float)
    if isinstance(body, Ball):
        return Ball(body.center + vec, body.radius)
    if isinstance(body, Ellipsoid):
        return Ellipsoid(body.center + vec, body.shape)
    if isinstance(body, HPolytope):
        return HPolytope(body.A, body.b + body.A @ vec)
    if isinstance(body, VPolytope):
        return VPolytope(body.points + vec)
    if isinstance(body, AffineImage):
        return AffineImage(body.L, body.a + vec, body.inner)
    raise InputError(f"unknown body variant {type(body).__name__}")


def support(body, u):
    """Support value of the body in the (unit) direction u."""
    return body.support(unit_vector(u))


def contains(body, x, tol=1e-9):
    """Membership of x in the body up to tol."""
    if tol <= 0:
        raise InputError(f"tol must be positive, got {tol}")
    return body.contains(x, tol)


# ---------------------------------------------------------------------------
# polytope decomposition helpers
# ---------------------------------------------------------------------------

def _hpoly_vertices(A, b, n):
    """Enumerate vertices of {Ax <= b} for n <= 3 by facet intersections."""
    from itertools import combinations

    m = A.shape[0]
    pts = []
    for idx in combinations(range(m), n):
        sub = A[list(idx)]
        if abs(np.linalg.det(sub)) < 1e-10:
            continue
        v = np.linalg.solve(sub, b[list(idx)])
        if np.all(A @ v - b <= 1e-8):
            pts.append(v)
    if not pts:
        raise MalformedBodyError("H-polytope has no vertices (unbounded or empty)")
    pts = np.array(pts)
    # dedupe within tolerance
    keep = []
    for p in pts:
        if not any(np.linalg.norm(p - q) < 1e-9 for q in keep):
            keep.append(p)
    V = np.array(keep)
    hull = ConvexHull(V)
    return V[hull.vertices]


def _hull_simplices(V):
    """Triangulate conv(V) into simplices sharing the centroid apex."""
    V = np.asarray(V, dtype=float)
    hull = ConvexHull(V)
    apex = V[hull.vertices].mean(axis=0)
    return [np.vstack([V[s], apex]) for s in hull.simplices]


def _simplex_volume(S):
    n = S.shape[1]
    M = S[:-1] - S[-1]
    from math import factorial
    return abs(np.linalg.det(M)) / factorial(n)


def _simplex_second_moment(S):
    """Integral of x x^T over the simplex with vertex rows S."""
    n = S.shape[1]
    vol = _simplex_volume(S)
    ssum = S.sum(axis=0)
    M = S.T @ S + np.outer(ssum, ssum)
    return vol * M / ((n + 1) * (n + 2))


def _polytope_parts(body):
    """(simplices, volume, centroid) for an exact polytope decomposition."""
    V = polytope_vertices(body)
    simps = _hull_simplices(V)
    vols = np.array([_simplex_volume(S) for S in simps])
    cents = np.array([S.mean(axis=0) for S in simps])
    vol = float(vols.sum())
    centroid = (vols[:, None] * cents).sum(axis=0) / vol
    return simps, vol, centroid


def polytope_vertices(body):
    """Vertex array of a polytope-like body (affine chains are materialized)."""
    if isinstance(body, VPolytope):
        return body.vertices
    if isinstance(body, HPolytope):
        if body.vertices is None:
            raise InputError("vertex enumeration is only available for H-polytopes with n <= 3")
        return body.vertices
    if isinstance(body, AffineImage):
        return polytope_vertices(body.inner) @ body.L.T + body.a
    raise InputError(f"{type(body).__name__} is not a polytope")


def as_concrete(body):
    """Collapse affine chains into an explicit Ball/Ellipsoid/VPolytope.

    Returns None when no cheap concrete form exists (H-polytopes above
    dimension 3 under an affine map).
    """
    if isinstance(body, (Ball, Ellipsoid, VPolytope)):
        return body
    if isinstance(body, HPolytope):
        return VPolytope(body.vertices) if body.vertices is not None else body
    if isinstance(body, AffineImage):
        inner = as_concrete(body.inner)
        L, a = body.L, body.a
        if isinstance(inner, Ball):
            Li = np.linalg.inv(L)
            M = Li.T @ Li / inner.radius ** 2
            return Ellipsoid(L @ inner.center + a, M)
        if isinstance(inner, Ellipsoid):
            Li = np.linalg.inv(L)
            return Ellipsoid(L @ inner.center + a, Li.T @ inner.shape @ Li)
        if isinstance(inner, VPolytope):
            return VPolytope(inner.vertices @ L.T + a)
        return None
    return None


# ---------------------------------------------------------------------------
# volume / centroid / second moments
# ---------------------------------------------------------------------------

def volume(body, sampler=None, n_samples=DEFAULT_MC_SAMPLES, rel_tol=None):
    """n-dimensional volume; exact where the variant allows, else QMC.

    Exact paths: balls, ellipsoids, polytopes in dimension 2 and 3 (facet
    decomposition), and affine images of anything exact (scaled by |det L|).
    The QMC path (H-polytopes above dimension 3) uses scrambled replicates
    and raises AccuracyError when 3 sigma exceeds ``rel_tol`` times the value.
    """
    if isinstance(body, Ball):
        return unit_ball_volume(body.dim) * body.radius ** body.dim
    if isinstance(body, Ellipsoid):
        return unit_ball_volume(body.dim) / np.sqrt(np.linalg.det(body.shape))
    if isinstance(body, AffineImage):
        return abs(body._det) * volume(body.inner, sampler, n_samples, rel_tol)
    if isinstance(body, (VPolytope, HPolytope)):
        if body.dim <= 3:
            _, vol, _ = _polytope_parts(body)
            return vol
        val, err = monte_carlo_volume(body, sampler or Sampler(0), n_samples)
        if rel_tol is not None and 3 * err > rel_tol * val:
            raise AccuracyError(
                f"MC volume stderr {err:.3e} exceeds requested tolerance", partial=val, stderr=err
            )
        return val
    raise InputError(f"unknown body variant {type(body).__name__}")


def monte_carlo_volume(body, sampler, n_samples=DEFAULT_MC_SAMPLES, replicates=8):
    """(value, stderr) by scrambled-QMC rejection inside the bounding box."""
    lo, hi = bounding_box(body)
    box = float(np.prod(hi - lo))
    per = 1 << max(8, int(np.ceil(np.log2(max(1, n_samples // replicates)))))
    vals = []
    for _ in range(replicates):
        pts = lo + sampler.spawn().sobol(body.dim, per) * (hi - lo)
        frac = float(np.count_nonzero(body.contains_many(pts))) / per
        vals.append(box * frac)
    vals = np.array(vals)
    return float(vals.mean()), float(vals.std(ddof=1) / np.sqrt(replicates))


def centroid(body, sampler=None, n_samples=DEFAULT_MC_SAMPLES):
    """Center of mass; exact for balls/ellipsoids/low-dimensional polytopes."""
    if isinstance(body, (Ball, Ellipsoid)):
        return body.center.copy()
    if isinstance(body, AffineImage):
        return body.L @ centroid(body.inner, sampler, n_samples) + body.a
    if isinstance(body, (VPolytope, HPolytope)):
        if body.dim <= 3:
            _, _, c = _polytope_parts(body)
            return c
        lo, hi = bounding_box(body)
        pts = lo + (sampler or Sampler(0)).sobol(body.dim, n_samples) * (hi - lo)
        inside = pts[body.contains_many(pts)]
        if inside.shape[0] < 16:
            raise AccuracyError("too few interior hits for an MC centroid")
        return inside.mean(axis=0)
    raise InputError(f"unknown body variant {type(body).__name__}")


def second_moment_matrix(body, center=None, sampler=None, n_samples=DEFAULT_MC_SAMPLES):
    """Normalized second moments (1/|K|) * integral of (x-c)(x-c)^T over K."""
    n = body.dim
    if center is None:
        center = centroid(body, sampler, n_samples)
    center = np.asarray(center, dtype=float)
    if isinstance(body, Ball):
        M = np.eye(n) * body.radius ** 2 / (n + 2)
        d = body.center - center
        return M + np.outer(d, d)
    if isinstance(body, Ellipsoid):
        M = body._inv_shape / (n + 2)
        d = body.center - center
        return M + np.outer(d, d)
    if isinstance(body, AffineImage):
        inner_c = body._Linv @ (center - body.a)
        Mi = second_moment_matrix(body.inner, inner_c, sampler, n_samples)
        return body.L @ Mi @ body.L.T
    if isinstance(body, (VPolytope, HPolytope)):
        if n <= 3:
            simps, vol, _ = _polytope_parts(body)
            acc = np.zeros((n, n))
            for S in simps:
                acc += _simplex_second_moment(S - center)
            return acc / vol
        lo, hi = bounding_box(body)
        pts = lo + (sampler or Sampler(0)).sobol(n, n_samples) * (hi - lo)
        inside = pts[body.contains_many(pts)] - center
        if inside.shape[0] < 64:
            raise AccuracyError("too few interior hits for MC second moments")
        return inside.T @ inside / inside.shape[0]
    raise InputError(f"unknown body variant {type(body).__name__}")


def bounding_box(body):
    """Axis-aligned bounding box (lo, hi) from the exact support function."""
    n = body.dim
    E = np.eye(n)
    hi = body.support_many(E)
    lo = -body.support_many(-E)
    return lo, hi


def diameter(body):
    """Diameter; exact for all variants except affine-wrapped H-polytopes n>3."""
    if isinstance(body, Ball):
        return 2.0 * body.radius
    if isinstance(body, Ellipsoid):
        return 2.0 * body.outer_radius
    conc = as_concrete(body)
    if isinstance(conc, Ellipsoid):
        return 2.0 * conc.outer_radius
    if isinstance(conc, (VPolytope, HPolytope)) and getattr(conc, "vertices", None) is not None:
        V = conc.vertices
        d2 = np.sum((V[:, None, :] - V[None, :, :]) ** 2, axis=-1)
        return float(np.sqrt(d2.max()))
    return 2.0 * body.outer_radius


def radial(body, center, u):
    """max rho >= 0 with center + rho*u in the body (center strictly inside)."""
    u = unit_vector(u)
    center = np.asarray(center, dtype=float)
    if isinstance(body, Ball):
        d = center - body.center
        du = d @ u
        disc = du * du + body.radius ** 2 - d @ d
        if disc < 0:
            raise InputError("radial center lies outside the ball")
        return float(-du + np.sqrt(disc))
    if isinstance(body, Ellipsoid):
        d = center - body.center
        aa = u @ body.shape @ u
        bb = u @ body.shape @ d
        cc = d @ body.shape @ d - 1.0
        disc = bb * bb - aa * cc
        if disc < 0:
            raise InputError("radial center lies outside the ellipsoid")
        return float((-bb + np.sqrt(disc)) / aa)
    if isinstance(body, HPolytope):
        num = body.b - body.A @ center
        den = body.A @ u
        mask = den > 1e-14
        if not mask.any():
            raise MalformedBodyError("radial ray never exits (unbounded body)")
        return float(np.min(num[mask] / den[mask]))
    if isinstance(body, VPolytope):
        num = body._facet_b - body._facet_A @ center
        den = body._facet_A @ u
        mask = den > 1e-14
        return float(np.min(num[mask] / den[mask]))
    if isinstance(body, AffineImage):
        w = body._Linv @ u
        nw = np.linalg.norm(w)
        return radial(body.inner, body._Linv @ (center - body.a), w / nw) / nw
    raise InputError(f"unknown body variant {type(body).__name__}")


# ---------------------------------------------------------------------------
# hyperplane sections
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SectionProfile:
    """Section volumes of a body along a fixed direction.

    ``evaluate(y)`` is the (n-1)-volume of the slice {<z, u> = y}; it vanishes
    outside [-support_minus, support_plus].
    """

    dim: int
    u: np.ndarray
    support_plus: float
    support_minus: float
    evaluate: Callable[[float], float] = field(repr=False)


def section_profile(body, u):
    """Build the SectionProfile of the body along u."""
    u = unit_vector(u)
    return SectionProfile(
        dim=body.dim,
        u=u,
        support_plus=body.support(u),
        support_minus=body.support(-u),
        evaluate=lambda y: section_volume(body, u, y),
    )


def section_volume(body, u, y, sampler=None, n_samples=20_000):
    """(n-1)-volume of the slice of the body by the hyperplane <z, u> = y.

    Exact for balls and ellipsoids in any dimension and for polytopes in
    dimension 2 (chord length) and 3 (polygon area); other cases fall back
    to Monte Carlo in the slice plane.
    """
    u = unit_vector(u)
    y = float(y)
    n = body.dim
    if isinstance(body, Ball):
        d = y - body.center @ u
        r2 = body.radius ** 2 - d * d
        if r2 <= 0:
            return 0.0
        return unit_ball_volume(n - 1) * r2 ** ((n - 1) / 2.0)
    if isinstance(body, Ellipsoid):
        nu = np.sqrt(u @ body._inv_shape @ u)
        s = (y - body.center @ u) / nu
        if abs(s) >= 1.0:
            return 0.0
        detroot = 1.0 / np.sqrt(np.linalg.det(body.shape))
        return unit_ball_volume(n - 1) * (1 - s * s) ** ((n - 1) / 2.0) * detroot / nu
    if isinstance(body, AffineImage):
        w = body.L.T @ u
        nw = np.linalg.norm(w)
        inner_y = (y - body.a @ u) / nw
        return abs(body._det) / nw * section_volume(body.inner, w / nw, inner_y, sampler, n_samples)
    if isinstance(body, (VPolytope, HPolytope)):
        if n == 2:
            return _polygon_chord(polytope_vertices(body), u, y)
        if n == 3:
            return _polyhedron_slice_area(polytope_vertices(body), u, y)
        return _slice_mc(body, u, y, sampler or Sampler(0), n_samples)
    raise InputError(f"unknown body variant {type(body).__name__}")


def _polygon_chord(V, u, y):
    """Length of the segment {x in conv(V) : <x,u> = y} in the plane."""
    hull = ConvexHull(V)
    P = V[hull.vertices]
    h = P @ u - y
    pts = []
    m = len(P)
    for i in range(m):
        j = (i + 1) % m
        hi_, hj = h[i], h[j]
        if abs(hi_) < 1e-14:
            pts.append(P[i])
        if (hi_ > 0) != (hj > 0) and abs(hi_) >= 1e-14 and abs(hj) >= 1e-14:
            s = hi_ / (hi_ - hj)
            pts.append(P[i] + s * (P[j] - P[i]))
    if len(pts) < 2:
        return 0.0
    pts = np.array(pts)
    d2 = np.sum((pts[:, None, :] - pts[None, :, :]) ** 2, axis=-1)
    return float(np.sqrt(d2.max()))


def _plane_basis(u):
    """Orthonormal basis of the hyperplane orthogonal to u (columns)."""
    n = u.size
    B = np.linalg.qr(np.column_stack([u, np.eye(n)[:, : n - 1]]))[0]
    # first column is +-u; the rest span the plane
    return B[:, 1:]


def _polyhedron_slice_area(V, u, y):
    """Area of the polygon conv(V) cut by the plane <x,u> = y in 3-d."""
    hull = ConvexHull(V)
    P = V[hull.vertices]
    edges = set()
    remap = {v: i for i, v in enumerate(hull.vertices)}
    for simplex in hull.simplices:
        s = [remap[v] for v in simplex]
        for i in range(3):
            e = tuple(sorted((s[i], s[(i + 1) % 3])))
            edges.add(e)
    h = P @ u - y
    pts = [P[i] for i in range(len(P)) if abs(h[i]) < 1e-13]
    for i, j in edges:
        if (h[i] > 0) != (h[j] > 0) and abs(h[i]) >= 1e-13 and abs(h[j]) >= 1e-13:
            s = h[i] / (h[i] - h[j])
            pts.append(P[i] + s * (P[j] - P[i]))
    if len(pts) < 3:
        return 0.0
    pts = np.array(pts)
    B = _plane_basis(u)
    flat = (pts - pts[0]) @ B
    try:
        return float(ConvexHull(flat).volume)   # qhull "volume" in 2-d is the area
    except Exception:
        return 0.0


def _slice_mc(body, u, y, sampler, n_samples):
    """MC estimate of a slice volume for bodies without an exact slice path."""
    B = _plane_basis(u)
    base = np.asarray(body.interior, dtype=float)
    base = base + (y - base @ u) * u
    R = 2.0 * body.outer_radius
    W = sampler.uniform(-R, R, (n_samples, body.dim - 1))
    pts = base + W @ B.T
    frac = float(np.count_nonzero(body.contains_many(pts))) / n_samples
    return (2.0 * R) ** (body.dim - 1) * frac


# ---------------------------------------------------------------------------
# caps (halfspace cuts)
# ---------------------------------------------------------------------------

def _unit_ball_cap_fraction(s, n):
    """Fraction of the unit-ball volume in {<x,u> >= s}, -1 <= s <= 1."""
    s = float(np.clip(s, -1.0, 1.0))
    if s >= 1.0:
        return 0.0
    if s <= -1.0:
        return 1.0
    # integral of (1-t^2)^((n-1)/2) over [s, 1], normalized by the full integral
    p = (n + 1) / 2.0
    if s >= 0.0:
        tail = 0.5 * (1.0 - betainc(0.5, p, s * s))
    else:
        tail = 0.5 * (1.0 + betainc(0.5, p, s * s))
    return float(tail)


def cap_volume(body, u, a):
    """Volume of the cap {x in body : <x, u> >= a}.

    Closed form for balls/ellipsoids, exact clipping for polytopes in
    dimension 2 and 3, and 1-d quadrature of the section profile otherwise.
    """
    u = unit_vector(u)
    conc = as_concrete(body)
    n = body.dim
    if isinstance(conc, Ball):
        s = (a - conc.center @ u) / conc.radius
        return volume(conc) * _unit_ball_cap_fraction(s, n)
    if isinstance(conc, Ellipsoid):
        nu = np.sqrt(u @ conc._inv_shape @ u)
        s = (a - conc.center @ u) / nu
        return volume(conc) * _unit_ball_cap_fraction(s, n)
    if isinstance(conc, (VPolytope, HPolytope)) and n <= 3:
        V = polytope_vertices(conc)
        clipped = _clip_points(V, u, a)
        if clipped is None:
            return 0.0
        if n == 2:
            return _polygon_area(clipped)
        return _point_cloud_volume(clipped)
    # generic: integrate the section profile
    from scipy.integrate import quad

    hp = body.support(u)
    if a >= hp:
        return 0.0
    val, _ = quad(lambda y: section_volume(body, u, y), a, hp, limit=200)
    return float(val)


def _clip_points(V, u, a):
    """Vertices of conv(V) cut to the halfspace <x,u> >= a (None if empty)."""
    h = V @ u - a
    inside = V[h >= -1e-13]
    pts = list(inside)
    hull = ConvexHull(V)
    P = V[hull.vertices]
    hp = P @ u - a
    m = len(P)
    if V.shape[1] == 2:
        edges = [(i, (i + 1) % m) for i in range(m)]
    else:
        remap = {v: i for i, v in enumerate(hull.vertices)}
        edges = set()
        for simplex in hull.simplices:
            s = [remap[v] for v in simplex]
            for i in range(3):
                edges.add(tuple(sorted((s[i], s[(i + 1) % 3]))))
        edges = list(edges)
    for i, j in edges:
        if (hp[i] > 0) != (hp[j] > 0):
            s = hp[i] / (hp[i] - hp[j])
            pts.append(P[i] + s * (P[j] - P[i]))
    if len(pts) < V.shape[1] + 1:
        return None
    return np.array(pts)


def _polygon_area(pts):
    try:
        return float(ConvexHull(pts).volume)
    except Exception:
        return 0.0


def _point_cloud_volume(pts):
    try:
        return float(ConvexHull(pts).volume)
    except Exception:
        return 0.0


# ---------------------------------------------------------------------------
# polar bodies
# ---------------------------------------------------------------------------

def polar_body(body, center):
    """The polar of the body about an interior center, as a ConvexBody.

    Ellipsoid-like bodies polarize to ellipsoids, polytopes with known
    vertices to H-polytopes. Raises InputError when no explicit polar is
    available (H-polytopes above dimension 3).
    """
    center = np.asarray(center, dtype=float)
    if not body.contains(center, 1e-12):
        raise InputError("polar center must lie inside the body")
    conc = as_concrete(body)
    if isinstance(conc, Ball):
        conc = Ellipsoid(conc.center, np.eye(body.dim) / conc.radius ** 2)
    if isinstance(conc, Ellipsoid):
        d = conc.center - center
        Q = conc._inv_shape - np.outer(d, d)
        Qi = np.linalg.inv(Q)
        scale = 1.0 + d @ Qi @ d
        return Ellipsoid(-Qi @ d, Q / scale)
    if isinstance(conc, (VPolytope, HPolytope)):
        V = polytope_vertices(conc)
        return HPolytope(V - center, np.ones(V.shape[0]))
    raise InputError("no explicit polar for this body variant (H-polytope with n > 3)")


# ---------------------------------------------------------------------------
# JSON body specs
# ---------------------------------------------------------------------------

def _expect(cond, msg):
    if not cond:
        raise InputError(msg)


def from_spec(obj):
    """Build a ConvexBody from its JSON-style dict spec.

    Accepted forms::

        {"type": "ball", "center": [...], "radius": r}
        {"type": "ellipsoid", "center": [...], "shape": [[...]]}
        {"type": "hpoly", "A": [[...]], "b": [...]}
        {"type": "vpoly", "vertices": [[...]]}
        {"type": "affine", "L": [[...]], "a": [...], "inner": {...}}
    """
    _expect(isinstance(obj, dict), "body spec must be a JSON object")
    kind = obj.get("type")
    _expect(isinstance(kind, str), "body spec needs a string 'type' field")
    known = {"ball", "ellipsoid", "hpoly", "vpoly", "affine"}
    _expect(kind in known, f"unknown body type {kind!r}; expected one of {sorted(known)}")

    def arr(key, ndim):
        _expect(key in obj, f"body type {kind!r} requires field {key!r}")
        try:
            a = np.asarray(obj[key], dtype=float)
        except (TypeError, ValueError):
            raise InputError(f"field {key!r} must be numeric")
        _expect(a.ndim == ndim, f"field {key!r} must have {ndim} dimension(s)")
        _expect(np.all(np.isfinite(a)), f"field {key!r} contains non-finite entries")
        return a

    if kind == "ball":
        _expect("radius" in obj, "ball spec requires 'radius'")
        _expect(isinstance(obj["radius"], (int, float)), "'radius' must be a number")
        return Ball(arr("center", 1), float(obj["radius"]))
    if kind == "ellipsoid":
        return Ellipsoid(arr("center", 1), arr("shape", 2))
    if kind == "hpoly":
        return HPolytope(arr("A", 2), arr("b", 1))
    if kind == "vpoly":
        return VPolytope(arr("vertices", 2))
    inner = from_spec(obj.get("inner"))
    return AffineImage(arr("L", 2), arr("a", 1), inner)


def to_spec(body):
    """Inverse of from_spec."""
    if isinstance(body, Ball):
        return {"type": "ball", "center": body.center.tolist(), "radius": body.radius}
    if isinstance(body, Ellipsoid):
        return {"type": "ellipsoid", "center": body.center.tolist(), "shape": body.shape.tolist()}
    if isinstance(body, HPolytope):
        return {"type": "hpoly", "A": body.A.tolist(), "b": body.b.tolist()}
    if isinstance(body, VPolytope):
        return {"type": "vpoly", "vertices": body.points.tolist()}
    if isinstance(body, AffineImage):
        return {"type": "affine", "L": body.L.tolist(), "a": body.a.tolist(), "inner": to_spec(body.inner)}
    raise InputError(f"unknown body variant {type(body).__name__}")
