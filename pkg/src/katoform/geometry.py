"""Constant-curvature model spaces: distances, volumes, heat kernels.

Two families are supported: Euclidean R^m (any m >= 1) and hyperbolic
space H^m with curvature -1 (m in {2, 3}, realized as the upper
hyperboloid sheet in Minkowski coordinates).  Other negative curvatures
are a metric rescaling of the kappa = -1 case and are not duplicated
here; volume comparison profiles accept arbitrary kappa separately.

All heat kernels use the Brownian-motion normalization: p_t is the
transition density of the diffusion generated by Delta/2, i.e.

    (e^{t Delta / 2} f)(x) = integral p_t(x, y) f(y) vol(dy).

Concretely p_t(d) = (2 pi t)^{-m/2} exp(-d^2 / (2t)) on R^m, with the
standard hyperbolic corrections on H^2 and H^3.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import DomainError, InvalidPointError, QuadratureError
from .quadrature import SPATIAL_REL, polar_angle_rule, quad_piece

EUCLIDEAN = "euclidean"
HYPERBOLIC = "hyperbolic"

# Hyperboloid constraint tolerance for point validation.
POINT_TOL = 1e-12

# exp(-TAIL_LOG) is the relative mass allowed beyond a radial cutoff.
_TAIL_LOG = 45.0


def sphere_area(m: int) -> float:
    """Surface measure of the unit sphere S^{m-1} in R^m (2, 2 pi, 4 pi, ...)."""
    return 2.0 * math.pi ** (m / 2.0) / math.gamma(m / 2.0)


@dataclass(frozen=True)
class ModelSpace:
    """A Euclidean or unit-curvature hyperbolic model space.

    Parameters
    ----------
    kind : "euclidean" or "hyperbolic"
    dim : manifold dimension m; hyperbolic supports m in {2, 3}.
    """

    kind: str
    dim: int

    def __post_init__(self):
        if self.kind not in (EUCLIDEAN, HYPERBOLIC):
            raise DomainError(f"unknown model space kind {self.kind!r}")
        if self.dim < 1:
            raise DomainError("dimension must be >= 1")
        if self.kind == HYPERBOLIC and self.dim not in (2, 3):
            raise DomainError("hyperbolic model spaces are implemented for dim 2 and 3")

    @property
    def curvature(self) -> float:
        return 0.0 if self.kind == EUCLIDEAN else -1.0

    @property
    def ambient_dim(self) -> int:
        return self.dim if self.kind == EUCLIDEAN else self.dim + 1

    def origin(self) -> np.ndarray:
        if self.kind == EUCLIDEAN:
            return np.zeros(self.dim)
        x = np.zeros(self.dim + 1)
        x[0] = 1.0
        return x

    def validate_point(self, x) -> np.ndarray:
        """Return x as an ndarray, checking the model constraint.

        Euclidean points are any vector of length m.  Hyperbolic points must
        satisfy x_0^2 - |x_rest|^2 = 1 (to POINT_TOL, relative to x_0^2) with
        x_0 > 0.
        """
        x = np.asarray(x, dtype=float)
        if x.shape != (self.ambient_dim,):
            raise InvalidPointError(
                f"point has shape {x.shape}, expected ({self.ambient_dim},)")
        if self.kind == HYPERBOLIC:
            q = x[0] * x[0] - float(np.dot(x[1:], x[1:]))
            if x[0] <= 0.0 or abs(q - 1.0) > POINT_TOL * max(1.0, x[0] * x[0]):
                raise InvalidPointError("point is not on the hyperboloid sheet")
        return x

    def to_json_dict(self) -> dict:
        return {"kind": self.kind, "dim": self.dim}

    @staticmethod
    def from_json_dict(obj) -> "ModelSpace":
        return ModelSpace(kind=obj["kind"], dim=int(obj["dim"]))


def geodesic_point(space: ModelSpace, r: float, direction=None) -> np.ndarray:
    """Point at geodesic distance r from the origin.

    ``direction`` is a unit vector in R^m (defaults to the first axis).
    """
    if r < 0.0:
        raise DomainError("radius must be nonnegative")
    if direction is None:
        u = np.zeros(space.dim)
        u[0] = 1.0
    else:
        u = np.asarray(direction, dtype=float)
        norm = float(np.linalg.norm(u))
        if norm == 0.0:
            raise DomainError("direction must be nonzero")
        u = u / norm
    if space.kind == EUCLIDEAN:
        return r * u
    x = np.empty(space.dim + 1)
    x[0] = math.cosh(r)
    x[1:] = math.sinh(r) * u
    return x


def distance(space: ModelSpace, x, y) -> float:
    """Geodesic distance between two validated points."""
    x = space.validate_point(x)
    y = space.validate_point(y)
    if space.kind == EUCLIDEAN:
        return float(np.linalg.norm(x - y))
    # Minkowski pairing <x, y> = x0 y0 - x.y; acosh of it is the distance.
    pairing = x[0] * y[0] - float(np.dot(x[1:], y[1:]))
    return float(np.arccosh(max(pairing, 1.0)))


def ring_area(space: ModelSpace, r):
    """Area of the geodesic sphere of radius r (vectorized in r)."""
    r = np.asarray(r, dtype=float)
    m = space.dim
    if space.kind == EUCLIDEAN:
        return sphere_area(m) * r ** (m - 1)
    return sphere_area(m) * np.sinh(r) ** (m - 1)


def law_of_cosines(space: ModelSpace, a, b, theta):
    """Third side of a geodesic triangle with sides a, b and angle theta.

    Vectorized over any of the arguments.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    c = np.cos(theta)
    if space.kind == EUCLIDEAN:
        sq = a * a + b * b - 2.0 * a * b * c
        return np.sqrt(np.maximum(sq, 0.0))
    arg = np.cosh(a) * np.cosh(b) - np.sinh(a) * np.sinh(b) * c
    return np.arccosh(np.maximum(arg, 1.0))


def kernel_tail_radius(space: ModelSpace, t: float, extra: float = 0.0) -> float:
    """Radius beyond which the heat kernel's radial mass is negligible.

    Solves r^2/(2t) - (m-1) r = TAIL_LOG (the hyperbolic ring area grows
    like e^{(m-1) r}, the Euclidean one polynomially, so the linear term
    covers both).  ``extra`` shifts the cutoff outward, e.g. by a base-point
    separation.
    """
    growth = (space.dim - 1) * t
    r = growth + math.sqrt(growth * growth + 2.0 * t * _TAIL_LOG)
    return r + extra


def heat_kernel_radial(space: ModelSpace, t: float, d):
    """Heat kernel p_t at geodesic distance d (vectorized in d).

    Closed forms on R^m and H^3; on H^2 the standard single-integral
    representation is evaluated by adaptive quadrature (relative tolerance
    1e-8 per point).
    """
    if t <= 0.0:
        raise DomainError("time must be positive")
    d = np.asarray(d, dtype=float)
    if np.any(d < 0.0):
        raise DomainError("distance must be nonnegative")
    m = space.dim
    if space.kind == EUCLIDEAN:
        return (2.0 * math.pi * t) ** (-m / 2.0) * np.exp(-d * d / (2.0 * t))
    if m == 3:
        # (2 pi t)^{-3/2} (d / sinh d) e^{-t/2 - d^2/(2t)}
        small = d < 1e-6
        safe = np.where(small, 1.0, d)
        factor = np.where(small, 1.0 - d * d / 6.0, safe / np.sinh(safe))
        return (2.0 * math.pi * t) ** -1.5 * factor * np.exp(-t / 2.0 - d * d / (2.0 * t))
    out = np.vectorize(lambda rr: _h2_kernel_scalar(t, float(rr)))(d)
    if np.ndim(d) == 0:
        return float(out)
    return out


def _h2_kernel_scalar(t: float, d: float) -> float:
    """H^2 heat kernel via the Millson-type integral, Delta/2 normalization.

    With tau = t/2 the Delta-convention formula reads
        p(tau, d) = sqrt(2) (4 pi tau)^{-3/2} e^{-tau/4}
                    integral_d^inf s e^{-s^2/(4 tau)} / sqrt(cosh s - cosh d) ds,
    so in the Delta/2 convention the prefactor becomes
    sqrt(2) (2 pi t)^{-3/2} e^{-t/8}.  The substitution s = d + u^2 removes
    the inverse-square-root endpoint; the difference of coshes is evaluated
    through the product identity to avoid cancellation near the endpoint.
    """
    coef = math.sqrt(2.0) * (2.0 * math.pi * t) ** -1.5 * math.exp(-t / 8.0)
    s_max = d + math.sqrt(2.0 * t * _TAIL_LOG) + t
    u_max = math.sqrt(s_max - d)

    def integrand(u):
        s = d + u * u
        # cosh s - cosh d = 2 sinh(d + u^2/2) sinh(u^2/2)
        gap = 2.0 * math.sinh(d + 0.5 * u * u) * math.sinh(0.5 * u * u)
        if gap <= 0.0:
            return 0.0
        return s * math.exp(-s * s / (2.0 * t)) * 2.0 * u / math.sqrt(gap)

    val, _ = quad_piece(integrand, 0.0, u_max, rel=1e-8)
    return coef * val


def heat_kernel(space: ModelSpace, t: float, x, y) -> float:
    """Heat kernel p_t(x, y); symmetric and positive."""
    return float(heat_kernel_radial(space, t, distance(space, x, y)))


def radial_kernel_profile(space: ModelSpace, t: float, r_max: float, n_nodes: int = 1400):
    """Vectorized callable r -> p_t(r) on [0, r_max].

    Closed-form spaces evaluate directly.  On H^2 each kernel value costs a
    quadrature, so a cubic-spline interpolant over a dense radial grid is
    built once and reused; interpolation error is far below the kernel
    tolerances at this node density.
    """
    if space.kind == EUCLIDEAN or space.dim == 3:
        return lambda r: heat_kernel_radial(space, t, r)
    nodes = np.linspace(0.0, r_max, n_nodes)
    values = np.array([_h2_kernel_scalar(t, float(r)) for r in nodes])
    spline = CubicSpline(nodes, values)

    def profile(r):
        r = np.asarray(r, dtype=float)
        return np.where(r <= r_max, spline(np.clip(r, 0.0, r_max)), 0.0)

    return profile


def heat_mass(space: ModelSpace, t: float, x=None) -> float:
    """Total kernel mass integral p_t(x, y) vol(dy), by radial quadrature.

    Equals 1 on these stochastically complete spaces; computing it rather
    than asserting it is the point, since it exercises the kernel and the
    cutoff machinery end to end.
    """
    if x is not None:
        space.validate_point(x)
    r_max = kernel_tail_radius(space, t)
    profile = radial_kernel_profile(space, t, r_max)

    def integrand(r):
        return float(profile(r)) * float(ring_area(space, r))

    val, err = quad_piece(integrand, 0.0, r_max, rel=SPATIAL_REL)
    if err > 1e-8:
        raise QuadratureError("heat mass quadrature did not converge", achieved_error=err)
    return val


def chapman_kolmogorov_residual(space: ModelSpace, s: float, t: float, x, y) -> float:
    """| p_{t+s}(x,y) - integral p_t(x,z) p_s(z,y) vol(dz) |.

    The convolution is reduced to polar coordinates around x: the radial
    integral is adaptive, the angular one uses a fixed high-order rule on
    the smooth factor.  For m = 1 the convolution is a single line integral.
    """
    if s <= 0.0 or t <= 0.0:
        raise DomainError("times must be positive")
    x = space.validate_point(x)
    y = space.validate_point(y)
    d = distance(space, x, y)
    direct = float(heat_kernel_radial(space, t + s, d))

    if space.dim == 1:
        # z runs over the line; integrate around both base points.
        reach = kernel_tail_radius(space, max(s, t), extra=d)

        def integrand(z):
            return float(heat_kernel_radial(space, t, abs(z))) * \
                float(heat_kernel_radial(space, s, abs(z - d)))

        val, _ = quad_piece(integrand, -reach, reach + d, rel=SPATIAL_REL,
                            points=[0.0, d])
        return abs(direct - val)

    r_max = kernel_tail_radius(space, t) + d + kernel_tail_radius(space, s)
    profile_t = radial_kernel_profile(space, t, r_max)
    profile_s = radial_kernel_profile(space, s, r_max)
    theta, weights = polar_angle_rule(space.dim)
    prefactor = sphere_area(space.dim - 1)

    def integrand(rho):
        other = law_of_cosines(space, rho, d, theta)
        angular = float(np.dot(weights, profile_s(other)))
        return float(profile_t(rho)) * float(ring_area(space, rho)) * angular * \
            prefactor / sphere_area(space.dim)

    # ring_area already contains the full sphere factor; the polar reduction
    # needs area(S^{m-2}) * sin^{m-2} instead, hence the ratio above.
    val, _ = quad_piece(integrand, 0.0, r_max, rel=SPATIAL_REL, points=[d])
    return abs(direct - val)


@dataclass(frozen=True)
class VolumeProfile:
    """Ball-volume comparison profile l_{m,kappa} for arbitrary kappa."""

    dim: int
    kappa: float

    def __post_init__(self):
        if self.dim < 1:
            raise DomainError("dimension must be >= 1")


def _int_sinh_pow(n: int, x: float) -> float:
    """integral_0^x sinh^n(u) du by the standard reduction."""
    if n == 0:
        return x
    vals = {0: x, 1: math.cosh(x) - 1.0}
    for k in range(2, n + 1):
        if k not in vals:
            vals[k] = (math.sinh(x) ** (k - 1) * math.cosh(x) - (k - 1) * vals[k - 2]) / k
    return vals[n]


def _int_sin_pow(n: int, x: float) -> float:
    """integral_0^x sin^n(u) du by the standard reduction."""
    if n == 0:
        return x
    vals = {0: x, 1: 1.0 - math.cos(x)}
    for k in range(2, n + 1):
        if k not in vals:
            vals[k] = (-math.sin(x) ** (k - 1) * math.cos(x) + (k - 1) * vals[k - 2]) / k
    return vals[n]


def model_ball_volume(profile: VolumeProfile, r: float) -> float:
    """Volume of the geodesic r-ball in the constant-curvature comparison space.

    l_{m,kappa}(r) = area(S^{m-1}) integral_0^r snk(s)^{m-1} ds with snk the
    kappa-rescaled sin / identity / sinh.  Positive curvature restricts r to
    (0, pi/sqrt(kappa)].
    """
    if r < 0.0:
        raise DomainError("radius must be nonnegative")
    m, kappa = profile.dim, profile.kappa
    c = sphere_area(m)
    if r == 0.0:
        return 0.0
    if kappa == 0.0:
        return c * r ** m / m
    if kappa > 0.0:
        if r > math.pi / math.sqrt(kappa) + 1e-15:
            raise DomainError("radius exceeds the diameter of the positive-curvature model")
        return c * kappa ** (-m / 2.0) * _int_sin_pow(m - 1, r * math.sqrt(kappa))
    return c * (-kappa) ** (-m / 2.0) * _int_sinh_pow(m - 1, r * math.sqrt(-kappa))


def h_kernel(m: int, r: float) -> float:
    """Radial weight h_m used by the analytic small-ball criterion.

    h_m(r) = r^{2-m} for m > 2 and log(1/r) for m = 2.  Dimension 1 has no
    such weight (the criterion degenerates to local integrability there).
    """
    if m == 1:
        raise DomainError("h_kernel is undefined for dimension 1")
    if r <= 0.0:
        raise DomainError("radius must be positive")
    if m == 2:
        return math.log(1.0 / r)
    return r ** (2 - m)
