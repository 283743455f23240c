"""Tensor-product quadrature over the plane, the sphere chart and the disc.

Radial integration happens in ``t = |z|^2`` with the exponential/power weight
absorbed into a Gauss-type rule; angles use the equispaced trapezoid rule,
which is exact for ``z^a zbar^b`` whenever ``|a - b| < angular_order``.
"""

from __future__ import annotations

import functools
import logging
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate as sp_integrate
from scipy import special

from .errors import ConstraintError, QuadratureError, ToleranceUnreachable
from .phase_space import PhaseSpace, SpaceKind, measure_density

log = logging.getLogger(__name__)

__all__ = [
    "QuadratureRule",
    "build_rule",
    "integrate",
    "radial_log_moment",
    "model_log_moments",
    "detect_divergence",
    "divergence_heuristic",
    "finite_norm_cutoff",
    "normalization_constant",
    "validate_inv_hbar",
    "MAX_RADIAL_NODES",
]

MAX_RADIAL_NODES = 4096
MAX_CUSTOM_RADIAL_NODES = 1024
# Gauss-Laguerre nodes from scipy lose finiteness a little past 300 points,
# and validation doubles the count, so quadrature moments stop here.
RADIAL_QUADRATURE_LIMIT = 120
_INTEGER_TOL = 1e-9


def validate_inv_hbar(space: PhaseSpace, inv_hbar) -> float:
    """Check 1/hbar against the constraints of ``space`` and return it as float."""
    try:
        s = float(inv_hbar)
    except (TypeError, ValueError):
        raise ConstraintError(f"inv_hbar must be a number, got {inv_hbar!r}") from None
    if not (math.isfinite(s) and s > 0):
        raise ConstraintError(f"inv_hbar must be positive and finite, got {inv_hbar!r}")
    if space.kind is SpaceKind.SPHERE:
        if abs(s - round(s)) > _INTEGER_TOL:
            raise ConstraintError(f"on the sphere 1/hbar must be an integer, got {inv_hbar!r}")
        s = float(round(s))
    if space.kind is SpaceKind.DISC and not s > 1:
        raise ConstraintError(f"on the disc 1/hbar must exceed 1 so that c(hbar) = 1/hbar - 1 > 0, got {inv_hbar!r}")
    return s


def normalization_constant(space: PhaseSpace, inv_hbar: float):
    """Closed-form c(hbar) for the model spaces; ``None`` for custom spaces."""
    if space.kind is SpaceKind.PLANE:
        return inv_hbar
    if space.kind is SpaceKind.SPHERE:
        return inv_hbar + 1.0
    if space.kind is SpaceKind.DISC:
        return inv_hbar - 1.0
    return None


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    """Nodes and weights realizing ``c(hbar) * int dmu * exp(-K/hbar) * f``.

    ``weights`` already include the normalization, the measure density and
    the exponential weight, so integrating 1 gives 1.
    """

    space: PhaseSpace
    inv_hbar: float
    normalization: float
    radii: np.ndarray = field(repr=False)
    radial_weights: np.ndarray = field(repr=False)
    angular_order: int
    tolerance: float
    points: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)
    separable: bool = True

    @property
    def radial_nodes(self):
        return list(zip(self.radii.tolist(), self.radial_weights.tolist()))

    @property
    def node_count(self) -> int:
        return int(self.points.size)

    @property
    def max_exact_degree(self) -> int:
        """Largest D such that Gram entries up to degree D are integrated exactly."""
        n = self.radii.size
        d_ang = (self.angular_order - 1) // 2
        if self.space.kind is SpaceKind.SPHERE:
            d_rad = int(self.inv_hbar) if 2 * n - 1 >= self.inv_hbar else -1
        elif self.separable:
            d_rad = 2 * n - 1
        else:
            d_rad = d_ang
        return min(d_ang, d_rad)


def _radial_gauss(space: PhaseSpace, s: float, n: int):
    """(t nodes, log weights) with the full normalized weight absorbed; weights sum to 1.

    Weights are kept in log form: on the sphere (1 - u)^s underflows at the
    nodes that carry the high moments.
    """
    with np.errstate(divide="ignore"):
        if space.kind is SpaceKind.PLANE:
            u, w = special.roots_laguerre(n)
            return u / s, np.log(w)
        if space.kind is SpaceKind.SPHERE:
            x, w = special.roots_legendre(n)
            u = 0.5 * (1.0 + x)
            om = 0.5 * (1.0 - x)
            return u / om, math.log(0.5 * (s + 1.0)) + np.log(w) + s * np.log(om)
        if space.kind is SpaceKind.DISC:
            alpha = s - 2.0
            x, w = special.roots_jacobi(n, alpha, 0.0)
            t = 0.5 * (1.0 + x)
            return t, math.log(s - 1.0) + np.log(w) - (alpha + 1.0) * math.log(2.0)
    raise AssertionError(space.kind)


def _custom_points(space: PhaseSpace, n: int, m: int):
    """Mapped Gauss-Legendre in t for black-box potentials (area weights only)."""
    x, w = special.roots_legendre(n)
    u = 0.5 * (1.0 + x)
    wu = 0.5 * w
    if space.bounded:
        r2 = space.domain_radius**2
        t = r2 * u
        dt = r2 * wu
    else:
        t = u / (1.0 - u)
        dt = wu / (1.0 - u) ** 2
    theta = 2.0 * np.pi * np.arange(m) / m
    pts = (np.sqrt(t)[:, None] * np.exp(1j * theta)[None, :]).ravel()
    area = np.repeat(dt / m, m)
    return t, pts, area


def _custom_weights(space: PhaseSpace, s: float, pts, area):
    with np.errstate(over="ignore", invalid="ignore"):
        dens = np.asarray(measure_density(space, pts), dtype=float)
        w = area * dens * np.exp(-s * np.asarray(space.potential(pts), dtype=float))
    if not np.all(np.isfinite(w)):
        raise QuadratureError(f"non-finite weight on {space.name} at inv_hbar={s}")
    return w


def _tensor(t, wr, m):
    theta = 2.0 * np.pi * np.arange(m) / m
    r = np.sqrt(t)
    pts = (r[:, None] * np.exp(1j * theta)[None, :]).ravel()
    wts = np.repeat(wr / m, m)
    return r, pts, wts


def _log_moment(t, logw, deg):
    with np.errstate(divide="ignore"):
        return float(special.logsumexp(deg * np.log(t) + logw if deg else logw))


def build_rule(space: PhaseSpace, inv_hbar, target_rel_err=1e-10, max_degree=20,
               angular_order=None, radial_nodes=None) -> QuadratureRule:
    """Build a rule exact (model spaces) or converged (custom) up to ``max_degree``.

    The tolerance is validated by doubling the radial node count: the
    normalization integral and the top monomial moment must move by less
    than ``target_rel_err``.

    Raises
    ------
    ConstraintError
        invalid ``inv_hbar`` for the space.
    ToleranceUnreachable
        node budget exceeded.
    """
    s = validate_inv_hbar(space, inv_hbar)
    if not (1e-14 < target_rel_err < 1e-2):
        raise ValueError("target_rel_err must lie in (1e-14, 1e-2)")
    if space.dimension != 1:
        raise NotImplementedError("quadrature is implemented for complex dimension 1 only")
    max_degree = int(max_degree)
    if max_degree < 0:
        raise ValueError("max_degree must be >= 0")
    if space.kind is SpaceKind.SPHERE:
        max_degree = min(max_degree, int(s))
    m = int(angular_order) if angular_order else 4 * max_degree + 4
    if space.is_model:
        n = int(radial_nodes) if radial_nodes else _default_radial_nodes(space, s, max_degree)
        return _build_model(space, s, n, m, target_rel_err, max_degree)
    n = int(radial_nodes) if radial_nodes else max(32, 2 * max_degree + 8)
    return _build_custom(space, s, n, m, target_rel_err, max_degree)


@functools.lru_cache(maxsize=256)
def _validated_radial(space, s, n, tol, deg):
    while True:
        if n > MAX_RADIAL_NODES:
            raise ToleranceUnreachable(f"{space.name}: {tol:g} not reached within {MAX_RADIAL_NODES} radial nodes")
        t, lw = _radial_gauss(space, s, n)
        t2, lw2 = _radial_gauss(space, s, 2 * n)
        ok = abs(math.expm1(_log_moment(t, lw, 0))) <= tol
        for d in {0, deg}:
            a, b = _log_moment(t, lw, d), _log_moment(t2, lw2, d)
            # log-moments: an absolute gap is a relative gap in the moment
            if not (np.isfinite(a) and np.isfinite(b) and abs(a - b) <= tol):
                ok = False
        if ok:
            t.setflags(write=False)
            lw.setflags(write=False)
            return t, lw
        n *= 2


def _default_radial_nodes(space, s, deg):
    n = deg + 2
    if space.kind is SpaceKind.SPHERE:
        n = max(n, int(s) // 2 + 2)
    return n


def model_log_moments(space: PhaseSpace, inv_hbar, max_degree: int, tol=1e-10) -> np.ndarray:
    """log of the normalized radial moments int t^m (weight) for m = 0..max_degree.

    These are the diagonal Gram entries of a rotation-invariant model space.
    """
    s = validate_inv_hbar(space, inv_hbar)
    if not space.is_model:
        raise ValueError("radial moments need a rotation-invariant model space")
    deg = int(max_degree)
    if deg > RADIAL_QUADRATURE_LIMIT:
        return closed_form_log_moments(space, s, deg)
    t, lw = _validated_radial(space, s, _default_radial_nodes(space, s, deg), tol, deg)
    return np.array([_log_moment(t, lw, m) for m in range(deg + 1)])


def closed_form_log_moments(space: PhaseSpace, s: float, max_degree: int) -> np.ndarray:
    """Gamma/Beta values of the radial moments, for degrees past the Gauss node budget."""
    m = np.arange(int(max_degree) + 1, dtype=float)
    if space.kind is SpaceKind.PLANE:
        return special.gammaln(m + 1) - m * math.log(s)
    if space.kind is SpaceKind.SPHERE:
        return special.gammaln(m + 1) + special.gammaln(s - m + 1) - special.gammaln(s + 1)
    if space.kind is SpaceKind.DISC:
        return special.gammaln(m + 1) + special.gammaln(s) - special.gammaln(s + m)
    raise ValueError("closed-form moments exist for the model spaces only")


def _build_model(space, s, n, m, tol, deg):
    t, lw = _validated_radial(space, s, n, tol, deg)
    w = np.exp(lw)
    r, pts, wts = _tensor(t, w, m)
    return QuadratureRule(space, s, normalization_constant(space, s), r, w, m, tol, pts, wts, True)


def _build_custom(space, s, n, m, tol, deg):
    prev = None
    while True:
        if n > MAX_CUSTOM_RADIAL_NODES:
            raise ToleranceUnreachable(f"{space.name}: {tol:g} not reached within {MAX_CUSTOM_RADIAL_NODES} radial nodes")
        t, pts, area = _custom_points(space, n, m)
        w = _custom_weights(space, s, pts, area)
        z0 = np.sum(w)
        if not z0 > 0:
            raise QuadratureError(f"{space.name}: normalization integral is not positive")
        top = np.sum(w * np.abs(pts) ** (2 * deg)) / z0
        if prev is not None:
            z_prev, top_prev = prev
            if abs(z0 - z_prev) <= tol * abs(z0) and abs(top - top_prev) <= tol * abs(top):
                break
        prev = (z0, top)
        n *= 2
    c = 1.0 / z0
    wr = np.bincount(np.repeat(np.arange(n), m), weights=w * c, minlength=n)
    return QuadratureRule(space, s, float(c), np.sqrt(t), wr, m, tol, pts, w * c, False)


def integrate(rule: QuadratureRule, f) -> complex:
    """Sum of weights * f(nodes); ``f`` is a vectorized callable or node values."""
    vals = f(rule.points) if callable(f) else f
    vals = np.broadcast_to(np.asarray(vals, dtype=complex), rule.points.shape)
    if not np.all(np.isfinite(vals)):
        bad = rule.points[~np.isfinite(vals)][0]
        raise QuadratureError(f"non-finite integrand at node {complex(bad):.6g}")
    return complex(np.sum(rule.weights * vals))


def radial_log_moment(rule: QuadratureRule, degree: int) -> float:
    """log of ``sum_i w_i t_i^degree`` (the diagonal Gram entry, in log space)."""
    t = rule.radii**2
    with np.errstate(divide="ignore"):
        return float(special.logsumexp(degree * np.log(t) + np.log(rule.radial_weights)))


# -- divergence ---------------------------------------------------------------

def finite_norm_cutoff(space: PhaseSpace, inv_hbar: float):
    """Largest degree with finite norm; ``None`` if every degree is finite.

    Sphere: ``t^m (1+t)^(-s-2)`` is integrable at infinity iff ``m <= s``.
    """
    if space.kind is SpaceKind.SPHERE:
        return int(math.floor(inv_hbar + 1e-12))
    return None


def detect_divergence(space: PhaseSpace, inv_hbar, monomial_degree: int) -> bool:
    """True iff the norm integral of ``z^monomial_degree`` diverges.

    Decided by exponent counting for the model spaces and by the truncation
    heuristic for custom ones.
    """
    m = int(monomial_degree)
    if m < 0:
        raise ValueError("monomial_degree must be >= 0")
    s = float(inv_hbar)
    if space.kind is SpaceKind.PLANE:
        return False
    if space.kind is SpaceKind.SPHERE:
        # integrand ~ r^(2m - 2s - 4) r dr at infinity
        return 2 * m - 2 * s - 4 >= -2
    if space.kind is SpaceKind.DISC:
        return not s > 1
    return divergence_heuristic(space, s, m)


def _log_radial_integrand(space: PhaseSpace, s: float, m: int):
    """(log-integrand in the stretched variable v, v -> t map) for the radial norm integral."""
    if space.bounded:
        r2 = space.domain_radius**2

        def to_t(v):
            return -r2 * np.expm1(-v)

        def logf(v):
            t = to_t(v)
            # dt = r2 e^{-v} dv
            return (m * np.log(t) if m else 0.0) + _log_weight(space, s, t) + math.log(r2) - v
    else:

        def to_t(v):
            return np.exp(v)

        def logf(v):
            t = np.exp(v)
            return (m + 1) * v + _log_weight(space, s, t)

    return logf


def _log_weight(space: PhaseSpace, s: float, t):
    t = np.asarray(t, dtype=float)
    if space.kind is SpaceKind.PLANE:
        return -s * t
    if space.kind is SpaceKind.SPHERE:
        return -(s + 2.0) * np.log1p(t)
    if space.kind is SpaceKind.DISC:
        return (s - 2.0) * np.log1p(-t)
    z = np.sqrt(t).astype(complex)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        dens = np.asarray(measure_density(space, z), dtype=float)
        return np.log(dens) - s * np.asarray(space.potential(z), dtype=float)


def _log_segment(logf, a, b):
    ref = max(float(logf(a)), float(logf(b)), float(logf(0.5 * (a + b))))
    if not np.isfinite(ref):
        return -np.inf if ref < 0 else np.inf
    val, _ = sp_integrate.quad(lambda v: math.exp(float(logf(v)) - ref), a, b, limit=200, epsabs=0.0, epsrel=1e-10)
    return ref + math.log(val) if val > 0 else -np.inf


@functools.lru_cache(maxsize=1024)
def divergence_heuristic(space: PhaseSpace, inv_hbar: float, monomial_degree: int,
                         decades: int = 14, ratio: float = 0.95) -> bool:
    """Quadrature cross-check: does the truncated norm integral keep growing?

    The domain is expanded one decade at a time (``|z|^2 -> 10 |z|^2`` on
    unbounded charts, ``1 - |z|^2 -> (1 - |z|^2)/10`` on bounded ones).  The
    integral is declared divergent when the increment from the last decade is
    not smaller than ``ratio`` times the previous one.
    """
    logf = _log_radial_integrand(space, float(inv_hbar), int(monomial_degree))
    step = math.log(10.0)
    edges = [k * step for k in range(decades + 1)]
    with warnings.catch_warnings(), np.errstate(divide="ignore"):
        warnings.simplefilter("ignore", sp_integrate.IntegrationWarning)
        incs = [_log_segment(logf, a, b) for a, b in zip(edges[:-1], edges[1:])]
    last, prev = incs[-1], incs[-2]
    if last == np.inf:
        return True
    if last == -np.inf:
        return False
    return last - prev >= math.log(ratio)
