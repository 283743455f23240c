"""Coordinate changes as vacuum choices: SL(2,R) maps, the z -> -1/z swap and the affine subgroup.

A state that is coherent around one vacuum is tested for coherence around
another by pulling it back under a Moebius map and measuring how far it is
from an eigenstate of the new annihilation operator ``sqrt(hbar) d/dz~``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from numpy.polynomial import polynomial as npoly

from .coherent import coherent_state
from .errors import ConstraintError, DegenerateGramError, PoleProximityError
from .export import SCHEMA, fmt_complex, fmt_float
from .hilbert import AnalyticFunction, InnerProductSpec, _log_diag
from .phase_space import SpaceKind

__all__ = [
    "MapClass",
    "MoebiusMap",
    "SampledFunction",
    "classify",
    "pullback",
    "coherence_residual",
    "duality_report",
    "IDENTITY",
    "DUALITY_S",
    "translation",
    "dilation",
    "parse_map",
    "POLE_TOL",
]

POLE_TOL = 1e-8
DET_TOL = 1e-12
MAX_REFIT_CONDITION = 1e8


class MapClass(str, enum.Enum):
    IDENTITY = "Identity"
    AFFINE = "Affine"
    DUALITY_S = "DualityS"
    GENERAL = "General"


@dataclass(frozen=True)
class MoebiusMap:
    """z -> (a z + b) / (c z + d) with ad - bc = 1, acting on functions with weight w."""

    a: float
    b: float
    c: float
    d: float
    weight: int = 0

    def __post_init__(self):
        for name in "abcd":
            v = getattr(self, name)
            if not math.isfinite(float(v)):
                raise ValueError(f"matrix entry {name} must be finite")
            object.__setattr__(self, name, float(v))
        if abs(self.a * self.d - self.b * self.c - 1.0) > DET_TOL:
            raise ValueError(f"determinant {self.a * self.d - self.b * self.c!r} is not 1")
        if int(self.weight) != self.weight or self.weight < 0:
            raise ValueError("pullback weight must be a non-negative integer")
        object.__setattr__(self, "weight", int(self.weight))

    @classmethod
    def from_matrix(cls, m, weight: int = 0) -> "MoebiusMap":
        (a, b), (c, d) = np.asarray(m, dtype=float)
        return cls(a, b, c, d, weight)

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.c, self.d]])

    @property
    def pole(self) -> Optional[float]:
        return None if self.c == 0 else -self.d / self.c

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        out = (self.a * z + self.b) / (self.c * z + self.d)
        return complex(out) if out.ndim == 0 else out

    def automorphy(self, z):
        """j(M, z) = c z + d."""
        return self.c * np.asarray(z, dtype=complex) + self.d

    def inverse(self) -> "MoebiusMap":
        return MoebiusMap(self.d, -self.b, -self.c, self.a, self.weight)

    def compose(self, other: "MoebiusMap") -> "MoebiusMap":
        """self o other (matrix product self @ other)."""
        m = self.matrix @ other.matrix
        return MoebiusMap(m[0, 0], m[0, 1], m[1, 0], m[1, 1], self.weight)

    def __matmul__(self, other):
        return self.compose(other)

    def describe(self) -> list:
        return [[fmt_float(self.a), fmt_float(self.b)], [fmt_float(self.c), fmt_float(self.d)]]


IDENTITY = MoebiusMap(1, 0, 0, 1)
DUALITY_S = MoebiusMap(0, -1, 1, 0)


def translation(b: float, weight: int = 0) -> MoebiusMap:
    return MoebiusMap(1, b, 0, 1, weight)


def dilation(lam: float, weight: int = 0) -> MoebiusMap:
    """z -> lam^2 z."""
    return MoebiusMap(lam, 0, 0, 1.0 / lam, weight)


def _close(m, target, tol=DET_TOL) -> bool:
    return np.allclose(m, target, rtol=0, atol=tol) or np.allclose(m, -np.asarray(target), rtol=0, atol=tol)


def classify(m: MoebiusMap) -> MapClass:
    mat = m.matrix
    if _close(mat, np.eye(2)):
        return MapClass.IDENTITY
    if _close(mat, [[0.0, -1.0], [1.0, 0.0]]):
        return MapClass.DUALITY_S
    if abs(m.c) <= DET_TOL:
        return MapClass.AFFINE
    return MapClass.GENERAL


@dataclass(frozen=True, eq=False)
class SampledFunction:
    """Values of a function at fixed sample points.

    ``evaluator`` (when present) lets the function be re-sampled elsewhere,
    which is what a pullback needs.
    """

    points: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)
    evaluator: Optional[Callable] = field(default=None, repr=False)

    def __post_init__(self):
        p = np.asarray(self.points, dtype=complex).ravel()
        v = np.asarray(self.values, dtype=complex).ravel()
        if p.shape != v.shape:
            raise ValueError("points and values must have the same length")
        object.__setattr__(self, "points", p)
        object.__setattr__(self, "values", v)

    @classmethod
    def sample(cls, f, points) -> "SampledFunction":
        pts = np.asarray(points, dtype=complex).ravel()
        return cls(pts, np.asarray(f(pts), dtype=complex), f)


def _check_pole(m: MoebiusMap, pts: np.ndarray):
    if m.c == 0:
        return
    near = np.abs(m.automorphy(pts)) <= POLE_TOL * abs(m.c)
    if np.any(near):
        raise PoleProximityError(pts[near], m.pole)


def pullback(m: MoebiusMap, f, points=None) -> SampledFunction:
    """(P_M f)(z) = (c z + d)^(-w) f(M z) at the sample points.

    ``f`` is an AnalyticFunction, a plain callable, or a SampledFunction with
    an evaluator.  ``points`` default to the SampledFunction's own points.
    P_{M1 M2} = P_{M2} P_{M1}.
    """
    if isinstance(f, SampledFunction):
        if f.evaluator is None:
            raise ValueError("a SampledFunction needs an evaluator to be pulled back")
        pts = f.points if points is None else np.asarray(points, dtype=complex).ravel()
        func = f.evaluator
    else:
        if points is None:
            raise ValueError("points are required to pull back an analytic function")
        pts = np.asarray(points, dtype=complex).ravel()
        func = f
    _check_pole(m, pts)
    w = m.weight

    def pulled(z):
        z = np.asarray(z, dtype=complex)
        _check_pole(m, np.atleast_1d(z))
        vals = np.asarray(func(m(z)), dtype=complex)
        return vals if w == 0 else vals * m.automorphy(z) ** (-w)

    return SampledFunction(pts, pulled(pts), pulled)


def _ortho_scale(spec: InnerProductSpec, degree: int) -> np.ndarray:
    """sqrt(G_mm): monomial coefficient -> orthonormal coordinate."""
    return np.exp(0.5 * _log_diag(spec, degree))


def coherence_residual(spec: InnerProductSpec, m: MoebiusMap, label, truncation: int = 40,
                       details: bool = False):
    """Best-case eigen-residual of the new vacuum's annihilation operator.

    The coherent state ``|label>`` of the plane is pulled back under ``m``,
    sampled at the preimages ``z~_i = m^-1(z_i)`` of the quadrature nodes,
    and refit (measure-weighted least squares) on the orthonormal basis.
    Because ``dz/dz~ = (a - c z)^2`` the operator ``sqrt(hbar) d/dz~``
    acts on the refit as ``sqrt(hbar) (a - c z)^2 d/dz``.  Returns
    ``min_mu ||(a~ - mu) psi~|| / ||psi~||``.
    """
    if spec.space.kind is not SpaceKind.PLANE:
        raise ConstraintError("the coherence criterion is defined on the plane")
    t = int(truncation)
    w = m.weight
    state = coherent_state(spec, label, t)
    deg = t + w
    rule = spec.rule_for(deg + 1)
    z = rule.points
    if m.c != 0:
        # nodes that the inverse map sends to infinity
        near = np.abs(z - m.a / m.c) <= POLE_TOL
        if np.any(near):
            raise PoleProximityError(z[near], m.a / m.c)
    z_tilde = m.inverse()(z)
    samples = pullback(m, state.vector, z_tilde)

    scale = _ortho_scale(spec, deg + 1)
    design = (z[:, None] ** np.arange(deg + 1)[None, :]) / scale[None, : deg + 1]
    sw = np.sqrt(rule.weights)
    a_w = design * sw[:, None]
    cond = np.linalg.cond(a_w)
    if not cond < MAX_REFIT_CONDITION:
        raise DegenerateGramError(f"refit condition number {cond:.3g} exceeds {MAX_REFIT_CONDITION:g}")
    b, *_ = np.linalg.lstsq(a_w, samples.values * sw, rcond=None)

    coeffs = b / scale[: deg + 1]
    deriv = npoly.polyder(coeffs) if deg > 0 else np.zeros(1, dtype=complex)
    twist = npoly.polymul(deriv, npoly.polypow([m.a, -m.c], 2))
    applied = math.sqrt(spec.hbar) * twist
    full = np.zeros(deg + 2, dtype=complex)
    n_used = min(applied.size, full.size)
    full[:n_used] = applied[:n_used]
    if np.any(np.abs(applied[n_used:]) > 0):
        raise AssertionError("twisted derivative exceeds refit degree + 1")
    vec = np.zeros(deg + 2, dtype=complex)
    vec[: deg + 1] = coeffs
    u = vec * scale
    au = full * scale
    nu = np.linalg.norm(u)
    mu = np.vdot(u, au) / nu**2
    res = float(np.linalg.norm(au - mu * u) / nu)
    if details:
        return res, {"mu": complex(mu), "condition": float(cond), "refit_degree": deg,
                     "state": state, "samples": samples, "refit": AnalyticFunction(coeffs)}
    return res


def duality_report(spec: InnerProductSpec, m: MoebiusMap, label, truncation: int = 40) -> dict:
    res = coherence_residual(spec, m, label, truncation)
    base = coherence_residual(spec, MoebiusMap(1, 0, 0, 1, m.weight), label, truncation)
    return {
        "schema": SCHEMA,
        "map": m.describe(),
        "weight": m.weight,
        "label": fmt_complex(label),
        "residual": fmt_float(res),
        "baseline_residual": fmt_float(base),
        "classification": classify(m).value,
    }


def parse_map(text: str, weight: int = 0) -> MoebiusMap:
    """'S', 'I', 'T:b' (translation), 'D:lam' (dilation) or 'a,b,c,d'."""
    s = text.strip()
    key = s.upper()
    if key == "S":
        return MoebiusMap(0, -1, 1, 0, weight)
    if key in ("I", "ID", "IDENTITY"):
        return MoebiusMap(1, 0, 0, 1, weight)
    if key.startswith("T:"):
        return translation(float(s[2:]), weight)
    if key.startswith("D:"):
        return dilation(float(s[2:]), weight)
    parts = [p for p in s.split(",") if p.strip()]
    if len(parts) == 4:
        return MoebiusMap(*(float(p) for p in parts), weight=weight)
    raise ValueError(f"cannot parse map {text!r}; use S, I, T:b, D:lam or a,b,c,d")
