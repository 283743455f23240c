"""Hilbert spaces of analytic functions weighted by exp(-K/hbar).

Functions are truncated power series; inner products are evaluated by
quadrature on the rule attached to an :class:`InnerProductSpec`.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import polynomial as npoly
from scipy import linalg

from .errors import DegenerateGramError, FiniteNormError, QuadratureError
from .export import SCHEMA, fmt_complex, fmt_float, matrix_pairs
from .phase_space import PhaseSpace, SpaceKind
from .quadrature import (
    QuadratureRule,
    build_rule,
    detect_divergence,
    finite_norm_cutoff,
    integrate,
    model_log_moments,
    validate_inv_hbar,
)

__all__ = [
    "basis_document",
    "AnalyticFunction",
    "InnerProductSpec",
    "GramMatrix",
    "make_spec",
    "inner_product",
    "norm",
    "gram_matrix",
    "orthonormal_basis",
    "space_dimension",
    "dimension_report",
    "reproducing_kernel",
    "kernel_function",
    "DEFAULT_TRUNCATION",
    "MAX_CONDITION",
]

DEFAULT_TRUNCATION = 40
MAX_CONDITION = 1e12


@dataclass(frozen=True, eq=False)
class AnalyticFunction:
    """psi(z) = sum_m c_m z^m, m = 0..truncation_degree."""

    coefficients: np.ndarray

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.coefficients, dtype=complex)).copy()
        if c.ndim != 1 or c.size == 0:
            raise ValueError("coefficients must be a non-empty 1-d sequence")
        c.setflags(write=False)
        object.__setattr__(self, "coefficients", c)

    @classmethod
    def monomial(cls, m: int, scale=1.0) -> "AnalyticFunction":
        c = np.zeros(m + 1, dtype=complex)
        c[m] = scale
        return cls(c)

    @property
    def truncation_degree(self) -> int:
        return self.coefficients.size - 1

    @property
    def degree(self) -> int:
        """Index of the highest non-zero coefficient (-1 for the zero function)."""
        nz = np.flatnonzero(self.coefficients)
        return int(nz[-1]) if nz.size else -1

    def padded(self, size: int) -> np.ndarray:
        out = np.zeros(max(size, self.coefficients.size), dtype=complex)
        out[: self.coefficients.size] = self.coefficients
        return out

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        out = npoly.polyval(z, self.coefficients)
        return complex(out) if out.ndim == 0 else out

    def __add__(self, other):
        if not isinstance(other, AnalyticFunction):
            return NotImplemented
        n = max(self.coefficients.size, other.coefficients.size)
        return AnalyticFunction(self.padded(n) + other.padded(n))

    def __sub__(self, other):
        if not isinstance(other, AnalyticFunction):
            return NotImplemented
        return self + (-1.0) * other

    def __mul__(self, alpha):
        if isinstance(alpha, AnalyticFunction):
            return NotImplemented
        return AnalyticFunction(complex(alpha) * self.coefficients)

    __rmul__ = __mul__

    def __neg__(self):
        return (-1.0) * self

    def __repr__(self):
        return f"AnalyticFunction(degree={self.truncation_degree})"


@functools.lru_cache(maxsize=256)
def _cached_rule(space: PhaseSpace, s: float, tol: float, degree: int) -> QuadratureRule:
    return build_rule(space, s, tol, max_degree=degree)


@dataclass(frozen=True, eq=False)
class InnerProductSpec:
    """A phase space, a value of 1/hbar, c(hbar) and the rule realizing the integral."""

    space: PhaseSpace
    inv_hbar: float
    normalization: float
    rule: QuadratureRule = field(repr=False)
    tolerance: float = 1e-10

    @property
    def hbar(self) -> float:
        return 1.0 / self.inv_hbar

    @property
    def spin(self):
        """j with 1/hbar = 2j + 2 (sphere only)."""
        return (self.inv_hbar - 2.0) / 2.0 if self.space.kind is SpaceKind.SPHERE else None

    @property
    def weight_k(self):
        """k with k - 1 = 1/(2 hbar) (disc only)."""
        return self.inv_hbar / 2.0 + 1.0 if self.space.kind is SpaceKind.DISC else None

    @property
    def cutoff(self):
        return finite_norm_cutoff(self.space, self.inv_hbar)

    def rule_for(self, degree: int) -> QuadratureRule:
        """The attached rule, or a finer one if ``degree`` exceeds its exactness."""
        if degree <= self.rule.max_exact_degree:
            return self.rule
        return _cached_rule(self.space, self.inv_hbar, self.tolerance, int(degree))

    def same_as(self, other: "InnerProductSpec") -> bool:
        return self is other or (self.space == other.space and self.inv_hbar == other.inv_hbar)


def make_spec(space: PhaseSpace, inv_hbar=1.0, max_degree: int = DEFAULT_TRUNCATION,
              tolerance: float = 1e-10) -> InnerProductSpec:
    """Build the inner-product spec for ``space`` at the given 1/hbar.

    For model spaces c(hbar) is 1/hbar on the plane, 1/hbar + 1 on the
    sphere and 1/hbar - 1 on the disc; custom spaces get it numerically.
    """
    s = validate_inv_hbar(space, inv_hbar)
    cutoff = finite_norm_cutoff(space, s)
    deg = max_degree if cutoff is None else min(max_degree, cutoff)
    rule = _cached_rule(space, s, tolerance, int(deg))
    return InnerProductSpec(space, s, rule.normalization, rule, tolerance)


def _check_finite_norm(spec: InnerProductSpec, degree: int):
    if degree < 0:
        return
    if detect_divergence(spec.space, spec.inv_hbar, degree):
        raise FiniteNormError(degree, spec.cutoff)


def inner_product(spec: InnerProductSpec, f: AnalyticFunction, g: AnalyticFunction) -> complex:
    """<f, g>, conjugate-linear in ``f``."""
    deg = max(f.degree, g.degree)
    _check_finite_norm(spec, f.degree)
    _check_finite_norm(spec, g.degree)
    if deg < 0:
        return 0j
    rule = spec.rule_for(deg)
    vals = np.conj(f(rule.points)) * g(rule.points)
    return integrate(rule, vals)


def norm(spec: InnerProductSpec, f: AnalyticFunction) -> float:
    return math.sqrt(max(inner_product(spec, f, f).real, 0.0))


@dataclass(frozen=True, eq=False)
class GramMatrix:
    """G[m, n] = <z^m, z^n> for m, n in ``degrees``."""

    entries: np.ndarray
    degrees: tuple
    space: str = ""
    inv_hbar: float = float("nan")

    @property
    def diagonal(self) -> np.ndarray:
        return np.real(np.diag(self.entries))

    def to_document(self) -> dict:
        return {
            "schema": SCHEMA,
            "space": self.space,
            "inv_hbar": fmt_float(self.inv_hbar),
            "degrees": list(self.degrees),
            "entries": matrix_pairs(self.entries),
        }


def _log_diag(spec: InnerProductSpec, max_degree: int) -> np.ndarray:
    return model_log_moments(spec.space, spec.inv_hbar, max_degree, spec.tolerance)


def _full_gram(spec: InnerProductSpec, max_degree: int) -> np.ndarray:
    rule = spec.rule_for(max_degree)
    v = rule.points[:, None] ** np.arange(max_degree + 1)[None, :]
    if not np.all(np.isfinite(v)):
        raise QuadratureError("monomial overflow at quadrature nodes")
    return (np.conj(v).T * rule.weights) @ v


def gram_matrix(spec: InnerProductSpec, max_degree: int, verify_offdiag: int = 3) -> GramMatrix:
    """Gram matrix of monomials up to ``max_degree``.

    On rotation-invariant spaces only the diagonal is integrated (radially);
    a few off-diagonal entries are spot-checked by full quadrature.
    """
    max_degree = int(max_degree)
    _check_finite_norm(spec, max_degree)
    degrees = tuple(range(max_degree + 1))
    if spec.space.rotation_invariant:
        g = np.diag(np.exp(_log_diag(spec, max_degree))).astype(complex)
        if verify_offdiag and max_degree > 0:
            rule = spec.rule_for(max_degree)
            rng = np.random.default_rng(max_degree)
            for _ in range(verify_offdiag):
                a, b = rng.choice(max_degree + 1, size=2, replace=False)
                off = integrate(rule, np.conj(rule.points ** a) * rule.points**b)
                scale = math.sqrt(g[a, a].real * g[b, b].real)
                if abs(off) > 1e-10 * scale:
                    raise QuadratureError(f"off-diagonal Gram entry ({a},{b}) = {off:.3g} breaks angular exactness")
    else:
        g = _full_gram(spec, max_degree)
        g = 0.5 * (g + g.conj().T)
    return GramMatrix(g, degrees, spec.space.name, spec.inv_hbar)


def _basis_matrix(spec: InnerProductSpec, max_degree: int) -> np.ndarray:
    """Columns are coefficient vectors of the orthonormal basis."""
    if spec.space.rotation_invariant:
        return np.diag(np.exp(-0.5 * _log_diag(spec, max_degree))).astype(complex)
    g = gram_matrix(spec, max_degree).entries
    cond = np.linalg.cond(g)
    if not cond < MAX_CONDITION:
        raise DegenerateGramError(f"Gram matrix condition number {cond:.3g} exceeds {MAX_CONDITION:g}")
    low = linalg.cholesky(g, lower=True)
    return linalg.solve_triangular(low.conj().T, np.eye(max_degree + 1, dtype=complex), lower=False)


def orthonormal_basis(spec: InnerProductSpec, max_degree: int) -> list:
    """e_0..e_D with <e_m, e_n> = delta_mn."""
    _check_finite_norm(spec, int(max_degree))
    c = _basis_matrix(spec, int(max_degree))
    return [AnalyticFunction(c[:, k]) for k in range(c.shape[1])]


def basis_document(spec: InnerProductSpec, basis) -> dict:
    """JSON form of an orthonormal basis: coefficient vectors as [re, im] pairs."""
    return {
        "schema": SCHEMA,
        "space": spec.space.name,
        "inv_hbar": fmt_float(spec.inv_hbar),
        "degrees": list(range(len(basis))),
        "entries": [[fmt_complex(c) for c in e.coefficients] for e in basis],
    }


def space_dimension(spec: InnerProductSpec):
    """Number of finite-norm monomials; ``math.inf`` when unbounded."""
    if spec.space.kind in (SpaceKind.PLANE, SpaceKind.DISC):
        return math.inf
    if spec.space.kind is SpaceKind.SPHERE:
        m = 0
        while not detect_divergence(spec.space, spec.inv_hbar, m):
            m += 1
        return m
    # custom: probe a bounded range of degrees with the heuristic
    for m in range(0, 4 * DEFAULT_TRUNCATION):
        if detect_divergence(spec.space, spec.inv_hbar, m):
            return m
    return math.inf


def dimension_report(spec: InnerProductSpec) -> dict:
    """Integral-derived dimension next to the two statements made for the sphere."""
    dim = space_dimension(spec)
    out = {"dimension": dim if math.isfinite(dim) else "infinite"}
    if spec.space.kind is SpaceKind.SPHERE:
        n = int(spec.inv_hbar)
        out["paper_stated"] = n
        out["spin_representation_dimension"] = n - 1
        out["note"] = "cutoff discrepancy"
    return out


def kernel_coefficients(spec: InnerProductSpec, w, max_degree: int) -> np.ndarray:
    """Coefficients (in z) of K(z, w) = sum_m e_m(z) conj(e_m(w))."""
    w = complex(spec.space.check_domain(w))
    _check_finite_norm(spec, int(max_degree))
    powers = np.conj(w) ** np.arange(max_degree + 1)
    if spec.space.rotation_invariant:
        return powers * np.exp(-_log_diag(spec, max_degree))
    g = gram_matrix(spec, max_degree).entries
    cond = np.linalg.cond(g)
    if not cond < MAX_CONDITION:
        raise DegenerateGramError(f"Gram matrix condition number {cond:.3g} exceeds {MAX_CONDITION:g}")
    return linalg.cho_solve(linalg.cho_factor(g, lower=True), powers)


def kernel_function(spec: InnerProductSpec, w, max_degree: int = None) -> AnalyticFunction:
    """K(., w) as an analytic function of the first argument."""
    return AnalyticFunction(kernel_coefficients(spec, w, _default_degree(spec, max_degree)))


def _default_degree(spec: InnerProductSpec, max_degree):
    if max_degree is not None:
        return int(max_degree)
    cutoff = spec.cutoff
    return DEFAULT_TRUNCATION if cutoff is None else cutoff


def reproducing_kernel(spec: InnerProductSpec, z, w, max_degree: int = None) -> complex:
    """K(z, w) truncated at ``max_degree`` (default: full sphere space, degree 40 otherwise)."""
    z = complex(spec.space.check_domain(z))
    return kernel_function(spec, w, max_degree)(z)
