"""Coherent states as normalized reproducing kernels, and the plane ladder algebra."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConstraintError, SpecMismatchError
from .hilbert import (
    AnalyticFunction,
    InnerProductSpec,
    _basis_matrix,
    _check_finite_norm,
    _default_degree,
    _log_diag,
    inner_product,
    kernel_coefficients,
)
from .phase_space import SpaceKind

__all__ = [
    "LadderOperators",
    "CoherentState",
    "ladder_operators",
    "coherent_state",
    "overlap",
    "eigen_residual",
    "best_eigen_residual",
    "orthonormal_coordinates",
    "resolution_of_identity_matrix",
    "resolution_of_identity_residual",
]


@dataclass(frozen=True, eq=False)
class LadderOperators:
    """a, a^dagger, Q and P on the orthonormal basis e_0..e_T of the plane.

    In the monomial picture ``a = sqrt(hbar) d/dz`` and ``a^dagger = z / sqrt(hbar)``.
    """

    annihilation: np.ndarray = field(repr=False)
    creation: np.ndarray = field(repr=False)
    position: np.ndarray = field(repr=False)
    momentum: np.ndarray = field(repr=False)
    hbar: float
    truncation: int

    def commutator(self) -> np.ndarray:
        q, p = self.position, self.momentum
        return q @ p - p @ q

    def annihilate(self, f: AnalyticFunction) -> AnalyticFunction:
        c = f.coefficients
        if c.size == 1:
            return AnalyticFunction([0.0])
        return AnalyticFunction(math.sqrt(self.hbar) * c[1:] * np.arange(1, c.size))

    def create(self, f: AnalyticFunction) -> AnalyticFunction:
        return AnalyticFunction(np.concatenate([[0.0], f.coefficients]) / math.sqrt(self.hbar))


def _require_plane(spec: InnerProductSpec):
    if spec.space.kind is not SpaceKind.PLANE:
        raise ConstraintError(f"ladder operators are defined on the plane only, not on {spec.space.name}")


def ladder_operators(spec: InnerProductSpec, truncation: int) -> LadderOperators:
    _require_plane(spec)
    t = int(truncation)
    if t < 1:
        raise ValueError("truncation must be >= 1")
    a = np.diag(np.sqrt(np.arange(1, t + 1, dtype=float)), k=1).astype(complex)
    ad = a.conj().T
    hbar = spec.hbar
    q = math.sqrt(hbar / 2.0) * (a + ad)
    p = math.sqrt(hbar / 2.0) * (a - ad) / 1j
    for mat in (a, ad, q, p):
        mat.setflags(write=False)
    return LadderOperators(a, ad, q, p, hbar, t)


@dataclass(frozen=True, eq=False)
class CoherentState:
    label: complex
    spec: InnerProductSpec = field(repr=False)
    vector: AnalyticFunction = field(repr=False)

    @property
    def truncation(self) -> int:
        return self.vector.truncation_degree

    @property
    def eigenvalue(self) -> complex:
        """Eigenvalue of a on the plane: K(., w) = exp(z conj(w) / hbar) gives sqrt(1/hbar) conj(w)."""
        return math.sqrt(self.spec.inv_hbar) * np.conj(self.label)


def coherent_state(spec: InnerProductSpec, label, truncation: int = None) -> CoherentState:
    """K(z, label) / sqrt(K(label, label)) truncated at ``truncation``."""
    label = complex(spec.space.check_domain(label))
    deg = _default_degree(spec, truncation)
    coeffs = kernel_coefficients(spec, label, deg)
    k_ll = np.real(np.sum(coeffs * label ** np.arange(deg + 1)))
    return CoherentState(label, spec, AnalyticFunction(coeffs / math.sqrt(k_ll)))


def overlap(s1: CoherentState, s2: CoherentState) -> complex:
    if not s1.spec.same_as(s2.spec):
        raise SpecMismatchError("coherent states belong to different inner-product specs")
    return inner_product(s1.spec, s1.vector, s2.vector)


def orthonormal_coordinates(spec: InnerProductSpec, f: AnalyticFunction) -> np.ndarray:
    """Coordinates of ``f`` on e_0..e_T (rotation-invariant spaces)."""
    if not spec.space.rotation_invariant:
        raise ConstraintError("orthonormal coordinates by rescaling need a rotation-invariant space")
    d = f.truncation_degree
    _check_finite_norm(spec, f.degree)
    return f.coefficients * np.exp(0.5 * _log_diag(spec, d))


def eigen_residual(state: CoherentState, eigenvalue=None) -> float:
    """||(a - mu) psi|| / ||psi|| with mu the kernel eigenvalue unless given."""
    _require_plane(state.spec)
    b = orthonormal_coordinates(state.spec, state.vector)
    ops = ladder_operators(state.spec, b.size - 1)
    mu = state.eigenvalue if eigenvalue is None else complex(eigenvalue)
    return float(np.linalg.norm(ops.annihilation @ b - mu * b) / np.linalg.norm(b))


def best_eigen_residual(b: np.ndarray):
    """min over mu of ||(a - mu) b|| / ||b|| for orthonormal coordinates ``b``.

    Returns (residual, minimizing mu).
    """
    b = np.asarray(b, dtype=complex)
    nb = np.linalg.norm(b)
    if not nb > 0:
        raise ArithmeticError("zero vector has no eigen-residual")
    ab = np.zeros_like(b)
    ab[:-1] = np.sqrt(np.arange(1, b.size)) * b[1:]
    mu = np.vdot(b, ab) / nb**2
    return float(np.linalg.norm(ab - mu * b) / nb), complex(mu)


def resolution_of_identity_matrix(spec: InnerProductSpec, max_degree: int) -> np.ndarray:
    """M[m, n] = c int dmu w <e_m|zeta><zeta|e_n> K(zeta, zeta) over labels zeta."""
    d = int(max_degree)
    _check_finite_norm(spec, d)
    rule = spec.rule_for(d)
    basis = _basis_matrix(spec, d)
    pts, wts = rule.points, rule.weights
    powers = np.arange(d + 1)
    vand = pts[:, None] ** powers[None, :]
    e_vals = vand @ basis                               # e_m at the nodes
    # kernel vectors K(., zeta_i): coefficients kc[:, i]; values at the nodes
    kc = basis @ np.conj(e_vals).T
    k_diag = np.real(np.einsum("im,im->i", e_vals, np.conj(e_vals)))
    states = (vand @ kc) / np.sqrt(k_diag)[None, :]     # |zeta_i> at the nodes
    amp = (np.conj(e_vals).T * wts) @ states            # <e_m | zeta_i>
    return (amp * (wts * k_diag)[None, :]) @ np.conj(amp).T


def resolution_of_identity_residual(spec: InnerProductSpec, max_degree: int = None) -> float:
    """max |M - I| on degrees <= max_degree."""
    d = _default_degree(spec, max_degree)
    m = resolution_of_identity_matrix(spec, d)
    return float(np.max(np.abs(m - np.eye(d + 1))))
