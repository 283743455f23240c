"""Model Kaehler phase spaces: potential, metric and measure density.

All densities are relative to the flat area element ``dx dy / pi``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import DomainError, MetricError

__all__ = [
    "SpaceKind",
    "PhaseSpace",
    "plane",
    "sphere",
    "disc",
    "custom",
    "space_from_name",
    "potential_eval",
    "metric_eval",
    "measure_density",
    "fd_metric",
]


class SpaceKind(str, enum.Enum):
    PLANE = "plane"
    SPHERE = "sphere"
    DISC = "disc"
    CUSTOM = "custom"


def _k_plane(z):
    return np.abs(z) ** 2


def _k_sphere(z):
    return np.log1p(np.abs(z) ** 2)


def _k_disc(z):
    return -np.log1p(-(np.abs(z) ** 2))


def _g_plane(z):
    return np.ones_like(np.abs(z))


def _g_sphere(z):
    return (1.0 + np.abs(z) ** 2) ** -2


def _g_disc(z):
    return (1.0 - np.abs(z) ** 2) ** -2


@dataclass(frozen=True)
class PhaseSpace:
    """A Kaehler phase space in a single chart.

    Parameters
    ----------
    kind : SpaceKind
    potential : callable
        Vectorized Kaehler potential ``K(z, zbar)``, real valued.
    domain_radius : float
        The chart is the open disc ``|z| < domain_radius`` (``inf`` for all of C).
    dimension : int
        Complex dimension. Model spaces have 1.
    metric : callable, optional
        Closed-form ``d^2 K / dz dzbar``; ``None`` means finite differences.
    density : callable, optional
        User-supplied measure density (overrides ``det g``); Custom spaces only.
    """

    kind: SpaceKind
    potential: Callable = field(repr=False)
    domain_radius: float = math.inf
    dimension: int = 1
    metric: Optional[Callable] = field(default=None, repr=False)
    density: Optional[Callable] = field(default=None, repr=False)
    name: str = ""

    def __post_init__(self):
        if not self.name:
            object.__setattr__(self, "name", self.kind.value)
        if self.dimension < 1:
            raise ValueError("dimension must be >= 1")
        if self.kind is not SpaceKind.CUSTOM and self.dimension != 1:
            raise ValueError("model spaces have complex dimension 1")
        if not self.domain_radius > 0:
            raise ValueError("domain_radius must be positive")

    @property
    def is_model(self) -> bool:
        return self.kind is not SpaceKind.CUSTOM

    @property
    def rotation_invariant(self) -> bool:
        return self.is_model

    @property
    def bounded(self) -> bool:
        return math.isfinite(self.domain_radius)

    @property
    def finite_volume(self) -> Optional[bool]:
        """Whether the unweighted measure has finite total mass (None if unknown)."""
        return {
            SpaceKind.PLANE: False,
            SpaceKind.SPHERE: True,
            SpaceKind.DISC: False,
        }.get(self.kind)

    def contains(self, z) -> np.ndarray:
        return np.abs(np.asarray(z)) < self.domain_radius

    def check_domain(self, z):
        z = np.asarray(z, dtype=complex)
        bad = ~self.contains(z) | ~np.isfinite(z)
        if np.any(bad):
            shown = complex(np.atleast_1d(z)[np.atleast_1d(bad)][0])
            raise DomainError(
                f"point {shown:.6g} outside the domain of {self.name} (|z| < {self.domain_radius})"
            )
        return z


def plane() -> PhaseSpace:
    return PhaseSpace(SpaceKind.PLANE, _k_plane, math.inf, metric=_g_plane)


def sphere() -> PhaseSpace:
    # single chart; the point at infinity has measure zero
    return PhaseSpace(SpaceKind.SPHERE, _k_sphere, math.inf, metric=_g_sphere)


def disc() -> PhaseSpace:
    return PhaseSpace(SpaceKind.DISC, _k_disc, 1.0, metric=_g_disc)


def custom(potential, domain_radius=math.inf, density=None, dimension=1, name="custom") -> PhaseSpace:
    """Wrap a black-box potential. Derivatives come from central differences."""
    return PhaseSpace(
        SpaceKind.CUSTOM,
        potential,
        float(domain_radius),
        dimension=dimension,
        density=density,
        name=name,
    )


def space_from_name(name: str) -> PhaseSpace:
    try:
        kind = SpaceKind(name.lower())
    except ValueError:
        raise ValueError(f"unknown space {name!r}") from None
    if kind is SpaceKind.CUSTOM:
        raise ValueError("custom spaces need a potential; use custom()")
    return {SpaceKind.PLANE: plane, SpaceKind.SPHERE: sphere, SpaceKind.DISC: disc}[kind]()


def potential_eval(space: PhaseSpace, z):
    """K(z, zbar). Scalars in, float out; arrays in, arrays out."""
    zz = space.check_domain(z)
    out = np.asarray(space.potential(zz), dtype=float)
    return float(out) if out.ndim == 0 else out


def fd_step(z, radius: float = math.inf):
    """Central-difference step; shrinks near the edge of a bounded domain."""
    r = np.abs(z)
    return 1e-4 * np.minimum(1.0 + r, 3.0 * (radius - r))


def fd_metric(potential: Callable, z, radius: float = math.inf) -> np.ndarray:
    """d^2K/dz dzbar = (K_xx + K_yy) / 4 by central differences."""
    z = np.asarray(z, dtype=complex)
    h = fd_step(z, radius)
    k0 = np.asarray(potential(z), dtype=float)
    kxx = np.asarray(potential(z + h), dtype=float) - 2 * k0 + np.asarray(potential(z - h), dtype=float)
    kyy = np.asarray(potential(z + 1j * h), dtype=float) - 2 * k0 + np.asarray(potential(z - 1j * h), dtype=float)
    return (kxx + kyy) / (4.0 * h * h)


def _metric_array(space: PhaseSpace, z: np.ndarray) -> np.ndarray:
    if space.metric is not None:
        g = np.asarray(space.metric(z), dtype=float)
    else:
        g = fd_metric(space.potential, z, space.domain_radius)
    if np.any(~(g > 0)):
        raise MetricError(f"non-positive metric on {space.name}; the potential is not Kaehler there")
    return g


def metric_eval(space: PhaseSpace, z):
    """g(z) = d^2K/dz dzbar (closed form for model spaces)."""
    zz = space.check_domain(z)
    if space.dimension != 1:
        raise NotImplementedError("metric of n > 1 custom spaces must be given as a density")
    g = _metric_array(space, zz)
    return float(g) if g.ndim == 0 else g


def measure_density(space: PhaseSpace, z):
    """det(g) relative to dx dy / pi; equals the metric for n = 1."""
    zz = space.check_domain(z)
    if space.density is not None:
        d = np.asarray(space.density(zz), dtype=float)
        if np.any(~(d > 0)):
            raise MetricError(f"non-positive density on {space.name}")
    else:
        d = np.asarray(metric_eval(space, zz), dtype=float)
    return float(d) if d.ndim == 0 else d
