import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from berezin_kit import build_rule, custom, detect_divergence, disc, integrate, measure_density, plane, sphere
from berezin_kit.errors import ConstraintError, QuadratureError
from berezin_kit.quadrature import (
    divergence_heuristic,
    finite_norm_cutoff,
    model_log_moments,
    normalization_constant,
)


def fs_custom():
    """Sphere potential given as a black box with its exact density."""
    return custom(lambda z: np.log1p(np.abs(z) ** 2),
                  density=lambda z: 1.0 / (1.0 + np.abs(z) ** 2) ** 2, name="fs")


def test_normalization_constants():
    assert normalization_constant(plane(), 2.5) == 2.5
    assert normalization_constant(sphere(), 4) == 5
    assert normalization_constant(disc(), 6) == 5


@pytest.mark.parametrize("space, s", [(plane(), 1), (plane(), 3.5), (sphere(), 4), (sphere(), 9), (disc(), 4), (disc(), 1.5)])
def test_total_mass_is_one(space, s):
    rule = build_rule(space, s, max_degree=6)
    assert integrate(rule, lambda z: np.ones_like(z)) == pytest.approx(1.0, abs=1e-13)


def test_integrate_examples():
    assert integrate(build_rule(plane(), 1, max_degree=2), lambda z: np.abs(z) ** 2).real == pytest.approx(1.0, rel=1e-13)
    assert integrate(build_rule(disc(), 4, max_degree=2), lambda z: np.abs(z) ** 2).real == pytest.approx(0.25, rel=1e-13)
    # |z|^2 on the sphere, N = 4: 1!3!/4! = 1/4
    assert integrate(build_rule(sphere(), 4, max_degree=2), lambda z: np.abs(z) ** 2).real == pytest.approx(0.25, rel=1e-13)


def test_integrate_accepts_node_values():
    rule = build_rule(plane(), 2, max_degree=3)
    assert integrate(rule, np.abs(rule.points) ** 4) == pytest.approx(integrate(rule, lambda z: np.abs(z) ** 4))


def test_integrate_rejects_non_finite():
    rule = build_rule(plane(), 1, max_degree=2)
    with pytest.raises(QuadratureError), np.errstate(all="ignore"):
        integrate(rule, lambda z: 1.0 / (z - z[0]))


@settings(max_examples=30, deadline=None)
@given(a=st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False),
       b=st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False))
def test_linearity(a, b):
    rule = build_rule(disc(), 4, max_degree=4)
    f = lambda z: z * np.conj(z) ** 2 + 1
    g = lambda z: np.abs(z) ** 6
    lhs = integrate(rule, lambda z: a * f(z) + b * g(z))
    rhs = a * integrate(rule, f) + b * integrate(rule, g)
    assert abs(lhs - rhs) <= 1e-12 * (1 + abs(a) + abs(b))


@pytest.mark.parametrize("space, s", [(plane(), 1), (sphere(), 8), (disc(), 4)])
def test_angular_exactness(space, s):
    rule = build_rule(space, s, max_degree=5)
    for a in range(6):
        for b in range(6):
            if a == b:
                continue
            assert abs(integrate(rule, lambda z: z**a * np.conj(z) ** b)) < 1e-13


def test_rule_properties():
    rule = build_rule(plane(), 1, max_degree=7)
    assert rule.max_exact_degree >= 7
    assert rule.node_count == rule.points.size == rule.weights.size
    assert rule.separable


def test_sphere_degree_capped_at_cutoff():
    assert build_rule(sphere(), 3, max_degree=50).max_exact_degree == 3


@pytest.mark.parametrize("bad", [0, -1, math.inf, math.nan])
def test_nonpositive_inv_hbar_rejected(bad):
    with pytest.raises(ConstraintError):
        build_rule(plane(), bad)


def test_sphere_requires_integer():
    with pytest.raises(ConstraintError, match="must be an integer"):
        build_rule(sphere(), 4.5)


def test_disc_requires_inv_hbar_above_one():
    with pytest.raises(ConstraintError):
        build_rule(disc(), 1.0)


def test_custom_rule_reaches_tight_tolerance():
    rule = build_rule(fs_custom(), 4, target_rel_err=1e-12, max_degree=3)
    # normalized moments of |z|^2m on the N=4 sphere: m!(4-m)!/4!
    for m in range(4):
        val = integrate(rule, lambda z: np.abs(z) ** (2 * m)).real
        assert val == pytest.approx(math.factorial(m) * math.factorial(4 - m) / 24, rel=1e-10)
    assert rule.normalization == pytest.approx(5.0, rel=1e-10)


def test_node_doubling_error_decreases_to_floor():
    """Error of a hard moment shrinks (non-increasing) as nodes double, until roundoff."""
    exact = math.factorial(3) * math.factorial(1) / 24
    errs = []
    for n in (8, 16, 32, 64, 128, 256):
        rule = build_rule(fs_custom(), 4, target_rel_err=1e-3, max_degree=3, radial_nodes=n)
        val = integrate(rule, lambda z: np.abs(z) ** 6).real
        errs.append(abs(val - exact) / exact)
    floor = 1e-13
    clipped = [max(e, floor) for e in errs]
    assert all(b <= a * 1.0001 for a, b in zip(clipped, clipped[1:]))
    assert clipped[-1] < 1e-10


def test_model_log_moments_match_gamma():
    lm = model_log_moments(plane(), 1, 30)
    assert np.allclose(lm, [math.lgamma(m + 1) for m in range(31)], rtol=1e-13, atol=1e-13)


def test_finite_norm_cutoff():
    assert finite_norm_cutoff(sphere(), 4) == 4
    assert finite_norm_cutoff(plane(), 4) is None
    assert finite_norm_cutoff(disc(), 4) is None


@pytest.mark.parametrize("m, expected", [(0, False), (4, False), (5, True), (7, True)])
def test_sphere_divergence(m, expected):
    assert detect_divergence(sphere(), 4, m) is expected
    assert divergence_heuristic(sphere(), 4.0, m) is expected


@pytest.mark.parametrize("s, expected", [(0.5, True), (1.0, True), (1.5, False), (4.0, False)])
def test_disc_divergence(s, expected):
    assert detect_divergence(disc(), s, 3) is expected
    assert divergence_heuristic(disc(), s, 3) is expected


def test_plane_never_diverges():
    for m in (0, 10, 50):
        assert detect_divergence(plane(), 1, m) is False
        assert divergence_heuristic(plane(), 1.0, m) is False


def test_custom_divergence_uses_heuristic():
    assert detect_divergence(fs_custom(), 4, 4) is False
    assert detect_divergence(fs_custom(), 4, 5) is True


def test_finite_volume_agrees_with_heuristic():
    """The Liouville volume (no exp(-K/hbar) factor) is finite exactly on the sphere."""
    for model in (plane(), sphere(), disc()):
        bare = custom(lambda z: np.zeros(np.shape(z)), domain_radius=model.domain_radius,
                      density=lambda z, m=model: measure_density(m, z))
        assert divergence_heuristic(bare, 1.0, 0) is (not model.finite_volume)
