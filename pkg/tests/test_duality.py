import math

import numpy as np
import pytest

from berezin_kit import AnalyticFunction, MoebiusMap, classify, coherence_residual, coherent_state, make_spec, plane, pullback
from berezin_kit.duality import (
    DUALITY_S,
    IDENTITY,
    MapClass,
    SampledFunction,
    dilation,
    duality_report,
    parse_map,
    translation,
)
from berezin_kit.errors import ConstraintError, PoleProximityError


def s_residual_oracle(label, hbar):
    """Closed form for z -> -1/z, weight 0: the twisted derivative acting on a Gaussian."""
    r = abs(label)
    return math.sqrt(hbar) * (1 / hbar) * r * math.sqrt(4 * r * r * hbar + 2 * hbar * hbar)


def random_map(rng):
    a, b, c = rng.normal(size=3)
    a = a if abs(a) > 0.3 else 0.3 + abs(a)
    d = (1 + b * c) / a
    return MoebiusMap(a, b, c, d)


@pytest.fixture(scope="module")
def spec():
    return make_spec(plane(), 1)


def test_classify_examples():
    assert classify(IDENTITY) is MapClass.IDENTITY
    assert classify(MoebiusMap(-1, 0, 0, -1)) is MapClass.IDENTITY
    assert classify(DUALITY_S) is MapClass.DUALITY_S
    assert classify(MoebiusMap(0, 1, -1, 0)) is MapClass.DUALITY_S
    assert classify(translation(2.0)) is MapClass.AFFINE
    assert classify(dilation(3.0)) is MapClass.AFFINE
    assert classify(MoebiusMap(1, 0, 1, 1)) is MapClass.GENERAL


def test_determinant_enforced():
    with pytest.raises(ValueError):
        MoebiusMap(1, 1, 1, 1)
    with pytest.raises(ValueError):
        MoebiusMap(1, 0, 0, 1, weight=-1)


def test_s_squares_to_minus_identity():
    assert np.allclose((DUALITY_S @ DUALITY_S).matrix, -np.eye(2))
    assert DUALITY_S(2j) == pytest.approx(0.5j)


def test_group_law_matches_function_composition(rng):
    for _ in range(20):
        m1, m2 = random_map(rng), random_map(rng)
        z = complex(*rng.normal(size=2))
        assert (m1 @ m2)(z) == pytest.approx(m1(m2(z)), rel=1e-10)
        assert m1.inverse()(m1(z)) == pytest.approx(z, rel=1e-10)


@pytest.mark.parametrize("w", [0, 1, 2])
def test_pullback_composition(rng, w):
    pts = rng.normal(size=12) + 1j * rng.normal(size=12)
    for _ in range(10):
        m1 = MoebiusMap(*random_map(rng).matrix.ravel(), weight=w)
        m2 = MoebiusMap(*random_map(rng).matrix.ravel(), weight=w)
        f = AnalyticFunction(rng.normal(size=int(rng.integers(1, 11))) + 0j)
        direct = pullback(m1 @ m2, f, pts).values
        nested = pullback(m2, pullback(m1, f, pts)).values
        assert np.allclose(direct, nested, rtol=1e-9, atol=1e-12)


def test_pullback_identity(rng):
    pts = rng.normal(size=8) + 1j * rng.normal(size=8)
    f = AnalyticFunction(rng.normal(size=11))
    for w in (0, 3):
        assert np.allclose(pullback(MoebiusMap(1, 0, 0, 1, w), f, pts).values, f(pts), rtol=1e-14)


def test_pullback_weight_factor():
    f = AnalyticFunction([1.0])
    out = pullback(MoebiusMap(0, -1, 1, 0, weight=2), f, [2.0])
    assert out.values[0] == pytest.approx(0.25)


def test_pullback_near_pole():
    with pytest.raises(PoleProximityError) as info:
        pullback(DUALITY_S, AnalyticFunction([1, 1]), [0.5, 1e-10])
    assert info.value.pole == 0.0


def test_sampled_function_needs_evaluator():
    sf = SampledFunction([1.0], [2.0])
    with pytest.raises(ValueError):
        pullback(DUALITY_S, sf)


def test_identity_baseline(spec):
    for label in (0.3, 0.5, 0.8, 0.2 - 0.4j):
        for w in (0, 1, 2):
            res = coherence_residual(spec, MoebiusMap(1, 0, 0, 1, w), label)
            assert res < 1e-8


@pytest.mark.parametrize("label", [0.3, 0.5, 0.8, 0.4 + 0.3j])
def test_s_residual_matches_closed_form(spec, label):
    assert coherence_residual(spec, DUALITY_S, label) == pytest.approx(s_residual_oracle(label, 1.0), rel=1e-8)


def test_s_residual_closed_form_other_hbar():
    sp = make_spec(plane(), 2)
    assert coherence_residual(sp, DUALITY_S, 0.5) == pytest.approx(s_residual_oracle(0.5, 0.5), rel=1e-8)


@pytest.mark.parametrize("w", [0, 1, 2])
def test_s_map_breaks_coherence(spec, w):
    for label in (0.3, 0.5, 0.8):
        base = coherence_residual(spec, MoebiusMap(1, 0, 0, 1, w), label)
        res = coherence_residual(spec, MoebiusMap(0, -1, 1, 0, w), label)
        assert res > 0.05 and res > 10 * base


def test_residual_grows_with_weight(spec):
    vals = [coherence_residual(spec, MoebiusMap(0, -1, 1, 0, w), 0.5) for w in range(3)]
    assert vals[0] < vals[1] < vals[2]


@pytest.mark.parametrize("m", [translation(0.3), translation(-0.7), dilation(1.2), MoebiusMap(1.1, 0.2, 0, 1 / 1.1)])
def test_affine_maps_keep_coherence(spec, m):
    for label in (0.3, 0.5 + 0.2j):
        assert coherence_residual(spec, m, label) < 1e-6


def test_translated_state_is_coherent_at_same_label(spec):
    label = 0.4 + 0.1j
    res, info = coherence_residual(spec, translation(0.5), label, details=True)
    ref = coherent_state(spec, label, info["refit_degree"]).vector.coefficients
    got = info["refit"].coefficients
    ratio = got[0] / ref[0]
    assert np.allclose(got[:20], ratio * ref[:20], rtol=1e-8, atol=1e-12)
    assert abs(ratio) == pytest.approx(1.0, abs=1e-10)


def test_general_map_pole_on_node(spec):
    rule = spec.rule_for(41)
    a = rule.points[0].real  # the first angular node sits on the real axis
    assert rule.points[0].imag == 0
    with pytest.raises(PoleProximityError):
        coherence_residual(spec, MoebiusMap(a, -1, 1, 0), 0.3)


def test_coherence_requires_plane():
    from berezin_kit import disc
    with pytest.raises(ConstraintError):
        coherence_residual(make_spec(disc(), 4), DUALITY_S, 0.3)


def test_report_fields(spec):
    rep = duality_report(spec, DUALITY_S, 0.5)
    assert rep["schema"] == "berezin-kit/1"
    assert rep["classification"] == "DualityS"
    assert rep["residual"] > 0.05 and rep["baseline_residual"] < 1e-8
    assert rep["map"] == [[0.0, -1.0], [1.0, 0.0]]


@pytest.mark.parametrize("text, expected", [
    ("S", MapClass.DUALITY_S), ("I", MapClass.IDENTITY), ("T:0.5", MapClass.AFFINE),
    ("D:2", MapClass.AFFINE), ("1,0,1,1", MapClass.GENERAL),
])
def test_parse_map(text, expected):
    assert classify(parse_map(text)) is expected


def test_parse_map_rejects_garbage():
    with pytest.raises(ValueError):
        parse_map("rotate")
