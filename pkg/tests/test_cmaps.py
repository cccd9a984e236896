import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from assouadlab.cmaps import (
    Affine,
    MapExpr,
    NegLog,
    Polynomial,
    Power,
    Reciprocal,
    Square,
    Stretch,
    apply_map,
    derivative_bound,
    estimate_dilatation,
    format_map,
    parse_map,
)
from assouadlab.errors import (
    DegenerateDifferentialError,
    ParameterError,
    SingularityError,
)
from assouadlab.pointset import PointSet, SetSpec, generate


def test_power_squares_sequence():
    E = PointSet([1.0, 0.5, 1.0 / 3.0], 1.0 / 6.0)
    img = apply_map(MapExpr((Power(2),)), E)
    assert np.allclose(sorted(img.points.real), [1.0 / 9.0, 0.25, 1.0], rtol=1e-15)


def test_neglog_maps_exponentials_to_integers():
    E = PointSet(np.exp([-1.0, -2.0, -3.0]), 0.1)
    img = apply_map(MapExpr((NegLog(),)), E)
    assert np.allclose(sorted(img.points.real), [1.0, 2.0, 3.0], atol=1e-14)
    assert np.allclose(img.points.imag, 0.0, atol=1e-16)


def test_stretch_identity_when_k_is_one():
    E = generate(SetSpec("spiral", (1.0, 30.0, 0.9)), 30)
    img = apply_map(MapExpr((Stretch(1.0),)), E)
    assert np.array_equal(img.points, E.points)


def test_stretch_example_on_four():
    E = PointSet([4.0], 1.0)
    img = apply_map(MapExpr((Stretch(2.0),)), E)
    assert img.points[0] == 2.0 + 0.0j


def test_stretch_fixes_origin_and_unit_circle():
    E = PointSet([0.0, 1.0, 1.0j, 0.25], 0.2)
    img = apply_map(MapExpr((Stretch(4.0),)), E)
    assert img.points[0] == 0.0j
    assert img.points[1] == 1.0 + 0.0j
    assert img.points[2] == 1.0j
    assert np.isclose(abs(img.points[3]), 0.25 ** (1.0 / 4.0))


def test_composition_coherence_bit_exact():
    E = generate(SetSpec("spiral", (0.5, 20.0, 0.31)), 55)
    a = MapExpr((Stretch(2.0),))
    b = MapExpr((Power(2),))
    combined = apply_map(a | b, E)
    staged = apply_map(b, apply_map(a, E))
    assert np.array_equal(combined.points, staged.points)


def test_declared_k_multiplies():
    e = parse_map("stretch(2.0)|pow(2)|stretch(3.0)")
    assert e.declared_k == 6.0
    assert not e.is_holomorphic
    assert e.holomorphic_part_degree == 2


def test_singularity_proximity_reciprocal():
    E = PointSet([1.0, 1e-12], 1e-13)
    with pytest.raises(SingularityError) as exc:
        apply_map(MapExpr((Reciprocal(),)), E)
    assert "recip" in str(exc.value)


def test_singularity_on_neglog_slit():
    E = PointSet([-1.0 + 1e-12j, 1.0], 0.5)
    with pytest.raises(SingularityError):
        apply_map(MapExpr((NegLog(),)), E)


def test_exclusion_override_allows_tiny_points():
    E = PointSet(np.exp(-np.arange(1.0, 31.0)), 1e-14)
    img = apply_map(MapExpr((NegLog(),)), E, exclusion=1e-15)
    assert len(img) == 30


def test_image_collision_dedup():
    E = PointSet([1.0, -1.0, 2.0], 1.0)
    img = apply_map(MapExpr((Power(2),)), E)
    assert sorted(img.points.real) == [1.0, 4.0]


def test_grammar_round_trip_examples():
    for text in (
        "pow(3)",
        "poly(0.0,1.0,1.0)",
        "recip",
        "neglog",
        "stretch(1.5)",
        "affine(2.0,0.5,-1.0,0.25)",
        "stretch(2.0)|pow(2)",
        "neglog|affine(1.0,0.0,3.0,0.0)",
    ):
        expr = parse_map(text)
        assert parse_map(format_map(expr)) == expr


@given(
    st.lists(
        st.one_of(
            st.integers(1, 5).map(Power),
            st.builds(
                Polynomial,
                st.lists(st.floats(-4, 4).map(lambda x: round(x, 3)), min_size=1, max_size=4).map(tuple),
            ),
            st.just(Reciprocal()),
            st.just(NegLog()),
            st.floats(1.0, 8.0).map(lambda k: Stretch(round(k, 3))),
            st.builds(
                Affine,
                st.complex_numbers(min_magnitude=0.1, max_magnitude=4, allow_nan=False, allow_infinity=False),
                st.complex_numbers(max_magnitude=4, allow_nan=False, allow_infinity=False),
            ),
        ),
        min_size=1,
        max_size=4,
    )
)
@settings(max_examples=80, deadline=None)
def test_grammar_round_trip_random(steps):
    expr = MapExpr(tuple(steps))
    assert parse_map(format_map(expr)) == expr


def test_parse_rejects_garbage():
    for bad in ("pow(2.5)", "pow()", "spin(3)", "", "pow(2)||recip", "affine(1,0)"):
        with pytest.raises(ParameterError):
            parse_map(bad)


def test_derivative_bound_identity():
    assert derivative_bound(MapExpr((Power(1),)), Square(0, 0, 1)) == 1.0


def test_derivative_bound_power_two_unit_square():
    b = derivative_bound(MapExpr((Power(2),)), Square(0, 0, 1))
    assert np.isclose(b, 2.0 * math.sqrt(2.0), rtol=1e-15)


def test_derivative_bound_power_three_offset_square():
    # max corner modulus over [1,2]x[0,1] is |2+i|, checked over all corners
    q = Square(1, 0, 1)
    corner = max(abs(c) for c in q.corners())
    b = derivative_bound(MapExpr((Power(3),)), q)
    assert np.isclose(b, 3.0 * corner**2, rtol=1e-15)
    assert np.isclose(b, 15.0, rtol=1e-12)


def test_derivative_bound_polynomial_formula():
    q = Square(0, 0, 1)
    m = max(abs(c) for c in q.corners())
    b = derivative_bound(MapExpr((Polynomial((0.0, 1.0, 1.0)),)), q)
    assert np.isclose(b, 1.0 + 2.0 * m, rtol=1e-15)


def test_derivative_bound_rejects_stretch():
    with pytest.raises(ParameterError):
        derivative_bound(MapExpr((Stretch(2.0),)), Square(0, 0, 1))


def test_derivative_bound_dominates_increments(rng):
    q = Square(0.2, 0.1, 0.8)
    for expr in (
        MapExpr((Power(2),)),
        MapExpr((Power(3),)),
        MapExpr((Polynomial((0.5, -1.0, 0.0, 2.0)),)),
        MapExpr((Power(2), Affine(2.0 + 1.0j, 0.5))),
    ):
        bound = derivative_bound(expr, q)
        u = q.x0 + rng.random(1000) * q.side + 1j * (q.y0 + rng.random(1000) * q.side)
        v = q.x0 + rng.random(1000) * q.side + 1j * (q.y0 + rng.random(1000) * q.side)
        lhs = np.abs(expr.evaluate(u) - expr.evaluate(v))
        assert np.all(lhs <= bound * np.abs(u - v) + 1e-12)


def test_dilatation_affine_is_conformal():
    rep = estimate_dilatation(parse_map("affine(2.0,0.0,0.0,0.0)"), Square(0.5, 0.5, 1.0))
    assert abs(rep.k_hat - 1.0) <= 1e-6
    assert rep.max_beltrami <= 1e-9


def test_dilatation_power_away_from_origin():
    rep = estimate_dilatation(parse_map("pow(2)"), Square(1, 1, 1))
    assert abs(rep.k_hat - 1.0) <= 1e-4


def test_dilatation_stretch_matches_k():
    rep = estimate_dilatation(parse_map("stretch(2.0)"), Square(0.7, 0.7, 0.6))
    assert abs(rep.k_hat - 2.0) <= 1e-2
    assert abs(rep.max_beltrami - 1.0 / 3.0) <= 1e-2


def test_dilatation_composition_within_declared():
    expr = parse_map("stretch(2.0)|pow(2)")
    rep = estimate_dilatation(expr, Square(0.6, 0.6, 0.5))
    assert rep.k_hat >= 1.0
    assert rep.k_hat <= expr.declared_k * (1.0 + 1e-3)


# this square's 8x8 probe grid has a probe exactly at the origin
_ORIGIN_PROBE_SQUARE = Square(-0.4375, -0.4375, 1.0)


def test_dilatation_rejects_singular_probe():
    with pytest.raises(SingularityError):
        estimate_dilatation(parse_map("recip"), _ORIGIN_PROBE_SQUARE, grid_n=8)


def test_dilatation_degenerate_probe():
    # f(z) = z^2 at the origin: central differences give f_z = f_zbar = 0
    with pytest.raises(DegenerateDifferentialError):
        estimate_dilatation(parse_map("pow(2)"), _ORIGIN_PROBE_SQUARE, grid_n=8)


def test_grid_n_validation():
    with pytest.raises(ParameterError):
        estimate_dilatation(parse_map("pow(2)"), Square(1, 1, 1), grid_n=4)


def test_image_resolution_heuristic_positive():
    E = generate(SetSpec("sequence_power", (1.0,)), 500)
    img = apply_map(parse_map("pow(2)"), E)
    assert img.resolution > 0
    assert "delta heuristic" in img.label
