import pytest

from models.l_function_data import LFunctionData
from models.polygon import PolygonSpec
from models.poly_spec import PolySpec
from models.twist_data import TwistData
from models.valuation import Valuation
from utils.charsum import l_poly, l_to_c_np, s_series, s_sum, witt_trace_exponent
from utils.errors import ConfigError, EnumerationGuardError, PolygonError
from utils.ffield import build_field, build_tower, trace_to_prime
from utils.padic import pim_context, subst_T, zq_context
from utils.polygons import dominates, np_from_points, p_dk_u


@pytest.fixture(scope="module")
def quadratic(f11):
    return PolySpec.build(f11, 2, 1, {"a1": 1, "ad": 1})


def test_sum_of_trivial_character(f11):
    f = PolySpec.build(f11, 1, None, {"ad": 1})
    value = s_sum(f, 0, 1, 1)
    assert value == value.ctx.from_int(-1)


def test_quadratic_gauss_sum_example():
    field = build_field(3, 1)
    f = PolySpec.build(field, 2, None, {"ad": 1})
    value = s_sum(f, 0, 1, 1)
    two = value.ctx.zq.int_raw(2)
    assert value == value.ctx.element([two, two])


def test_witt_trace_exponent_example():
    field = build_field(5, 1)
    f = PolySpec.build(field, 1, None, {"ad": 1})
    assert witt_trace_exponent(field.from_int(2), f, 2) == 7


def test_witt_trace_reduces_to_field_trace(quadratic, f11, f121):
    tower = build_tower(f11, 2)
    for code in (1, 2, 30, 77, 120):
        x = f121.from_int(code)
        expected = trace_to_prime(quadratic.evaluate(x, tower)).to_int()
        assert witt_trace_exponent(x, quadratic, 1) == expected


def test_witt_trace_rejects_zero(quadratic, f11):
    with pytest.raises(PolygonError):
        witt_trace_exponent(f11.zero(), quadratic, 1)


def test_nontrivial_series_has_no_constant_term(quadratic):
    series = s_series(quadratic, 1, 1, 3, K=5)
    assert series.coefficient(0).is_zero()


def test_series_specializes_to_sum():
    field = build_field(3, 1)
    f = PolySpec.build(field, 2, 1, {"a1": 1, "ad": 1})
    series = s_series(f, 1, 1, 8, K=3)
    ring = pim_context(zq_context(field, 3), 1)
    assert subst_T(series, ring.uniformizer()) == s_sum(f, 1, 1, 1, K=3)


def test_enumeration_guard(quadratic):
    with pytest.raises(EnumerationGuardError):
        s_sum(quadratic, 1, 1, 1, guard=10)


def test_galois_twist(f121):
    f = PolySpec.build(f121, 2, 1, {"a1": "1+t", "ad": 1})
    for u in range(0, 120, 17):
        plain = s_sum(f, u, 1, 1, K=6)
        assert s_sum(f, 11 * u, 1, 1, K=6) == plain.frobenius(1)


def test_l_polynomial_degree_and_bound(quadratic):
    data = l_poly(quadratic, 1, 1, L_terms=4, K=10)
    assert data.degree == 2
    assert data.valuations[0] == Valuation.exact(0)
    assert data.degree_ok
    spec = PolygonSpec(TwistData.from_u(11, 1, 1), 2, 1, 2)
    newton = l_to_c_np(data, 2)
    assert dominates(newton, p_dk_u(spec), 2)


def test_l_to_c_np_extent(quadratic):
    data = l_poly(quadratic, 1, 1, K=10)
    assert l_to_c_np(data, 0).extent == 0
    with pytest.raises(PolygonError):
        l_to_c_np(data, 3)


def test_l_polynomial_rejects_p_dividing_d():
    field = build_field(3, 1)
    f = PolySpec.build(field, 3, 1, {"a1": 1, "ad": 1})
    with pytest.raises(ConfigError):
        l_poly(f, 0, 1)


def test_l_to_c_np_refuses_an_undetermined_hull():
    valuations = (Valuation.exact(0), Valuation.exact(1), Valuation.at_least(3))
    newton = np_from_points(list(enumerate(valuations)))
    data = LFunctionData(1, 2, (), valuations, newton)
    assert newton.extent == 1
    assert l_to_c_np(data, 1).slopes == (1,)
    with pytest.raises(PolygonError):
        l_to_c_np(data, 2)


def test_series_precision_is_monotone(quadratic):
    coarse = s_series(quadratic, 1, 1, 3, K=3)
    fine = s_series(quadratic, 1, 1, 5, K=5)
    P = 11**3
    truncated = fine.truncate(3)
    assert [tuple(x % P for x in raw) for raw in truncated.dense()] == coarse.dense()


@pytest.mark.parametrize("u", [1, 4, 7])
def test_l_slopes_are_bounded_by_ord_q(quadratic, u):
    data = l_poly(quadratic, u, 1, K=10)
    ord_q = 10
    assert data.newton.extent >= 1
    assert all(slope <= ord_q for slope in data.newton.slopes)


def test_l_slopes_over_f121_are_bounded_by_ord_q(f121):
    f = PolySpec.build(f121, 2, 1, {"a1": "1+t", "ad": 1})
    data = l_poly(f, 13, 1, K=6)
    ord_q = 2 * 10
    assert all(slope <= ord_q for slope in data.newton.slopes)
