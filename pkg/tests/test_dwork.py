import pytest

from models.polygon import ConvexPolygon, PolygonSpec
from models.poly_spec import PolySpec
from models.twist_data import TwistData
from models.valuation import Valuation
from utils.dwork import (
    artin_hasse,
    c_function_np,
    char_series,
    characteristic_coefficients,
    ef_gamma,
    gamma_order_bound,
    initial_precision,
    psi_b_matrix,
    row_bounds,
    tail_clear,
    trace_consistency,
)
from utils.errors import PrecisionError
from utils.padic import PiSeries, zq_context
from utils.polygons import dominates, p_dk_u


@pytest.fixture(scope="module")
def quadratic(f11):
    return PolySpec.build(f11, 2, 1, {"a1": 1, "ad": 1})


def test_artin_hasse_below_p():
    P = 11**3
    expected = [1, 1] + [pow(n, -1, P) for n in (2, 6, 24)]
    assert artin_hasse(11, 5, 3) == expected


def test_artin_hasse_at_p():
    # E(t) = exp(t + t^2/2 + ...) has lambda_2 = 1/2 + 1/2 for p = 2
    assert artin_hasse(2, 3, 4) == [1, 1, 1]


def test_gamma_order_bound():
    assert gamma_order_bound(4, 2, None) == 2
    assert gamma_order_bound(3, 2, None) is None
    assert gamma_order_bound(3, 2, 1) == 2


def test_gammas_of_monomial(f11):
    f = PolySpec.build(f11, 2, None, {"ad": 1})
    table = ef_gamma(f, 7, 5, 4)
    zq = zq_context(f11, 4)
    assert table.gamma(0) == PiSeries.one(zq, 5)
    assert table.gamma(3).is_zero()
    half = pow(2, -1, 11**4)
    assert table.gamma(4) == PiSeries.monomial(zq, 5, 2, half)


def test_gamma_three_of_quadratic(f11):
    f = PolySpec.build(f11, 2, 1, {"a1": 3, "ad": 5})
    zq = zq_context(f11, 4)
    t1 = zq.teichmuller(f11.from_int(3))
    t2 = zq.teichmuller(f11.from_int(5))
    lam3 = pow(6, -1, 11**4)
    expected = PiSeries.make(
        zq, 4, [zq.zero_raw(), zq.zero_raw(), (t1 * t2).coeffs, (t1**3 * lam3).coeffs]
    )
    assert ef_gamma(f, 5, 4, 4).gamma(3) == expected


def test_gamma_table_bounds(quadratic):
    table = ef_gamma(quadratic, 41, 22, 6)
    assert table.order_violations() == []
    assert table.gamma(44).is_zero()
    with pytest.raises(PrecisionError):
        table.gamma(41)


def test_psi_matrix_entries(quadratic):
    psi = psi_b_matrix(quadratic, 1, 3, 8, 4)
    assert psi.matrix[0][2].is_zero()
    assert psi.matrix[1][0] == psi.table.gamma(12)
    assert psi.matrix[2][0].is_zero()
    assert psi.entry_violations(1) == []


def test_characteristic_coefficients_two_by_two(f11):
    zq = zq_context(f11, 3)
    A = [[PiSeries.constant(zq, 4, value) for value in row] for row in [[1, 2], [3, 4]]]
    coefficients = characteristic_coefficients(A, 2)
    assert coefficients == [
        PiSeries.one(zq, 4),
        PiSeries.constant(zq, 4, -5),
        PiSeries.constant(zq, 4, -2),
    ]


def test_characteristic_coefficients_are_truncated(f11):
    zq = zq_context(f11, 3)
    A = [
        [PiSeries.constant(zq, 4, 2 if i == j else 0) for j in range(3)]
        for i in range(3)
    ]
    coefficients = characteristic_coefficients(A, 2)
    assert len(coefficients) == 3
    assert coefficients[1] == PiSeries.constant(zq, 4, -6)
    assert coefficients[2] == PiSeries.constant(zq, 4, 12)


def test_char_series_leading_terms(quadratic):
    psi = psi_b_matrix(quadratic, 1, 4, 6, 4)
    coefficients = char_series(quadratic, 1, 4, 6, 4, limit=2)
    assert coefficients[0] == PiSeries.one(psi.trace().ctx, 6)
    assert coefficients[1] == -psi.trace()


def test_rotation_keeps_characteristic_series(f121):
    f = PolySpec.build(f121, 2, 1, {"a1": "1+t", "ad": 1})
    first = psi_b_matrix(f, 13, 4, 6, 4, rotation=0)
    second = psi_b_matrix(f, 13, 4, 6, 4, rotation=1)
    assert characteristic_coefficients(first.matrix, 2) == (
        characteristic_coefficients(second.matrix, 2)
    )


def test_initial_precision(quadratic):
    twist = TwistData.from_u(11, 1, 1)
    assert initial_precision(quadratic, twist, 2, 8) == (20, 14)


def test_c_function_respects_bound(quadratic):
    result = c_function_np(quadratic, 1, 2, K=20, adaptive=False)
    assert result.stable
    assert result.J == 20 and result.N_pi == 14
    spec = PolygonSpec(TwistData.from_u(11, 1, 1), 2, 1, 2)
    assert result.valuations[0] == Valuation.exact(0)
    assert result.polygon.extent == 2
    assert dominates(result.polygon, p_dk_u(spec), 2)
    assert result.tail_ok
    assert result.conclusive
    assert result.diagnostics()["rounds"] == 0


def test_c_function_escalation_is_bounded(quadratic):
    result = c_function_np(quadratic, 1, 1, K=10, max_rounds=1)
    assert result.rounds == 1
    assert set(result.to_json()) == {"M", "polygon", "valuations", "diagnostics"}


def test_trace_consistency(quadratic):
    assert trace_consistency(quadratic, 1, 10, 5).equal


def test_trace_consistency_trivial_character(f11):
    f = PolySpec.build(f11, 2, None, {"ad": 1})
    assert trace_consistency(f, 0, 10, 5).equal


def test_trace_consistency_detects_wrong_twist(quadratic):
    assert not trace_consistency(quadratic, 1, 10, 5, dwork_u=2).equal


def test_tail_clear_accepts_high_coefficients():
    polygon = ConvexPolygon.from_slopes([1, 5])
    valuations = [Valuation.exact(0), Valuation.exact(1), Valuation.exact(6)]
    valuations.append(Valuation.at_least(14))
    assert tail_clear(polygon, valuations, [1, 5, 11], 2)
    assert tail_clear(polygon, valuations[:3], [], 2)


def test_tail_clear_rejects_a_low_coefficient():
    polygon = ConvexPolygon.from_slopes([1, 5])
    valuations = [Valuation.exact(0), Valuation.exact(1), Valuation.exact(6)]
    valuations.append(Valuation.at_least(4))
    assert not tail_clear(polygon, valuations, [1, 1, 1], 2)
    assert tail_clear(polygon, valuations, [1, 1, 9], 2)


def test_tail_clear_edges():
    assert tail_clear(ConvexPolygon.from_slopes([]), [Valuation.exact(0)], [], 0)
    short = ConvexPolygon.from_slopes([1])
    assert not tail_clear(short, [Valuation.exact(0)] * 4, [0, 0, 0], 2)


def test_row_bounds_are_sorted(quadratic):
    psi = psi_b_matrix(quadratic, 1, 4, 8, 4)
    bounds = row_bounds(psi, 2)
    assert len(bounds) == 4
    assert bounds == sorted(bounds)
    coefficients = characteristic_coefficients(psi.matrix, 4)
    for i, c in enumerate(coefficients[1:], start=1):
        assert c.ord_pi().lower >= sum(bounds[:i]) or not c.ord_pi().is_determinate


def reduced(series, K):
    P = series.ctx.p**K
    return [tuple(x % P for x in raw) for raw in series.dense()]


def test_gamma_precision_is_monotone(f121):
    f = PolySpec.build(f121, 2, 1, {"a1": "1+t", "ad": 3})
    coarse = ef_gamma(f, 12, 5, 3)
    fine = ef_gamma(f, 12, 8, 6)
    for n in range(12):
        assert reduced(fine.gamma(n).truncate(5), 3) == reduced(coarse.gamma(n), 3)


def test_char_series_precision_is_monotone(quadratic):
    coarse = char_series(quadratic, 1, 4, 6, 3)
    fine = char_series(quadratic, 1, 4, 9, 5)
    for low, high in zip(coarse, fine):
        assert reduced(high.truncate(6), 3) == reduced(low, 3)
