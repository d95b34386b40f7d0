import random
from fractions import Fraction

import pytest

from models.valuation import Valuation
from utils.dwork import artin_hasse_series
from utils.errors import PrecisionError
from utils.ffield import build_field
from utils.padic import (
    PiSeries,
    binom_series,
    pim_context,
    subst_T,
    teichmuller_lift,
    vp_factorial,
    zq_context,
)


def test_teichmuller_example():
    lift = teichmuller_lift(build_field(5, 1).from_int(2), 2)
    assert lift.coeffs == (7,)


def test_teichmuller_is_a_root_of_unity():
    field = build_field(7, 2)
    zq = zq_context(field, 6)
    for x in field.units():
        w = zq.teichmuller(x)
        assert w ** (field.order - 1) == zq.from_int(1)
        assert w.residue() == x


def test_frobenius_matches_pth_power():
    field = build_field(7, 2)
    zq = zq_context(field, 6)
    for code in range(0, field.order, 5):
        x = field.from_int(code)
        assert zq.teichmuller(x).frobenius() == zq.teichmuller(x**7)


def test_frobenius_has_order_b(f121):
    zq = zq_context(f121, 8)
    z = zq.element([3, 1000])
    assert z.frobenius(2) == z
    assert z.frobenius(-1) == z.frobenius(1)


def test_teichmuller_precision_is_compatible():
    field = build_field(5, 2)
    low, high = zq_context(field, 3), zq_context(field, 6)
    for x in field.units():
        coarse = low.teichmuller(x).coeffs
        fine = high.teichmuller(x).coeffs
        assert coarse == tuple(c % 5**3 for c in fine)


def test_ord_pi(f11):
    zq = zq_context(f11, 2)
    assert PiSeries.monomial(zq, 5, 3, 2).ord_pi() == Valuation.exact(3)
    assert PiSeries.zero(zq, 5).ord_pi() == Valuation.at_least(5)


def test_ord_pi_flags_lost_precision(f11):
    low = zq_context(f11, 1)
    assert PiSeries.monomial(low, 5, 2, 11).ord_pi() == Valuation.at_least(5)
    high = zq_context(f11, 2)
    assert PiSeries.monomial(high, 5, 2, 11).ord_pi() == Valuation.exact(2)


def test_ord_pim():
    ring = pim_context(zq_context(build_field(3, 1), 4), 1)
    assert ring.from_int(3).ord() == Valuation.exact(2)
    assert ring.uniformizer().ord() == Valuation.exact(1)
    deeper = pim_context(zq_context(build_field(3, 1), 4), 2)
    assert deeper.from_int(3).ord() == Valuation.exact(6)


def test_ord_pim_of_zeta_minus_one(f11):
    ring = pim_context(zq_context(f11, 3), 1)
    assert (ring.zeta_power(1) - 1 + 11).ord() == Valuation.exact(1)
    assert ring.from_int(11).ord() == Valuation.exact(10)


def test_binom_series_small_exponents():
    assert binom_series(0, 4, 3, 4).coeffs == (1, 0, 0, 0)
    assert binom_series(1, 4, 3, 4).coeffs == (1, 1, 0, 0)


def test_binom_series_minus_one():
    series = binom_series(-1, 6, 3, 4)
    for k, (c, prec) in enumerate(zip(series.coeffs, series.precisions)):
        assert prec == 4 - vp_factorial(k, 3)
        assert c == (-1) ** k % 3**prec


def test_binom_series_runs_out_of_precision():
    with pytest.raises(PrecisionError):
        binom_series(5, 10, 3, 2)


def test_subst_identity(f11):
    zq = zq_context(f11, 4)
    T = PiSeries.monomial(zq, 6, 1)
    value = PiSeries.make(zq, 6, [zq.zero_raw(), zq.int_raw(1), zq.int_raw(5)])
    assert subst_T(T, value) == value


def test_subst_binomial_at_artin_hasse(f11):
    zq = zq_context(f11, 5)
    E = artin_hasse_series(zq, 8)
    result = subst_T(binom_series(1, 8, 11, 5), E - PiSeries.one(zq, 8))
    assert result == E


def test_subst_rejects_units(f11):
    zq = zq_context(f11, 4)
    with pytest.raises(PrecisionError):
        subst_T(PiSeries.one(zq, 4), PiSeries.one(zq, 4))


def test_series_arithmetic(f11):
    zq = zq_context(f11, 3)
    a = PiSeries.make(zq, 4, [zq.int_raw(1), zq.int_raw(2)])
    b = PiSeries.make(zq, 4, [zq.int_raw(3), zq.int_raw(0), zq.int_raw(1)])
    product = a * b
    assert [product.coefficient(i).coeffs[0] for i in range(4)] == [3, 6, 1, 2]
    assert (a - a).is_zero()
    assert (a + b) - b == a


def test_series_truncation_mismatch(f11):
    zq = zq_context(f11, 3)
    with pytest.raises(PrecisionError):
        PiSeries.one(zq, 4) + PiSeries.one(zq, 5)


def random_zq(rng, zq):
    return zq.element([rng.randrange(zq.P) for _ in range(zq.b)])


def random_series(rng, zq, N, start=0):
    coeffs = [random_zq(rng, zq).coeffs for _ in range(N - start)]
    return PiSeries.make(zq, N, coeffs, start)


def random_pim(rng, ring):
    return ring.element([random_zq(rng, ring.zq).coeffs for _ in range(ring.e)])


def test_zq_ring_laws(f121):
    rng = random.Random(7)
    zq = zq_context(f121, 5)
    for _ in range(40):
        a, b, c = (random_zq(rng, zq) for _ in range(3))
        assert (a * b) * c == a * (b * c)
        assert a * (b + c) == a * b + a * c
        assert a * b == b * a
        assert (a + b) - b == a


def test_series_ring_laws(f121):
    rng = random.Random(11)
    zq = zq_context(f121, 4)
    for _ in range(15):
        a, b, c = (random_series(rng, zq, 6) for _ in range(3))
        assert (a * b) * c == a * (b * c)
        assert a * (b + c) == a * b + a * c
        assert a * b == b * a


def test_pim_ring_laws(f11):
    rng = random.Random(13)
    ring = pim_context(zq_context(f11, 4), 1)
    for _ in range(15):
        a, b, c = (random_pim(rng, ring) for _ in range(3))
        assert (a * b) * c == a * (b * c)
        assert a * (b + c) == a * b + a * c
        assert a * b == b * a


def test_series_valuation_laws(f121):
    rng = random.Random(17)
    zq = zq_context(f121, 4)
    unit = zq.teichmuller(f121.generator)
    for _ in range(30):
        x = PiSeries.monomial(zq, 12, rng.randrange(5), unit.coeffs)
        y = PiSeries.monomial(zq, 12, rng.randrange(5), (unit + 11).coeffs)
        x = x + random_series(rng, zq, 12, x.start + 1)
        y = y + random_series(rng, zq, 12, y.start + 1)
        assert (x * y).ord_pi() == x.ord_pi() + y.ord_pi()
        lowest = min(x.ord_pi().lower, y.ord_pi().lower)
        assert (x + y).ord_pi().lower >= lowest


def test_pim_valuation_laws(f11):
    rng = random.Random(19)
    ring = pim_context(zq_context(f11, 4), 1)
    pi = ring.uniformizer()
    for _ in range(30):
        x = ring.from_int(rng.randrange(1, 11)) * pi ** rng.randrange(10)
        y = ring.from_int(rng.randrange(1, 11)) * pi ** rng.randrange(10)
        assert (x * y).ord() == x.ord() + y.ord()
        lowest = min(x.ord().lower, y.ord().lower)
        assert (x + y).ord().lower >= lowest


def test_indeterminate_orders_add_as_bounds():
    total = Valuation.exact(2) + Valuation.at_least(5)
    assert total == Valuation.at_least(7)
    assert not total.is_determinate
    assert Valuation.exact(1) + Valuation.exact(Fraction(1, 2)) == Valuation.exact(
        Fraction(3, 2)
    )
