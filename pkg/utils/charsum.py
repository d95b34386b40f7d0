"""
Brute-force character sums S_{f,chi}(l, .) and the L-polynomial at T = pi_m
"""

import logging
from collections import defaultdict
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Dict, List, Optional, Tuple

from constants import ENUMERATION_GUARD
from models.l_function_data import LFunctionData
from models.poly_spec import PolySpec
from models.polygon import ConvexPolygon
from utils.errors import (
    ConfigError,
    EnumerationGuardError,
    PolygonError,
    PrecisionError,
)
from utils.ffield import FieldElem, FieldTower, build_tower, dlog
from utils.padic import (
    PiSeries,
    PimElem,
    ZqCtx,
    binom_series,
    pim_context,
    vp_factorial,
    zq_context,
)
from utils.polygons import is_conclusive, np_from_points

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SumContext:
    """Everything needed to enumerate x in F_{q^l}^x for one polynomial

    ``K`` is the Witt length of the trace exponents. Units are enumerated as
    x = G^e; the exponent of x is sum_i Tr(W^{alpha_i + i e}) with
    W^{alpha_i} the Teichmuller lift of the embedded coefficient a_i.
    """

    poly: PolySpec
    l: int
    K: int

    @cached_property
    def tower(self) -> FieldTower:
        return build_tower(self.poly.field, self.l)

    @cached_property
    def ext_zq(self) -> ZqCtx:
        return zq_context(self.tower.ext, self.K)

    @cached_property
    def alphas(self) -> List[Tuple[int, int]]:
        return [(i, dlog(self.tower.embed(a))) for i, a in self.poly.terms()]

    @property
    def unit_count(self) -> int:
        return self.tower.ext.order - 1

    def exponent(self, e: int) -> int:
        sums = self.ext_zq.power_sums
        order = self.unit_count
        total = sum(sums[(alpha + i * e) % order] for i, alpha in self.alphas)
        return total % self.ext_zq.P

    def character_index(self, e: int, u: int) -> int:
        """Index c with chi(Norm G^e) = w^c, for chi = omega^{-u}"""
        return (-u * self.tower.norm_index(e)) % (self.tower.base.order - 1)

    def counts(self, u: int, modulus: int) -> Dict[int, Dict[int, int]]:
        """Number of units per (exponent mod ``modulus``, character index)"""
        table: Dict[int, Dict[int, int]] = defaultdict(lambda: defaultdict(int))
        for e in range(self.unit_count):
            t = self.exponent(e) % modulus
            table[t][self.character_index(e, u)] += 1
        return table


@lru_cache(maxsize=64)
def sum_context(poly: PolySpec, l: int, K: int) -> SumContext:
    return SumContext(poly, l, K)


def _check_guard(poly: PolySpec, l: int, guard: Optional[int]):
    guard = ENUMERATION_GUARD if guard is None else guard
    size = poly.field.order**l
    if size > guard:
        raise EnumerationGuardError(
            f"Enumerating F_{size} exceeds the guard of {guard} elements"
        )


def witt_trace_exponent(x: FieldElem, f: PolySpec, m: int) -> int:
    """Tr(f^(x^)) in Z/p^m, with Teichmuller-lifted x and coefficients

    The trace is that of multiplication by f^(x^) on the power basis of
    Z_{q^l} / p^m.
    """
    if x.is_zero():
        raise PolygonError("The exponent is only defined on units")
    degree, rest = divmod(x.ctx.n, f.field.n)
    if rest or x.ctx.p != f.field.p:
        raise ConfigError(f"{x.ctx} does not extend the coefficient field")
    tower = build_tower(f.field, degree)
    if x.ctx != tower.ext:
        raise ConfigError(f"{x.ctx} is not the declared extension {tower.ext}")
    zq = zq_context(tower.ext, m)
    x_hat = zq.teichmuller(x)
    value = zq.from_int(0)
    for i, a in f.terms():
        value = value + zq.teichmuller(tower.embed(a)) * x_hat**i
    return value.trace()


def _character_values(zq: ZqCtx, table: Dict[int, int]):
    """sum_c count_c w^c as a raw Z_q coefficient tuple"""
    acc = [0] * zq.b
    for index, count in table.items():
        for j, x in enumerate(zq.w_power(index)):
            acc[j] += count * x
    return zq.reduce(acc)


def s_sum(
    f: PolySpec,
    u: int,
    l: int,
    m: int,
    K: int = 20,
    guard: Optional[int] = None,
) -> PimElem:
    """S_{f,chi}(l, pi_m) with chi = omega^{-u}, as an element of Z_q[pi_m]"""
    _check_guard(f, l, guard)
    p = f.field.p
    base_zq = zq_context(f.field, K)
    ring = pim_context(base_zq, m)
    context = sum_context(f, l, m)
    table = context.counts(u, p**m)

    acc = [[0] * base_zq.b for _ in range(ring.e)]
    for t in sorted(table):
        z = _character_values(base_zq, table[t])
        if not any(z):
            continue
        for j, coeff in enumerate(ring.zeta_powers[t]):
            for s, x in enumerate(base_zq.mul_raw(z, coeff)):
                acc[j][s] += x
    return ring.element([tuple(row) for row in acc])


def s_series(
    f: PolySpec,
    u: int,
    l: int,
    N: int,
    K: int = 20,
    guard: Optional[int] = None,
) -> PiSeries:
    """S_{f,chi}(l, T) mod (T^N, p^K)

    Exponents are computed at Witt length K + ord_p((N-1)!) so that every
    binomial coefficient keeps K digits.
    """
    _check_guard(f, l, guard)
    p = f.field.p
    K_work = K + vp_factorial(max(N - 1, 0), p)
    base_zq = zq_context(f.field, K)
    context = sum_context(f, l, K_work)
    table = context.counts(u, p**K_work)

    coeffs = [[0] * base_zq.b for _ in range(N)]
    for t in sorted(table):
        z = _character_values(base_zq, table[t])
        if not any(z):
            continue
        binomials = binom_series(t, N, p, K_work)
        for k, c in enumerate(binomials.coeffs):
            if c:
                for s, x in enumerate(z):
                    coeffs[k][s] += c * x
    return PiSeries.make(base_zq, N, [base_zq.reduce(row) for row in coeffs])


def _power_sum_recursion(sums: List[PimElem], count: int) -> List[PimElem]:
    """c_0..c_{count-1} of exp(sum_l S_l s^l / l) via k c_k = sum S_j c_{k-j}"""
    ring = sums[0].ctx
    coefficients = [ring.from_int(1)]
    for k in range(1, count):
        total = ring.from_int(0)
        for j in range(1, k + 1):
            total = total + sums[j - 1] * coefficients[k - j]
        coefficients.append(total.div_int(k))
    return coefficients


def l_poly(
    f: PolySpec,
    u: int,
    m: int,
    L_terms: Optional[int] = None,
    K: int = 20,
    guard: Optional[int] = None,
) -> LFunctionData:
    """L_{f,chi}(s, pi_m) of degree D = p^{m-1} d from the sums S_1..S_D

    With ``L_terms`` > D + 1 the extra coefficients are computed as well
    and reported for the degree check.
    """
    p = f.field.p
    if f.d % p == 0:
        raise ConfigError(f"p={p} divides d={f.d}; the degree is not p^(m-1)d")
    degree = p ** (m - 1) * f.d
    count = max(degree + 1, L_terms or 0)
    _check_guard(f, count - 1, guard)

    K_work = K + vp_factorial(count - 1, p)
    coefficients = None
    for attempt in range(2):
        sums = [s_sum(f, u, l, m, K_work, guard) for l in range(1, count)]
        try:
            coefficients = _power_sum_recursion(sums, count)
            break
        except PrecisionError as e:
            if attempt:
                raise
            logger.warning(f"{e}; retrying L-polynomial at K={2 * K_work}")
            K_work *= 2

    valuations = tuple(c.ord() for c in coefficients)
    newton = np_from_points(list(enumerate(valuations[: degree + 1])))
    logger.debug(f"L-polynomial valuations: {[str(v) for v in valuations]}")
    return LFunctionData(
        m=m,
        degree=degree,
        coefficients=tuple(coefficients[: degree + 1]),
        valuations=valuations[: degree + 1],
        newton=newton,
        extra=tuple(coefficients[degree + 1 :]),
        extra_valuations=valuations[degree + 1 :],
    )


def l_to_c_np(data: LFunctionData, extent: int) -> ConvexPolygon:
    """Newton polygon of L on [0, extent], which equals that of C there

    Raises PolygonError when an indeterminate coefficient leaves the hull
    undetermined on part of [0, extent].
    """
    if extent > data.degree:
        raise PolygonError(
            f"Extent {extent} exceeds the L-polynomial degree {data.degree}"
        )
    if not is_conclusive(data.newton, extent):
        raise PolygonError(
            f"Newton polygon of L is undetermined on [0, {extent}]: "
            f"known only on [0, {data.newton.extent}]"
        )
    return data.newton.restricted(extent)
