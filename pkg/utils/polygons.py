"""
Exact-rational Newton/Hodge polygon constructions for Delta = [0, d]
"""

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple, Union

from models.polygon import ConvexPolygon, PolygonSpec
from models.valuation import Valuation
from utils.errors import PolygonError

logger = logging.getLogger(__name__)

Ordinate = Union[int, Fraction, Valuation, None]


def _cross(o, a, b) -> Fraction:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def np_from_points(points: Sequence[Tuple[int, Ordinate]]) -> ConvexPolygon:
    """Lower convex hull of (index, ordinate) points, starting at (0, 0)

    ``None`` marks an infinite ordinate; indeterminate valuations are left
    out of the hull as well. Both kinds are kept in ``excluded``.
    """
    supported = []
    excluded = []
    seen = set()
    for index, value in points:
        if index in seen:
            raise PolygonError(f"Duplicate index {index}")
        seen.add(index)
        if value is None:
            excluded.append((index, None))
        elif isinstance(value, Valuation):
            if value.is_determinate:
                supported.append((index, value.value))
            else:
                excluded.append((index, value))
        else:
            supported.append((index, Fraction(value)))
    origin = [v for i, v in supported if i == 0]
    if not origin:
        raise PolygonError("Point at index 0 is missing or not finite")
    if origin[0] != 0:
        raise PolygonError(f"Point at index 0 must be 0, got {origin[0]}")

    hull: List[Tuple[int, Fraction]] = []
    for point in sorted(supported):
        while len(hull) >= 2 and _cross(hull[-2], hull[-1], point) <= 0:
            hull.pop()
        hull.append(point)

    slopes = []
    for (x0, y0), (x1, y1) in zip(hull, hull[1:]):
        slope = Fraction(y1 - y0, x1 - x0)
        slopes.extend([slope] * (x1 - x0))
    return ConvexPolygon(tuple(slopes), True, tuple(sorted(excluded, key=_index)))


def _index(entry) -> int:
    return entry[0]


def is_conclusive(polygon: ConvexPolygon, extent: Optional[int] = None) -> bool:
    """True when no left-out point could lower the hull on [0, extent]"""
    extent = polygon.extent if extent is None else extent
    if polygon.extent < extent:
        return False
    values = polygon.values()
    for index, value in polygon.excluded:
        if value is None or index > extent:
            continue
        if index > polygon.extent or value.lower < values[index]:
            return False
    return True


def hodge_infinity(spec: PolygonSpec) -> ConvexPolygon:
    """Infinite u-twisted Hodge polygon of [0, d], first ``spec.extent`` slopes

    Merges the b residue classes v = p^i u mod (q-1), degree v/((q-1)d),
    and averages consecutive blocks of b sorted degrees.
    """
    twist, b, q = spec.twist, spec.b, spec.q
    count = spec.extent
    merged = sorted(
        s + t * (q - 1) for s in twist.s for t in range(count)
    )
    denominator = b * (q - 1) * spec.d
    slopes = [
        Fraction(sum(merged[b * i : b * (i + 1)]), denominator) for i in range(count)
    ]
    return ConvexPolygon.from_slopes(slopes)


def delta_in(spec: PolygonSpec, i: int, n: int) -> int:
    """1 iff p*l = n - u_{b-i} (mod d) for some 0 <= l < d{n/d}"""
    if not 1 <= i <= spec.b:
        raise PolygonError(f"Digit index {i} outside [1, {spec.b}]")
    d = spec.d
    target = (n - spec.twist.shifted(i)) % d
    for l in range(n % d):
        if (spec.p * l) % d == target:
            return 1
    return 0


def omega_delta(spec: PolygonSpec, n: int) -> Fraction:
    """Slope of p_{Delta,u} on [n, n+1]"""
    p, d, b = spec.p, spec.d, spec.b
    total = 0
    for i in range(1, b + 1):
        numerator = (p - 1) * n + spec.twist.shifted(i)
        total += -(-numerator // d) - delta_in(spec, i, n)
    return Fraction(total, b)


def p_delta_u(spec: PolygonSpec) -> ConvexPolygon:
    return ConvexPolygon.from_slopes([omega_delta(spec, n) for n in range(spec.extent)])


def _indicator_block(p: int, d: int, k: int, u: int, r: int) -> int:
    """sum_{j=0}^{r} (1[{r_{j,i}/k} > {r/k}] - 1[{r_j/k} > {r/k}])"""
    threshold = r % k
    total = 0
    for j in range(r + 1):
        r_ji = (p * j + u) % d
        r_j = j % d
        total += (r_ji % k > threshold) - (r_j % k > threshold)
    return total


def varpi(spec: PolygonSpec, a: int) -> Fraction:
    """Slope of p_{d,[0,k],u} on [a, a+1]; the a = 0 correction block is empty"""
    if spec.k is None:
        raise PolygonError("The second highest exponent k is required")
    p, d, k, b = spec.p, spec.d, spec.k, spec.b
    r_a = a % d
    total = 0
    for i in range(1, b + 1):
        u = spec.twist.shifted(i)
        r_ai = (p * a + u) % d
        total += (p * a + u) // d - a // d + r_ai // k - r_a // k
        total += _indicator_block(p, d, k, u, r_a)
        if a > 0:
            total -= _indicator_block(p, d, k, u, (a - 1) % d)
    return Fraction(total, b)


def p_dk_u(spec: PolygonSpec) -> ConvexPolygon:
    return ConvexPolygon.from_slopes([varpi(spec, a) for a in range(spec.extent)])


@dataclass(frozen=True)
class Dominance:
    """Outcome of a value-wise comparison P >= Q"""

    holds: bool
    failure: Optional[Tuple[int, Fraction, Fraction]] = None

    def __bool__(self) -> bool:
        return self.holds


def dominates(P: ConvexPolygon, Q: ConvexPolygon, extent: int) -> Dominance:
    """P(m) >= Q(m) for every integer 0 <= m <= extent"""
    if P.extent < extent or Q.extent < extent:
        raise PolygonError(
            f"Polygons of extent {P.extent} and {Q.extent} do not cover {extent}"
        )
    p_values, q_values = P.values(), Q.values()
    for m in range(extent + 1):
        if p_values[m] < q_values[m]:
            return Dominance(False, (m, p_values[m], q_values[m]))
    return Dominance(True)


def meets_key_estimate_hypothesis(spec: PolygonSpec) -> bool:
    return spec.p > spec.d * (2 * spec.d + 1)


def key_estimate_term(n: int, d: int, k: int) -> Optional[int]:
    """[n/d] + ceil(d{n/d}/k), or None (infinite) for negative n"""
    if n < 0:
        return None
    return n // d + -(-(n % d) // k)


def key_estimate_check(
    spec: PolygonSpec,
    m: int,
    R: Sequence[Sequence[Tuple[int, int]]],
    tau: Sequence[Sequence[Tuple[int, int]]],
) -> bool:
    """Combinatorial estimate against b^2 p_{d,[0,k],u}(m)

    ``R[i-1]`` lists the pairs (l, w) of R_i and ``tau[i-1]`` their images
    under the permutation, in the same order. A negative gamma index makes
    the left side infinite.
    """
    if spec.k is None:
        raise PolygonError("The second highest exponent k is required")
    b = spec.b
    if len(R) != b or len(tau) != b:
        raise PolygonError(f"Expected {b} subsets and {b} permutations")
    if not meets_key_estimate_hypothesis(spec):
        logger.warning(
            f"Key estimate evaluated outside p > d(2d+1): p={spec.p}, d={spec.d}"
        )
    left = 0
    for i in range(1, b + 1):
        subset, images = R[i - 1], tau[i - 1]
        if len(subset) != b * m:
            raise PolygonError(f"R_{i} has {len(subset)} elements, expected {b * m}")
        if sorted(subset) != sorted(images) or len(set(subset)) != len(subset):
            raise PolygonError(f"tau_{i} is not a permutation of R_{i}")
        u = spec.twist.shifted(i)
        for (l, _), (tau_l, _) in zip(subset, images):
            term = key_estimate_term(spec.p * l + u - tau_l, spec.d, spec.k)
            if term is None:
                return True
            left += term
    right = b * b * p_dk_u(spec.with_extent(m)).value(m)
    return left >= right
