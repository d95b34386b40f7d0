"""
T-adic Dwork operator on B_u: Artin-Hasse coefficients, the expansion of
E_f, the truncated matrix of Psi^b and its characteristic series
"""

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import ceil
from typing import Dict, List, Optional, Sequence, Tuple, Union

import psutil

from constants import DEFAULT_ESCALATION_ROUNDS, DEFAULT_GUARD_TERMS, DEFAULT_K
from models.poly_spec import PolySpec
from models.polygon import ConvexPolygon, PolygonSpec
from models.twist_data import TwistData
from models.valuation import Valuation
from utils.charsum import s_series
from utils.errors import ConvergenceError, PrecisionError
from utils.padic import PiSeries, Raw, ZqCtx, subst_T, zq_context
from utils.polygons import (
    is_conclusive,
    key_estimate_term,
    np_from_points,
    p_delta_u,
    p_dk_u,
)

logger = logging.getLogger(__name__)

Matrix = List[List[PiSeries]]


@lru_cache(maxsize=16)
def _artin_hasse_exact(p: int, count: int) -> Tuple[Fraction, ...]:
    # n lambda_n = sum_{p^j <= n} lambda_{n - p^j}
    lam = [Fraction(1)]
    for n in range(1, count):
        total = Fraction(0)
        power = 1
        while power <= n:
            total += lam[n - power]
            power *= p
        lam.append(total / n)
    return tuple(lam)


def artin_hasse(p: int, N_t: int, K: int) -> List[int]:
    """lambda_0..lambda_{N_t-1} of E(t) = exp(sum_j t^{p^j}/p^j) mod p^K"""
    P = p**K
    coefficients = []
    for n, lam in enumerate(_artin_hasse_exact(p, N_t)):
        if lam.denominator % p == 0:
            raise PrecisionError(f"Artin-Hasse coefficient {n} is not p-integral")
        coefficients.append(lam.numerator * pow(lam.denominator, -1, P) % P)
    return coefficients


def artin_hasse_series(zq: ZqCtx, N: int) -> PiSeries:
    """E(pi) mod (pi^N, p^K)"""
    return PiSeries.make(zq, N, [zq.int_raw(c) for c in artin_hasse(zq.p, N, zq.K)])


def gamma_order_bound(n: int, d: int, k: Optional[int]) -> Optional[int]:
    """Lower bound on ord_pi gamma_n; None when gamma_n must vanish (monomial f)"""
    if k is None:
        return None if n % d else n // d
    return key_estimate_term(n, d, k)


@dataclass(frozen=True)
class GammaTable:
    """gamma_0..gamma_{N_n-1} with E_f(x) = sum gamma_n x^n"""

    gammas: Tuple[PiSeries, ...]
    d: int
    k: Optional[int]
    N_pi: int

    def gamma(self, n: int) -> PiSeries:
        if n < len(self.gammas):
            return self.gammas[n]
        zq = self.gammas[0].ctx
        if n >= self.d * self.N_pi:
            return PiSeries.zero(zq, self.N_pi)
        raise PrecisionError(f"gamma_{n} is beyond the computed table")

    def order_violations(self) -> List[Tuple[int, Valuation, Optional[int]]]:
        """Determinate gamma_n whose order is below the lemma bound"""
        violations = []
        for n, g in enumerate(self.gammas):
            order = g.ord_pi()
            if not order.is_determinate:
                continue
            bound = gamma_order_bound(n, self.d, self.k)
            if bound is None or order.value < bound:
                violations.append((n, order, bound))
        return violations


def ef_gamma(f: PolySpec, N_n: int, N_pi: int, K: int) -> GammaTable:
    """Coefficients of E_f(x) = E(pi a_d x^d) prod_{i<=k} E(pi a_i x^i)

    Each factor contributes lambda_n a^n pi^n x^{in}; the product is
    convolved in x up to degree N_n and in pi up to N_pi.
    """
    zq = zq_context(f.field, K)
    lam = artin_hasse(zq.p, N_pi, K)
    grid: Dict[int, List[Raw]] = {0: [zq.int_raw(1)] + [zq.zero_raw()] * (N_pi - 1)}
    for i, a in sorted(f.terms(), key=lambda item: -item[0]):
        a_hat = zq.teichmuller(a).coeffs
        factor = []
        power = zq.int_raw(1)
        for n in range(min(N_pi, (N_n - 1) // i + 1)):
            factor.append((n, zq.scale_raw(power, lam[n])))
            power = zq.mul_raw(power, a_hat)
        updated: Dict[int, List[Raw]] = {}
        for xdeg, series in grid.items():
            for n, coeff in factor:
                target = xdeg + i * n
                if target >= N_n:
                    break
                if not any(coeff):
                    continue
                row = updated.setdefault(target, [zq.zero_raw()] * N_pi)
                for pdeg, value in enumerate(series[: N_pi - n]):
                    if any(value):
                        row[pdeg + n] = zq.add_raw(
                            row[pdeg + n], zq.mul_raw(value, coeff)
                        )
        grid = updated
    gammas = tuple(
        PiSeries.make(zq, N_pi, grid[n]) if n in grid else PiSeries.zero(zq, N_pi)
        for n in range(N_n)
    )
    return GammaTable(gammas, f.d, f.k, N_pi)


def _resolve_twist(f: PolySpec, u: Union[int, TwistData]) -> TwistData:
    if isinstance(u, TwistData):
        return u
    return TwistData.from_u(f.field.p, f.field.n, u)


def _matmul(A: Matrix, B: Matrix) -> Matrix:
    size = len(A)
    zq, N = A[0][0].ctx, A[0][0].N
    result = []
    for i in range(size):
        row = [PiSeries.zero(zq, N) for _ in range(size)]
        for k_, a in enumerate(A[i]):
            if a.is_zero():
                continue
            for j, b in enumerate(B[k_]):
                if not b.is_zero():
                    row[j] = row[j] + a * b
        result.append(row)
    return result


@dataclass(frozen=True)
class PsiMatrix:
    """Blocks A^(i) (i = 1..b) and the J x J matrix of Psi^b on B_u

    (A^(i))_{l,j} = gamma_{p l + u_{b-i} - j}, using the digits of the
    residue of u in [0, q-2]. The composed matrix is
    sigma^{-1}(A^(1)) sigma^{-2}(A^(2)) ... sigma^{-b}(A^(b)), taken from the
    block ``rotation`` onwards in cyclic order.
    """

    twist: TwistData
    J: int
    blocks: Tuple[Matrix, ...]
    matrix: Matrix
    table: GammaTable = field(repr=False)

    def trace(self) -> PiSeries:
        total = PiSeries.zero(self.matrix[0][0].ctx, self.matrix[0][0].N)
        for i in range(self.J):
            total = total + self.matrix[i][i]
        return total

    def entry_violations(self, k: Optional[int]) -> List[Tuple[int, int, int]]:
        """(block, l, j) entries whose determinate order breaks the bound"""
        violations = []
        p, d = self.twist.p, self.table.d
        digits = self.twist.residue_digits
        for i, block in enumerate(self.blocks, start=1):
            shift = digits[(self.twist.b - i) % self.twist.b]
            for l, row in enumerate(block):
                for j, entry in enumerate(row):
                    n = p * l + shift - j
                    order = entry.ord_pi()
                    if n < 0 or not order.is_determinate:
                        continue
                    bound = gamma_order_bound(n, d, k)
                    if bound is None or order.value < bound:
                        violations.append((i, l, j))
        return violations


def psi_b_matrix(
    f: PolySpec,
    u: Union[int, TwistData],
    J: int,
    N_pi: int,
    K: int,
    rotation: int = 0,
) -> PsiMatrix:
    twist = _resolve_twist(f, u)
    p, b = twist.p, twist.b
    N_n = min(p * J, f.d * N_pi)
    table = ef_gamma(f, N_n, N_pi, K)
    zq = table.gammas[0].ctx
    digits = twist.residue_digits

    blocks = []
    for i in range(1, b + 1):
        shift = digits[(b - i) % b]
        block = []
        for l in range(J):
            row = []
            for j in range(J):
                n = p * l + shift - j
                row.append(table.gamma(n) if n >= 0 else PiSeries.zero(zq, N_pi))
            block.append(row)
        blocks.append(block)

    twisted = [
        [[entry.frobenius(-i) for entry in row] for row in blocks[i - 1]]
        for i in range(1, b + 1)
    ]
    order = [(rotation + s) % b for s in range(b)]
    matrix = twisted[order[0]]
    for index in order[1:]:
        matrix = _matmul(matrix, twisted[index])
    logger.debug(f"Built Psi^{b} matrix J={J}, N_pi={N_pi}, K={K}, u={twist.residue}")
    return PsiMatrix(twist, J, tuple(blocks), matrix, table)


def _dot(row: Sequence[PiSeries], column: Sequence[PiSeries], zero: PiSeries):
    total = zero
    for a, b in zip(row, column):
        if not a.is_zero() and not b.is_zero():
            total = total + a * b
    return total


def characteristic_coefficients(matrix: Matrix, limit: int) -> List[PiSeries]:
    """c_0..c_limit of det(1 - s A) by the division-free Berkowitz recursion

    Working from the bottom-right corner, each step multiplies the current
    coefficient vector by the Toeplitz matrix with first column
    (1, -a, -R C, -R A' C, ...), truncated to ``limit`` + 1 entries.
    """
    n = len(matrix)
    zq, N = matrix[0][0].ctx, matrix[0][0].N
    one, zero = PiSeries.one(zq, N), PiSeries.zero(zq, N)
    vec = [one]
    for r in range(n - 1, -1, -1):
        size = n - r
        top = min(limit, size)
        sub = [row[r + 1 :] for row in matrix[r + 1 :]]
        column = [matrix[i][r] for i in range(r + 1, n)]
        row = matrix[r][r + 1 :]
        toeplitz = [one, -matrix[r][r]]
        v = column
        for step in range(top - 1):
            if all(x.is_zero() for x in v):
                break
            toeplitz.append(-_dot(row, v, zero))
            if step < top - 2:
                v = [_dot(sub_row, v, zero) for sub_row in sub]
        updated = []
        for i in range(top + 1):
            total = zero
            for j in range(min(i, len(vec) - 1) + 1):
                if i - j < len(toeplitz):
                    a, c = toeplitz[i - j], vec[j]
                    if not a.is_zero() and not c.is_zero():
                        total = total + a * c
            updated.append(total)
        vec = updated
    return vec + [zero] * (limit + 1 - len(vec))


def char_series(
    f: PolySpec,
    u: Union[int, TwistData],
    J: int,
    N_pi: int,
    K: int,
    limit: Optional[int] = None,
) -> List[PiSeries]:
    """Coefficients of det(1 - Psi^b s | B_u), the C-function C_{f,chi}(s, T)"""
    psi = psi_b_matrix(f, u, J, N_pi, K)
    return characteristic_coefficients(psi.matrix, J if limit is None else limit)


@dataclass(frozen=True)
class CFunctionResult:
    """T-adic Newton polygon of C on [0, M] plus the precision actually used"""

    polygon: ConvexPolygon
    M: int
    J: int
    N_pi: int
    K: int
    stable: bool
    rounds: int
    valuations: Tuple[Valuation, ...]
    tail_ok: bool = True

    @property
    def conclusive(self) -> bool:
        return self.stable and self.tail_ok and is_conclusive(self.polygon, self.M)

    @property
    def indeterminate(self) -> List[int]:
        return [i for i, v in enumerate(self.valuations) if not v.is_determinate]

    def diagnostics(self) -> Dict:
        return {
            "J": self.J,
            "N_pi": self.N_pi,
            "K": self.K,
            "stable": self.stable,
            "rounds": self.rounds,
            "indeterminate": self.indeterminate,
            "tailClear": self.tail_ok,
            "conclusive": self.conclusive,
        }

    def to_json(self) -> Dict:
        return {
            "M": self.M,
            "polygon": self.polygon.to_json(),
            "valuations": [v.to_json() for v in self.valuations],
            "diagnostics": self.diagnostics(),
        }


def initial_precision(
    f: PolySpec, twist: TwistData, M: int, guard_terms: int = DEFAULT_GUARD_TERMS
) -> Tuple[int, int]:
    """Starting (J, N_pi): J = d(M + 8), N_pi = ceil(b p(M)) + guard terms

    p is p_{d,[0,k],u} when k is known and p_{Delta,u} for monomials.
    """
    spec = PolygonSpec(twist, f.d, f.k, M)
    bound = p_dk_u(spec) if f.k is not None else p_delta_u(spec)
    N_pi = ceil(twist.b * bound.value(M)) + guard_terms
    return f.d * (M + 8), max(N_pi, 1)


def row_bounds(psi: PsiMatrix, d: int) -> List[Fraction]:
    """Sorted r_l = min_j (ord A_{l,j} + (j - l)/d) over the rows of Psi^b

    A principal minor on the rows S has order at least the sum of r_l over
    S, so the i smallest bounds add up to a lower bound for ord c_i. Entries
    known only modulo pi^N_pi also satisfy ord >= (p l - j)/d, since every
    gamma_n has order at least n/d.
    """
    p = psi.twist.p
    bounds = []
    for l, row in enumerate(psi.matrix):
        best = None
        for j, entry in enumerate(row):
            order = entry.ord_pi()
            lower = order.lower
            if not order.is_determinate:
                lower = max(lower, Fraction(p * l - j, d))
            candidate = lower + Fraction(j - l, d)
            if best is None or candidate < best:
                best = candidate
        bounds.append(best)
    return sorted(bounds)


def tail_clear(
    polygon: ConvexPolygon,
    valuations: Sequence[Valuation],
    bounds: Sequence[Fraction],
    M: int,
) -> bool:
    """True when no c_i with i > M can lower the hull on [0, M]

    Each such point is bounded below by its computed order (or truncation
    bound) and by the sum of the i smallest row bounds; the larger of the
    two has to lie on or above the last hull segment extended past M.
    """
    if M == 0 or polygon.extent < M:
        return polygon.extent >= M
    slope, base = polygon.slopes[M - 1], polygon.value(M)
    total = Fraction(0)
    for i in range(1, len(valuations)):
        if i <= len(bounds):
            total += bounds[i - 1]
        if i <= M:
            continue
        if max(valuations[i].lower, total) < base + slope * (i - M):
            logger.debug(f"Coefficient {i} may lie below the hull on [0, {M}]")
            return False
    return True


def _evaluate(f, twist, M, J, N_pi, K):
    psi = psi_b_matrix(f, twist, J, N_pi, K)
    coefficients = characteristic_coefficients(psi.matrix, max(J, M))
    valuations = tuple(c.ord_pi() for c in coefficients)
    polygon = np_from_points(list(enumerate(valuations[: M + 1])))
    tail = tail_clear(polygon, valuations, row_bounds(psi, f.d), M)
    return polygon, valuations[: M + 1], tail


def _signature(polygon: ConvexPolygon, valuations: Sequence[Valuation], tail: bool):
    pending = tuple(i for i, v in enumerate(valuations) if not v.is_determinate)
    return polygon.slopes, pending, tail


def c_function_np(
    f: PolySpec,
    u: Union[int, TwistData],
    M: int,
    K: int = DEFAULT_K,
    guard_terms: int = DEFAULT_GUARD_TERMS,
    max_rounds: int = DEFAULT_ESCALATION_ROUNDS,
    J: Optional[int] = None,
    N_pi: Optional[int] = None,
    adaptive: bool = True,
    strict: bool = False,
) -> CFunctionResult:
    """T-adic Newton polygon of C_{f,chi}(s, T) on [0, M]

    Each round doubles J, N_pi and K one at a time and keeps a doubling
    when it changes the polygon, its indeterminate points or the outcome of
    ``tail_clear`` on the coefficients past M. The run
    is stable after a round without changes; hitting ``max_rounds`` leaves
    it unstable, which callers report as inconclusive, or raises
    ConvergenceError when ``strict`` is set.
    """
    twist = _resolve_twist(f, u)
    start_J, start_N = initial_precision(f, twist, M, guard_terms)
    params = {"J": J or start_J, "N_pi": N_pi or start_N, "K": K}
    polygon, valuations, tail = _evaluate(f, twist, M, **params)
    current = _signature(polygon, valuations, tail)

    stable = not adaptive
    rounds = 0
    while adaptive and rounds < max_rounds:
        rounds += 1
        changed = False
        for name in ("J", "N_pi", "K"):
            trial = dict(params, **{name: params[name] * 2})
            trial_polygon, trial_valuations, trial_tail = _evaluate(
                f, twist, M, **trial
            )
            signature = _signature(trial_polygon, trial_valuations, trial_tail)
            if signature != current:
                params, current = trial, signature
                polygon, valuations = trial_polygon, trial_valuations
                tail = trial_tail
                changed = True
        logger.info(
            f"Escalation round {rounds}: J={params['J']}, N_pi={params['N_pi']}, "
            f"K={params['K']}, changed={changed}"
        )
        logger.debug(f"RSS {psutil.Process().memory_info().rss // 1024} KiB")
        if not changed:
            stable = True
            break
    if not stable:
        message = f"C-function polygon not stable after {rounds} rounds"
        if strict:
            raise ConvergenceError(message)
        logger.warning(message)
    return CFunctionResult(
        polygon=polygon,
        M=M,
        J=params["J"],
        N_pi=params["N_pi"],
        K=params["K"],
        stable=stable,
        rounds=rounds,
        valuations=valuations,
        tail_ok=tail,
    )


@dataclass(frozen=True)
class TraceCheck:
    equal: bool
    sum_side: PiSeries
    matrix_side: PiSeries


def trace_consistency(
    f: PolySpec,
    u: Union[int, TwistData],
    N_pi: int,
    K: int,
    dwork_u: Optional[Union[int, TwistData]] = None,
) -> TraceCheck:
    """S_1(T) at T = E(pi) - 1 against (q - 1) tr(Psi^b), mod (pi^N_pi, p^K)

    ``dwork_u`` overrides the twist on the matrix side only, as a negative
    control.
    """
    twist = _resolve_twist(f, u)
    p, d = twist.p, f.d
    zq = zq_context(f.field, K)
    series = s_series(f, twist.residue, 1, N_pi, K)
    T_value = artin_hasse_series(zq, N_pi) - PiSeries.one(zq, N_pi)
    sum_side = subst_T(series, T_value)

    J = ceil(d * (N_pi + 2) / (p - 1)) + 1
    matrix_twist = twist if dwork_u is None else _resolve_twist(f, dwork_u)
    psi = psi_b_matrix(f, matrix_twist, J, N_pi, K)
    matrix_side = psi.trace() * (twist.q - 1)
    return TraceCheck(sum_side == matrix_side, sum_side, matrix_side)
