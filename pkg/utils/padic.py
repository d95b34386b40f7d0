"""
Truncated p-adic arithmetic: Z_q mod p^K on the Teichmuller power basis,
truncated series in pi (or T) over Z_q, and the ramified ring Z_q[pi_m]
"""

import logging
from dataclasses import dataclass
from functools import cached_property, lru_cache
from math import comb
from typing import List, Optional, Sequence, Tuple, Union

from models.valuation import Valuation
from utils.errors import FieldError, PrecisionError
from utils.ffield import FieldCtx, FieldElem, dlog

logger = logging.getLogger(__name__)

Raw = Tuple[int, ...]

POWER_TABLE_LIMIT = 1 << 16


def vp(n: int, p: int) -> Optional[int]:
    """p-adic valuation of an integer, None for zero"""
    if n == 0:
        return None
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def vp_factorial(n: int, p: int) -> int:
    """Legendre's formula for ord_p(n!)"""
    total = 0
    while n:
        n //= p
        total += n
    return total


def _poly_reduce(coeffs: Sequence[int], mod: Sequence[int], P: int) -> List[int]:
    """Reduce an ascending coefficient list modulo a monic polynomial and P"""
    n = len(mod) - 1
    r = list(coeffs)
    for i in range(len(r) - 1, n - 1, -1):
        c = r[i] % P
        if c:
            for j in range(n):
                r[i - n + j] -= c * mod[j]
        r[i] = 0
    r = [c % P for c in r[:n]]
    return r + [0] * (n - len(r))


def _poly_mul(a: Sequence[int], b: Sequence[int]) -> List[int]:
    prod = [0] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                prod[i + j] += ai * bj
    return prod


def _poly_pow(a: Sequence[int], e: int, mod: Sequence[int], P: int) -> List[int]:
    result = _poly_reduce([1], mod, P)
    base = list(a)
    while e:
        if e & 1:
            result = _poly_reduce(_poly_mul(result, base), mod, P)
        e >>= 1
        if e:
            base = _poly_reduce(_poly_mul(base, base), mod, P)
    return result


@dataclass(frozen=True)
class ZqCtx:
    """Z_q / p^K on the power basis of the Teichmuller lift w of the
    generator of ``field``; ``teich_poly`` is the monic minimal polynomial
    of w (ascending, coefficients mod p^K).
    """

    field: FieldCtx
    K: int
    teich_poly: Tuple[int, ...]

    @property
    def p(self) -> int:
        return self.field.p

    @property
    def b(self) -> int:
        return self.field.n

    @property
    def q(self) -> int:
        return self.field.order

    @cached_property
    def P(self) -> int:
        return self.p**self.K

    # Raw arithmetic on coefficient tuples

    def reduce(self, coeffs: Sequence[int]) -> Raw:
        if len(coeffs) <= self.b:
            P = self.P
            return tuple(c % P for c in coeffs) + (0,) * (self.b - len(coeffs))
        return tuple(_poly_reduce(coeffs, self.teich_poly, self.P))

    def zero_raw(self) -> Raw:
        return (0,) * self.b

    def int_raw(self, n: int) -> Raw:
        return (n % self.P,) + (0,) * (self.b - 1)

    def add_raw(self, a: Raw, b: Raw) -> Raw:
        P = self.P
        return tuple((x + y) % P for x, y in zip(a, b))

    def sub_raw(self, a: Raw, b: Raw) -> Raw:
        P = self.P
        return tuple((x - y) % P for x, y in zip(a, b))

    def scale_raw(self, a: Raw, n: int) -> Raw:
        P = self.P
        return tuple((x * n) % P for x in a)

    def mul_raw(self, a: Raw, b: Raw) -> Raw:
        if self.b == 1:
            return ((a[0] * b[0]) % self.P,)
        return self.reduce(_poly_mul(a, b))

    @cached_property
    def w(self) -> Raw:
        return self.reduce([0, 1])

    @cached_property
    def w_powers(self) -> List[Raw]:
        powers = []
        x = self.int_raw(1)
        for _ in range(self.q - 1):
            powers.append(x)
            x = self.mul_raw(x, self.w)
        return powers

    def w_power(self, e: int) -> Raw:
        e %= self.q - 1
        if self.q - 1 <= POWER_TABLE_LIMIT:
            return self.w_powers[e]
        return tuple(_poly_pow(self.w, e, self.teich_poly, self.P))

    def frobenius_raw(self, a: Raw, k: int = 1) -> Raw:
        """sigma^k on the power basis: w^i -> w^{i p^k}"""
        k %= self.b
        if k == 0:
            return a
        shift = pow(self.p, k, self.q - 1)
        acc = [0] * self.b
        for i, c in enumerate(a):
            if c:
                image = self.w_power(i * shift)
                for j, x in enumerate(image):
                    acc[j] += c * x
        P = self.P
        return tuple(c % P for c in acc)

    @cached_property
    def power_sums(self) -> List[int]:
        """Traces P_n = Tr(w^n) for 0 <= n < q-1, by Newton's identities"""
        b, P = self.b, self.P
        a = [self.teich_poly[b - k] for k in range(b + 1)]
        sums = [b % P]
        for n in range(1, self.q - 1):
            total = sum(a[k] * sums[n - k] for k in range(1, min(n - 1, b) + 1))
            if n <= b:
                total += n * a[n]
            sums.append((-total) % P)
        return sums

    def trace_raw(self, a: Raw) -> int:
        sums = self.power_sums
        return sum(c * sums[i] for i, c in enumerate(a)) % self.P

    def vp_raw(self, a: Raw) -> Optional[int]:
        values = [vp(c, self.p) for c in a if c]
        return min(values) if values else None

    # Elements

    def element(self, coeffs: Sequence[int]) -> "ZqElem":
        return ZqElem(self, self.reduce(coeffs))

    def from_int(self, n: int) -> "ZqElem":
        return ZqElem(self, self.int_raw(n))

    def teichmuller(self, x: FieldElem) -> "ZqElem":
        if x.ctx != self.field:
            raise FieldError("Element does not belong to this Z_q residue field")
        if x.is_zero():
            return ZqElem(self, self.zero_raw())
        return ZqElem(self, self.w_power(dlog(x)))

    def residue(self, a: Raw) -> FieldElem:
        """Reduction mod p as an element of the residue field"""
        field = self.field
        value = field.zero()
        g = field.generator
        for c in reversed(a):
            value = value * g + (c % self.p)
        return value

    def __repr__(self) -> str:
        return f"ZqCtx(p={self.p}, b={self.b}, K={self.K})"


def _teichmuller_polynomial(field: FieldCtx, K: int) -> Tuple[int, ...]:
    p, b, q = field.p, field.n, field.order
    P = p**K

    # Minimal polynomial of the generator over F_p
    g = field.generator
    h = [field.one()]
    conj = g
    for _ in range(b):
        shifted = [field.zero()] + h
        for i, c in enumerate(h):
            shifted[i] = shifted[i] - c * conj
        h = shifted
        conj = conj**p
    if any(any(c.coeffs[1:]) for c in h):
        raise FieldError("Minimal polynomial of the generator is not over F_p")
    h_int = [c.coeffs[0] for c in h]

    # Teichmuller lift of t in (Z/p^K)[t]/(h)
    w = _poly_reduce([0, 1], h_int, P)
    for _ in range(K):
        w = _poly_pow(w, q, h_int, P)

    # prod_{j<b} (X - w^{p^j}) has constant coefficients in that ring
    poly = [_poly_reduce([1], h_int, P)]
    conj = w
    for _ in range(b):
        shifted = [[0] * b] + poly
        for i, c in enumerate(poly):
            prod = _poly_reduce(_poly_mul(c, conj), h_int, P)
            shifted[i] = [(x - y) % P for x, y in zip(shifted[i], prod)]
        poly = shifted
        conj = _poly_pow(conj, p, h_int, P)
    if any(any(c[1:]) for c in poly):
        raise FieldError("Teichmuller minimal polynomial is not defined over Z_p")
    return tuple(c[0] for c in poly)


@lru_cache(maxsize=None)
def zq_context(field: FieldCtx, K: int) -> ZqCtx:
    if K < 1:
        raise PrecisionError(f"p-adic precision must be positive, got {K}")
    ctx = ZqCtx(field, K, _teichmuller_polynomial(field, K))
    logger.debug(f"Built {ctx} with minimal polynomial {list(ctx.teich_poly)}")
    return ctx


@dataclass(frozen=True)
class ZqElem:
    ctx: ZqCtx
    coeffs: Raw

    def _raw(self, other) -> Raw:
        if isinstance(other, ZqElem):
            if other.ctx != self.ctx:
                raise FieldError("Arithmetic between different Z_q contexts")
            return other.coeffs
        if isinstance(other, int):
            return self.ctx.int_raw(other)
        raise FieldError(f"Cannot combine a Z_q element with {other!r}")

    def __add__(self, other):
        return ZqElem(self.ctx, self.ctx.add_raw(self.coeffs, self._raw(other)))

    __radd__ = __add__

    def __sub__(self, other):
        return ZqElem(self.ctx, self.ctx.sub_raw(self.coeffs, self._raw(other)))

    def __rsub__(self, other):
        return ZqElem(self.ctx, self.ctx.sub_raw(self._raw(other), self.coeffs))

    def __neg__(self):
        return ZqElem(self.ctx, self.ctx.scale_raw(self.coeffs, -1))

    def __mul__(self, other):
        return ZqElem(self.ctx, self.ctx.mul_raw(self.coeffs, self._raw(other)))

    __rmul__ = __mul__

    def __pow__(self, e: int):
        if e < 0:
            raise PrecisionError("Negative powers are not supported in Z_q / p^K")
        result = self.ctx.int_raw(1)
        base = self.coeffs
        while e:
            if e & 1:
                result = self.ctx.mul_raw(result, base)
            e >>= 1
            if e:
                base = self.ctx.mul_raw(base, base)
        return ZqElem(self.ctx, result)

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def frobenius(self, k: int = 1) -> "ZqElem":
        return ZqElem(self.ctx, self.ctx.frobenius_raw(self.coeffs, k))

    def trace(self) -> int:
        """Trace to Z_p / p^K"""
        return self.ctx.trace_raw(self.coeffs)

    def valuation(self) -> Valuation:
        v = self.ctx.vp_raw(self.coeffs)
        return Valuation.at_least(self.ctx.K) if v is None else Valuation.exact(v)

    def residue(self) -> FieldElem:
        return self.ctx.residue(self.coeffs)


def teichmuller_lift(x: FieldElem, K: int) -> ZqElem:
    """omega(x): the (q-1)-th root of unity (or 0) reducing to x, mod p^K"""
    return zq_context(x.ctx, K).teichmuller(x)


def frobenius(z: ZqElem, k: int = 1) -> ZqElem:
    return z.frobenius(k)


def _convolve(ctx: ZqCtx, xs: Sequence[Raw], ys: Sequence[Raw], length: int):
    """First ``length`` coefficients of the product of two raw sequences"""
    P = ctx.P
    if ctx.b == 1:
        acc = [0] * length
        ys0 = [y[0] for y in ys[:length]]
        for i, x in enumerate(xs[:length]):
            x0 = x[0]
            if x0:
                for j in range(min(len(ys0), length - i)):
                    acc[i + j] += x0 * ys0[j]
        return [(c % P,) for c in acc]
    width = 2 * ctx.b - 1
    acc = [[0] * width for _ in range(length)]
    for i, x in enumerate(xs[:length]):
        if not any(x):
            continue
        for j in range(min(len(ys), length - i)):
            y = ys[j]
            slot = acc[i + j]
            for s, xv in enumerate(x):
                if xv:
                    for t, yv in enumerate(y):
                        slot[s + t] += xv * yv
    return [ctx.reduce(slot) for slot in acc]


@dataclass(frozen=True)
class PiSeries:
    """Truncated series sum c_i pi^i mod pi^N over Z_q / p^K

    Stored from its first nonzero coefficient: ``coeffs[0]`` is the
    coefficient of pi^start. The zero series has start N and no coeffs.
    The same type serves for series in T.
    """

    ctx: ZqCtx
    N: int
    start: int
    coeffs: Tuple[Raw, ...]

    @classmethod
    def make(cls, ctx: ZqCtx, N: int, coeffs: Sequence[Raw], start: int = 0):
        coeffs = list(coeffs[: max(N - start, 0)])
        first = next((i for i, c in enumerate(coeffs) if any(c)), None)
        if first is None:
            return cls(ctx, N, N, ())
        last = max(i for i, c in enumerate(coeffs) if any(c))
        return cls(ctx, N, start + first, tuple(coeffs[first : last + 1]))

    @classmethod
    def zero(cls, ctx: ZqCtx, N: int) -> "PiSeries":
        return cls(ctx, N, N, ())

    @classmethod
    def constant(cls, ctx: ZqCtx, N: int, value: Union[Raw, int]) -> "PiSeries":
        raw = ctx.int_raw(value) if isinstance(value, int) else value
        return cls.make(ctx, N, [raw])

    @classmethod
    def one(cls, ctx: ZqCtx, N: int) -> "PiSeries":
        return cls.constant(ctx, N, 1)

    @classmethod
    def monomial(cls, ctx: ZqCtx, N: int, exponent: int, value=1) -> "PiSeries":
        raw = ctx.int_raw(value) if isinstance(value, int) else value
        return cls.make(ctx, N, [raw], start=exponent)

    def is_zero(self) -> bool:
        return self.start >= self.N

    def dense(self) -> List[Raw]:
        zero = self.ctx.zero_raw()
        out = [zero] * self.N
        for i, c in enumerate(self.coeffs):
            out[self.start + i] = c
        return out

    def coefficient(self, i: int) -> ZqElem:
        j = i - self.start
        if 0 <= j < len(self.coeffs):
            return ZqElem(self.ctx, self.coeffs[j])
        return ZqElem(self.ctx, self.ctx.zero_raw())

    def ord_pi(self) -> Valuation:
        if self.is_zero():
            return Valuation.at_least(self.N)
        return Valuation.exact(self.start)

    def truncate(self, N: int) -> "PiSeries":
        return PiSeries.make(self.ctx, min(N, self.N), self.coeffs, self.start)

    def _check(self, other: "PiSeries"):
        if other.ctx != self.ctx or other.N != self.N:
            raise PrecisionError("Series arithmetic needs matching ring and truncation")

    def _combine(self, other: "PiSeries", sign: int) -> "PiSeries":
        self._check(other)
        if other.is_zero():
            return self
        if self.is_zero() and sign == 1:
            return other
        start = min(self.start, other.start)
        end = max(self.start + len(self.coeffs), other.start + len(other.coeffs))
        acc = [self.ctx.zero_raw()] * (end - start)
        for i, c in enumerate(self.coeffs):
            acc[self.start - start + i] = c
        op = self.ctx.add_raw if sign == 1 else self.ctx.sub_raw
        for i, c in enumerate(other.coeffs):
            k = other.start - start + i
            acc[k] = op(acc[k], c)
        return PiSeries.make(self.ctx, self.N, acc, start)

    def __add__(self, other: "PiSeries") -> "PiSeries":
        return self._combine(other, 1)

    def __sub__(self, other: "PiSeries") -> "PiSeries":
        return self._combine(other, -1)

    def __neg__(self) -> "PiSeries":
        return self.scale(-1)

    def scale(self, value: Union[ZqElem, int]) -> "PiSeries":
        if isinstance(value, int):
            coeffs = [self.ctx.scale_raw(c, value) for c in self.coeffs]
        else:
            coeffs = [self.ctx.mul_raw(c, value.coeffs) for c in self.coeffs]
        return PiSeries.make(self.ctx, self.N, coeffs, self.start)

    def __mul__(self, other) -> "PiSeries":
        if not isinstance(other, PiSeries):
            return self.scale(other)
        self._check(other)
        start = self.start + other.start
        if start >= self.N:
            return PiSeries.zero(self.ctx, self.N)
        length = self.N - start
        coeffs = _convolve(self.ctx, self.coeffs, other.coeffs, length)
        return PiSeries.make(self.ctx, self.N, coeffs, start)

    __rmul__ = __mul__

    def frobenius(self, k: int = 1) -> "PiSeries":
        if k % self.ctx.b == 0:
            return self
        coeffs = [self.ctx.frobenius_raw(c, k) for c in self.coeffs]
        return PiSeries(self.ctx, self.N, self.start, tuple(coeffs))

    def __str__(self) -> str:
        if self.is_zero():
            return f"O(pi^{self.N})"
        terms = [
            f"{list(c)}*pi^{self.start + i}"
            for i, c in enumerate(self.coeffs)
            if any(c)
        ]
        return " + ".join(terms) + f" + O(pi^{self.N})"


def ord_pi(s: PiSeries) -> Valuation:
    """pi-adic order, flagged indeterminate when every coefficient vanishes"""
    return s.ord_pi()


@dataclass(frozen=True)
class PimCtx:
    """Z_q[pi_m] with pi_m = zeta_{p^m} - 1, reduced by Phi_{p^m}(1 + X)"""

    zq: ZqCtx
    m: int

    @property
    def e(self) -> int:
        return self.zq.p ** (self.m - 1) * (self.zq.p - 1)

    @cached_property
    def eisenstein(self) -> Tuple[int, ...]:
        p, P = self.zq.p, self.zq.P
        step = p ** (self.m - 1)
        coeffs = [0] * (self.e + 1)
        for i in range(p):
            n = i * step
            for j in range(n + 1):
                coeffs[j] += comb(n, j)
        return tuple(c % P for c in coeffs)

    def reduce(self, coeffs: List[Raw]) -> Tuple[Raw, ...]:
        zq, e, phi = self.zq, self.e, self.eisenstein
        acc = [list(c) for c in coeffs]
        for i in range(len(acc) - 1, e - 1, -1):
            top = acc[i]
            if any(top):
                for j in range(e):
                    if phi[j]:
                        row = acc[i - e + j]
                        for s, x in enumerate(top):
                            row[s] -= phi[j] * x
        P = zq.P
        out = [tuple(x % P for x in row) for row in acc[:e]]
        return tuple(out + [zq.zero_raw()] * (e - len(out)))

    def mul_raw(self, a: Sequence[Raw], b: Sequence[Raw]) -> Tuple[Raw, ...]:
        zq = self.zq
        acc = [zq.zero_raw()] * (len(a) + len(b) - 1)
        for i, x in enumerate(a):
            if any(x):
                for j, y in enumerate(b):
                    if any(y):
                        acc[i + j] = zq.add_raw(acc[i + j], zq.mul_raw(x, y))
        return self.reduce(acc)

    @cached_property
    def zeta_powers(self) -> List[Tuple[Raw, ...]]:
        """zeta^t = (1 + pi_m)^t for 0 <= t < p^m"""
        zq = self.zq
        zeta = self.reduce([zq.int_raw(1), zq.int_raw(1)])
        powers = [self.reduce([zq.int_raw(1)])]
        for _ in range(zq.p**self.m - 1):
            powers.append(self.mul_raw(powers[-1], zeta))
        return powers

    def element(self, coeffs: Sequence[Raw], prec: Optional[int] = None) -> "PimElem":
        prec = self.zq.K if prec is None else prec
        return PimElem(self, _mask(self.reduce(list(coeffs)), self.zq.p, prec), prec)

    def from_int(self, n: int, prec: Optional[int] = None) -> "PimElem":
        return self.element([self.zq.int_raw(n)], prec)

    def from_zq(self, z: ZqElem) -> "PimElem":
        return self.element([z.coeffs])

    def uniformizer(self) -> "PimElem":
        return self.element([self.zq.zero_raw(), self.zq.int_raw(1)])

    def zeta_power(self, t: int) -> "PimElem":
        return PimElem(self, self.zeta_powers[t % (self.zq.p**self.m)], self.zq.K)


@lru_cache(maxsize=None)
def pim_context(zq: ZqCtx, m: int) -> PimCtx:
    if m < 1:
        raise PrecisionError(f"Root-of-unity level m must be positive, got {m}")
    return PimCtx(zq, m)


def _mask(coeffs: Sequence[Raw], p: int, prec: int) -> Tuple[Raw, ...]:
    modulus = p**prec
    return tuple(tuple(x % modulus for x in c) for c in coeffs)


@dataclass(frozen=True)
class PimElem:
    """Element sum d_j pi_m^j (j < e) with coefficients known mod p^prec"""

    ctx: PimCtx
    coeffs: Tuple[Raw, ...]
    prec: int

    def _wrap(self, coeffs, prec) -> "PimElem":
        if prec <= 0:
            raise PrecisionError("No p-adic precision left")
        return PimElem(self.ctx, _mask(coeffs, self.ctx.zq.p, prec), prec)

    def _other(self, other) -> "PimElem":
        if isinstance(other, PimElem):
            if other.ctx != self.ctx:
                raise FieldError("Arithmetic between different pi_m rings")
            return other
        if isinstance(other, int):
            return self.ctx.from_int(other, self.prec)
        if isinstance(other, ZqElem):
            return self.ctx.from_zq(other)
        raise FieldError(f"Cannot combine a pi_m element with {other!r}")

    def __add__(self, other):
        other = self._other(other)
        zq = self.ctx.zq
        coeffs = [zq.add_raw(a, b) for a, b in zip(self.coeffs, other.coeffs)]
        return self._wrap(coeffs, min(self.prec, other.prec))

    __radd__ = __add__

    def __sub__(self, other):
        other = self._other(other)
        zq = self.ctx.zq
        coeffs = [zq.sub_raw(a, b) for a, b in zip(self.coeffs, other.coeffs)]
        return self._wrap(coeffs, min(self.prec, other.prec))

    def __rsub__(self, other):
        return self._other(other) - self

    def __neg__(self):
        zq = self.ctx.zq
        return self._wrap([zq.scale_raw(c, -1) for c in self.coeffs], self.prec)

    def __mul__(self, other):
        if isinstance(other, int):
            zq = self.ctx.zq
            return self._wrap([zq.scale_raw(c, other) for c in self.coeffs], self.prec)
        other = self._other(other)
        coeffs = self.ctx.mul_raw(self.coeffs, other.coeffs)
        return self._wrap(coeffs, min(self.prec, other.prec))

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "PimElem":
        result = self.ctx.from_int(1, self.prec)
        for _ in range(n):
            result = result * self
        return result

    def is_zero(self) -> bool:
        return not any(any(c) for c in self.coeffs)

    def frobenius(self, k: int = 1) -> "PimElem":
        zq = self.ctx.zq
        return self._wrap([zq.frobenius_raw(c, k) for c in self.coeffs], self.prec)

    def div_int(self, k: int) -> "PimElem":
        """Exact division by a nonzero integer, losing ord_p(k) digits"""
        if k == 0:
            raise PrecisionError("Division by zero")
        p = self.ctx.zq.p
        v = vp(k, p)
        unit = k // p**v
        inverse = pow(unit, -1, p**self.prec)
        coeffs = [tuple(x * inverse for x in c) for c in self.coeffs]
        if v == 0:
            return self._wrap(coeffs, self.prec)
        if v >= self.prec:
            raise PrecisionError(f"Dividing by {k} exhausts precision {self.prec}")
        modulus, divisor = p**self.prec, p**v
        shifted = []
        for c in coeffs:
            row = []
            for x in c:
                x %= modulus
                if x % divisor:
                    raise PrecisionError(f"Quotient by {k} is not integral")
                row.append(x // divisor)
            shifted.append(tuple(row))
        return self._wrap(shifted, self.prec - v)

    def ord(self) -> Valuation:
        """ord_{pi_m}, normalized so that ord(pi_m) = 1"""
        e, p = self.ctx.e, self.ctx.zq.p
        found = None
        bound = None
        for j, c in enumerate(self.coeffs):
            v = self.ctx.zq.vp_raw(c)
            if v is None:
                candidate = j + e * self.prec
                bound = candidate if bound is None else min(bound, candidate)
            else:
                candidate = j + e * v
                found = candidate if found is None else min(found, candidate)
        if found is not None and (bound is None or found < bound):
            return Valuation.exact(found)
        lowest = bound if found is None else min(bound, found)
        logger.debug(f"Indeterminate pi_{self.ctx.m}-adic order (p={p}) >= {lowest}")
        return Valuation.at_least(lowest)

    def coefficient(self, j: int) -> ZqElem:
        return ZqElem(self.ctx.zq, self.coeffs[j])


def ord_pim(z: PimElem) -> Valuation:
    return z.ord()


@dataclass(frozen=True)
class IntSeries:
    """Series over Z_p with a p-adic precision per coefficient"""

    p: int
    coeffs: Tuple[int, ...]
    precisions: Tuple[int, ...]

    @property
    def N(self) -> int:
        return len(self.coeffs)

    @property
    def min_precision(self) -> int:
        return min(self.precisions) if self.precisions else 0

    def to_pi_series(self, ctx: ZqCtx) -> PiSeries:
        if self.min_precision < ctx.K:
            raise PrecisionError(
                f"Series carries {self.min_precision} digits, ring needs {ctx.K}"
            )
        return PiSeries.make(ctx, self.N, [ctx.int_raw(c) for c in self.coeffs])


def binom_series(t: int, N: int, p: int, K: int) -> IntSeries:
    """(1+T)^t mod T^N for a residue t mod p^K

    C(t, k) is known modulo p^{K - ord_p(k!)}; a coefficient with no digits
    left raises PrecisionError.
    """
    t %= p**K
    coeffs, precisions = [], []
    for k in range(N):
        prec = K - vp_factorial(k, p)
        if prec <= 0:
            raise PrecisionError(
                f"Binomial coefficient {k} has no precision left at K={K}"
            )
        coeffs.append(comb(t, k) % p**prec)
        precisions.append(prec)
    return IntSeries(p, tuple(coeffs), tuple(precisions))


def subst_T(series: Union[PiSeries, IntSeries], value: Union[PiSeries, PimElem]):
    """Evaluate a truncated T-series at a value of positive order

    The result is truncated to what both inputs determine: pi^{N_T * ord}
    against the pi-truncation of the value, or the matching p-adic precision
    in Z_q[pi_m].
    """
    if isinstance(value, PiSeries):
        return _subst_pi(series, value)
    return _subst_pim(series, value)


def _subst_pi(series, value: PiSeries) -> PiSeries:
    ctx = value.ctx
    if isinstance(series, IntSeries):
        series = series.to_pi_series(ctx)
    elif series.ctx != ctx:
        raise PrecisionError("T-series and value live over different Z_q rings")
    order = value.ord_pi()
    if order.is_determinate and order.value == 0:
        raise PrecisionError("Cannot substitute a value of order 0")
    if not order.is_determinate:
        return PiSeries.constant(ctx, value.N, series.coefficient(0).coeffs)
    N = min(value.N, series.N * int(order.value))
    v = value.truncate(N)
    top = min(series.N, (N - 1) // int(order.value) + 1)
    result = PiSeries.zero(ctx, N)
    for k in range(top - 1, -1, -1):
        result = result * v + PiSeries.constant(ctx, N, series.coefficient(k).coeffs)
    return result


def _subst_pim(series, value: PimElem) -> PimElem:
    ring = value.ctx
    order = value.ord()
    if order.is_determinate and order.value == 0:
        raise PrecisionError("Cannot substitute a value of order 0")
    if isinstance(series, IntSeries):
        consts = [
            ring.from_int(c, prec)
            for c, prec in zip(series.coeffs, series.precisions)
        ]
    else:
        consts = [ring.from_zq(series.coefficient(k)) for k in range(series.N)]
    if not order.is_determinate:
        return consts[0]
    prec = min(value.prec, (series.N * int(order.value)) // ring.e)
    result = ring.from_int(0, value.prec)
    for const in reversed(consts):
        result = result * value + const
    return result._wrap(result.coeffs, min(result.prec, prec))
