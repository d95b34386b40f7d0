"""
Finite fields F_p[t]/(h) stored as polynomial residues, plus towers F_{q^l}/F_q
"""

import logging
from dataclasses import dataclass
from functools import cached_property, lru_cache
from math import isqrt
from typing import Dict, Iterator, List, Optional, Sequence, Tuple, Union

from sympy import Poly, factorint, isprime, symbols

from constants import DLOG_TABLE_LIMIT
from utils.errors import FieldError

logger = logging.getLogger(__name__)

_T = symbols("t")


def _is_irreducible(p: int, coeffs: Sequence[int]) -> bool:
    """Irreducibility of an ascending coefficient list over GF(p)"""
    if len(coeffs) <= 2:
        return len(coeffs) == 2 and coeffs[1] % p != 0
    return Poly(list(reversed(coeffs)), _T, modulus=p).is_irreducible


def _code_to_coeffs(code: int, p: int, n: int) -> Tuple[int, ...]:
    coeffs = []
    for _ in range(n):
        code, c = divmod(code, p)
        coeffs.append(c)
    return tuple(coeffs)


def least_irreducible(p: int, n: int) -> Tuple[int, ...]:
    """Lexicographically least monic irreducible of degree n over F_p

    Candidates are ordered by the code sum(c_i p^i) of their lower
    coefficients.
    """
    for code in range(p**n):
        candidate = _code_to_coeffs(code, p, n) + (1,)
        if _is_irreducible(p, candidate):
            return candidate
    raise FieldError(f"No irreducible polynomial of degree {n} over F_{p}")


@dataclass(frozen=True)
class FieldCtx:
    """The field F_p[t]/(modulus) of order p^n with a fixed generator"""

    p: int
    n: int
    modulus: Tuple[int, ...]
    generator_code: int

    @property
    def order(self) -> int:
        return self.p**self.n

    @property
    def generator(self) -> "FieldElem":
        return self.from_int(self.generator_code)

    def elem(self, coeffs: Sequence[int]) -> "FieldElem":
        coeffs = [c % self.p for c in coeffs]
        if len(coeffs) > self.n:
            coeffs = self._reduce(coeffs)
        coeffs = coeffs + [0] * (self.n - len(coeffs))
        return FieldElem(self, tuple(coeffs))

    def from_int(self, code: int) -> "FieldElem":
        return FieldElem(self, _code_to_coeffs(code % self.order, self.p, self.n))

    def zero(self) -> "FieldElem":
        return FieldElem(self, (0,) * self.n)

    def one(self) -> "FieldElem":
        return FieldElem(self, (1,) + (0,) * (self.n - 1))

    def root(self) -> "FieldElem":
        """The class of t"""
        return self.elem([0, 1])

    def _reduce(self, coeffs: List[int]) -> List[int]:
        p, n, mod = self.p, self.n, self.modulus
        r = list(coeffs)
        for i in range(len(r) - 1, n - 1, -1):
            c = r[i] % p
            if c:
                for j in range(n):
                    r[i - n + j] -= c * mod[j]
            r[i] = 0
        return [c % p for c in r[:n]]

    def _mul(self, a: Sequence[int], b: Sequence[int]) -> Tuple[int, ...]:
        if self.n == 1:
            return ((a[0] * b[0]) % self.p,)
        prod = [0] * (2 * self.n - 1)
        for i, ai in enumerate(a):
            if ai:
                for j, bj in enumerate(b):
                    prod[i + j] += ai * bj
        return tuple(self._reduce(prod))

    def units(self) -> Iterator["FieldElem"]:
        """All units as generator powers g^0, g^1, ..., g^{q-2}"""
        x = self.one()
        g = self.generator
        for _ in range(self.order - 1):
            yield x
            x = x * g

    def parse(self, value: Union[int, str, Sequence[int]]) -> "FieldElem":
        """Parse an integer code, a coefficient list or "c0+c1*t+c2*t^2" text"""
        if isinstance(value, int):
            return self.from_int(value)
        if not isinstance(value, str):
            return self.elem(list(value))
        text = value.replace(" ", "")
        if not text:
            raise FieldError("Empty field element text")
        coeffs = [0] * self.n
        for term in text.replace("-", "+-").split("+"):
            if not term:
                continue
            if "t" not in term:
                coeffs[0] += int(term)
                continue
            head, _, power = term.partition("t")
            power = int(power[1:]) if power.startswith("^") else 1
            head = head.rstrip("*")
            factor = 1 if head in ("", "+") else -1 if head == "-" else int(head)
            if power >= self.n:
                raise FieldError(f"Term {term} exceeds field degree {self.n}")
            coeffs[power] += factor
        return self.elem(coeffs)

    @cached_property
    def dlog_table(self) -> Dict[Tuple[int, ...], int]:
        table = {}
        for e, x in enumerate(self.units()):
            table[x.coeffs] = e
        return table

    def descriptor(self) -> Dict:
        return {
            "p": self.p,
            "n": self.n,
            "modulus": list(self.modulus),
            "generator": str(self.generator),
        }

    def __repr__(self) -> str:
        return f"FieldCtx(p={self.p}, n={self.n}, modulus={list(self.modulus)})"


@dataclass(frozen=True)
class FieldElem:
    ctx: FieldCtx
    coeffs: Tuple[int, ...]

    def _coerce(self, other) -> "FieldElem":
        if isinstance(other, FieldElem):
            if other.ctx != self.ctx:
                raise FieldError("Arithmetic between different fields")
            return other
        if isinstance(other, int):
            return self.ctx.elem([other])
        raise FieldError(f"Cannot combine a field element with {other!r}")

    def __add__(self, other):
        other = self._coerce(other)
        p = self.ctx.p
        return FieldElem(
            self.ctx, tuple((a + b) % p for a, b in zip(self.coeffs, other.coeffs))
        )

    __radd__ = __add__

    def __neg__(self):
        p = self.ctx.p
        return FieldElem(self.ctx, tuple((-a) % p for a in self.coeffs))

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        other = self._coerce(other)
        return FieldElem(self.ctx, self.ctx._mul(self.coeffs, other.coeffs))

    __rmul__ = __mul__

    def __pow__(self, exponent: int):
        if exponent < 0:
            return self.inverse() ** (-exponent)
        result = self.ctx.one().coeffs
        base = self.coeffs
        while exponent:
            if exponent & 1:
                result = self.ctx._mul(result, base)
            exponent >>= 1
            if exponent:
                base = self.ctx._mul(base, base)
        return FieldElem(self.ctx, result)

    def inverse(self) -> "FieldElem":
        if self.is_zero():
            raise FieldError("Zero has no inverse")
        return self ** (self.ctx.order - 2)

    def __truediv__(self, other):
        return self * self._coerce(other).inverse()

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def is_one(self) -> bool:
        return self.coeffs == self.ctx.one().coeffs

    def to_int(self) -> int:
        code = 0
        for c in reversed(self.coeffs):
            code = code * self.ctx.p + c
        return code

    def frobenius(self, k: int = 1) -> "FieldElem":
        return self ** (self.ctx.p**k)

    def __str__(self) -> str:
        terms = [str(self.coeffs[0])]
        for i, c in enumerate(self.coeffs[1:], start=1):
            terms.append(f"{c}*t" if i == 1 else f"{c}*t^{i}")
        return "+".join(terms)


def _verify_generator(ctx: FieldCtx, g: FieldElem) -> bool:
    if g.is_zero():
        return False
    order = ctx.order - 1
    for r in factorint(order):
        if (g ** (order // r)).is_one():
            return False
    return True


@lru_cache(maxsize=None)
def _build_field(
    p: int, n: int, modulus: Optional[Tuple[int, ...]], generator: Optional[int]
) -> FieldCtx:
    if not isprime(p):
        raise FieldError(f"Characteristic {p} is not prime")
    if n < 1:
        raise FieldError(f"Extension degree must be at least 1, got {n}")
    if modulus is None:
        modulus = least_irreducible(p, n)
    else:
        modulus = tuple(c % p for c in modulus)
        if len(modulus) != n + 1 or modulus[-1] != 1:
            raise FieldError(f"Modulus {list(modulus)} is not monic of degree {n}")
        if not _is_irreducible(p, modulus):
            raise FieldError(f"Modulus {list(modulus)} is reducible over F_{p}")

    draft = FieldCtx(p, n, modulus, 1)
    if generator is not None:
        if not _verify_generator(draft, draft.from_int(generator)):
            raise FieldError(f"Element with code {generator} is not a generator")
        code = generator % draft.order
    else:
        code = next(
            c
            for c in range(1, draft.order)
            if _verify_generator(draft, draft.from_int(c))
        )
    ctx = FieldCtx(p, n, modulus, code)
    logger.debug(f"Built field {ctx} with generator {ctx.generator}")
    return ctx


def build_field(
    p: int,
    n: int,
    modulus: Optional[Sequence[int]] = None,
    generator: Optional[Union[int, str]] = None,
) -> FieldCtx:
    """Field of order p^n with a verified modulus and generator

    Without a modulus the lexicographically least monic irreducible is
    used; without a generator the smallest code of full order.
    """
    if isinstance(generator, str):
        generator = FieldCtx(p, n, tuple(modulus or (0,) * n + (1,)), 1).parse(
            generator
        ).to_int()
    return _build_field(
        p, n, tuple(modulus) if modulus is not None else None, generator
    )


def trace_to_prime(x: FieldElem) -> FieldElem:
    """Absolute trace sum_{j<n} x^{p^j}, as an element of F_p"""
    ctx = x.ctx
    total = ctx.zero()
    y = x
    for _ in range(ctx.n):
        total = total + y
        y = y ** ctx.p
    if any(total.coeffs[1:]):
        raise FieldError(f"Trace of {x} is not in the prime field")
    return build_field(ctx.p, 1).from_int(total.coeffs[0])


def _baby_giant(x: FieldElem, base: FieldElem, order: int) -> int:
    m = isqrt(order) + 1
    table: Dict[Tuple[int, ...], int] = {}
    y = x.ctx.one()
    for j in range(m):
        table.setdefault(y.coeffs, j)
        y = y * base
    factor = base.inverse() ** m
    gamma = x
    for i in range(m):
        j = table.get(gamma.coeffs)
        if j is not None:
            return (i * m + j) % order
        gamma = gamma * factor
    raise FieldError(f"{x} is not a power of {base}")


def dlog(x: FieldElem, base: Optional[FieldElem] = None) -> int:
    """Discrete logarithm of x to the given base (default: ctx generator)

    Uses a cached table for fields up to 2^20 elements and baby-step
    giant-step otherwise.
    """
    ctx = x.ctx
    if x.is_zero():
        raise FieldError("Discrete logarithm of zero")
    order = ctx.order - 1
    if base is None or base.coeffs == ctx.generator.coeffs:
        if ctx.order <= DLOG_TABLE_LIMIT:
            return ctx.dlog_table[x.coeffs]
        return _baby_giant(x, ctx.generator, order)
    return _baby_giant(x, base, order)


@dataclass(frozen=True)
class FieldTower:
    """A declared tower ext / base with a fixed embedding of base into ext

    The embedding sends the root t of the base modulus to the smallest
    power N^c of N = G^{(Q-1)/(q-1)} that is a root of the base modulus,
    where G is the generator of ext.
    """

    base: FieldCtx
    ext: FieldCtx

    def __post_init__(self):
        if self.base.p != self.ext.p or self.ext.n % self.base.n:
            raise FieldError(f"{self.ext} is not an extension of {self.base}")

    @property
    def degree(self) -> int:
        return self.ext.n // self.base.n

    @property
    def norm_exponent(self) -> int:
        return (self.ext.order - 1) // (self.base.order - 1)

    @cached_property
    def root_image(self) -> FieldElem:
        if self.ext == self.base:
            return self.ext.root()
        if self.base.n == 1:
            return self.ext.from_int(-self.base.modulus[0])
        n_elem = self.ext.generator ** self.norm_exponent
        candidate = self.ext.one()
        for _ in range(self.base.order - 1):
            value = self.ext.zero()
            for c in reversed(self.base.modulus):
                value = value * candidate + c
            if value.is_zero():
                return candidate
            candidate = candidate * n_elem
        raise FieldError(f"Base modulus has no root in {self.ext}")

    def embed(self, a: FieldElem) -> FieldElem:
        if a.ctx != self.base:
            raise FieldError("Element is not in the tower base")
        theta = self.root_image
        value = self.ext.zero()
        for c in reversed(a.coeffs):
            value = value * theta + c
        return value

    @cached_property
    def kappa_inverse(self) -> int:
        """Inverse of kappa mod q-1, where embed(g) = N^kappa"""
        exponent = dlog(self.embed(self.base.generator))
        kappa, rest = divmod(exponent, self.norm_exponent)
        if rest:
            raise FieldError("Embedded generator is outside the norm subgroup")
        return pow(kappa, -1, self.base.order - 1)

    def norm_index(self, e: int) -> int:
        """dlog_g of Norm(G^e)"""
        return (e * self.kappa_inverse) % (self.base.order - 1)


@lru_cache(maxsize=None)
def build_tower(base: FieldCtx, degree: int) -> FieldTower:
    ext = base if degree == 1 else build_field(base.p, base.n * degree)
    return FieldTower(base, ext)


def norm_rel(x: FieldElem, tower: FieldTower) -> FieldElem:
    """Relative norm x^{(Q-1)/(q-1)} read back in the tower base"""
    if x.ctx != tower.ext:
        raise FieldError("Element is not in the tower extension")
    if x.is_zero():
        return tower.base.zero()
    return tower.base.generator ** tower.norm_index(dlog(x))
