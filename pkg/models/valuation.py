from dataclasses import dataclass
from fractions import Fraction
from typing import Optional


def format_rational(value: Fraction) -> str:
    """Render an exact rational as "a/b" (or "a" when integral)"""
    value = Fraction(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


@dataclass(frozen=True)
class Valuation:
    """Exact valuation, or a lower bound flagged as indeterminate"""

    value: Optional[Fraction] = None
    bound: Optional[int] = None

    @classmethod
    def exact(cls, value) -> "Valuation":
        return cls(value=Fraction(value))

    @classmethod
    def at_least(cls, bound: int) -> "Valuation":
        return cls(bound=bound)

    @property
    def is_determinate(self) -> bool:
        return self.value is not None

    @property
    def lower(self) -> Fraction:
        """Exact value, or the lower bound when indeterminate"""
        if self.value is not None:
            return self.value
        return Fraction(self.bound)

    def __add__(self, other: "Valuation") -> "Valuation":
        if self.is_determinate and other.is_determinate:
            return Valuation.exact(self.value + other.value)
        return Valuation(bound=int(self.lower + other.lower))

    def to_json(self):
        if self.is_determinate:
            return format_rational(self.value)
        return {"atLeast": self.bound, "indeterminate": True}

    def __str__(self) -> str:
        if self.is_determinate:
            return format_rational(self.value)
        return f">={self.bound}?"
