from dataclasses import dataclass
from typing import Tuple

from utils.errors import FieldError


def base_p_digits(value: int, p: int, length: int) -> Tuple[int, ...]:
    digits = []
    for _ in range(length):
        value, digit = divmod(value, p)
        digits.append(digit)
    return tuple(digits)


@dataclass(frozen=True)
class TwistData:
    """Twist exponent u of the character omega^{-u} on F_q, q = p^b

    ``representative`` is the chosen integer for the class of u mod q-1 and
    ``digits`` its base-p expansion (u_0, ..., u_{b-1}). The trivial class
    uses 0 unless ``literal_trivial`` asks for q-1. ``s`` always comes from
    the residue, so 0 <= s_i < q-1 and s_i = p^i u mod (q-1).
    """

    p: int
    b: int
    q: int
    representative: int
    digits: Tuple[int, ...]
    s: Tuple[int, ...]
    literal_trivial: bool = False

    @classmethod
    def from_u(cls, p: int, b: int, u: int, literal_trivial: bool = False):
        if p < 2 or b < 1:
            raise FieldError(f"Invalid twist field parameters p={p}, b={b}")
        q = p**b
        residue = u % (q - 1)
        if residue == 0 and literal_trivial:
            representative = q - 1
        else:
            representative = residue
        digits = base_p_digits(representative, p, b)
        s = tuple((pow(p, i) * residue) % (q - 1) for i in range(b))
        return cls(p, b, q, representative, digits, s, literal_trivial)

    @property
    def residue(self) -> int:
        return self.representative % (self.q - 1)

    @property
    def is_trivial(self) -> bool:
        return self.residue == 0

    @property
    def residue_digits(self) -> Tuple[int, ...]:
        """Digits of the residue in [0, q-2], used by the Dwork matrix"""
        return base_p_digits(self.residue, self.p, self.b)

    def digit(self, index: int) -> int:
        """Periodic digit u_i = u_{i mod b}"""
        return self.digits[index % self.b]

    def shifted(self, i: int) -> int:
        """u_{b-i} for 1 <= i <= b"""
        return self.digit(self.b - i)

    def to_json(self):
        return {
            "p": self.p,
            "b": self.b,
            "q": self.q,
            "u": self.representative,
            "digits": list(self.digits),
            "s": list(self.s),
            "literalTrivial": self.literal_trivial,
        }
