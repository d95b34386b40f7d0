from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from models.twist_data import TwistData
from models.valuation import Valuation, format_rational
from utils.errors import PolygonError


@dataclass(frozen=True)
class ConvexPolygon:
    """Piecewise-linear function on [0, extent] with value 0 at 0

    ``slopes[i]`` is the slope on [i, i+1]. Polygons built from raw slope
    formulas are tagged ``convex=False`` when the slopes decrease somewhere;
    hulls are always convex. ``excluded`` keeps the points that were left out
    of a hull because their ordinate was infinite or indeterminate.
    """

    slopes: Tuple[Fraction, ...]
    convex: bool = True
    excluded: Tuple[Tuple[int, Optional[Valuation]], ...] = field(default=())

    @classmethod
    def from_slopes(cls, slopes: Sequence) -> "ConvexPolygon":
        slopes = tuple(Fraction(s) for s in slopes)
        convex = all(a <= b for a, b in zip(slopes, slopes[1:]))
        return cls(slopes, convex)

    @property
    def extent(self) -> int:
        return len(self.slopes)

    def values(self) -> List[Fraction]:
        total = Fraction(0)
        result = [total]
        for slope in self.slopes:
            total += slope
            result.append(total)
        return result

    def value(self, m: int) -> Fraction:
        if m < 0 or m > self.extent:
            raise PolygonError(f"Index {m} outside polygon extent {self.extent}")
        return sum(self.slopes[:m], Fraction(0))

    def scaled(self, factor) -> "ConvexPolygon":
        factor = Fraction(factor)
        return ConvexPolygon(
            tuple(s * factor for s in self.slopes), self.convex, self.excluded
        )

    def restricted(self, extent: int) -> "ConvexPolygon":
        if extent > self.extent:
            raise PolygonError(
                f"Cannot restrict polygon of extent {self.extent} to {extent}"
            )
        return ConvexPolygon(
            self.slopes[:extent],
            self.convex,
            tuple(e for e in self.excluded if e[0] <= extent),
        )

    def vertices(self) -> List[Tuple[int, Fraction]]:
        """Break points of the polygon, endpoints included"""
        values = self.values()
        points = [(0, values[0])]
        for i in range(1, self.extent):
            if self.slopes[i] != self.slopes[i - 1]:
                points.append((i, values[i]))
        if self.extent:
            points.append((self.extent, values[-1]))
        return points

    def to_json(self) -> Dict:
        data = {
            "slopes": [format_rational(s) for s in self.slopes],
            "points": [[i, format_rational(v)] for i, v in enumerate(self.values())],
            "vertices": [[i, format_rational(v)] for i, v in self.vertices()],
        }
        if not self.convex:
            data["convex"] = False
        if self.excluded:
            data["excluded"] = [
                [i, None if v is None else v.to_json()] for i, v in self.excluded
            ]
        return data

    def csv_rows(self) -> List[List[str]]:
        """Rows of (m, value, slope); the last row has no slope"""
        values = self.values()
        rows = []
        for m, value in enumerate(values):
            slope = format_rational(self.slopes[m]) if m < self.extent else ""
            rows.append([str(m), format_rational(value), slope])
        return rows


@dataclass(frozen=True)
class PolygonSpec:
    """Parameters of the combinatorial polygons for Delta = [0, d]"""

    twist: TwistData
    d: int
    k: Optional[int] = None
    extent: int = 0

    def __post_init__(self):
        if self.d < 1:
            raise PolygonError(f"Degree d must be positive, got {self.d}")
        if self.k is not None and not 1 <= self.k <= self.d - 1:
            raise PolygonError(f"k={self.k} outside [1, d-1] for d={self.d}")
        if self.extent < 0:
            raise PolygonError(f"Negative extent {self.extent}")

    @property
    def p(self) -> int:
        return self.twist.p

    @property
    def b(self) -> int:
        return self.twist.b

    @property
    def q(self) -> int:
        return self.twist.q

    def with_extent(self, extent: int) -> "PolygonSpec":
        return PolygonSpec(self.twist, self.d, self.k, extent)

    def to_json(self) -> Dict:
        return {
            "p": self.p,
            "q": self.q,
            "b": self.b,
            "d": self.d,
            "k": self.k,
            "u": self.twist.representative,
            "literalTrivial": self.twist.literal_trivial,
            "M": self.extent,
        }
