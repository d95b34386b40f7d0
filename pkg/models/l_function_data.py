from dataclasses import dataclass, field
from typing import Dict, List, Tuple

from models.polygon import ConvexPolygon
from models.valuation import Valuation


@dataclass(frozen=True)
class LFunctionData:
    """L_{f,chi}(s, pi_m) as coefficients in Z_q[pi_m] with their valuations

    ``coefficients`` holds c_0..c_D (PimElem); ``extra`` holds any
    coefficients computed beyond the degree D for the degree check.
    """

    m: int
    degree: int
    coefficients: Tuple
    valuations: Tuple[Valuation, ...]
    newton: ConvexPolygon
    extra: Tuple = field(default=())
    extra_valuations: Tuple[Valuation, ...] = field(default=())

    @property
    def degree_ok(self) -> bool:
        """Coefficients past the degree vanish to working precision"""
        return all(c.is_zero() for c in self.extra)

    def coefficient_json(self) -> List[Dict]:
        rows = []
        for i, c in enumerate(self.coefficients):
            rows.append(
                {
                    "index": i,
                    "prec": c.prec,
                    "coeffs": [list(x) for x in c.coeffs],
                }
            )
        return rows

    def to_json(self) -> Dict:
        return {
            "m": self.m,
            "degree": self.degree,
            "valuations": [v.to_json() for v in self.valuations],
            "newton": self.newton.to_json(),
            "degreeOk": self.degree_ok,
            "extraValuations": [v.to_json() for v in self.extra_valuations],
            "coefficients": self.coefficient_json(),
        }
