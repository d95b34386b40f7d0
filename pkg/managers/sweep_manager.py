#!/usr/bin/env python3
"""
Sweep Manager - One CSV row per (p, q, d, k, u, f) with polygon values,
Newton polygon values and the gaps to the bounds
"""

import csv
import io
import logging
from fractions import Fraction
from functools import partial
from typing import Any, Dict, List, Optional, Sequence

from managers.job_manager import (
    case_polynomial,
    case_spec,
    case_twist,
    grid_polynomial_cases,
    precision_of,
)
from models.job_config import JobConfig
from models.valuation import format_rational
from models.verify_report import PASS
from utils.charsum import l_poly
from utils.dwork import c_function_np
from utils.errors import PolygonError
from utils.polygons import hodge_infinity, p_delta_u, p_dk_u
from workers.grid_runner import run_grid

logger = logging.getLogger(__name__)

COLUMNS = [
    "p",
    "q",
    "d",
    "k",
    "u",
    "literal_trivial",
    "f",
    "hodge",
    "arith_delta",
    "arith_dk",
    "l_newton",
    "extent",
    "gap_dk",
    "gap_delta",
]
CFUN_COLUMNS = ["c_newton", "c_extent", "c_gap_dk", "c_stable"]


def _join(values: Sequence[Fraction]) -> str:
    return ";".join(format_rational(v) for v in values)


def gaps(values: Sequence[Fraction], bound: Sequence[Fraction], extent: int) -> str:
    """values[m] - bound[m] for 0 <= m <= extent"""
    if min(len(values), len(bound)) <= extent:
        raise PolygonError(
            f"Gap on [0, {extent}] needs both polygons there, got "
            f"{len(values) - 1} and {len(bound) - 1}"
        )
    return _join([values[m] - bound[m] for m in range(extent + 1)])


def _f_label(coeffs: Dict[str, int]) -> str:
    return ";".join(f"{name}={value}" for name, value in sorted(coeffs.items()))


def sweep_row(with_cfun: bool, case: Dict[str, Any]):
    """Evaluate one sweep case; the values of the L Newton polygon are exact"""
    f = case_polynomial(case)
    twist = case_twist(case)
    data = l_poly(
        f, twist.residue, case["m"], K=case["K"], guard=case["enumeration_guard"]
    )
    extent = min(case["M"], data.newton.extent)
    spec = case_spec(case)
    b, p = spec.b, spec.p
    hodge = hodge_infinity(spec).scaled(b * (p - 1)).values()
    delta = p_delta_u(spec).scaled(b).values()
    dk = p_dk_u(spec).scaled(b).values()
    newton = data.newton.values()[: extent + 1]
    row = {
        "p": p,
        "q": spec.q,
        "d": spec.d,
        "k": spec.k,
        "u": twist.representative,
        "literal_trivial": int(twist.literal_trivial),
        "f": _f_label(case["coeffs"]),
        "hodge": _join(hodge),
        "arith_delta": _join(delta),
        "arith_dk": _join(dk),
        "l_newton": _join(newton),
        "extent": extent,
        "gap_dk": gaps(newton, dk, extent),
        "gap_delta": gaps(newton, delta, extent),
    }
    if with_cfun:
        result = c_function_np(
            f,
            twist,
            case["M"],
            K=case["K"],
            guard_terms=case["guard_terms"],
            max_rounds=case["max_rounds"],
        )
        c_values = result.polygon.values()
        row["c_newton"] = _join(c_values)
        row["c_extent"] = result.polygon.extent
        row["c_gap_dk"] = gaps(c_values, dk, result.polygon.extent)
        row["c_stable"] = int(result.conclusive)
    return PASS, row


class SweepManager:
    """Runs a sweep grid and writes the dataset CSV"""

    def __init__(self, config: JobConfig):
        self.config = config
        self.failures = 0

    @property
    def columns(self) -> List[str]:
        return COLUMNS + (CFUN_COLUMNS if self.config.with_cfun else [])

    def build_cases(self) -> List[Dict[str, Any]]:
        config = self.config
        return grid_polynomial_cases(config.grid, config.seed, precision_of(config))

    def run(self) -> List[Dict[str, Any]]:
        cases = self.build_cases()
        logger.info(f"Sweeping {len(cases)} cases")
        task = partial(sweep_row, self.config.with_cfun)
        rows = []
        for result in run_grid(task, cases, self.config.workers):
            if result.status != PASS:
                logger.error(f"Sweep case {result.index} failed: {result.payload}")
                self.failures += 1
                continue
            rows.append(result.payload)
        return rows

    def render(self, rows: List[Dict[str, Any]]) -> str:
        buffer = io.StringIO()
        writer = csv.DictWriter(buffer, fieldnames=self.columns, lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
        return buffer.getvalue()

    def write(self, rows: List[Dict[str, Any]], path: Optional[str] = None) -> str:
        text = self.render(rows)
        if path:
            with open(path, "w", newline="") as handle:
                handle.write(text)
            logger.info(f"Wrote {len(rows)} sweep rows to {path}")
        return text
