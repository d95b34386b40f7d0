#!/usr/bin/env python3
"""
Job Manager - Builds fields, polynomials and twists from configs and runs
the single-job commands (polygon, lfun, cfun-dwork)
"""

import csv
import logging
import random
from itertools import product
from typing import Any, Dict, List, Optional, Tuple

from constants import EXIT_FAIL, EXIT_INCONCLUSIVE, EXIT_PASS, VERSION
from models.job_config import GridSpec, JobConfig
from models.poly_spec import PolySpec
from models.polygon import ConvexPolygon, PolygonSpec
from models.twist_data import TwistData
from utils.charsum import l_poly
from utils.dwork import c_function_np
from utils.errors import ConfigError
from utils.ffield import FieldCtx, build_field
from utils.polygons import hodge_infinity, is_conclusive, p_delta_u, p_dk_u

logger = logging.getLogger(__name__)


def case_field(case: Dict[str, Any]) -> FieldCtx:
    modulus = case.get("modulus")
    return build_field(
        case["p"],
        case["b"],
        tuple(modulus) if modulus else None,
        case.get("generator"),
    )


def case_polynomial(case: Dict[str, Any]) -> PolySpec:
    return PolySpec.build(case_field(case), case["d"], case.get("k"), case["coeffs"])


def case_twist(case: Dict[str, Any]) -> TwistData:
    return TwistData.from_u(
        case["p"], case["b"], case["u"], case.get("literal_trivial", False)
    )


def case_spec(case: Dict[str, Any], extent: Optional[int] = None) -> PolygonSpec:
    extent = case["M"] if extent is None else extent
    return PolygonSpec(case_twist(case), case["d"], case.get("k"), extent)


def polygon_of_kind(kind: str, spec: PolygonSpec) -> ConvexPolygon:
    if kind == "hodge":
        return hodge_infinity(spec)
    if kind == "arith-delta":
        return p_delta_u(spec)
    if kind == "arith-dk":
        return p_dk_u(spec)
    raise ConfigError(f"Invalid field 'kind': {kind!r}")


def polynomial_cases(
    q: int, d: int, k: int, exhaustive: bool, samples: int, rng: random.Random
) -> List[Dict[str, int]]:
    """Coefficient codes {"a1": .., "ad": ..} with a_d, a_k units

    Exhaustive enumeration lets every a_i with i < k range over F_q.
    """
    lower = [f"a{i}" for i in range(1, k)]
    if exhaustive:
        cases = []
        for a_d, a_k in product(range(1, q), repeat=2):
            for rest in product(range(q), repeat=len(lower)):
                coeffs = dict(zip(lower, rest))
                coeffs.update({f"a{k}": a_k, "ad": a_d})
                cases.append(coeffs)
        return cases
    cases = []
    for _ in range(samples):
        coeffs = {name: rng.randrange(q) for name in lower}
        coeffs[f"a{k}"] = rng.randrange(1, q)
        coeffs["ad"] = rng.randrange(1, q)
        cases.append(coeffs)
    return cases


def grid_polynomial_cases(
    grid: GridSpec, seed: int, precision: Dict[str, int]
) -> List[Dict[str, Any]]:
    """Polygon cases of ``grid`` crossed with their polynomials, seeded"""
    rng = random.Random(seed)
    cases = []
    for base in grid.polygon_cases():
        q = base["p"] ** base["b"]
        for coeffs in polynomial_cases(
            q, base["d"], base["k"], grid.exhaustive, grid.samples, rng
        ):
            case = dict(base, coeffs=coeffs, m=grid.m, **precision)
            cases.append(case)
    return cases


def precision_of(config: JobConfig) -> Dict[str, int]:
    return {
        "K": config.K,
        "guard_terms": config.guard_terms,
        "max_rounds": config.max_rounds,
        "enumeration_guard": config.enumeration_guard,
    }


class JobManager:
    """Runs one polygon, lfun or cfun-dwork job from a resolved config"""

    def __init__(self, config: JobConfig):
        self.config = config

    @property
    def case(self) -> Dict[str, Any]:
        config = self.config
        return {
            "p": config.p,
            "b": config.b,
            "modulus": config.modulus,
            "generator": config.generator,
            "d": config.d,
            "k": config.k,
            "u": config.u,
            "literal_trivial": config.literal_trivial,
            "coeffs": config.coeffs,
            "M": config.M,
        }

    def _document(self, result: Dict[str, Any]) -> Dict[str, Any]:
        return {"version": VERSION, "config": self.config.to_dict(), "result": result}

    def run(self) -> Tuple[int, Dict[str, Any]]:
        """Exit code and JSON document for the configured command"""
        command = self.config.command
        if command == "polygon":
            return EXIT_PASS, self._document(self.run_polygon())
        if command == "lfun":
            return self.run_lfun()
        if command == "cfun-dwork":
            return self.run_cfun()
        raise ConfigError(f"Invalid field 'command': {command!r} is not a single job")

    def run_polygon(self) -> Dict[str, Any]:
        config = self.config
        spec = case_spec(self.case, config.points)
        polygon = polygon_of_kind(config.kind, spec)
        logger.info(f"{config.kind} polygon for {spec.to_json()}")
        if config.csv:
            self.write_polygon_csv(polygon, config.csv)
        return {"kind": config.kind, "spec": spec.to_json(), **polygon.to_json()}

    @staticmethod
    def write_polygon_csv(polygon: ConvexPolygon, path: str):
        with open(path, "w", newline="") as handle:
            writer = csv.writer(handle)
            writer.writerow(["m", "value", "slope"])
            writer.writerows(polygon.csv_rows())
        logger.info(f"Wrote polygon CSV to {path}")

    def run_lfun(self) -> Tuple[int, Dict[str, Any]]:
        config = self.config
        f = case_polynomial(self.case)
        twist = case_twist(self.case)
        data = l_poly(
            f,
            twist.residue,
            config.m,
            L_terms=config.L_terms,
            K=config.K,
            guard=config.enumeration_guard,
        )
        result = {
            "field": f.field.descriptor(),
            "f": f.to_json(),
            "twist": twist.to_json(),
            **data.to_json(),
        }
        if not data.degree_ok:
            logger.error("Coefficients beyond the degree are nonzero")
            return EXIT_FAIL, self._document(result)
        if not is_conclusive(data.newton, data.degree):
            return EXIT_INCONCLUSIVE, self._document(result)
        return EXIT_PASS, self._document(result)

    def run_cfun(self) -> Tuple[int, Dict[str, Any]]:
        config = self.config
        f = case_polynomial(self.case)
        twist = case_twist(self.case)
        result = c_function_np(
            f,
            twist,
            config.M,
            K=config.K,
            guard_terms=config.guard_terms,
            max_rounds=config.max_rounds,
            J=config.J,
            N_pi=config.N_pi,
            strict=config.strict,
        )
        document = self._document(
            {
                "field": f.field.descriptor(),
                "f": f.to_json(),
                "twist": twist.to_json(),
                **result.to_json(),
            }
        )
        if not result.conclusive:
            return EXIT_INCONCLUSIVE, document
        return EXIT_PASS, document
