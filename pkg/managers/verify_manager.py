#!/usr/bin/env python3
"""
Verify Manager - Builds the case grids of the theorem suites, runs them on
a GridRunner and assembles deterministic reports
"""

import json
import logging
import random
import time
from functools import partial
from typing import Any, Callable, Dict, List, Tuple

import semver

from constants import EXIT_PASS, VERSION
from managers.job_manager import (
    case_field,
    case_polynomial,
    case_spec,
    case_twist,
    grid_polynomial_cases,
    polynomial_cases,
    precision_of,
)
from models.job_config import GridSpec, JobConfig
from models.polygon import PolygonSpec
from models.twist_data import TwistData
from models.valuation import format_rational
from models.verify_report import FAIL, INCONCLUSIVE, PASS, VerifyReport
from utils.charsum import l_poly, l_to_c_np, s_sum
from utils.dwork import c_function_np, ef_gamma, trace_consistency
from utils.errors import ConfigError
from utils.polygons import (
    dominates,
    hodge_infinity,
    is_conclusive,
    key_estimate_check,
    p_delta_u,
    p_dk_u,
)
from workers.grid_runner import run_grid

logger = logging.getLogger(__name__)

Outcome = Tuple[str, Dict[str, Any]]

# Suite defaults; command-line grid flags and job files override them
SUITE_GRIDS: Dict[str, Dict[str, Any]] = {
    "dk-vs-delta": {
        "p": [11, 13, 23],
        "d": [2, 3],
        "b": [1, 2],
        "M": 30,
        "both_conventions": True,
    },
    "hodge-cross": {
        "p": [11, 13, 23],
        "d": [2, 3],
        "b": [1, 2],
        "M": 30,
        "both_conventions": True,
    },
    "lfun-bound": {"p": [11], "d": [2], "k": [1], "M": 2, "exhaustive": True},
    "cfun-bound": {"p": [11], "d": [2], "k": [1], "M": 6, "exhaustive": True},
    "generic-equality": {"p": [11], "d": [2], "k": [1], "M": 2, "exhaustive": True},
    "key-estimate": {"p": [11], "d": [2], "k": [1]},
    "trace-consistency": {"p": [11], "d": [2], "k": [1], "b": [1, 2], "samples": 5},
    "gamma-orders": {"p": [11], "d": [2], "k": [1], "b": [1, 2], "samples": 5},
    "oracle-cross": {"p": [11], "d": [2], "k": [1], "M": 2, "samples": 10},
    "galois-twist": {"p": [11], "d": [2], "k": [1], "b": [2], "samples": 1},
}

ADVISORY_SUITES = ("hodge-cross",)

TRACE_PRECISION = {"N_pi": 10, "K": 5}
GAMMA_INDEX_LIMIT = 200


def suite_grid(suite: str, overrides: Dict[str, Any]) -> GridSpec:
    if suite not in SUITE_GRIDS:
        raise ConfigError(f"Invalid field 'suite': {suite!r}")
    data = dict(SUITE_GRIDS[suite])
    data.update({key: value for key, value in overrides.items() if value is not None})
    return GridSpec.from_dict(data)


def _values(polygon) -> List[str]:
    return [format_rational(v) for v in polygon.values()]


def _failure(dominance) -> Dict[str, Any]:
    m, left, right = dominance.failure
    return {"m": m, "left": format_rational(left), "right": format_rational(right)}


# Case evaluators; module level so that worker processes can unpickle them


def check_dk_vs_delta(case: Dict[str, Any]) -> Outcome:
    spec = case_spec(case)
    result = dominates(p_dk_u(spec), p_delta_u(spec), spec.extent)
    if result:
        return PASS, {}
    return FAIL, {"failure": _failure(result)}


def check_hodge_cross(case: Dict[str, Any]) -> Outcome:
    spec = case_spec(case)
    arithmetic = p_delta_u(spec).scaled(spec.b)
    hodge = hodge_infinity(spec).scaled(spec.b * (spec.p - 1))
    result = dominates(arithmetic, hodge, spec.extent)
    if result:
        return PASS, {}
    return FAIL, {"failure": _failure(result)}


def _l_newton(case: Dict[str, Any]):
    f = case_polynomial(case)
    twist = case_twist(case)
    data = l_poly(
        f, twist.residue, case["m"], K=case["K"], guard=case["enumeration_guard"]
    )
    extent = min(case["M"], data.degree)
    return data, extent


def check_lfun_bound(case: Dict[str, Any]) -> Outcome:
    data, extent = _l_newton(case)
    spec = case_spec(case, extent)
    bound = p_dk_u(spec).scaled(spec.b)
    payload = {"newton": data.newton.to_json(), "bound": _values(bound)}
    if not is_conclusive(data.newton, extent):
        return INCONCLUSIVE, payload
    newton = l_to_c_np(data, extent)
    result = dominates(newton, bound, extent)
    if not result:
        return FAIL, dict(payload, failure=_failure(result))
    payload["equality"] = newton.values() == bound.values()
    return PASS, payload


def check_cfun_bound(case: Dict[str, Any]) -> Outcome:
    f = case_polynomial(case)
    twist = case_twist(case)
    result = c_function_np(
        f,
        twist,
        case["M"],
        K=case["K"],
        guard_terms=case["guard_terms"],
        max_rounds=case["max_rounds"],
    )
    payload = {"cfun": result.to_json()}
    if not result.conclusive:
        return INCONCLUSIVE, payload
    spec = case_spec(case)
    b, p = spec.b, spec.p
    bounds = {
        "dk": p_dk_u(spec).scaled(b),
        "delta": p_delta_u(spec).scaled(b),
        "hodge": hodge_infinity(spec).scaled(b * (p - 1)),
    }
    for name, bound in bounds.items():
        outcome = dominates(result.polygon, bound, spec.extent)
        if not outcome:
            return FAIL, dict(payload, bound=name, failure=_failure(outcome))
    return PASS, payload


def check_generic_equality(case: Dict[str, Any]) -> Outcome:
    """Some f in the enumeration attains b p_{Delta,u} exactly"""
    attaining, undecided = [], 0
    for coeffs in case["polynomials"]:
        data, extent = _l_newton(dict(case, coeffs=coeffs))
        if not is_conclusive(data.newton, extent):
            undecided += 1
            continue
        spec = case_spec(case, extent)
        target = p_delta_u(spec).scaled(spec.b)
        if l_to_c_np(data, extent).values() == target.values():
            attaining.append(coeffs)
    payload = {"attaining": attaining, "undecided": undecided}
    if attaining:
        return PASS, payload
    return (INCONCLUSIVE if undecided else FAIL), payload


def check_key_estimate(case: Dict[str, Any]) -> Outcome:
    twist = TwistData.from_u(case["p"], case["b"], case["u"])
    spec = PolygonSpec(twist, case["d"], case["k"], case["m"])
    R = [[tuple(pair) for pair in subset] for subset in case["R"]]
    tau = [[tuple(pair) for pair in images] for images in case["tau"]]
    if key_estimate_check(spec, case["m"], R, tau):
        return PASS, {}
    return FAIL, {}


def check_trace_consistency(case: Dict[str, Any]) -> Outcome:
    f = case_polynomial(case)
    control = case.get("control", False)
    dwork_u = case["u"] + 1 if control else None
    check = trace_consistency(f, case["u"], case["N_pi"], case["K"], dwork_u=dwork_u)
    payload = {"control": control, "equal": check.equal}
    if check.equal != control:
        return PASS, payload
    return FAIL, dict(payload, sum=str(check.sum_side), matrix=str(check.matrix_side))


def check_gamma_orders(case: Dict[str, Any]) -> Outcome:
    f = case_polynomial(case)
    N_n = GAMMA_INDEX_LIMIT + 1
    N_pi = GAMMA_INDEX_LIMIT // f.d + 2
    table = ef_gamma(f, N_n, N_pi, case["K"])
    violations = table.order_violations()
    if violations:
        rows = [[n, order.to_json(), bound] for n, order, bound in violations]
        return FAIL, {"violations": rows}
    return PASS, {}


def check_oracle_cross(case: Dict[str, Any]) -> Outcome:
    data, extent = _l_newton(case)
    result = c_function_np(
        case_polynomial(case),
        case_twist(case),
        extent,
        K=case["K"],
        guard_terms=case["guard_terms"],
        max_rounds=case["max_rounds"],
    )
    payload = {"oracle": data.newton.to_json(), "dwork": result.polygon.to_json()}
    if not (result.conclusive and is_conclusive(data.newton, extent)):
        return INCONCLUSIVE, payload
    outcome = dominates(l_to_c_np(data, extent), result.polygon, extent)
    if outcome:
        return PASS, payload
    return FAIL, dict(payload, failure=_failure(outcome))


def check_galois_twist(case: Dict[str, Any]) -> Outcome:
    """S_{f, chi^p} equals sigma(S_{f, chi}) for every u, l = m = 1"""
    f = case_polynomial(case)
    p, q = case["p"], case["p"] ** case["b"]
    mismatches = []
    for u in range(q - 1):
        plain = s_sum(f, u, 1, 1, case["K"], case["enumeration_guard"])
        twisted = s_sum(f, p * u, 1, 1, case["K"], case["enumeration_guard"])
        if twisted != plain.frobenius(1):
            mismatches.append(u)
    if mismatches:
        return FAIL, {"mismatches": mismatches}
    return PASS, {}


SUITE_CHECKS: Dict[str, Callable[[Dict[str, Any]], Outcome]] = {
    "dk-vs-delta": check_dk_vs_delta,
    "hodge-cross": check_hodge_cross,
    "lfun-bound": check_lfun_bound,
    "cfun-bound": check_cfun_bound,
    "generic-equality": check_generic_equality,
    "key-estimate": check_key_estimate,
    "trace-consistency": check_trace_consistency,
    "gamma-orders": check_gamma_orders,
    "oracle-cross": check_oracle_cross,
    "galois-twist": check_galois_twist,
}


class VerifyManager:
    """Builds the grid of a theorem suite and runs it to a VerifyReport"""

    def __init__(self, config: JobConfig):
        self.config = config
        self.precision = precision_of(config)
        self.builders: Dict[str, Callable[[], List[Dict[str, Any]]]] = {
            "dk-vs-delta": self._polygon_cases,
            "hodge-cross": self._polygon_cases,
            "lfun-bound": self._polynomial_cases,
            "cfun-bound": self._polynomial_cases,
            "generic-equality": self._equality_cases,
            "key-estimate": self._key_estimate_cases,
            "trace-consistency": self._trace_cases,
            "gamma-orders": self._first_twist_cases,
            "oracle-cross": self._polynomial_cases,
            "galois-twist": self._first_twist_cases,
        }

    # Case builders

    def _polygon_cases(self) -> List[Dict[str, Any]]:
        return self.config.grid.polygon_cases()

    def _polynomial_cases(self) -> List[Dict[str, Any]]:
        return grid_polynomial_cases(self.config.grid, self.config.seed, self.precision)

    def _equality_cases(self) -> List[Dict[str, Any]]:
        grid = self.config.grid
        rng = random.Random(self.config.seed)
        cases = []
        for base in grid.polygon_cases():
            q = base["p"] ** base["b"]
            polynomials = polynomial_cases(
                q, base["d"], base["k"], grid.exhaustive, grid.samples, rng
            )
            cases.append(
                dict(base, polynomials=polynomials, m=grid.m, **self.precision)
            )
        return cases

    def _first_twist_cases(self) -> List[Dict[str, Any]]:
        """One case per seeded polynomial, ignoring the twist range"""
        grid = self.config.grid
        single = GridSpec.from_dict(dict(grid.to_dict(), u=[0, 0]))
        return grid_polynomial_cases(single, self.config.seed, self.precision)

    def _trace_cases(self) -> List[Dict[str, Any]]:
        rng = random.Random(self.config.seed)
        cases = []
        for case in self._first_twist_cases():
            q = case["p"] ** case["b"]
            case.update(TRACE_PRECISION, u=rng.randrange(q - 1))
            cases.append(case)
        if cases:
            cases.append(dict(cases[0], control=True))
        return cases

    def _key_estimate_cases(self) -> List[Dict[str, Any]]:
        grid = self.config.grid
        rng = random.Random(self.config.seed)
        p, d = grid.p[0], grid.d[0]
        k = grid.k_values(d)[0]
        cases = []
        for _ in range(self.config.trials):
            b = rng.randint(1, 2)
            m = rng.randint(1, 4)
            u = rng.randrange(p**b - 1)
            pool = [(l, w) for l in range(3 * m) for w in range(1, b + 1)]
            R, tau = [], []
            for _ in range(b):
                subset = rng.sample(pool, b * m)
                images = list(subset)
                rng.shuffle(images)
                R.append([list(pair) for pair in subset])
                tau.append([list(pair) for pair in images])
            cases.append(
                {"p": p, "b": b, "d": d, "k": k, "u": u, "m": m, "R": R, "tau": tau}
            )
        return cases

    def build_cases(self) -> List[Dict[str, Any]]:
        return self.builders[self.config.suite]()

    def field_descriptors(self, cases: List[Dict[str, Any]]) -> List[Dict[str, Any]]:
        """Modulus and generator of every field the polynomial cases used"""
        descriptors: Dict[Tuple[int, int], Dict[str, Any]] = {}
        for case in cases:
            if "coeffs" not in case and "polynomials" not in case:
                continue
            key = (case["p"], case["b"])
            if key not in descriptors:
                descriptors[key] = case_field(case).descriptor()
        return [descriptors[key] for key in sorted(descriptors)]

    def run(self) -> VerifyReport:
        config = self.config
        suite = config.suite
        if suite not in SUITE_CHECKS:
            raise ConfigError(f"Invalid field 'suite': {suite!r}")
        started = time.perf_counter()
        cases = self.build_cases()
        logger.info(f"Running suite {suite} on {len(cases)} cases")
        results = run_grid(partial(evaluate_case, suite), cases, config.workers)
        report = VerifyReport(suite, VERSION, config.to_dict(), results)
        fields = self.field_descriptors(cases)
        if fields:
            report.notes["fields"] = fields
        if suite in ADVISORY_SUITES:
            report.notes["advisory"] = True
        if suite == "lfun-bound":
            report.notes["equality"] = [
                r.index for r in results if r.payload.get("equality")
            ]
        if config.timing:
            report.wall_time = f"{time.perf_counter() - started:.3f}"
        totals = report.totals
        logger.info(
            f"Suite {suite}: {totals[PASS]} pass, {totals[FAIL]} fail, "
            f"{totals[INCONCLUSIVE]} inconclusive"
        )
        return report

    def exit_code(self, report: VerifyReport) -> int:
        if report.suite in ADVISORY_SUITES and report.totals[FAIL]:
            logger.warning(f"{report.totals[FAIL]} advisory cross-check failures")
            return EXIT_PASS
        return report.exit_code(self.config.allow_inconclusive)

    @staticmethod
    def read_report(path: str) -> VerifyReport:
        try:
            with open(path, "r") as handle:
                data = json.load(handle)
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigError(f"Cannot read replay report {path}: {e}")
        try:
            report = VerifyReport.from_json(data)
        except (KeyError, TypeError) as e:
            raise ConfigError(f"Malformed replay report {path}: {e}")
        if semver.compare(report.version, VERSION) > 0:
            logger.warning(
                f"Replaying a report from version {report.version} "
                f"with older version {VERSION}"
            )
        return report

    @staticmethod
    def load_replay(path: str) -> JobConfig:
        """Config embedded in a previous report"""
        return JobConfig.from_dict(VerifyManager.read_report(path).config)

    @staticmethod
    def replay_row(path: str, index: int) -> VerifyReport:
        """Re-run one fail or inconclusive row from the config it embeds"""
        report = VerifyManager.read_report(path)
        if report.suite not in SUITE_CHECKS:
            raise ConfigError(f"Invalid field 'suite': {report.suite!r}")
        rows = [case for case in report.cases if case.index == index]
        if not rows or not rows[0].config:
            raise ConfigError(
                f"Invalid field 'row': no embedded config for row {index} in {path}"
            )
        logger.info(f"Replaying row {index} of suite {report.suite}")
        result = run_grid(partial(evaluate_case, report.suite), [rows[0].config], 1)[0]
        result.index = index
        replayed = VerifyReport(report.suite, VERSION, report.config, [result])
        replayed.notes["replayedRow"] = index
        replayed.notes["previousStatus"] = rows[0].status
        return replayed


def evaluate_case(suite: str, case: Dict[str, Any]) -> Outcome:
    return SUITE_CHECKS[suite](case)
