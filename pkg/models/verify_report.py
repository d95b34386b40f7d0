import json
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

from constants import EXIT_FAIL, EXIT_INCONCLUSIVE, EXIT_PASS

PASS = "pass"
FAIL = "fail"
INCONCLUSIVE = "inconclusive-precision"
STATUSES = (PASS, FAIL, INCONCLUSIVE)


@dataclass
class CaseResult:
    """Outcome of one grid case; fail and inconclusive rows keep their config"""

    index: int
    status: str
    config: Dict[str, Any]
    payload: Dict[str, Any] = field(default_factory=dict)

    def to_json(self) -> Dict[str, Any]:
        data = {"index": self.index, "status": self.status, "payload": self.payload}
        if self.status != PASS:
            data["config"] = self.config
        return data

    @classmethod
    def from_json(cls, data: Dict[str, Any]) -> "CaseResult":
        return cls(
            data["index"], data["status"], data.get("config", {}), data["payload"]
        )


@dataclass
class VerifyReport:
    suite: str
    version: str
    config: Dict[str, Any]
    cases: List[CaseResult] = field(default_factory=list)
    notes: Dict[str, Any] = field(default_factory=dict)
    wall_time: Optional[str] = None

    @property
    def totals(self) -> Dict[str, int]:
        counts = {status: 0 for status in STATUSES}
        for case in self.cases:
            counts[case.status] += 1
        counts["total"] = len(self.cases)
        return counts

    def exit_code(self, allow_inconclusive: bool = False) -> int:
        totals = self.totals
        if totals[FAIL]:
            return EXIT_FAIL
        if totals[INCONCLUSIVE] and not allow_inconclusive:
            return EXIT_INCONCLUSIVE
        return EXIT_PASS

    def to_json(self) -> Dict[str, Any]:
        data = {
            "suite": self.suite,
            "version": self.version,
            "config": self.config,
            "cases": [case.to_json() for case in self.cases],
            "totals": self.totals,
            "notes": self.notes,
        }
        if self.wall_time is not None:
            data["wallTime"] = self.wall_time
        return data

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True, indent=2) + "\n"

    @classmethod
    def from_json(cls, data: Dict[str, Any]) -> "VerifyReport":
        return cls(
            suite=data["suite"],
            version=data["version"],
            config=data["config"],
            cases=[CaseResult.from_json(case) for case in data.get("cases", [])],
            notes=data.get("notes", {}),
            wall_time=data.get("wallTime"),
        )
