from dataclasses import asdict, dataclass, field, fields
from typing import Any, Dict, List, Mapping, Optional, Tuple, Union

from utils.errors import ConfigError, FieldError
from utils.ffield import build_field

COMMANDS = ("polygon", "lfun", "cfun-dwork", "verify", "sweep")
POLYGON_KINDS = ("hodge", "arith-delta", "arith-dk")
SUITES = (
    "dk-vs-delta",
    "hodge-cross",
    "lfun-bound",
    "cfun-bound",
    "generic-equality",
    "key-estimate",
    "trace-consistency",
    "gamma-orders",
    "oracle-cross",
    "galois-twist",
)


def _int_list(name: str, value: Any) -> Tuple[int, ...]:
    """Accept 11, "11,13" or [11, 13]"""
    if isinstance(value, int):
        items = [value]
    elif isinstance(value, str):
        items = [part for part in value.split(",") if part.strip()]
    elif isinstance(value, (list, tuple)):
        items = list(value)
    else:
        raise ConfigError(f"Invalid field '{name}': expected integers, got {value!r}")
    try:
        return tuple(int(item) for item in items)
    except (TypeError, ValueError):
        raise ConfigError(f"Invalid field '{name}': expected integers, got {value!r}")


def prime_power_exponent(p: int, q: int) -> int:
    """b with q = p^b"""
    b, value = 0, 1
    while value < q:
        value *= p
        b += 1
    if value != q or b == 0:
        raise ConfigError(f"Invalid field 'q': {q} is not a power of p={p}")
    return b


@dataclass(frozen=True)
class GridSpec:
    """Parameter grid for verify and sweep runs

    ``k`` empty means every 1 <= k <= d-1; ``u`` None means every class in
    [0, q-2]. ``exhaustive`` enumerates every f with a_d, a_k units and
    lower coefficients free, otherwise ``samples`` random f are drawn.
    """

    p: Tuple[int, ...] = (11,)
    d: Tuple[int, ...] = (2,)
    k: Tuple[int, ...] = ()
    b: Tuple[int, ...] = (1,)
    u: Optional[Tuple[int, int]] = None
    m: int = 1
    M: int = 6
    both_conventions: bool = False
    exhaustive: bool = False
    samples: int = 5

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "GridSpec":
        unknown = set(data) - {f.name for f in fields(cls)} - {"q_exponents"}
        if unknown:
            raise ConfigError(f"Invalid field 'grid.{sorted(unknown)[0]}': unknown")
        values: Dict[str, Any] = {}
        for name in ("p", "d", "k", "b"):
            if name in data:
                values[name] = _int_list(f"grid.{name}", data[name])
        if "q_exponents" in data:
            values["b"] = _int_list("grid.q_exponents", data["q_exponents"])
        if data.get("u") is not None:
            bounds = _int_list("grid.u", data["u"])
            if len(bounds) == 1:
                bounds = (bounds[0], bounds[0])
            if len(bounds) != 2 or bounds[0] > bounds[1]:
                raise ConfigError(f"Invalid field 'grid.u': bad range {data['u']!r}")
            values["u"] = bounds
        for name in ("m", "M", "samples"):
            if name in data:
                values[name] = _int_list(f"grid.{name}", data[name])[0]
        for name in ("both_conventions", "exhaustive"):
            if name in data:
                values[name] = bool(data[name])
        grid = cls(**values)
        grid.validate()
        return grid

    def validate(self):
        for p in self.p:
            if p < 2:
                raise ConfigError(f"Invalid field 'grid.p': {p}")
        for d in self.d:
            if d < 1:
                raise ConfigError(f"Invalid field 'grid.d': {d}")
        if any(b < 1 for b in self.b):
            raise ConfigError(f"Invalid field 'grid.b': {list(self.b)}")
        if self.m < 1:
            raise ConfigError(f"Invalid field 'grid.m': {self.m}")
        if self.M < 0:
            raise ConfigError(f"Invalid field 'grid.M': {self.M}")
        if self.samples < 0:
            raise ConfigError(f"Invalid field 'grid.samples': {self.samples}")

    def k_values(self, d: int) -> List[int]:
        if self.k:
            return [k for k in self.k if 1 <= k <= d - 1]
        return list(range(1, d))

    def u_values(self, q: int) -> List[int]:
        if self.u is None:
            return list(range(q - 1))
        return list(range(self.u[0], self.u[1] + 1))

    def conventions(self) -> List[bool]:
        return [False, True] if self.both_conventions else [False]

    def polygon_cases(self) -> List[Dict[str, Any]]:
        """(p, b, d, k, u, literal_trivial) combinations in a fixed order"""
        cases = []
        for p in self.p:
            for b in self.b:
                q = p**b
                for d in self.d:
                    for k in self.k_values(d):
                        for u in self.u_values(q):
                            for literal in self.conventions():
                                if literal and u % (q - 1):
                                    continue
                                cases.append(
                                    {
                                        "p": p,
                                        "b": b,
                                        "d": d,
                                        "k": k,
                                        "u": u,
                                        "literal_trivial": literal,
                                        "M": self.M,
                                    }
                                )
        return cases

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        for name in ("p", "d", "k", "b"):
            data[name] = list(data[name])
        if self.u is not None:
            data["u"] = list(self.u)
        return data


@dataclass(frozen=True)
class JobConfig:
    """Resolved configuration of a single CLI invocation

    Only the fields used by ``command`` matter; the rest keep their
    defaults and are still embedded in reports.
    """

    command: str
    p: Optional[int] = None
    b: int = 1
    modulus: Optional[Tuple[int, ...]] = None
    generator: Optional[Union[int, str]] = None
    d: Optional[int] = None
    k: Optional[int] = None
    u: int = 0
    coeffs: Dict[str, Any] = field(default_factory=dict)
    literal_trivial: bool = False
    kind: Optional[str] = None
    points: int = 0
    m: int = 1
    M: int = 6
    L_terms: Optional[int] = None
    J: Optional[int] = None
    N_pi: Optional[int] = None
    suite: Optional[str] = None
    grid: GridSpec = field(default_factory=GridSpec)
    seed: int = 0
    trials: int = 1000
    K: int = 20
    guard_terms: int = 8
    max_rounds: int = 4
    enumeration_guard: int = 1 << 24
    workers: int = 1
    output: Optional[str] = None
    csv: Optional[str] = None
    with_cfun: bool = False
    strict: bool = False
    timing: bool = False
    allow_inconclusive: bool = False

    @property
    def q(self) -> int:
        return self.p**self.b

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "JobConfig":
        """Validate a flat mapping; ``q`` may replace ``b`` and ``grid`` nests"""
        data = {key: value for key, value in data.items() if value is not None}
        known = {f.name for f in fields(cls)} | {"q"}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"Invalid field '{sorted(unknown)[0]}': unknown")
        values: Dict[str, Any] = {}
        for f in fields(cls):
            if f.name not in data:
                continue
            value = data[f.name]
            if f.name == "grid":
                if not isinstance(value, GridSpec):
                    value = GridSpec.from_dict(value)
            elif f.name == "modulus":
                value = _int_list("modulus", value)
            elif f.name == "generator":
                if isinstance(value, bool) or not isinstance(value, (int, str)):
                    raise ConfigError(f"Invalid field 'generator': {value!r}")
            elif f.name == "coeffs":
                if not isinstance(value, Mapping):
                    raise ConfigError(f"Invalid field 'coeffs': {value!r}")
                value = dict(value)
            elif f.type in (int, Optional[int]):
                value = _int_list(f.name, value)[0]
            elif f.type is bool:
                value = bool(value)
            values[f.name] = value
        if "q" in data:
            if "p" not in values:
                raise ConfigError("Invalid field 'q': requires p")
            values["b"] = prime_power_exponent(values["p"], int(data["q"]))
        config = cls(**values)
        config.validate()
        return config

    @classmethod
    def resolve(
        cls,
        settings: Mapping[str, Any],
        flags: Mapping[str, Any],
        file_values: Optional[Mapping[str, Any]] = None,
    ) -> "JobConfig":
        """Persisted settings < command-line flags < job file"""
        merged: Dict[str, Any] = dict(settings)
        merged.update({k: v for k, v in flags.items() if v is not None})
        if file_values:
            merged.update(file_values)
        return cls.from_dict(merged)

    def validate(self):
        if self.command not in COMMANDS:
            raise ConfigError(f"Invalid field 'command': {self.command!r}")
        needs_field = self.command in ("polygon", "lfun", "cfun-dwork")
        if needs_field:
            if self.p is None or self.d is None:
                raise ConfigError("Invalid field 'p'/'d': both are required")
            if self.p < 2:
                raise ConfigError(f"Invalid field 'p': {self.p}")
            if self.d < 1:
                raise ConfigError(f"Invalid field 'd': {self.d}")
            if self.k is not None and not 1 <= self.k <= self.d - 1:
                raise ConfigError(f"Invalid field 'k': {self.k} outside [1, d-1]")
        if self.b < 1:
            raise ConfigError(f"Invalid field 'b': {self.b}")
        if needs_field:
            self.validate_field()
        if self.command == "polygon":
            if self.kind not in POLYGON_KINDS:
                raise ConfigError(f"Invalid field 'kind': {self.kind!r}")
            if self.kind == "arith-dk" and self.k is None:
                raise ConfigError("Invalid field 'k': required for arith-dk")
        if self.command in ("lfun", "cfun-dwork") and not self.coeffs:
            raise ConfigError("Invalid field 'coeffs': the polynomial is required")
        if self.command == "verify" and self.suite not in SUITES:
            raise ConfigError(f"Invalid field 'suite': {self.suite!r}")
        for name in ("K", "guard_terms", "max_rounds", "enumeration_guard", "workers"):
            if getattr(self, name) < 1:
                raise ConfigError(f"Invalid field '{name}': must be positive")
        if self.m < 1:
            raise ConfigError(f"Invalid field 'm': {self.m}")
        if self.M < 0 or self.points < 0:
            raise ConfigError("Invalid field 'M'/'points': must be non-negative")

    def validate_field(self):
        """Build F_q once so a bad modulus or generator is a config error"""
        try:
            build_field(self.p, self.b, self.modulus)
        except FieldError as e:
            raise ConfigError(f"Invalid field 'p'/'modulus': {e}")
        if self.generator is None:
            return
        try:
            build_field(self.p, self.b, self.modulus, self.generator)
        except (FieldError, ValueError) as e:
            raise ConfigError(f"Invalid field 'generator': {e}")

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["grid"] = self.grid.to_dict()
        if self.modulus is not None:
            data["modulus"] = list(self.modulus)
        return data
