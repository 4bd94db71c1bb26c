"""Experiment configuration: sectioned ``key=value`` text with a JSON mirror.

Example::

    [experiment]
    kind = estimate
    n = 12
    m = 14
    seed = 7

    [noise]
    e1 = 0.0016
    e2 = 0.0062
    eq = 0.038

Keys appearing before any section header are accepted when the key name is
unambiguous.  Unknown keys and sections are rejected with their line number.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import dataclass
from typing import Any, Callable

from .circuit import MAX_QUBITS, GateConfig
from .errors import ConfigError, ParseError, ResourceError

KINDS = (
    "simulate",
    "sample",
    "noisy-sample",
    "estimate",
    "predict",
    "walsh",
    "correlation-scan",
    "match-sample",
    "match-test",
)
ESTIMATORS = ("XEB", "V", "MLE")


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(x) for x in text.split(",") if x.strip())


def _ints(text: str) -> tuple[int, ...]:
    return tuple(int(x) for x in text.split(",") if x.strip())


def _strs(text: str) -> tuple[str, ...]:
    return tuple(x.strip() for x in text.split(",") if x.strip())


def _opt_str(text: str) -> str | None:
    return text or None


# section -> key -> (dataclass field, parser)
SCHEMA: dict[str, dict[str, tuple[str, Callable[[str], Any]]]] = {
    "experiment": {
        "kind": ("kind", str),
        "n": ("n", int),
        "m": ("m", int),
        "seed": ("seed", int),
        "samples": ("samples", int),
        "circuits": ("circuits", int),
        "fidelity": ("fidelity", float),
        "one_qubit": ("one_qubit", str),
        "two_qubit": ("two_qubit", str),
        "ns": ("ns", _ints),
        "degree": ("degree", int),
        "input": ("input", _opt_str),
        "circuit": ("circuit", _opt_str),
    },
    "noise": {
        "e1": ("e1", _floats),
        "e2": ("e2", _floats),
        "eq": ("eq", _floats),
        "t": ("t", _floats),
    },
    "estimator": {"kinds": ("estimators", _strs)},
    "matching": {
        "graph": ("graph", _opt_str),
        "prime": ("prime", int),
        "repetitions": ("repetitions", int),
    },
    "output": {"dir": ("out", _opt_str), "threads": ("threads", int)},
}

# fields that do not influence results and are left out of the config hash
_VOLATILE = ("out", "threads")


@dataclass(frozen=True)
class ExperimentConfig:
    kind: str = "simulate"
    n: int = 4
    m: int = 4
    seed: int = 0
    samples: int = 1000
    circuits: int = 1
    fidelity: float = 1.0
    one_qubit: str = "haar"
    two_qubit: str = "iswap"
    ns: tuple[int, ...] = (8, 10, 12)
    degree: int = -1
    input: str | None = None
    circuit: str | None = None
    e1: tuple[float, ...] = (0.0,)
    e2: tuple[float, ...] = (0.0,)
    eq: tuple[float, ...] = (0.0,)
    t: tuple[float, ...] = (0.1,)
    estimators: tuple[str, ...] = ESTIMATORS
    graph: str | None = None
    prime: int = 2**31 - 1
    repetitions: int = 10
    out: str | None = None
    threads: int = 1

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"unknown experiment kind {self.kind!r}; expected one of {KINDS}")
        bad = [e for e in self.estimators if e not in ESTIMATORS]
        if bad:
            raise ConfigError(f"unknown estimator(s) {bad}; expected a subset of {ESTIMATORS}")
        if self.samples < 1 or self.circuits < 1 or self.repetitions < 1 or self.threads < 1:
            raise ConfigError("samples, circuits, repetitions and threads must be positive")
        if not 0.0 <= self.fidelity <= 1.0:
            raise ConfigError(f"fidelity {self.fidelity} outside [0, 1]")
        if self.n < 1 or self.m < 0:
            raise ConfigError(f"need n >= 1 and m >= 0, got n={self.n} m={self.m}")
        GateConfig(self.one_qubit, self.two_qubit)

    @property
    def gate_config(self) -> GateConfig:
        return GateConfig(self.one_qubit, self.two_qubit)

    def replace(self, **changes) -> "ExperimentConfig":
        return dataclasses.replace(self, **changes)

    def needs_statevector(self) -> bool:
        return self.kind in ("simulate", "sample", "noisy-sample", "estimate", "walsh")

    def check_caps(self):
        if self.needs_statevector() and self.n > MAX_QUBITS:
            raise ResourceError(f"n={self.n} exceeds the statevector cap of {MAX_QUBITS}")
        if self.kind == "correlation-scan" and max(self.ns) > MAX_QUBITS:
            raise ResourceError(f"scan sizes {self.ns} exceed the statevector cap of {MAX_QUBITS}")

    # -- serialization --------------------------------------------------------

    def sections(self) -> dict[str, dict[str, Any]]:
        out: dict[str, dict[str, Any]] = {}
        for section, keys in SCHEMA.items():
            out[section] = {key: getattr(self, fname) for key, (fname, _) in keys.items()}
        return out

    def to_text(self) -> str:
        lines = []
        for section, values in self.sections().items():
            lines.append(f"[{section}]")
            for key, value in values.items():
                lines.append(f"{key} = {_render(value)}")
            lines.append("")
        return "\n".join(lines)

    def to_json(self) -> str:
        return json.dumps(self.sections(), indent=2, sort_keys=True)

    def hash(self) -> str:
        body = {k: v for k, v in dataclasses.asdict(self).items() if k not in _VOLATILE}
        canon = json.dumps(body, sort_keys=True, default=list)
        return hashlib.sha256(canon.encode()).hexdigest()

    @property
    def experiment_id(self) -> str:
        return f"{self.kind}-{self.hash()[:12]}"


def _render(value) -> str:
    if value is None:
        return ""
    if isinstance(value, tuple):
        return ",".join(_render(v) for v in value)
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


_KEY_OWNER: dict[str, str] = {}
for _section, _keys in SCHEMA.items():
    for _key in _keys:
        _KEY_OWNER[_key] = _section


def _apply(values: dict[str, Any], section: str, key: str, raw: str, line: int | None):
    if section not in SCHEMA:
        raise ParseError(f"unknown section [{section}]", line=line)
    if key not in SCHEMA[section]:
        raise ParseError(f"unknown key in [{section}]", line=line, field=key)
    fname, parse = SCHEMA[section][key]
    try:
        values[fname] = parse(raw.strip())
    except ValueError as exc:
        raise ParseError(f"cannot parse value {raw.strip()!r}: {exc}", line=line, field=key) from None


def _build(values: dict[str, Any], line: int | None = None) -> ExperimentConfig:
    try:
        return ExperimentConfig(**values)
    except ConfigError as exc:
        raise ParseError(str(exc), line=line) from None


def parse_config(text: str, base: ExperimentConfig | None = None) -> ExperimentConfig:
    """Parse sectioned key=value text (or its JSON mirror)."""
    if text.lstrip().startswith("{"):
        return parse_json(text, base)
    values = dataclasses.asdict(base) if base else {}
    section = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                raise ParseError("unterminated section header", line=lineno)
            section = line[1:-1].strip()
            if section not in SCHEMA:
                raise ParseError(f"unknown section [{section}]", line=lineno)
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ParseError("expected key = value", line=lineno)
        key = key.strip()
        owner = section or _KEY_OWNER.get(key)
        if owner is None:
            raise ParseError("unknown key", line=lineno, field=key)
        _apply(values, owner, key, value, lineno)
    return _build(values)


def parse_json(text: str, base: ExperimentConfig | None = None) -> ExperimentConfig:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg}", line=exc.lineno) from None
    if not isinstance(doc, dict):
        raise ParseError("JSON config must be an object")
    values = dataclasses.asdict(base) if base else {}
    for section, body in doc.items():
        if not isinstance(body, dict):
            raise ParseError(f"section {section!r} must be an object", field=section)
        for key, value in body.items():
            _apply(values, section, key, _render(tuple(value) if isinstance(value, list) else value), None)
    return _build(values)


def apply_overrides(config: ExperimentConfig, pairs: list[str]) -> ExperimentConfig:
    """Apply ``key=value`` overrides (``section.key=value`` also accepted)."""
    values = dataclasses.asdict(config)
    for pair in pairs:
        key, sep, value = pair.partition("=")
        if not sep:
            raise ParseError(f"override {pair!r} is not key=value")
        section, dot, name = key.partition(".")
        if not dot:
            name, section = key, _KEY_OWNER.get(key)
            if section is None:
                raise ParseError("unknown key", field=key)
        _apply(values, section, name.strip(), value, None)
    return _build(values)
