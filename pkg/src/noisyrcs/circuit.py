"""Seeded layered random circuits.

A circuit on ``n`` qubits with ``m`` cycles is built as::

    [1q layer] [2q layer]   x m
    [1q layer]              closing layer

so it always holds exactly ``n * (m + 1)`` one-qubit gates.  Two-qubit
layers couple nearest neighbours on a line, alternating between the pairs
(0,1),(2,3),... and (1,2),(3,4),...
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import rng as _rng
from .errors import BoundsError, ConfigError, ParseError

MAX_QUBITS = 24
MAX_GENERATE_QUBITS = 1024

ONE_QUBIT_KINDS = ("haar", "identity", "hadamard")
TWO_QUBIT_KINDS = ("cz", "identity", "iswap")
LAYOUTS = ("line",)

_H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
_CZ = np.diag([1, 1, 1, -1]).astype(complex)
_ISWAP = np.array([[1, 0, 0, 0], [0, 0, 1j, 0], [0, 1j, 0, 0], [0, 0, 0, 1]], dtype=complex)


def haar_unitary(dim: int, gen: np.random.Generator) -> np.ndarray:
    """Haar-distributed unitary via QR of a complex Ginibre matrix."""
    z = (gen.standard_normal((dim, dim)) + 1j * gen.standard_normal((dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


@dataclass(frozen=True, eq=False)
class GateSpec:
    qubits: tuple[int, ...]
    unitary: np.ndarray

    def __post_init__(self):
        k = len(self.qubits)
        if k not in (1, 2):
            raise ConfigError(f"gates act on 1 or 2 qubits, got {k}")
        if k == 2 and self.qubits[0] == self.qubits[1]:
            raise ConfigError(f"two-qubit gate on repeated qubit {self.qubits[0]}")
        u = np.asarray(self.unitary, dtype=complex)
        if u.shape != (2**k, 2**k):
            raise ConfigError(f"unitary shape {u.shape} does not match {k} qubit(s)")
        if not np.allclose(u @ u.conj().T, np.eye(2**k), atol=1e-12, rtol=0):
            raise ConfigError("gate matrix is not unitary within 1e-12")
        u.setflags(write=False)
        object.__setattr__(self, "unitary", u)

    @property
    def arity(self) -> int:
        return len(self.qubits)

    def __eq__(self, other):
        if not isinstance(other, GateSpec):
            return NotImplemented
        return self.qubits == other.qubits and np.array_equal(self.unitary, other.unitary)

    __hash__ = None

    def dagger(self) -> "GateSpec":
        return GateSpec(self.qubits, self.unitary.conj().T)


@dataclass(frozen=True)
class GateConfig:
    """Which gates to draw.  ``haar`` draws a fresh Haar unitary per gate."""

    one_qubit: str = "haar"
    two_qubit: str = "iswap"
    layout: str = "line"

    def __post_init__(self):
        if self.one_qubit not in ONE_QUBIT_KINDS:
            raise ConfigError(f"unknown one-qubit gate kind {self.one_qubit!r}; expected one of {ONE_QUBIT_KINDS}")
        if self.two_qubit not in TWO_QUBIT_KINDS:
            raise ConfigError(f"unknown two-qubit gate kind {self.two_qubit!r}; expected one of {TWO_QUBIT_KINDS}")
        if self.layout not in LAYOUTS:
            raise ConfigError(f"unknown layout {self.layout!r}; expected one of {LAYOUTS}")


@dataclass(frozen=True)
class RandomCircuit:
    n: int
    m: int
    seed: int
    layers: tuple[tuple[GateSpec, ...], ...]
    config: GateConfig = field(default_factory=GateConfig)

    @property
    def gates(self):
        for layer in self.layers:
            yield from layer

    @property
    def one_qubit_gates(self) -> list[GateSpec]:
        return [g for g in self.gates if g.arity == 1]

    @property
    def two_qubit_gates(self) -> list[GateSpec]:
        return [g for g in self.gates if g.arity == 2]

    @property
    def circuit_id(self) -> str:
        c = self.config
        return f"n{self.n}-m{self.m}-s{self.seed}-{c.one_qubit}-{c.two_qubit}-{c.layout}"

    def inverse_gates(self) -> list[GateSpec]:
        """Gate list undoing the circuit (reverse order, daggered)."""
        return [g.dagger() for g in reversed(list(self.gates))]

    def to_text(self) -> str:
        return dumps(self)


def pair_layer(n: int, cycle: int) -> list[tuple[int, int]]:
    start = cycle % 2
    return [(q, q + 1) for q in range(start, n - 1, 2)]


def _one_qubit(kind: str, gen: np.random.Generator) -> np.ndarray:
    if kind == "haar":
        return haar_unitary(2, gen)
    if kind == "hadamard":
        return _H
    return np.eye(2, dtype=complex)


def _two_qubit(kind: str) -> np.ndarray:
    if kind == "cz":
        return _CZ
    if kind == "iswap":
        return _ISWAP
    return np.eye(4, dtype=complex)


def generate_random_circuit(n: int, m: int, seed: int, gate_config: GateConfig | None = None) -> RandomCircuit:
    """Build the layered circuit for ``(n, m, seed, gate_config)``.

    Each layer draws from its own Philox stream, so changing ``m`` leaves
    the earlier layers untouched.
    """
    if gate_config is None:
        gate_config = GateConfig()
    if not isinstance(gate_config, GateConfig):
        raise ConfigError(f"gate_config must be a GateConfig, got {type(gate_config).__name__}")
    if not isinstance(n, (int, np.integer)) or not 1 <= n <= MAX_GENERATE_QUBITS:
        raise BoundsError(f"n must be an integer in [1, {MAX_GENERATE_QUBITS}], got {n!r}")
    if not isinstance(m, (int, np.integer)) or m < 0:
        raise BoundsError(f"m must be a nonnegative integer, got {m!r}")
    n, m, seed = int(n), int(m), int(seed)

    layers = []
    for cycle in range(m + 1):
        gen = _rng.stream(seed, _rng.CIRCUIT, cycle)
        layers.append(tuple(GateSpec((q,), _one_qubit(gate_config.one_qubit, gen)) for q in range(n)))
        if cycle < m:
            u2 = _two_qubit(gate_config.two_qubit)
            layers.append(tuple(GateSpec(p, u2) for p in pair_layer(n, cycle)))
    return RandomCircuit(n, m, seed, tuple(layers), gate_config)


def gate_counts(circuit: RandomCircuit) -> tuple[int, int]:
    g1 = g2 = 0
    for g in circuit.gates:
        if g.arity == 1:
            g1 += 1
        else:
            g2 += 1
    return g1, g2


# -- text serialization ------------------------------------------------------


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def dumps(circuit: RandomCircuit) -> str:
    c = circuit.config
    lines = [f"n={circuit.n} m={circuit.m} seed={circuit.seed}"]
    if c != GateConfig():
        lines[0] += f" one_qubit={c.one_qubit} two_qubit={c.two_qubit} layout={c.layout}"
    for g in circuit.gates:
        flat = g.unitary.reshape(-1)
        floats = " ".join(f"{_fmt(z.real)} {_fmt(z.imag)}" for z in flat)
        tag = "G1" if g.arity == 1 else "G2"
        lines.append(f"{tag} q={','.join(map(str, g.qubits))} U={floats}")
    return "\n".join(lines) + "\n"


def _kv(token: str, lineno: int) -> tuple[str, str]:
    key, sep, value = token.partition("=")
    if not sep:
        raise ParseError(f"expected key=value, got {token!r}", line=lineno)
    return key, value


def loads(text: str) -> RandomCircuit:
    """Parse the text format back into a circuit, regrouping layers.

    Consecutive gates are grouped by arity; this reproduces the layer
    structure written by :func:`dumps`.
    """
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ParseError("empty circuit file", line=1)
    header = dict(_kv(tok, 1) for tok in lines[0].split())
    try:
        n, m, seed = int(header.pop("n")), int(header.pop("m")), int(header.pop("seed"))
    except KeyError as exc:
        raise ParseError("header missing key", line=1, field=exc.args[0]) from None
    except ValueError as exc:
        raise ParseError(str(exc), line=1) from None
    try:
        config = GateConfig(**header)
    except TypeError as exc:
        raise ParseError(f"unknown header key: {exc}", line=1) from None

    layers: list[list[GateSpec]] = []
    for lineno, line in enumerate(lines[1:], start=2):
        parts = line.split()
        if len(parts) < 3 or parts[0] not in ("G1", "G2"):
            raise ParseError(f"malformed gate line {line[:40]!r}", line=lineno)
        arity = 1 if parts[0] == "G1" else 2
        key, qs = _kv(parts[1], lineno)
        key2, first = _kv(parts[2], lineno)
        if key != "q" or key2 != "U":
            raise ParseError("gate line must be 'Gk q=... U=...'", line=lineno)
        try:
            qubits = tuple(int(x) for x in qs.split(","))
            floats = np.array([float(first)] + [float(x) for x in parts[3:]])
        except ValueError as exc:
            raise ParseError(str(exc), line=lineno) from None
        dim = 2**arity
        if len(qubits) != arity or floats.size != 2 * dim * dim:
            raise ParseError(f"{parts[0]} needs {arity} qubit(s) and {2 * dim * dim} floats", line=lineno)
        if any(not 0 <= q < n for q in qubits):
            raise ParseError(f"qubit index out of range for n={n}", line=lineno, field="q")
        u = (floats[0::2] + 1j * floats[1::2]).reshape(dim, dim)
        gate = GateSpec(qubits, u)
        if layers and layers[-1][0].arity == arity and not any(
            set(qubits) & set(g.qubits) for g in layers[-1]
        ):
            layers[-1].append(gate)
        else:
            layers.append([gate])
    return RandomCircuit(n, m, seed, tuple(tuple(layer) for layer in layers), config)
