"""Dense statevector simulation, exact output distributions and sampling.

Bitstring convention: qubit 0 is the leftmost character and the most
significant bit of the integer index, so index ``x`` of a probability
vector is the bitstring ``format(x, f"0{n}b")``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

import numpy as np
from scipy import stats

from . import _kernels
from . import rng as _rng
from .circuit import MAX_QUBITS, GateSpec, RandomCircuit
from .errors import DomainError, ParseError, ResourceError

NORM_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class StateVector:
    n: int
    amplitudes: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.amplitudes, dtype=complex)
        if a.shape != (2**self.n,):
            raise DomainError(f"expected {2**self.n} amplitudes, got shape {a.shape}")
        if abs(np.vdot(a, a).real - 1.0) > NORM_TOL:
            raise DomainError("statevector is not normalized within 1e-10")
        object.__setattr__(self, "amplitudes", a)

    @classmethod
    def zero(cls, n: int) -> "StateVector":
        a = np.zeros(2**n, dtype=complex)
        a[0] = 1.0
        return cls(n, a)

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2


@dataclass(frozen=True, eq=False)
class OutputDistribution:
    n: int
    probabilities: np.ndarray

    def __post_init__(self):
        p = np.array(self.probabilities, dtype=float)
        if p.shape != (2**self.n,):
            raise DomainError(f"expected {2**self.n} probabilities, got shape {p.shape}")
        if (p < 0).any():
            raise DomainError("probabilities must be nonnegative")
        if abs(p.sum() - 1.0) > NORM_TOL:
            raise DomainError(f"probabilities sum to {p.sum()!r}, not 1")
        p.setflags(write=False)
        object.__setattr__(self, "probabilities", p)

    @classmethod
    def uniform(cls, n: int) -> "OutputDistribution":
        return cls(n, np.full(2**n, 2.0**-n))

    @classmethod
    def point_mass(cls, n: int, x: int = 0) -> "OutputDistribution":
        p = np.zeros(2**n)
        p[x] = 1.0
        return cls(n, p)

    @classmethod
    def from_values(cls, n: int, values) -> "OutputDistribution":
        """Clip tiny negative round-off and renormalize before validating."""
        p = np.clip(np.asarray(values, dtype=float), 0.0, None)
        return cls(n, p / p.sum())

    def __len__(self):
        return self.probabilities.size


@dataclass(frozen=True, eq=False)
class SampleSet:
    """Ordered samples stored as integer bitstring indices."""

    n: int
    indices: np.ndarray
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        idx = np.asarray(self.indices, dtype=np.int64)
        if idx.ndim != 1:
            raise DomainError("sample indices must be one-dimensional")
        if idx.size and (idx.min() < 0 or idx.max() >= 2**self.n):
            raise DomainError(f"sample index outside [0, 2^{self.n})")
        idx.setflags(write=False)
        object.__setattr__(self, "indices", idx)

    def __len__(self):
        return self.indices.size

    def bits(self) -> np.ndarray:
        """``(k, n)`` uint8 matrix, column 0 is qubit 0."""
        shifts = np.arange(self.n - 1, -1, -1)
        return ((self.indices[:, None] >> shifts) & 1).astype(np.uint8)

    def bitstrings(self) -> list[str]:
        return [format(int(x), f"0{self.n}b") for x in self.indices]


# -- gate kernels -------------------------------------------------------------


def apply_gate_inplace(batch: np.ndarray, gate: GateSpec, n: int) -> None:
    """Apply ``gate`` to every row of a C-contiguous ``(batch, 2**n)`` array."""
    if gate.arity == 1:
        _kernels.apply_1q_inplace(batch, gate.unitary, gate.qubits[0], n)
    else:
        _kernels.apply_2q_inplace(batch, gate.unitary, gate.qubits[0], gate.qubits[1], n)


def apply_gate(psi: np.ndarray, gate: GateSpec, n: int) -> np.ndarray:
    out = np.array(psi, dtype=complex, order="C").reshape(-1, 2**n)
    apply_gate_inplace(out, gate, n)
    return out.reshape(np.shape(psi))


def evolve(state: StateVector, gates: Iterable[GateSpec]) -> StateVector:
    psi = state.amplitudes.copy().reshape(1, -1)
    for g in gates:
        apply_gate_inplace(psi, g, state.n)
    return StateVector(state.n, psi[0])


def _check_cap(n: int, cap: int):
    if n > cap:
        raise ResourceError(f"n={n} exceeds the statevector cap of {cap} qubits")


def final_state(circuit: RandomCircuit, cap: int = MAX_QUBITS) -> StateVector:
    _check_cap(circuit.n, cap)
    return evolve(StateVector.zero(circuit.n), circuit.gates)


def simulate(circuit: RandomCircuit, cap: int = MAX_QUBITS) -> OutputDistribution:
    """Exact ideal output distribution of ``circuit`` (Born rule)."""
    p = final_state(circuit, cap).probabilities()
    return OutputDistribution(circuit.n, p / p.sum())


def sample(dist: OutputDistribution, k: int, seed: int, provenance: dict | None = None) -> SampleSet:
    """``k`` i.i.d. draws by inverse CDF over the cumulative probabilities."""
    if k < 1:
        raise DomainError(f"sample count must be >= 1, got {k}")
    gen = _rng.stream(seed, _rng.SAMPLE)
    cum = np.cumsum(dist.probabilities)
    u = gen.random(k) * cum[-1]
    idx = np.searchsorted(cum, u, side="right")
    np.minimum(idx, cum.size - 1, out=idx)
    meta = {"seed": int(seed)}
    meta.update(provenance or {})
    return SampleSet(dist.n, idx, meta)


@dataclass(frozen=True)
class PorterThomasDiagnostics:
    first_moment: float
    second_moment: float
    ks_distance: float


def porter_thomas_diagnostics(dist: OutputDistribution) -> PorterThomasDiagnostics:
    """Moments and KS distance of ``{2^n D(x)}`` (x uniform) against Exp(1)."""
    z = dist.probabilities * 2.0**dist.n
    ks = stats.kstest(z, lambda v: -np.expm1(-v)).statistic
    return PorterThomasDiagnostics(float(z.mean()), float(np.mean(z * z)), float(ks))


# -- sample archive -------------------------------------------------------------


def dump_samples(samples: SampleSet) -> str:
    return f"n={samples.n}\n" + "".join(s + "\n" for s in samples.bitstrings())


def load_samples(text: str) -> SampleSet:
    lines = text.splitlines()
    if not lines or not lines[0].startswith("n="):
        raise ParseError("sample archive must start with 'n=<int>'", line=1)
    try:
        n = int(lines[0][2:])
    except ValueError:
        raise ParseError("bad qubit count", line=1, field="n") from None
    idx = np.empty(len(lines) - 1, dtype=np.int64)
    for i, line in enumerate(lines[1:]):
        if len(line) != n or set(line) - {"0", "1"}:
            raise ParseError(f"bitstring must be {n} characters of 0/1", line=i + 2)
        idx[i] = int(line, 2)
    return SampleSet(n, idx)
