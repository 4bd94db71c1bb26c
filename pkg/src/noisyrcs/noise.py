"""Noise channels on explicit distributions and a Pauli error-injecting sampler.

Every channel here is a convolution over the XOR group,

    N(D)(x) = sum_y D(x ^ y) E(y),

for some error law ``E`` on bitstrings.  Up to ``DIRECT_MAX_QUBITS`` the sum
is evaluated directly in O(4^n); above it the Walsh convolution theorem is
used instead.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import rng as _rng
from .circuit import MAX_QUBITS, GateSpec, RandomCircuit, gate_counts
from .errors import ConfigError, DomainError, ParseError, ResourceError
from .simulator import OutputDistribution, SampleSet, apply_gate_inplace, simulate
from .walsh import WalshSpectrum, attenuate, inverse_walsh, subset_degrees, walsh_transform

DIRECT_MAX_QUBITS = 12
CHUNK = 4096

Rates = float | Sequence[float]


def _as_rates(value, name: str):
    if np.ndim(value) == 0:
        r = float(value)
        if not 0.0 <= r <= 1.0:
            raise DomainError(f"{name} rate {r} outside [0, 1]")
        return r
    arr = np.asarray(value, dtype=float)
    if arr.ndim != 1:
        raise ConfigError(f"{name} must be a scalar or a flat list of rates")
    if ((arr < 0) | (arr > 1)).any():
        raise DomainError(f"{name} contains a rate outside [0, 1]")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class NoiseModel:
    """Per-component error probabilities.

    Each field is either one averaged rate applied to every component, or
    an explicit list (one entry per one-qubit gate, two-qubit gate or qubit
    in circuit order).
    """

    e1: Rates = 0.0
    e2: Rates = 0.0
    eq: Rates = 0.0

    def __post_init__(self):
        for name in ("e1", "e2", "eq"):
            object.__setattr__(self, name, _as_rates(getattr(self, name), name))

    @property
    def averaged(self) -> tuple[float, float, float]:
        return tuple(float(np.mean(getattr(self, k))) for k in ("e1", "e2", "eq"))

    def resolve(self, circuit: RandomCircuit) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Expand to explicit (one-qubit, two-qubit, readout) rate arrays."""
        g1, g2 = gate_counts(circuit)
        out = []
        for name, size in (("e1", g1), ("e2", g2), ("eq", circuit.n)):
            v = getattr(self, name)
            if np.ndim(v) == 0:
                out.append(np.full(size, v))
            elif len(v) != size:
                raise ConfigError(f"{name} lists {len(v)} rates but the circuit needs {size}")
            else:
                out.append(np.asarray(v, dtype=float))
        return tuple(out)

    def gate_rates(self, circuit: RandomCircuit) -> np.ndarray:
        """Error rate of every gate in circuit order."""
        r1, r2, _ = self.resolve(circuit)
        it1, it2 = iter(r1), iter(r2)
        return np.array([next(it1) if g.arity == 1 else next(it2) for g in circuit.gates])

    def to_text(self) -> str:
        def fmt(v):
            if np.ndim(v) == 0:
                return format(v, ".17g")
            return ",".join(format(float(x), ".17g") for x in v)

        return f"e1={fmt(self.e1)} e2={fmt(self.e2)} eq={fmt(self.eq)}"

    @classmethod
    def from_text(cls, text: str) -> "NoiseModel":
        fields = {}
        for tok in text.split():
            key, sep, value = tok.partition("=")
            if not sep or key not in ("e1", "e2", "eq"):
                raise ParseError(f"bad noise token {tok!r}", field=key or tok)
            try:
                vals = [float(x) for x in value.split(",")]
            except ValueError:
                raise ParseError(f"bad rate list {value!r}", field=key) from None
            fields[key] = vals[0] if len(vals) == 1 and "," not in value else vals
        return cls(**fields)


def success_probability(*rate_groups) -> float:
    """prod (1 - r) over all rates, accumulated in log space."""
    total = 0.0
    for rates in rate_groups:
        r = np.asarray(rates, dtype=float)
        if (r >= 1.0).any():
            return 0.0
        total += float(np.sum(np.log1p(-r)))
    return float(np.exp(total))


@dataclass(frozen=True, eq=False)
class ToyChannelSpec:
    """Flip rate ``t``, an explicit error law ``E`` or a mixture of flip channels."""

    t: float | None = None
    law: np.ndarray | None = None
    mixture: tuple[tuple[float, float], ...] | None = None

    def __post_init__(self):
        given = [x is not None for x in (self.t, self.law, self.mixture)]
        if sum(given) != 1:
            raise ConfigError("exactly one of t, law, mixture must be given")
        if self.t is not None and not 0.0 <= self.t <= 1.0:
            raise ConfigError(f"flip rate {self.t} outside [0, 1]")
        if self.law is not None:
            law = np.asarray(self.law, dtype=float)
            n = law.size.bit_length() - 1
            if law.ndim != 1 or 2**n != law.size or (law < 0).any() or abs(law.sum() - 1) > 1e-12:
                raise ConfigError("error law must be a probability vector of length 2^n")
            object.__setattr__(self, "law", law)
        if self.mixture is not None:
            mix = tuple((float(w), float(t)) for w, t in self.mixture)
            if not mix:
                raise ConfigError("mixture needs at least one component")
            ws = np.array([w for w, _ in mix])
            if (ws < 0).any() or abs(ws.sum() - 1) > 1e-12:
                raise ConfigError("mixture weights must be nonnegative and sum to 1")
            if any(not 0.0 <= t <= 1.0 for _, t in mix):
                raise ConfigError("mixture flip rates must lie in [0, 1]")
            object.__setattr__(self, "mixture", mix)

    def error_law(self, n: int) -> np.ndarray:
        if self.law is not None:
            if self.law.size != 2**n:
                raise ConfigError(f"error law has {self.law.size} entries, need {2**n}")
            return self.law
        if self.t is not None:
            return flip_law(n, self.t)
        return sum(w * flip_law(n, t) for w, t in self.mixture)


def flip_law(n: int, t: float) -> np.ndarray:
    """B_t(y) = t^|y| (1 - t)^(n - |y|)."""
    k = subset_degrees(n).astype(float)
    return t**k * (1.0 - t) ** (n - k)


def product_law(rates) -> np.ndarray:
    """Independent per-qubit flips; qubit 0 is the most significant bit."""
    law = np.ones(1)
    for e in rates:
        law = np.kron(law, [1.0 - e, e])
    return law


def convolve(dist: np.ndarray, law: np.ndarray) -> np.ndarray:
    n = dist.size.bit_length() - 1
    if n <= DIRECT_MAX_QUBITS:
        return convolve_direct(dist, law)
    spec = walsh_transform(dist)
    law_hat = walsh_transform(law).coefficients
    return inverse_walsh(WalshSpectrum(n, spec.coefficients * law_hat * 2.0**n))


def convolve_direct(dist: np.ndarray, law: np.ndarray) -> np.ndarray:
    idx = np.arange(dist.size)
    out = np.zeros(dist.size)
    for y in np.flatnonzero(law):
        out += law[y] * dist[idx ^ y]
    return out


def _check(dist: OutputDistribution):
    if not isinstance(dist, OutputDistribution):
        raise DomainError("expected an OutputDistribution")


def mix_with_uniform(dist: OutputDistribution, F: float) -> OutputDistribution:
    """F * dist + (1 - F) * uniform."""
    _check(dist)
    if not 0.0 <= F <= 1.0:
        raise DomainError(f"fidelity {F} outside [0, 1]")
    p = F * dist.probabilities + (1.0 - F) * 2.0**-dist.n
    return OutputDistribution.from_values(dist.n, p)


def bitflip_channel(dist: OutputDistribution, t: float) -> OutputDistribution:
    _check(dist)
    if not 0.0 <= t <= 1.0:
        raise DomainError(f"flip rate {t} outside [0, 1]")
    if dist.n <= DIRECT_MAX_QUBITS:
        p = convolve_direct(dist.probabilities, flip_law(dist.n, t))
    else:
        p = inverse_walsh(attenuate(walsh_transform(dist.probabilities), t))
    return OutputDistribution.from_values(dist.n, p)


def general_channel(dist: OutputDistribution, spec: ToyChannelSpec) -> OutputDistribution:
    _check(dist)
    if not isinstance(spec, ToyChannelSpec):
        raise ConfigError("spec must be a ToyChannelSpec")
    return OutputDistribution.from_values(dist.n, convolve(dist.probabilities, spec.error_law(dist.n)))


def readout_channel(dist: OutputDistribution, eq) -> OutputDistribution:
    """Independent per-qubit readout flips, including the no-error term."""
    _check(dist)
    eq = np.broadcast_to(np.asarray(eq, dtype=float), (dist.n,))
    if ((eq < 0) | (eq > 1)).any():
        raise DomainError("readout rates must lie in [0, 1]")
    return OutputDistribution.from_values(dist.n, convolve(dist.probabilities, product_law(eq)))


@dataclass(frozen=True)
class ThreePartWeights:
    F: float
    F_g: float


def three_part_weights(model: NoiseModel, circuit: RandomCircuit) -> ThreePartWeights:
    r1, r2, rq = model.resolve(circuit)
    F_g = success_probability(r1, r2)
    return ThreePartWeights(F=success_probability(r1, r2, rq), F_g=F_g)


def three_part_model(dist: OutputDistribution, model: NoiseModel, circuit: RandomCircuit) -> OutputDistribution:
    """F D + (F_g - F) N_RO + (1 - F_g) U.

    ``N_RO`` is the readout-convolved distribution restricted to y != 0 and
    normalized; with F = F_g * P(no readout error) the first two terms
    collapse to ``F_g * readout_channel(dist)``.
    """
    _check(dist)
    if dist.n != circuit.n:
        raise DomainError("distribution and circuit disagree on n")
    w = three_part_weights(model, circuit)
    _, _, rq = model.resolve(circuit)
    law = product_law(rq)
    p = w.F * dist.probabilities + (1.0 - w.F_g) * 2.0**-dist.n
    no_error = law[0]
    if no_error < 1.0:
        faulty = law.copy()
        faulty[0] = 0.0
        n_ro = convolve(dist.probabilities, faulty) / (1.0 - no_error)
        p = p + (w.F_g - w.F) * n_ro
    return OutputDistribution.from_values(dist.n, p)


# -- Monte-Carlo error injection ------------------------------------------------


def _apply_pauli(batch: np.ndarray, row: int, q: int, code: int, n: int):
    """In-place single-qubit Pauli on one row (1=X, 2=Y, 3=Z; Y up to phase)."""
    view = batch[row].reshape(2**q, 2, 2 ** (n - q - 1))
    if code in (2, 3):
        view[:, 1, :] *= -1
    if code in (1, 2):
        view[:] = view[:, ::-1, :].copy()


def _inject(batch: np.ndarray, row: int, code: int, gate: GateSpec, n: int):
    if gate.arity == 1:
        _apply_pauli(batch, row, gate.qubits[0], code, n)
        return
    q0, q1 = gate.qubits
    if code // 4:
        _apply_pauli(batch, row, q0, code // 4, n)
    if code % 4:
        _apply_pauli(batch, row, q1, code % 4, n)


def _draw_faults(circuit, model, k, seed):
    """Per-sample fault patterns, readout masks and sampling uniforms.

    A fault pattern is a tuple of (gate position, Pauli code) pairs; Pauli
    codes are 1..3 after one-qubit gates and 1..15 (two base-4 digits,
    not both zero) after two-qubit gates.
    """
    gates = list(circuit.gates)
    rates = model.gate_rates(circuit)
    _, _, rq = model.resolve(circuit)
    arity2 = np.array([g.arity == 2 for g in gates])
    flip_bits = 1 << np.arange(circuit.n - 1, -1, -1)
    patterns: list[tuple] = [()] * k
    masks = np.empty(k, dtype=np.int64)
    u = np.empty(k)
    for chunk, start in enumerate(range(0, k, CHUNK)):
        size = min(CHUNK, k - start)
        gen = _rng.stream(seed, _rng.NOISY, chunk)
        faults = gen.random((size, len(gates))) < rates
        codes = np.where(arity2, gen.integers(1, 16, size=(size, len(gates))), gen.integers(1, 4, size=(size, len(gates))))
        readout = gen.random((size, circuit.n)) < rq
        u[start : start + size] = gen.random(size)
        masks[start : start + size] = (readout * flip_bits).sum(axis=1)
        rows, cols = np.nonzero(faults)
        for r, c in zip(rows, cols):
            patterns[start + r] += ((int(c), int(codes[r, c])),)
    return patterns, masks, u


def _pattern_states(circuit: RandomCircuit, patterns: list[tuple]) -> np.ndarray:
    """Final states of all given fault patterns, simulated as one batch.

    Patterns are sorted by first fault; each row starts as a copy of the
    ideal state right after its first faulty gate, so the shared error-free
    prefix is only simulated once.
    """
    n = circuit.n
    gates = list(circuit.gates)
    order = sorted(range(len(patterns)), key=lambda i: patterns[i][0][0])
    firsts = [patterns[i][0][0] for i in order]
    batch = np.empty((len(patterns), 2**n), dtype=complex)
    ideal = np.zeros((1, 2**n), dtype=complex)
    ideal[0, 0] = 1.0
    by_gate: dict[int, list[tuple[int, int]]] = {}
    for row, i in enumerate(order):
        for p, code in patterns[i]:
            by_gate.setdefault(p, []).append((row, code))
    active = 0
    for p, gate in enumerate(gates):
        apply_gate_inplace(ideal, gate, n)
        if active:
            apply_gate_inplace(batch[:active], gate, n)
        while active < len(order) and firsts[active] == p:
            batch[active] = ideal[0]
            active += 1
        for row, code in by_gate.get(p, ()):
            _inject(batch, row, code, gate, n)
    out = np.empty_like(batch)
    out[order] = batch
    return out


def noisy_sampler(circuit: RandomCircuit, model: NoiseModel, k: int, seed: int, cap: int = MAX_QUBITS) -> SampleSet:
    """Trajectory sampling with random Pauli faults and readout flips.

    After each gate, with that gate's error probability, a uniformly random
    non-identity Pauli (3 choices for one-qubit gates, 15 for two-qubit
    gates) is applied to the gate's qubits.  Each measured bit is then
    flipped with its readout rate.

    Every sample is its own trajectory with its own uniform draw; samples
    whose fault patterns coincide share one statevector simulation.
    """
    n = circuit.n
    if n > cap:
        raise ResourceError(f"n={n} exceeds the statevector cap of {cap} qubits")
    if k < 1:
        raise DomainError(f"sample count must be >= 1, got {k}")
    patterns, masks, u = _draw_faults(circuit, model, k, seed)

    groups: dict[tuple, list[int]] = {}
    for i, pat in enumerate(patterns):
        groups.setdefault(pat, []).append(i)
    result = np.empty(k, dtype=np.int64)

    def draw(probs: np.ndarray, rows: list[int]):
        cum = np.cumsum(probs)
        idx = np.searchsorted(cum, u[rows] * cum[-1], side="right")
        result[rows] = np.minimum(idx, 2**n - 1)

    if () in groups:
        draw(simulate(circuit, cap).probabilities, groups.pop(()))
    keys = list(groups)
    for start in range(0, len(keys), CHUNK):
        block = keys[start : start + CHUNK]
        states = _pattern_states(circuit, block)
        for key, psi in zip(block, states):
            draw(np.abs(psi) ** 2, groups[key])

    result ^= masks
    return SampleSet(
        n,
        result,
        {"circuit": circuit.circuit_id, "noise": model.to_text(), "seed": int(seed)},
    )
