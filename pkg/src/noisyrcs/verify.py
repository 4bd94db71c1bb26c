"""Cross-checks of every fast path against an independent brute-force route.

Each check is a zero-argument callable returning ``(passed, detail)``.
Checks look functions up through their modules at call time so a patched
implementation is exercised rather than a captured reference.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import circuit as _circuit
from . import matching, noise, simulator, walsh, xeb
from . import rng as _rng

SEED = 20240101


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


def _gen(tag: int) -> np.random.Generator:
    return _rng.stream(SEED, tag)


def _random_dist(n: int, gen) -> simulator.OutputDistribution:
    p = gen.exponential(size=2**n)
    return simulator.OutputDistribution(n, p / p.sum())


def walsh_direct(f: np.ndarray) -> np.ndarray:
    """O(4^n) transform from the product definition of the Walsh characters."""
    size = f.size
    xs = np.arange(size)
    out = np.empty(size)
    for S in range(size):
        chars = 1.0 - 2.0 * (np.bitwise_count(xs & S) % 2)
        out[S] = np.dot(f, chars) / size
    return out


def check_walsh_direct():
    gen = _gen(1)
    err = 0.0
    for n in (1, 3, 5, 7):
        f = gen.standard_normal(2**n)
        err = max(err, float(np.abs(walsh.walsh_transform(f).coefficients - walsh_direct(f)).max()))
    return err < 1e-12, f"max |fast - direct| = {err:.2e}"


def check_walsh_roundtrip():
    gen = _gen(2)
    err = 0.0
    for n in range(1, 11):
        f = gen.standard_normal(2**n)
        err = max(err, float(np.abs(walsh.inverse_walsh(walsh.walsh_transform(f)) - f).max()))
    return err < 1e-12, f"max roundtrip error = {err:.2e}"


def check_parseval():
    gen = _gen(3)
    err = 0.0
    for n in range(1, 11):
        f = gen.standard_normal(2**n)
        c = walsh.walsh_transform(f).coefficients
        err = max(err, abs(float(np.sum(c * c)) - float(np.sum(f * f)) / 2**n))
    return err < 1e-10, f"max Parseval defect = {err:.2e}"


def check_channel_spectral():
    gen = _gen(4)
    err = 0.0
    for n in (2, 4, 6, 8):
        D = _random_dist(n, gen)
        for t in (0.01, 0.1, 0.3):
            direct = noise.bitflip_channel(D, t).probabilities
            spectral = walsh.inverse_walsh(walsh.attenuate(walsh.walsh_transform(D.probabilities), t))
            err = max(err, float(np.abs(direct - spectral).max()))
    return err < 1e-12, f"max |convolution - spectral| = {err:.2e}"


def check_channel_semigroup():
    gen = _gen(5)
    D = _random_dist(6, gen)
    s, t = 0.07, 0.21
    lhs = noise.bitflip_channel(noise.bitflip_channel(D, s), t).probabilities
    rhs = noise.bitflip_channel(D, s + t - 2 * s * t).probabilities
    err = float(np.abs(lhs - rhs).max())
    return err < 1e-12, f"semigroup defect = {err:.2e}"


def check_readout_product():
    gen = _gen(6)
    D = _random_dist(5, gen)
    rates = gen.uniform(0, 0.3, size=5)
    got = noise.readout_channel(D, rates).probabilities
    want = np.zeros(32)
    for x, y in itertools.product(range(32), repeat=2):
        w = 1.0
        for i in range(5):
            bit = (y >> (4 - i)) & 1
            w *= rates[i] if bit else 1 - rates[i]
        want[x] += D.probabilities[x ^ y] * w
    err = float(np.abs(got - want).max())
    return err < 1e-12, f"max |readout - explicit sum| = {err:.2e}"


def _dense(gate, n):
    """Full 2^n matrix of a gate, built entry by entry."""
    dim = 2**n
    M = np.zeros((dim, dim), dtype=complex)
    qs = gate.qubits
    for x in range(dim):
        bits = [(x >> (n - 1 - i)) & 1 for i in range(n)]
        col = int("".join(str(bits[q]) for q in qs), 2)
        for row in range(2 ** len(qs)):
            new = list(bits)
            for j, q in enumerate(qs):
                new[q] = (row >> (len(qs) - 1 - j)) & 1
            M[int("".join(map(str, new)), 2), x] += gate.unitary[row, col]
    return M


def check_kernels_dense():
    c = _circuit.generate_random_circuit(4, 4, SEED)
    psi = np.zeros(16, dtype=complex)
    psi[0] = 1
    for g in c.gates:
        psi = _dense(g, 4) @ psi
    err = float(np.abs(simulator.final_state(c).amplitudes - psi).max())
    return err < 1e-12, f"kernel vs dense-matrix state error = {err:.2e}"


def check_inverse_circuit():
    c = _circuit.generate_random_circuit(8, 10, SEED)
    st = simulator.evolve(simulator.final_state(c), c.inverse_gates())
    err = abs(1.0 - float(st.probabilities()[0]))
    return err < 1e-10, f"|1 - P(0^n)| after inverse = {err:.2e}"


def check_xeb_expectation():
    c = _circuit.generate_random_circuit(8, 8, SEED)
    D = simulator.simulate(c)
    a = xeb.alpha(D).alpha
    err = 0.0
    for F in (0.0, 0.25, 0.5, 1.0):
        mixed = noise.mix_with_uniform(D, F)
        err = max(err, abs(xeb.expected_scaled_probability(D, mixed) - (1 + a * F)))
    return err < 1e-12, f"max |E[2^n D] - (1 + alpha F)| = {err:.2e}"


def check_formula77():
    import mpmath

    mpmath.mp.dps = 50
    c = _circuit.generate_random_circuit(53, 20, SEED)
    model = noise.NoiseModel(0.0016, 0.0062, 0.038)
    g1, g2 = _circuit.gate_counts(c)
    want = mpmath.exp(g1 * mpmath.log(mpmath.mpf("0.9984")) + g2 * mpmath.log(mpmath.mpf("0.9938"))
                      + 53 * mpmath.log(mpmath.mpf("0.962")))
    got = xeb.formula77(model, c).value
    rel = abs(got - float(want)) / float(want)
    return rel < 1e-12, f"relative error vs 50-digit product = {rel:.2e}"


def check_total_variance():
    gen = _gen(7)
    err = 0.0
    for _ in range(20):
        groups = [gen.normal(gen.normal(), gen.uniform(0.1, 2), size=gen.integers(2, 30)) for _ in range(gen.integers(2, 8))]
        dec = xeb.total_variance(groups)
        err = max(err, abs(dec.total - float(np.var(np.concatenate(groups)))))
    return err < 1e-12, f"max |within + between - pooled var| = {err:.2e}"


def check_det_mod():
    gen = _gen(8)
    q = 10007
    for _ in range(20):
        n = int(gen.integers(1, 6))
        m = gen.integers(0, q, size=(n, n)).tolist()
        leibniz = 0
        for perm in itertools.permutations(range(n)):
            inversions = sum(perm[i] > perm[j] for i in range(n) for j in range(i + 1, n))
            leibniz += (-1) ** inversions * math.prod(m[i][perm[i]] for i in range(n))
        if matching.det_mod(m, q) != leibniz % q:
            return False, "elimination disagrees with the permutation expansion"
    return True, "elimination matches the permutation expansion on 20 matrices"


def check_semi_matching_exact():
    gen = _gen(9)
    for _ in range(30):
        na, nb = int(gen.integers(1, 5)), int(gen.integers(1, 5))
        g = matching.BipartiteGraph.random(na, nb, 0.6, gen)
        if any(not nbrs for nbrs in g.neighbors):
            continue
        denom = math.prod(len(nbrs) for nbrs in g.neighbors)
        for C, p in matching.semi_matching_distribution(g).items():
            if p != Fraction(matching.count_semi_matchings(g, C), denom):
                return False, f"probability mismatch on {g}"
    return True, "sampler law equals n(A,C)/prod|B_a| on 30 graphs"


def check_lovasz():
    gen = _gen(10)
    for i in range(60):
        n = int(gen.integers(1, 7))
        g = matching.BipartiteGraph.random(n, n, float(gen.uniform(0.15, 0.6)), gen)
        v = matching.lovasz_matching_test(g, seed=SEED + i)
        if v.perfect_matching != matching.has_perfect_matching(g):
            return False, f"verdict disagrees with augmenting paths on graph {i}"
    return True, "60 random graphs agree with augmenting-path matching"


CHECKS = {
    "walsh_fast_vs_direct": check_walsh_direct,
    "walsh_roundtrip": check_walsh_roundtrip,
    "walsh_parseval": check_parseval,
    "bitflip_convolution_vs_spectral": check_channel_spectral,
    "bitflip_semigroup": check_channel_semigroup,
    "readout_vs_explicit_sum": check_readout_product,
    "gate_kernels_vs_dense": check_kernels_dense,
    "circuit_then_inverse": check_inverse_circuit,
    "xeb_exact_expectation": check_xeb_expectation,
    "formula77_extended_precision": check_formula77,
    "total_variance_identity": check_total_variance,
    "det_mod_vs_leibniz": check_det_mod,
    "semi_matching_exact_law": check_semi_matching_exact,
    "lovasz_vs_augmenting_path": check_lovasz,
}


def verify_suite(checks: dict | None = None) -> list[CheckResult]:
    results = []
    for name, fn in (checks or CHECKS).items():
        try:
            passed, detail = fn()
        except Exception as exc:  # a crashing check is a failing check
            passed, detail = False, f"{type(exc).__name__}: {exc}"
        results.append(CheckResult(name, bool(passed), detail))
    return results


def format_report(results: list[CheckResult]) -> str:
    width = max(len(r.name) for r in results)
    lines = [f"{'PASS' if r.passed else 'FAIL'}  {r.name:<{width}}  {r.detail}" for r in results]
    failed = sum(not r.passed for r in results)
    lines.append(f"{len(results) - failed}/{len(results)} checks passed")
    return "\n".join(lines) + "\n"
