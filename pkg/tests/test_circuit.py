import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from noisyrcs import GateConfig, GateSpec, gate_counts, generate_random_circuit
from noisyrcs.circuit import dumps, haar_unitary, loads, pair_layer
from noisyrcs.errors import BoundsError, ConfigError, ParseError


@pytest.mark.parametrize("n,m,g1,g2_max", [(53, 20, 1113, 530), (53, 14, 795, 371), (12, 14, 180, 84), (1, 0, 1, 0)])
def test_gate_counts(n, m, g1, g2_max):
    c = generate_random_circuit(n, m, seed=11)
    got1, got2 = gate_counts(c)
    assert got1 == g1
    assert got2 <= g2_max
    assert got2 == sum(len(pair_layer(n, k)) for k in range(m))


@given(n=st.integers(1, 30), m=st.integers(0, 12))
@settings(max_examples=40, deadline=None)
def test_one_qubit_count_is_n_times_m_plus_one(n, m):
    c = generate_random_circuit(n, m, seed=n * 100 + m)
    assert len(c.one_qubit_gates) == n * (m + 1)
    assert len(c.two_qubit_gates) == sum(len(pair_layer(n, k)) for k in range(m))


def test_pair_layers_alternate_and_are_disjoint():
    assert pair_layer(6, 0) == [(0, 1), (2, 3), (4, 5)]
    assert pair_layer(6, 1) == [(1, 2), (3, 4)]
    for n in range(1, 12):
        for k in range(2):
            flat = [q for p in pair_layer(n, k) for q in p]
            assert len(flat) == len(set(flat))


def test_deterministic_in_seed():
    a = generate_random_circuit(12, 14, 7)
    b = generate_random_circuit(12, 14, 7)
    assert dumps(a) == dumps(b)
    assert dumps(a) != dumps(generate_random_circuit(12, 14, 8))


def test_prefix_stable_when_depth_grows():
    short = list(generate_random_circuit(6, 4, 3).gates)
    longer = list(generate_random_circuit(6, 8, 3).gates)
    assert all(x == y for x, y in zip(short[:-6], longer))


def test_haar_unitaries_are_unitary_and_spread():
    gen = np.random.default_rng(0)
    us = [haar_unitary(2, gen) for _ in range(2000)]
    for u in us[:50]:
        np.testing.assert_allclose(u @ u.conj().T, np.eye(2), atol=1e-12)
    # E|U_00|^2 = 1/2 under the Haar measure
    assert abs(np.mean([abs(u[0, 0]) ** 2 for u in us]) - 0.5) < 0.02


def test_serialization_round_trip():
    c = generate_random_circuit(5, 6, 99, GateConfig(two_qubit="cz"))
    back = loads(dumps(c))
    assert (back.n, back.m, back.seed, back.config) == (c.n, c.m, c.seed, c.config)
    assert all(x == y for x, y in zip(back.gates, c.gates))
    assert len(back.layers) == len(c.layers)
    assert dumps(back) == dumps(c)


def test_inverse_gates_are_daggers_in_reverse():
    c = generate_random_circuit(3, 2, 1)
    inv = c.inverse_gates()
    fwd = list(c.gates)
    assert len(inv) == len(fwd)
    np.testing.assert_allclose(inv[0].unitary, fwd[-1].unitary.conj().T)


@pytest.mark.parametrize("n,m", [(0, 2), (-1, 2), (4, -2), (2000, 2), (2.5, 2)])
def test_bounds(n, m):
    with pytest.raises(BoundsError):
        generate_random_circuit(n, m, 0)


def test_bad_gate_config():
    with pytest.raises(ConfigError):
        GateConfig(two_qubit="toffoli")
    with pytest.raises(ConfigError):
        generate_random_circuit(3, 2, 0, gate_config="cz")


def test_gate_spec_validation():
    with pytest.raises(ConfigError):
        GateSpec((0,), np.array([[1, 1], [0, 1]]))
    with pytest.raises(ConfigError):
        GateSpec((1, 1), np.eye(4))
    with pytest.raises(ConfigError):
        GateSpec((0,), np.eye(4))


@pytest.mark.parametrize(
    "text,line",
    [
        ("", 1),
        ("n=2 m=0\n", 1),
        ("n=2 m=0 seed=0\nG1 q=0 U=1 0 0 0 0 0 1\n", 2),
        ("n=2 m=0 seed=0\nG1 q=5 U=1 0 0 0 0 0 1 0\n", 2),
        ("n=2 m=0 seed=0\nG3 q=0 U=1\n", 2),
    ],
)
def test_parse_errors_carry_line(text, line):
    with pytest.raises(ParseError) as info:
        loads(text)
    assert info.value.line == line
