import itertools

import numpy as np
import pytest
from scipy import stats

from noisyrcs import (
    GateConfig,
    NoiseModel,
    ToyChannelSpec,
    bitflip_channel,
    f_xeb,
    generate_random_circuit,
    general_channel,
    mix_with_uniform,
    noisy_sampler,
    readout_channel,
    simulate,
    three_part_model,
)
from noisyrcs.errors import ConfigError, DomainError, ResourceError
from noisyrcs.noise import (
    convolve,
    convolve_direct,
    flip_law,
    product_law,
    success_probability,
    three_part_weights,
)
from noisyrcs.simulator import OutputDistribution

P0 = OutputDistribution.point_mass(2)


def _random(n, gen):
    p = gen.exponential(size=2**n)
    return OutputDistribution(n, p / p.sum())


def _chi2_pvalue(indices, probs):
    counts = np.bincount(indices, minlength=probs.size)
    keep = probs > 0
    assert counts[~keep].sum() == 0
    return stats.chisquare(counts[keep], probs[keep] * len(indices)).pvalue


def test_mix_examples(dist8):
    np.testing.assert_allclose(mix_with_uniform(P0, 0.5).probabilities, [0.625, 0.125, 0.125, 0.125])
    np.testing.assert_allclose(mix_with_uniform(dist8, 1.0).probabilities, dist8.probabilities, atol=1e-15)
    np.testing.assert_allclose(mix_with_uniform(dist8, 0.0).probabilities, 2.0**-8)
    with pytest.raises(DomainError):
        mix_with_uniform(dist8, 1.5)


def test_bitflip_examples(dist8):
    np.testing.assert_allclose(bitflip_channel(OutputDistribution.point_mass(1), 0.1).probabilities, [0.9, 0.1])
    np.testing.assert_allclose(bitflip_channel(dist8, 0.0).probabilities, dist8.probabilities, atol=1e-15)
    np.testing.assert_allclose(bitflip_channel(dist8, 0.5).probabilities, 2.0**-8, atol=1e-15)
    with pytest.raises(DomainError):
        bitflip_channel(dist8, -0.1)


def test_bitflip_matches_brute_force_sum(gen):
    n, t = 4, 0.17
    D = _random(n, gen)
    want = np.zeros(16)
    for x, y in itertools.product(range(16), repeat=2):
        k = bin(y).count("1")
        want[x ^ y] += D.probabilities[x] * t**k * (1 - t) ** (n - k)
    np.testing.assert_allclose(bitflip_channel(D, t).probabilities, want, atol=1e-15)


def test_bitflip_semigroup(gen):
    D = _random(7, gen)
    s, t = 0.05, 0.2
    twice = bitflip_channel(bitflip_channel(D, s), t)
    once = bitflip_channel(D, s + t - 2 * s * t)
    np.testing.assert_allclose(twice.probabilities, once.probabilities, atol=1e-14)


def test_spectral_route_above_direct_threshold(gen):
    D = _random(13, gen)
    law = flip_law(13, 0.08)
    np.testing.assert_allclose(convolve(D.probabilities, law), convolve_direct(D.probabilities, law), atol=1e-15)
    assert abs(bitflip_channel(D, 0.08).probabilities.sum() - 1) < 1e-12


def test_general_channel(gen, dist8):
    np.testing.assert_allclose(
        general_channel(dist8, ToyChannelSpec(law=OutputDistribution.point_mass(8).probabilities)).probabilities,
        dist8.probabilities,
        atol=1e-15,
    )
    np.testing.assert_allclose(
        general_channel(dist8, ToyChannelSpec(t=0.12)).probabilities,
        bitflip_channel(dist8, 0.12).probabilities,
        atol=1e-12,
    )
    half = general_channel(dist8, ToyChannelSpec(mixture=((0.5, 0.0), (0.5, 0.5))))
    np.testing.assert_allclose(half.probabilities, 0.5 * dist8.probabilities + 0.5 * 2.0**-8, atol=1e-12)


def test_general_channel_linear_in_law(gen):
    D = _random(5, gen)
    e1, e2 = _random(5, gen).probabilities, _random(5, gen).probabilities
    mixed = general_channel(D, ToyChannelSpec(law=0.3 * e1 + 0.7 * e2)).probabilities
    parts = 0.3 * general_channel(D, ToyChannelSpec(law=e1)).probabilities + 0.7 * general_channel(
        D, ToyChannelSpec(law=e2)
    ).probabilities
    np.testing.assert_allclose(mixed, parts, atol=1e-15)


def test_toy_spec_validation():
    with pytest.raises(ConfigError):
        ToyChannelSpec()
    with pytest.raises(ConfigError):
        ToyChannelSpec(t=0.1, mixture=((1.0, 0.1),))
    with pytest.raises(ConfigError):
        ToyChannelSpec(law=np.array([0.5, 0.6]))
    with pytest.raises(ConfigError):
        ToyChannelSpec(mixture=((0.5, 0.1),))
    with pytest.raises(ConfigError):
        ToyChannelSpec(law=np.array([0.5, 0.5])).error_law(3)


def test_readout_examples(dist8):
    np.testing.assert_allclose(readout_channel(P0, [0.1, 0.2]).probabilities, [0.72, 0.18, 0.08, 0.02])
    np.testing.assert_allclose(readout_channel(dist8, [0.0] * 8).probabilities, dist8.probabilities, atol=1e-15)
    np.testing.assert_allclose(
        readout_channel(dist8, [0.07] * 8).probabilities, bitflip_channel(dist8, 0.07).probabilities, atol=1e-14
    )


def test_product_law_bit_order():
    np.testing.assert_allclose(product_law([0.1, 0.2]), [0.72, 0.18, 0.08, 0.02])


def test_success_probability():
    assert success_probability([0.0] * 5) == 1.0
    assert success_probability([0.01] * 900) == pytest.approx(0.99**900, rel=1e-12)
    assert success_probability([0.5, 1.0]) == 0.0


def test_noise_model_text_round_trip(circuit12):
    m = NoiseModel(0.0016, 0.0062, 0.038)
    assert NoiseModel.from_text(m.to_text()).averaged == m.averaged
    r1, r2, rq = m.resolve(circuit12)
    assert (r1.size, r2.size, rq.size) == (180, len(circuit12.two_qubit_gates), 12)
    with pytest.raises(ConfigError):
        NoiseModel(0.1, 0.2, [0.1, 0.2]).resolve(circuit12)


def test_three_part_zero_rates(circuit12, dist12):
    out = three_part_model(dist12, NoiseModel(0, 0, 0), circuit12)
    np.testing.assert_allclose(out.probabilities, dist12.probabilities, atol=1e-15)


def test_three_part_readout_only(circuit12, dist12):
    out = three_part_model(dist12, NoiseModel(0, 0, 0.03), circuit12)
    np.testing.assert_allclose(out.probabilities, readout_channel(dist12, 0.03).probabilities, atol=1e-15)


def test_three_part_decomposition(circuit12, dist12):
    model = NoiseModel(0.0016, 0.0062, 0.038)
    w = three_part_weights(model, circuit12)
    law = product_law([0.038] * 12)
    assert w.F == pytest.approx(w.F_g * law[0], rel=1e-12)
    # readout-corrupted part, conditioned on at least one flip
    idx = np.arange(2**12)
    n_ro = sum(law[y] * dist12.probabilities[idx ^ y] for y in range(1, 2**12)) / (1 - law[0])
    want = w.F * dist12.probabilities + (w.F_g - w.F) * n_ro + (1 - w.F_g) * 2.0**-12
    np.testing.assert_allclose(three_part_model(dist12, model, circuit12).probabilities, want, atol=1e-15)


def test_noisy_sampler_zero_rates_follow_ideal():
    c = generate_random_circuit(4, 6, 1)
    D = simulate(c)
    s = noisy_sampler(c, NoiseModel(0, 0, 0), 40000, seed=2)
    assert _chi2_pvalue(s.indices, D.probabilities) > 0.001


def test_noisy_sampler_readout_only_follows_readout_channel():
    c = generate_random_circuit(4, 6, 1)
    want = readout_channel(simulate(c), [0.05, 0.1, 0.15, 0.2]).probabilities
    s = noisy_sampler(c, NoiseModel(0, 0, [0.05, 0.1, 0.15, 0.2]), 40000, seed=3)
    assert _chi2_pvalue(s.indices, want) > 0.001


def test_noisy_sampler_single_gate_depolarizes():
    c = generate_random_circuit(1, 0, 0, GateConfig(one_qubit="identity"))
    s = noisy_sampler(c, NoiseModel(1.0, 0, 0), 30000, seed=4)
    # a uniform non-identity Pauli on |0>: X and Y flip the bit, Z does not
    assert abs(np.mean(s.indices) - 2 / 3) < 0.02


def test_noisy_sampler_scrambled():
    c = generate_random_circuit(8, 20, 5)
    D = simulate(c)
    est = f_xeb(noisy_sampler(c, NoiseModel(0.0, 0.9, 0.0), 20000, seed=6), D)
    assert abs(est.value) < 3 * est.standard_error


def test_noisy_sampler_deterministic_and_capped():
    c = generate_random_circuit(6, 6, 1)
    m = NoiseModel(0.01, 0.05, 0.02)
    a = noisy_sampler(c, m, 2000, seed=9)
    np.testing.assert_array_equal(a.indices, noisy_sampler(c, m, 2000, seed=9).indices)
    with pytest.raises(ResourceError):
        noisy_sampler(c, m, 10, seed=0, cap=5)
    with pytest.raises(DomainError):
        noisy_sampler(c, m, 0, seed=0)
