import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from noisyrcs import (
    attenuate,
    bitflip_channel,
    degree_truncate,
    generate_random_circuit,
    inverse_walsh,
    noise_correlation,
    simulate,
    walsh_transform,
)
from noisyrcs.errors import DomainError, RepairError, UndefinedError
from noisyrcs.simulator import OutputDistribution
from noisyrcs.verify import walsh_direct
from noisyrcs.walsh import WalshSpectrum, read_spectrum_csv, spectrum_csv, subset_degrees, subset_mask


def test_constant_function():
    c = walsh_transform(np.ones(8)).coefficients
    assert c[0] == 1.0
    assert not c[1:].any()


def test_single_character():
    # n=2, f(x) = 1 - 2 x_1 with x_1 the first (most significant) bit
    f = np.array([1.0, 1.0, -1.0, -1.0])
    c = walsh_transform(f).coefficients
    S = subset_mask(2, [0])
    assert S == 0b10
    np.testing.assert_allclose(c, np.eye(4)[S], atol=1e-15)


def test_inverse_examples():
    np.testing.assert_allclose(inverse_walsh(WalshSpectrum(3, np.eye(8)[0])), np.ones(8))
    np.testing.assert_allclose(inverse_walsh(WalshSpectrum(2, np.eye(4)[0b11])), [1, -1, -1, 1])


@pytest.mark.parametrize("n", [1, 3, 6])
def test_matches_direct_oracle(n, gen):
    f = gen.standard_normal(2**n)
    np.testing.assert_allclose(walsh_transform(f).coefficients, walsh_direct(f), atol=1e-12)


@given(arrays(np.float64, st.sampled_from([2, 4, 8, 16, 32, 64]), elements=st.floats(-1e3, 1e3)))
@settings(max_examples=60, deadline=None)
def test_round_trip_and_parseval(f):
    spec = walsh_transform(f)
    np.testing.assert_allclose(inverse_walsh(spec), f, atol=1e-9)
    assert np.sum(spec.coefficients**2) == pytest.approx(np.mean(f**2), rel=1e-9, abs=1e-9)


def test_distribution_input(dist8):
    spec = walsh_transform(dist8)
    assert spec.coefficients[0] == pytest.approx(2.0**-8)


def test_rejects_non_power_of_two():
    with pytest.raises(DomainError):
        walsh_transform(np.ones(6))


def test_degrees():
    np.testing.assert_array_equal(subset_degrees(3), [0, 1, 1, 2, 1, 2, 2, 3])
    with pytest.raises(DomainError):
        subset_mask(3, [3])


def test_attenuate(dist8):
    spec = walsh_transform(dist8)
    np.testing.assert_array_equal(attenuate(spec, 0.0).coefficients, spec.coefficients)
    half = attenuate(spec, 0.5).coefficients
    assert half[0] == spec.coefficients[0]
    assert not half[1:].any()
    with pytest.raises(DomainError):
        attenuate(spec, 1.5)


def test_attenuate_equals_channel(dist8):
    for t in (0.01, 0.1, 0.3):
        np.testing.assert_allclose(
            inverse_walsh(attenuate(walsh_transform(dist8), t)), bitflip_channel(dist8, t).probabilities, atol=1e-15
        )


def test_weight_by_degree_sums_to_parseval(dist8):
    spec = walsh_transform(dist8)
    w = spec.weight_by_degree()
    assert w.size == 9
    assert w.sum() == pytest.approx(np.sum(spec.coefficients**2))


def test_degree_truncate_extremes(dist8):
    spec = walsh_transform(dist8)
    raw, repaired = degree_truncate(spec, 8)
    np.testing.assert_allclose(raw, dist8.probabilities, atol=1e-15)
    raw0, rep0 = degree_truncate(spec, 0)
    np.testing.assert_allclose(rep0.probabilities, 2.0**-8)


def test_degree_truncate_correlation(dist8):
    spec = walsh_transform(dist8)
    c2, deg = spec.coefficients**2, spec.degrees()
    predicted = np.sqrt(c2[(deg > 0) & (deg <= 3)].sum() / c2[deg > 0].sum())
    raw, repaired = degree_truncate(spec, 3)
    assert np.corrcoef(raw, dist8.probabilities)[0, 1] == pytest.approx(predicted, abs=1e-9)
    assert abs(np.corrcoef(repaired.probabilities, dist8.probabilities)[0, 1] - predicted) < 0.05


def test_degree_truncate_zero_mass():
    spec = WalshSpectrum(2, np.array([0.0, 0.0, 0.0, 0.25]))
    with pytest.raises(RepairError):
        degree_truncate(spec, 1)


def test_noise_correlation_endpoints(dist8):
    assert noise_correlation(dist8, 0.0) == pytest.approx(1.0, abs=1e-12)
    assert noise_correlation(dist8, 0.5) == 0.0
    with pytest.raises(UndefinedError):
        noise_correlation(OutputDistribution.uniform(5), 0.1)


def test_noise_correlation_is_pearson(dist8):
    for t in (0.05, 0.2):
        direct = np.corrcoef(dist8.probabilities, bitflip_channel(dist8, t).probabilities)[0, 1]
        assert noise_correlation(dist8, t) == pytest.approx(direct, abs=1e-12)


def test_noise_correlation_decreases_in_t():
    D = simulate(generate_random_circuit(8, 14, 1))
    vals = [noise_correlation(D, t) for t in (0.0, 0.05, 0.1, 0.2, 0.4, 0.5)]
    assert all(a > b for a, b in zip(vals, vals[1:]))


def test_spectrum_csv_round_trip(dist8):
    spec = walsh_transform(dist8)
    back = read_spectrum_csv(spectrum_csv(spec), 8)
    np.testing.assert_array_equal(back.coefficients, spec.coefficients)
