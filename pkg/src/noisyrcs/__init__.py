"""Simulator and statistics toolkit for noisy random circuit sampling."""

from .circuit import GateConfig, GateSpec, RandomCircuit, gate_counts, generate_random_circuit
from .matching import (
    BipartiteGraph,
    MultiSubset,
    count_semi_matchings,
    lovasz_matching_test,
    sample_semi_matching,
)
from .noise import (
    NoiseModel,
    ToyChannelSpec,
    bitflip_channel,
    general_channel,
    mix_with_uniform,
    noisy_sampler,
    readout_channel,
    three_part_model,
)
from .simulator import OutputDistribution, SampleSet, StateVector, porter_thomas_diagnostics, sample, simulate
from .walsh import WalshSpectrum, attenuate, degree_truncate, inverse_walsh, noise_correlation, walsh_transform
from .xeb import (
    FidelityEstimate,
    alpha,
    f_xeb,
    formula77,
    formula77_deviation,
    formula77_simplified,
    mle_estimator,
    size_biased_histogram,
    total_variance,
    v_estimator,
)

__version__ = "0.1.0"
