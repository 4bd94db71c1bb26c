"""Fidelity estimators and a priori fidelity prediction.

Three sample-based estimators are provided for samples assumed to come
from the mixture ``F * D + (1 - F) * U``:

* ``f_xeb``: linear cross-entropy, ``2^n mean D(x_i) - 1``.  Its exact
  expectation for a fixed circuit is ``alpha * F`` with
  ``alpha = 2^n sum D^2 - 1``, so it is unbiased only on average over
  Porter-Thomas circuits (where alpha is 1).
* ``v_estimator``: the same statistic divided by ``alpha``; unbiased per circuit.
* ``mle_estimator``: maximizes the mixture log-likelihood in ``F``.

``formula77`` predicts the fidelity as a product of per-component success
probabilities.
"""

from __future__ import annotations

import csv
import enum
import io
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import stats

from .circuit import RandomCircuit, gate_counts
from .errors import DomainError, UndefinedError
from .noise import NoiseModel, success_probability
from .simulator import OutputDistribution, SampleSet

# averaged per-component error rates; the deviation rule uses the 0.0063 variant
GOOGLE_E1 = 0.0016
GOOGLE_E2 = 0.0062
GOOGLE_E2_ALT = 0.0063
GOOGLE_EQ = 0.038
GOOGLE_EQ_ALT = 0.036
GOOGLE_E2_DRESSED = 0.0093


class EstimatorKind(str, enum.Enum):
    XEB = "XEB"
    V = "V"
    MLE = "MLE"
    PREDICTED_77 = "PREDICTED_77"
    PREDICTED_77_AVG = "PREDICTED_77_AVG"


@dataclass(frozen=True)
class FidelityEstimate:
    value: float
    standard_error: float
    kind: EstimatorKind
    sample_count: int = 0
    flags: tuple[str, ...] = field(default=())

    def __post_init__(self):
        if not self.standard_error >= 0:
            raise DomainError("standard error must be nonnegative")


@dataclass(frozen=True)
class BiasConstant:
    alpha: float
    circuit_id: str = ""


def _values(samples: SampleSet, D: OutputDistribution) -> np.ndarray:
    if samples.n != D.n:
        raise DomainError(f"samples have n={samples.n} but the distribution has n={D.n}")
    if len(samples) < 1:
        raise DomainError("need at least one sample")
    return D.probabilities[samples.indices]


def _scaled_mean(samples: SampleSet, D: OutputDistribution) -> tuple[float, float]:
    z = _values(samples, D) * 2.0**D.n
    se = float(z.std(ddof=1) / math.sqrt(z.size)) if z.size > 1 else 0.0
    return float(z.mean()), se


def f_xeb(samples: SampleSet, D: OutputDistribution) -> FidelityEstimate:
    mean, se = _scaled_mean(samples, D)
    return FidelityEstimate(mean - 1.0, se, EstimatorKind.XEB, len(samples))


def alpha(D: OutputDistribution, circuit_id: str = "") -> BiasConstant:
    p = D.probabilities
    return BiasConstant(float(2.0**D.n * np.dot(p, p) - 1.0), circuit_id)


def expected_scaled_probability(D: OutputDistribution, sampling: OutputDistribution) -> float:
    """Exact E[2^n D(x)] for x drawn from ``sampling``, as a full-vector sum."""
    if D.n != sampling.n:
        raise DomainError("distributions disagree on n")
    return float(2.0**D.n * np.dot(sampling.probabilities, D.probabilities))


def v_estimator(samples: SampleSet, D: OutputDistribution) -> FidelityEstimate:
    a = alpha(D).alpha
    if abs(a) < 1e-12:
        raise UndefinedError("V is undefined when alpha = 0 (uniform D)")
    mean, se = _scaled_mean(samples, D)
    return FidelityEstimate((mean - 1.0) / a, se / abs(a), EstimatorKind.V, len(samples))


def _score(F: float, d: np.ndarray, u: float) -> float:
    """Derivative of the mixture log-likelihood; decreasing in F."""
    with np.errstate(divide="ignore"):
        return float(np.sum((d - u) / (F * d + (1.0 - F) * u)))


def mle_estimator(samples: SampleSet, D: OutputDistribution, tol: float = 1e-12) -> FidelityEstimate:
    """Maximize sum log(F D(x_i) + (1 - F) 2^-n) over F in [0, 1].

    The log-likelihood is concave, so its derivative is decreasing and the
    maximizer is found by bisection on the derivative.  The standard error
    comes from the observed Fisher information at the optimum.
    """
    d = _values(samples, D)
    u = 2.0**-D.n
    flags: tuple[str, ...] = () if (d > 0).any() else ("all-zero-probabilities",)
    if _score(0.0, d, u) <= 0:
        F = 0.0
        flags += ("boundary",)
    elif (d > 0).all() and _score(1.0, d, u) >= 0:
        F = 1.0
        flags += ("boundary",)
    else:
        lo, hi = 0.0, 1.0
        while hi - lo > tol:
            mid = 0.5 * (lo + hi)
            if _score(mid, d, u) > 0:
                lo = mid
            else:
                hi = mid
        F = 0.5 * (lo + hi)
    mix = F * d + (1.0 - F) * u
    info = float(np.sum(((d - u) / mix) ** 2))
    se = 1.0 / math.sqrt(info) if info > 0 else math.inf
    return FidelityEstimate(F, se, EstimatorKind.MLE, len(samples), flags)


def formula77(model: NoiseModel, circuit: RandomCircuit) -> FidelityEstimate:
    """Product of (1 - e) over every gate and every qubit readout."""
    r1, r2, rq = model.resolve(circuit)
    return FidelityEstimate(success_probability(r1, r2, rq), 0.0, EstimatorKind.PREDICTED_77)


def formula77_simplified(n: int, g1: int, g2: int, rates: Sequence[float] = (GOOGLE_E1, GOOGLE_E2, GOOGLE_EQ)) -> FidelityEstimate:
    e1, e2, eq = rates
    if min(n, g1, g2) < 0:
        raise DomainError("counts must be nonnegative")
    value = (1.0 - e1) ** g1 * (1.0 - e2) ** g2 * (1.0 - eq) ** n
    return FidelityEstimate(value, 0.0, EstimatorKind.PREDICTED_77_AVG)


def formula77_two_factor(n: int, g2: int, e2: float = GOOGLE_E2_DRESSED, eq: float = GOOGLE_EQ) -> float:
    """Variant folding one-qubit errors into a dressed two-qubit rate."""
    return (1.0 - e2) ** g2 * (1.0 - eq) ** n


def formula77_deviation(n: int, g1: int, g2: int) -> float:
    """Rough relative deviation of the product prediction (20% rate uncertainty)."""
    if min(n, g1, g2) < 0:
        raise DomainError("counts must be nonnegative")
    return 0.2 * (math.sqrt(n) * GOOGLE_EQ + math.sqrt(g1) * GOOGLE_E1 + math.sqrt(g2) * GOOGLE_E2_ALT)


def predict(circuit: RandomCircuit, model: NoiseModel) -> dict[str, float]:
    g1, g2 = gate_counts(circuit)
    return {
        "predicted_77": formula77(model, circuit).value,
        "predicted_77_avg": formula77_simplified(circuit.n, g1, g2, model.averaged).value,
        "deviation_bound": formula77_deviation(circuit.n, g1, g2),
    }


# -- size-biased diagnostics ----------------------------------------------------

HIST_BINS = 50
HIST_RANGE = 10.0


def exp_density(x):
    return np.exp(-np.asarray(x, dtype=float))


def size_biased_density(x):
    x = np.asarray(x, dtype=float)
    return x * np.exp(-x)


def mixture_cdf(z, F: float):
    """CDF of F * Gamma(2) + (1 - F) * Exp(1)."""
    z = np.asarray(z, dtype=float)
    return 1.0 - np.exp(-z) - F * z * np.exp(-z)


@dataclass(frozen=True, eq=False)
class SizeBiasedHistogram:
    edges: np.ndarray
    density: np.ndarray
    overflow: float
    exp_reference: np.ndarray
    size_biased_reference: np.ndarray
    ks_exp: float
    ks_size_biased: float

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.edges[:-1] + self.edges[1:])

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["bin_left", "bin_right", "empirical_density", "exp_density", "size_biased_density"])
        for i in range(self.density.size):
            w.writerow([f"{self.edges[i]:.6g}", f"{self.edges[i + 1]:.6g}", f"{self.density[i]:.17g}",
                        f"{self.exp_reference[i]:.17g}", f"{self.size_biased_reference[i]:.17g}"])
        w.writerow([f"{HIST_RANGE:.6g}", "inf", f"{self.overflow:.17g}", "", ""])
        return buf.getvalue()


def ks_against_mixture(values, F: float) -> float:
    return float(stats.kstest(values, lambda z: mixture_cdf(z, F)).statistic)


def size_biased_histogram(samples: SampleSet, D: OutputDistribution) -> SizeBiasedHistogram:
    """Histogram of ``2^n D(x_i)`` with the Exp(1) and ``x e^-x`` overlays.

    50 equal bins on [0, 10] plus an overflow fraction; references are bin
    averages of the densities so they compare directly with the histogram.
    KS distances are computed on the unbinned values.
    """
    z = _values(samples, D) * 2.0**D.n
    edges = np.linspace(0.0, HIST_RANGE, HIST_BINS + 1)
    counts, _ = np.histogram(z, bins=edges)
    width = edges[1] - edges[0]
    density = counts / (z.size * width)
    overflow = float(np.mean(z >= HIST_RANGE))
    exp_ref = (np.exp(-edges[:-1]) - np.exp(-edges[1:])) / width
    gamma_cdf = 1.0 - (1.0 + edges) * np.exp(-edges)
    sb_ref = np.diff(gamma_cdf) / width
    return SizeBiasedHistogram(
        edges, density, overflow, exp_ref, sb_ref,
        ks_exp=ks_against_mixture(z, 0.0),
        ks_size_biased=ks_against_mixture(z, 1.0),
    )


# -- variance decomposition -----------------------------------------------------


@dataclass(frozen=True)
class VarianceDecomposition:
    within: float
    between: float
    total: float


def total_variance(groups: Sequence[Sequence[float]]) -> VarianceDecomposition:
    """Split the pooled variance into within-group and between-group parts.

    Population convention throughout, groups weighted by their size, so
    ``total == within + between`` equals ``np.var`` of the pooled values.
    """
    arrays = [np.asarray(g, dtype=float) for g in groups]
    if len(arrays) < 2:
        raise DomainError("need at least two groups")
    if any(a.ndim != 1 or a.size < 2 for a in arrays):
        raise DomainError("every group needs at least two values")
    sizes = np.array([a.size for a in arrays], dtype=float)
    weights = sizes / sizes.sum()
    means = np.array([a.mean() for a in arrays])
    variances = np.array([a.var() for a in arrays])
    grand = float(np.dot(weights, means))
    within = float(np.dot(weights, variances))
    between = float(np.dot(weights, (means - grand) ** 2))
    return VarianceDecomposition(within, between, within + between)


# -- report ---------------------------------------------------------------------

REPORT_COLUMNS = ["circuit_id", "n", "m", "estimator_kind", "value", "std_error", "sample_count",
                  "predicted_77", "predicted_77_avg", "deviation_bound"]


def report_rows(circuit: RandomCircuit, estimates: Sequence[FidelityEstimate], model: NoiseModel | None = None) -> list[dict]:
    pred = predict(circuit, model) if model is not None else {}
    rows = []
    for est in estimates:
        row = {
            "circuit_id": circuit.circuit_id,
            "n": circuit.n,
            "m": circuit.m,
            "estimator_kind": est.kind.value,
            "value": format(est.value, ".17g"),
            "std_error": format(est.standard_error, ".17g"),
            "sample_count": est.sample_count,
        }
        for key in ("predicted_77", "predicted_77_avg", "deviation_bound"):
            row[key] = format(pred[key], ".17g") if key in pred else ""
        rows.append(row)
    return rows


def report_csv(rows: Sequence[dict]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=REPORT_COLUMNS, lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    return buf.getvalue()
