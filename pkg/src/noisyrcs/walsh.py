"""Fourier-Walsh analysis on the Boolean cube.

Coefficients use the analysis convention

    f_hat(S) = 2^-n * sum_x f(x) W_S(x),     W_S(x) = prod_{i in S} (1 - 2 x_i)

so a probability distribution has ``f_hat(empty) = 2^-n`` and
``f = sum_S f_hat(S) W_S``.  Subsets are integer masks using the same bit
positions as bitstring indices (qubit 0 is the most significant bit).
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, RepairError, UndefinedError
from .simulator import OutputDistribution

ANALYSIS = "analysis: f_hat(S) = 2^-n sum_x f(x) W_S(x)"


@dataclass(frozen=True, eq=False)
class WalshSpectrum:
    n: int
    coefficients: np.ndarray
    normalization: str = ANALYSIS

    def __post_init__(self):
        c = np.asarray(self.coefficients, dtype=float)
        if c.shape != (2**self.n,):
            raise DomainError(f"expected {2**self.n} coefficients, got shape {c.shape}")
        object.__setattr__(self, "coefficients", c)

    def degrees(self) -> np.ndarray:
        return subset_degrees(self.n)

    def weight_by_degree(self) -> np.ndarray:
        """Sum of squared coefficients at each level 0..n."""
        return np.bincount(self.degrees(), weights=self.coefficients**2, minlength=self.n + 1)


def subset_mask(n: int, qubits) -> int:
    """Mask of the subset ``qubits`` (0-based qubit indices)."""
    mask = 0
    for q in qubits:
        if not 0 <= q < n:
            raise DomainError(f"qubit {q} outside [0, {n})")
        mask |= 1 << (n - 1 - q)
    return mask


def subset_degrees(n: int) -> np.ndarray:
    return np.bitwise_count(np.arange(2**n, dtype=np.uint64)).astype(np.int64)


def _butterfly(a: np.ndarray, n: int) -> np.ndarray:
    a = a.reshape((2,) * n).copy() if n else a.copy()
    for axis in range(n):
        lo = np.take(a, 0, axis=axis)
        hi = np.take(a, 1, axis=axis)
        a = np.stack((lo + hi, lo - hi), axis=axis)
    return a.reshape(-1)


def _size(f) -> int:
    size = np.asarray(f).size
    n = size.bit_length() - 1
    if size < 1 or 2**n != size:
        raise DomainError(f"array length {size} is not a power of two")
    return n


def walsh_transform(f) -> WalshSpectrum:
    """Fast transform in O(n 2^n); accepts an array or an OutputDistribution."""
    if isinstance(f, OutputDistribution):
        f = f.probabilities
    f = np.asarray(f, dtype=float)
    n = _size(f)
    return WalshSpectrum(n, _butterfly(f, n) / 2.0**n)


def inverse_walsh(spec: WalshSpectrum) -> np.ndarray:
    return _butterfly(spec.coefficients, spec.n)


def attenuate(spec: WalshSpectrum, t: float) -> WalshSpectrum:
    """Multiply each coefficient by ``(1 - 2t)^|S|``, the bit-flip noise action."""
    if not 0.0 <= t <= 1.0:
        raise DomainError(f"flip rate t must lie in [0, 1], got {t}")
    rho = 1.0 - 2.0 * t
    factors = rho ** spec.degrees().astype(float)
    return WalshSpectrum(spec.n, spec.coefficients * factors, spec.normalization)


def degree_truncate(spec: WalshSpectrum, d: int) -> tuple[np.ndarray, OutputDistribution]:
    """Drop all levels above ``d``.

    Returns the raw truncated function and a repaired distribution obtained
    by clipping negatives to zero and renormalizing.
    """
    if not 0 <= d <= spec.n:
        raise DomainError(f"degree bound must lie in [0, {spec.n}], got {d}")
    kept = np.where(spec.degrees() <= d, spec.coefficients, 0.0)
    raw = inverse_walsh(WalshSpectrum(spec.n, kept, spec.normalization))
    clipped = np.clip(raw, 0.0, None)
    total = clipped.sum()
    if not total > 0:
        raise RepairError("truncated function has no positive mass to renormalize")
    return raw, OutputDistribution(spec.n, clipped / total)


def noise_correlation(D: OutputDistribution, t: float) -> float:
    """Pearson correlation between ``D`` and its bit-flip noised version.

    Spectrally, with rho = 1 - 2t and sums over nonempty S,
    ``sum D_hat^2 rho^|S| / sqrt(sum D_hat^2 * sum D_hat^2 rho^(2|S|))``.
    """
    spec = walsh_transform(D.probabilities)
    c2 = spec.coefficients[1:] ** 2
    power = float(c2.sum())
    # relative to the squared mean level 4^-n; uniform input gives exactly 0
    if power <= 1e-24 * 4.0**-D.n:
        raise UndefinedError("correlation is undefined for the uniform distribution")
    if t == 0.5:
        return 0.0
    rho = (1.0 - 2.0 * t) ** spec.degrees()[1:].astype(float)
    cov = float(np.sum(c2 * rho))
    noisy_power = float(np.sum(c2 * rho * rho))
    return cov / np.sqrt(power * noisy_power)


# -- export ---------------------------------------------------------------------


def spectrum_csv(spec: WalshSpectrum) -> str:
    width = max(1, (spec.n + 3) // 4)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["subset_mask", "degree", "coefficient"])
    for mask, (deg, c) in enumerate(zip(spec.degrees(), spec.coefficients)):
        w.writerow([f"0x{mask:0{width}x}", int(deg), format(float(c), ".17g")])
    return buf.getvalue()


def read_spectrum_csv(text: str, n: int) -> WalshSpectrum:
    rows = list(csv.DictReader(io.StringIO(text)))
    coeffs = np.zeros(2**n)
    for row in rows:
        coeffs[int(row["subset_mask"], 16)] = float(row["coefficient"])
    return WalshSpectrum(n, coeffs)
