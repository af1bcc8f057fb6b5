"""Seedable normal, gamma and uniform sampling.

Every sampler takes an explicit :class:`numpy.random.Generator`; nothing in
the package touches global random state. Gamma variates use the shape-rate
convention (mean ``shape / rate``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameterError

RngState = np.random.Generator


def make_rng(seed: int | None) -> RngState:
    """Return a PCG64 generator; identical seeds give identical streams."""
    return np.random.default_rng(seed)


def spawn_rngs(seed: int, n: int) -> list[RngState]:
    """Independent generators for parallel chains or experiments."""
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(n)]


@dataclass(frozen=True)
class NormalSpec:
    """Normal distribution parameterised by mean and precision (1/variance)."""

    mean: float
    precision: float

    def __post_init__(self):
        if not math.isfinite(self.mean):
            raise InvalidParameterError(f"normal mean must be finite, got {self.mean}")
        if not (math.isfinite(self.precision) and self.precision > 0):
            raise InvalidParameterError(
                f"normal precision must be positive and finite, got {self.precision}"
            )

    @classmethod
    def from_variance(cls, mean: float, variance: float) -> "NormalSpec":
        if not variance > 0:
            raise InvalidParameterError(f"variance must be positive, got {variance}")
        return cls(mean, 1.0 / variance)

    @property
    def variance(self) -> float:
        return 1.0 / self.precision

    @property
    def std(self) -> float:
        return 1.0 / math.sqrt(self.precision)

    def logpdf(self, x):
        x = np.asarray(x, dtype=float)
        return 0.5 * (math.log(self.precision) - math.log(2 * math.pi)) - 0.5 * self.precision * (
            x - self.mean
        ) ** 2


@dataclass(frozen=True)
class GammaSpec:
    """Gamma distribution with shape ``a`` and rate ``b``."""

    shape: float
    rate: float

    def __post_init__(self):
        if not (math.isfinite(self.shape) and self.shape > 0):
            raise InvalidParameterError(f"gamma shape must be positive, got {self.shape}")
        if not (math.isfinite(self.rate) and self.rate > 0):
            raise InvalidParameterError(f"gamma rate must be positive, got {self.rate}")

    @property
    def mean(self) -> float:
        return self.shape / self.rate

    @property
    def variance(self) -> float:
        return self.shape / self.rate**2

    def logpdf(self, x):
        x = np.asarray(x, dtype=float)
        return (
            self.shape * math.log(self.rate)
            - math.lgamma(self.shape)
            + (self.shape - 1) * np.log(x)
            - self.rate * x
        )


def sample_normal(spec: NormalSpec, rng: RngState, size=None):
    """Draw from ``N(spec.mean, 1/spec.precision)``."""
    return rng.normal(spec.mean, spec.std, size)


_TINY = np.finfo(float).tiny


def sample_gamma(spec: GammaSpec, rng: RngState, size=None):
    """Draw from the shape-rate gamma distribution.

    numpy's generator implements the Marsaglia-Tsang squeeze/rejection method,
    with the ``shape + 1`` boost (``U**(1/shape)`` correction) below shape 1.
    Draws that underflow to zero (possible for very small shapes) are
    clamped to the smallest positive normal double.
    """
    x = rng.gamma(spec.shape, 1.0 / spec.rate, size)
    return np.maximum(x, _TINY) if size is not None else max(x, _TINY)


def sample_uniform(lo: float, hi: float, rng: RngState, size=None):
    """Draw from ``U[lo, hi)``."""
    if not (math.isfinite(lo) and math.isfinite(hi)) or lo >= hi:
        raise InvalidParameterError(f"uniform bounds need lo < hi, got ({lo}, {hi})")
    return rng.uniform(lo, hi, size)
