"""Static ZIP load model and its conjugate Gibbs sampler.

The normalised real power of a ZIP load is

    y = a1 * x**2 + a2 * x + a3,    a1 + a2 + a3 = 1,

with ``x = V/V0`` and ``y = P/P0``. Only ``a1``, ``a2`` and the noise
precision ``tau`` are free; ``a3`` is always ``1 - a1 - a2``. Reactive power
uses the same code on ``Q/Q0`` pairs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .chain import Chain
from .distributions import (
    GammaSpec,
    NormalSpec,
    RngState,
    sample_gamma,
    sample_normal,
)
from .errors import InvalidParameterError

ZIP_PARAM_NAMES = ("alpha1", "alpha2", "tau")

DEFAULT_ITERATIONS = 40000
DEFAULT_BURN_IN = 5000


@dataclass(frozen=True)
class ZipParams:
    alpha1: float
    alpha2: float
    tau: float = float("nan")

    def __post_init__(self):
        if not (math.isfinite(self.alpha1) and math.isfinite(self.alpha2)):
            raise InvalidParameterError("ZIP coefficients must be finite")
        if not (math.isnan(self.tau) or self.tau > 0):
            raise InvalidParameterError(f"noise precision must be positive, got {self.tau}")

    @property
    def alpha3(self) -> float:
        return 1.0 - self.alpha1 - self.alpha2

    @property
    def coefficients(self) -> tuple[float, float, float]:
        return (self.alpha1, self.alpha2, self.alpha3)


@dataclass(frozen=True, eq=False)
class ZipDataset:
    """Paired normalised voltage ``x`` and power ``y`` measurements.

    ``meta`` holds free-form provenance (generation seed, redraw counts).
    """

    x: np.ndarray
    y: np.ndarray
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float).ravel()
        y = np.asarray(self.y, dtype=float).ravel()
        if x.shape != y.shape:
            raise InvalidParameterError(f"x and y lengths differ: {x.size} vs {y.size}")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
            raise InvalidParameterError("ZIP data must be finite")
        if np.any(x <= 0):
            raise InvalidParameterError("normalised voltages must be positive")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    @property
    def n(self) -> int:
        return self.x.size

    # regressors of the constrained model: y - 1 = a1 (x^2 - 1) + a2 (x - 1)
    @cached_property
    def _u(self):
        return self.x**2 - 1.0

    @cached_property
    def _v(self):
        return self.x - 1.0

    @cached_property
    def _w(self):
        return self.y - 1.0

    @cached_property
    def _sums(self):
        u, v, w = self._u, self._v, self._w
        return {
            "uu": float(u @ u),
            "vv": float(v @ v),
            "uv": float(u @ v),
            "uw": float(u @ w),
            "vw": float(v @ w),
        }

    def residuals(self, alpha1: float, alpha2: float) -> np.ndarray:
        return self._w - alpha1 * self._u - alpha2 * self._v


@dataclass(frozen=True)
class ZipPriors:
    alpha1: NormalSpec
    alpha2: NormalSpec
    tau: GammaSpec

    @classmethod
    def default(cls) -> "ZipPriors":
        """Weakly informative priors centred on an equal Z/I/P split."""
        return cls(
            alpha1=NormalSpec(1.0 / 3.0, 1.0),
            alpha2=NormalSpec(1.0 / 3.0, 1.0),
            tau=GammaSpec(1.0, 1.0),
        )


def zip_power(params: ZipParams, vbar):
    """Normalised ZIP power ``P/P0`` at normalised voltage ``vbar``."""
    vbar = np.asarray(vbar, dtype=float)
    if not (np.all(np.isfinite(vbar)) and np.all(vbar > 0)):
        raise InvalidParameterError("normalised voltage must be positive and finite")
    out = params.alpha1 * vbar**2 + params.alpha2 * vbar + params.alpha3
    return float(out) if out.ndim == 0 else out


def _check_tau(tau):
    if not (math.isfinite(tau) and tau > 0):
        raise InvalidParameterError(f"noise precision must be positive and finite, got {tau}")


def cond_post_alpha1(data: ZipDataset, alpha2: float, tau: float, prior: NormalSpec) -> NormalSpec:
    """Conditional posterior of ``alpha1`` given ``alpha2`` and ``tau``.

    precision = p0 + tau * sum((x^2 - 1)^2)
    mean      = [p0*mu0 - tau * sum((alpha2 - 1 - alpha2*x + y) * (1 - x^2))] / precision
    """
    _check_tau(tau)
    if data.n == 0:
        return prior
    s = data._sums
    precision = prior.precision + tau * s["uu"]
    # -(alpha2 - 1 - alpha2 x + y)(1 - x^2) == (w - alpha2 v) u
    numerator = prior.precision * prior.mean + tau * (s["uw"] - alpha2 * s["uv"])
    return NormalSpec(numerator / precision, precision)


def cond_post_alpha2(data: ZipDataset, alpha1: float, tau: float, prior: NormalSpec) -> NormalSpec:
    """Conditional posterior of ``alpha2`` given ``alpha1`` and ``tau``; regressor ``x - 1``."""
    _check_tau(tau)
    if data.n == 0:
        return prior
    s = data._sums
    precision = prior.precision + tau * s["vv"]
    numerator = prior.precision * prior.mean + tau * (s["vw"] - alpha1 * s["uv"])
    return NormalSpec(numerator / precision, precision)


def cond_post_tau(data: ZipDataset, alpha1: float, alpha2: float, prior: GammaSpec) -> GammaSpec:
    """Gamma conditional of the noise precision: ``a + n/2``, ``b + SSE/2``."""
    if data.n == 0:
        return prior
    r = data.residuals(alpha1, alpha2)
    return GammaSpec(prior.shape + 0.5 * data.n, prior.rate + 0.5 * float(r @ r))


def gibbs_zip(
    data: ZipDataset,
    priors: ZipPriors | None = None,
    M: int = DEFAULT_ITERATIONS,
    m: int = DEFAULT_BURN_IN,
    rng: RngState | None = None,
    seed: int | None = None,
) -> Chain:
    """Run the three-block Gibbs sampler for ``(alpha1, alpha2, tau)``.

    Parameters
    ----------
    data : ZipDataset
    priors : ZipPriors, optional
        Defaults to :meth:`ZipPriors.default`.
    M, m : int
        Total iterations and burn-in length (``m < M``).
    rng : numpy Generator, optional
        Built from ``seed`` when omitted.
    seed : int, optional
        Recorded on the chain for provenance.

    Returns
    -------
    Chain
        ``M`` rows over ``("alpha1", "alpha2", "tau")`` with ``burn_in = m``.
    """
    if not 0 <= m < M:
        raise InvalidParameterError(f"need 0 <= m < M, got m={m}, M={M}")
    priors = priors or ZipPriors.default()
    if rng is None:
        rng = np.random.default_rng(seed)

    # initial state drawn from the priors; alpha1 is resampled before use
    sample_normal(priors.alpha1, rng)
    alpha2 = float(sample_normal(priors.alpha2, rng))
    tau = float(sample_gamma(priors.tau, rng))

    out = np.empty((M, 3))
    for i in range(M):
        alpha1 = float(sample_normal(cond_post_alpha1(data, alpha2, tau, priors.alpha1), rng))
        alpha2 = float(sample_normal(cond_post_alpha2(data, alpha1, tau, priors.alpha2), rng))
        tau = float(sample_gamma(cond_post_tau(data, alpha1, alpha2, priors.tau), rng))
        out[i] = alpha1, alpha2, tau
    return Chain(out, ZIP_PARAM_NAMES, m, seed)


def chain_estimate(chain: Chain) -> ZipParams:
    """Posterior-mean point estimate; ``alpha3`` follows from the constraint."""
    means = chain.means()
    return ZipParams(means["alpha1"], means["alpha2"], means["tau"])
