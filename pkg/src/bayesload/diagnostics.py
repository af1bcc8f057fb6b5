"""Posterior summaries, burn-in stability and interval coverage."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .chain import Chain
from .errors import InsufficientSamplesError, InvalidParameterError

DEFAULT_BINS = 50


@dataclass(frozen=True, eq=False)
class PosteriorSummary:
    name: str
    mean: float
    std: float
    credible_interval: tuple
    histogram: tuple  # (bin_edges, counts)
    n_samples: int
    level: float = 0.95

    def contains(self, value: float) -> bool:
        lo, hi = self.credible_interval
        return lo <= value <= hi


def summarize(chain: Chain, param, level: float = 0.95, bins: int = DEFAULT_BINS) -> PosteriorSummary:
    """Mean, std, equal-tailed credible interval and histogram of one parameter.

    Only post-burn-in rows are used. The interval is the pair of empirical
    ``(1 - level)/2`` and ``1 - (1 - level)/2`` quantiles.
    """
    if not 0 < level < 1:
        raise InvalidParameterError(f"credible level must lie in (0, 1), got {level}")
    x = chain.column(param)
    if x.size < 2:
        raise InsufficientSamplesError(f"only {x.size} post-burn-in samples")
    tail = 0.5 * (1.0 - level)
    lo, hi = np.quantile(x, [tail, 1.0 - tail])
    counts, edges = np.histogram(x, bins=bins)
    return PosteriorSummary(
        name=chain.param_names[chain.index(param)],
        mean=float(x.mean()),
        std=float(x.std(ddof=1)),
        credible_interval=(float(lo), float(hi)),
        histogram=(edges, counts),
        n_samples=int(x.size),
        level=level,
    )


def summarize_all(chain: Chain, level: float = 0.95, bins: int = DEFAULT_BINS) -> list:
    return [summarize(chain, i, level, bins) for i in range(len(chain.param_names))]


def integrated_time(x, c: float = 5.0) -> float:
    """Integrated autocorrelation time with Sokal's adaptive window.

    Returns 1 for an uncorrelated series. The autocorrelation function is
    computed by FFT.
    """
    x = np.asarray(x, dtype=float)
    n = x.size
    x = x - x.mean()
    var = float(x @ x)
    if n < 2 or var == 0.0:
        return 1.0
    m = 1 << (2 * n - 1).bit_length()
    f = np.fft.rfft(x, m)
    acf = np.fft.irfft(f * np.conj(f), m)[:n] / var
    taus = 2.0 * np.cumsum(acf) - 1.0
    ok = np.arange(n) >= c * taus
    w = int(np.argmax(ok)) if np.any(ok) else n - 1
    return max(1.0, float(taus[w]))


@dataclass(frozen=True)
class BurnInRow:
    name: str
    first_mean: float
    last_mean: float
    difference: float
    std_error: float
    flagged: bool


@dataclass(frozen=True)
class BurnInReport:
    window: int
    threshold: float
    rows: tuple

    @property
    def stable(self) -> bool:
        return not any(r.flagged for r in self.rows)

    def __getitem__(self, name) -> BurnInRow:
        for r in self.rows:
            if r.name == name:
                return r
        raise KeyError(name)


def burn_in_check(chain: Chain, window: int | None = None, threshold: float = 3.0) -> BurnInReport:
    """Compare the first and last ``window`` post-burn-in samples.

    A parameter is flagged when the absolute difference of the two window
    means exceeds ``threshold`` standard errors of that difference. The
    standard error of a window mean is ``s_w * sqrt(tau / window)``: ``s_w``
    is the spread inside that window (so a steady drift does not hide behind
    its own variance) and ``tau`` is the integrated autocorrelation time of
    the whole retained chain (windows are often too short to estimate it).

    ``window`` defaults to a tenth of the retained samples.
    """
    kept = chain.kept
    n = kept.shape[0]
    if window is None:
        window = n // 10
    if not 2 <= window < n:
        raise InvalidParameterError(f"window {window} must satisfy 2 <= window < {n}")
    rows = []
    for j, name in enumerate(chain.param_names):
        a, b = kept[:window, j], kept[-window:, j]
        diff = abs(float(b.mean() - a.mean()))
        tau = integrated_time(kept[:, j])
        se = math.hypot(a.std(ddof=1), b.std(ddof=1)) * math.sqrt(tau / window)
        flagged = diff > threshold * se if se > 0 else diff > 0
        rows.append(BurnInRow(name, float(a.mean()), float(b.mean()), diff, se, bool(flagged)))
    return BurnInReport(window, threshold, tuple(rows))


def coverage_test(true_value: float, summaries, min_runs: int = 20) -> float:
    """Fraction of credible intervals that contain ``true_value``."""
    summaries = list(summaries)
    if len(summaries) < min_runs:
        raise InvalidParameterError(f"need at least {min_runs} summaries, got {len(summaries)}")
    return sum(s.contains(true_value) for s in summaries) / len(summaries)
