"""Container for Gibbs sampler output."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameterError


@dataclass(frozen=True, eq=False)
class Chain:
    """All ``M`` sampled rows of a Gibbs run; the first ``burn_in`` are discarded.

    Attributes
    ----------
    samples : ndarray, shape (M, k)
        One row per iteration, columns ordered as ``param_names``.
    param_names : tuple of str
    burn_in : int
        Number of leading rows treated as burn-in (``m``).
    seed : int or None
        Seed the chain was generated from, kept for provenance.
    """

    samples: np.ndarray
    param_names: tuple
    burn_in: int
    seed: int | None = None

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=float)
        if samples.ndim != 2 or samples.shape[1] != len(self.param_names):
            raise InvalidParameterError(
                f"samples shape {samples.shape} does not match {len(self.param_names)} parameters"
            )
        if not 0 <= self.burn_in < samples.shape[0]:
            raise InvalidParameterError(
                f"burn-in {self.burn_in} must satisfy 0 <= m < M={samples.shape[0]}"
            )
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "param_names", tuple(self.param_names))

    @property
    def total(self) -> int:
        return self.samples.shape[0]

    @property
    def kept(self) -> np.ndarray:
        """Post-burn-in rows, shape ``(M - m, k)``."""
        return self.samples[self.burn_in :]

    def index(self, param) -> int:
        if isinstance(param, str):
            try:
                return self.param_names.index(param)
            except ValueError:
                raise KeyError(f"unknown parameter {param!r}; have {self.param_names}") from None
        if not -len(self.param_names) <= param < len(self.param_names):
            raise IndexError(f"parameter index {param} out of range")
        return int(param)

    def column(self, param) -> np.ndarray:
        """Post-burn-in samples of one parameter (by name or index)."""
        return self.kept[:, self.index(param)]

    def posterior_mean(self, param) -> float:
        return float(self.column(param).mean())

    def means(self) -> dict:
        return dict(zip(self.param_names, self.kept.mean(axis=0).tolist()))
