"""Bayesian (Gibbs sampling) identification of ZIP and induction-motor load models."""

__version__ = "0.1.0"

from .chain import Chain
from .distributions import GammaSpec, NormalSpec, make_rng, sample_gamma, sample_normal, sample_uniform
from .errors import (
    BayesLoadError,
    ConvergenceError,
    DegenerateDataError,
    FilterDivergenceError,
    InsufficientSamplesError,
    IntegrationError,
    InvalidParameterError,
)
from .motor import ImCoeffs, ImDataset, ImPhysical, ImPriors, ImRecord, derived_coeffs, gibbs_im, im_residuals
from .zipload import ZipDataset, ZipParams, ZipPriors, gibbs_zip, zip_power

__all__ = [
    "Chain",
    "GammaSpec",
    "NormalSpec",
    "make_rng",
    "sample_gamma",
    "sample_normal",
    "sample_uniform",
    "BayesLoadError",
    "ConvergenceError",
    "DegenerateDataError",
    "FilterDivergenceError",
    "InsufficientSamplesError",
    "IntegrationError",
    "InvalidParameterError",
    "ImCoeffs",
    "ImDataset",
    "ImPhysical",
    "ImPriors",
    "ImRecord",
    "derived_coeffs",
    "gibbs_im",
    "im_residuals",
    "ZipDataset",
    "ZipParams",
    "ZipPriors",
    "gibbs_zip",
    "zip_power",
]
