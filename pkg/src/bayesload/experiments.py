"""End-to-end benchmark runs comparing Gibbs sampling with LS and KF."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import motor
from .baselines import KfConfig, kf_im, kf_zip, ls_im, ls_zip
from .datagen import (
    FeederModel,
    ImTrajectory,
    ZipExperimentConfig,
    add_im_noise,
    generate_zip_dataset,
    ieee33,
    reference_motor,
    simulate_im,
    step_dip_inputs,
    zip_reconstruction_errors,
)
from .motor import ImCoeffs, ImPhysical, ImPriors, derived_coeffs
from .zipload import ZipParams, ZipPriors, chain_estimate, gibbs_zip

METHODS = ("GS", "LS", "KF")


@dataclass(frozen=True)
class ZipBenchRow:
    method: str
    params: ZipParams
    voltage_error: float  # mean |dV| over evaluation draws, p.u.
    power_error: float  # mean |dP| over evaluation draws, fraction of P0


@dataclass(frozen=True)
class ImBenchRow:
    method: str
    coeffs: ImCoeffs
    relative_errors: np.ndarray


def _streams(seed, n):
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(n)]


def benchmark_zip(
    cfg: ZipExperimentConfig,
    feeder: FeederModel | None = None,
    M: int = 40000,
    m: int = 5000,
    priors: ZipPriors | None = None,
    kf: KfConfig | None = None,
    n_eval: int = 100,
    seed: int | None = None,
    data=None,
):
    """Fit GS, LS and KF on one generated dataset and compare reconstructions.

    Returns ``(rows, data, chain)``. Evaluation uses ``n_eval`` fresh load
    draws independent of the training data.
    """
    feeder = feeder or ieee33()
    seed = cfg.seed if seed is None else seed
    r_data, r_gibbs, r_eval = _streams(seed, 3)
    if data is None:
        data = generate_zip_dataset(cfg, feeder, r_data)
    chain = gibbs_zip(data, priors, M, m, r_gibbs, seed=seed)
    estimates = {"GS": chain_estimate(chain), "LS": ls_zip(data), "KF": kf_zip(data, kf)}
    errs = zip_reconstruction_errors(
        feeder, cfg.target_bus, cfg.true_params, estimates, n_eval, cfg.load_factor_range, r_eval
    )
    rows = [
        ZipBenchRow(k, estimates[k], float(errs[k][0].mean()), float(errs[k][1].mean())) for k in METHODS
    ]
    return rows, data, chain


def im_scenario(
    phys: ImPhysical | None = None, duration: float = 10.0, dt: float = 1e-3, dip: float = 0.1
) -> ImTrajectory:
    """Noise-free motor response to a mid-horizon terminal-voltage dip."""
    phys = phys or reference_motor()
    return simulate_im(phys, step_dip_inputs(duration, dt, dip), dt)


def benchmark_im(
    noise: float = 0.05,
    seed: int | None = None,
    M: int = 40000,
    m: int = 5000,
    priors: ImPriors | None = None,
    kf: KfConfig | None = None,
    trajectory: ImTrajectory | None = None,
):
    """Add target noise to a simulated trajectory and fit GS, LS and KF.

    Returns ``(rows, data, chain)``; relative errors are against the
    coefficients derived from the simulated motor.
    """
    traj = trajectory or im_scenario()
    truth = derived_coeffs(traj.phys)
    r_noise, r_gibbs = _streams(seed, 2)
    data = add_im_noise(traj, noise, r_noise)
    chain = motor.gibbs_im(data, priors, M, m, r_gibbs, seed=seed)
    estimates = {"GS": motor.chain_estimate(chain), "LS": ls_im(data), "KF": kf_im(data, kf)}
    rows = [ImBenchRow(k, estimates[k], estimates[k].relative_errors(truth)) for k in METHODS]
    return rows, data, chain
