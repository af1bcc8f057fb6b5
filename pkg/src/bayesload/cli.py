"""Command-line front end.

Usage::

    bayesload MODE [--config FILE] [--seed N] [--iters M] [--burn-in m]
                   [--noise SIGMA] [--out DIR] [--fast] ...

Modes: gen-zip, gen-im, fit-zip, fit-im, bench-zip, bench-im. Settings come
from defaults, then the JSON config file, then flags (flags win).

Exit codes: 0 success, 2 configuration error, 3 numerical error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from . import __version__, csvio
from .baselines import KfConfig
from .datagen import ZipExperimentConfig, add_im_noise, generate_zip_dataset, ieee33, load_feeder
from .diagnostics import DEFAULT_BINS, summarize_all
from .distributions import GammaSpec, NormalSpec
from .errors import BayesLoadError, InvalidParameterError
from .experiments import benchmark_im, benchmark_zip, im_scenario
from .motor import COEFF_NAMES, ImPriors, derived_coeffs, gibbs_im
from .zipload import ZipParams, ZipPriors, gibbs_zip

log = logging.getLogger("bayesload")

MODES = ("gen-zip", "gen-im", "fit-zip", "fit-im", "bench-zip", "bench-im")
EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3
FAST_PROFILE = (5000, 1000)


class ConfigError(Exception):
    def __init__(self, field_name, message):
        super().__init__(f"{field_name}: {message}")
        self.field = field_name


@dataclass
class ExperimentConfig:
    mode: str
    out: str = "results"
    input: str | None = None
    seed: int = 0
    iters: int | None = None
    burn_in: int | None = None
    fast: bool = False
    noise: float | None = None
    feeder: str | None = None
    target_bus: int = 18
    n_experiments: int = 1000
    true_alpha: list = field(default_factory=lambda: [0.25, 0.25])
    load_factor_range: list = field(default_factory=lambda: [0.1, 4.5])
    eval_draws: int = 100
    duration: float = 10.0
    dt: float = 1e-3
    dip: float = 0.1
    level: float = 0.95
    bins: int = DEFAULT_BINS
    priors: dict = field(default_factory=dict)
    kf: dict = field(default_factory=dict)

    @property
    def chain_length(self) -> tuple[int, int]:
        M, m = FAST_PROFILE if self.fast else (40000, 5000)
        return (self.iters if self.iters is not None else M, self.burn_in if self.burn_in is not None else m)

    @property
    def noise_level(self) -> float:
        if self.noise is not None:
            return self.noise
        return 0.05 if self.mode.endswith("im") else 0.1

    def validate(self):
        if self.mode not in MODES:
            raise ConfigError("mode", f"must be one of {', '.join(MODES)}")
        M, m = self.chain_length
        if M < 1:
            raise ConfigError("iters", "must be positive")
        if not 0 <= m < M:
            raise ConfigError("burn_in", f"must satisfy 0 <= m < M (m={m}, M={M})")
        if self.noise_level < 0:
            raise ConfigError("noise", "must be non-negative")
        if self.mode.startswith("fit"):
            if not self.input:
                raise ConfigError("input", f"required for {self.mode}")
            if not Path(self.input).is_file():
                raise ConfigError("input", f"no such file {self.input}")
        if self.feeder and not Path(self.feeder).is_file():
            raise ConfigError("feeder", f"no such file {self.feeder}")
        if len(self.true_alpha) != 2:
            raise ConfigError("true_alpha", "needs two values [alpha1, alpha2]")
        if self.n_experiments < 1 or self.eval_draws < 1:
            raise ConfigError("n_experiments", "must be positive")
        if not 0 < self.level < 1:
            raise ConfigError("level", "must lie in (0, 1)")
        return self


def _spec(name, value):
    """Prior override: ``{"mean", "variance"}`` or ``{"shape", "rate"}``."""
    try:
        if "shape" in value:
            return GammaSpec(float(value["shape"]), float(value["rate"]))
        if "precision" in value:
            return NormalSpec(float(value["mean"]), float(value["precision"]))
        return NormalSpec.from_variance(float(value["mean"]), float(value["variance"]))
    except (KeyError, TypeError, ValueError, InvalidParameterError) as exc:
        raise ConfigError(f"priors.{name}", str(exc)) from None


def zip_priors(cfg: ExperimentConfig) -> ZipPriors:
    base = ZipPriors.default()
    kw = {f.name: getattr(base, f.name) for f in fields(base)}
    for name, value in cfg.priors.items():
        if name not in kw:
            raise ConfigError(f"priors.{name}", "unknown ZIP parameter")
        kw[name] = _spec(name, value)
    return ZipPriors(**kw)


def im_priors(cfg: ExperimentConfig) -> ImPriors:
    base = ImPriors.default()
    names = {f.name for f in fields(base)}
    over = {}
    for name, value in cfg.priors.items():
        if name not in names:
            raise ConfigError(f"priors.{name}", "unknown IM parameter")
        over[name] = _spec(name, value)
    return base.replace(**over)


def kf_config(cfg: ExperimentConfig) -> KfConfig:
    try:
        return KfConfig(**cfg.kf)
    except (TypeError, InvalidParameterError) as exc:
        raise ConfigError("kf", str(exc)) from None


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="bayesload", description=__doc__.split("\n\n")[0])
    p.add_argument("mode", choices=MODES)
    p.add_argument("--version", action="version", version=f"bayesload {__version__}")
    p.add_argument("--config", help="JSON file with experiment settings")
    p.add_argument("--seed", type=int)
    p.add_argument("--iters", type=int, help="total Gibbs iterations M")
    p.add_argument("--burn-in", dest="burn_in", type=int, help="discarded iterations m")
    p.add_argument("--noise", type=float, help="noise std (ZIP, p.u.) or relative level (IM)")
    p.add_argument("--out", help="output directory")
    p.add_argument("--fast", action="store_true", default=None, help="short chains (M=5000, m=1000)")
    p.add_argument("--input", help="dataset CSV for fit-* modes")
    p.add_argument("--feeder", help="feeder CSV (default: bundled 33-bus case)")
    p.add_argument("--target-bus", dest="target_bus", type=int)
    p.add_argument("--n-experiments", dest="n_experiments", type=int)
    p.add_argument("--eval-draws", dest="eval_draws", type=int)
    p.add_argument("--kf-process-noise", type=float)
    p.add_argument("--kf-meas-noise", type=float)
    p.add_argument("--kf-init-cov", type=float)
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def load_config(args) -> ExperimentConfig:
    values = {}
    if args.config:
        try:
            values = json.loads(Path(args.config).read_text())
        except OSError as exc:
            raise ConfigError("config", str(exc)) from None
        except json.JSONDecodeError as exc:
            raise ConfigError("config", f"invalid JSON: {exc}") from None
        if not isinstance(values, dict):
            raise ConfigError("config", "top level must be an object")
    known = {f.name for f in fields(ExperimentConfig)}
    for key in values:
        if key not in known:
            raise ConfigError(key, "unknown config key")
    for key in ("seed", "iters", "burn_in", "noise", "out", "fast", "input", "feeder",
                "target_bus", "n_experiments", "eval_draws"):
        v = getattr(args, key)
        if v is not None:
            values[key] = v
    kf = dict(values.get("kf", {}))
    for key in ("process_noise", "meas_noise", "init_cov"):
        v = getattr(args, f"kf_{key}")
        if v is not None:
            kf[key] = v
    values["kf"] = kf
    values["mode"] = args.mode
    try:
        cfg = ExperimentConfig(**values)
    except TypeError as exc:
        raise ConfigError("config", str(exc)) from None
    return cfg.validate()


def _meta(cfg: ExperimentConfig, **extra):
    M, m = cfg.chain_length
    return {"mode": cfg.mode, "seed": cfg.seed, "M": M, "m": m, **extra}


def _feeder(cfg):
    return load_feeder(cfg.feeder) if cfg.feeder else ieee33()


def _zip_experiment(cfg) -> ZipExperimentConfig:
    try:
        return ZipExperimentConfig(
            target_bus=cfg.target_bus,
            true_params=ZipParams(*map(float, cfg.true_alpha)),
            n_experiments=cfg.n_experiments,
            load_factor_range=tuple(cfg.load_factor_range),
            noise_sigma=cfg.noise_level,
            seed=cfg.seed,
        )
    except InvalidParameterError as exc:
        raise ConfigError("zip experiment", str(exc)) from None


def _write_fit(cfg, out, chain):
    meta = _meta(cfg)
    summaries = summarize_all(chain, cfg.level, cfg.bins)
    paths = [
        csvio.write_chain(out / "chain.csv", chain, meta),
        csvio.write_summary(out / "summary.csv", summaries, meta),
    ]
    paths += [csvio.write_histogram(out / f"hist_{s.name}.csv", s, meta) for s in summaries]
    return summaries, paths


def run(cfg: ExperimentConfig) -> list[Path]:
    """Execute one configured experiment; returns the files written."""
    out = Path(cfg.out)
    M, m = cfg.chain_length
    meta = _meta(cfg)
    written = []
    if cfg.mode == "gen-zip":
        feeder = _feeder(cfg)
        data = generate_zip_dataset(_zip_experiment(cfg), feeder)
        written.append(csvio.write_zip_dataset(out / "zip_data.csv", data, _meta(cfg, redraws=data.meta["redraws"])))
    elif cfg.mode == "gen-im":
        traj = im_scenario(duration=cfg.duration, dt=cfg.dt, dip=cfg.dip)
        data = add_im_noise(traj, cfg.noise_level, np.random.default_rng(cfg.seed))
        written.append(csvio.write_im_dataset(out / "im_data.csv", data, meta))
    elif cfg.mode == "fit-zip":
        data = csvio.read_zip_dataset(cfg.input)
        chain = gibbs_zip(data, zip_priors(cfg), M, m, seed=cfg.seed)
        summaries, paths = _write_fit(cfg, out, chain)
        a1 = next(s.mean for s in summaries if s.name == "alpha1")
        a2 = next(s.mean for s in summaries if s.name == "alpha2")
        log.info("alpha = (%.4f, %.4f, %.4f)", a1, a2, 1 - a1 - a2)
        written += paths
    elif cfg.mode == "fit-im":
        data = csvio.read_im_dataset(cfg.input)
        chain = gibbs_im(data, im_priors(cfg), M, m, seed=cfg.seed)
        written += _write_fit(cfg, out, chain)[1]
    elif cfg.mode == "bench-zip":
        exp = _zip_experiment(cfg)
        rows, data, _ = benchmark_zip(
            exp, _feeder(cfg), M, m, zip_priors(cfg), kf_config(cfg), cfg.eval_draws, cfg.seed
        )
        table = [
            (r.method, *r.params.coefficients, 100 * r.voltage_error, 100 * r.power_error) for r in rows
        ]
        written.append(
            csvio.write_csv(
                out / "comparison.csv",
                ("method", "alpha1", "alpha2", "alpha3", "voltage_err_pct", "power_err_pct"),
                table,
                meta,
            )
        )
        written.append(csvio.write_zip_dataset(out / "zip_data.csv", data, meta))
    elif cfg.mode == "bench-im":
        traj = im_scenario(duration=cfg.duration, dt=cfg.dt, dip=cfg.dip)
        rows, data, _ = benchmark_im(cfg.noise_level, cfg.seed, M, m, im_priors(cfg), kf_config(cfg), traj)
        truth = derived_coeffs(traj.phys)
        header = ("method", *COEFF_NAMES, *(f"{n}_err_pct" for n in COEFF_NAMES))
        table = [("true", *truth.coefficients(), *([0.0] * 5))]
        table += [(r.method, *r.coeffs.coefficients(), *(100 * r.relative_errors)) for r in rows]
        written.append(csvio.write_csv(out / "comparison.csv", header, table, meta))
    return written


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        cfg = load_config(args)
    except ConfigError as exc:
        print(f"bayesload: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        for path in run(cfg):
            print(path)
    except ConfigError as exc:
        print(f"bayesload: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InvalidParameterError as exc:
        print(f"bayesload: invalid input in {cfg.mode}: {exc}", file=sys.stderr)
        return EXIT_CONFIG if cfg.mode.startswith("fit") else EXIT_NUMERIC
    except (BayesLoadError, np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"bayesload: {cfg.mode} failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK
