"""End-to-end acceptance checks at their stated tolerances.

Each test records a pass/fail line that is printed in the terminal summary.
"""

import time

import numpy as np
import pytest

from bayesload.baselines import ls_zip
from bayesload.datagen import (
    ZipBus,
    ZipExperimentConfig,
    generate_zip_dataset,
    solve_power_flow,
    zip_reconstruction_errors,
)
from bayesload.diagnostics import burn_in_check, coverage_test, summarize
from bayesload.distributions import GammaSpec, NormalSpec, make_rng, sample_gamma, sample_normal, sample_uniform
from bayesload.experiments import benchmark_im, benchmark_zip
from bayesload.motor import COEFF_NAMES
from bayesload.zipload import ZipParams, chain_estimate, gibbs_zip

import conjugacy
import oracles
from conftest import record_criterion

pytestmark = [pytest.mark.acceptance, pytest.mark.slow]

TRUE = ZipParams(0.25, 0.25)
SEED = 0
REPS = 20


@pytest.fixture(scope="module")
def zip_run(feeder):
    """The reference ZIP experiment: data, chain and wall time."""
    t0 = time.perf_counter()
    cfg = ZipExperimentConfig(seed=SEED)
    data = generate_zip_dataset(cfg, feeder)
    chain = gibbs_zip(data, M=40000, m=5000, seed=SEED)
    return data, chain, time.perf_counter() - t0


def test_1_zip_posterior_recovery(zip_run):
    _, chain, elapsed = zip_run
    est = chain_estimate(chain)
    e1, e2 = abs(est.alpha1 - 0.25), abs(est.alpha2 - 0.25)
    ok = e1 <= 0.02 and e2 <= 0.02 and elapsed < 120
    record_criterion(
        1, ok, f"alpha1={est.alpha1:.4f} alpha2={est.alpha2:.4f} need within 0.02 of 0.25; {elapsed:.1f}s"
    )
    assert elapsed < 120
    assert e1 <= 0.02 and e2 <= 0.02


def test_2_zip_reconstruction_error(zip_run, feeder):
    _, chain, _ = zip_run
    errs = zip_reconstruction_errors(
        feeder, 18, TRUE, chain_estimate(chain), 100, rng=np.random.default_rng(SEED + 1)
    )
    dv, dp = errs["estimate"]
    mv, mp = float(np.median(dv)), float(np.median(dp))
    record_criterion(2, mv < 5e-4 and mp < 5e-3, f"median |dV|={mv:.2e} p.u., |dP|={mp:.2e} of P0")
    assert mv < 5e-4
    assert mp < 5e-3


def test_3_im_recovery():
    t0 = time.perf_counter()
    rows, _, _ = benchmark_im(noise=0.05, seed=SEED, M=40000, m=5000)
    elapsed = time.perf_counter() - t0
    rel = next(r for r in rows if r.method == "GS").relative_errors
    ok = np.all(rel <= 0.06) and elapsed < 300
    detail = " ".join(f"{n}={100 * e:.2f}%" for n, e in zip(COEFF_NAMES, rel))
    record_criterion(3, ok, f"{detail}; {elapsed:.1f}s")
    assert elapsed < 300
    assert np.all(rel <= 0.06)


def test_4_benchmark_ordering(feeder):
    v = {m: [] for m in ("GS", "LS", "KF")}
    p = {m: [] for m in ("GS", "LS", "KF")}
    for rep in range(REPS):
        rows, _, _ = benchmark_zip(ZipExperimentConfig(seed=1000 + rep), feeder, seed=1000 + rep)
        for r in rows:
            v[r.method].append(r.voltage_error)
            p[r.method].append(r.power_error)
    mv = {k: float(np.median(x)) for k, x in v.items()}
    mp = {k: float(np.median(x)) for k, x in p.items()}
    zip_ok = mv["GS"] < mv["KF"] < mv["LS"] and mp["GS"] < mp["KF"] < mp["LS"]

    im = {"GS": [], "LS": []}
    for rep in range(REPS):
        rows, _, _ = benchmark_im(noise=0.05, seed=2000 + rep)
        for r in rows:
            if r.method in im:
                im[r.method].append(r.relative_errors)
    gs, ls = np.median(im["GS"], axis=0), np.median(im["LS"], axis=0)
    im_ok = bool(np.all(gs <= ls))

    detail = (
        "ZIP median dV " + " ".join(f"{k}={mv[k]:.3e}" for k in ("GS", "KF", "LS"))
        + "; dP " + " ".join(f"{k}={mp[k]:.3e}" for k in ("GS", "KF", "LS"))
        + "; IM median GS-LS rel err " + " ".join(f"{n}={g - l:+.1e}" for n, g, l in zip(COEFF_NAMES, gs, ls))
    )
    record_criterion(4, zip_ok and im_ok, detail)
    assert mv["GS"] < mv["KF"] < mv["LS"]
    assert mp["GS"] < mp["KF"] < mp["LS"]
    assert im_ok


def test_5_conjugacy_oracle():
    t0 = time.perf_counter()
    rng = np.random.default_rng(SEED)
    dm = dv = 0.0
    for _ in range(50):
        for rows in (
            conjugacy.zip_case_errors(oracles.random_zip_case(rng)),
            conjugacy.im_case_errors(oracles.random_im_records(rng), oracles.random_im_state(rng)),
        ):
            a, b = conjugacy.worst(rows)
            dm, dv = max(dm, a), max(dv, b)
    elapsed = time.perf_counter() - t0
    ok = dm < 1e-6 and dv < 1e-5 and elapsed < 60
    record_criterion(5, ok, f"max mean diff {dm:.1e}, max variance diff {dv:.1e}; {elapsed:.1f}s")
    assert dm < 1e-6 and dv < 1e-5
    assert elapsed < 60


def test_6_power_flow_oracle(feeder):
    res = solve_power_flow(feeder)
    V = res.voltages[0]
    Vo, Y, _ = oracles.ybus_power_flow(
        feeder.bus_ids, feeder.load_p, feeder.load_q, feeder.branches, feeder.base_kv, feeder.base_mva, 1
    )
    dv = float(np.max(np.abs(np.abs(V) - np.abs(Vo))))
    mis = np.abs(V * np.conj(Y @ V) + res.loads[0])
    mis[feeder.slack_index] = 0.0
    mm = float(mis.max())
    record_criterion(6, dv < 1e-4 and mm < 1e-8, f"max |V| diff {dv:.1e} p.u., max mismatch {mm:.1e}")
    assert dv < 1e-4
    assert mm < 1e-8


def _moment_z(x, mean, var, mu4):
    """z-scores of sample mean and sample variance against analytic values."""
    n = x.size
    z_mean = (x.mean() - mean) / np.sqrt(var / n)
    z_var = (x.var(ddof=1) - var) / np.sqrt((mu4 - var**2) / n)
    return abs(z_mean), abs(z_var)


def test_7_sampler_moments():
    n = 1_000_000
    rng = make_rng(SEED)
    checks = {}
    x = sample_normal(NormalSpec(5.0, 4.0), rng, n)
    checks["normal"] = _moment_z(x, 5.0, 0.25, 3 * 0.25**2)
    for k, rate in ((1.0, 1.0), (2.0, 4.0), (0.5, 2.0)):
        th = 1.0 / rate
        x = sample_gamma(GammaSpec(k, rate), rng, n)
        checks[f"gamma({k},{rate})"] = _moment_z(x, k * th, k * th**2, 3 * k * (k + 2) * th**4)
    lo, hi = 0.1, 4.5
    x = sample_uniform(lo, hi, rng, n)
    checks["uniform"] = _moment_z(x, (lo + hi) / 2, (hi - lo) ** 2 / 12, (hi - lo) ** 4 / 80)
    worst = max(max(z) for z in checks.values())
    record_criterion(7, worst < 3, "max |z| " + " ".join(f"{k}={max(z):.2f}" for k, z in checks.items()))
    assert worst < 3


def test_8_coverage(feeder):
    summaries = []
    for rep in range(100):
        data = generate_zip_dataset(ZipExperimentConfig(seed=3000 + rep), feeder)
        chain = gibbs_zip(data, M=40000, m=5000, seed=3000 + rep)
        summaries.append(summarize(chain, "alpha1"))
    rate = coverage_test(0.25, summaries)
    hits = round(100 * rate)
    record_criterion(8, 85 <= hits <= 100, f"{hits}/100 intervals contain alpha1=0.25")
    assert 85 <= hits <= 100


def test_9_burn_in_stability(zip_run):
    _, chain, _ = zip_run
    rep = burn_in_check(chain)
    detail = " ".join(f"{r.name}: {r.difference:.2e} vs 3SE={3 * r.std_error:.2e}" for r in rep.rows)
    record_criterion(9, rep.stable, detail)
    assert rep.stable
