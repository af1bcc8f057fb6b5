"""Synthetic measurement generation.

* Radial-feeder power flow (backward/forward sweep) with one bus optionally
  replaced by a voltage-dependent ZIP load, used to produce ``(V/V0, P/P0)``
  pairs under randomly scaled background loads.
* Fixed-step RK4 simulation of the induction motor equations, producing the
  regression records consumed by :func:`bayesload.motor.gibbs_im`.
"""

from __future__ import annotations

import csv
import io
import logging
import math
from dataclasses import dataclass, field
from functools import cached_property
from importlib import resources
from pathlib import Path

import numpy as np
from scipy import optimize

from .distributions import RngState, sample_uniform
from .errors import ConvergenceError, IntegrationError, InvalidParameterError
from .motor import ImCoeffs, ImDataset, ImPhysical
from .zipload import ZipDataset, ZipParams, zip_power

log = logging.getLogger(__name__)

DEFAULT_PF_TOL = 1e-10
DEFAULT_PF_MAX_ITER = 100


# --------------------------------------------------------------------------
# feeder description
# --------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class FeederModel:
    """Radial distribution feeder.

    Loads are in kW/kvar, branch impedances in ohm. Bus ``bus_ids[0]`` need
    not be the slack; the slack is the root of the branch tree.
    """

    bus_ids: np.ndarray
    load_p: np.ndarray
    load_q: np.ndarray
    branches: np.ndarray  # rows: from, to, r_ohm, x_ohm
    slack_voltage: float = 1.0
    base_kv: float = 12.66
    base_mva: float = 10.0

    def __post_init__(self):
        ids = np.asarray(self.bus_ids, dtype=int)
        br = np.asarray(self.branches, dtype=float).reshape(-1, 4)
        object.__setattr__(self, "bus_ids", ids)
        object.__setattr__(self, "load_p", np.asarray(self.load_p, dtype=float))
        object.__setattr__(self, "load_q", np.asarray(self.load_q, dtype=float))
        object.__setattr__(self, "branches", br)
        if len(set(ids.tolist())) != ids.size:
            raise InvalidParameterError("duplicate bus ids")
        if self.load_p.shape != ids.shape or self.load_q.shape != ids.shape:
            raise InvalidParameterError("load vectors must match the bus list")
        if np.any(br[:, 2:] < 0):
            raise InvalidParameterError("branch r and x must be non-negative")
        if np.any(br[:, 2] + br[:, 3] <= 0):
            raise InvalidParameterError("zero-impedance branches are not supported")
        if br.shape[0] != ids.size - 1:
            raise InvalidParameterError(
                f"a radial feeder with {ids.size} buses needs {ids.size - 1} branches, got {br.shape[0]}"
            )
        self._topology  # validates connectivity

    @property
    def n_buses(self) -> int:
        return self.bus_ids.size

    @cached_property
    def _index(self) -> dict:
        return {b: i for i, b in enumerate(self.bus_ids.tolist())}

    def index_of(self, bus) -> int:
        try:
            return self._index[int(bus)]
        except KeyError:
            raise InvalidParameterError(f"bus {bus} not in feeder") from None

    @cached_property
    def _topology(self):
        n = self.n_buses
        parent = np.full(n, -1)
        z = np.zeros(n, dtype=complex)
        zbase = self.base_kv**2 / self.base_mva
        for f, t, r, x in self.branches:
            i, j = self.index_of(f), self.index_of(t)
            if parent[j] != -1:
                raise InvalidParameterError(f"bus {int(t)} has two upstream branches")
            parent[j] = i
            z[j] = complex(r, x) / zbase
        roots = np.flatnonzero(parent == -1)
        if roots.size != 1:
            raise InvalidParameterError("branch graph is not a single tree")
        root = int(roots[0])
        # subtree[k, j] = 1 when bus k lies at or below the branch feeding j
        subtree = np.zeros((n, n))
        for k in range(n):
            j, seen = k, 0
            while j != root:
                subtree[k, j] = 1.0
                j = parent[j]
                seen += 1
                if seen > n:
                    raise InvalidParameterError("branch graph contains a cycle")
        return root, parent, z, subtree

    @property
    def slack_index(self) -> int:
        return self._topology[0]

    @property
    def nominal_load(self) -> np.ndarray:
        """Complex bus loads in per-unit of ``base_mva``."""
        return (self.load_p + 1j * self.load_q) / (1000.0 * self.base_mva)

    @cached_property
    def base_voltages(self) -> np.ndarray:
        """Voltage magnitudes of the nominal constant-power case."""
        return power_flow(self)


def _parse_feeder_text(text: str) -> FeederModel:
    section = None
    branches, buses = [], []
    base = {"base_kv": 12.66, "base_mva": 10.0, "slack_voltage": 1.0}
    for lineno, row in enumerate(csv.reader(io.StringIO(text)), 1):
        if not row or row[0].lstrip().startswith("#"):
            continue
        row = [c.strip() for c in row]
        if row[0] == "section":
            section = row[1]
            continue
        try:
            vals = [float(c) for c in row]
        except ValueError:
            raise InvalidParameterError(f"feeder line {lineno}: non-numeric row {row}") from None
        if section == "branch" and len(vals) == 4:
            branches.append(vals)
        elif section == "bus" and len(vals) == 3:
            buses.append(vals)
        elif section == "base" and len(vals) == 3:
            base = dict(zip(("base_kv", "base_mva", "slack_voltage"), vals))
        else:
            raise InvalidParameterError(f"feeder line {lineno}: unexpected row in section {section!r}")
    if not buses or not branches:
        raise InvalidParameterError("feeder file needs both branch and bus sections")
    buses = np.array(buses)
    return FeederModel(buses[:, 0].astype(int), buses[:, 1], buses[:, 2], np.array(branches), **base)


def load_feeder(path) -> FeederModel:
    """Read a feeder CSV with ``section,base|branch|bus`` blocks."""
    return _parse_feeder_text(Path(path).read_text())


def ieee33() -> FeederModel:
    """The 33-bus radial test feeder shipped with the package (12.66 kV, 10 MVA)."""
    text = resources.files("bayesload").joinpath("data/ieee33.csv").read_text()
    return _parse_feeder_text(text)


# --------------------------------------------------------------------------
# power flow
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class ZipBus:
    """A bus whose load follows a ZIP characteristic around ``(V0, S0)``.

    ``v0`` defaults to the bus voltage in the feeder's nominal case. The same
    coefficients scale both P and Q.
    """

    bus: int
    params: ZipParams
    v0: float | None = None


@dataclass(eq=False)
class SweepResult:
    voltages: np.ndarray  # complex, (batch, n_buses)
    mismatch: np.ndarray  # max per-bus |dS| per case
    converged: np.ndarray  # bool per case
    iterations: int
    loads: np.ndarray = field(repr=False)  # complex loads at the solution


def _sweep(feeder: FeederModel, loads, zip_bus: ZipBus | None, tol, max_iter) -> SweepResult:
    """Backward/forward sweep in path-matrix form, vectorised over cases.

    Backward: branch currents are subtree sums of load currents. Forward:
    bus voltage is the slack voltage minus the drops along the path.
    """
    root, parent, z, subtree = feeder._topology
    loads = np.atleast_2d(np.asarray(loads, dtype=complex))
    batch, n = loads.shape
    if zip_bus is not None:
        k = feeder.index_of(zip_bus.bus)
        v0 = zip_bus.v0 if zip_bus.v0 is not None else feeder.base_voltages[k]
        s0 = feeder.nominal_load[k]

    def effective(V):
        if zip_bus is None:
            return loads
        s = loads.copy()
        # inline so that diverging iterates propagate as nan instead of raising
        a1, a2, a3 = zip_bus.params.coefficients
        x = np.abs(V[:, k]) / v0
        s[:, k] = s0 * (a1 * x**2 + a2 * x + a3)
        return s

    vs = feeder.slack_voltage
    V = np.full((batch, n), vs, dtype=complex)
    mismatch = np.full(batch, np.inf)
    for it in range(1, max_iter + 1):
        S = effective(V)
        I = np.conj(S / V)
        I[:, root] = 0.0
        J = I @ subtree  # branch current into each bus
        V_new = vs - (J * z) @ subtree.T
        # power balance at V_new with the currents that produced it
        mismatch = np.max(np.abs(V_new * np.conj(I) - effective(V_new) * (np.arange(n) != root)), axis=1)
        V = V_new
        bad = ~np.all(np.isfinite(V), axis=1)
        mismatch[bad] = np.inf
        if np.all((mismatch < tol) | bad):
            break
    return SweepResult(V, mismatch, mismatch < tol, it, effective(V))


def power_flow(
    feeder: FeederModel,
    zip_at=None,
    tol: float = DEFAULT_PF_TOL,
    max_iter: int = DEFAULT_PF_MAX_ITER,
    load_scale=None,
) -> np.ndarray:
    """Bus voltage magnitudes (p.u.) of a radial feeder.

    Parameters
    ----------
    feeder : FeederModel
    zip_at : ZipBus or (bus, ZipParams), optional
        Replace that bus's constant-power load by a ZIP load. The sweep and
        the voltage-dependent injection are iterated to a joint fixed point.
    tol : float
        Maximum per-bus complex power mismatch (p.u.) at the solution.
    max_iter : int
    load_scale : array_like, optional
        Per-bus multipliers applied to the nominal loads.

    Raises
    ------
    ConvergenceError
        If the mismatch is still above ``tol`` after ``max_iter`` sweeps.
    """
    res = solve_power_flow(feeder, zip_at, tol, max_iter, load_scale)
    if not res.converged[0]:
        raise ConvergenceError(
            f"power flow did not converge in {max_iter} iterations (mismatch {res.mismatch[0]:.3g})",
            mismatch=float(res.mismatch[0]),
            iterations=res.iterations,
        )
    return np.abs(res.voltages[0])


def _as_zip_bus(zip_at):
    if zip_at is None or isinstance(zip_at, ZipBus):
        return zip_at
    bus, params = zip_at
    return ZipBus(int(bus), params)


def solve_power_flow(feeder, zip_at=None, tol=DEFAULT_PF_TOL, max_iter=DEFAULT_PF_MAX_ITER, load_scale=None):
    """Batched power flow; returns a :class:`SweepResult` without raising.

    ``load_scale`` may be 2-D ``(cases, n_buses)`` to solve many load
    scenarios in one sweep.
    """
    if not tol > 0 or max_iter < 1:
        raise InvalidParameterError("tol must be positive and max_iter >= 1")
    loads = feeder.nominal_load
    if load_scale is not None:
        loads = np.asarray(load_scale, dtype=float) * loads
    return _sweep(feeder, loads, _as_zip_bus(zip_at), tol, max_iter)


# --------------------------------------------------------------------------
# ZIP experiments
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class ZipExperimentConfig:
    target_bus: int = 18
    true_params: ZipParams = ZipParams(0.25, 0.25)
    n_experiments: int = 1000
    load_factor_range: tuple = (0.1, 4.5)
    noise_sigma: float = 0.1
    seed: int | None = None

    def __post_init__(self):
        lo, hi = self.load_factor_range
        if not lo < hi:
            raise InvalidParameterError("load factor range needs lo < hi")
        if self.noise_sigma < 0:
            raise InvalidParameterError("noise_sigma must be non-negative")
        if self.n_experiments < 1:
            raise InvalidParameterError("n_experiments must be positive")


def _draw_scenarios(feeder, zip_bus, n, lo, hi, rng, tol, max_iter, max_redraws=None):
    """Solve ``n`` converged random-load cases; non-convergent draws are replaced."""
    k = feeder.index_of(zip_bus.bus)
    factors = sample_uniform(lo, hi, rng, size=(n, feeder.n_buses))
    factors[:, k] = 1.0
    res = _sweep(feeder, factors * feeder.nominal_load, zip_bus, tol, max_iter)
    V, ok = res.voltages, res.converged
    redraws = 0
    limit = max_redraws if max_redraws is not None else 10 * n
    for i in np.flatnonzero(~ok):
        while True:
            if redraws >= limit:
                raise ConvergenceError(f"gave up after {redraws} non-convergent load draws")
            redraws += 1
            f = sample_uniform(lo, hi, rng, size=feeder.n_buses)
            f[k] = 1.0
            r = _sweep(feeder, f * feeder.nominal_load, zip_bus, tol, max_iter)
            if r.converged[0]:
                factors[i], V[i] = f, r.voltages[0]
                break
    if redraws:
        log.info("replaced %d non-convergent load draws", redraws)
    return factors, V, redraws


def generate_zip_dataset(
    cfg: ZipExperimentConfig,
    feeder: FeederModel | None = None,
    rng: RngState | None = None,
    tol: float = DEFAULT_PF_TOL,
    max_iter: int = DEFAULT_PF_MAX_ITER,
) -> ZipDataset:
    """Measurements at ``cfg.target_bus`` under randomly scaled background loads.

    Every other bus load is multiplied by an independent ``U[lo, hi)`` draw,
    the power flow is solved with the ZIP load in place, and ``x = V/V0``,
    ``y = P/P0 + N(0, noise_sigma^2)`` are recorded. ``V0``/``P0`` come from
    the unscaled case. ``meta['redraws']`` counts replaced draws.
    """
    feeder = feeder or ieee33()
    if rng is None:
        rng = np.random.default_rng(cfg.seed)
    zb = ZipBus(cfg.target_bus, cfg.true_params)
    k = feeder.index_of(cfg.target_bus)
    lo, hi = cfg.load_factor_range
    _, V, redraws = _draw_scenarios(feeder, zb, cfg.n_experiments, lo, hi, rng, tol, max_iter)
    x = np.abs(V[:, k]) / feeder.base_voltages[k]
    y = zip_power(cfg.true_params, x)
    if cfg.noise_sigma > 0:
        y = y + rng.normal(0.0, cfg.noise_sigma, size=x.size)
    return ZipDataset(x, y, meta={"redraws": redraws, "seed": cfg.seed})


def zip_reconstruction_errors(
    feeder: FeederModel,
    target_bus: int,
    true_params: ZipParams,
    estimates,
    n_draws: int = 100,
    load_factor_range=(0.1, 4.5),
    rng: RngState | None = None,
    tol: float = DEFAULT_PF_TOL,
    max_iter: int = DEFAULT_PF_MAX_ITER,
):
    """Voltage and power differences between true and estimated ZIP loads.

    Each fresh load draw is solved once with the true ZIP bus and once per
    estimate. Returns ``{name: (dV, dP)}`` with ``|dV|`` in p.u. and ``|dP|``
    as a fraction of ``P0``, one entry per draw.
    """
    if isinstance(estimates, ZipParams):
        estimates = {"estimate": estimates}
    rng = rng if rng is not None else np.random.default_rng()
    k = feeder.index_of(target_bus)
    v0 = feeder.base_voltages[k]
    lo, hi = load_factor_range
    factors, V_true, _ = _draw_scenarios(feeder, ZipBus(target_bus, true_params), n_draws, lo, hi, rng, tol, max_iter)
    vt = np.abs(V_true[:, k])
    pt = zip_power(true_params, vt / v0)
    out = {}
    for name, est in estimates.items():
        res = _sweep(feeder, factors * feeder.nominal_load, ZipBus(target_bus, est), tol, max_iter)
        if not np.all(res.converged):
            raise ConvergenceError(f"power flow with {name} parameters did not converge")
        ve = np.abs(res.voltages[:, k])
        out[name] = (np.abs(ve - vt), np.abs(zip_power(est, ve / v0) - pt))
    return out


# --------------------------------------------------------------------------
# induction motor simulation
# --------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ImTrajectory:
    dt: float
    data: ImDataset
    phys: ImPhysical

    @property
    def records(self):
        return [self.data.record(i) for i in range(self.data.n)]


def _im_algebra(phys: ImPhysical, Ed, Eq, Ud, Uq):
    xp = phys.x_transient
    z2 = phys.Rs**2 + xp**2
    Id = (phys.Rs * (Ud - Ed) + xp * (Uq - Eq)) / z2
    Iq = (phys.Rs * (Uq - Eq) - xp * (Ud - Ed)) / z2
    return Id, Iq


def im_rhs(phys: ImPhysical, state, Ud, Uq):
    """Time derivatives ``(dEd, dEq, domega)`` and currents ``(Id, Iq)``."""
    Ed, Eq, w = state
    Id, Iq = _im_algebra(phys, Ed, Eq, Ud, Uq)
    tp = phys.t_transient
    dx = phys.x_open - phys.x_transient
    dEd = -(Ed + dx * Iq) / tp - (w - 1.0) * Eq
    dEq = -(Eq - dx * Id) / tp + (w - 1.0) * Ed
    # mechanical torque T0*(A w^2 + B w + C) with A = 1, B = C = 0
    dw = -(phys.T0 * w * w - (Ed * Id + Eq * Iq)) / (2.0 * phys.H)
    return (dEd, dEq, dw), (Id, Iq)


def im_equilibrium(phys: ImPhysical, Ud: float = 1.0, Uq: float = 0.0):
    """Steady operating point ``(Ed, Eq, omega)`` for constant terminal voltage.

    Several starting slips are tried; the highest-speed root is returned.
    """
    best = None
    for w0 in (0.99, 0.95, 0.9, 0.8, 0.6, 0.4):
        for scale in (0.9, 0.5):
            guess = np.array([scale * Ud, scale * Uq - 0.1 * Ud, w0])
            sol = optimize.root(lambda s: im_rhs(phys, s, Ud, Uq)[0], guess, method="hybr", tol=1e-14)
            if not sol.success:
                continue
            if np.max(np.abs(im_rhs(phys, sol.x, Ud, Uq)[0])) > 1e-10 or not 0 < sol.x[2] < 1.5:
                continue
            if best is None or sol.x[2] > best[2]:
                best = sol.x
    if best is None:
        raise ConvergenceError("no motor equilibrium found")
    return tuple(float(v) for v in best)


def step_dip_inputs(duration=10.0, dt=1e-3, dip=0.1, t_step=None, u0=1.0):
    """Terminal voltage ``(Ud, Uq)`` with a step dip of ``dip`` p.u. at ``t_step``.

    ``t_step`` defaults to mid-trajectory.
    """
    n = int(round(duration / dt))
    t_step = duration / 2 if t_step is None else t_step
    t = np.arange(n) * dt
    u = np.zeros((n, 2))
    u[:, 0] = np.where(t < t_step, u0, u0 * (1.0 - dip))
    return u


def simulate_im(phys: ImPhysical, inputs, dt: float, init=None) -> ImTrajectory:
    """Integrate the motor with classic RK4 at fixed step ``dt``.

    ``inputs[k]`` is held constant over step ``k``. Record ``k`` stores the
    state at ``t = k*dt`` together with the exact right-hand side there, so
    the derivative targets are noise-free ``y_Ed``, ``y_Eq``, ``y_omega``
    and the currents are ``y_Id``, ``y_Iq``.

    ``init`` defaults to the equilibrium for ``inputs[0]``.
    """
    if not dt > 0:
        raise InvalidParameterError("dt must be positive")
    u = np.asarray(inputs, dtype=float).reshape(-1, 2)
    if init is None:
        init = im_equilibrium(phys, *u[0])
    s = np.asarray(init, dtype=float)
    rows = np.empty((u.shape[0], 12))
    for k, (Ud, Uq) in enumerate(u):
        k1, (Id, Iq) = im_rhs(phys, s, Ud, Uq)
        rows[k] = (s[0], s[1], Id, Iq, Ud, Uq, s[2], k1[0], k1[1], k1[2], Id, Iq)
        k1 = np.array(k1)
        k2 = np.array(im_rhs(phys, s + 0.5 * dt * k1, Ud, Uq)[0])
        k3 = np.array(im_rhs(phys, s + 0.5 * dt * k2, Ud, Uq)[0])
        k4 = np.array(im_rhs(phys, s + dt * k3, Ud, Uq)[0])
        s = s + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        if not np.all(np.isfinite(s)):
            raise IntegrationError(f"non-finite motor state at step {k}", step=k)
    return ImTrajectory(dt, ImDataset.from_array(rows), phys)


def final_state(traj: ImTrajectory):
    """State one step after the last record (re-integrated from it)."""
    d = traj.data
    s = np.array([d.Ed[-1], d.Eq[-1], d.omega[-1]])
    Ud, Uq = d.Ud[-1], d.Uq[-1]
    dt = traj.dt
    f = lambda x: np.array(im_rhs(traj.phys, x, Ud, Uq)[0])
    k1 = f(s)
    k2 = f(s + 0.5 * dt * k1)
    k3 = f(s + 0.5 * dt * k2)
    k4 = f(s + dt * k3)
    return s + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)


IM_TARGETS = ("y_Ed", "y_Eq", "y_omega", "y_Id", "y_Iq")


def add_im_noise(traj, sigma_rel: float, rng: RngState) -> ImDataset:
    """Perturb the five targets with Gaussian noise of std ``sigma_rel * RMS(target)``."""
    if not sigma_rel >= 0:
        raise InvalidParameterError("sigma_rel must be non-negative")
    data = traj.data if isinstance(traj, ImTrajectory) else traj
    if sigma_rel == 0:
        return data
    noisy = {}
    for name in IM_TARGETS:
        y = getattr(data, name)
        rms = math.sqrt(float(y @ y) / y.size)
        noisy[name] = y + rng.normal(0.0, sigma_rel * rms, size=y.size)
    return data.with_targets(**noisy)


def motor_for_coeffs(coeffs: ImCoeffs, Xr: float = 0.1, T0: float = 1.0) -> ImPhysical:
    """A physical motor whose aggregated coefficients equal ``coeffs``.

    Only used to build simulation scenarios. ``beta1``, ``beta2``, ``beta3``
    must be negative and ``alpha_b``, ``alpha_c`` positive; the rotor leakage
    reactance ``Xr`` is a free choice.
    """
    b1, b2, b3, ab, ac = coeffs.coefficients()
    if not (b1 < 0 and b2 < 0 and b3 < 0 and ab > 0 and ac > 0):
        raise InvalidParameterError("need beta1, beta2, beta3 < 0 and alpha_b, alpha_c > 0")
    z2 = 1.0 / (ab**2 + ac**2)  # Rs^2 + X'^2
    Rs, xp = ab * z2, ac * z2
    tp = -1.0 / b1
    dx = b2 / b1  # X - X' = Xm^2/(Xm + Xr)
    Xm = 0.5 * (dx + math.sqrt(dx * dx + 4.0 * dx * Xr))
    Xs = xp - Xm * Xr / (Xm + Xr)
    Rr = (Xm + Xr) / tp
    if Xs <= 0:
        raise InvalidParameterError(f"Xr={Xr} leaves no positive stator leakage; choose a smaller Xr")
    return ImPhysical(Rs=Rs, Xs=Xs, Xm=Xm, Rr=Rr, Xr=Xr, H=-0.5 / b3, T0=T0)


# coefficient magnitudes of the reference motor (beta signs follow their definitions)
REFERENCE_COEFFS = ImCoeffs(beta1=-0.0077, beta2=-0.018, beta3=-25.0, alpha_b=0.20, alpha_c=0.80)


def reference_motor() -> ImPhysical:
    return motor_for_coeffs(REFERENCE_COEFFS)
