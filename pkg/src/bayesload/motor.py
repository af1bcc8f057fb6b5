"""Third-order induction motor (IM) load model in regression form.

With ``A = 1`` (torque proportional to speed squared) and ``T0 = 1`` the
motor equations are linear in five aggregated coefficients::

    dEd/dt = b1*Ed + b2*Iq - (w - 1)*Eq
    dEq/dt = b1*Eq - b2*Id + (w - 1)*Ed
    dw/dt  = b3*(w**2 - Ed*Id - Eq*Iq)
    Id     = ab*(Ud - Ed) + ac*(Uq - Eq)
    Iq     = ab*(Uq - Eq) - ac*(Ud - Ed)

where ``b1 = -1/T'``, ``b2 = -(X - X')/T'``, ``b3 = -1/(2H)``,
``ab = Rs/(Rs^2 + X'^2)`` and ``ac = X'/(Rs^2 + X'^2)``. The E-equations share
noise precision ``tau_E``, the current equations share ``tau_I``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields
from typing import NamedTuple

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

COEFF_NAMES = ("beta1", "beta2", "beta3", "alpha_b", "alpha_c")
PRECISION_NAMES = ("tau_E", "tau_omega", "tau_I")
IM_PARAM_NAMES = COEFF_NAMES + PRECISION_NAMES

RECORD_FIELDS = ("Ed", "Eq", "Id", "Iq", "Ud", "Uq", "omega", "y_Ed", "y_Eq", "y_omega", "y_Id", "y_Iq")

DEFAULT_ITERATIONS = 40000
VAGUE_RATE = 1e-10
DEFAULT_BURN_IN = 5000


@dataclass(frozen=True)
class ImPhysical:
    """Physical motor parameters in per-unit (``H`` in seconds)."""

    Rs: float
    Xs: float
    Xm: float
    Rr: float
    Xr: float
    H: float
    T0: float = 1.0

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if not (math.isfinite(v) and v > 0):
                raise InvalidParameterError(f"{f.name} must be positive and finite, got {v}")

    @property
    def x_transient(self) -> float:
        """X' = Xs + Xm*Xr/(Xm + Xr)."""
        return self.Xs + self.Xm * self.Xr / (self.Xm + self.Xr)

    @property
    def x_open(self) -> float:
        """X = Xs + Xm."""
        return self.Xs + self.Xm

    @property
    def t_transient(self) -> float:
        """T' = (Xr + Xm)/Rr."""
        return (self.Xr + self.Xm) / self.Rr


@dataclass(frozen=True)
class ImCoeffs:
    beta1: float
    beta2: float
    beta3: float
    alpha_b: float
    alpha_c: float
    tau_E: float = float("nan")
    tau_omega: float = float("nan")
    tau_I: float = float("nan")

    def __post_init__(self):
        for name in COEFF_NAMES:
            if not math.isfinite(getattr(self, name)):
                raise InvalidParameterError(f"{name} must be finite")
        for name in PRECISION_NAMES:
            v = getattr(self, name)
            if not (math.isnan(v) or v > 0):
                raise InvalidParameterError(f"{name} must be positive, got {v}")

    def coefficients(self) -> np.ndarray:
        return np.array([getattr(self, n) for n in COEFF_NAMES])

    def relative_errors(self, truth: "ImCoeffs") -> np.ndarray:
        """``|est - true| / |true|`` for the five coefficients."""
        ref = truth.coefficients()
        return np.abs(self.coefficients() - ref) / np.abs(ref)


class ImRecord(NamedTuple):
    """One time sample: states, inputs, and the five regression targets."""

    Ed: float
    Eq: float
    Id: float
    Iq: float
    Ud: float
    Uq: float
    omega: float
    y_Ed: float
    y_Eq: float
    y_omega: float
    y_Id: float
    y_Iq: float


@dataclass(frozen=True, eq=False)
class ImDataset:
    """Column-oriented collection of IM records (one array per field)."""

    Ed: np.ndarray
    Eq: np.ndarray
    Id: np.ndarray
    Iq: np.ndarray
    Ud: np.ndarray
    Uq: np.ndarray
    omega: np.ndarray
    y_Ed: np.ndarray
    y_Eq: np.ndarray
    y_omega: np.ndarray
    y_Id: np.ndarray
    y_Iq: np.ndarray

    def __post_init__(self):
        n = None
        for name in RECORD_FIELDS:
            arr = np.asarray(getattr(self, name), dtype=float).ravel()
            if n is None:
                n = arr.size
            elif arr.size != n:
                raise InvalidParameterError(f"field {name} has {arr.size} rows, expected {n}")
            if not np.all(np.isfinite(arr)):
                raise InvalidParameterError(f"field {name} contains non-finite values")
            object.__setattr__(self, name, arr)

    @property
    def n(self) -> int:
        return self.Ed.size

    @classmethod
    def from_records(cls, records) -> "ImDataset":
        cols = np.array([tuple(r) for r in records], dtype=float).reshape(-1, len(RECORD_FIELDS))
        return cls(*cols.T)

    @classmethod
    def from_array(cls, table) -> "ImDataset":
        table = np.asarray(table, dtype=float).reshape(-1, len(RECORD_FIELDS))
        return cls(*table.T)

    def to_array(self) -> np.ndarray:
        return np.column_stack([getattr(self, n) for n in RECORD_FIELDS])

    def record(self, i: int) -> ImRecord:
        return ImRecord(*(float(getattr(self, n)[i]) for n in RECORD_FIELDS))

    def with_targets(self, **targets) -> "ImDataset":
        cols = {n: getattr(self, n) for n in RECORD_FIELDS}
        cols.update(targets)
        return ImDataset(**cols)


@dataclass(frozen=True)
class ImPriors:
    beta1: NormalSpec
    beta2: NormalSpec
    beta3: NormalSpec
    alpha_b: NormalSpec
    alpha_c: NormalSpec
    tau_E: GammaSpec
    tau_omega: GammaSpec
    tau_I: GammaSpec

    @classmethod
    def default(cls) -> "ImPriors":
        """Broad priors that do not encode any particular motor.

        The precision priors have a near-zero rate: regression targets are
        time derivatives of order 1e-3, and a unit rate would swamp their
        residual sum of squares.
        """
        return cls(
            beta1=NormalSpec(0.0, 1.0),
            beta2=NormalSpec(0.0, 1.0),
            beta3=NormalSpec.from_variance(0.0, 100.0),
            alpha_b=NormalSpec(0.5, 1.0),
            alpha_c=NormalSpec(0.5, 1.0),
            tau_E=GammaSpec(1.0, VAGUE_RATE),
            tau_omega=GammaSpec(1.0, VAGUE_RATE),
            tau_I=GammaSpec(1.0, VAGUE_RATE),
        )

    def replace(self, **kw) -> "ImPriors":
        values = {f.name: getattr(self, f.name) for f in fields(self)}
        values.update(kw)
        return ImPriors(**values)


def derived_coeffs(phys: ImPhysical) -> ImCoeffs:
    """Aggregate regression coefficients of a physical motor."""
    xp = phys.x_transient
    tp = phys.t_transient
    z2 = phys.Rs**2 + xp**2
    return ImCoeffs(
        beta1=-1.0 / tp,
        beta2=-(phys.x_open - xp) / tp,
        beta3=-1.0 / (2.0 * phys.H),
        alpha_b=phys.Rs / z2,
        alpha_c=xp / z2,
    )


def im_predict(coeffs: ImCoeffs, rec):
    """Noise-free right-hand sides of the five regression equations.

    ``rec`` is anything with the :data:`RECORD_FIELDS` attributes; arrays
    broadcast, so an :class:`ImDataset` gives whole-series predictions.
    """
    slip = rec.omega - 1.0
    dUd = rec.Ud - rec.Ed
    dUq = rec.Uq - rec.Eq
    return (
        coeffs.beta1 * rec.Ed + coeffs.beta2 * rec.Iq - slip * rec.Eq,
        coeffs.beta1 * rec.Eq - coeffs.beta2 * rec.Id + slip * rec.Ed,
        coeffs.beta3 * (rec.omega**2 - rec.Ed * rec.Id - rec.Eq * rec.Iq),
        coeffs.alpha_b * dUd + coeffs.alpha_c * dUq,
        coeffs.alpha_b * dUq - coeffs.alpha_c * dUd,
    )


def im_residuals(coeffs: ImCoeffs, rec):
    """Observed minus predicted for ``(y_Ed, y_Eq, y_omega, y_Id, y_Iq)``."""
    pred = im_predict(coeffs, rec)
    obs = (rec.y_Ed, rec.y_Eq, rec.y_omega, rec.y_Id, rec.y_Iq)
    return tuple(o - p for o, p in zip(obs, pred))


def _normal_update(prior: NormalSpec, tau: float, szz: float, szr: float) -> NormalSpec:
    precision = prior.precision + tau * szz
    return NormalSpec((prior.precision * prior.mean + tau * szr) / precision, precision)


def cond_post_linear(y, z, offset, tau: float, prior: NormalSpec) -> NormalSpec:
    """Conjugate update for one coefficient ``c`` in ``y = c*z + offset + noise``.

    precision = p0 + tau * sum(z^2)
    mean      = [p0*mu0 + tau * sum(z * (y - offset))] / precision
    """
    if not (math.isfinite(tau) and tau > 0):
        raise InvalidParameterError(f"noise precision must be positive and finite, got {tau}")
    y = np.asarray(y, dtype=float).ravel()
    z = np.asarray(z, dtype=float).ravel()
    offset = np.broadcast_to(np.asarray(offset, dtype=float), y.shape).ravel()
    if y.size == 0:
        return prior
    return _normal_update(prior, tau, float(z @ z), float(z @ (y - offset)))


def cond_post_precision(residuals, prior: GammaSpec) -> GammaSpec:
    """Gamma update ``shape + n_eff/2``, ``rate + SSE/2`` over pooled residuals."""
    r = np.concatenate([np.asarray(a, dtype=float).ravel() for a in residuals])
    return GammaSpec(prior.shape + 0.5 * r.size, prior.rate + 0.5 * float(r @ r))


def linear_targets(data: ImDataset, name: str, current: ImCoeffs):
    """Stacked ``(y, z, offset)`` for one coefficient, others held at ``current``.

    A coefficient that appears in two equations gets both sets of rows, so
    :func:`cond_post_linear` on the result is its exact full conditional.
    """
    d, c = data, current
    slip = d.omega - 1.0
    dUd = d.Ud - d.Ed
    dUq = d.Uq - d.Eq
    cat = np.concatenate
    if name == "beta1":
        return (cat([d.y_Ed, d.y_Eq]), cat([d.Ed, d.Eq]),
                cat([c.beta2 * d.Iq - slip * d.Eq, -c.beta2 * d.Id + slip * d.Ed]))
    if name == "beta2":
        return (cat([d.y_Ed, d.y_Eq]), cat([d.Iq, -d.Id]),
                cat([c.beta1 * d.Ed - slip * d.Eq, c.beta1 * d.Eq + slip * d.Ed]))
    if name == "beta3":
        return d.y_omega, d.omega**2 - d.Ed * d.Id - d.Eq * d.Iq, np.zeros(d.n)
    if name == "alpha_b":
        return cat([d.y_Id, d.y_Iq]), cat([dUd, dUq]), cat([c.alpha_c * dUq, -c.alpha_c * dUd])
    if name == "alpha_c":
        return cat([d.y_Id, d.y_Iq]), cat([dUq, -dUd]), cat([c.alpha_b * dUd, c.alpha_b * dUq])
    raise KeyError(f"unknown IM coefficient {name!r}")


_PRECISION_EQUATIONS = {"tau_E": (0, 1), "tau_omega": (2,), "tau_I": (3, 4)}
_COEFF_PRECISION = {"beta1": "tau_E", "beta2": "tau_E", "beta3": "tau_omega", "alpha_b": "tau_I", "alpha_c": "tau_I"}


def im_conditional(data: ImDataset, name: str, current: ImCoeffs, priors: ImPriors):
    """Full conditional of one IM parameter given ``current`` values of the rest."""
    if name in _COEFF_PRECISION:
        y, z, off = linear_targets(data, name, current)
        return cond_post_linear(y, z, off, getattr(current, _COEFF_PRECISION[name]), getattr(priors, name))
    if name in _PRECISION_EQUATIONS:
        res = im_residuals(current, data)
        return cond_post_precision([res[k] for k in _PRECISION_EQUATIONS[name]], getattr(priors, name))
    raise KeyError(f"unknown IM parameter {name!r}")


def regression_blocks(d: ImDataset):
    """Design matrices ``(A, b)`` of the three coefficient blocks.

    E-block unknowns ``(beta1, beta2)`` stack the ``y_Ed`` and ``y_Eq`` rows
    with the known slip terms moved to ``b``; the omega block has the single
    unknown ``beta3``; the current block ``(alpha_b, alpha_c)`` stacks the
    ``y_Id`` and ``y_Iq`` rows.
    """
    slip = d.omega - 1.0
    dUd = d.Ud - d.Ed
    dUq = d.Uq - d.Eq
    e_A = np.vstack([np.column_stack([d.Ed, d.Iq]), np.column_stack([d.Eq, -d.Id])])
    e_b = np.concatenate([d.y_Ed + slip * d.Eq, d.y_Eq - slip * d.Ed])
    w_A = (d.omega**2 - d.Ed * d.Id - d.Eq * d.Iq)[:, None]
    i_A = np.vstack([np.column_stack([dUd, dUq]), np.column_stack([dUq, -dUd])])
    i_b = np.concatenate([d.y_Id, d.y_Iq])
    return (e_A, e_b), (w_A, d.y_omega), (i_A, i_b)


class _Block:
    """Sufficient statistics of one linear block ``b = A @ theta + noise``.

    The residual sum of squares is evaluated as
    ``SSE(theta_hat) + (theta - theta_hat)' G (theta - theta_hat)``, which
    stays non-negative and accurate when the fit is near exact.
    """

    def __init__(self, A, b):
        self.A, self.b = A, b
        self.n = b.size
        self.G = A.T @ A
        self.c = A.T @ b
        self.theta_hat = None
        try:
            if np.linalg.cond(self.G) < 1e12:
                self.theta_hat = np.linalg.solve(self.G, self.c)
        except np.linalg.LinAlgError:
            pass
        if self.theta_hat is not None:
            r = b - A @ self.theta_hat
            self.sse0 = float(r @ r)

    def conditional(self, j, theta, tau, prior: NormalSpec) -> NormalSpec:
        # sum z^2 and sum z (y - offset) for coefficient j with the others fixed
        szr = self.c[j] - (self.G[j] @ theta - self.G[j, j] * theta[j])
        return _normal_update(prior, tau, self.G[j, j], szr)

    def sse(self, theta) -> float:
        if self.theta_hat is None:
            r = self.b - self.A @ theta
            return float(r @ r)
        d = theta - self.theta_hat
        return self.sse0 + max(float(d @ self.G @ d), 0.0)


def gibbs_im(
    data: ImDataset,
    priors: ImPriors | None = None,
    M: int = DEFAULT_ITERATIONS,
    m: int = DEFAULT_BURN_IN,
    rng: RngState | None = None,
    seed: int | None = None,
) -> Chain:
    """Gibbs sampler over the five IM coefficients and three noise precisions.

    Sweep order per iteration: ``beta1, beta2, beta3, alpha_b, alpha_c`` (each
    conditioned on the freshest values of the others), then ``tau_E``,
    ``tau_omega``, ``tau_I``. Coefficients that appear in two equations are
    updated from both stacked together; ``tau_E`` and ``tau_I`` therefore see
    ``2n`` residuals and ``tau_omega`` sees ``n``.
    """
    if not 0 <= m < M:
        raise InvalidParameterError(f"need 0 <= m < M, got m={m}, M={M}")
    if data.n == 0:
        raise InvalidParameterError("IM dataset is empty")
    p = priors or ImPriors.default()
    if rng is None:
        rng = np.random.default_rng(seed)
    e_blk, w_blk, i_blk = (_Block(A, b) for A, b in regression_blocks(data))
    layout = (
        (e_blk, (p.beta1, p.beta2), p.tau_E),
        (w_blk, (p.beta3,), p.tau_omega),
        (i_blk, (p.alpha_b, p.alpha_c), p.tau_I),
    )

    thetas = [np.array([float(sample_normal(c, rng)) for c in coef]) for _, coef, _ in layout]
    taus = [float(sample_gamma(tp, rng)) for _, _, tp in layout]

    out = np.empty((M, 8))
    for i in range(M):
        for (blk, coef, _), theta, tau in zip(layout, thetas, taus):
            for j, prior in enumerate(coef):
                theta[j] = float(sample_normal(blk.conditional(j, theta, tau, prior), rng))
        for k, (blk, _, tprior) in enumerate(layout):
            post = GammaSpec(tprior.shape + 0.5 * blk.n, tprior.rate + 0.5 * blk.sse(thetas[k]))
            taus[k] = float(sample_gamma(post, rng))
        out[i, :5] = np.concatenate(thetas)
        out[i, 5:] = taus
    return Chain(out, IM_PARAM_NAMES, m, seed)


def chain_estimate(chain: Chain) -> ImCoeffs:
    return ImCoeffs(**chain.means())
