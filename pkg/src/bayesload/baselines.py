"""Point-estimate baselines: batch least squares and a random-walk Kalman filter."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateDataError, FilterDivergenceError, InvalidParameterError
from .motor import ImCoeffs, ImDataset, regression_blocks
from .zipload import ZipDataset, ZipParams

# normal-equation matrices above this condition number are treated as singular
MAX_CONDITION = 1e13


def solve_normal_equations(A, b) -> np.ndarray:
    """Least-squares solution of ``A @ c ~= b`` via ``(A'A) c = A'b``.

    Raises DegenerateDataError when ``A'A`` is singular or too badly
    conditioned to trust.
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    b = np.asarray(b, dtype=float).ravel()
    if A.shape[0] < A.shape[1]:
        raise DegenerateDataError(f"{A.shape[0]} equations for {A.shape[1]} unknowns")
    G = A.T @ A
    if not np.all(np.isfinite(G)) or np.any(np.diag(G) == 0.0):
        raise DegenerateDataError("a regressor is identically zero")
    cond = np.linalg.cond(G)
    if not cond < MAX_CONDITION:
        raise DegenerateDataError(f"normal equations are singular (condition number {cond:.3g})")
    return np.linalg.solve(G, A.T @ b)


def ls_zip(data: ZipDataset) -> ZipParams:
    """Constrained LS fit: ``y - 1 = a1 (x^2 - 1) + a2 (x - 1)``."""
    if data.n < 2:
        raise DegenerateDataError("need at least two ZIP measurements")
    A = np.column_stack([data._u, data._v])
    a1, a2 = solve_normal_equations(A, data._w)
    return ZipParams(float(a1), float(a2))


def ls_im(data: ImDataset) -> ImCoeffs:
    """Independent linear LS per block: (beta1, beta2), beta3, (alpha_b, alpha_c)."""
    if data.n == 0:
        raise DegenerateDataError("IM dataset is empty")
    (eA, eb), (wA, wb), (iA, ib) = regression_blocks(data)
    b1, b2 = solve_normal_equations(eA, eb)
    (b3,) = solve_normal_equations(wA, wb)
    ab, ac = solve_normal_equations(iA, ib)
    return ImCoeffs(float(b1), float(b2), float(b3), float(ab), float(ac))


@dataclass(frozen=True)
class KfConfig:
    """Random-walk Kalman filter settings (scalar diagonals)."""

    process_noise: float = 1e-6
    meas_noise: float = 1e-2
    init_cov: float = 1.0
    init_state: tuple | None = None

    def __post_init__(self):
        if not self.process_noise >= 0:
            raise InvalidParameterError("process_noise must be non-negative")
        if not self.meas_noise > 0:
            raise InvalidParameterError("meas_noise must be positive")
        if not self.init_cov > 0:
            raise InvalidParameterError("init_cov must be positive")


@dataclass(frozen=True, eq=False)
class KfResult:
    trace: np.ndarray  # (n_obs, p) estimate after each observation
    estimate: np.ndarray
    covariance: np.ndarray


def kf_estimate(y, H, offset=0.0, cfg: KfConfig | None = None) -> KfResult:
    """Track a constant-plus-random-walk parameter vector.

    Observation ``k`` is ``y[k] = H[k] @ theta + offset[k] + v``. The state
    transition is the identity with covariance ``process_noise * I``; the
    covariance update uses the Joseph form.
    """
    cfg = cfg or KfConfig()
    y = np.asarray(y, dtype=float).ravel()
    H = np.asarray(H, dtype=float).reshape(y.size, -1)
    offset = np.broadcast_to(np.asarray(offset, dtype=float), y.shape)
    p = H.shape[1]
    x = np.zeros(p) if cfg.init_state is None else np.asarray(cfg.init_state, dtype=float).copy()
    if x.shape != (p,):
        raise InvalidParameterError(f"init_state has shape {x.shape}, expected ({p},)")
    P = cfg.init_cov * np.eye(p)
    Q = cfg.process_noise * np.eye(p)
    R = cfg.meas_noise
    eye = np.eye(p)
    trace = np.empty((y.size, p))
    for k in range(y.size):
        P = P + Q
        h = H[k]
        Ph = P @ h
        S = h @ Ph + R
        if not (np.isfinite(S) and S > 0):
            raise FilterDivergenceError(f"innovation variance {S} at step {k}")
        K = Ph / S
        x = x + K * (y[k] - offset[k] - h @ x)
        IKh = eye - np.outer(K, h)
        P = IKh @ P @ IKh.T + R * np.outer(K, K)
        if not np.all(np.diag(P) > 0):
            raise FilterDivergenceError(f"covariance lost positive definiteness at step {k}")
        trace[k] = x
    return KfResult(trace, x.copy(), P)


def kf_zip(data: ZipDataset, cfg: KfConfig | None = None) -> ZipParams:
    H = np.column_stack([data._u, data._v])
    a1, a2 = kf_estimate(data.y, H, 1.0, cfg).estimate
    return ZipParams(float(a1), float(a2))


def _interleave(A, b):
    # stacked [eq1 rows; eq2 rows] -> time-ordered eq1, eq2, eq1, eq2, ...
    n = A.shape[0] // 2
    order = np.arange(2 * n).reshape(2, n).T.ravel()
    return A[order], b[order]


def kf_im(data: ImDataset, cfg: KfConfig | None = None) -> ImCoeffs:
    """Run one filter per coefficient block, streaming samples in time order."""
    (eA, eb), (wA, wb), (iA, ib) = regression_blocks(data)
    init = None if cfg is None or cfg.init_state is None else np.asarray(cfg.init_state, dtype=float)

    def block(A, b, sl):
        c = cfg or KfConfig()
        if init is not None:
            c = KfConfig(c.process_noise, c.meas_noise, c.init_cov, tuple(init[sl]))
        return kf_estimate(b, A, 0.0, c).estimate

    b1, b2 = block(*_interleave(eA, eb), slice(0, 2))
    (b3,) = block(wA, wb, slice(2, 3))
    ab, ac = block(*_interleave(iA, ib), slice(3, 5))
    return ImCoeffs(float(b1), float(b2), float(b3), float(ab), float(ac))
