"""Least-squares fit of the logarithmic confirmation curve.

The model ``y = beta1 - beta2 * ln(x + beta3)`` is linear in (beta1, beta2)
once beta3 is fixed, so the fit profiles the sum of squared residuals over
beta3 alone. A log-spaced scan locates the basin and a bounded Brent search
refines it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import optimize
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_is_fitted

from .forksim import PcSample
from .params import FitParams
from .validation import ValidationError, check_1d

N_PARAMS = 3


class FitConvergenceError(RuntimeError):
    pass


def _inner_lls(x: np.ndarray, y: np.ndarray, beta3: float):
    """Exact (beta1, beta2) for fixed beta3, plus the residual vector."""
    u = np.log(x + beta3)
    u_mean = u.mean()
    y_mean = y.mean()
    du = u - u_mean
    suu = du @ du
    slope = (du @ (y - y_mean)) / suu if suu > 0 else 0.0
    beta2 = -slope
    beta1 = y_mean + beta2 * u_mean
    resid = y - (beta1 - beta2 * u)
    return beta1, beta2, resid


def adjusted_r_squared(y: np.ndarray, resid: np.ndarray, n_params: int = N_PARAMS) -> float:
    n = len(y)
    sse = float(resid @ resid)
    sst = float(((y - y.mean()) ** 2).sum())
    if sst == 0.0:
        r2 = 1.0 if sse == 0.0 else 0.0
    else:
        r2 = 1.0 - sse / sst
    dof = n - n_params - 1
    if dof <= 0:
        return float("nan")
    return 1.0 - (1.0 - r2) * (n - 1) / dof


class LogPcRegressor(RegressorMixin, BaseEstimator):
    """Fit ``P_c = beta1 - beta2 * ln(c_norm + beta3)`` by profiled least squares.

    Parameters
    ----------
    beta3_bounds : tuple of float, default=(1e-6, 10.0)
        Search bracket for beta3; scanned on a log scale.
    n_scan : int, default=400
        Number of log-spaced beta3 values in the initial scan.
    xatol : float, default=1e-12
        Absolute tolerance on ``log(beta3)`` for the bounded refinement.

    Attributes
    ----------
    beta1_, beta2_, beta3_ : float
        Fitted coefficients.
    residuals_ : ndarray of shape (n_samples,)
    rmse_ : float
        ``sqrt(mean(residuals_ ** 2))``.
    adj_r_squared_ : float
        Adjusted R^2 with three fitted parameters (NaN when n <= 4).
    at_bound_ : bool
        True when the optimum sits on an edge of ``beta3_bounds``.
    """

    def __init__(self, beta3_bounds=(1e-6, 10.0), n_scan=400, xatol=1e-12):
        self.beta3_bounds = beta3_bounds
        self.n_scan = n_scan
        self.xatol = xatol

    def fit(self, X, y):
        x = check_1d("X", X, min_len=4)
        y = check_1d("y", y, min_len=len(x))
        if len(y) != len(x):
            raise ValidationError("y", f"length {len(y)} does not match X ({len(x)})")
        if len(np.unique(x)) < 4:
            raise ValidationError("X", "needs at least 4 distinct c_norm values")
        lo, hi = self.beta3_bounds
        if not 0 < lo < hi:
            raise ValidationError("beta3_bounds", f"need 0 < low < high, got {self.beta3_bounds}")
        if x.min() + lo <= 0:
            raise ValidationError("X", "c_norm + beta3 must stay positive")

        def sse(log_b3):
            r = _inner_lls(x, y, np.exp(log_b3))[2]
            return float(r @ r)

        grid = np.linspace(np.log(lo), np.log(hi), self.n_scan)
        values = np.array([sse(g) for g in grid])
        k = int(np.argmin(values))
        left, right = grid[max(k - 1, 0)], grid[min(k + 1, len(grid) - 1)]
        res = optimize.minimize_scalar(
            sse, bounds=(left, right), method="bounded",
            options={"xatol": self.xatol, "maxiter": 500},
        )
        if not res.success:
            raise FitConvergenceError(f"beta3 search did not converge: {res.message}")
        log_b3 = res.x if res.fun <= values[k] else grid[k]

        self.beta3_ = float(np.exp(log_b3))
        b1, b2, resid = _inner_lls(x, y, self.beta3_)
        self.beta1_, self.beta2_ = float(b1), float(b2)
        self.residuals_ = resid
        self.rmse_ = float(np.sqrt(np.mean(resid**2)))
        self.adj_r_squared_ = adjusted_r_squared(y, resid)
        self.at_bound_ = bool(k in (0, len(grid) - 1))
        self.n_features_in_ = 1
        return self

    def predict(self, X):
        check_is_fitted(self, "beta3_")
        x = check_1d("X", X)
        return self.beta1_ - self.beta2_ * np.log(x + self.beta3_)

    def to_fit_params(self, z=None, p_l=None) -> FitParams:
        check_is_fitted(self, "beta3_")
        return FitParams(
            self.beta1_, self.beta2_, self.beta3_,
            adj_r_squared=self.adj_r_squared_, rmse=self.rmse_, z=z, p_l=p_l,
        )


@dataclass(frozen=True, eq=False)
class FitReport:
    params: FitParams
    adj_r_squared: float
    rmse: float
    residuals: np.ndarray

    def to_dict(self) -> dict:
        p = self.params
        return {
            "beta1": p.beta1,
            "beta2": p.beta2,
            "beta3": p.beta3,
            "adj_r_squared": self.adj_r_squared,
            "rmse": self.rmse,
            "z": p.z,
            "p_l": p.p_l,
        }


def fit_pc(samples: list[PcSample], **kwargs) -> FitReport:
    """Fit the confirmation curve to simulated samples.

    Keyword arguments go to :class:`LogPcRegressor`. The report's context
    ``(z, p_l)`` is taken from the samples when they all agree.
    """
    if len(samples) < 4:
        raise ValidationError("samples", f"need at least 4 samples, got {len(samples)}")
    x = np.array([s.c_norm for s in samples])
    y = np.array([s.p_c_hat for s in samples])
    if np.any((y < 0) | (y > 1)):
        raise ValidationError("samples", "p_c_hat values must lie in [0, 1]")
    contexts = {(s.z, s.p_l) for s in samples}
    z, p_l = contexts.pop() if len(contexts) == 1 else (None, None)
    reg = LogPcRegressor(**kwargs).fit(x, y)
    return FitReport(reg.to_fit_params(z, p_l), reg.adj_r_squared_, reg.rmse_, reg.residuals_)
