"""Linear Gaussian response model over visit vectors.

The response of a sequence with visit vector v is modeled as
N(beta . v + beta_0, sigma^2).  Fitting comes in two flavours:
posterior-weighted least squares over enumerated visit vectors (each row of
the design is one (v, y) pair weighted by its posterior probability) and
ordinary least squares over per-sequence expected visit vectors.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError

SIGMA_FLOOR = 1e-6

# Tiny additive ridge on the normal equations; keeps the solve defined when
# a counted state is never visited (rank-deficient design).
RIDGE = 1e-8


@dataclass(frozen=True)
class RegressionParams:
    """Coefficients, optional intercept, and noise scale."""

    coefficients: np.ndarray
    intercept: float | None
    sigma: float

    def __post_init__(self):
        coef = np.ascontiguousarray(np.asarray(self.coefficients, dtype=float))
        coef.flags.writeable = False
        object.__setattr__(self, "coefficients", coef)
        if self.intercept is not None:
            object.__setattr__(self, "intercept", float(self.intercept))
        object.__setattr__(self, "sigma", float(self.sigma))
        if coef.ndim != 1:
            raise InvalidInputError("coefficients must be a vector")
        if not math.isfinite(self.sigma) or self.sigma < SIGMA_FLOOR:
            raise InvalidInputError(f"sigma must be >= {SIGMA_FLOOR}")


@dataclass
class WeightedDesign:
    """Rows (visit vector, response, weight) of a weighted least-squares fit.

    Weights coming from one training example are that example's posterior
    over visit vectors and therefore sum to 1 per example.
    """

    vectors: np.ndarray
    responses: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        self.vectors = np.atleast_2d(np.asarray(self.vectors, dtype=float))
        self.responses = np.asarray(self.responses, dtype=float)
        self.weights = np.asarray(self.weights, dtype=float)
        n = len(self.responses)
        if self.vectors.shape[0] != n or self.weights.shape[0] != n:
            raise InvalidInputError("design rows misaligned")
        if np.any(self.weights < 0.0):
            raise InvalidInputError("weights must be nonnegative")

    @classmethod
    def from_rows(cls, rows):
        """Build from an iterable of (visit-vector, y, weight) triples."""
        vs, ys, ws = [], [], []
        for v, y, w in rows:
            vs.append(np.asarray(v, dtype=float))
            ys.append(float(y))
            ws.append(float(w))
        return cls(np.array(vs), np.array(ys), np.array(ws))


def predict_mean(reg, v):
    """beta_0 + beta . v (beta_0 = 0 when the intercept is disabled)."""
    v = np.asarray(v, dtype=float)
    if v.shape != reg.coefficients.shape:
        raise InvalidInputError(
            f"visit vector length {v.shape} != coefficients {reg.coefficients.shape}"
        )
    base = reg.intercept if reg.intercept is not None else 0.0
    return float(base + np.dot(reg.coefficients, v))


def predict_density(reg, v, y):
    """Gaussian density of the response at the linear mean."""
    mu = predict_mean(reg, v)
    z = (float(y) - mu) / reg.sigma
    return math.exp(-0.5 * z * z) / (reg.sigma * math.sqrt(2.0 * math.pi))


def marginal_response_density(reg, dist, y):
    """Mixture density sum_v P(v) N(y; beta . v, sigma^2)."""
    total = 0.0
    for v, p in dist.support.items():
        if p > 0.0:
            total += p * predict_density(reg, np.asarray(v, dtype=float), y)
    return total


def _solve(design_matrix, weights, responses, use_intercept):
    A = np.asarray(design_matrix, dtype=float)
    if use_intercept:
        A = np.hstack([A, np.ones((A.shape[0], 1))])
    G = A * weights[:, None]
    M = A.T @ G + RIDGE * np.eye(A.shape[1])
    c = G.T @ responses
    beta = np.linalg.solve(M, c)
    if use_intercept:
        return beta[:-1], float(beta[-1])
    return beta, None


def fit_weighted(design, use_intercept=True):
    """Weighted least squares over enumerated visit vectors.

    Minimizes sum_i gamma_i (y_i - beta . v_i)^2 through the
    ridge-stabilized normal equations; sigma is the square root of the
    weighted mean squared residual, floored at SIGMA_FLOOR.
    """
    total = design.weights.sum()
    if total <= 0.0:
        raise InvalidInputError("all design weights are zero")
    coef, intercept = _solve(design.vectors, design.weights, design.responses,
                             use_intercept)
    mean = design.vectors @ coef + (intercept if intercept is not None else 0.0)
    resid = design.responses - mean
    var = float(np.dot(design.weights, resid * resid) / total)
    sigma = max(math.sqrt(var), SIGMA_FLOOR)
    return RegressionParams(coefficients=coef, intercept=intercept, sigma=sigma)


def fit_expected(pairs, use_intercept=True):
    """Ordinary least squares over (expected visit vector, response) pairs."""
    vs, ys = [], []
    for v, y in pairs:
        vs.append(np.asarray(v, dtype=float))
        ys.append(float(y))
    if not vs:
        raise InvalidInputError("no pairs to fit")
    vectors = np.atleast_2d(np.array(vs))
    responses = np.array(ys)
    weights = np.ones(len(responses))
    coef, intercept = _solve(vectors, weights, responses, use_intercept)
    mean = vectors @ coef + (intercept if intercept is not None else 0.0)
    resid = responses - mean
    sigma = max(math.sqrt(float(np.mean(resid * resid))), SIGMA_FLOOR)
    return RegressionParams(coefficients=coef, intercept=intercept, sigma=sigma)
