"""Proximal operator of gamma*||L.||_1 over a constraint set, via the dual.

The dual problem is solved with accelerated projected gradient ascent; the
primal is recovered as Proj_X{z - L^T u}.  The dual iterate is returned so
that consecutive solves can be warm-started.
"""

from dataclasses import dataclass

import numpy as np

from .core import Rng
from .linops import operator_norm

_POWER_ITERS = 100
_NORM_DEFLATION = 0.999


class ConstraintSet:
    """Feasible set: all of R^N or a component-wise box."""

    def __init__(self, lower=None, upper=None):
        if (lower is None) != (upper is None):
            raise ValueError("box needs both bounds")
        if lower is not None and lower > upper:
            raise ValueError("box lower bound exceeds upper bound")
        self.lower = lower
        self.upper = upper

    @classmethod
    def all_space(cls):
        return cls()

    @classmethod
    def box(cls, lower, upper):
        return cls(lower, upper)

    @property
    def is_all_space(self):
        return self.lower is None

    def project(self, z):
        z = np.asarray(z, dtype=np.float64)
        if self.is_all_space:
            return z
        return np.clip(z, self.lower, self.upper)


class WeightedAnalysisOperator:
    """L x = (weights_c * (W_c x))_c for an analysis bank W and mask weights."""

    def __init__(self, bank, weights):
        weights = np.asarray(weights, dtype=np.float64)
        if weights.ndim != 3 or weights.shape[0] != bank.out_channels:
            raise ValueError("weights must be a (channels, h, w) stack")
        if np.any(weights < -1e-9):
            raise ValueError("mask weights must be nonnegative")
        self.bank = bank
        self.weights = weights
        self._norm = None

    def forward(self, x):
        return self.weights * self.bank.forward(x)

    def adjoint(self, u):
        return self.bank.adjoint(self.weights * u)

    def norm_estimate(self):
        """Power-iteration estimate of ||L||_2, cached."""
        if self._norm is None:
            shape = self.weights.shape[1:]
            self._norm = operator_norm(self.forward, self.adjoint, shape,
                                       iters=_POWER_ITERS, rng=Rng(0))
        return self._norm


@dataclass
class ProxConfig:
    max_iters: int = 500
    epsilon: float = 1e-9
    alpha: float = None   # step 1/||L||^2; estimated when None

    def __post_init__(self):
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")


@dataclass
class ProxResult:
    x: np.ndarray
    dual: np.ndarray
    iterations: int
    converged: bool


def dual_gradient(L, X, z, u):
    """Ascent direction of the dual function: L Proj_X{z - L^T u}."""
    return L.forward(X.project(z - L.adjoint(u)))


def prox_weighted_l1(z, L, gamma, X, cfg, warm_u=None):
    """argmin_{w in X} 0.5*||w - z||^2 + gamma*||L w||_1 plus its dual point.

    Accelerated projected gradient on the dual with steps clipped to
    [-gamma, gamma], momentum t_1 = 1, t_{k+1} = (k+5)/3, and stop rule
    ||x_{k+1} - x_k|| < eps * ||x_k||.
    """
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    z = np.asarray(z, dtype=np.float64)
    if not np.all(np.isfinite(z)):
        raise ValueError("non-finite prox input")

    norm = L.norm_estimate()
    if cfg.alpha is not None:
        alpha = cfg.alpha
    elif norm ** 2 < 1e-30:
        # L vanishes: the penalty is zero and the prox is the projection.
        x = X.project(z)
        return ProxResult(x, np.zeros_like(L.weights), 0, True)
    else:
        # Power iteration lower-bounds the norm; deflate to keep alpha valid.
        alpha = _NORM_DEFLATION / norm ** 2

    u = L.forward(z) if warm_u is None else np.asarray(warm_u, dtype=np.float64)
    v = u
    x = X.project(z - L.adjoint(u))
    t = 1.0
    for k in range(1, cfg.max_iters + 1):
        u_next = np.clip(v + alpha * dual_gradient(L, X, z, v), -gamma, gamma)
        t_next = (k + 5.0) / 3.0
        v = u_next + ((t - 1.0) / t_next) * (u_next - u)
        x_next = X.project(z - L.adjoint(u_next))
        diff = np.linalg.norm(x_next - x)
        done = diff < cfg.epsilon * np.linalg.norm(x) or diff == 0.0
        u, t, x = u_next, t_next, x_next
        if done:
            return ProxResult(x, u, k, True)
    return ProxResult(x, u, cfg.max_iters, False)
