"""Attack risk and insurance pricing.

Double-spending success probability as a function of the provider's share
of computing power, the induced loss distribution over that share, the
insurer's expected loss, and the power-transform (proportional hazard)
premium with its penalty for overpricing a well-defended chain.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .specfun import QuadratureSpec, integrate, reg_inc_beta

DEFAULT_INTERVALS = 100


@dataclass(frozen=True)
class RiskModel:
    """Scalar constants of the attack / claim model.

    blocks_per_period is the expected number of blocks mined during one
    insured period (period length over mean block time); compensation_rate
    and mining_reward are per block.
    """

    blocks_per_period: float
    tx_per_block: int
    compensation_rate: float
    mining_reward: float

    def __post_init__(self):
        if not (np.isfinite(self.blocks_per_period) and self.blocks_per_period > 0):
            raise ValueError(f"blocks_per_period must be positive and finite, got {self.blocks_per_period}")
        if self.tx_per_block <= 0:
            raise ValueError(f"tx_per_block must be positive, got {self.tx_per_block}")
        # compensation_rate == 0 is allowed: it degenerates the insurer out of
        # the game, which some boundary checks rely on.
        if self.compensation_rate < 0 or self.mining_reward < 0:
            raise ValueError("compensation_rate and mining_reward must be nonnegative")

    @property
    def claim_scale(self) -> float:
        """Total claim value at full exposure: blocks/period * tx/block * rate."""
        return self.blocks_per_period * self.tx_per_block * self.compensation_rate

    @property
    def reward_scale(self) -> float:
        """Mining income at full investment: blocks/period * tx/block * reward."""
        return self.blocks_per_period * self.tx_per_block * self.mining_reward


def attack_probability(model: RiskModel, hbar: float) -> float:
    """Probability that a double-spending attack succeeds at investment ratio hbar.

    Certain (1.0) when the honest share is below one half; above that it is
    the regularized incomplete Beta I_w(b*hbar, 1/2) at w = 4(1-hbar)hbar,
    which decays to 0 as hbar approaches 1.
    """
    if not 0.0 <= hbar <= 1.0:
        raise ValueError(f"investment ratio must lie in [0, 1], got {hbar}")
    if hbar < 0.5:
        return 1.0
    w = 4.0 * (1.0 - hbar) * hbar
    return reg_inc_beta(w, model.blocks_per_period * hbar, 0.5)


def risk_cdf(model: RiskModel, hbar: float, intervals: int = DEFAULT_INTERVALS) -> float:
    """Cumulative attack-weight below hbar: 1/2 plus the midpoint-rule integral
    of the success probability over [1/2, hbar]."""
    if not 0.5 <= hbar <= 1.0:
        raise ValueError(f"risk_cdf requires hbar in [1/2, 1], got {hbar}")
    if hbar == 0.5:
        return 0.5
    spec = QuadratureSpec.midpoint(intervals)
    return 0.5 + integrate(lambda theta: attack_probability(model, theta), 0.5, hbar, spec)


def survival_grid(
    p_fn: Callable[[float], float], intervals: int = DEFAULT_INTERVALS
) -> tuple[np.ndarray, np.ndarray, float]:
    """Midpoint-grid table of B(t) = 1 - integral_{1/2}^{t} p(theta) dtheta.

    Returns (nodes, B values, cell width) for t on the 'intervals'-cell
    midpoint grid over [1/2, 1]. The inner integral reuses a prefix sum of
    the same p evaluations (O(n) instead of O(n^2) p calls): the prefix
    covers whole cells up to the node's left edge, plus half a cell at the
    node's own value.
    """
    width = 0.5 / intervals
    nodes = 0.5 + (np.arange(intervals) + 0.5) * width
    values = np.array([p_fn(t) for t in nodes])
    prefix = np.concatenate(([0.0], np.cumsum(values) * width))
    inner = prefix[:-1] + 0.5 * width * values
    survival = 1.0 - inner
    nodes.setflags(write=False)
    survival.setflags(write=False)
    return nodes, survival, width


@functools.lru_cache(maxsize=64)
def _model_survival(model: RiskModel, intervals: int) -> tuple[np.ndarray, np.ndarray, float]:
    return survival_grid(lambda t: attack_probability(model, t), intervals)


def ph_transformed_integral(
    p_fn: Callable[[float], float], gamma: float, intervals: int = DEFAULT_INTERVALS
) -> float:
    """integral_{1/2}^{1} B(t)^(1/gamma) dt on the shared midpoint grid."""
    if gamma < 1.0:
        raise ValueError(f"premium coefficient must be >= 1, got {gamma}")
    _, survival, width = survival_grid(p_fn, intervals)
    return float(np.sum(survival ** (1.0 / gamma)) * width)


def premium(model: RiskModel, gamma: float, intervals: int = DEFAULT_INTERVALS) -> float:
    """Risk-adjusted premium: claim scale times the power-distorted survival mass.

    gamma = 1 reproduces the expected loss exactly (same code path); larger
    gamma inflates the premium toward claim_scale / 2.
    """
    if gamma < 1.0:
        raise ValueError(f"premium coefficient must be >= 1, got {gamma}")
    _, survival, width = _model_survival(model, intervals)
    return model.claim_scale * float(np.sum(survival ** (1.0 / gamma)) * width)


def expected_loss(model: RiskModel, intervals: int = DEFAULT_INTERVALS) -> float:
    """Insurer's expected claim payout (the undistorted premium)."""
    return premium(model, 1.0, intervals)


def distorted_log_moments(
    model: RiskModel, gamma: float, intervals: int = DEFAULT_INTERVALS
) -> tuple[float, float, float]:
    """The three survival integrals behind the premium's gamma derivatives.

    Returns (integral B^(1/g), integral B^(1/g) ln B, integral B^(1/g) ln^2 B)
    over [1/2, 1] on the shared midpoint grid.
    """
    if gamma < 1.0:
        raise ValueError(f"premium coefficient must be >= 1, got {gamma}")
    _, survival, width = _model_survival(model, intervals)
    powered = survival ** (1.0 / gamma)
    logs = np.log(survival)
    i0 = float(np.sum(powered) * width)
    i1 = float(np.sum(powered * logs) * width)
    i2 = float(np.sum(powered * logs * logs) * width)
    return i0, i1, i2


def reputation_penalty(hbar: float, gamma: float, beta: float) -> float:
    """Penalty on the insurer for keeping the premium high while the chain
    is well defended: (hbar - 1/2)^3 * (gamma - 1) * gamma^beta.

    Zero at hbar = 1/2 and at gamma = 1; grows steeply in gamma (beta > 1).
    """
    if beta <= 1.0:
        raise ValueError(f"penalty exponent must exceed 1, got {beta}")
    if not 0.5 <= hbar <= 1.0:
        raise ValueError(f"investment ratio must lie in [1/2, 1], got {hbar}")
    if gamma < 1.0:
        raise ValueError(f"premium coefficient must be >= 1, got {gamma}")
    return (hbar - 0.5) ** 3 * (gamma - 1.0) * gamma**beta
