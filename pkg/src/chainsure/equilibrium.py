"""Leader best responses and the alternating equilibrium search.

Each leader's best response is an exact maximization of its own profit
over its box (the provider via block-coordinate ascent on its price QP
and investment root, the insurer via golden-section search). The outer
loop alternates best responses until the joint strategy stops moving.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .demand import (
    ContractionCheck,
    DemandProfile,
    ExternalityGraph,
    check_contraction,
    closed_form_demand,
    lcp_demand,
)
from .errors import ContractionViolation, ConvergenceError
from .market import (
    GAMMA_FLOOR,
    HBAR_CEILING,
    PRICE_FLOOR,
    ExistenceCheck,
    InsurerStrategy,
    MarketParams,
    ProviderStrategy,
    UniquenessCheck,
    check_existence,
    check_uniqueness,
    insurer_profit,
    provider_gradient,
    provider_profit,
)

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class SolveOptions:
    """Tolerances and caps for the equilibrium search."""

    br_tolerance: float = 1e-8
    outer_tolerance: float = 1e-6
    max_outer_rounds: int = 500
    max_inner_iters: int = 200
    multistart_count: int = 0

    def __post_init__(self):
        if self.br_tolerance <= 0 or self.outer_tolerance <= 0:
            raise ValueError("tolerances must be positive")
        if self.max_outer_rounds < 1 or self.max_inner_iters < 1:
            raise ValueError("iteration caps must be at least 1")
        if self.multistart_count < 0:
            raise ValueError("multistart_count must be nonnegative")


@dataclass(frozen=True)
class RoundRecord:
    round: int
    provider: ProviderStrategy
    insurer: InsurerStrategy
    delta: float


@dataclass(frozen=True)
class ConditionReport:
    contraction: ContractionCheck
    existence: ExistenceCheck
    uniqueness: UniquenessCheck


@dataclass(frozen=True, eq=False)
class EquilibriumReport:
    provider: ProviderStrategy
    insurer: InsurerStrategy
    demand: DemandProfile
    profits: tuple[float, float]
    rounds: int
    trace: list[RoundRecord] = field(repr=False)
    conditions: ConditionReport
    converged: bool
    multistart_spread: float | None = None


def _strategy_vector(s_p: ProviderStrategy, s_i: InsurerStrategy) -> np.ndarray:
    return np.concatenate([s_p.prices, [s_p.investment_ratio, s_i.gamma]])


def _projected_gradient(x: np.ndarray, grad: np.ndarray,
                        lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    """Gradient with components pointing out of the box zeroed."""
    pg = grad.copy()
    pg[(x <= lo) & (grad < 0)] = 0.0
    pg[(x >= hi) & (grad > 0)] = 0.0
    return pg


def best_response_provider(params: MarketParams, graph: ExternalityGraph,
                           s_i: InsurerStrategy, start: ProviderStrategy,
                           opts: SolveOptions = SolveOptions()) -> ProviderStrategy:
    """Maximize the provider's profit over its price/investment box.

    Block-coordinate exact ascent. The profit is an exact quadratic in the
    prices, so the price block is a box-QP solved by projected Gauss-Seidel
    on its stationarity system; the investment ratio then has a closed-form
    interior root (the cost pole makes its slope strictly decreasing),
    clamped to the box. The two blocks couple only through scalars, so the
    alternation contracts fast; termination is on the true projected
    gradient's infinity norm. Plain projected gradient ascent was rejected
    here: the hbar curvature dwarfs the price curvature and capped prices
    make coupled Newton steps stall against the box.
    """
    n = graph.n_users
    price_lo, price_hi = PRICE_FLOOR, params.price_cap
    m_ones = graph.ones_image
    quad = graph.influence + graph.influence.T   # price-block curvature matrix
    quad_diag = np.diagonal(quad)

    prices = np.clip(start.prices.astype(float), price_lo, price_hi)
    hbar = float(np.clip(start.investment_ratio, 0.5, HBAR_CEILING))
    reward = params.risk.reward_scale
    attacker = params.attacker_resource

    def price_residual(p: np.ndarray, target: np.ndarray) -> float:
        grad = target - quad @ p
        grad[(p <= price_lo) & (grad < 0)] = 0.0
        grad[(p >= price_hi) & (grad > 0)] = 0.0
        return float(np.max(np.abs(grad)))

    sweep_cap = 60 + 10 * n
    for _ in range(opts.max_inner_iters):
        # price block: maximize (1 + hbar) p.M1 - p.Mp over the price box
        target = (1.0 + hbar) * m_ones
        for _ in range(sweep_cap):
            for i in range(n):
                step = (target[i] - quad[i] @ prices) / quad_diag[i]
                prices[i] = min(price_hi, max(price_lo, prices[i] + step))
            if price_residual(prices, target) < 0.25 * opts.br_tolerance:
                break
        # investment block: slope p.M1 - a/(1-h)^2 + reward is strictly
        # decreasing, so the box maximizer is the clamped root
        slope_at_cost = float(prices @ m_ones) + reward
        root = 1.0 - math.sqrt(attacker / slope_at_cost) if slope_at_cost > 0 else 0.5
        hbar = float(np.clip(root, 0.5, HBAR_CEILING))

        candidate = ProviderStrategy(prices=prices.copy(), investment_ratio=hbar)
        grad = provider_gradient(params, graph, candidate, s_i)
        joint = np.concatenate([prices, [hbar]])
        lo = np.concatenate([np.full(n, price_lo), [0.5]])
        hi = np.concatenate([np.full(n, price_hi), [HBAR_CEILING]])
        pg = _projected_gradient(joint, grad, lo, hi)
        if float(np.max(np.abs(pg))) < opts.br_tolerance:
            return candidate
    raise ConvergenceError(
        "provider best response hit its iteration cap",
        last_iterate=candidate,
        residual=float(np.max(np.abs(pg))),
    )


def best_response_insurer(params: MarketParams, s_p: ProviderStrategy,
                          opts: SolveOptions = SolveOptions()) -> InsurerStrategy:
    """Maximize the insurer's profit over gamma by golden-section search.

    The profit is concave in gamma on the domain, so golden section with an
    argument tolerance of br_tolerance finds the maximizer (possibly the cap).
    """
    lo, hi = GAMMA_FLOOR, params.gamma_cap

    def profit(gamma: float) -> float:
        return insurer_profit(params, s_p, InsurerStrategy(gamma))

    a, b = lo, hi
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = profit(c), profit(d)
    while b - a > opts.br_tolerance:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = profit(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = profit(d)
    gamma = 0.5 * (a + b)
    # the maximum may sit exactly on the cap; prefer the boundary when tied
    if profit(hi) >= profit(gamma):
        gamma = hi
    return InsurerStrategy(float(np.clip(gamma, lo, hi)))


def _refresh_demand(graph: ExternalityGraph, s_p: ProviderStrategy,
                    box_tol: float = 1e-9) -> DemandProfile:
    profile = closed_form_demand(graph, s_p.investment_ratio, s_p.prices)
    if profile.out_of_box(box_tol):
        profile = lcp_demand(graph, s_p.investment_ratio, s_p.prices)
    return profile


def solve_stackelberg(params: MarketParams, graph: ExternalityGraph,
                      start_p: ProviderStrategy, start_i: InsurerStrategy,
                      opts: SolveOptions = SolveOptions(),
                      simultaneous: bool = False,
                      seed: int = 0) -> EquilibriumReport:
    """Alternating best responses until the joint strategy stops moving.

    Provider moves first within each round, then the insurer (set
    simultaneous=True for Jacobi-style updates computed against the previous
    round). The follower demand is refreshed every round from the closed form,
    falling back to the clamped solver when a component leaves [0, 1].
    Non-convergence is reported in the result, not raised.

    When opts.multistart_count > 0, that many extra solves from seeded random
    starts are run and the largest strategy deviation is reported, as a
    uniqueness diagnostic for parameter sets where the uniqueness condition
    fails.
    """
    contraction = check_contraction(graph)
    if not contraction.holds:
        raise ContractionViolation(contraction.alpha_rho)
    conditions = ConditionReport(
        contraction=contraction,
        existence=check_existence(params, graph),
        uniqueness=check_uniqueness(params),
    )

    s_p, s_i = start_p, start_i
    trace: list[RoundRecord] = []
    converged = False
    rounds = 0
    demand = _refresh_demand(graph, s_p)
    for rounds in range(1, opts.max_outer_rounds + 1):
        previous = _strategy_vector(s_p, s_i)
        new_p = best_response_provider(params, graph, s_i, s_p, opts)
        new_i = best_response_insurer(params, s_p if simultaneous else new_p, opts)
        s_p, s_i = new_p, new_i
        demand = _refresh_demand(graph, s_p)
        delta = float(np.max(np.abs(_strategy_vector(s_p, s_i) - previous)))
        trace.append(RoundRecord(round=rounds, provider=s_p, insurer=s_i, delta=delta))
        if delta < opts.outer_tolerance:
            converged = True
            break

    profits = (
        provider_profit(params, graph, s_p, s_i),
        insurer_profit(params, s_p, s_i),
    )

    spread = None
    if opts.multistart_count > 0:
        rng = np.random.default_rng(seed)
        finals = [_strategy_vector(s_p, s_i)]
        single = SolveOptions(
            br_tolerance=opts.br_tolerance,
            outer_tolerance=opts.outer_tolerance,
            max_outer_rounds=opts.max_outer_rounds,
            max_inner_iters=opts.max_inner_iters,
        )
        for _ in range(opts.multistart_count):
            p0 = ProviderStrategy(
                prices=rng.uniform(0.1 * params.price_cap, params.price_cap, graph.n_users),
                investment_ratio=rng.uniform(0.5, HBAR_CEILING),
            )
            i0 = InsurerStrategy(rng.uniform(GAMMA_FLOOR, params.gamma_cap))
            rerun = solve_stackelberg(params, graph, p0, i0, single, simultaneous)
            finals.append(_strategy_vector(rerun.provider, rerun.insurer))
        stacked = np.stack(finals)
        spread = float(np.max(stacked.max(axis=0) - stacked.min(axis=0)))

    return EquilibriumReport(
        provider=s_p,
        insurer=s_i,
        demand=demand,
        profits=profits,
        rounds=rounds,
        trace=trace,
        conditions=conditions,
        converged=converged,
        multistart_spread=spread,
    )
