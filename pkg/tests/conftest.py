"""Shared oracle helpers for the test suite.

Every nontrivial expected value in the tests is produced by one of these
independent routes: closed-form binomial tails for integer-parameter Beta
values, adaptive Simpson quadrature of raw integrands, dense eigensolvers,
and exhaustive enumeration. None of them share code with the paths they
verify beyond the adaptive integrator itself, which exists for exactly
this purpose.
"""

import math

import numpy as np

from chainsure import ExternalityGraph, QuadratureSpec, integrate
from chainsure.specfun import log_gamma

ADAPTIVE = QuadratureSpec.adaptive(1e-10)
ADAPTIVE_FAST = QuadratureSpec.adaptive(1e-8)


def beta_closed_form(w: float, u: int, v: int) -> float:
    """I_w(u, v) for integer parameters as a binomial tail:
    sum_{j=u}^{u+v-1} C(u+v-1, j) w^j (1-w)^(u+v-1-j)."""
    n = u + v - 1
    return sum(
        math.comb(n, j) * w**j * (1.0 - w) ** (n - j) for j in range(u, n + 1)
    )


def beta_quadrature(w: float, u: float, v: float, tol: float = 1e-11) -> float:
    """I_w(u, v) by adaptive quadrature of the raw Beta integrand.

    Only valid away from the w = 1 endpoint when v < 1 (integrable
    singularity there).
    """
    ln_norm = log_gamma(u + v) - log_gamma(u) - log_gamma(v)

    def integrand(t: float) -> float:
        if t <= 0.0 or t >= 1.0:
            return 0.0
        return math.exp(ln_norm + (u - 1.0) * math.log(t) + (v - 1.0) * math.log1p(-t))

    return integrate(integrand, 0.0, w, QuadratureSpec.adaptive(tol))


def nested_adaptive_premium(p_fn, scale: float, gamma: float,
                            spec: QuadratureSpec = ADAPTIVE_FAST) -> float:
    """scale * integral_{1/2}^1 [1 - integral_{1/2}^t p]^(1/gamma) dt,
    both levels adaptive; the independent route for the premium family."""

    def outer(t: float) -> float:
        inner = integrate(p_fn, 0.5, t, spec)
        return max(1.0 - inner, 0.0) ** (1.0 / gamma)

    return scale * integrate(outer, 0.5, 1.0, spec)


def random_externality(rng: np.random.Generator, n: int,
                       target_alpha_rho: float = 0.6,
                       g_high: float = 10.0) -> ExternalityGraph:
    """Random nonnegative graph with alpha scaled so alpha * rho(G) hits
    the requested level (dense eigensolver, not the package path)."""
    weights = rng.uniform(0.0, g_high, size=(n, n))
    np.fill_diagonal(weights, 0.0)
    rho = float(np.max(np.abs(np.linalg.eigvals(weights)))) if n > 1 else 0.0
    if rho == 0.0:
        return ExternalityGraph(weights, alpha=0.0)
    return ExternalityGraph(weights, alpha=target_alpha_rho / rho)


def central_difference(f, x: float, step: float) -> float:
    return (f(x + step) - f(x - step)) / (2.0 * step)


def richardson_difference(f, x: float, step: float = 2e-5) -> float:
    """Fourth-order central difference (Richardson-extrapolated).

    Needed where a third derivative is huge (the 1/(1 - hbar) cost pole):
    plain central differences there are truncation-limited well above the
    comparison tolerances.
    """
    coarse = central_difference(f, x, step)
    fine = central_difference(f, x, 0.5 * step)
    return (4.0 * fine - coarse) / 3.0


def fd_provider_gradient(profit_fn, prices: np.ndarray, hbar: float,
                         step: float = 2e-5) -> np.ndarray:
    """Finite-difference gradient of a provider profit in (prices, hbar).

    Plain central differences for the price coordinates (the profit is
    exactly quadratic there) and the Richardson stencil for hbar.
    """
    n = len(prices)
    out = np.empty(n + 1)
    for k in range(n):
        def along_price(v, k=k):
            p = prices.copy()
            p[k] = v
            return profit_fn(p, hbar)

        out[k] = central_difference(along_price, prices[k], step)
    out[n] = richardson_difference(lambda v: profit_fn(prices, v), hbar, step)
    return out
