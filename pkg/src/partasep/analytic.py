"""Stationary current formulas: closed forms, finite rings, and variational forms.

Finite-ring averages are weighted sums over train counts with weights
(1 + omega) ** l; the counts grow like binomials, so everything is summed
in log space.  The infinite-volume forms arise as saddle points of the
corresponding entropy functionals, maximised here by golden-section
search so the closed forms can be cross-checked numerically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

from .lattice import train_count_list

__all__ = [
    "SaddleResult",
    "current_closed_form",
    "blockage_current_closed_form",
    "current_finite_L",
    "entropy",
    "saddle_objective",
    "maximize_saddle",
    "blockage_saddle_objective",
    "maximize_blockage_saddle",
    "blockage_current_finite_L",
    "product_form_weight",
]

_GOLDEN_TOL = 1e-9


def _logsumexp(values: list[float]) -> float:
    if not values:
        return -math.inf
    top = max(values)
    return top + math.log(math.fsum(math.exp(v - top) for v in values))


def _golden_max(f: Callable[[float], float], lo: float, hi: float,
                xtol: float = _GOLDEN_TOL) -> tuple[float, float]:
    """Golden-section maximisation of a unimodal function on [lo, hi]."""
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    while b - a > xtol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    x = 0.5 * (a + b)
    return x, f(x)


@dataclass(frozen=True)
class SaddleResult:
    """Maximiser and value of a variational objective, with the search tolerance."""

    argmax: float
    value: float
    tolerance: float = _GOLDEN_TOL


# --- currents ---------------------------------------------------------------

def current_closed_form(omega: float) -> float:
    """Infinite-ring current without a slow bond, as a function of the hop weight."""
    if omega <= 0:
        raise ValueError("omega must be positive")
    root = math.sqrt(1.0 + omega)
    return 0.5 * root / (1.0 + root)


def blockage_current_closed_form(epsilon: float) -> float:
    """Infinite-ring current of the deterministic rule with slow-bond strength eps."""
    if not 0.0 <= epsilon <= 1.0:
        raise ValueError("epsilon must lie in [0, 1]")
    return (1.0 - epsilon) / (2.0 - epsilon)


def current_finite_L(L: int, omega: float) -> float:
    """Exact half-filled stationary current on a ring of 2L sites, no slow bond.

    The average engine count under weights (1 + omega) ** l, divided by
    the ring size; converges to current_closed_form(omega) as L grows.
    """
    if L < 2:
        raise ValueError("L must be at least 2")
    if omega <= 0:
        raise ValueError("omega must be positive")
    if L <= 30:
        log_counts = [math.log(c) for c in train_count_list(L)]
    else:
        # the table collapses to (2L / l) * C(L-1, l-1)^2, which keeps the
        # evaluation in log space far beyond the exact-integer regime
        log_2L = math.log(2 * L)
        log_counts = [log_2L - math.log(l) + 2.0 * _log_comb(L - 1, l - 1)
                      for l in range(1, L + 1)]
    log_w = math.log1p(omega)
    terms = [log_counts[l - 1] + l * log_w for l in range(1, L + 1)]
    log_den = _logsumexp(terms)
    log_num = _logsumexp([t + math.log(l) for t, l in zip(terms, range(1, L + 1))])
    return math.exp(log_num - log_den) / (2 * L)


def blockage_current_finite_L(L: int, epsilon: float) -> float:
    """Finite-L counterpart of the slow-bond current from the product-form weights.

    Average number of free first-half particles divided by L, summed over
    r in 1..L/2 with weights C(L - r, r) (1 - eps) ** r * eps ** (L - 2r).
    """
    if L < 2:
        raise ValueError("L must be at least 2")
    if not 0.0 < epsilon < 1.0:
        raise ValueError("epsilon must lie strictly between 0 and 1")
    log_pass = math.log1p(-epsilon)
    log_block = math.log(epsilon)
    terms = []
    for r in range(1, L // 2 + 1):
        terms.append(_log_comb(L - r, r) + r * log_pass + (L - 2 * r) * log_block)
    log_den = _logsumexp(terms)
    log_num = _logsumexp([t + math.log(r) for t, r in zip(terms, range(1, L // 2 + 1))])
    return math.exp(log_num - log_den) / L


def _log_comb(n: int, k: int) -> float:
    if n <= 30:
        return math.log(math.comb(n, k))
    return math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1)


# --- entropy and saddle objectives -----------------------------------------

def entropy(alpha: float) -> float:
    """Bernoulli entropy -a ln a - (1-a) ln(1-a); zero at the endpoints."""
    if not 0.0 <= alpha <= 1.0:
        raise ValueError("alpha must lie in [0, 1]")
    if alpha in (0.0, 1.0):
        return 0.0
    return -alpha * math.log(alpha) - (1.0 - alpha) * math.log(1.0 - alpha)


def saddle_objective(alpha: float, alpha1: float, omega: float) -> float:
    """Large-ring exponent of the engine-density sum at engine fraction alpha.

    alpha1 is the density of trains longer than one particle's worth of
    headway carried by the subleading combinatorial factor; the maximum
    over alpha sits at alpha1 = 0.
    """
    if omega <= 0:
        raise ValueError("omega must be positive")
    if not 0.0 <= alpha <= 1.0:
        raise ValueError("alpha must lie in [0, 1]")
    if not 0.0 <= alpha1 <= 1.0 - alpha:
        raise ValueError("alpha1 must lie in [0, 1 - alpha]")
    if alpha1 == 1.0:
        stretched = 0.0
    else:
        stretched = (1.0 - alpha1) * entropy(alpha / (1.0 - alpha1))
    return stretched + entropy(alpha) + alpha * math.log1p(omega)


def maximize_saddle(omega: float) -> SaddleResult:
    """Maximise the engine-density exponent over alpha at alpha1 = 0.

    The argmax is sqrt(1 + omega) / (1 + sqrt(1 + omega)), twice the
    infinite-ring current.
    """
    x, v = _golden_max(lambda a: saddle_objective(a, 0.0, omega), 0.0, 1.0)
    return SaddleResult(argmax=x, value=v)


def blockage_saddle_objective(x: float, epsilon: float) -> float:
    """Exponent of the slow-bond weight sum at free-particle fraction x."""
    if not 0.0 < epsilon < 1.0:
        raise ValueError("epsilon must lie strictly between 0 and 1")
    if not 0.0 <= x <= 0.5:
        raise ValueError("x must lie in [0, 1/2]")
    one_minus_2x = 1.0 - 2.0 * x
    one_minus_x = 1.0 - x
    value = one_minus_2x * math.log(epsilon) + x * math.log1p(-epsilon)
    if x > 0.0:
        value -= x * math.log(x / one_minus_x)
    if one_minus_2x > 0.0:
        value -= one_minus_2x * math.log(one_minus_2x / one_minus_x)
    return value


def maximize_blockage_saddle(epsilon: float) -> SaddleResult:
    """Maximise the slow-bond exponent over x in [0, 1/2].

    The argmax is (1 - eps) / (2 - eps), the infinite-ring current of the
    deterministic rule with a slow bond.
    """
    x, v = _golden_max(lambda x: blockage_saddle_objective(x, epsilon), 0.0, 0.5)
    return SaddleResult(argmax=x, value=v)


def product_form_weight(r: int, L: int, epsilon: float) -> float:
    """Stationary weight (1 - eps) ** r * eps ** (L - 2r) at r free particles."""
    if not 0 <= 2 * r <= L:
        raise ValueError("need 0 <= 2r <= L")
    if not 0.0 < epsilon < 1.0:
        raise ValueError("epsilon must lie strictly between 0 and 1")
    return (1.0 - epsilon) ** r * epsilon ** (L - 2 * r)
