"""Closed-form success probabilities and exact enumeration of chains.

The enumerator walks every all-success outcome sequence of a chain and sums
the exact path weights, so it serves as ground truth for the closed forms and
for the Monte Carlo estimates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.special import gammaln, logsumexp

from .core import Q_ONE_TOL, ResourceSpec, _check_even_n, _check_q
from .errors import DomainError, EnumerationTooLarge, ProtocolError
from .strategies import History, Identical, FixedSequence, Strategy

MAX_PATHS = 10**7
# relative tolerance for treating the two rail weights of a path as equal
FAITHFUL_RTOL = 1e-9


def p_adaptive_double(n: int, q: float) -> float:
    """Faithful success probability of the two-step adaptive scheme.

    ``p = 2 (q - q^(n/2+1)) / (2 - q^(n/2)(1+q)) * (q^n - 1) / (q^(n+1) - 1)``,
    with the ``q -> 1`` limit ``(n/(n+1))^2``.
    """
    _check_even_n(n)
    q = _check_q(q)
    if abs(q - 1.0) < Q_ONE_TOL:
        return (n / (n + 1)) ** 2
    half = n // 2
    lq = math.log(q)
    # all differences written with expm1 to stay accurate near q = 1
    first = -q * math.expm1(half * lq) / (-math.expm1(half * lq) - math.expm1((half + 1) * lq))
    second = math.expm1(n * lq) / math.expm1((n + 1) * lq)
    return 2.0 * first * second


def p_identical_chain_closed(M: int, q: float) -> float:
    """Faithful probability of ``M`` identical symmetric ``N = 2`` steps with
    a final filter, where ``q = c(1)^2 / c(0)^2``.

    Evaluated in log space so that long chains do not underflow.
    """
    if isinstance(M, bool) or int(M) != M or M < 1:
        raise DomainError(f"number of teleportations must be a positive integer, got {M!r}")
    M = int(M)
    q = _check_q(q)
    lq = math.log(q)
    i = np.arange(M + 1)
    log_binom = gammaln(M + 1) - gammaln(i + 1) - gammaln(M - i + 1)
    log_min = np.minimum((M - i) * lq, i * lq)
    return float(math.exp(logsumexp(log_binom + log_min) - M * math.log(2.0 + q)))


def _check_last_step_args(a0_sq: float, q: float) -> None:
    if a0_sq < 0:
        raise DomainError("a0_sq must be nonnegative")
    if q < 1:
        raise DomainError(
            "q must be >= 1; swap the rails (a0_sq -> a0_sq*q, q -> 1/q) first")


def p_last_step_sym(a0_sq: float, q: float) -> float:
    """Best last-step contribution with a symmetric ``N = 2`` resource,
    ``a0^2 (1+q)/(2+q)`` for rail ratio ``q = a1^2/a0^2 >= 1``."""
    _check_last_step_args(a0_sq, q)
    return a0_sq * (1.0 + q) / (2.0 + q)


def p_last_step_adaptive(a0_sq: float, q: float) -> float:
    """Last-step contribution with the matched decreasing ``N = 2`` resource,
    ``a0^2 (1+q)/(1 + 1/q + q)``."""
    _check_last_step_args(a0_sq, q)
    return a0_sq * (1.0 + q) / (1.0 + 1.0 / q + q)


@dataclass(frozen=True)
class ChainSpec:
    """``M`` teleportations driven by ``strategy``.

    ``final_filter`` defaults to what the strategy requires.
    """

    M: int
    strategy: Strategy
    final_filter: Optional[bool] = None

    def __post_init__(self):
        if isinstance(self.M, bool) or int(self.M) != self.M or self.M < 1:
            raise DomainError(f"M must be a positive integer, got {self.M!r}")
        h = self.strategy.horizon
        if h is not None and self.M != h:
            raise ProtocolError(
                f"{type(self.strategy).__name__} covers exactly {h} steps, chain has {self.M}")
        if self.final_filter is None:
            object.__setattr__(self, "final_filter", self.strategy.needs_filter)

    @property
    def n(self) -> int:
        return self.strategy.n


def _path_contribution(w_h: float, w_v: float, final_filter: bool, path) -> float:
    """Probability mass of one success path from its squared rail weights."""
    if final_filter:
        return min(w_h, w_v)
    if not math.isclose(w_h, w_v, rel_tol=FAITHFUL_RTOL, abs_tol=1e-300):
        raise ProtocolError(
            f"path {path} is not faithful (rail weights {w_h!r} vs {w_v!r}); "
            "enable final_filter")
    return w_h


def _enumerate_static(spec: ChainSpec) -> float:
    # history-independent resources: build all path weights with outer products
    n = spec.n
    w_h = np.ones(1)
    w_v = np.ones(1)
    for k in range(spec.M):
        # any success history of length k selects the same resource
        step = spec.strategy.next_resource(History((1,) * k, n))
        c2 = step.resource.squared
        w_h = np.multiply.outer(w_h, c2[1:]).ravel()
        w_v = np.multiply.outer(w_v, c2[:-1]).ravel()
    if spec.final_filter:
        return float(np.minimum(w_h, w_v).sum())
    bad = ~np.isclose(w_h, w_v, rtol=FAITHFUL_RTOL, atol=0.0)
    if bad.any():
        raise ProtocolError(
            f"{int(bad.sum())} success paths are not faithful; enable final_filter")
    return float(w_h.sum())


def _enumerate_dfs(spec: ChainSpec) -> float:
    n = spec.n
    strategy = spec.strategy
    terms = []

    # rail weights are squared amplitudes at the H/V positions; ``flipped``
    # records whether an odd number of NOT gates has swapped alpha and beta
    def walk(hist: History, w_h: float, w_v: float, flipped: bool):
        if len(hist) == spec.M:
            if flipped:
                raise ProtocolError(f"path {hist.outcomes} ends with the rails swapped")
            terms.append(_path_contribution(w_h, w_v, spec.final_filter, hist.outcomes))
            return
        step = strategy.next_resource(hist)
        if step.resource.n != n:
            raise ProtocolError("strategy changed the resource size mid-chain")
        if step.pre_not:
            w_h, w_v, flipped = w_v, w_h, not flipped
        c2 = step.resource.squared
        for m in range(1, n + 1):
            h, v = w_h * c2[m], w_v * c2[m - 1]
            if step.post_not:
                walk(hist.extend(m), v, h, not flipped)
            else:
                walk(hist.extend(m), h, v, flipped)

    walk(History((), n), 1.0, 1.0, False)
    return math.fsum(terms)


def exact_chain_success(spec: ChainSpec) -> float:
    """Exact probability that every step succeeds and the output is faithful.

    With ``final_filter`` each success path contributes the smaller of its
    two squared rail weights; without it every path must already be faithful
    and contributes its full weight.
    """
    n_paths = spec.n ** spec.M
    if n_paths > MAX_PATHS:
        raise EnumerationTooLarge(f"{spec.n}^{spec.M} = {n_paths} paths exceeds {MAX_PATHS}")
    if isinstance(spec.strategy, (Identical, FixedSequence)):
        return _enumerate_static(spec)
    return _enumerate_dfs(spec)


def identical_symmetric_n2(q: float) -> Identical:
    """Identical-chain strategy with ``c^2 proportional to (1, q, 1)``."""
    q = _check_q(q)
    return Identical(ResourceSpec.from_weights([1.0, q, 1.0]))
