"""One-dimensional maximization over the geometric ratio ``q``.

Neither success probability is known to be unimodal in ``q``, so a
log-spaced grid scan picks the best cell before golden-section refinement.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable, Iterable, Optional

import numpy as np

from .analytics import ChainSpec, exact_chain_success, p_adaptive_double, p_identical_chain_closed
from .core import ResourceSpec, _check_even_n, geometric_peak_resource
from .errors import DomainError, NonFiniteObjective
from .strategies import Identical

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0
DEFAULT_BRACKET = (1.0, 4.0)
DEFAULT_TOL = 1e-6


@dataclass(frozen=True)
class OptimizationResult:
    q_opt: float
    p_opt: float
    iterations: int
    bracket: tuple
    converged: bool


def _evaluate(objective, q):
    value = objective(q)
    if not math.isfinite(value):
        raise NonFiniteObjective(f"objective({q!r}) = {value!r}")
    return value


def golden_section_max(objective, lo, hi, tol=DEFAULT_TOL, max_iter=200):
    """Golden-section search for a maximum of ``objective`` on ``[lo, hi]``.

    Returns ``(q, f(q), iterations, converged)`` for the best point seen,
    endpoints included.
    """
    a, b = lo, hi
    x1 = b - INV_PHI * (b - a)
    x2 = a + INV_PHI * (b - a)
    f1 = _evaluate(objective, x1)
    f2 = _evaluate(objective, x2)
    seen = [(f1, x1), (f2, x2), (_evaluate(objective, lo), lo), (_evaluate(objective, hi), hi)]
    it = 0
    while b - a > tol and it < max_iter:
        it += 1
        if f1 >= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - INV_PHI * (b - a)
            f1 = _evaluate(objective, x1)
            seen.append((f1, x1))
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + INV_PHI * (b - a)
            f2 = _evaluate(objective, x2)
            seen.append((f2, x2))
    mid = 0.5 * (a + b)
    seen.append((_evaluate(objective, mid), mid))
    f_best, x_best = max(seen)
    return x_best, f_best, it, b - a <= tol


def maximize_over_q(
    objective: Callable[[float], float],
    lo: float = DEFAULT_BRACKET[0],
    hi: float = DEFAULT_BRACKET[1],
    tol: float = DEFAULT_TOL,
    grid_points: int = 256,
) -> OptimizationResult:
    """Maximize ``objective`` over ``q`` in ``[lo, hi]``.

    A log-spaced scan of ``grid_points`` values locates the best cell, whose
    neighbours bracket the golden-section refinement.
    """
    if not 0.0 < lo < hi:
        raise DomainError(f"need 0 < lo < hi, got [{lo}, {hi}]")
    if grid_points < 256:
        raise DomainError("coarse scan needs at least 256 points")
    grid = np.geomspace(lo, hi, grid_points)
    grid[0], grid[-1] = lo, hi
    values = np.array([_evaluate(objective, float(q)) for q in grid])
    i = int(np.argmax(values))
    cell = (float(grid[max(i - 1, 0)]), float(grid[min(i + 1, grid_points - 1)]))
    q, p, it, converged = golden_section_max(objective, cell[0], cell[1], tol)
    if values[i] > p:
        q, p = float(grid[i]), float(values[i])
    return OptimizationResult(q, p, it, cell, converged)


@dataclass(frozen=True)
class Table1Row:
    n: int
    p_maximal: float
    q_opt: float
    p_opt: float


def table1(n_values: Iterable[int], tol: float = DEFAULT_TOL) -> list:
    """Adaptive double teleportation optimum against the maximally entangled
    value ``(n/(n+1))^2`` for each ``n``."""
    rows = []
    for n in n_values:
        _check_even_n(n)
        if n > 32:
            raise DomainError(f"table rows limited to n <= 32, got {n}")
        res = maximize_over_q(lambda q: p_adaptive_double(n, q), *DEFAULT_BRACKET, tol=tol)
        rows.append(Table1Row(n, (n / (n + 1)) ** 2, res.q_opt, res.p_opt))
    return rows


@dataclass(frozen=True)
class CrossoverRow:
    M: int
    q_opt: float
    p_opt: float
    p_maximal: float

    @property
    def nonmaximal(self) -> bool:
        return self.q_opt > 1.0 + 1e-3


def crossover_M(max_M: int, hi: float = 16.0, tol: float = DEFAULT_TOL) -> list:
    """Optimal identical-chain ratio for ``M = 1..max_M`` (``N = 2``).

    Restricting to ``q >= 1`` is safe: ``p(M, 1/q) <= p(M, q)`` for ``q >= 1``.
    """
    if max_M < 6:
        raise DomainError(f"max_M must be >= 6, got {max_M}")
    rows = []
    for M in range(1, max_M + 1):
        res = maximize_over_q(lambda q: p_identical_chain_closed(M, q), 1.0, hi, tol)
        rows.append(CrossoverRow(M, res.q_opt, res.p_opt, p_identical_chain_closed(M, 1.0)))
    return rows


def optimal_identical(n: int, M: int, lo: float = 1.0, hi: float = 16.0,
                      tol: float = DEFAULT_TOL) -> OptimizationResult:
    """Best identical chain of peaked resources for general even ``n``
    (closed form for ``n = 2``, enumeration otherwise)."""
    if n == 2:
        return maximize_over_q(lambda q: p_identical_chain_closed(M, q), lo, hi, tol)

    def objective(q):
        return exact_chain_success(ChainSpec(M, Identical(geometric_peak_resource(n, q)), True))

    return maximize_over_q(objective, lo, hi, tol)


@dataclass(frozen=True)
class AsymmetricScanResult:
    weights: tuple
    p_best: float
    p_best_symmetric: float


def asymmetric_scan(M: int, steps: int = 60, q_hi: float = 16.0) -> AsymmetricScanResult:
    """Exploratory brute-force check of identical ``N = 2`` chains with
    asymmetric squared amplitudes ``(x, y, z)``.

    Scans the simplex on a ``steps``-fine grid of log-ratios and compares the
    best value with the best symmetric state.
    """
    ratios = np.geomspace(1.0 / q_hi, q_hi, steps)
    best: Optional[tuple] = None
    for r1, r2 in itertools.product(ratios, ratios):
        weights = (1.0, float(r1), float(r2))
        res = ResourceSpec.from_weights(weights)
        p = exact_chain_success(ChainSpec(M, Identical(res), True))
        if best is None or p > best[1]:
            best = (tuple(res.squared), p)
    sym = maximize_over_q(lambda q: p_identical_chain_closed(M, q), 1.0 / q_hi, q_hi)
    return AsymmetricScanResult(best[0], best[1], sym.p_opt)
