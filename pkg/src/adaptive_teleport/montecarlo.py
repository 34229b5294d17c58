"""Seeded Monte Carlo simulation of teleportation chains.

Each sample draws its outcome at every step from the exact ``N + 2``-entry
outcome law (inverse CDF), follows the strategy's resource/gate choices and,
when required, the final filtering measurement.  Samples are processed in
fixed-size chunks; chunk ``j`` uses its own PCG64 stream derived from
``SeedSequence(seed, spawn_key=(j,))`` so results do not depend on how the
chunks are scheduled.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from typing import Optional

import numba
import numpy as np

from .analytics import ChainSpec
from .core import QubitState
from .errors import DomainError, ProtocolError
from .strategies import History, Strategy

CHUNK_SIZE = 1 << 18


@dataclass(frozen=True)
class SimReport:
    samples: int
    successes: int
    success_rate: float
    rate_stderr: float
    min_fidelity_on_success: Optional[float]
    seed: int

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "SimReport":
        return cls(**d)

    def consistent_with(self, exact: float, n_sigma: float = 4.0) -> bool:
        return abs(self.success_rate - exact) < n_sigma * self.rate_stderr


@dataclass(frozen=True)
class _ChunkResult:
    samples: int
    successes: int
    min_fidelity: float  # +inf when no successes


def _decode_history(code: int, length: int, n: int) -> History:
    outcomes = []
    for _ in range(length):
        code, r = divmod(code, n)
        outcomes.append(r + 1)
    return History(tuple(reversed(outcomes)), n)


@numba.njit(cache=True)
def _advance(A, B, flip, code, u, lo, hi, out, amps, pre_not, post_not, pa, pb):
    """Sample one step for samples ``lo:hi`` sharing a resource.

    Survivors are written back starting at index ``out`` (never ahead of the
    read position); returns the next free write index.
    """
    n = amps.size - 1
    for s in range(lo, hi):
        a, b, f = A[s], B[s], flip[s]
        if pre_not:
            a, b, f = b, a, not f
        w_h = (pb if f else pa) * a * a
        w_v = (pa if f else pb) * b * b
        thresh = u[s] * (w_h + w_v)
        # smallest m whose cumulative probability exceeds the draw
        cum = 0.0
        prev = 0.0
        m = n + 1
        for j in range(n + 1):
            cum += amps[j] * amps[j]
            if w_h * cum + w_v * prev > thresh:
                m = j
                break
            prev = cum
        if m == 0 or m == n + 1:
            continue
        a = a * amps[m]
        b = b * amps[m - 1]
        if post_not:
            a, b, f = b, a, not f
        scale = max(a, b)
        A[out], B[out], flip[out] = a / scale, b / scale, f
        code[out] = code[s] * n + (m - 1)
        out += 1
    return out


@numba.njit(cache=True)
def _min_fidelity(A, B, pa, pb):
    # output (alpha*A, beta*B) with real rails: <in|out> = pa*A + pb*B
    worst = np.inf
    for s in range(A.size):
        a, b = A[s], B[s]
        fid = (pa * a + pb * b) ** 2 / (pa * a * a + pb * b * b)
        worst = min(worst, fid)
    return worst


def _simulate_chunk(spec: ChainSpec, alpha: complex, beta: complex, size: int,
                    rng: np.random.Generator) -> _ChunkResult:
    strategy = spec.strategy
    n = spec.n
    pa, pb = abs(alpha) ** 2, abs(beta) ** 2
    # amplitude at the H position is s_H * A with s_H = beta if flip else alpha
    A = np.ones(size)
    B = np.ones(size)
    flip = np.zeros(size, dtype=bool)
    code = np.zeros(size, dtype=np.int64)

    for k in range(spec.M):
        if A.size == 0:
            break
        u = rng.random(A.size)
        if strategy.history_dependent:
            keys, inv = np.unique(code, return_inverse=True)
            order = np.argsort(inv, kind="stable")
            A, B, flip, code, u = A[order], B[order], flip[order], code[order], u[order]
            bounds = np.concatenate(([0], np.cumsum(np.bincount(inv, minlength=keys.size))))
            bounds = [int(x) for x in bounds]
            steps = [strategy.next_resource(_decode_history(int(key), k, n)) for key in keys]
        else:
            bounds = (0, A.size)
            steps = [strategy.next_resource(History((1,) * k, n))]

        out = 0
        for g, step in enumerate(steps):
            if step.resource.n != n:
                raise ProtocolError("strategy changed the resource size mid-chain")
            out = _advance(A, B, flip, code, u, bounds[g], bounds[g + 1], out,
                           np.asarray(step.resource.amps), step.pre_not, step.post_not, pa, pb)
        A, B, flip, code = A[:out], B[:out], flip[:out], code[:out]

    if A.size and flip.any():
        raise ProtocolError("chain ended with the rails swapped")
    if spec.final_filter and A.size:
        w_norm = pa * A**2 + pb * B**2
        low = np.minimum(A, B)
        keep = rng.random(A.size) < low**2 / w_norm
        A = B = low[keep]
    successes = int(A.size)
    if successes == 0:
        return _ChunkResult(size, 0, math.inf)
    return _ChunkResult(size, successes, _min_fidelity(A, B, pa, pb))


def _run_chunk(args):
    spec, alpha, beta, size, seed, stream = args
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(stream,))))
    return _simulate_chunk(spec, alpha, beta, size, rng)


def simulate_chain(
    kind: Strategy,
    qubit: QubitState,
    M: int,
    samples: int,
    seed: int,
    final_filter: Optional[bool] = None,
    chunk_size: int = CHUNK_SIZE,
    workers: int = 1,
) -> SimReport:
    """Estimate the faithful-teleportation probability of an ``M``-step chain.

    Parameters
    ----------
    kind : Strategy
        Resource-selection policy.
    qubit : QubitState
        Input state, fixed for all samples.
    M : int
        Number of teleportations.
    samples : int
        Number of independent trajectories.
    seed : int
        Nonnegative 64-bit seed; identical seeds give identical reports
        regardless of ``workers``.
    final_filter : bool, optional
        Override the strategy's filtering requirement.
    workers : int
        Process count; chunks are merged in stream order.
    """
    if samples < 1:
        raise DomainError("samples must be >= 1")
    if not 0 <= seed < 2**64:
        raise DomainError("seed must be a nonnegative 64-bit integer")
    spec = ChainSpec(M, kind, final_filter)
    sizes = [chunk_size] * (samples // chunk_size)
    if samples % chunk_size:
        sizes.append(samples % chunk_size)
    jobs = [(spec, qubit.amp_h, qubit.amp_v, size, seed, j) for j, size in enumerate(sizes)]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_chunk, jobs))
    else:
        results = [_run_chunk(job) for job in jobs]

    successes = sum(r.successes for r in results)
    rate = successes / samples
    min_fid = min(r.min_fidelity for r in results)
    return SimReport(
        samples=samples,
        successes=successes,
        success_rate=rate,
        rate_stderr=math.sqrt(rate * (1.0 - rate) / samples),
        min_fidelity_on_success=None if successes == 0 else min_fid,
        seed=seed,
    )
