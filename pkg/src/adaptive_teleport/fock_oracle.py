"""Photon-level oracle for a single teleportation step.

Builds the full ``2N + 1``-mode polarized Fock state (input photon in mode 0,
sender modes ``1..N``, receiver modes ``N+1..2N``), applies the
``(N+1)``-point Fourier transform to the creation operators of modes
``0..N``, projects onto every photon-count pattern of those modes and reads
the teleported qubit out of receiver mode ``N + m``.

Nothing here uses the effective formulas of :mod:`adaptive_teleport.core`
except :func:`verify_effective_step`, which compares the two.
"""

from __future__ import annotations

import cmath
import math
from collections import defaultdict
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, Optional, Tuple

import numpy as np

from .core import QubitState, ResourceSpec, teleport_step
from .errors import DomainError, ExtractionFailed, TooLarge, VerificationFailed

MAX_N = 6
PRUNE = 1e-14

# per-mode (h_count, v_count) over modes 0..2N
Occupation = Tuple[Tuple[int, int], ...]

H1 = (1, 0)
V1 = (0, 1)


@dataclass(frozen=True)
class FockState:
    """Sparse polarized Fock state over ``2n + 1`` modes."""

    n: int
    amplitudes: Dict[Occupation, complex]

    def __post_init__(self):
        for key in self.amplitudes:
            if len(key) != 2 * self.n + 1:
                raise DomainError(f"occupation {key} does not span {2 * self.n + 1} modes")
        if abs(self.norm() - 1.0) > 1e-10:
            raise DomainError(f"Fock state not normalized: {self.norm()!r}")

    def norm(self) -> float:
        return math.fsum(abs(a) ** 2 for a in self.amplitudes.values())

    def __len__(self):
        return len(self.amplitudes)


def resource_occupation(n: int, i: int) -> Occupation:
    """Modes ``1..2n`` of the resource term with ``i`` vertical sender photons."""
    sender = tuple(V1 if k <= i else H1 for k in range(1, n + 1))
    receiver = tuple(H1 if k <= i else V1 for k in range(1, n + 1))
    return sender + receiver


def build_joint_state(qubit: QubitState, res: ResourceSpec) -> FockState:
    if res.n > MAX_N:
        raise TooLarge(f"Fock oracle limited to N <= {MAX_N}, got {res.n}")
    n = res.n
    amps = {}
    for i in range(n + 1):
        for photon, a in ((H1, qubit.amp_h), (V1, qubit.amp_v)):
            coeff = a * res.amps[i]
            if coeff != 0:
                key = (photon,) + resource_occupation(n, i)
                assert sum(h + v for h, v in key) == 2 * n + 1
                amps[key] = complex(coeff)
    return FockState(n, amps)


def fourier_matrix(n: int) -> np.ndarray:
    """``U[l, k] = omega^(k l) / sqrt(n + 1)`` with ``omega = exp(2 pi i / (n + 1))``."""
    d = n + 1
    k = np.arange(d)
    return np.exp(2j * np.pi * np.outer(k, k) / d) / math.sqrt(d)


@lru_cache(maxsize=None)
def _transform_counts(counts: Tuple[int, ...], n: int) -> Tuple[Tuple[Tuple[int, ...], complex], ...]:
    """Fock amplitudes after mapping ``a_k^† -> sum_l U[l,k] a_l^†`` on one
    polarization with input occupations ``counts``."""
    d = n + 1
    U = fourier_matrix(n)
    poly = {(0,) * d: 1.0 + 0j}
    for k, c in enumerate(counts):
        for _ in range(c):
            nxt = defaultdict(complex)
            for mono, coeff in poly.items():
                for l in range(d):
                    out = list(mono)
                    out[l] += 1
                    nxt[tuple(out)] += coeff * U[l, k]
            poly = nxt
    in_norm = math.prod(math.factorial(c) for c in counts)
    result = []
    for mono, coeff in poly.items():
        out_norm = math.prod(math.factorial(c) for c in mono)
        result.append((mono, coeff * math.sqrt(out_norm / in_norm)))
    return tuple(result)


def apply_fourier(state: FockState) -> FockState:
    """Apply the Fourier transform to modes ``0..n`` of both polarizations."""
    n = state.n
    d = n + 1
    out = defaultdict(complex)
    for key, amp in state.amplitudes.items():
        front, back = key[:d], key[d:]
        h_terms = _transform_counts(tuple(h for h, _ in front), n)
        v_terms = _transform_counts(tuple(v for _, v in front), n)
        for h_out, h_amp in h_terms:
            for v_out, v_amp in v_terms:
                out[tuple(zip(h_out, v_out)) + back] += amp * h_amp * v_amp
    return FockState(n, {k: a for k, a in out.items() if abs(a) > PRUNE})


@dataclass(frozen=True)
class PatternResult:
    pattern: Occupation
    prob: float
    m: int
    bob_state: Dict[Occupation, complex]
    extracted: Optional[QubitState]


def _bob_key(n: int, h_count: int) -> Occupation:
    # receiver modes: first h_count carry H, the rest V
    return tuple(H1 if k < h_count else V1 for k in range(n))


def measure_and_extract(state: FockState, tol: float = 1e-10) -> list:
    """Project modes ``0..n`` onto every photon-count pattern.

    For ``1 <= m <= n`` the receiver state must be a superposition of the
    two configurations that differ only in mode ``n + m``; its H/V
    amplitudes there form the extracted qubit.
    """
    n = state.n
    d = n + 1
    groups = defaultdict(dict)
    for key, amp in state.amplitudes.items():
        groups[key[:d]][key[d:]] = amp
    results = []
    for pattern in sorted(groups):
        bob = groups[pattern]
        prob = math.fsum(abs(a) ** 2 for a in bob.values())
        if prob == 0.0:
            continue
        scale = 1.0 / math.sqrt(prob)
        bob = {k: a * scale for k, a in bob.items()}
        m = sum(v for _, v in pattern)
        extracted = None
        if 1 <= m <= n:
            key_h, key_v = _bob_key(n, m), _bob_key(n, m - 1)
            stray = math.fsum(abs(a) ** 2 for k, a in bob.items() if k not in (key_h, key_v))
            if stray > tol:
                raise ExtractionFailed(
                    f"pattern {pattern}: receiver weight {stray!r} outside mode {n + m} qubit")
            extracted = QubitState.from_unnormalized(bob.get(key_h, 0j), bob.get(key_v, 0j))
        results.append(PatternResult(pattern, prob, m, bob, extracted))
    return results


def outcome_distribution(results) -> np.ndarray:
    """Aggregate pattern probabilities by vertical-photon count."""
    n = len(results[0].pattern) - 1
    dist = np.zeros(n + 2)
    for r in results:
        dist[r.m] += r.prob
    return dist


def _relative_phase(h: complex, v: complex) -> Optional[float]:
    if abs(h) < 1e-12 or abs(v) < 1e-12:
        return None
    return cmath.phase(v * h.conjugate())


def _wrap(angle: float) -> float:
    return (angle + math.pi) % (2 * math.pi) - math.pi


PROBE = QubitState(1 / math.sqrt(2), 1 / math.sqrt(2))


@dataclass
class VerificationReport:
    passed: bool
    n: int
    n_patterns: int
    distribution_error: float
    modulus_error: float
    phase_error: float
    correction_phases: dict = field(repr=False)
    failures: list = field(default_factory=list)


def pattern_correction_phases(res: ResourceSpec, probe: QubitState = PROBE) -> dict:
    """Relative H/V phase imprinted on the receiver qubit per pattern,
    measured with ``probe`` and relative to the ideal corrected state."""
    phases = {}
    for r in measure_and_extract(apply_fourier(build_joint_state(probe, res))):
        if r.extracted is None:
            continue
        got = _relative_phase(r.extracted.amp_h, r.extracted.amp_v)
        ideal = _relative_phase(probe.amp_h * res.amps[r.m], probe.amp_v * res.amps[r.m - 1])
        if got is not None and ideal is not None:
            phases[r.pattern] = _wrap(got - ideal)
    return phases


def verify_effective_step(qubit: QubitState, res: ResourceSpec, tol: float = 1e-10,
                          dist_tol: float = 1e-12, strict: bool = True) -> VerificationReport:
    """Compare the photon-level step with the effective amplitude model.

    Checks (a) the outcome distribution over ``m`` against ``teleport_step``,
    (b) every extracted qubit against the ideal one after undoing a
    pattern-dependent relative phase that is fixed by a probe input, and
    (c) that failure branches leave a single receiver configuration.
    Raises :class:`VerificationFailed` on the first problem when ``strict``.
    """
    n = res.n
    results = measure_and_extract(apply_fourier(build_joint_state(qubit, res)))
    failures = []

    dist = outcome_distribution(results)
    dist_err = float(np.max(np.abs(dist - teleport_step(qubit, res).probs)))
    if dist_err > dist_tol:
        failures.append((None, f"outcome distribution off by {dist_err:.3g}"))

    phases = pattern_correction_phases(res)
    mod_err = 0.0
    phase_err = 0.0
    for r in results:
        if r.extracted is not None:
            ideal_h = qubit.amp_h * res.amps[r.m]
            ideal_v = qubit.amp_v * res.amps[r.m - 1]
            ideal = QubitState.from_unnormalized(ideal_h, ideal_v)
            err = max(abs(abs(r.extracted.amp_h) - abs(ideal.amp_h)),
                      abs(abs(r.extracted.amp_v) - abs(ideal.amp_v)))
            mod_err = max(mod_err, err)
            if err > tol:
                failures.append((r.pattern, f"moduli differ by {err:.3g}"))
            got = _relative_phase(r.extracted.amp_h, r.extracted.amp_v)
            want = _relative_phase(ideal_h, ideal_v)
            if got is not None and want is not None:
                if r.pattern not in phases:
                    failures.append((r.pattern, "pattern absent for the probe input"))
                    continue
                perr = abs(_wrap(got - want - phases[r.pattern]))
                phase_err = max(phase_err, perr)
                if perr > tol:
                    failures.append((r.pattern, f"correction phase differs by {perr:.3g}"))
        elif r.m in (0, n + 1):
            expected = _bob_key(n, 0 if r.m == 0 else n)
            weight = abs(r.bob_state.get(expected, 0j)) ** 2
            if abs(weight - 1.0) > tol:
                failures.append((r.pattern, f"failure branch m={r.m} is not a single configuration"))

    report = VerificationReport(
        passed=not failures,
        n=n,
        n_patterns=len(results),
        distribution_error=dist_err,
        modulus_error=mod_err,
        phase_error=phase_err,
        correction_phases=phases,
        failures=[msg for _, msg in failures],
    )
    if strict and failures:
        pattern, msg = failures[0]
        raise VerificationFailed(msg, pattern)
    return report
