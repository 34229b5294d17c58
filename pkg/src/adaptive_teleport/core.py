"""Amplitude-level model of a single KLM teleportation step.

A polarization qubit ``amp_h|H> + amp_v|V>`` is teleported through an
entangled resource with ``N + 1`` real amplitudes ``c(0..N)``.  Counting
``m`` vertical photons on the sender side leaves the receiver with the
(phase-corrected) state ``(amp_h c(m), amp_v c(m-1))`` up to normalization,
with ``c(-1) = c(N+1) = 0``.  Outcomes ``m = 0`` and ``m = N + 1`` fail.

Only the phase-corrected picture is modelled here; the photon-level
derivation lives in :mod:`adaptive_teleport.fock_oracle`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import DegenerateState, DomainError, OddNError

TOL = 1e-12
# |q - 1| below this uses the exact uniform limit of the normalization formulas
Q_ONE_TOL = 1e-9


def _clamp_prob(p: float) -> float:
    if -TOL <= p < 0.0:
        return 0.0
    if 1.0 < p <= 1.0 + TOL:
        return 1.0
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"probability {p!r} outside [0, 1]")
    return p


@dataclass(frozen=True)
class QubitState:
    """Normalized polarization qubit ``amp_h|H> + amp_v|V>``."""

    amp_h: complex
    amp_v: complex

    def __post_init__(self):
        object.__setattr__(self, "amp_h", complex(self.amp_h))
        object.__setattr__(self, "amp_v", complex(self.amp_v))
        norm = abs(self.amp_h) ** 2 + abs(self.amp_v) ** 2
        if abs(norm - 1.0) > TOL:
            raise DomainError(f"qubit not normalized: |h|^2 + |v|^2 = {norm!r}")

    @classmethod
    def from_unnormalized(cls, amp_h: complex, amp_v: complex) -> "QubitState":
        big = max(abs(amp_h), abs(amp_v))
        if big == 0.0:
            raise DegenerateState("zero vector has no normalized form")
        # rescale first so tiny amplitudes do not underflow when squared
        h, v = complex(amp_h) / big, complex(amp_v) / big
        norm = math.hypot(abs(h), abs(v))
        return cls(h / norm, v / norm)

    @classmethod
    def random(cls, rng: np.random.Generator) -> "QubitState":
        """Haar-random qubit."""
        z = rng.normal(size=2) + 1j * rng.normal(size=2)
        return cls.from_unnormalized(z[0], z[1])

    def as_array(self) -> np.ndarray:
        return np.array([self.amp_h, self.amp_v], dtype=complex)

    def fidelity(self, other: "QubitState") -> float:
        """``|<self|other>|^2``."""
        overlap = self.amp_h.conjugate() * other.amp_h + self.amp_v.conjugate() * other.amp_v
        return abs(overlap) ** 2

    def equals_up_to_phase(self, other: "QubitState", tol: float = TOL) -> bool:
        return 1.0 - self.fidelity(other) <= tol


@dataclass(frozen=True)
class ResourceSpec:
    """Entangled resource with real nonnegative amplitudes ``c(0..n)``.

    ``n`` is the number of photon pairs and must be even.
    """

    n: int
    amps: tuple

    def __post_init__(self):
        _check_even_n(self.n)
        amps = tuple(float(a) for a in self.amps)
        if len(amps) != self.n + 1:
            raise DomainError(f"expected {self.n + 1} amplitudes, got {len(amps)}")
        if any(a < 0.0 or not math.isfinite(a) for a in amps):
            raise DomainError("resource amplitudes must be finite and nonnegative")
        norm = math.fsum(a * a for a in amps)
        if abs(norm - 1.0) > TOL:
            raise DomainError(f"resource not normalized: sum c^2 = {norm!r}")
        object.__setattr__(self, "amps", amps)

    @classmethod
    def from_weights(cls, weights: Sequence[float]) -> "ResourceSpec":
        """Build a resource from unnormalized squared amplitudes."""
        w = np.asarray(weights, dtype=float)
        if np.any(w < 0) or w.sum() <= 0:
            raise DomainError("weights must be nonnegative with positive sum")
        return cls(len(w) - 1, tuple(np.sqrt(w / math.fsum(w))))

    @property
    def squared(self) -> np.ndarray:
        return np.array(self.amps) ** 2

    def amp(self, i: int) -> float:
        """``c(i)`` with the boundary convention ``c(-1) = c(n+1) = 0``."""
        if 0 <= i <= self.n:
            return self.amps[i]
        return 0.0

    def reversed(self) -> "ResourceSpec":
        return ResourceSpec(self.n, self.amps[::-1])


def _check_even_n(n) -> None:
    if isinstance(n, bool) or not isinstance(n, (int, np.integer)):
        raise OddNError(f"resource size must be an integer, got {n!r}")
    if n < 2 or n % 2:
        raise OddNError(f"resource size must be even and >= 2, got {n}")


def _check_q(q: float) -> float:
    q = float(q)
    if not q > 0.0 or not math.isfinite(q):
        raise DomainError(f"geometric ratio must be positive and finite, got {q!r}")
    return q


def uniform_resource(n: int) -> ResourceSpec:
    """Maximally entangled resource, every ``c(i) = 1/sqrt(n+1)``."""
    _check_even_n(n)
    return ResourceSpec(n, (1.0 / math.sqrt(n + 1),) * (n + 1))


def _one_minus_pow(q: float, k: float) -> float:
    # 1 - q**k without cancellation near q = 1
    return -math.expm1(k * math.log(q))


def peak_normalization(n: int, q: float) -> float:
    """Prefactor ``a1 = (1 - q) / (2 - q^(n/2) (1 + q))`` of the peaked family."""
    _check_even_n(n)
    q = _check_q(q)
    if abs(q - 1.0) < Q_ONE_TOL:
        return 1.0 / (n + 1)
    half = n // 2
    # 2 - q^h (1 + q) == (1 - q^h) + (1 - q^(h+1))
    return (1.0 - q) / (_one_minus_pow(q, half) + _one_minus_pow(q, half + 1))


def monotone_normalization(n: int, q: float) -> float:
    """Prefactor ``a2 = (1 - q) / (1 - q^(n+1))`` of the geometric family."""
    _check_even_n(n)
    q = _check_q(q)
    if abs(q - 1.0) < Q_ONE_TOL:
        return 1.0 / (n + 1)
    return (1.0 - q) / _one_minus_pow(q, n + 1)


def geometric_peak_resource(n: int, q: float) -> ResourceSpec:
    """Resource whose squared amplitudes grow by ``q`` per step up to ``i = n/2``
    and then decay symmetrically.

    ``c(i)^2 = a1 * q^(n/2 - |i - n/2|)``; the amplitudes are palindromic.
    """
    a1 = peak_normalization(n, q)
    if abs(q - 1.0) < Q_ONE_TOL:
        return uniform_resource(n)
    half = n // 2
    amps = tuple(math.sqrt(a1 * q ** (half - abs(i - half))) for i in range(n + 1))
    return ResourceSpec(n, amps)


def geometric_monotone_resource(n: int, q2: float) -> ResourceSpec:
    """Resource with ``c(i)^2 = a2 * q2^i``.

    Increasing for ``q2 > 1``, decreasing for ``q2 < 1``.
    """
    a2 = monotone_normalization(n, q2)
    if abs(q2 - 1.0) < Q_ONE_TOL:
        return uniform_resource(n)
    amps = tuple(math.sqrt(a2 * q2**i) for i in range(n + 1))
    return ResourceSpec(n, amps)


@dataclass(frozen=True)
class Outcome:
    """One measurement outcome of a teleportation step.

    For failures (``m = 0`` or ``m = n + 1``) ``state`` holds the collapsed
    rail (``|H>`` or ``|V>``) for diagnostics and ``success`` is False.
    """

    m: int
    prob: float
    state: Optional[QubitState]
    success: bool
    bob_mode_index: int


@dataclass(frozen=True)
class OutcomeDistribution:
    n: int
    entries: tuple

    def __iter__(self):
        return iter(self.entries)

    def __getitem__(self, m: int) -> Outcome:
        return self.entries[m]

    @property
    def probs(self) -> np.ndarray:
        return np.array([e.prob for e in self.entries])

    @property
    def success_mass(self) -> float:
        return math.fsum(e.prob for e in self.entries if e.success)


_H = (1.0, 0.0)
_V = (0.0, 1.0)


def teleport_step(qubit: QubitState, res: ResourceSpec) -> OutcomeDistribution:
    """Outcome law of one KLM step for every vertical-photon count ``m``."""
    n = res.n
    entries = []
    for m in range(n + 2):
        h = qubit.amp_h * res.amp(m)
        v = qubit.amp_v * res.amp(m - 1)
        prob = _clamp_prob(abs(h) ** 2 + abs(v) ** 2)
        success = 1 <= m <= n
        if success:
            state = QubitState.from_unnormalized(h, v) if prob > 0.0 else None
        else:
            state = QubitState(*(_H if m == 0 else _V))
        entries.append(Outcome(m, prob, state, success, n + m))
    return OutcomeDistribution(n, tuple(entries))


def apply_not(qubit: QubitState) -> QubitState:
    return QubitState(qubit.amp_v, qubit.amp_h)


@dataclass(frozen=True)
class FilterResult:
    success_prob: float
    post_on_success: QubitState
    kraus_success: np.ndarray
    kraus_failure: np.ndarray


def kraus_pair(weight_h: float, weight_v: float) -> tuple:
    """Kraus operators ``(E_S, E_F)`` equalizing two rail weights.

    The heavier rail is attenuated by ``min/max``; ``E_S^† E_S + E_F^† E_F = 1``.
    """
    if weight_h < 0 or weight_v < 0:
        raise DomainError("rail weights must be nonnegative")
    if weight_h == 0 and weight_v == 0:
        raise DegenerateState("both rail weights vanish")
    if weight_h >= weight_v:
        r = weight_v / weight_h
        e_s = np.diag([r, 1.0]).astype(complex)
        e_f = np.diag([math.sqrt(max(0.0, 1.0 - r * r)), 0.0]).astype(complex)
    else:
        r = weight_h / weight_v
        e_s = np.diag([1.0, r]).astype(complex)
        e_f = np.diag([0.0, math.sqrt(max(0.0, 1.0 - r * r))]).astype(complex)
    return e_s, e_f


def filter_to_target(original: QubitState, weight_h: float, weight_v: float) -> FilterResult:
    """Undo the distortion ``(A*alpha, B*beta)`` by a two-outcome filter.

    ``success_prob`` is the Born probability of ``E_S`` on the unnormalized
    distorted state, which equals ``min(A^2, B^2)`` for every input.
    """
    e_s, e_f = kraus_pair(weight_h, weight_v)
    distorted = np.array([weight_h * original.amp_h, weight_v * original.amp_v])
    kept = e_s @ distorted
    success_prob = _clamp_prob(float(np.vdot(kept, kept).real))
    if success_prob > 0.0:
        post = QubitState.from_unnormalized(kept[0], kept[1])
    else:
        # filter never succeeds; report the target it would have restored
        post = original
    return FilterResult(success_prob, post, e_s, e_f)
