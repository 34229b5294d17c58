"""Resource-selection policies for chains of teleportations.

A strategy maps the history of successful outcomes to the resource used in
the next step, optionally wrapped by NOT gates applied before and after that
step.  Strategies are immutable; failed steps terminate a chain, so they are
only ever queried with histories of successes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .core import (
    ResourceSpec,
    geometric_monotone_resource,
    geometric_peak_resource,
    uniform_resource,
)
from .errors import DomainError, ProtocolError, ResourceSizeMismatch


@dataclass(frozen=True)
class History:
    """Vertical-photon counts of the completed (successful) steps."""

    outcomes: tuple
    n: int

    def __post_init__(self):
        outcomes = tuple(int(m) for m in self.outcomes)
        for m in outcomes:
            if not 1 <= m <= self.n:
                raise ProtocolError(f"history outcome {m} is not a success for N={self.n}")
        object.__setattr__(self, "outcomes", outcomes)

    def __len__(self):
        return len(self.outcomes)

    def extend(self, m: int) -> "History":
        return History(self.outcomes + (m,), self.n)


@dataclass(frozen=True)
class ChainWeights:
    """Rail weights accumulated along a history.

    ``a1`` multiplies the H amplitude and ``a0`` the V amplitude, so the
    unnormalized qubit is ``(a1*alpha, a0*beta)``.
    """

    a1: float
    a0: float

    @property
    def ratio(self) -> float:
        """``a1^2 / a0^2``."""
        return (self.a1 / self.a0) ** 2


def chain_weights(hist: History, resources: Sequence[ResourceSpec]) -> ChainWeights:
    if len(resources) != len(hist):
        raise ResourceSizeMismatch(
            f"{len(hist)} outcomes but {len(resources)} resources")
    a1 = 1.0
    a0 = 1.0
    for m, res in zip(hist.outcomes, resources):
        if res.n != hist.n:
            raise ResourceSizeMismatch(f"resource size {res.n} != history size {hist.n}")
        a1 *= res.amp(m)
        a0 *= res.amp(m - 1)
    return ChainWeights(a1, a0)


@dataclass(frozen=True)
class Step:
    resource: ResourceSpec
    pre_not: bool = False
    post_not: bool = False


class Strategy:
    """Base policy.  Subclasses define ``n``, ``horizon`` and ``step``."""

    n: int
    #: maximum number of steps, ``None`` for unbounded
    horizon: Optional[int] = None
    #: whether the chain must end with the filtering measurement
    needs_filter: bool = False
    #: whether ``step`` depends on the history at all
    history_dependent: bool = True

    def step(self, hist: History) -> Step:
        raise NotImplementedError

    def next_resource(self, hist: History) -> Step:
        if hist.n != self.n:
            raise ResourceSizeMismatch(f"history size {hist.n} != strategy size {self.n}")
        if self.horizon is not None and len(hist) >= self.horizon:
            raise ProtocolError(
                f"{type(self).__name__} has horizon {self.horizon}; "
                f"history already holds {len(hist)} steps")
        return self.step(hist)


@dataclass(frozen=True)
class Identical(Strategy):
    """Same resource in every step; distortion is removed by a final filter."""

    resource: ResourceSpec
    needs_filter: bool = field(default=True, init=False)
    history_dependent: bool = field(default=False, init=False)

    @property
    def n(self):
        return self.resource.n

    def step(self, hist):
        return Step(self.resource)


@dataclass(frozen=True)
class FixedSequence(Strategy):
    """A fixed, history-independent list of per-step resources."""

    resources: tuple
    needs_filter: bool = True
    history_dependent: bool = field(default=False, init=False)

    def __post_init__(self):
        if not self.resources:
            raise DomainError("empty resource sequence")
        sizes = {r.n for r in self.resources}
        if len(sizes) != 1:
            raise ResourceSizeMismatch(f"mixed resource sizes {sorted(sizes)}")
        object.__setattr__(self, "resources", tuple(self.resources))

    @property
    def n(self):
        return self.resources[0].n

    @property
    def horizon(self):
        return len(self.resources)

    def step(self, hist):
        return Step(self.resources[len(hist)])


@dataclass(frozen=True)
class AdaptiveDouble(Strategy):
    """Two-step adaptive scheme.

    Step one uses the peaked resource with ratio ``q1``.  Step two uses the
    geometric resource with ratio ``1/q1`` when the first count is at most
    ``n/2`` and ``q1`` otherwise, which makes every success path faithful.
    """

    n: int
    q1: float
    horizon: int = field(default=2, init=False)

    def __post_init__(self):
        # validates n and q1 eagerly
        geometric_peak_resource(self.n, self.q1)

    def step(self, hist):
        if len(hist) == 0:
            return Step(geometric_peak_resource(self.n, self.q1))
        if hist.outcomes[0] <= self.n // 2:
            return Step(geometric_monotone_resource(self.n, 1.0 / self.q1))
        return Step(geometric_monotone_resource(self.n, self.q1))


@dataclass(frozen=True)
class NotGateDouble(Strategy):
    """Two-step scheme that always uses the decreasing second resource and
    flips the qubit around step two when the first count exceeds ``n/2``."""

    n: int
    q1: float
    horizon: int = field(default=2, init=False)

    def __post_init__(self):
        geometric_peak_resource(self.n, self.q1)

    def step(self, hist):
        if len(hist) == 0:
            return Step(geometric_peak_resource(self.n, self.q1))
        flip = hist.outcomes[0] > self.n // 2
        return Step(geometric_monotone_resource(self.n, 1.0 / self.q1), flip, flip)


@dataclass(frozen=True)
class LastStepAdaptive(Strategy):
    """``base`` for steps ``1..M-1``; the last step uses a geometric resource
    matched to the accumulated rail ratio, followed by filtering."""

    base: ResourceSpec
    M: int
    needs_filter: bool = field(default=True, init=False)

    def __post_init__(self):
        if self.M < 1:
            raise DomainError(f"chain length must be >= 1, got {self.M}")

    @property
    def n(self):
        return self.base.n

    @property
    def horizon(self):
        return self.M

    def step(self, hist):
        if len(hist) < self.M - 1:
            return Step(self.base)
        w = chain_weights(hist, [self.base] * len(hist))
        if w.a1 == 0.0 or w.a0 == 0.0:
            # dead branch: the filter cannot succeed whatever is used
            return Step(self.base)
        if math.isclose(w.a1, w.a0, rel_tol=1e-12):
            return Step(uniform_resource(self.n))
        # |b(k-1)|^2 = r |b(k)|^2 with r = a1^2/a0^2
        return Step(geometric_monotone_resource(self.n, 1.0 / w.ratio))


@dataclass(frozen=True)
class Composite(Strategy):
    """Strategies with finite horizons run back to back.

    Each part sees only the outcomes of its own steps.
    """

    parts: tuple

    def __post_init__(self):
        if not self.parts:
            raise DomainError("empty composite")
        if any(p.horizon is None for p in self.parts):
            raise ProtocolError("composite parts need finite horizons")
        if len({p.n for p in self.parts}) != 1:
            raise ResourceSizeMismatch("composite parts use different resource sizes")
        object.__setattr__(self, "parts", tuple(self.parts))

    @property
    def n(self):
        return self.parts[0].n

    @property
    def horizon(self):
        return sum(p.horizon for p in self.parts)

    @property
    def needs_filter(self):
        return any(p.needs_filter for p in self.parts)

    def step(self, hist):
        start = 0
        for part in self.parts:
            if len(hist) < start + part.horizon:
                return part.next_resource(History(hist.outcomes[start:], self.n))
            start += part.horizon
        raise ProtocolError("history exceeds composite horizon")


def next_resource(kind: Strategy, hist: History) -> Step:
    """Functional spelling of :meth:`Strategy.next_resource`."""
    return kind.next_resource(hist)
