"""Distances between discrete degree distributions."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Mapping, Sequence, Union

from doomsday.exceptions import MetricError
from doomsday.graph import DegreeDistribution

DistLike = Union[DegreeDistribution, Mapping[int, float]]

DEFAULT_SMOOTHING = 1e-9


class MetricKind(str, enum.Enum):
    HELLINGER = "HELLINGER"
    BHATTACHARYYA_DISTANCE = "BHATTACHARYYA_DISTANCE"
    KL_DIVERGENCE = "KL_DIVERGENCE"


@dataclass(frozen=True)
class MetricChoice:
    kind: MetricKind = MetricKind.HELLINGER
    smoothing: float = DEFAULT_SMOOTHING

    def __post_init__(self):
        try:
            object.__setattr__(self, "kind", MetricKind(self.kind))
        except ValueError:
            raise MetricError(f"unknown metric {self.kind!r}") from None
        if not self.smoothing >= 0 or math.isinf(self.smoothing):
            raise MetricError(f"smoothing must be a finite number >= 0, got {self.smoothing}")


def _as_dict(p: DistLike) -> dict[int, float]:
    if isinstance(p, DegreeDistribution):
        return p.as_dict()
    return {int(k): float(v) for k, v in p.items()}


def align(p: DistLike, q: DistLike) -> tuple[list[float], list[float]]:
    """Mass vectors of ``p`` and ``q`` over the sorted union of supports."""
    pd, qd = _as_dict(p), _as_dict(q)
    if not pd or not qd:
        raise MetricError("cannot align an empty distribution")
    support = sorted(set(pd) | set(qd))
    return [pd.get(k, 0.0) for k in support], [qd.get(k, 0.0) for k in support]


def _vectors(p, q) -> tuple[Sequence[float], Sequence[float]]:
    if isinstance(p, (DegreeDistribution, Mapping)) or isinstance(q, (DegreeDistribution, Mapping)):
        return align(p, q)
    p, q = list(p), list(q)
    if len(p) != len(q):
        raise MetricError(f"aligned vectors differ in length: {len(p)} != {len(q)}")
    return p, q


def bhattacharyya_coefficient(p, q) -> float:
    """Sum of sqrt(p_k * q_k); accepts distributions or pre-aligned vectors."""
    pv, qv = _vectors(p, q)
    bc = math.fsum(math.sqrt(a * b) for a, b in zip(pv, qv))
    return min(1.0, max(0.0, bc))


def hellinger(p, q) -> float:
    """Hellinger distance, sqrt(1 - BC), in [0, 1]."""
    pv, qv = _vectors(p, q)
    # the squared-difference form equals 1 - BC for normalised inputs and does
    # not lose precision near zero the way sqrt(1 - BC) does
    s = math.fsum((math.sqrt(a) - math.sqrt(b)) ** 2 for a, b in zip(pv, qv))
    return min(1.0, math.sqrt(0.5 * s))


def kl_divergence(p, q, smoothing: float = DEFAULT_SMOOTHING) -> float:
    """KL(p || q) in nats after additive smoothing and renormalisation.

    With ``smoothing == 0`` a zero of ``q`` under positive ``p`` mass raises
    :class:`MetricError` instead of returning infinity.
    """
    if smoothing < 0:
        raise MetricError(f"smoothing must be >= 0, got {smoothing}")
    pv, qv = _vectors(p, q)
    if smoothing > 0:
        zp = math.fsum(pv) + smoothing * len(pv)
        zq = math.fsum(qv) + smoothing * len(qv)
        pv = [(a + smoothing) / zp for a in pv]
        qv = [(b + smoothing) / zq for b in qv]
    terms = []
    for a, b in zip(pv, qv):
        if a == 0:
            continue
        if b == 0:
            raise MetricError("KL divergence is infinite: q has zero mass where p does not; use smoothing > 0")
        terms.append(a * math.log(a / b))
    return max(0.0, math.fsum(terms))


def bhattacharyya_distance(p, q) -> float:
    """1 - BC. Bounded premetric, zero at identity; not a true metric."""
    return 1.0 - bhattacharyya_coefficient(p, q)


def distance(p, q, metric: MetricChoice | MetricKind | str = MetricKind.HELLINGER) -> float:
    if not isinstance(metric, MetricChoice):
        metric = MetricChoice(metric)
    if metric.kind is MetricKind.HELLINGER:
        return hellinger(p, q)
    if metric.kind is MetricKind.BHATTACHARYYA_DISTANCE:
        return bhattacharyya_distance(p, q)
    return kl_divergence(p, q, metric.smoothing)
