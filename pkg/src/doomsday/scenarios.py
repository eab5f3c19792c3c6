"""Hypothesis space of driver networks.

The driver universe is the vertex set ``0 .. N-1``. A scenario is a labelled
subgraph of the complete graph on that universe which contains every marked
(link) vertex. Scenarios are simple graphs.
"""

from __future__ import annotations

import enum
import itertools
import math
import random
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Iterator, Sequence

from doomsday.exceptions import ScenarioSpaceError
from doomsday.graph import DegreeDistribution, MultiGraph, degree_distribution
from doomsday.metrics import MetricChoice, distance

DEFAULT_EXHAUSTIVE_CAP = 10**6

Edge = tuple[int, int]


@dataclass(frozen=True)
class SeedSpec:
    """The user's seed driver network S0 over ``n_total`` vertices."""

    n_total: int
    marked: tuple[int, ...]
    seed_edges: tuple[Edge, ...] = ()

    def __post_init__(self):
        n = int(self.n_total)
        object.__setattr__(self, "n_total", n)
        marked = tuple(int(a) for a in self.marked)
        if n < 1:
            raise ScenarioSpaceError(f"n_total must be >= 1, got {n}")
        if not marked:
            raise ScenarioSpaceError("at least one marked link node is required")
        if len(set(marked)) != len(marked):
            raise ScenarioSpaceError(f"marked nodes repeat: {list(marked)}")
        bad = [a for a in marked if not 0 <= a < n]
        if bad:
            raise ScenarioSpaceError(f"marked nodes {bad} outside the universe 0..{n - 1}")
        edges = []
        for e in self.seed_edges:
            u, v = sorted((int(e[0]), int(e[1])))
            if u == v:
                raise ScenarioSpaceError(f"seed edge ({u}, {v}) is a self-loop")
            if not (0 <= u < n and 0 <= v < n):
                raise ScenarioSpaceError(f"seed edge ({u}, {v}) outside the universe 0..{n - 1}")
            edges.append((u, v))
        if len(set(edges)) != len(edges):
            raise ScenarioSpaceError("seed edges must be simple (no parallel edges)")
        object.__setattr__(self, "marked", tuple(sorted(marked)))
        object.__setattr__(self, "seed_edges", tuple(sorted(edges)))

    @property
    def universe(self) -> tuple[int, ...]:
        return tuple(range(self.n_total))

    @property
    def n_marked(self) -> int:
        return len(self.marked)

    @property
    def optional(self) -> tuple[int, ...]:
        m = set(self.marked)
        return tuple(v for v in range(self.n_total) if v not in m)

    def seed_scenario(self) -> Scenario:
        return Scenario(self.universe, self.seed_edges)


@dataclass(frozen=True, order=False)
class Scenario:
    """One hypothetical driver network.

    ``included`` and ``edges`` are stored sorted; ``key`` orders scenarios
    totally and ``key_str`` is its printable form (``"0,1,2|0-1,1-2"``).
    """

    included: tuple[int, ...]
    edges: tuple[Edge, ...]

    def __post_init__(self):
        inc = tuple(sorted(set(int(v) for v in self.included)))
        es = tuple(sorted({tuple(sorted((int(u), int(v)))) for u, v in self.edges}))
        s = set(inc)
        for u, v in es:
            if u == v or u not in s or v not in s:
                raise ScenarioSpaceError(f"scenario edge ({u}, {v}) invalid for vertices {list(inc)}")
        object.__setattr__(self, "included", inc)
        object.__setattr__(self, "edges", es)

    @property
    def key(self) -> tuple[tuple[int, ...], tuple[Edge, ...]]:
        return (self.included, self.edges)

    @property
    def key_str(self) -> str:
        verts = ",".join(map(str, self.included))
        edges = ",".join(f"{u}-{v}" for u, v in self.edges)
        return f"{verts}|{edges}"

    @classmethod
    def from_key(cls, text: str) -> Scenario:
        try:
            verts, _, edges = text.strip().partition("|")
            inc = [int(x) for x in verts.split(",") if x]
            es = [tuple(int(y) for y in x.split("-")) for x in edges.split(",") if x]
        except ValueError:
            raise ScenarioSpaceError(f"malformed scenario key {text!r}") from None
        if any(len(e) != 2 for e in es):
            raise ScenarioSpaceError(f"malformed scenario key {text!r}")
        return cls(tuple(inc), tuple(es))

    def __lt__(self, other: Scenario) -> bool:
        return self.key < other.key

    @cached_property
    def graph(self) -> MultiGraph:
        return MultiGraph(self.included, self.edges)

    def neighbors(self, v: int) -> list[int]:
        return self.graph.neighbors(v)

    def degree_distribution(self) -> DegreeDistribution:
        # internal degrees only; coupling links to G never count here
        return degree_distribution(self.graph)


class ScenarioMode(str, enum.Enum):
    EXHAUSTIVE = "EXHAUSTIVE"
    SAMPLE = "SAMPLE"


def parse_epsilon(value) -> Fraction:
    """Parse a tolerance into an exact rational. Decimal strings stay exact."""
    if isinstance(value, Fraction):
        eps = value
    elif isinstance(value, float):
        eps = Fraction(repr(value))
    else:
        try:
            eps = Fraction(str(value).strip())
        except (ValueError, ZeroDivisionError):
            raise ScenarioSpaceError(f"epsilon {value!r} is not a rational number") from None
    if eps <= 0:
        raise ScenarioSpaceError(f"epsilon must be > 0, got {value!r}")
    return eps


@dataclass(frozen=True)
class BinningConfig:
    epsilon: Fraction
    metric: MetricChoice = MetricChoice()
    mode: ScenarioMode = ScenarioMode.EXHAUSTIVE
    sample_count: int = 1000
    rng_seed: int = 0
    exhaustive_cap: int = DEFAULT_EXHAUSTIVE_CAP

    def __post_init__(self):
        object.__setattr__(self, "epsilon", parse_epsilon(self.epsilon))
        object.__setattr__(self, "mode", ScenarioMode(self.mode))
        if self.sample_count < 1:
            raise ScenarioSpaceError(f"sample count must be >= 1, got {self.sample_count}")
        if self.exhaustive_cap < 1:
            raise ScenarioSpaceError(f"exhaustive cap must be >= 1, got {self.exhaustive_cap}")

    @property
    def descriptor(self) -> str:
        if self.mode is ScenarioMode.EXHAUSTIVE:
            return "EXHAUSTIVE"
        return f"SAMPLE(count={self.sample_count}, rng_seed={self.rng_seed})"


def _check_sizes(n_total: int, n_marked: int) -> None:
    if not 1 <= n_marked <= n_total:
        raise ScenarioSpaceError(f"need 1 <= n <= N, got N={n_total}, n={n_marked}")


def scenario_count(n_total: int, n_marked: int) -> int:
    """Exact size of the scenario space: sum_k C(N-n, k) * 2^C(n+k, 2)."""
    _check_sizes(n_total, n_marked)
    free = n_total - n_marked
    return sum(math.comb(free, k) * 2 ** math.comb(n_marked + k, 2) for k in range(free + 1))


def _edge_subsets(pairs: Sequence[Edge], start: int = 0) -> Iterator[tuple[Edge, ...]]:
    # lexicographic order of sorted tuples: a prefix precedes its extensions
    yield ()
    for i in range(start, len(pairs)):
        for rest in _edge_subsets(pairs, i + 1):
            yield (pairs[i],) + rest


def enumerate_scenarios(spec: SeedSpec, cap: int = DEFAULT_EXHAUSTIVE_CAP) -> Iterator[Scenario]:
    """Yield every scenario once, ascending by ``key``.

    Raises :class:`ScenarioSpaceError` before yielding anything when the space
    is larger than ``cap``.
    """
    total = scenario_count(spec.n_total, spec.n_marked)
    if total > cap:
        raise ScenarioSpaceError(
            f"scenario space has {total} members, above the exhaustive cap {cap}; use SAMPLE mode"
        )
    return _enumerate(spec)


def _enumerate(spec: SeedSpec) -> Iterator[Scenario]:
    optional = spec.optional
    vertex_sets = []
    for k in range(len(optional) + 1):
        for extra in itertools.combinations(optional, k):
            vertex_sets.append(tuple(sorted(spec.marked + extra)))
    vertex_sets.sort()
    for inc in vertex_sets:
        pairs = list(itertools.combinations(inc, 2))
        for edges in _edge_subsets(pairs):
            yield Scenario(inc, edges)


def iter_scenario_draws(spec: SeedSpec, rng: random.Random) -> Iterator[Scenario]:
    """Infinite stream of i.i.d. draws, exactly uniform over the space.

    A draw first picks the number ``k`` of optional vertices with weight
    C(N-n, k) * 2^C(n+k, 2) (exact integers), then a uniform k-subset, then
    each edge of the complete graph on the included vertices with prob 1/2.
    """
    n, free = spec.n_marked, spec.n_total - spec.n_marked
    weights = [math.comb(free, k) * 2 ** math.comb(n + k, 2) for k in range(free + 1)]
    cumulative = list(itertools.accumulate(weights))
    total = cumulative[-1]
    optional = list(spec.optional)
    while True:
        r = rng.randrange(total)
        k = next(i for i, c in enumerate(cumulative) if r < c)
        extra = rng.sample(optional, k)
        inc = tuple(sorted(spec.marked + tuple(extra)))
        pairs = list(itertools.combinations(inc, 2))
        bits = rng.getrandbits(len(pairs)) if pairs else 0
        edges = tuple(p for i, p in enumerate(pairs) if bits >> i & 1)
        yield Scenario(inc, edges)


def sample_scenarios(spec: SeedSpec, count: int, rng_seed: int = 0) -> list[Scenario]:
    """``count`` uniform draws, de-duplicated and returned in key order."""
    if count < 1:
        raise ScenarioSpaceError(f"sample count must be >= 1, got {count}")
    draws = itertools.islice(iter_scenario_draws(spec, random.Random(rng_seed)), count)
    return sorted({s.key: s for s in draws}.values(), key=lambda s: s.key)


def dedupe(scenarios: Iterable[Scenario]) -> list[Scenario]:
    return sorted({s.key: s for s in scenarios}.values(), key=lambda s: s.key)


def scenario_distance(s: Scenario, reference: DegreeDistribution, metric: MetricChoice) -> float:
    return distance(s.degree_distribution(), reference, metric)


def bin_scenarios(
    scenarios: Iterable[Scenario],
    spec: SeedSpec,
    config: BinningConfig,
    n_jobs: int | None = 1,
) -> list[Scenario]:
    """Keep scenarios whose degree distribution lies strictly within
    ``config.epsilon`` of the seed's, in key order."""
    reference = spec.seed_scenario().degree_distribution()
    pool = dedupe(scenarios)
    dists = _map(scenario_distance, pool, reference, config.metric, n_jobs=n_jobs)
    eps = config.epsilon
    return [s for s, d in zip(pool, dists) if Fraction(d) < eps]


def _map(func, items: list, *args, n_jobs: int | None = 1) -> list:
    # joblib keeps input order, so merged results are schedule-independent
    if n_jobs in (None, 1) or len(items) < 2:
        return [func(x, *args) for x in items]
    from joblib import Parallel, delayed

    return Parallel(n_jobs=n_jobs)(delayed(func)(x, *args) for x in items)


def generate_er_seed(
    n_total: int,
    p: float,
    rng_seed: int = 0,
    marked: Sequence[int] | None = None,
) -> SeedSpec:
    """Erdos-Renyi G(N, p) seed; every vertex marked unless ``marked`` is given."""
    if not 0 <= p <= 1:
        raise ScenarioSpaceError(f"edge probability must be in [0, 1], got {p}")
    rng = random.Random(rng_seed)
    edges = [e for e in itertools.combinations(range(n_total), 2) if rng.random() < p]
    return SeedSpec(n_total, tuple(range(n_total)) if marked is None else tuple(marked), tuple(edges))
