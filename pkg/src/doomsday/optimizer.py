"""Arg-max search for the doomsday scenario."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from doomsday.attack import AttackMode, AttackOutcome, CouplingMap, RuleSet, attack_all, couple
from doomsday.exceptions import EmptyBinError
from doomsday.graph import MultiGraph, spanning_tree_count
from doomsday.scenarios import Scenario, dedupe


@dataclass(frozen=True)
class RankedEntry:
    scenario: Scenario
    outcome: AttackOutcome

    @property
    def component_count(self) -> int:
        return self.outcome.component_count


@dataclass(frozen=True)
class DoomsdayReport:
    ranked: tuple[RankedEntry, ...]
    ties: tuple[Scenario, ...]
    tau_doomsday: int
    tau_seed: int | None
    search_mode: str
    total_evaluated: int
    rule_set: str = ""
    attack_mode: str = "SINGLE"

    @property
    def doomsday(self) -> RankedEntry:
        return self.ranked[0]


def _rank(outcome: AttackOutcome):
    # larger disconnection first, then the lexicographically smallest attack set
    return (-outcome.component_count, outcome.attacked)


def best_outcome(outcomes: Sequence[AttackOutcome]) -> AttackOutcome:
    return min(outcomes, key=_rank)


def _evaluate_one(g: MultiGraph, coupling: CouplingMap, scenario: Scenario, rs: RuleSet, mode: AttackMode):
    return best_outcome(attack_all(couple(g, scenario, coupling), rs, mode))


def evaluate_scenarios(
    g: MultiGraph,
    coupling: CouplingMap,
    scenarios: Iterable[Scenario],
    rs: RuleSet,
    mode: AttackMode | str = "SINGLE",
    n_jobs: int | None = 1,
) -> list[RankedEntry]:
    """Best attack outcome per scenario, in scenario key order."""
    mode = AttackMode.parse(mode)
    pool = dedupe(scenarios)
    if n_jobs in (None, 1) or len(pool) < 2:
        best = [_evaluate_one(g, coupling, s, rs, mode) for s in pool]
    else:
        from joblib import Parallel, delayed

        best = Parallel(n_jobs=n_jobs)(delayed(_evaluate_one)(g, coupling, s, rs, mode) for s in pool)
    return [RankedEntry(s, o) for s, o in zip(pool, best)]


def risk_complexity(graph: Scenario | MultiGraph) -> int:
    """Spanning-tree count of a scenario or graph."""
    if isinstance(graph, Scenario):
        graph = graph.graph
    return spanning_tree_count(graph)


def doomsday(
    g: MultiGraph,
    coupling: CouplingMap,
    scenarios: Iterable[Scenario],
    rs: RuleSet,
    mode: AttackMode | str = "SINGLE",
    seed: Scenario | None = None,
    search_mode: str = "EXHAUSTIVE",
    n_jobs: int | None = 1,
) -> DoomsdayReport:
    """Rank scenarios by post-attack component count of G.

    Ties are broken by scenario key and every tied scenario is reported.
    Raises :class:`EmptyBinError` when ``scenarios`` is empty.
    """
    entries = evaluate_scenarios(g, coupling, scenarios, rs, mode, n_jobs=n_jobs)
    if not entries:
        raise EmptyBinError("no scenario within tolerance; increase epsilon")
    ranked = tuple(sorted(entries, key=lambda e: (-e.component_count, e.scenario.key)))
    top = ranked[0].component_count
    ties = tuple(e.scenario for e in ranked if e.component_count == top)
    return DoomsdayReport(
        ranked=ranked,
        ties=ties,
        tau_doomsday=risk_complexity(ranked[0].outcome.post_scenario),
        tau_seed=None if seed is None else risk_complexity(seed),
        search_mode=search_mode,
        total_evaluated=len(entries),
        rule_set=rs.name,
        attack_mode=str(AttackMode.parse(mode)),
    )
