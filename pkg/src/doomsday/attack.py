"""Coupling a scenario to G and propagating attacks through rule sets.

A rule pairs a trigger, evaluated per scenario node, with an action that
updates G (deletion or contraction around the node's image) or spreads
failure inside the scenario. Execution is round based:

* every round visits the rules in document order and, for each rule, the
  scenario nodes in ascending id, checking the trigger against the current
  state;
* a (rule, node) pair fires at most once per attack;
* the run stops after the first round in which nothing fires (a fixed
  point) or after ``max_rounds`` rounds.

Trigger semantics (``a`` is the scenario node being checked):

``NODE_ATTACKED``
    ``a`` has failed, either attacked directly or failed by a cascade.
``SCENARIO_NEIGHBOR_FAILED_FRACTION`` (threshold theta in [0, 1])
    ``a`` is alive, has at least one failed scenario neighbour, and the
    failed fraction of its scenario neighbours is >= theta.
``IMAGE_LEFT_GIANT_COMPONENT``
    the image of ``a`` is still a vertex of G but lies outside the largest
    component (most vertices; ties go to the smallest vertex id).
``SCENARIO_DEGREE`` (threshold d >= 0)
    ``a`` has failed and its scenario degree is >= d.

Scenario neighbourhoods always refer to the scenario as given, before any
failure removed nodes from it.
"""

from __future__ import annotations

import enum
import itertools
import json
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

from doomsday.exceptions import AttackError, CouplingError, RuleSetError
from doomsday.graph import MultiGraph, connected_components, largest_component
from doomsday.scenarios import Scenario


class Trigger(str, enum.Enum):
    NODE_ATTACKED = "NODE_ATTACKED"
    SCENARIO_NEIGHBOR_FAILED_FRACTION = "SCENARIO_NEIGHBOR_FAILED_FRACTION"
    IMAGE_LEFT_GIANT_COMPONENT = "IMAGE_LEFT_GIANT_COMPONENT"
    SCENARIO_DEGREE = "SCENARIO_DEGREE"


class Action(str, enum.Enum):
    DELETE_IMAGE_VERTEX = "DELETE_IMAGE_VERTEX"
    DELETE_IMAGE_EDGES = "DELETE_IMAGE_EDGES"
    CONTRACT_IMAGE_EDGE = "CONTRACT_IMAGE_EDGE"
    FAIL_SCENARIO_NEIGHBORS = "FAIL_SCENARIO_NEIGHBORS"


_THRESHOLDED = {Trigger.SCENARIO_NEIGHBOR_FAILED_FRACTION, Trigger.SCENARIO_DEGREE}


@dataclass(frozen=True)
class Rule:
    trigger: Trigger
    action: Action
    threshold: Fraction | int | None = None

    def __post_init__(self):
        object.__setattr__(self, "trigger", Trigger(self.trigger))
        object.__setattr__(self, "action", Action(self.action))
        t = self.threshold
        if self.trigger is Trigger.SCENARIO_NEIGHBOR_FAILED_FRACTION:
            if t is None:
                raise RuleSetError(f"{self.trigger.value} needs a threshold")
            t = Fraction(repr(t)) if isinstance(t, float) else Fraction(t)
            if not 0 <= t <= 1:
                raise RuleSetError(f"fraction threshold must be in [0, 1], got {t}")
        elif self.trigger is Trigger.SCENARIO_DEGREE:
            if t is None or isinstance(t, bool) or int(t) != t or t < 0:
                raise RuleSetError(f"degree threshold must be a non-negative integer, got {t!r}")
            t = int(t)
        elif t is not None:
            raise RuleSetError(f"{self.trigger.value} takes no threshold")
        object.__setattr__(self, "threshold", t)

    def to_document(self) -> dict[str, Any]:
        trig: dict[str, Any] = {"kind": self.trigger.value}
        if isinstance(self.threshold, Fraction):
            trig["threshold"] = str(self.threshold)
        elif self.threshold is not None:
            trig["threshold"] = self.threshold
        return {"trigger": trig, "action": self.action.value}


@dataclass(frozen=True)
class RuleSet:
    name: str
    rules: tuple[Rule, ...]
    max_rounds: int = 1000

    def __post_init__(self):
        object.__setattr__(self, "rules", tuple(self.rules))
        if not self.rules:
            raise RuleSetError(f"rule set {self.name!r} has no rules")
        if isinstance(self.max_rounds, bool) or not isinstance(self.max_rounds, int) or self.max_rounds < 1:
            raise RuleSetError(f"max_rounds must be an integer >= 1, got {self.max_rounds!r}")

    def with_max_rounds(self, max_rounds: int) -> RuleSet:
        return RuleSet(self.name, self.rules, max_rounds)

    def to_document(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "max_rounds": self.max_rounds,
            "rules": [r.to_document() for r in self.rules],
        }


BUILTIN_RULE_SETS: dict[str, RuleSet] = {
    "DIRECT_DELETE": RuleSet(
        "DIRECT_DELETE",
        (Rule(Trigger.NODE_ATTACKED, Action.DELETE_IMAGE_VERTEX),),
    ),
    "NEIGHBOR_DELETE": RuleSet(
        "NEIGHBOR_DELETE",
        (
            Rule(Trigger.NODE_ATTACKED, Action.DELETE_IMAGE_VERTEX),
            Rule(Trigger.SCENARIO_NEIGHBOR_FAILED_FRACTION, Action.DELETE_IMAGE_VERTEX, Fraction(0)),
        ),
    ),
    "CONTRACT_LOCAL": RuleSet(
        "CONTRACT_LOCAL",
        (Rule(Trigger.NODE_ATTACKED, Action.CONTRACT_IMAGE_EDGE),),
    ),
    "CASCADE": RuleSet(
        "CASCADE",
        (
            Rule(Trigger.NODE_ATTACKED, Action.DELETE_IMAGE_VERTEX),
            Rule(Trigger.IMAGE_LEFT_GIANT_COMPONENT, Action.FAIL_SCENARIO_NEIGHBORS),
        ),
    ),
}

_RULESET_FIELDS = {"name", "max_rounds", "rules", "version"}
_RULE_FIELDS = {"trigger", "action"}
_TRIGGER_FIELDS = {"kind", "threshold"}


def parse_rule_set(doc: Mapping[str, Any]) -> RuleSet:
    """Validate a rule-set document (already decoded from JSON)."""
    if not isinstance(doc, Mapping):
        raise RuleSetError("rule set document must be an object")
    extra = set(doc) - _RULESET_FIELDS
    if extra:
        raise RuleSetError(f"unknown field(s) {sorted(extra)} at top level")
    for key in ("name", "max_rounds", "rules"):
        if key not in doc:
            raise RuleSetError(f"missing field {key!r} at top level")
    if "version" in doc and doc["version"] != "1":
        raise RuleSetError(f"unsupported rule set version {doc['version']!r}")
    if not isinstance(doc["name"], str) or not doc["name"]:
        raise RuleSetError("field 'name' must be a non-empty string")
    if not isinstance(doc["rules"], list):
        raise RuleSetError("field 'rules' must be a list")
    rules = []
    for i, item in enumerate(doc["rules"]):
        where = f"rules[{i}]"
        if not isinstance(item, Mapping):
            raise RuleSetError(f"{where}: rule must be an object")
        extra = set(item) - _RULE_FIELDS
        if extra:
            raise RuleSetError(f"{where}: unknown field(s) {sorted(extra)}")
        trig = item.get("trigger")
        if not isinstance(trig, Mapping) or "kind" not in trig:
            raise RuleSetError(f"{where}.trigger: must be an object with a 'kind'")
        extra = set(trig) - _TRIGGER_FIELDS
        if extra:
            raise RuleSetError(f"{where}.trigger: unknown field(s) {sorted(extra)}")
        try:
            kind = Trigger(trig["kind"])
        except ValueError:
            raise RuleSetError(f"{where}.trigger.kind: unknown trigger {trig['kind']!r}") from None
        try:
            action = Action(item.get("action"))
        except ValueError:
            raise RuleSetError(f"{where}.action: unknown action {item.get('action')!r}") from None
        threshold = trig.get("threshold")
        if isinstance(threshold, str):
            try:
                threshold = Fraction(threshold)
            except ValueError:
                raise RuleSetError(f"{where}.trigger.threshold: not a number {threshold!r}") from None
        elif threshold is not None and (isinstance(threshold, bool) or not isinstance(threshold, (int, float))):
            raise RuleSetError(f"{where}.trigger.threshold: not a number {threshold!r}")
        try:
            rules.append(Rule(kind, action, threshold))
        except RuleSetError as exc:
            raise RuleSetError(f"{where}: {exc}") from None
    return RuleSet(doc["name"], tuple(rules), doc["max_rounds"])


def load_rule_set(source: str | Path | Mapping[str, Any] | RuleSet) -> RuleSet:
    """Resolve a built-in name, a path to a JSON document, or a decoded document."""
    if isinstance(source, RuleSet):
        return source
    if isinstance(source, Mapping):
        return parse_rule_set(source)
    if isinstance(source, str) and source in BUILTIN_RULE_SETS:
        return BUILTIN_RULE_SETS[source]
    path = Path(source)
    if not path.is_file():
        raise RuleSetError(
            f"{source!r} is neither a built-in rule set ({', '.join(BUILTIN_RULE_SETS)}) nor a file"
        )
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise RuleSetError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    try:
        return parse_rule_set(doc)
    except RuleSetError as exc:
        raise RuleSetError(f"{path}: {exc}") from None


@dataclass(frozen=True)
class CouplingMap:
    """Injective map from driver-universe vertices to vertices of G."""

    mapping: Mapping[int, int]

    def __post_init__(self):
        m = {int(a): int(b) for a, b in dict(self.mapping).items()}
        seen: dict[int, int] = {}
        for a, b in sorted(m.items()):
            if b in seen:
                raise CouplingError(f"coupling is not injective: {seen[b]} and {a} both map to {b}")
            seen[b] = a
        object.__setattr__(self, "mapping", dict(sorted(m.items())))

    def __getitem__(self, a: int) -> int:
        return self.mapping[a]

    def __contains__(self, a: object) -> bool:
        return a in self.mapping

    def validate(self, g: MultiGraph, universe: Iterable[int] | None = None) -> None:
        missing = [b for b in self.mapping.values() if b not in g]
        if missing:
            raise CouplingError(f"coupling images {missing} are not vertices of G")
        if universe is not None:
            uncovered = [a for a in universe if a not in self.mapping]
            if uncovered:
                raise CouplingError(f"driver vertices {uncovered} have no image in G")

    def pairs(self) -> list[tuple[int, int]]:
        return list(self.mapping.items())


@dataclass(frozen=True)
class CoupledSystem:
    """Read-only join of G and one scenario through the coupling."""

    g: MultiGraph
    scenario: Scenario
    coupling: CouplingMap

    @property
    def links(self) -> list[tuple[int, int]]:
        return [(a, self.coupling[a]) for a in self.scenario.included]


def couple(g: MultiGraph, scenario: Scenario, coupling: CouplingMap | Mapping[int, int]) -> CoupledSystem:
    if not isinstance(coupling, CouplingMap):
        coupling = CouplingMap(coupling)
    coupling.validate(g)
    missing = [a for a in scenario.included if a not in coupling]
    if missing:
        raise CouplingError(f"scenario vertices {missing} have no image in G")
    return CoupledSystem(g, scenario, coupling)


@dataclass(frozen=True)
class ChangeRecord:
    """One applied effect. ``op`` is ``delete_vertex``, ``delete_edges``,
    ``contract`` (args ``(u, v)``) or ``fail`` (scenario-only, args ``(b,)``)."""

    round: int
    rule: int
    action: Action
    target: int
    op: str
    args: tuple[int, ...]

    def to_document(self) -> dict[str, Any]:
        return {
            "round": self.round,
            "rule": self.rule,
            "action": self.action.value,
            "target": self.target,
            "op": self.op,
            "args": list(self.args),
        }


@dataclass(frozen=True)
class AttackOutcome:
    scenario: Scenario
    attacked: tuple[int, ...]
    post_g: MultiGraph
    component_count: int
    change_log: tuple[ChangeRecord, ...]
    rounds_used: int
    fixed_point: bool
    failed: tuple[int, ...]
    post_scenario: MultiGraph = field(compare=False)

    @property
    def scenario_key(self):
        return self.scenario.key


def replay(g: MultiGraph, change_log: Iterable[ChangeRecord]) -> MultiGraph:
    """Re-apply the G-side effects of a change log to ``g``."""
    for rec in change_log:
        if rec.op == "delete_vertex":
            g = g.delete_vertex(rec.args[0])
        elif rec.op == "delete_edges":
            g = g.delete_incident_edges(rec.args[0])
        elif rec.op == "contract":
            g = g.contract_edge((rec.args[0], rec.args[1]))
        elif rec.op != "fail":
            raise AttackError(f"unknown change-log op {rec.op!r}")
    return g


class _Run:
    """Mutable state of one attack; never shared between attacks."""

    def __init__(self, system: CoupledSystem, attacked: Sequence[int]):
        self.system = system
        self.sg = system.scenario.graph
        self.g = system.g
        self.failed = set(attacked)
        self.alias: dict[int, int] = {}
        self.log: list[ChangeRecord] = []
        self._giant: frozenset[int] | None = None

    def image(self, a: int) -> int:
        b = self.system.coupling[a]
        while b in self.alias:
            b = self.alias[b]
        return b

    def giant(self) -> frozenset[int]:
        if self._giant is None:
            self._giant = largest_component(self.g)
        return self._giant

    def set_g(self, g: MultiGraph) -> None:
        self.g = g
        self._giant = None

    def triggered(self, rule: Rule, a: int) -> bool:
        t = rule.trigger
        if t is Trigger.NODE_ATTACKED:
            return a in self.failed
        if t is Trigger.SCENARIO_DEGREE:
            return a in self.failed and self.sg.degree(a) >= rule.threshold
        if t is Trigger.SCENARIO_NEIGHBOR_FAILED_FRACTION:
            if a in self.failed:
                return False
            nbrs = self.sg.neighbors(a)
            hit = sum(1 for b in nbrs if b in self.failed)
            return hit > 0 and Fraction(hit, len(nbrs)) >= rule.threshold
        b = self.image(a)
        return b in self.g and b not in self.giant()

    def apply(self, rnd: int, ri: int, rule: Rule, a: int) -> None:
        act = rule.action

        def record(op: str, *args: int) -> None:
            self.log.append(ChangeRecord(rnd, ri, act, a, op, args))

        if act is Action.FAIL_SCENARIO_NEIGHBORS:
            for b in self.sg.neighbors(a):
                if b not in self.failed:
                    self.failed.add(b)
                    record("fail", b)
            return
        b = self.image(a)
        if b not in self.g:
            return
        if act is Action.DELETE_IMAGE_VERTEX:
            self.set_g(self.g.delete_vertex(b))
            record("delete_vertex", b)
        elif act is Action.DELETE_IMAGE_EDGES:
            if self.g.degree(b):
                self.set_g(self.g.delete_incident_edges(b))
                record("delete_edges", b)
        else:
            # snapshot (neighbour, copy) order first; later copies of a contracted
            # pair have become self-loops and are skipped
            for _, w, _k in self.g.incident_edges(b):
                cur = b
                while cur in self.alias:
                    cur = self.alias[cur]
                other = w
                while other in self.alias:
                    other = self.alias[other]
                if cur == other or self.g.multiplicity(cur, other) == 0:
                    continue
                self.set_g(self.g.contract_edge((cur, other)))
                self.alias[max(cur, other)] = min(cur, other)
                record("contract", cur, other)


def attack_nodes(system: CoupledSystem, nodes: Iterable[int], rs: RuleSet) -> AttackOutcome:
    """Attack every node in ``nodes`` at round zero and propagate ``rs``."""
    attacked = tuple(sorted(set(int(a) for a in nodes)))
    included = system.scenario.included
    outside = [a for a in attacked if a not in set(included)]
    if outside:
        raise AttackError(f"attacked nodes {outside} are not in scenario {system.scenario.key_str}")
    run = _Run(system, attacked)
    fired: set[tuple[int, int]] = set()
    rounds = 0
    fixed = False
    while rounds < rs.max_rounds:
        rounds += 1
        progressed = False
        for ri, rule in enumerate(rs.rules):
            for a in included:
                if (ri, a) in fired or not run.triggered(rule, a):
                    continue
                fired.add((ri, a))
                progressed = True
                run.apply(rounds, ri, rule, a)
        if not progressed:
            fixed = True
            break
    post_g = run.g
    post_scenario = run.sg.subgraph(v for v in included if v not in run.failed)
    return AttackOutcome(
        scenario=system.scenario,
        attacked=attacked,
        post_g=post_g,
        component_count=connected_components(post_g).count,
        change_log=tuple(run.log),
        rounds_used=rounds,
        fixed_point=fixed,
        failed=tuple(sorted(run.failed)),
        post_scenario=post_scenario,
    )


def attack(system: CoupledSystem, node: int, rs: RuleSet) -> AttackOutcome:
    return attack_nodes(system, (node,), rs)


@dataclass(frozen=True)
class AttackMode:
    """SINGLE, SIMULTANEOUS, or SUBSETS with subset size ``k``."""

    kind: str = "SINGLE"
    k: int | None = None

    def __post_init__(self):
        if self.kind not in ("SINGLE", "SIMULTANEOUS", "SUBSETS"):
            raise AttackError(f"unknown attack mode {self.kind!r}")
        if self.kind == "SUBSETS":
            if isinstance(self.k, bool) or not isinstance(self.k, int) or self.k < 1:
                raise AttackError(f"SUBSETS needs an integer k >= 1, got {self.k!r}")
        elif self.k is not None:
            raise AttackError(f"{self.kind} takes no k")

    @classmethod
    def parse(cls, text: str | AttackMode) -> AttackMode:
        """Accept ``SINGLE``, ``SIMULTANEOUS``, ``SUBSETS:k`` or ``SUBSETS(k)``."""
        if isinstance(text, AttackMode):
            return text
        s = str(text).strip().upper()
        if s.startswith("SUBSETS"):
            rest = s[len("SUBSETS"):].strip(":()")
            try:
                return cls("SUBSETS", int(rest))
            except ValueError:
                raise AttackError(f"malformed attack mode {text!r}") from None
        return cls(s)

    def __str__(self) -> str:
        return f"SUBSETS:{self.k}" if self.kind == "SUBSETS" else self.kind

    def attack_sets(self, included: Sequence[int]) -> list[tuple[int, ...]]:
        if self.kind == "SINGLE":
            return [(a,) for a in included]
        if self.kind == "SIMULTANEOUS":
            return [tuple(included)]
        if self.k > len(included):
            raise AttackError(f"SUBSETS:{self.k} exceeds the {len(included)} scenario nodes")
        return list(itertools.combinations(included, self.k))


def attack_all(system: CoupledSystem, rs: RuleSet, mode: AttackMode | str = "SINGLE") -> list[AttackOutcome]:
    """Independent outcomes, one per attack set of ``mode``, in attack-set order."""
    mode = AttackMode.parse(mode)
    return [attack_nodes(system, nodes, rs) for nodes in mode.attack_sets(system.scenario.included)]
