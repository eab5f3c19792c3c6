"""JSON documents (graph, config, report) and DOT export.

See ``docs/formats.md`` for the exact grammar of each document.
"""

from __future__ import annotations

import json
import os
import tempfile
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Mapping

from doomsday.attack import BUILTIN_RULE_SETS, AttackMode, ChangeRecord, CouplingMap, RuleSet, load_rule_set
from doomsday.exceptions import ConfigError, GraphError, ScenarioSpaceError
from doomsday.graph import MultiGraph, connected_components
from doomsday.metrics import MetricChoice, MetricKind
from doomsday.optimizer import DoomsdayReport
from doomsday.scenarios import DEFAULT_EXHAUSTIVE_CAP, BinningConfig, Scenario, ScenarioMode, SeedSpec

FORMAT_VERSION = "1"


class DisconnectedGraphWarning(UserWarning):
    pass


def _load_json(path: Path, error=ConfigError) -> Any:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise error(f"{path}: {exc.strerror}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise error(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None


def _is_int(x: Any) -> bool:
    return isinstance(x, int) and not isinstance(x, bool)


# -- graphs -----------------------------------------------------------------


def parse_graph(doc: Mapping[str, Any], require_connected: bool = True) -> MultiGraph:
    """Build a :class:`MultiGraph` from a decoded graph document.

    A disconnected graph raises :class:`GraphError`, or only warns with
    ``require_connected=False``.
    """
    if not isinstance(doc, Mapping):
        raise GraphError("graph document must be an object")
    extra = set(doc) - {"version", "vertices", "edges"}
    if extra:
        raise GraphError(f"unknown field(s) {sorted(extra)} in graph document")
    if doc.get("version") != FORMAT_VERSION:
        raise GraphError(f"graph document version must be {FORMAT_VERSION!r}, got {doc.get('version')!r}")
    verts = doc.get("vertices")
    if not isinstance(verts, list):
        raise GraphError("field 'vertices' must be a list")
    ids: list[int] = []
    labels: dict[int, str] = {}
    for i, item in enumerate(verts):
        where = f"vertices[{i}]"
        if not isinstance(item, Mapping) or "id" not in item:
            raise GraphError(f"{where}: expected an object with an 'id'")
        extra = set(item) - {"id", "label"}
        if extra:
            raise GraphError(f"{where}: unknown field(s) {sorted(extra)}")
        vid = item["id"]
        if not _is_int(vid) or vid < 0:
            raise GraphError(f"{where}.id: must be a non-negative integer, got {vid!r}")
        if vid in labels or vid in ids:
            raise GraphError(f"{where}.id: duplicate vertex id {vid}")
        ids.append(vid)
        if "label" in item:
            if not isinstance(item["label"], str):
                raise GraphError(f"{where}.label: must be a string")
            labels[vid] = item["label"]
    known = set(ids)
    edge_docs = doc.get("edges", [])
    if not isinstance(edge_docs, list):
        raise GraphError("field 'edges' must be a list")
    edges: dict[tuple[int, int], int] = {}
    for i, item in enumerate(edge_docs):
        where = f"edges[{i}]"
        if not isinstance(item, Mapping):
            raise GraphError(f"{where}: expected an object")
        extra = set(item) - {"u", "v", "multiplicity"}
        if extra:
            raise GraphError(f"{where}: unknown field(s) {sorted(extra)}")
        for end in ("u", "v"):
            if end not in item:
                raise GraphError(f"{where}: missing field {end!r}")
            if not _is_int(item[end]) or item[end] not in known:
                raise GraphError(f"{where}.{end}: undeclared vertex {item[end]!r}")
        u, v = item["u"], item["v"]
        if u == v:
            raise GraphError(f"{where}: self-loop at vertex {u}")
        mult = item.get("multiplicity", 1)
        if not _is_int(mult) or mult < 1:
            raise GraphError(f"{where}.multiplicity: must be an integer >= 1, got {mult!r}")
        key = (min(u, v), max(u, v))
        edges[key] = edges.get(key, 0) + mult
    g = MultiGraph(ids, edges, labels)
    if g.n_vertices and connected_components(g).count != 1:
        msg = f"graph has {connected_components(g).count} components; G must be connected"
        if require_connected:
            raise GraphError(msg + " (pass allow_disconnected to override)")
        warnings.warn(msg, DisconnectedGraphWarning, stacklevel=2)
    return g


def graph_to_document(g: MultiGraph) -> dict[str, Any]:
    vertices = []
    for v in g.vertices:
        item: dict[str, Any] = {"id": v}
        if g.label(v) is not None:
            item["label"] = g.label(v)
        vertices.append(item)
    edges = [{"u": u, "v": v, "multiplicity": m} for (u, v), m in g.multiplicities().items()]
    return {"version": FORMAT_VERSION, "vertices": vertices, "edges": edges}


def load_graph(path: str | Path, require_connected: bool = True) -> MultiGraph:
    doc = _load_json(Path(path), GraphError)
    try:
        return parse_graph(doc, require_connected)
    except GraphError as exc:
        raise GraphError(f"{path}: {exc}") from None


def dumps(doc: Any) -> str:
    """Canonical JSON text: sorted keys, two-space indent, trailing newline."""
    return json.dumps(doc, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def write_atomic(path: str | Path, text: str) -> None:
    """Write via a temp file in the target directory, then rename over."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# -- DOT ---------------------------------------------------------------------


def _dot_quote(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n") + '"'


def emit_dot(g: MultiGraph, removed: MultiGraph | None = None, name: str = "G") -> str:
    """DOT text for ``g``; one edge statement per parallel copy.

    When ``removed`` is given, its vertices and edges that are absent from
    ``g`` are drawn dashed red (the attack diff).
    """
    lines = [f"graph {name} {{"]
    for v in g.vertices:
        label = g.label(v)
        lines.append(f"  {v}" + (f" [label={_dot_quote(label)}];" if label is not None else ";"))
    gone: list[int] = []
    if removed is not None:
        gone = [v for v in removed.vertices if v not in g]
        for v in gone:
            label = removed.label(v) if removed.label(v) is not None else str(v)
            lines.append(f"  {v} [label={_dot_quote(label)}, style=dashed, color=red, fontcolor=red];")
    for u, v, _ in g.edges():
        lines.append(f"  {u} -- {v};")
    if removed is not None:
        for u, v, k in removed.edges():
            if k >= g.multiplicity(u, v):
                lines.append(f"  {u} -- {v} [style=dashed, color=red];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def emit_report_dot(base_g: MultiGraph, post_g: MultiGraph) -> str:
    """Post-attack G with everything the attack removed styled distinctly."""
    return emit_dot(post_g, removed=base_g, name="Doomsday")


# -- config -----------------------------------------------------------------


@dataclass
class RunConfig:
    graph: MultiGraph
    seed: SeedSpec
    coupling: CouplingMap
    binning: BinningConfig
    rule_set: RuleSet
    attack_mode: AttackMode
    allow_disconnected: bool = False
    output_path: Path | None = None
    dot_path: Path | None = None
    base_dir: Path = field(default_factory=Path.cwd)


_CONFIG_FIELDS = {
    "version", "graph", "seed", "coupling", "epsilon", "metric", "rules",
    "attack_mode", "scenarios", "allow_disconnected", "output", "dot",
}
_REQUIRED = ("version", "graph", "seed", "coupling", "epsilon")


def _parse_seed(doc: Any) -> SeedSpec:
    if not isinstance(doc, Mapping):
        raise ConfigError("seed: expected an object")
    extra = set(doc) - {"n_total", "marked", "edges"}
    if extra:
        raise ConfigError(f"seed: unknown field(s) {sorted(extra)}")
    n = doc.get("n_total")
    if not _is_int(n):
        raise ConfigError(f"seed.n_total: must be an integer, got {n!r}")
    marked = doc.get("marked")
    if not isinstance(marked, list) or not all(_is_int(a) for a in marked):
        raise ConfigError("seed.marked: must be a list of integers")
    edges = doc.get("edges", [])
    if not isinstance(edges, list) or not all(
        isinstance(e, list) and len(e) == 2 and all(_is_int(x) for x in e) for e in edges
    ):
        raise ConfigError("seed.edges: must be a list of [u, v] integer pairs")
    try:
        return SeedSpec(n, tuple(marked), tuple(tuple(e) for e in edges))
    except ScenarioSpaceError as exc:
        raise ConfigError(f"seed: {exc}") from None


def _parse_coupling(doc: Any) -> CouplingMap:
    if not isinstance(doc, list) or not all(
        isinstance(p, list) and len(p) == 2 and all(_is_int(x) for x in p) for p in doc
    ):
        raise ConfigError("coupling: must be a list of [driver, target] integer pairs")
    drivers = [p[0] for p in doc]
    if len(set(drivers)) != len(drivers):
        raise ConfigError("coupling: a driver vertex is listed twice")
    return CouplingMap({a: b for a, b in doc})


def _parse_metric(doc: Any) -> MetricChoice:
    if doc is None:
        return MetricChoice()
    if isinstance(doc, str):
        doc = {"kind": doc}
    if not isinstance(doc, Mapping):
        raise ConfigError("metric: expected a name or an object")
    extra = set(doc) - {"kind", "smoothing"}
    if extra:
        raise ConfigError(f"metric: unknown field(s) {sorted(extra)}")
    kind = doc.get("kind", "HELLINGER")
    if kind not in MetricKind.__members__:
        raise ConfigError(f"metric.kind: unknown metric {kind!r}")
    smoothing = doc.get("smoothing", MetricChoice().smoothing)
    if isinstance(smoothing, bool) or not isinstance(smoothing, (int, float)) or smoothing < 0:
        raise ConfigError(f"metric.smoothing: must be a number >= 0, got {smoothing!r}")
    return MetricChoice(MetricKind(kind), float(smoothing))


def _parse_scenarios(doc: Any) -> dict[str, Any]:
    if doc is None:
        return {"mode": ScenarioMode.EXHAUSTIVE}
    if not isinstance(doc, Mapping):
        raise ConfigError("scenarios: expected an object")
    mode = doc.get("mode", "EXHAUSTIVE")
    if mode == "EXHAUSTIVE":
        extra = set(doc) - {"mode", "cap"}
        cap = doc.get("cap", DEFAULT_EXHAUSTIVE_CAP)
        if extra:
            raise ConfigError(f"scenarios: unknown field(s) {sorted(extra)}")
        if not _is_int(cap) or cap < 1:
            raise ConfigError(f"scenarios.cap: must be an integer >= 1, got {cap!r}")
        return {"mode": ScenarioMode.EXHAUSTIVE, "exhaustive_cap": cap}
    if mode == "SAMPLE":
        extra = set(doc) - {"mode", "count", "rng_seed"}
        if extra:
            raise ConfigError(f"scenarios: unknown field(s) {sorted(extra)}")
        count, seed = doc.get("count"), doc.get("rng_seed", 0)
        if not _is_int(count) or count < 1:
            raise ConfigError(f"scenarios.count: must be an integer >= 1, got {count!r}")
        if not _is_int(seed) or not 0 <= seed < 2**64:
            raise ConfigError(f"scenarios.rng_seed: must be an unsigned 64-bit integer, got {seed!r}")
        return {"mode": ScenarioMode.SAMPLE, "sample_count": count, "rng_seed": seed}
    raise ConfigError(f"scenarios.mode: must be EXHAUSTIVE or SAMPLE, got {mode!r}")


def parse_epsilon_field(value: Any) -> Fraction:
    if isinstance(value, bool) or not isinstance(value, (str, int, float)):
        raise ConfigError(f"epsilon: must be a decimal string, got {value!r}")
    try:
        eps = Fraction(value if not isinstance(value, float) else repr(value))
    except (ValueError, ZeroDivisionError):
        raise ConfigError(f"epsilon: not a rational number {value!r}") from None
    if eps <= 0:
        raise ConfigError(f"epsilon: must be > 0, got {value!r}")
    return eps


def parse_config(doc: Mapping[str, Any], base_dir: str | Path = ".") -> RunConfig:
    """Validate a decoded config document; relative paths resolve from ``base_dir``."""
    base = Path(base_dir)
    if not isinstance(doc, Mapping):
        raise ConfigError("config must be an object")
    extra = set(doc) - _CONFIG_FIELDS
    if extra:
        raise ConfigError(f"unknown config field(s) {sorted(extra)}")
    for key in _REQUIRED:
        if key not in doc:
            raise ConfigError(f"missing config field {key!r}")
    if doc["version"] != FORMAT_VERSION:
        raise ConfigError(f"version: must be {FORMAT_VERSION!r}, got {doc['version']!r}")
    allow = doc.get("allow_disconnected", False)
    if not isinstance(allow, bool):
        raise ConfigError("allow_disconnected: must be true or false")

    gsrc = doc["graph"]
    if isinstance(gsrc, str):
        graph = load_graph(base / gsrc, require_connected=not allow)
    elif isinstance(gsrc, Mapping):
        graph = parse_graph(gsrc, require_connected=not allow)
    else:
        raise ConfigError("graph: must be a path or an inline graph document")

    seed = _parse_seed(doc["seed"])
    coupling = _parse_coupling(doc["coupling"])
    coupling.validate(graph, seed.universe)
    stray = [a for a in coupling.mapping if a >= seed.n_total]
    if stray:
        raise ConfigError(f"coupling: driver vertices {stray} outside the universe 0..{seed.n_total - 1}")
    if seed.n_total >= graph.n_vertices:
        raise ConfigError(f"seed.n_total ({seed.n_total}) must be smaller than |V(G)| ({graph.n_vertices})")

    eps = parse_epsilon_field(doc["epsilon"])
    metric = _parse_metric(doc.get("metric"))
    binning = BinningConfig(eps, metric, **_parse_scenarios(doc.get("scenarios")))

    rules = doc.get("rules", "DIRECT_DELETE")
    if isinstance(rules, str):
        rule_set = load_rule_set(rules if rules in BUILTIN_RULE_SETS else base / rules)
    elif isinstance(rules, Mapping):
        rule_set = load_rule_set(rules)
    else:
        raise ConfigError("rules: must be a built-in name, a path, or an inline rule set")

    mode_text = doc.get("attack_mode", "SINGLE")
    if not isinstance(mode_text, str):
        raise ConfigError("attack_mode: must be a string")
    mode = AttackMode.parse(mode_text)

    out = doc.get("output")
    dot = doc.get("dot")
    for name, val in (("output", out), ("dot", dot)):
        if val is not None and (not isinstance(val, str) or not val):
            raise ConfigError(f"{name}: must be a non-empty path string")
    return RunConfig(
        graph=graph,
        seed=seed,
        coupling=coupling,
        binning=binning,
        rule_set=rule_set,
        attack_mode=mode,
        allow_disconnected=allow,
        output_path=None if out is None else base / out,
        dot_path=None if dot is None else base / dot,
        base_dir=base,
    )


def load_config(path: str | Path, overrides: Mapping[str, Any] | None = None) -> RunConfig:
    """Load and validate a config file; ``overrides`` replace top-level fields."""
    path = Path(path)
    doc = _load_json(path)
    if overrides and isinstance(doc, dict):
        doc.update(overrides)
    return parse_config(doc, base_dir=path.parent)


# -- reports ----------------------------------------------------------------


def _change_log(log: tuple[ChangeRecord, ...]) -> list[dict[str, Any]]:
    return [rec.to_document() for rec in log]


def report_to_document(report: DoomsdayReport, **extra: Any) -> dict[str, Any]:
    """Serializable form of a report. ``extra`` keys are merged at top level."""
    top = report.doomsday
    out = top.outcome
    doc: dict[str, Any] = {
        "version": FORMAT_VERSION,
        "search_mode": report.search_mode,
        "rule_set": report.rule_set,
        "attack_mode": report.attack_mode,
        "total_evaluated": report.total_evaluated,
        "doomsday": {
            "scenario": top.scenario.key_str,
            "attacked": list(out.attacked),
            "failed": list(out.failed),
            "component_count": out.component_count,
            "rounds_used": out.rounds_used,
            "fixed_point": out.fixed_point,
            "change_log": _change_log(out.change_log),
            "post_g": graph_to_document(out.post_g),
            "attacked_scenario": graph_to_document(out.post_scenario),
        },
        "ties": [s.key_str for s in report.ties],
        "tau_doomsday": report.tau_doomsday,
        "tau_seed": report.tau_seed,
        "ranked": [
            {
                "scenario": e.scenario.key_str,
                "attacked": list(e.outcome.attacked),
                "component_count": e.component_count,
                "rounds_used": e.outcome.rounds_used,
            }
            for e in report.ranked
        ],
    }
    doc.update(extra)
    return doc


def scenario_to_document(s: Scenario) -> dict[str, Any]:
    return {"key": s.key_str, "vertices": list(s.included), "edges": [list(e) for e in s.edges]}


def bundled_fixture(name: str) -> Path:
    """Path of a fixture shipped with the package (e.g. ``star_hub.config.json``)."""
    from importlib.resources import files

    path = Path(str(files("doomsday") / "fixtures" / name))
    if not path.is_file():
        raise ConfigError(f"no bundled fixture named {name!r}")
    return path
