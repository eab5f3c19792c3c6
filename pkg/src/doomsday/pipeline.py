"""End-to-end run from a :class:`RunConfig`."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Any

from doomsday.estimators import DoomsdaySearch
from doomsday.io import RunConfig, dumps, emit_report_dot, report_to_document, write_atomic
from doomsday.optimizer import DoomsdayReport

log = logging.getLogger(__name__)


def make_search(config: RunConfig, n_jobs: int | None = 1) -> DoomsdaySearch:
    b = config.binning
    return DoomsdaySearch(
        epsilon=b.epsilon,
        metric=b.metric.kind.value,
        smoothing=b.metric.smoothing,
        rules=config.rule_set,
        attack_mode=str(config.attack_mode),
        scenario_mode=b.mode.value,
        max_scenarios=b.exhaustive_cap,
        n_samples=b.sample_count,
        random_state=b.rng_seed,
        n_jobs=n_jobs,
        allow_disconnected=config.allow_disconnected,
    )


@dataclass
class PipelineResult:
    report: DoomsdayReport
    document: dict[str, Any]
    text: str
    dot: str


def run_pipeline(config: RunConfig, n_jobs: int | None = 1, write: bool = True) -> PipelineResult:
    """Generate, bin, attack and rank; optionally write the report and DOT."""
    search = make_search(config, n_jobs).fit(config.graph, seed=config.seed, coupling=config.coupling)
    log.info(
        "%d scenarios generated, %d retained, doomsday disconnects G into %d components",
        search.n_generated_, len(search.retained_), search.report_.doomsday.component_count,
    )
    doc = report_to_document(
        search.report_,
        epsilon=str(config.binning.epsilon),
        metric=config.binning.metric.kind.value,
        generated=search.n_generated_,
        retained=len(search.retained_),
    )
    text = dumps(doc)
    dot = emit_report_dot(config.graph, search.report_.doomsday.outcome.post_g)
    if write:
        if config.output_path is not None:
            write_atomic(config.output_path, text)
        if config.dot_path is not None:
            write_atomic(config.dot_path, dot)
    return PipelineResult(search.report_, doc, text, dot)
