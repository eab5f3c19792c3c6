"""Input checks shared by the estimators, in the spirit of sklearn.utils.validation."""

from __future__ import annotations

import numbers
import warnings
from typing import Any, Mapping

from doomsday.attack import CouplingMap
from doomsday.exceptions import ConfigError, GraphError, ScenarioSpaceError
from doomsday.graph import MultiGraph, connected_components
from doomsday.scenarios import SeedSpec


def check_graph(g: Any, allow_disconnected: bool = False) -> MultiGraph:
    if not isinstance(g, MultiGraph):
        raise GraphError(f"expected a MultiGraph, got {type(g).__name__}")
    if g.n_vertices == 0:
        raise GraphError("G has no vertices")
    count = connected_components(g).count
    if count != 1:
        msg = f"G has {count} components; it must be connected"
        if not allow_disconnected:
            raise GraphError(msg)
        warnings.warn(msg, UserWarning, stacklevel=3)
    return g


def check_seed(seed: Any, g: MultiGraph | None = None) -> SeedSpec:
    if not isinstance(seed, SeedSpec):
        raise ScenarioSpaceError(f"expected a SeedSpec, got {type(seed).__name__}")
    if g is not None and seed.n_total >= g.n_vertices:
        raise ScenarioSpaceError(
            f"driver universe ({seed.n_total}) must be smaller than G ({g.n_vertices} vertices)"
        )
    return seed


def check_coupling(coupling: CouplingMap | Mapping[int, int], g: MultiGraph, seed: SeedSpec) -> CouplingMap:
    if not isinstance(coupling, CouplingMap):
        coupling = CouplingMap(coupling)
    coupling.validate(g, seed.universe)
    return coupling


def check_n_jobs(n_jobs: Any) -> int | None:
    if n_jobs is None:
        return None
    if isinstance(n_jobs, bool) or not isinstance(n_jobs, numbers.Integral) or n_jobs == 0:
        raise ConfigError(f"n_jobs must be a non-zero integer or None, got {n_jobs!r}")
    return int(n_jobs)
