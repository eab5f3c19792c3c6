"""Doomsday-scenario stress testing of networks coupled to hidden driver networks."""

from doomsday.attack import (
    BUILTIN_RULE_SETS,
    Action,
    AttackMode,
    AttackOutcome,
    CoupledSystem,
    CouplingMap,
    Rule,
    RuleSet,
    Trigger,
    attack,
    attack_all,
    attack_nodes,
    couple,
    load_rule_set,
    replay,
)
from doomsday.graph import (
    ComponentPartition,
    DegreeDistribution,
    GraphBuilder,
    MultiGraph,
    connected_components,
    contract_edge,
    degree_distribution,
    delete_vertex,
    spanning_tree_count,
)
from doomsday.metrics import (
    MetricChoice,
    MetricKind,
    align,
    bhattacharyya_coefficient,
    distance,
    hellinger,
    kl_divergence,
)
from doomsday.optimizer import DoomsdayReport, doomsday, evaluate_scenarios, risk_complexity
from doomsday.scenarios import (
    BinningConfig,
    Scenario,
    SeedSpec,
    bin_scenarios,
    enumerate_scenarios,
    generate_er_seed,
    sample_scenarios,
    scenario_count,
)

__version__ = "0.1.0"

_LAZY = {"DoomsdaySearch", "ScenarioBinner"}


def __getattr__(name):
    # scikit-learn is slow to import; parallel workers never need it
    if name in _LAZY:
        from doomsday import estimators

        return getattr(estimators, name)
    raise AttributeError(f"module 'doomsday' has no attribute {name!r}")
