"""Estimator front end.

``ScenarioBinner`` is a transformer: fitted on a seed, it filters scenario
lists. ``DoomsdaySearch`` runs the whole search on a network G when fitted
and can afterwards score arbitrary scenario lists with :meth:`predict`.
Both follow the usual ``get_params``/``set_params`` conventions, so they
clone and grid-search like any other estimator.
"""

from __future__ import annotations

from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from doomsday.attack import AttackMode, load_rule_set
from doomsday.exceptions import EmptyBinError
from doomsday.metrics import MetricChoice
from doomsday.optimizer import doomsday, evaluate_scenarios
from doomsday.scenarios import (
    DEFAULT_EXHAUSTIVE_CAP,
    BinningConfig,
    ScenarioMode,
    bin_scenarios,
    dedupe,
    enumerate_scenarios,
    sample_scenarios,
)
from doomsday.validation import check_coupling, check_graph, check_n_jobs, check_seed


class ScenarioBinner(TransformerMixin, BaseEstimator):
    """Keep scenarios whose degree distribution is within ``epsilon`` of the seed.

    Parameters
    ----------
    epsilon : str, int, float or Fraction
        Strict tolerance; strings are parsed exactly.
    metric : {"HELLINGER", "BHATTACHARYYA_DISTANCE", "KL_DIVERGENCE"}
    smoothing : float
        Additive smoothing, used by KL only.
    n_jobs : int or None
    """

    def __init__(self, epsilon="0.1", metric="HELLINGER", smoothing=1e-9, n_jobs=1):
        self.epsilon = epsilon
        self.metric = metric
        self.smoothing = smoothing
        self.n_jobs = n_jobs

    def _config(self) -> BinningConfig:
        return BinningConfig(self.epsilon, MetricChoice(self.metric, self.smoothing))

    def fit(self, X, y=None):
        self.seed_ = check_seed(X)
        self.config_ = self._config()
        self.seed_distribution_ = self.seed_.seed_scenario().degree_distribution()
        return self

    def transform(self, X):
        check_is_fitted(self, "seed_")
        return bin_scenarios(X, self.seed_, self.config_, n_jobs=check_n_jobs(self.n_jobs))


class DoomsdaySearch(BaseEstimator):
    """Search the scenario space for the attack that disconnects G the most.

    Parameters
    ----------
    epsilon, metric, smoothing
        Binning tolerance and distance, as in :class:`ScenarioBinner`.
    rules : str, path, dict or RuleSet
        Built-in rule-set name or rule-set document.
    attack_mode : str
        ``SINGLE``, ``SIMULTANEOUS`` or ``SUBSETS:k``.
    scenario_mode : {"EXHAUSTIVE", "SAMPLE"}
    max_scenarios : int
        Exhaustive enumeration refuses larger spaces.
    n_samples : int
        Draws in SAMPLE mode.
    random_state : int
        Seed of the scenario sampler.
    n_jobs : int or None
        Parallel scenario evaluation; results do not depend on it.
    allow_disconnected : bool

    Attributes
    ----------
    graph_, seed_, coupling_, rule_set_
        Validated inputs.
    n_generated_ : int
        Scenarios produced before binning.
    retained_ : list of Scenario
    report_ : DoomsdayReport
    doomsday_ : Scenario
    """

    def __init__(
        self,
        epsilon="0.1",
        metric="HELLINGER",
        smoothing=1e-9,
        rules="DIRECT_DELETE",
        attack_mode="SINGLE",
        scenario_mode="EXHAUSTIVE",
        max_scenarios=DEFAULT_EXHAUSTIVE_CAP,
        n_samples=1000,
        random_state=0,
        n_jobs=1,
        allow_disconnected=False,
    ):
        self.epsilon = epsilon
        self.metric = metric
        self.smoothing = smoothing
        self.rules = rules
        self.attack_mode = attack_mode
        self.scenario_mode = scenario_mode
        self.max_scenarios = max_scenarios
        self.n_samples = n_samples
        self.random_state = random_state
        self.n_jobs = n_jobs
        self.allow_disconnected = allow_disconnected

    def binning_config(self) -> BinningConfig:
        return BinningConfig(
            self.epsilon,
            MetricChoice(self.metric, self.smoothing),
            mode=ScenarioMode(self.scenario_mode),
            sample_count=self.n_samples,
            rng_seed=self.random_state,
            exhaustive_cap=self.max_scenarios,
        )

    def generate(self, seed):
        cfg = self.binning_config()
        if cfg.mode is ScenarioMode.EXHAUSTIVE:
            return list(enumerate_scenarios(seed, cfg.exhaustive_cap))
        return sample_scenarios(seed, cfg.sample_count, cfg.rng_seed)

    def fit(self, X, y=None, *, seed, coupling):
        """Run the search on network ``X`` for the given seed and coupling."""
        n_jobs = check_n_jobs(self.n_jobs)
        self.graph_ = check_graph(X, self.allow_disconnected)
        self.seed_ = check_seed(seed, self.graph_)
        self.coupling_ = check_coupling(coupling, self.graph_, self.seed_)
        self.rule_set_ = load_rule_set(self.rules)
        self.attack_mode_ = AttackMode.parse(self.attack_mode)
        cfg = self.binning_config()
        scenarios = self.generate(self.seed_)
        self.n_generated_ = len(scenarios)
        self.retained_ = bin_scenarios(scenarios, self.seed_, cfg, n_jobs=n_jobs)
        if not self.retained_:
            raise EmptyBinError(
                f"no scenario within epsilon={cfg.epsilon} of the seed "
                f"({self.n_generated_} generated); increase epsilon"
            )
        self.report_ = doomsday(
            self.graph_,
            self.coupling_,
            self.retained_,
            self.rule_set_,
            self.attack_mode_,
            seed=self.seed_.seed_scenario(),
            search_mode=cfg.descriptor,
            n_jobs=n_jobs,
        )
        self.doomsday_ = self.report_.doomsday.scenario
        return self

    def predict(self, X):
        """Best post-attack component count of G for each scenario in ``X``."""
        check_is_fitted(self, "report_")
        entries = evaluate_scenarios(
            self.graph_, self.coupling_, dedupe(X), self.rule_set_, self.attack_mode_,
            n_jobs=check_n_jobs(self.n_jobs),
        )
        counts = {e.scenario.key: e.component_count for e in entries}
        return [counts[s.key] for s in X]
