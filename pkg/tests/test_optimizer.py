import itertools
import random

import pytest
from sklearn.base import clone

from doomsday.attack import CouplingMap, load_rule_set
from doomsday.estimators import DoomsdaySearch, ScenarioBinner
from doomsday.exceptions import EmptyBinError, GraphError, ScenarioSpaceError
from doomsday.graph import MultiGraph
from doomsday.optimizer import doomsday, evaluate_scenarios, risk_complexity
from doomsday.scenarios import Scenario, SeedSpec, enumerate_scenarios, sample_scenarios

from oracles import brute_scenarios, degree_hist, hellinger_naive, naive_attack_components

STAR = MultiGraph(range(5), [(0, i) for i in range(1, 5)])
STAR_SEED = SeedSpec(2, (0, 1), ((0, 1),))
STAR_COUPLING = CouplingMap({0: 0, 1: 1})
K4 = MultiGraph(range(4), itertools.combinations(range(4), 2))
DIRECT = load_rule_set("DIRECT_DELETE")


class TestEvaluate:
    def test_leaf_only(self):
        (entry,) = evaluate_scenarios(STAR, {0: 1}, [Scenario((0,), ())], DIRECT)
        assert entry.component_count == 1

    def test_star_best_attacks_hub(self):
        for entry in evaluate_scenarios(STAR, STAR_COUPLING, enumerate_scenarios(STAR_SEED), DIRECT):
            assert entry.outcome.attacked == (0,)
            assert entry.component_count == 4

    def test_edges_do_not_matter_to_direct_delete(self):
        a, b = Scenario((0, 1), ()), Scenario((0, 1), ((0, 1),))
        ea, eb = evaluate_scenarios(STAR, STAR_COUPLING, [a, b], DIRECT)
        assert ea.outcome.post_g == eb.outcome.post_g
        assert ea.outcome.attacked == eb.outcome.attacked

    def test_ties_within_scenario_pick_smallest_attack_set(self):
        g = MultiGraph(range(5), [(i, i + 1) for i in range(4)])
        (entry,) = evaluate_scenarios(g, {0: 1, 1: 3}, [Scenario((0, 1), ())], DIRECT)
        assert entry.component_count == 2
        assert entry.outcome.attacked == (0,)


class TestDoomsday:
    def test_single_scenario(self):
        s = Scenario((0,), ())
        rep = doomsday(STAR, {0: 2}, [s], DIRECT)
        assert rep.doomsday.scenario == s
        assert rep.ties == (s,)

    def test_star_fixture_tie(self):
        rep = doomsday(STAR, STAR_COUPLING, enumerate_scenarios(STAR_SEED), DIRECT, seed=STAR_SEED.seed_scenario())
        assert rep.doomsday.component_count == 4
        assert [s.key_str for s in rep.ties] == ["0,1|", "0,1|0-1"]
        assert rep.doomsday.scenario.key_str == "0,1|"
        assert rep.tau_doomsday == 1
        assert rep.tau_seed == 1
        assert rep.total_evaluated == 2

    def test_k4_disconnects_nothing(self):
        spec = SeedSpec(3, (0, 1))
        rep = doomsday(K4, {0: 0, 1: 1, 2: 2}, enumerate_scenarios(spec), DIRECT)
        assert all(e.component_count == 1 for e in rep.ranked)
        assert len(rep.ties) == len(rep.ranked) == 10

    def test_empty(self):
        with pytest.raises(EmptyBinError, match="epsilon"):
            doomsday(STAR, STAR_COUPLING, [], DIRECT)

    def test_duplicates_do_not_change_argmax(self):
        items = list(enumerate_scenarios(SeedSpec(3, (0, 1))))
        g = MultiGraph(range(6), [(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (1, 4)])
        d = {0: 1, 1: 4, 2: 2}
        nbr = load_rule_set("NEIGHBOR_DELETE")
        once = doomsday(g, d, items, nbr)
        twice = doomsday(g, d, items + items[::-1], nbr)
        assert twice.doomsday.scenario == once.doomsday.scenario
        assert twice.total_evaluated == once.total_evaluated

    def test_ranking_order(self):
        g = MultiGraph(range(6), [(0, 1), (1, 2), (2, 3), (3, 4), (4, 5)])
        rep = doomsday(g, {0: 2, 1: 3, 2: 0}, enumerate_scenarios(SeedSpec(3, (0,))), load_rule_set("NEIGHBOR_DELETE"))
        keys = [(-e.component_count, e.scenario.key) for e in rep.ranked]
        assert keys == sorted(keys)
        assert rep.doomsday.component_count >= max(e.component_count for e in rep.ranked)

    def test_sample_never_beats_exhaustive(self):
        g = MultiGraph(range(7), [(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 6), (1, 5)])
        spec = SeedSpec(4, (0, 1))
        d = {0: 1, 1: 5, 2: 3, 3: 0}
        rs = load_rule_set("CASCADE")
        full = doomsday(g, d, enumerate_scenarios(spec), rs).doomsday.component_count
        for seed in range(5):
            part = doomsday(g, d, sample_scenarios(spec, 5, seed), rs).doomsday.component_count
            assert part <= full

    def test_parallel_identical(self):
        spec = SeedSpec(3, (0, 1))
        g = MultiGraph(range(6), [(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (0, 5)])
        args = (g, {0: 0, 1: 2, 2: 4}, list(enumerate_scenarios(spec)), load_rule_set("CASCADE"))
        assert doomsday(*args, n_jobs=1) == doomsday(*args, n_jobs=3)


class TestRiskComplexity:
    def test_single_vertex(self):
        assert risk_complexity(MultiGraph([3])) == 1

    def test_disconnected(self):
        assert risk_complexity(Scenario((0, 1), ())) == 0

    def test_triangle_seed(self):
        assert risk_complexity(Scenario((0, 1, 2), ((0, 1), (1, 2), (0, 2)))) == 3


def test_naive_oracle_agreement_on_random_fixtures():
    rng = random.Random(2024)
    for trial in range(40):
        n_g = rng.randint(4, 6)
        g_edges = [(i, rng.randrange(i)) for i in range(1, n_g)]
        g_edges += [tuple(rng.sample(range(n_g), 2)) for _ in range(rng.randint(0, 3))]
        n_total = rng.randint(1, 3)
        n = rng.randint(1, n_total)
        marked = tuple(range(n))
        seed_edges = tuple(p for p in itertools.combinations(range(n_total), 2) if rng.random() < 0.5)
        coupling = dict(zip(range(n_total), rng.sample(range(n_g), n_total)))
        name = rng.choice(["DIRECT_DELETE", "NEIGHBOR_DELETE", "CASCADE"])
        eps = rng.choice(["0.3", "0.6", "1.5"])

        ref = degree_hist(range(n_total), seed_edges)
        best = max(
            naive_attack_components(g_edges, range(n_g), es, coupling, (a,), name)
            for vs, es in brute_scenarios(n_total, marked)
            if hellinger_naive(degree_hist(vs, es), ref) < float(eps)
            for a in vs
        )
        search = DoomsdaySearch(epsilon=eps, rules=name).fit(
            MultiGraph(range(n_g), g_edges), seed=SeedSpec(n_total, marked, seed_edges), coupling=coupling
        )
        assert search.report_.doomsday.component_count == best, trial


class TestEstimators:
    def test_get_params_and_clone(self):
        est = DoomsdaySearch(epsilon="0.2", rules="CASCADE", n_jobs=2)
        params = est.get_params()
        assert params["epsilon"] == "0.2" and params["rules"] == "CASCADE"
        other = clone(est)
        assert other.get_params() == params
        assert other.set_params(attack_mode="SUBSETS:2").attack_mode == "SUBSETS:2"

    def test_fit_sets_attributes(self):
        est = DoomsdaySearch(epsilon="1.5").fit(STAR, seed=STAR_SEED, coupling=STAR_COUPLING)
        assert est.n_generated_ == 2 and len(est.retained_) == 2
        assert est.doomsday_.key_str == "0,1|"
        assert est.predict([Scenario((0, 1), ((0, 1),))]) == [4]

    def test_predict_before_fit(self):
        from sklearn.exceptions import NotFittedError

        with pytest.raises(NotFittedError):
            DoomsdaySearch().predict([])

    def test_binner_transform(self):
        spec = SeedSpec(3, (0, 1), ((0, 1), (1, 2), (0, 2)))
        binner = ScenarioBinner(epsilon="0.3").fit(spec)
        assert [s.key_str for s in binner.transform(enumerate_scenarios(spec))] == ["0,1,2|0-1,0-2,1-2"]
        assert binner.seed_distribution_.as_dict() == {2: 1.0}

    def test_validation(self):
        with pytest.raises(GraphError):
            DoomsdaySearch().fit(MultiGraph([0, 1, 2]), seed=SeedSpec(1, (0,)), coupling={0: 0})
        with pytest.raises(ScenarioSpaceError, match="smaller"):
            DoomsdaySearch().fit(K4, seed=SeedSpec(4, (0,)), coupling={0: 0, 1: 1, 2: 2, 3: 3})

    def test_disconnected_allowed_with_flag(self):
        g = MultiGraph([0, 1, 2, 3], [(0, 1), (2, 3)])
        with pytest.warns(UserWarning):
            est = DoomsdaySearch(epsilon="2", allow_disconnected=True).fit(g, seed=SeedSpec(1, (0,)), coupling={0: 0})
        assert est.report_.doomsday.component_count == 2

    def test_sample_mode(self):
        g = MultiGraph(range(8), [(i, i + 1) for i in range(7)])
        spec = SeedSpec(5, (0,), ((0, 1),))
        d = {i: i + 1 for i in range(5)}
        a = DoomsdaySearch(epsilon="2", scenario_mode="SAMPLE", n_samples=30, random_state=3).fit(g, seed=spec, coupling=d)
        b = DoomsdaySearch(epsilon="2", scenario_mode="SAMPLE", n_samples=30, random_state=3).fit(g, seed=spec, coupling=d)
        assert a.report_ == b.report_
        assert a.report_.search_mode == "SAMPLE(count=30, rng_seed=3)"

    def test_empty_bin_in_sample_mode(self):
        k4_seed = SeedSpec(4, (0, 1, 2, 3), tuple(itertools.combinations(range(4), 2)))
        g = MultiGraph(range(6), [(i, (i + 1) % 6) for i in range(6)])
        est = DoomsdaySearch(epsilon="1e-9", scenario_mode="SAMPLE", n_samples=1, random_state=0)
        with pytest.raises(EmptyBinError):
            est.fit(g, seed=k4_seed, coupling={i: i for i in range(4)})
