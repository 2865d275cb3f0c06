import numpy as np
import pytest

from conftest import make_dataset
from rfvimp import (ForestConfig, SeedSpec, backward_sizes,
                    baseline_backward_select, fit_forest, gen_simulation,
                    oob_predictions, run_selector, search_candidates,
                    select_optimal)
from rfvimp.importance import ImportanceRecord, ImportanceReport, PERM_AUC
from rfvimp.metrics import auc
from rfvimp.rng import TAG_CANDIDATE
from rfvimp.selection import SELECTORS
from rfvimp.synth import SimulationConfig


def fake_report(values, lowers, uppers):
    records = tuple(
        ImportanceRecord(j, f"x{j + 1}", float(v), np.empty(0), float(lo),
                         float(hi), 0)
        for j, (v, lo, hi) in enumerate(zip(values, lowers, uppers))
    )
    return ImportanceReport(PERM_AUC, records, ForestConfig(ntree=2))


def search_oracle(values, lowers, uppers):
    """Literal scan implementing the candidate recursion: next pivot is the
    largest sorted position whose lower bound clears the pivot's upper
    bound; stop once the top variable's lower bound fails to clear it."""
    order = sorted(range(len(values)), key=lambda j: (-values[j], j))
    lo = [lowers[j] for j in order]
    hi = [uppers[j] for j in order]
    sets = []
    pos = len(order) - 1
    while True:
        sets.append(tuple(order[:pos + 1]))
        if not lo[0] > hi[pos]:
            break
        candidates = [k for k in range(len(order)) if lo[k] > hi[pos]]
        nxt = max(candidates)
        if nxt >= pos:
            break
        pos = nxt
    return sets


def random_ci_config(rng):
    p = int(rng.integers(1, 51))
    values = rng.normal(size=p)
    if rng.random() < 0.4:
        values = np.round(values, 1)  # value ties
    a = np.abs(rng.normal(size=p)) * rng.choice([0.0, 0.1, 1.0], size=p)
    b = np.abs(rng.normal(size=p)) * rng.choice([0.0, 0.1, 1.0], size=p)
    lowers = values - a
    uppers = values + b
    if rng.random() < 0.3:  # touching/shared endpoints
        lowers = np.round(lowers, 1)
        uppers = np.round(uppers, 1)
    return values, lowers, uppers


class TestSearchCandidates:
    def test_five_interval_example(self):
        values = [0.30, 0.22, 0.15, 0.10, 0.09]
        lowers = [0.24, 0.19, 0.13, 0.07, 0.06]
        uppers = [0.36, 0.25, 0.17, 0.13, 0.12]
        cands = search_candidates(fake_report(values, lowers, uppers))
        assert [c.size for c in cands] == [5, 3, 2]
        assert cands[0].variables == (0, 1, 2, 3, 4)
        assert cands[1].variables == (0, 1, 2)
        assert cands[2].variables == (0, 1)
        # stops because the top lower bound 0.24 <= pivot upper bound 0.25
        assert cands[2].pivot == 1

    def test_all_overlapping_single_candidate(self):
        cands = search_candidates(fake_report([3, 2, 1], [0, 0, 0], [4, 4, 4]))
        assert len(cands) == 1
        assert cands[0].variables == (0, 1, 2)

    def test_disjoint_intervals_full_ladder(self):
        cands = search_candidates(fake_report([30, 20, 10], [29, 19, 9],
                                              [31, 21, 11]))
        assert [c.size for c in cands] == [3, 2, 1]

    def test_matches_oracle_on_random_configurations(self):
        rng = np.random.default_rng(55)
        for _ in range(300):
            values, lowers, uppers = random_ci_config(rng)
            got = [c.variables
                   for c in search_candidates(fake_report(values, lowers, uppers))]
            assert got == search_oracle(values, lowers, uppers)

    def test_nesting_and_pivot_properties(self):
        rng = np.random.default_rng(56)
        for _ in range(100):
            values, lowers, uppers = random_ci_config(rng)
            report = fake_report(values, lowers, uppers)
            cands = search_candidates(report)
            order = cands[0].variables
            top = order[0]
            prev = None
            for i, c in enumerate(cands):
                assert c.variables == order[:c.size]
                assert top in c.variables
                assert c.pivot == c.variables[-1]
                if prev is not None:
                    assert c.size < prev.size  # strictly nested
                    # successive pivots have disjoint intervals
                    assert lowers[c.pivot] > uppers[prev.pivot]
                prev = c
            assert 1 <= len(cands) <= len(order)


class TestBackwardSizes:
    def test_ten_variables(self):
        assert backward_sizes(10) == [10, 8, 6, 4, 3, 2]

    def test_two_variables_single_candidate(self):
        assert backward_sizes(2) == [2]

    def test_matches_floor_recursion_for_all_p(self):
        for p in range(2, 501):
            sizes = backward_sizes(p)
            assert sizes[0] == p
            for prev, cur in zip(sizes, sizes[1:]):
                assert cur == max(2, int(0.8 * prev))
            assert sizes[-1] == 2 or (len(sizes) == 1 and p == 2)
            assert all(s >= 2 for s in sizes)

    def test_drop_rate_validated(self):
        with pytest.raises(ValueError):
            backward_sizes(10, drop_rate=0.0)
        with pytest.raises(ValueError):
            backward_sizes(10, drop_rate=1.0)


class TestSelectOptimal:
    def test_strong_variables_selected_on_easy_simulation(self):
        ds = gen_simulation(SimulationConfig(N=300, IR=1), SeedSpec(60))
        result = select_optimal(ds, "auc", ForestConfig(ntree=80), SeedSpec(61))
        assert set(range(5)) <= set(result.selected.variables)
        assert 1 <= result.n_candidates <= 30

    def test_reported_score_is_reproducible(self):
        ds = make_dataset(n=80, p=5)
        cfg = ForestConfig(ntree=30)
        seed = SeedSpec(62)
        result = select_optimal(ds, "auc", cfg, seed)
        i = result.optimal
        cand = result.selected
        sub = ds.restrict(cand.variables)
        from dataclasses import replace
        forest = fit_forest(sub, replace(cfg, sampling="none",
                                         seed=seed.child(TAG_CANDIDATE, i)))
        scores, covered = oob_predictions(forest, sub)
        expected = auc(scores[covered], sub.labels[covered])
        assert cand.oob_auc == expected

    def test_all_candidates_scored_and_optimum_maximal(self):
        ds = make_dataset(n=80, p=6)
        result = select_optimal(ds, "auc", ForestConfig(ntree=25), SeedSpec(63))
        scores = [c.oob_auc for c in result.candidates if not c.unscorable]
        assert result.selected.oob_auc == max(scores)
        # ties broken toward the smaller (later) candidate
        for i, c in enumerate(result.candidates):
            if not c.unscorable and c.oob_auc == result.selected.oob_auc:
                assert result.optimal >= i or result.selected.size <= c.size

    def test_unknown_method_rejected(self):
        with pytest.raises(ValueError):
            select_optimal(make_dataset(), "gini", ForestConfig(ntree=2),
                           SeedSpec(64))


class TestBaselines:
    def test_candidate_sizes_follow_recursion(self):
        ds = make_dataset(n=60, p=10)
        result = baseline_backward_select(ds, "perm-accu", "oob_error_min",
                                          ForestConfig(ntree=15), SeedSpec(65))
        assert [c.size for c in result.candidates] == [10, 8, 6, 4, 3, 2]
        assert result.n_candidates == 6

    def test_two_variable_dataset_single_candidate(self):
        ds = make_dataset(n=40, p=2)
        result = baseline_backward_select(ds, "gini", "oob_auc_max",
                                          ForestConfig(ntree=15), SeedSpec(66))
        assert result.n_candidates == 1
        assert result.selected.size == 2

    def test_candidates_are_ranked_prefixes(self):
        ds = make_dataset(n=60, p=10)
        result = baseline_backward_select(ds, "gini", "oob_auc_max",
                                          ForestConfig(ntree=15), SeedSpec(67))
        values = result.importance_report.values
        order = sorted(range(10), key=lambda j: (-values[j], j))
        for c in result.candidates:
            assert c.variables == tuple(order[:c.size])

    def test_error_direction_minimized(self):
        ds = make_dataset(n=60, p=5)
        result = baseline_backward_select(ds, "perm-accu", "oob_error_min",
                                          ForestConfig(ntree=15), SeedSpec(68))
        scores = [c.oob_auc for c in result.candidates if not c.unscorable]
        assert result.selected.oob_auc == min(scores)

    def test_invalid_arguments_rejected(self):
        ds = make_dataset(p=3)
        with pytest.raises(ValueError):
            baseline_backward_select(ds, "perm-auc", "oob_error_min",
                                     ForestConfig(ntree=2), SeedSpec(69))
        with pytest.raises(ValueError):
            baseline_backward_select(ds, "gini", "acc_max",
                                     ForestConfig(ntree=2), SeedSpec(69))


class TestRunSelector:
    @pytest.mark.parametrize("selector", SELECTORS)
    def test_dispatch_returns_result(self, selector):
        ds = make_dataset(n=60, p=5, n1=20)
        result = run_selector(ds, selector, ForestConfig(ntree=15), SeedSpec(70))
        assert result.method == selector
        assert 1 <= result.selected.size <= 5

    def test_unknown_selector_rejected(self):
        with pytest.raises(ValueError):
            run_selector(make_dataset(), "forward", ForestConfig(ntree=2),
                         SeedSpec(71))

    def test_json_serialization(self, tmp_path):
        ds = make_dataset(n=50, p=4)
        result = run_selector(ds, "auc", ForestConfig(ntree=15), SeedSpec(72))
        path = tmp_path / "sel.json"
        result.write_json(path, ds.feature_names)
        import json
        data = json.loads(path.read_text())
        assert data["method"] == "auc"
        assert data["n_candidates"] == len(data["candidates"])
        assert data["candidates"][0]["size"] == 4
        opt = data["candidates"][data["optimal"]]
        assert set(opt["members"]) <= set(ds.feature_names)
