import json
import math

import numpy as np
import pytest

from arssa.errors import DegenerateDistributionError, InvalidSizeError
from arssa.model import gen_discrete_gaussian
from arssa.oracle import win_probabilities
from arssa.validate import (
    GRID_COLUMNS,
    bench_select,
    max_z_score,
    mse_normalized,
    mse_sampling_noise,
    pooled_chisquare,
    run_grid,
    run_selection_experiment,
    write_grid_csv,
    write_reports_json,
)


class TestMse:
    def test_proportional(self):
        assert mse_normalized([1, 2, 3], [10, 20, 30]) == 0.0

    def test_hand_value(self):
        assert mse_normalized([3, 1], [1, 1]) == pytest.approx(0.0625, rel=1e-15)

    def test_errors(self):
        with pytest.raises(DegenerateDistributionError):
            mse_normalized([0, 0], [1, 1])
        with pytest.raises(DegenerateDistributionError):
            mse_normalized([1, 1], [0, 0])
        with pytest.raises(InvalidSizeError):
            mse_normalized([1, 1], [1, 1, 1])


class TestStatistics:
    def test_z_score_exact_counts(self):
        z, used = max_z_score([500, 250, 250], [0.5, 0.25, 0.25], 1000)
        assert z == 0.0 and used == 3

    def test_z_score_impossible_bin(self):
        z, _ = max_z_score([5, 1], [1.0, 0.0], 6)
        assert z == math.inf

    def test_z_score_hand_value(self):
        # (0.55 - 0.5) / sqrt(0.25 / 100) = 1
        z, _ = max_z_score([55, 45], [0.5, 0.5], 100)
        assert z == pytest.approx(1.0)

    def test_z_score_skips_sparse(self):
        z, used = max_z_score([97, 3], [0.999, 0.001], 100)
        assert used == 1

    def test_chisquare_pooling(self):
        stat, p, dof = pooled_chisquare([100, 100, 1, 0, 0], [0.5, 0.5, 1e-4, 1e-4, 1e-4])
        assert dof == 1
        assert p > 0.5

    def test_noise_shrinks(self):
        D = np.array([3.0, 1.0])
        law = [0.75, 0.25, 0.0]
        f1, _, s1 = mse_sampling_noise(D, law, 10**3)
        f2, _, s2 = mse_sampling_noise(D, law, 10**5)
        assert f1 == f2 == 0.0
        assert s2 < s1 / 30


class TestExperiment:
    def test_accounting_single(self):
        rep = run_selection_experiment([1.0, 2.0, 0.0], 1, 1)
        assert rep.counts.sum() + rep.rejections == 1

    @pytest.mark.parametrize("w", [1.0, 3.0])
    def test_accounting_general(self, w):
        rep = run_selection_experiment(gen_discrete_gaussian(32), 7, 1003, w=w, seed=2)
        assert rep.counts.sum() + rep.rejections == 1003
        assert rep.counts.size == 32

    def test_all_zero_row(self):
        rep = run_selection_experiment([0.0, 0.0], 2, 10)
        assert rep.rejections == 10 and math.isnan(rep.mse_vs_propensity)

    def test_total_below_k(self):
        with pytest.raises(ValueError):
            run_selection_experiment([1.0, 1.0], 10, 5)

    def test_reproducible(self):
        a = run_selection_experiment(gen_discrete_gaussian(64), 100, 10**5, seed=8)
        b = run_selection_experiment(gen_discrete_gaussian(64), 100, 10**5, seed=8, workers=4)
        np.testing.assert_array_equal(a.counts, b.counts)
        assert a.mse_vs_propensity == b.mse_vs_propensity

    def test_oracle_mse_scales_inverse_n(self):
        # at w=1 counts are multinomial under the oracle, so
        # E[mse_vs_oracle] = sum p(1-p) / (n M); one run scatters ~30% around it
        row = gen_discrete_gaussian(64)
        law = win_probabilities(row, row.values.max())
        p = law.per_reaction
        means = {}
        for n in (10**5, 2 * 10**5, 4 * 10**5):
            vals = [run_selection_experiment(row, 1000, n, seed=s, oracle=law).mse_vs_oracle
                    for s in range(48)]
            means[n] = np.mean(vals)
            assert means[n] == pytest.approx(np.sum(p * (1 - p)) / (n * 64), rel=0.2)
        assert 1.6 < means[10**5] / means[2 * 10**5] < 2.5
        assert 1.6 < means[2 * 10**5] / means[4 * 10**5] < 2.5


class TestGrid:
    def test_grid_and_outputs(self, tmp_path):
        dists = {"g16": gen_discrete_gaussian(16), "g8": gen_discrete_gaussian(8)}
        reps = run_grid(dists, Ks=(10, 20), ws=(1.0, 2.0), total_selections=1000, seed=3,
                        repeats=2)
        assert len(reps) == 2 * 2 * 2 * 2
        assert [r.seed for r in reps[:2]] == [3, 4]
        csv_path = tmp_path / "g.csv"
        write_grid_csv(reps, csv_path, header="cfg")
        lines = csv_path.read_text().splitlines()
        assert lines[0] == "# cfg"
        assert lines[1] == ",".join(GRID_COLUMNS)
        assert len(lines) == 2 + len(reps)
        js = tmp_path / "g.json"
        write_reports_json(reps, js, config={"seed": 3})
        doc = json.loads(js.read_text())
        assert len(doc["runs"]) == 16
        assert len(doc["worst_over_repeats"]) == 8
        w0 = doc["worst_over_repeats"][0]
        pair = [r for r in reps if (r.distribution, r.K, r.w) == (w0["distribution"], w0["K"], w0["w"])]
        assert w0["max_mse_vs_propensity"] == max(r.mse_vs_propensity for r in pair)


def test_bench_structure():
    res = bench_select(64, 100, 10, workers=2, repeats=3)
    assert set(res) >= {"M", "K", "rounds", "workers", "mean_s", "std_s", "per_selection_s"}
    assert res["mean_s"] > 0
    assert res["per_selection_s"] == pytest.approx(res["mean_s"] / 1000)
    with pytest.raises(ValueError):
        bench_select(64, 0, 10)
