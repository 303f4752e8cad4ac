import numpy as np
import pytest

from harmbounds import (Dataset, FileFormatError, PositivityError, att_atu,
                        exp_potential_mean, estimate_observed_law,
                        format_dataset_csv, fused_potential_mean,
                        observed_from_full, parse_dataset_csv, random_law,
                        sample_dataset, validate_full_law)
from harmbounds.simulate import oracle_check


class TestRandomLaw:
    def test_deterministic_in_seed(self):
        assert random_law(7, n_levels=3) == random_law(7, n_levels=3)
        assert random_law(7) != random_law(8)

    @pytest.mark.parametrize("seed", range(50))
    def test_always_valid(self, seed):
        validate_full_law(random_law(seed, n_levels=1 + seed % 4))

    def test_ten_thousand_seeds_always_valid(self):
        for seed in range(10_000):
            validate_full_law(random_law(seed, n_levels=1 + seed % 4))

    def test_no_confounding_equalizes_intention_arms(self):
        law = random_law(5, n_levels=2, confounding=False)
        for l in law.levels:
            assert law.p_strata[(l, 0)] == law.p_strata[(l, 1)]
        obs = observed_from_full(law)
        att, atu = att_atu(obs, "l0")
        assert att == pytest.approx(atu, abs=1e-12)

    def test_rejects_zero_levels(self):
        with pytest.raises(ValueError):
            random_law(1, n_levels=0)


class TestSampling:
    def test_single_row(self, law_e1):
        data = sample_dataset(law_e1, 1, seed=3)
        assert data.n == 1
        assert data.r[0] in (0, 1)
        assert data.a[0] in (0, 1)
        assert data.y[0] in (0, 1)
        assert not data.has_oracle

    def test_deterministic_in_seed(self, law_e1):
        d1 = sample_dataset(law_e1, 500, seed=9, oracle=True)
        d2 = sample_dataset(law_e1, 500, seed=9, oracle=True)
        assert np.array_equal(d1.y, d2.y) and np.array_equal(d1.s, d2.s)

    def test_oracle_rows_respect_structure(self, law_e1):
        data = sample_dataset(law_e1, 5000, seed=11, oracle=True)
        obs_rows = data.r == 0
        assert np.array_equal(data.a[obs_rows], data.astar[obs_rows])
        oracle_check(data)

    def test_trial_arm_frequencies(self, law_e1):
        # binomial SE for the treated-arm mean at this n is about 0.00065
        data = sample_dataset(law_e1, 10**6, seed=1)
        treated = (data.r == 1) & (data.a == 1)
        freq = data.y[treated].mean()
        assert freq == pytest.approx(0.3, abs=0.002)

    def test_oracle_stratum_frequencies(self, law_e1):
        data = sample_dataset(law_e1, 200_000, seed=2, oracle=True)
        group = data.astar == 1
        n_group = group.sum()
        for s, expected in zip((1, 2, 3, 4), law_e1.p_strata[("l0", 1)]):
            freq = (data.s[group] == s).mean()
            se = np.sqrt(expected * (1 - expected) / n_group)
            assert abs(freq - expected) <= 3 * se + 1e-9, f"stratum {s}"


class TestEstimation:
    def test_recovers_push_forward(self, law_e1, obs_e1):
        data = sample_dataset(law_e1, 10**6, seed=4)
        est = estimate_observed_law(data)
        for r in (0, 1):
            for key, value in obs_e1.p_ya[("l0", r)].items():
                assert est.p_ya[("l0", r)][key] == pytest.approx(value, abs=0.005)

    def test_empty_block_error(self, law_e1):
        data = sample_dataset(law_e1, 50, seed=6)
        no_trial = Dataset(levels=data.levels, r=np.zeros_like(data.r),
                           level_idx=data.level_idx, a=data.a, y=data.y,
                           astar=None, s=None, seed=None)
        with pytest.raises(PositivityError, match=r"empty block \(level 'l0', R=1\)"):
            estimate_observed_law(no_trial)

    def test_empty_trial_arm_error(self, law_e1):
        data = sample_dataset(law_e1, 200, seed=6)
        all_treated = Dataset(levels=data.levels, r=data.r, level_idx=data.level_idx,
                              a=np.ones_like(data.a), y=data.y,
                              astar=None, s=None, seed=None)
        with pytest.raises(PositivityError, match="A=0"):
            estimate_observed_law(all_treated)

    def test_smoothing_fills_cells(self, law_e1):
        data = sample_dataset(law_e1, 3, seed=8)
        est = estimate_observed_law(data, smoothing=1.0)
        for block in est.p_ya.values():
            assert min(block.values()) > 0.0

    def test_negative_smoothing_rejected(self, law_e1):
        data = sample_dataset(law_e1, 10, seed=8)
        with pytest.raises(ValueError):
            estimate_observed_law(data, smoothing=-0.5)

    @pytest.mark.parametrize("seed", range(20))
    def test_end_to_end_consistency(self, seed):
        law = random_law(seed, n_levels=1)
        truth = observed_from_full(law)
        est = estimate_observed_law(sample_dataset(law, 10**6, seed=seed + 500))
        for l in law.levels:
            for a in (0, 1):
                assert exp_potential_mean(est, a, l) == pytest.approx(
                    exp_potential_mean(truth, a, l), abs=0.01)
                for astar in (0, 1):
                    assert fused_potential_mean(est, a, astar, l, tol=0.05) == pytest.approx(
                        fused_potential_mean(truth, a, astar, l), abs=0.01)


class TestCsv:
    def test_round_trip(self, law_e1):
        data = sample_dataset(law_e1, 100, seed=13, oracle=True)
        text = format_dataset_csv(data)
        assert text.startswith("# pcg64 seed=13 n=100\nR,L,A,Y,ASTAR,S\n")
        back = parse_dataset_csv(text)
        assert np.array_equal(back.y, data.y)
        assert np.array_equal(back.s, data.s)
        assert back.levels == data.levels

    def test_round_trip_without_oracle(self, law_e1):
        data = sample_dataset(law_e1, 100, seed=13)
        back = parse_dataset_csv(format_dataset_csv(data))
        assert not back.has_oracle
        assert np.array_equal(back.a, data.a)

    @pytest.mark.parametrize("text, message", [
        ("", "no header"),
        ("R,L,A\n", "must start with"),
        ("R,L,A,Y,EXTRA\n0,l0,0,0,1\n", "unrecognized dataset header"),
        ("R,L,A,Y\n0,l0,0\n", "expected 4 fields"),
        ("R,L,A,Y\n0,l0,0,x\n", "non-integer"),
        ("R,L,A,Y\n2,l0,0,0\n", "outside"),
        ("R,L,A,Y\n", "no rows"),
    ])
    def test_malformed(self, text, message):
        with pytest.raises(FileFormatError, match=message):
            parse_dataset_csv(text)
