import dataclasses

import pytest

from harmbounds import (FileFormatError, LawValidationError, STRATA,
                        format_law_text, observed_from_full, parse_law_text,
                        potential_outcome, random_law, stratum_from_outcomes,
                        stratum_margins, validate_full_law)
from harmbounds.laws import STRATUM_OUTCOMES

from conftest import make_law_e1


def test_stratum_outcome_bijection():
    pairs = set()
    for s in STRATA:
        pair = (potential_outcome(s, 1), potential_outcome(s, 0))
        assert STRATUM_OUTCOMES[s] == pair
        assert stratum_from_outcomes(*pair) == s
        pairs.add(pair)
    assert pairs == {(1, 0), (0, 1), (1, 1), (0, 0)}


class TestValidation:
    def test_fixture_is_valid(self, law_e1):
        assert validate_full_law(law_e1) is law_e1

    def test_unnormalized_stratum_block(self, law_e1):
        bad = dataclasses.replace(
            law_e1, p_strata={**law_e1.p_strata, ("l0", 1): (0.5, 0.5, 0.5, 0.5)})
        with pytest.raises(LawValidationError, match=r"astar=1.*sums to 2"):
            validate_full_law(bad)

    def test_point_mass_is_valid(self, law_e1):
        degenerate = dataclasses.replace(
            law_e1, p_strata={("l0", 1): (0.0, 0.0, 0.0, 1.0),
                              ("l0", 0): (0.0, 0.0, 0.0, 1.0)})
        validate_full_law(degenerate)

    def test_probability_out_of_range(self, law_e1):
        bad = dataclasses.replace(law_e1, p_astar={"l0": 1.5})
        with pytest.raises(LawValidationError, match="P\\(A\\*=1\\|L\\)"):
            validate_full_law(bad)

    def test_level_mass_must_normalize(self, law_e1):
        bad = dataclasses.replace(law_e1, p_level={"l0": 0.7})
        with pytest.raises(LawValidationError, match="P\\(L\\) sums"):
            validate_full_law(bad)


class TestPushForward:
    def test_fixture_blocks(self, obs_e1):
        assert obs_e1.p_y_given_a(1, "l0", 1) == pytest.approx(0.3, abs=1e-12)
        assert obs_e1.p_y_given_a(0, "l0", 1) == pytest.approx(0.5, abs=1e-12)
        assert obs_e1.p_joint(1, 1, "l0", 0) == pytest.approx(0.3, abs=1e-12)
        assert obs_e1.p_joint(1, 0, "l0", 0) == pytest.approx(0.3, abs=1e-12)
        assert obs_e1.p_joint(0, 1, "l0", 0) == pytest.approx(0.0, abs=1e-12)

    def test_fixture_matches_cell_enumeration(self, law_e1, obs_e1):
        # independent oracle: enumerate the eight (astar, stratum) cells
        for a in (0, 1):
            mean = 0.0
            for astar in (0, 1):
                w = law_e1.p_astar["l0"] if astar == 1 else 1 - law_e1.p_astar["l0"]
                block = law_e1.p_strata[("l0", astar)]
                mean += w * sum(block[s - 1] for s in STRATA if potential_outcome(s, a) == 1)
            assert obs_e1.p_y_given_a(a, "l0", 1) == pytest.approx(mean, abs=1e-12)

    def test_randomization_probability_respected(self, law_e1, obs_e1):
        assert obs_e1.p_a(1, "l0", 1) == pytest.approx(law_e1.p_treat["l0"], abs=1e-12)

    def test_nobody_dies_under_never_one_stratum(self, law_e1):
        law = dataclasses.replace(
            law_e1, p_strata={(l, a): (0.0, 0.0, 0.0, 1.0)
                              for l in law_e1.levels for a in (0, 1)})
        obs = observed_from_full(law)
        for r in (0, 1):
            for a in (0, 1):
                assert obs.p_joint(1, a, "l0", r) == 0.0

    def test_always_one_stratum_dies_in_both_arms(self, law_e1):
        law = dataclasses.replace(
            law_e1, p_strata={(l, a): (0.0, 0.0, 1.0, 0.0)
                              for l in law_e1.levels for a in (0, 1)})
        obs = observed_from_full(law)
        for a in (0, 1):
            assert obs.p_y_given_a(a, "l0", 1) == pytest.approx(1.0)

    @pytest.mark.parametrize("seed", range(50))
    def test_blocks_normalize_on_random_laws(self, seed):
        law = random_law(seed, n_levels=1 + seed % 3)
        obs = observed_from_full(law)
        for l in law.levels:
            for r in (0, 1):
                block = obs.p_ya[(l, r)]
                assert sum(block.values()) == pytest.approx(1.0, abs=1e-12)
                assert min(block.values()) >= 0.0

    def test_thousand_law_push_forward_sweep(self):
        for seed in range(1000):
            law = random_law(seed, n_levels=1 + seed % 3)
            obs = observed_from_full(law)
            for l in law.levels:
                probs = law.strata_marginal(l)
                _, _, ate = stratum_margins(law, l)
                assert abs(ate - (probs[0] - probs[1])) <= 1e-12
                for r in (0, 1):
                    assert abs(sum(obs.p_ya[(l, r)].values()) - 1.0) <= 1e-12


class TestStratumMargins:
    def test_fixture(self, law_e1):
        p_y1, p_y0, ate = stratum_margins(law_e1, "l0")
        assert p_y1 == pytest.approx(0.3, abs=1e-12)
        assert p_y0 == pytest.approx(0.5, abs=1e-12)
        assert ate == pytest.approx(-0.2, abs=1e-12)

    def test_equal_harm_and_benefit_mass_cancels(self, law_e1):
        law = dataclasses.replace(
            law_e1, p_strata={(l, a): (0.2, 0.2, 0.25, 0.35)
                              for l in law_e1.levels for a in (0, 1)})
        assert stratum_margins(law, "l0")[2] == pytest.approx(0.0, abs=1e-12)

    def test_pure_harm_law(self, law_e1):
        law = dataclasses.replace(
            law_e1, p_strata={(l, a): (1.0, 0.0, 0.0, 0.0)
                              for l in law_e1.levels for a in (0, 1)})
        assert stratum_margins(law, "l0") == (1.0, 0.0, 1.0)

    def test_unknown_level(self, law_e1):
        with pytest.raises(ValueError, match="unknown level"):
            stratum_margins(law_e1, "nope")

    @pytest.mark.parametrize("seed", range(100))
    def test_difference_identity_on_random_laws(self, seed):
        # the effect equals the harmed-minus-saved mass exactly
        law = random_law(seed, n_levels=2)
        for l in law.levels:
            probs = law.strata_marginal(l)
            _, _, ate = stratum_margins(law, l)
            assert ate == pytest.approx(probs[0] - probs[1], abs=1e-12)


class TestLawFiles:
    def test_round_trip(self, law_e1):
        assert parse_law_text(format_law_text(law_e1)) == law_e1

    def test_fixture_file_matches_fixture(self, e1_law_path, law_e1):
        with open(e1_law_path) as fh:
            assert parse_law_text(fh.read()) == law_e1

    def test_comments_and_blank_lines_ignored(self, law_e1):
        text = "# header\n\n" + format_law_text(law_e1) + "\n# tail\n"
        assert parse_law_text(text) == law_e1

    @pytest.mark.parametrize("mutate, message", [
        (lambda t: t.replace("ASTAR l0 0.3\n", ""), "missing ASTAR"),
        (lambda t: t.replace("TRIAL l0", "TRIAL lX"), "missing TRIAL record"),
        (lambda t: t + "ASTAR lX 0.5\n", "undeclared level"),
        (lambda t: t.replace("S l0 1", "S l0 2"), "astar must be 0 or 1"),
        (lambda t: t.replace("L l0 1.0", "L l0 one"), "not a number"),
        (lambda t: t.replace("TRIAL", "TREAL"), "unknown record kind"),
        (lambda t: t + "S l0 0 0.1 0.2 0.3 0.4\n", "duplicate S record"),
    ])
    def test_malformed_files(self, law_e1, mutate, message):
        text = format_law_text(law_e1)
        with pytest.raises(FileFormatError, match=message):
            parse_law_text(mutate(text))

    def test_error_carries_line_number(self, law_e1):
        text = format_law_text(law_e1).replace("ASTAR l0 0.3", "ASTAR l0 x")
        with pytest.raises(FileFormatError, match="line 3"):
            parse_law_text(text)

    def test_validation_applied_after_parse(self, law_e1):
        text = format_law_text(law_e1).replace(
            "S l0 1 0.3333333333333333 0.0 0.6666666666666666 0.0",
            "S l0 1 0.9 0.9 0.0 0.0")
        with pytest.raises(LawValidationError, match="sums to 1.8"):
            parse_law_text(text)


def test_make_law_helper_matches_fixture(law_e1):
    assert make_law_e1() == law_e1
