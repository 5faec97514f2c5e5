"""
Test suite for the property checks and the dense-oracle fuzzer.
"""
import numpy as np
import pytest

from gapminmax.dirac import assemble_channel, coulomb_channel, talman_split
from gapminmax.minmax import (
    MinMaxSolution,
    check_hypotheses,
    dense_oracle,
    gap_constant,
    inertia_value,
    solve_levels,
)
from gapminmax.potentials import Coulomb
from gapminmax.splines import RadialGrid
from gapminmax.verification import (
    VerificationReport,
    collapse_guard,
    norm_bounds_suite,
    operator_payload,
    oracle_fuzz,
    random_counterexample,
    random_split_operator,
    sup_consistency_suite,
)


@pytest.fixture
def rng():
    return np.random.default_rng(42)


class TestVerificationReport:
    """Test suite for VerificationReport."""

    def test_add_and_failures(self):
        """Test that failing checks are collected."""
        report = VerificationReport(name="r")
        report.add("ok", True, 0.0)
        report.add("broken", False, 1.5, "detail")

        assert not report.passed
        assert [c.name for c in report.failures] == ["broken"]
        assert report.summary()["checks"][1]["value"] == 1.5

    def test_extend_prefixes_names(self):
        """Test that merged checks keep their origin."""
        inner = VerificationReport(name="inner", replay={"x": 1})
        inner.add("c", True)
        outer = VerificationReport(name="outer")
        outer.extend(inner)

        assert outer.checks[0].name == "inner/c"
        assert outer.replay == {"x": 1}


class TestGenerators:
    """Test suite for the random operator generators."""

    def test_random_operator_satisfies_criterion(self, rng):
        """Test that generated operators pass the hypothesis check."""
        op = random_split_operator(rng, 3, 2, margin=0.25)
        report = check_hypotheses(op)
        assert report.passed
        assert report.q_min_eigenvalue >= 0.25 - 1e-10
        assert inertia_value(op, gap_constant(op) + 0.5, 1) == pytest.approx(0.25, abs=1e-9)

    @pytest.mark.parametrize("separation", [0.1, 0.5, 2.0])
    def test_levels_separated_from_gap_constant(self, rng, separation):
        """Test that every level lies at least `separation` above a."""
        op = random_split_operator(rng, 4, 5, separation=separation)
        levels = op.spectrum[-op.dim_plus:]
        assert levels[0] >= gap_constant(op) + separation - 1e-9
        assert len(dense_oracle(op, (gap_constant(op), np.inf))) == op.dim_plus

    def test_separation_must_be_positive(self, rng):
        """Test that a zero separation is rejected."""
        with pytest.raises(ValueError, match="separation"):
            random_split_operator(rng, 2, 2, separation=0.0)

    def test_identity_gram_option(self, rng):
        """Test generation without Gram matrices."""
        op = random_split_operator(rng, 2, 2, gram=False)
        assert np.array_equal(op.gram(), np.eye(4))

    def test_plus_dimension_levels_above_trial_energy(self, rng):
        """Test that exactly dim_plus eigenvalues lie above the trial energy."""
        op = random_split_operator(rng, 4, 3)
        start = check_hypotheses(op).trial_energy
        assert len(dense_oracle(op, (start, np.inf))) == 4

    def test_payload(self):
        """Test the replay payload of the counterexample."""
        payload = operator_payload(random_counterexample())
        assert payload == {"dim_plus": 1, "dim_minus": 1,
                           "a": [[-2.0, 0.0], [0.0, -1.0]], "s": [[1.0, 0.0], [0.0, 1.0]]}


class TestPropertySuites:
    """Test suite for the graph-norm, sandwich and sup-consistency checks."""

    @pytest.mark.parametrize("dims", [(1, 1), (3, 4), (5, 2)])
    def test_norm_bounds_random(self, rng, dims):
        """Test the norm and sandwich bounds on random operators."""
        op = random_split_operator(rng, *dims)
        report = norm_bounds_suite(op, rng, samples=50)
        assert report.passed, report.failures
        assert report.replay is None

    def test_norm_bounds_dirac_channel(self, rng):
        """Test the norm and sandwich bounds on a small Dirac channel."""
        channel = assemble_channel(RadialGrid(r_max=40.0, n_intervals=20), 5, -1, Coulomb(nu=0.5))
        report = norm_bounds_suite(talman_split(channel), rng, samples=30)
        assert report.passed, report.failures

    def test_norm_bounds_reference_channel(self, rng):
        """Test the norm and sandwich bounds with 1000 samples on the nu = 0.5 channel."""
        report = norm_bounds_suite(talman_split(coulomb_channel(0.5)), rng, samples=1000)
        assert report.passed, report.failures
        assert {c.name for c in report.checks} == {
            "norm-lower", "norm-monotone", "norm-upper", "sandwich-lower", "sandwich-upper"}

    @pytest.mark.parametrize("dims", [(2, 2), (3, 5)])
    def test_sup_consistency(self, rng, dims):
        """Test the closed form of Q_E against a numerical maximization."""
        op = random_split_operator(rng, *dims)
        report = sup_consistency_suite(op, rng, samples=10)
        assert report.passed, report.failures

    def test_broken_operator_fails(self, rng):
        """Test that a corrupted graph norm is caught."""
        op = random_split_operator(rng, 2, 2)
        report = norm_bounds_suite(op, rng, samples=20, slack=-1.0)
        assert not report.passed
        assert report.replay["dim_plus"] == 2


class TestOracleFuzz:
    """Test suite for oracle_fuzz."""

    def test_fuzz_agrees(self):
        """Test agreement with the dense solver and rejection of the counterexample."""
        report = oracle_fuzz(20, max_dim=8, seed=3, max_workers=2)

        assert report.passed, report.failures
        assert [c.name for c in report.checks] == ["oracle-agreement", "counterexample-rejected"]
        assert report.checks[0].value <= 1e-9

    def test_reference_run(self):
        """Test 500 instances of dimension 4 to 12 with seed 7."""
        report = oracle_fuzz(500, max_dim=12, seed=7)

        assert report.passed, report.replay
        assert report.checks[0].value <= 1e-9

    @pytest.mark.parametrize("seed", range(5))
    def test_dimensions_up_to_forty(self, seed):
        """Test instances of dimension 4 to 40."""
        report = oracle_fuzz(40, max_dim=40, seed=seed)
        assert report.passed, report.replay

    def test_fuzz_is_reproducible(self):
        """Test that the same seed gives the same worst error."""
        first = oracle_fuzz(5, max_dim=6, seed=11, max_workers=2)
        second = oracle_fuzz(5, max_dim=6, seed=11, max_workers=1)
        assert first.checks[0].value == pytest.approx(second.checks[0].value, abs=1e-11)

    def test_invalid_dimensions(self):
        """Test that min_dim must not exceed max_dim."""
        with pytest.raises(ValueError):
            oracle_fuzz(1, max_dim=3, min_dim=5)


class TestCollapseGuard:
    """Test suite for collapse_guard."""

    def test_true_levels_pass(self, rng):
        """Test that min-max levels leave nothing below lambda_1."""
        op = random_split_operator(rng, 3, 3)
        check = collapse_guard(op, solve_levels(op, 3))
        assert check.passed
        assert check.value == 0.0

    def test_skipped_level_detected(self, rng):
        """Test that a level reported above a real eigenvalue is flagged."""
        op = random_split_operator(rng, 3, 3)
        levels = dense_oracle(op, (gap_constant(op), np.inf))
        fake = MinMaxSolution(k=1, lambda_=levels[1], bracket_lo=levels[1], bracket_hi=levels[1],
                              iterations=0)
        check = collapse_guard(op, [fake])
        assert not check.passed
        assert check.value == 1.0

    def test_empty_solutions(self, rng):
        """Test that at least one level is required."""
        with pytest.raises(ValueError):
            collapse_guard(random_split_operator(rng, 1, 1), [])
