"""
Test suite for the Hardy-type inequality margins.
"""
import numpy as np
import pytest
from pydantic import ValidationError

from gapminmax.dirac import assemble_channel, coulomb_channel
from gapminmax.inequalities import (
    MarginRecord,
    RadialSample,
    TestFamily,
    bump_convergence,
    free_energy_inequality_margin,
    ground_state_sample,
    hardy_classical_margin,
    massless_free_energy_margin,
    near_origin_bumps,
    random_spline_functions,
    summarize,
    talman_homogeneous_margin,
    talman_inhomogeneous,
    talman_inhomogeneous_margin,
    to_frame,
)
from gapminmax.potentials import coulomb, regularized_coulomb
from gapminmax.splines import RadialGrid

NU = 0.5


@pytest.fixture(scope="module")
def channel():
    return coulomb_channel(NU, kappa=-1, n_intervals=60, order=6)


@pytest.fixture(scope="module")
def random_samples(channel):
    return random_spline_functions(channel, 20, seed=5)


class TestMarginRecord:
    """Test suite for MarginRecord."""

    def test_margin_and_relative(self):
        """Test margin = rhs - lhs and its scaled value."""
        record = MarginRecord(tag="t", function_id="f", lhs=2.0, rhs=3.0)
        assert record.margin == 1.0
        assert record.relative == pytest.approx(1.0 / 3.0)

    def test_zero_function_rejected(self):
        """Test that an identically zero sample is rejected."""
        with pytest.raises(ValidationError, match="identically zero"):
            RadialSample(function_id="zero", nodes=np.ones(3), weights=np.ones(3),
                         f=np.zeros(3), df=np.zeros(3))


class TestFamilies:
    """Test suite for the test-function generators."""

    def test_random_family(self, channel):
        """Test that random samples live on the channel quadrature."""
        samples = TestFamily(tag="random", count=4, seed=1).generate(channel)
        assert len(samples) == 4
        assert samples[0].nodes is channel.nodes
        assert samples[0].coefficients.shape == (channel.dim_f,)

    def test_bumps_family(self, channel):
        """Test one bump per scale supported on [0, s]."""
        samples = TestFamily(tag="bumps", scales=[1.0, 0.5]).generate(channel)
        assert [s.function_id for s in samples] == ["bump-1", "bump-0.5"]
        assert samples[1].nodes.max() < 0.5

    def test_bump_scale_must_be_positive(self):
        """Test that a zero scale is rejected."""
        with pytest.raises(ValueError, match="positive"):
            near_origin_bumps([0.0])


class TestInequalities:
    """Test suite for the inequality margins."""

    def test_inhomogeneous_random(self, random_samples):
        """Test the inhomogeneous inequality on random splines."""
        records = talman_inhomogeneous_margin(random_samples, NU, -1)
        assert min(r.relative for r in records) >= -1e-10

    @pytest.mark.parametrize("kappa", [-1, 1, -2])
    def test_homogeneous_random(self, random_samples, kappa):
        """Test int f^2/r <= int r (f' + kappa f/r)^2."""
        records = talman_homogeneous_margin(random_samples, kappa)
        assert min(r.relative for r in records) >= -1e-10

    def test_hardy_classical(self, random_samples):
        """Test int f^2/r^2 <= 4 int f'^2."""
        records = hardy_classical_margin(random_samples + near_origin_bumps([1.0, 0.1]))
        assert min(r.relative for r in records) >= -1e-10

    def test_critical_coupling(self, random_samples):
        """Test the inhomogeneous inequality at nu = 1."""
        records = talman_inhomogeneous_margin(random_samples, 1.0, -1)
        assert min(r.relative for r in records) >= -1e-10

    def test_nu_out_of_range(self, random_samples):
        """Test that nu must lie in [0, 1]."""
        with pytest.raises(ValueError, match="nu must lie"):
            talman_inhomogeneous(random_samples[0], 1.5, -1)

    def test_ground_state_equality(self, channel):
        """Test equality for r^gamma exp(-nu r)."""
        record = talman_inhomogeneous(ground_state_sample(channel, NU), NU, -1)
        assert abs(record.relative) <= 1e-6

    def test_bump_convergence(self):
        """Test that the inhomogeneous margin approaches the homogeneous one near the origin."""
        gaps = bump_convergence(-1)
        assert len(gaps) == 4
        assert all(b < a for a, b in zip(gaps, gaps[1:]))
        assert gaps[-1] < 0.1

    def test_free_energy_massive(self, channel):
        """Test the discretized free-energy inequality for m = 1."""
        records = free_energy_inequality_margin(channel, NU, count=10, seed=2)
        summary = summarize(records)

        tag = "free-energy-massive (discretized)"
        assert summary[tag]["count"] == 10
        assert summary[tag]["passed"]

    def test_free_energy_massive_critical(self):
        """Test the m = 1 inequality at nu = 1, where E = 0."""
        critical = coulomb_channel(1.0, kappa=-1, n_intervals=60, order=6)
        records = free_energy_inequality_margin(critical, 1.0, count=10, seed=3)

        assert summarize(records)["free-energy-massive (discretized)"]["passed"]

    @pytest.mark.parametrize("kappa", [-1, 1])
    def test_free_energy_massless(self, kappa):
        """Test the homogeneous m = 0 inequality with V = -1/r and E = 0."""
        grid = RadialGrid(r_max=60.0, n_intervals=40, stretch=1.15)
        records = massless_free_energy_margin(grid, 6, kappa, count=10, seed=4)
        summary = summarize(records)

        tag = "free-energy-massless (discretized)"
        assert summary[tag]["count"] == 10
        assert summary[tag]["passed"]

    def test_massless_needs_critical_coupling(self):
        """Test that the m = 0 form is only defined at nu = 1."""
        grid = RadialGrid(r_max=60.0, n_intervals=20)
        massless = assemble_channel(grid, 5, -1, coulomb(0.5), mass=0.0)
        with pytest.raises(ValueError, match="needs nu = 1"):
            free_energy_inequality_margin(massless, 0.5, count=2)

    def test_free_energy_needs_matching_coulomb(self, channel):
        """Test that the channel must carry exactly -nu/r."""
        with pytest.raises(ValueError, match="channel must carry"):
            free_energy_inequality_margin(channel, 0.7, count=2)
        regularized = assemble_channel(RadialGrid(r_max=60.0, n_intervals=20), 5, -1,
                                       regularized_coulomb(NU, 0.1))
        with pytest.raises(ValueError, match="channel must carry"):
            free_energy_inequality_margin(regularized, NU, count=2)


class TestReporting:
    """Test suite for tables and summaries."""

    def test_frame(self, random_samples):
        """Test the CSV table layout."""
        frame = to_frame(hardy_classical_margin(random_samples[:3]))
        assert list(frame.columns) == ["tag", "id", "lhs", "rhs", "margin"]
        assert frame["id"].tolist() == ["random-0", "random-1", "random-2"]

    def test_summary_flags_violation(self):
        """Test that a negative relative margin beyond tolerance fails."""
        records = [
            MarginRecord(tag="hardy-classical", function_id="a", lhs=1.0, rhs=2.0),
            MarginRecord(tag="hardy-classical", function_id="b", lhs=2.0, rhs=1.0),
        ]
        summary = summarize(records)["hardy-classical"]
        assert not summary["passed"]
        assert summary["min_margin"] == -1.0
        assert summary["tolerance"] == 1e-10

    def test_summary_custom_tolerance(self):
        """Test per-tag tolerances."""
        records = [MarginRecord(tag="x", function_id="a", lhs=1.0, rhs=1.0 - 1e-9)]
        assert summarize(records, {"x": 1e-6})["x"]["passed"]
