"""
Test suite for radial potentials and their admissibility.
"""
import numpy as np
import pytest
from pydantic import ValidationError

from gapminmax.potentials import (
    Coulomb,
    RegularizedCoulomb,
    admissibility_margin,
    check_admissible,
    coulomb,
    coulomb_plus_bounded,
    load_tabulated,
    regularized_coulomb,
    tabulated,
)


class TestPotentials:
    """Test suite for potential evaluation."""

    def test_coulomb(self):
        """Test -nu/r and the singularity at the origin."""
        v = Coulomb(nu=0.5)

        assert v(np.array([2.0]))[0] == pytest.approx(-0.25)
        assert v.singular
        with pytest.raises(ValueError, match="singular"):
            v(np.array([0.0]))

    def test_zero_coupling(self):
        """Test that nu = 0 gives V = 0, regular at the origin."""
        v = Coulomb(nu=0.0)
        assert not v.singular
        assert np.array_equal(v(np.array([0.0, 1.0])), [0.0, 0.0])

    def test_regularized(self):
        """Test -nu/(r + eps) and its finite value at r = 0."""
        v = RegularizedCoulomb(nu=0.5, epsilon=0.1)
        assert not v.singular
        assert v(np.array([0.0]))[0] == pytest.approx(-5.0)

    def test_negative_radius(self):
        """Test that negative radii are rejected."""
        with pytest.raises(ValueError, match="nonnegative"):
            RegularizedCoulomb(nu=0.5, epsilon=0.1)(np.array([-1.0]))

    @pytest.mark.parametrize("nu", [-0.1, 1.5])
    def test_coupling_range(self, nu):
        """Test that nu must lie in [0, 1]."""
        with pytest.raises(ValidationError):
            Coulomb(nu=nu)

    def test_critical_coupling_accepted(self):
        """Test that nu = 1 builds a potential that is never admissible."""
        v = coulomb(1.0)
        report = check_admissible(v)

        assert v(np.array([2.0]))[0] == pytest.approx(-0.5)
        assert [c.name for c in report.failures] == ["admissible-constants"]

    def test_bounds_gap_reference(self):
        """Test c2 - m for both masses."""
        v = Coulomb(nu=0.5, c2=0.25)
        assert v.bounds_gap_reference() == pytest.approx(-0.75)
        assert v.bounds_gap_reference(mass=0.0) == pytest.approx(0.25)

    def test_regularized_dominates_coulomb(self):
        """Test -nu/(r + eps) >= -nu/r and growth of V with eps."""
        r = np.logspace(-6, 4, 200)
        exact = coulomb(0.7)(r)
        previous = exact
        for eps in (1e-4, 1e-2, 1.0):
            v = regularized_coulomb(0.7, eps)(r)
            assert np.all(v >= exact)
            assert np.all(v >= previous)
            previous = v

    def test_frozen(self):
        """Test that potentials are immutable."""
        v = Coulomb(nu=0.5)
        with pytest.raises(ValidationError):
            v.nu = 0.3

    def test_tabulated_extrapolates_constant(self):
        """Test linear interpolation and constant values beyond the table."""
        v = tabulated([0.0, 1.0, 2.0], [-1.0, -0.5, 0.0], order=1)

        assert v(np.array([0.5]))[0] == pytest.approx(-0.75)
        assert v(np.array([10.0]))[0] == pytest.approx(0.0)
        assert not v.singular

    def test_tabulated_needs_increasing_radii(self):
        """Test that r samples must increase."""
        with pytest.raises(ValidationError, match="increasing"):
            tabulated([0.0, 2.0, 1.0], [0.0, 0.0, 0.0], order=1)

    def test_coulomb_plus_bounded(self):
        """Test the sum of -nu/r and the tabulated part."""
        v = coulomb_plus_bounded(0.5, [0.0, 1.0, 2.0], [0.1, 0.1, 0.1], c1=0.0, c2=0.1, order=1)
        assert v(np.array([1.0]))[0] == pytest.approx(-0.4)
        assert v.singular

    def test_load_tabulated(self, tmp_path):
        """Test loading a two-column table."""
        path = tmp_path / "v.dat"
        path.write_text("# r V\n0 -1\n1 -0.5\n2 0\n3 0\n")

        v = load_tabulated(path, order=1)

        assert v(np.array([1.5]))[0] == pytest.approx(-0.25)

    def test_load_tabulated_errors(self, tmp_path):
        """Test missing files and wrong column counts."""
        with pytest.raises(FileNotFoundError):
            load_tabulated(tmp_path / "missing.dat")
        path = tmp_path / "v.dat"
        path.write_text("0 1 2\n1 2 3\n")
        with pytest.raises(ValueError, match="two columns"):
            load_tabulated(path)


class TestAdmissibility:
    """Test suite for check_admissible."""

    def test_margin(self):
        """Test sqrt(1 - nu^2) - (c1 + c2 - 1)."""
        assert admissibility_margin(0.0, 0.0, 0.0) == pytest.approx(2.0)
        assert admissibility_margin(0.6, 0.5, 0.5) == pytest.approx(0.8)

    @pytest.mark.parametrize("potential", [
        Coulomb(nu=0.5),
        RegularizedCoulomb(nu=0.9, epsilon=0.01),
    ])
    def test_coulomb_admissible(self, potential):
        """Test that Coulomb potentials pass every check."""
        report = check_admissible(potential)

        assert report.passed
        margin = [c for c in report.checks if c.name == "admissible-constants"][0].value
        assert margin == pytest.approx(admissibility_margin(potential.nu, 0.0, 0.0))

    def test_inadmissible_constants(self):
        """Test that c1 + c2 - 1 >= sqrt(1 - nu^2) is rejected."""
        report = check_admissible(Coulomb(nu=0.5, c1=1.0, c2=1.0))

        assert not report.passed
        assert [c.name for c in report.failures] == ["admissible-constants"]

    def test_positive_tail_fails(self):
        """Test that a potential not decaying at infinity and above c2 is flagged."""
        report = check_admissible(tabulated([0.0, 1.0, 2.0], [1.0, 1.0, 1.0], order=1))

        failed = {c.name for c in report.failures}
        assert "decay" in failed
        assert "upper-bound" in failed

    def test_margin_decreases_with_coupling(self):
        """Test that the admissibility margin of -nu/r shrinks as nu grows."""
        nus = np.linspace(0.0, 0.99, 12)
        margins = [admissibility_margin(nu, 0.0, 0.0) for nu in nus]
        assert all(b < a for a, b in zip(margins, margins[1:]))

        values = [check_admissible(coulomb(nu)).checks[-1].value for nu in nus]
        assert values == pytest.approx(margins)
