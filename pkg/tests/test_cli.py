"""
Test suite for the command-line interface.
"""
import json
import os
from unittest.mock import MagicMock, patch

import numpy as np
import pytest

from gapminmax.cli import (
    EXIT_HYPOTHESIS,
    EXIT_OK,
    EXIT_PROPERTY,
    EXIT_USAGE,
    RunOutcome,
    build_parser,
    main,
)
from gapminmax.continuation import RefinementRun
from gapminmax.minmax import BracketError


@pytest.fixture
def out(tmp_path):
    return tmp_path / "out"


@pytest.fixture
def matrix_file(tmp_path):
    path = tmp_path / "op.txt"
    path.write_text("1 1\n1 0.5\n0.5 -1\n")
    return path


@pytest.fixture
def counterexample_file(tmp_path):
    path = tmp_path / "counter.txt"
    path.write_text("1 1\n-2 0\n0 -1\n")
    return path


def read_json(path):
    with open(path, 'r', encoding='utf-8') as f:
        return json.load(f)


class TestParser:
    """Test suite for argument parsing."""

    def test_subcommands(self):
        """Test that every subcommand is registered."""
        parser = build_parser()
        for argv in (["solve"], ["verify"], ["sweep"], ["hardy"], ["matrix", "m.txt"], ["report", "a.json"]):
            assert parser.parse_args(argv).subcommand == argv[0]

    def test_flag_destinations(self):
        """Test that flags map onto run configuration keys."""
        args = build_parser().parse_args(["solve", "--eps", "0.1", "--kmax", "3", "--r-max", "50"])
        assert args.epsilon == 0.1
        assert args.k_max == 3
        assert args.r_max == 50.0

    def test_usage_error_exit_code(self):
        """Test that argparse errors exit with code 1."""
        with pytest.raises(SystemExit) as exc_info:
            main(["solve", "--split", "diagonal"])
        assert exc_info.value.code == EXIT_USAGE

    def test_missing_subcommand(self):
        """Test that a subcommand is required."""
        with pytest.raises(SystemExit) as exc_info:
            main([])
        assert exc_info.value.code == EXIT_USAGE


class TestSolve:
    """Test suite for the solve subcommand."""

    def test_ground_state(self, out):
        """Test the kappa = -1 ground state and the written artifacts."""
        code = main(["solve", "--kappa", "-1", "--nu", "0.5", "--kmax", "1", "-o", str(out)])

        assert code == EXIT_OK
        payload = read_json(out / "solve.json")
        assert payload["splitting"] == "talman"
        assert payload["levels"][0]["lambda"] == pytest.approx(np.sqrt(0.75), rel=1e-6)
        assert payload["abs_error"][0] <= 1e-6
        assert payload["collapse_guard"]["passed"]
        k, value = (out / "levels.dat").read_text().split()
        assert k == "1" and float(value) == pytest.approx(np.sqrt(0.75), rel=1e-6)
        manifest = read_json(out / "manifest.json")
        assert manifest["exit_code"] == 0
        assert manifest["config"]["nu"] == 0.5
        assert manifest["artifacts"] == ["levels.dat", "solve.json"]

    def test_nu_one_rejected(self, out):
        """Test that nu = 1 is a usage error for solve."""
        assert main(["solve", "--nu", "1.0", "-o", str(out)]) == EXIT_USAGE

    def test_kappa_zero_rejected(self, out):
        """Test that kappa = 0 is a usage error."""
        assert main(["solve", "--kappa", "0", "-o", str(out)]) == EXIT_USAGE

    def test_empty_gap(self, out, capsys):
        """Test that V = 0 exits with code 2 and no artifacts."""
        code = main(["solve", "--nu", "0", "--n-intervals", "40", "--r-max", "60", "-o", str(out)])

        assert code == EXIT_HYPOTHESIS
        assert "no gap eigenvalue bracket" in capsys.readouterr().err
        assert not (out / "solve.json").exists()
        assert read_json(out / "manifest.json")["exit_code"] == EXIT_HYPOTHESIS

    @patch("gapminmax.cli.channel_spectrum", side_effect=BracketError("no gap eigenvalue bracket for k = 1"))
    def test_bracket_error_mapped(self, mock_spectrum, out):
        """Test that solver bracket errors map to exit code 2."""
        code = main(["solve", "--n-intervals", "20", "--r-max", "40", "--order", "4", "-o", str(out)])
        assert code == EXIT_HYPOTHESIS
        mock_spectrum.assert_called_once()

    def test_config_file(self, tmp_path, out):
        """Test that config file values are used and flags win."""
        config = tmp_path / "run.cfg"
        config.write_text("nu = 0.3\nkappa = 2\nn_intervals = 30\n")
        mock_run = MagicMock(return_value=RunOutcome())
        with patch.dict("gapminmax.cli.RUNNERS", {"solve": mock_run}):
            main(["solve", "--config", str(config), "--kappa", "-1", "-o", str(out)])
        cfg = mock_run.call_args[0][0]
        assert cfg.nu == 0.3
        assert cfg.kappa == -1
        assert cfg.n_intervals == 30

    @patch.dict(os.environ, {'GAPMINMAX_LOG_LEVEL': 'LOUD'})
    def test_invalid_environment(self, out):
        """Test that an invalid environment setting is a usage error."""
        assert main(["solve", "-o", str(out)]) == EXIT_USAGE


class TestMatrix:
    """Test suite for the matrix subcommand."""

    def test_levels(self, matrix_file, out):
        """Test solving an operator from a file."""
        assert main(["matrix", str(matrix_file), "-o", str(out)]) == EXIT_OK
        levels = read_json(out / "levels.json")
        assert levels[0]["lambda"] == pytest.approx(np.sqrt(1.25), abs=1e-9)
        text = (out / "levels.json").read_text()
        assert text.endswith("]\n")
        assert text == json.dumps(levels, indent=2, sort_keys=True) + "\n"

    def test_counterexample(self, counterexample_file, out):
        """Test that an operator failing the criterion exits with code 2."""
        assert main(["matrix", str(counterexample_file), "-o", str(out)]) == EXIT_HYPOTHESIS
        assert not (out / "levels.json").exists()

    def test_missing_file(self, tmp_path, out):
        """Test a missing matrix file."""
        assert main(["matrix", str(tmp_path / "none.txt"), "-o", str(out)]) == EXIT_USAGE


class TestVerify:
    """Test suite for the verify subcommand."""

    def test_fuzz(self, out):
        """Test a small fuzz run."""
        assert main(["verify", "--fuzz", "10", "--dim", "6", "--seed", "1", "-o", str(out)]) == EXIT_OK
        payload = read_json(out / "verify.json")
        assert payload["passed"]
        assert [r["name"] for r in payload["reports"]] == ["oracle-fuzz", "random-properties"]

    def test_matrix(self, matrix_file, out):
        """Test the property suites on a matrix file."""
        assert main(["verify", "--matrix", str(matrix_file), "-o", str(out)]) == EXIT_OK

    def test_counterexample_replay(self, counterexample_file, out):
        """Test that a failing instance exits with code 3 and is written for replay."""
        code = main(["verify", "--matrix", str(counterexample_file), "-o", str(out)])

        assert code == EXIT_PROPERTY
        replay = read_json(out / "replay.json")
        assert "matrix/hypothesis-iii" in replay["failed"]
        assert replay["instance"]["a"] == [[-2.0, 0.0], [0.0, -1.0]]
        assert not (out / "verify.json").exists()

    @pytest.mark.parametrize("flag", ["--lemma21", "--norm-bounds"])
    def test_norm_bounds_channel(self, out, flag):
        """Test the norm and sandwich bounds on a small Dirac channel under either flag."""
        code = main(["verify", flag, "--n-intervals", "20", "--order", "5", "--r-max", "40",
                     "-o", str(out)])
        assert code == EXIT_OK

    def test_same_seed_same_bytes(self, tmp_path):
        """Test that two runs with one seed write byte-identical artifacts."""
        argv = ["verify", "--fuzz", "8", "--dim", "8", "--seed", "11"]
        assert main(argv + ["-o", str(tmp_path / "first")]) == EXIT_OK
        assert main(argv + ["-o", str(tmp_path / "second")]) == EXIT_OK

        first = (tmp_path / "first" / "verify.json").read_bytes()
        assert first == (tmp_path / "second" / "verify.json").read_bytes()

    def test_nothing_to_verify(self, out):
        """Test that verify without a target is a usage error."""
        assert main(["verify", "-o", str(out)]) == EXIT_USAGE


class TestSweep:
    """Test suite for the sweep subcommand."""

    def test_nu_sweep(self, out):
        """Test a short sweep."""
        code = main(["sweep", "--kappa", "-1", "--eps", "0.1", "--nu-grid", "0:0.2:0.1",
                     "--n-intervals", "60", "--order", "6", "--r-max", "100", "-o", str(out)])

        assert code == EXIT_OK
        lines = (out / "sweep.csv").read_text().strip().splitlines()
        assert lines[0] == "nu,epsilon,lambda1,a_nu,pass"
        assert len(lines) == 4
        assert read_json(out / "sweep.json")["passed"]

    def test_sweep_needs_epsilon(self, out):
        """Test that a sweep without epsilon is a usage error."""
        assert main(["sweep", "--nu-grid", "0,0.1", "-o", str(out)]) == EXIT_USAGE

    def test_refine_needs_list(self, out):
        """Test that refinement without epsilons is a usage error."""
        assert main(["sweep", "--refine", "-o", str(out)]) == EXIT_USAGE

    @patch("gapminmax.cli.epsilon_refine")
    def test_refine_endpoint_off(self, mock_refine, out, capsys):
        """Test that a monotone refinement ending too far from the exact level exits with code 3."""
        exact = float(np.sqrt(0.75))
        mock_refine.return_value = RefinementRun(
            kappa=-1, nu=0.5, pairs=[(0.1, exact + 1e-3), (0.05, exact + 5e-4)], monotone=True,
            raw_final=exact + 5e-4, extrapolated=exact + 2e-4, reference=exact)

        code = main(["sweep", "--refine", "--nu", "0.5", "--eps-list", "0.1,0.05", "-o", str(out)])

        assert code == EXIT_PROPERTY
        assert "endpoint off by" in capsys.readouterr().err
        replay = read_json(out / "replay.json")
        assert replay["monotone"]
        assert replay["endpoint_error"] == pytest.approx(2e-4)
        assert not replay["passed"]

    @patch("gapminmax.cli.epsilon_refine")
    def test_refine_endpoint_close(self, mock_refine, out):
        """Test that an extrapolated limit within tolerance passes."""
        exact = float(np.sqrt(0.75))
        mock_refine.return_value = RefinementRun(
            kappa=-1, nu=0.5, pairs=[(0.1, exact + 1e-3), (0.05, exact + 5e-4)], monotone=True,
            raw_final=exact + 5e-4, extrapolated=exact + 2e-5, reference=exact)

        code = main(["sweep", "--refine", "--nu", "0.5", "--eps-list", "0.1,0.05", "-o", str(out)])

        assert code == EXIT_OK
        payload = read_json(out / "refine.json")
        assert payload["passed"]
        assert payload["endpoint_error"] == pytest.approx(2e-5)


class TestHardy:
    """Test suite for the hardy subcommand."""

    def test_bumps_at_critical_coupling(self, out):
        """Test bump margins at nu = 1."""
        code = main(["hardy", "--family", "bumps", "--nu", "1.0", "--n-intervals", "40", "-o", str(out)])

        assert code == EXIT_OK
        summary = read_json(out / "hardy_summary.json")
        gaps = summary["bump_convergence"]["relative_gap"]
        assert gaps[-1] < gaps[0]
        assert summary["summary"]["talman-homogeneous"]["passed"]

    def test_ground_state_equality(self, out):
        """Test the equality case."""
        assert main(["hardy", "--family", "ground-state", "--nu", "0.5", "-o", str(out)]) == EXIT_OK
        equality = read_json(out / "hardy_summary.json")["equality_case"]
        assert abs(equality["relative_margin"]) <= 1e-6

    def test_random_with_free_energy(self, out):
        """Test random margins including the discretized free-energy forms."""
        code = main(["hardy", "--family", "random", "--count", "10", "--nu", "0.5",
                     "--n-intervals", "60", "--order", "6", "-o", str(out)])

        assert code == EXIT_OK
        summary = read_json(out / "hardy_summary.json")["summary"]
        assert summary["free-energy-massive (discretized)"]["passed"]
        assert summary["free-energy-massless (discretized)"]["passed"]
        header = (out / "margins.csv").read_text().splitlines()[0]
        assert header == "tag,id,lhs,rhs,margin"

    def test_random_at_critical_coupling(self, out):
        """Test that both free-energy forms are evaluated and pass at nu = 1."""
        code = main(["hardy", "--family", "random", "--count", "8", "--nu", "1.0",
                     "--n-intervals", "40", "--order", "6", "-o", str(out)])

        assert code == EXIT_OK
        summary = read_json(out / "hardy_summary.json")["summary"]
        for tag in ("free-energy-massive (discretized)", "free-energy-massless (discretized)"):
            assert summary[tag]["count"] == 8
            assert summary[tag]["passed"]

    def test_ground_state_needs_subcritical_nu(self, out):
        """Test that the ground-state family rejects nu = 1."""
        assert main(["hardy", "--family", "ground-state", "--nu", "1.0", "-o", str(out)]) == EXIT_USAGE


class TestReport:
    """Test suite for the report subcommand."""

    def test_table(self, tmp_path, out, capsys):
        """Test tabulating JSON artifacts."""
        first = tmp_path / "a.json"
        first.write_text(json.dumps({"name": "a", "value": 1.5}))
        second = tmp_path / "b.json"
        second.write_text(json.dumps([{"k": 1, "lambda": 0.9}]))

        assert main(["report", str(first), str(second), "-o", str(out)]) == EXIT_OK
        table = (out / "report.txt").read_text()
        assert "a.json" in table and "b.json" in table
        assert "a.json" in capsys.readouterr().out

    def test_missing_input(self, tmp_path, out):
        """Test a missing input file."""
        assert main(["report", str(tmp_path / "none.json"), "-o", str(out)]) == EXIT_USAGE
