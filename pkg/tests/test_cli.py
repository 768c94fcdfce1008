"""Command-line front-end tests: parsing, precedence, dispatch, determinism."""

import json

import numpy as np
import pytest

from mgstrat.cli import (
    OUTDIR_ENV,
    RunManifest,
    dispatch,
    main,
    parse_config,
)
from mgstrat.solver import NumericError


class TestParseConfig:
    def test_simulate_defaults(self):
        manifest = parse_config(["simulate"])
        assert manifest.subcommand == "simulate"
        assert manifest.params["n"] == 2001
        assert manifest.params["epsilon"] == 0.5
        assert manifest.params["steps"] == 10000
        assert manifest.seed == manifest.params["seed"]

    def test_epsilon_bound_names_the_key(self, capsys):
        code = main(["simulate", "--epsilon", "1.5"])
        assert code == 2
        assert "epsilon" in capsys.readouterr().err

    def test_even_population_names_the_key(self, capsys):
        code = main(["simulate", "--n", "2000"])
        assert code == 2
        assert "n must be odd" in capsys.readouterr().err

    def test_flag_beats_file_beats_default(self, tmp_path):
        config = tmp_path / "run.json"
        config.write_text(json.dumps({"epsilon": 0.3, "steps": 777}))
        file_only = parse_config(["simulate", "--config", str(config)])
        assert file_only.params["epsilon"] == 0.3
        assert file_only.params["steps"] == 777
        both = parse_config(
            ["simulate", "--config", str(config), "--epsilon", "0.7"]
        )
        assert both.params["epsilon"] == 0.7
        assert both.params["steps"] == 777  # file still beats default

    def test_config_file_argument_without_flag(self, tmp_path):
        config = tmp_path / "run.json"
        config.write_text(json.dumps({"n": 201}))
        manifest = parse_config(["simulate"], config_file=config)
        assert manifest.params["n"] == 201

    def test_unknown_config_key_rejected(self, tmp_path):
        config = tmp_path / "run.json"
        config.write_text(json.dumps({"populaton": 11}))
        with pytest.raises(ValueError, match="populaton"):
            parse_config(["simulate", "--config", str(config)])

    def test_malformed_config_file(self, tmp_path):
        config = tmp_path / "run.json"
        config.write_text("{not json")
        with pytest.raises(ValueError, match="not valid JSON"):
            parse_config(["simulate", "--config", str(config)])

    def test_missing_config_file(self, tmp_path):
        with pytest.raises(ValueError, match="not found"):
            parse_config(["simulate", "--config", str(tmp_path / "absent.json")])

    def test_mode_spelling_normalized(self):
        short = parse_config(["simulate", "--mode", "baseline"])
        long = parse_config(["simulate", "--mode", "random-baseline"])
        assert short.params["mode"] == long.params["mode"] == "random-baseline"

    def test_epsilons_range_expansion(self):
        manifest = parse_config(["sweep", "--epsilons", "0.1:0.9:0.1"])
        assert manifest.params["epsilons"] == pytest.approx(
            [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9]
        )

    def test_epsilons_comma_list_and_file_list(self, tmp_path):
        manifest = parse_config(["sweep", "--epsilons", "0.25,0.75"])
        assert manifest.params["epsilons"] == [0.25, 0.75]
        config = tmp_path / "run.json"
        config.write_text(json.dumps({"epsilons": [0.2, 0.4]}))
        manifest = parse_config(["sweep", "--config", str(config)])
        assert manifest.params["epsilons"] == [0.2, 0.4]

    def test_epsilons_validation(self, capsys):
        assert main(["sweep", "--epsilons", "0.5:2.0:0.5"]) == 2
        assert "epsilons" in capsys.readouterr().err
        assert main(["sweep", "--epsilons", "0.1:0.9"]) == 2
        assert "start:stop:step" in capsys.readouterr().err

    def test_stats_implies_choice_recording(self):
        manifest = parse_config(["simulate", "--stats"])
        assert manifest.params["record_choices"] is True
        assert "c_autocorr.csv" in manifest.outputs

    def test_outdir_resolution(self, monkeypatch, tmp_path):
        monkeypatch.delenv(OUTDIR_ENV, raising=False)
        assert parse_config(["kpr"]).outdir.name == "out"
        monkeypatch.setenv(OUTDIR_ENV, str(tmp_path / "envdir"))
        assert parse_config(["kpr"]).outdir == tmp_path / "envdir"
        flagged = parse_config(["kpr", "--outdir", str(tmp_path / "flagdir")])
        assert flagged.outdir == tmp_path / "flagdir"

    def test_usage_errors_from_argparse(self):
        assert main(["no-such-command"]) == 2
        assert main([]) == 2

    def test_manifest_hash_ignores_outdir_but_not_params(self, tmp_path):
        a = parse_config(["kpr", "--outdir", str(tmp_path / "x")])
        b = parse_config(["kpr", "--outdir", str(tmp_path / "y")])
        c = parse_config(["kpr", "--seed", "9", "--outdir", str(tmp_path / "x")])
        assert a.digest() == b.digest()
        assert a.digest() != c.digest()

    def test_kpr_allows_even_population(self):
        manifest = parse_config(["kpr", "--n", "64"])
        assert manifest.params["n"] == 64


class TestDispatch:
    def test_solve_lambda_reference_values(self, tmp_path):
        manifest = parse_config(
            ["solve-lambda", "--delta-max", "10", "--outdir", str(tmp_path)]
        )
        assert dispatch(manifest) == 0
        lines = (tmp_path / "lambda_table.csv").read_text().splitlines()
        assert lines[0].startswith("# mgstrat solve-lambda")
        assert manifest.digest() in lines[1]
        assert lines[2] == "delta,lambda,gap"
        rows = [line.split(",") for line in lines[3:]]
        assert len(rows) == 10
        table = {int(r[0]): float(r[1]) for r in rows}
        assert table[1] == pytest.approx(1.14619, abs=1e-5)
        assert table[10] == pytest.approx(10.16448, abs=1e-5)

    def test_every_csv_embeds_manifest_hash(self, tmp_path):
        manifest = parse_config(
            [
                "simulate",
                "--n",
                "201",
                "--steps",
                "400",
                "--stats",
                "--tau-max",
                "50",
                "--outdir",
                str(tmp_path),
            ]
        )
        assert dispatch(manifest) == 0
        digest = manifest.digest()
        for name in manifest.outputs:
            path = tmp_path / name
            assert path.exists(), name
            if name.endswith(".csv"):
                head = path.read_text().splitlines()[:2]
                assert head[0].startswith("#")
                assert digest in head[1]
            else:
                document = json.loads(path.read_text())
                assert next(iter(document)) == "manifest_hash"
                assert document["manifest_hash"] == digest

    def test_simulate_row_count_and_summary(self, tmp_path):
        code = main(
            ["simulate", "--n", "201", "--steps", "500", "--outdir", str(tmp_path)]
        )
        assert code == 0
        lines = (tmp_path / "trajectory.csv").read_text().splitlines()
        assert len(lines) == 3 + 501  # two comments, header, day 0..500
        summary = json.loads((tmp_path / "summary.json").read_text())
        assert summary["results"]["days"] == 501
        assert summary["results"]["eta"] > 0

    def test_payoff_table_monotone(self, tmp_path):
        assert main(["payoff-table", "--delta-max", "20", "--outdir", str(tmp_path)]) == 0
        lines = (tmp_path / "payoff_table.csv").read_text().splitlines()[3:]
        thin = [float(line.split(",")[2]) for line in lines]
        assert all(b < a for a, b in zip(thin, thin[1:]))

    def test_sweep_output_shape(self, tmp_path):
        code = main(
            [
                "sweep",
                "--n",
                "201",
                "--epsilons",
                "0.3,0.7",
                "--seeds",
                "3",
                "--steps",
                "500",
                "--outdir",
                str(tmp_path),
            ]
        )
        assert code == 0
        lines = (tmp_path / "sweep.csv").read_text().splitlines()
        assert lines[2] == "epsilon,eta_mean,eta_stderr,seeds"
        rows = [line.split(",") for line in lines[3:]]
        assert [float(r[0]) for r in rows] == [0.3, 0.7]
        assert all(float(r[2]) >= 0 for r in rows)
        assert all(int(r[3]) == 3 for r in rows)

    def test_kpr_output(self, tmp_path):
        code = main(
            [
                "kpr",
                "--n",
                "8",
                "--seeds",
                "10",
                "--max-steps",
                "200",
                "--outdir",
                str(tmp_path),
            ]
        )
        assert code == 0
        lines = (tmp_path / "kpr_runs.csv").read_text().splitlines()
        assert len(lines) == 3 + 10
        summary = json.loads((tmp_path / "summary.json").read_text())
        assert summary["results"]["converged"] == 10

    def test_byte_identical_reruns(self, tmp_path):
        args = ["simulate", "--n", "201", "--steps", "400", "--seed", "7", "--stats",
                "--tau-max", "50"]
        assert main(args + ["--outdir", str(tmp_path / "one")]) == 0
        assert main(args + ["--outdir", str(tmp_path / "two")]) == 0
        names = [p.name for p in sorted((tmp_path / "one").iterdir())]
        assert names
        for name in names:
            assert (tmp_path / "one" / name).read_bytes() == (
                tmp_path / "two" / name
            ).read_bytes(), name

    def test_numeric_failure_exit_code(self, tmp_path, monkeypatch, capsys):
        def explode(*args, **kwargs):
            raise NumericError("synthetic failure")

        monkeypatch.setattr("mgstrat.cli.solve_lambda", explode)
        code = main(["solve-lambda", "--outdir", str(tmp_path)])
        assert code == 3
        err = capsys.readouterr().err
        assert "numeric failure" in err
        assert "solver" in err

    def test_version_flag(self, capsys):
        code = main(["--version"])
        assert code == 0
        assert "mgstrat" in capsys.readouterr().out


class TestManifest:
    def test_document_round_trip(self, tmp_path):
        manifest = parse_config(["solve-lambda", "--outdir", str(tmp_path)])
        document = manifest.document()
        assert document["manifest_hash"] == manifest.digest()
        assert document["params"]["delta_max"] == 10
        assert document["outputs"][0] == "lambda_table.csv"
        assert isinstance(manifest, RunManifest)

    def test_hash_is_stable_literal(self):
        # canonical form is sorted compact JSON; the digest must not depend
        # on dict insertion order
        a = RunManifest("kpr", {"n": 8, "seeds": 2}, 1, "0.1.0", ("x.csv",), None)
        b = RunManifest("kpr", {"seeds": 2, "n": 8}, 1, "0.1.0", ("x.csv",), None)
        assert a.digest() == b.digest()
