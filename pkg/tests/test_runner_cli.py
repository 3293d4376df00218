"""Artifact writing, invariant suites, and the command-line front end."""

import hashlib
import json

import pytest

from influence import ScenarioConfig, cli
from influence.runner import (
    format_verify_table,
    load_manifest_config,
    run_scenario,
    run_simulation,
    run_verify,
)

from conftest import make_ladder_poset


def accel_config(**kw):
    base = dict(kind="accelerated", r=0.02, phi0=0.0, n_events=10_000, window=500, seed=1)
    base.update(kw)
    return ScenarioConfig(**base)


class TestRunner:
    def test_artifacts_written(self, tmp_path):
        arts = run_simulation(accel_config(), tmp_path / "run", emit_poset=True)
        for path in (arts.trajectory_csv, arts.summary_json, arts.manifest_json, arts.poset_txt):
            assert path.exists()
        summary = json.loads(arts.summary_json.read_text())
        assert summary["kind"] == "accelerated"
        assert summary["n_windows"] == 20
        assert summary["tanh_fit_pass"] is True
        assert abs(summary["slope"] - 0.02) / 0.02 < 0.05

    def test_manifest_lists_outputs_with_valid_hashes(self, tmp_path):
        arts = run_simulation(accel_config(), tmp_path / "run")
        manifest = json.loads(arts.manifest_json.read_text())
        names = {o["name"] for o in manifest["outputs"]}
        assert names == {"trajectory.csv", "summary.json"}
        for entry in manifest["outputs"]:
            data = (tmp_path / "run" / entry["name"]).read_bytes()
            assert hashlib.sha256(data).hexdigest() == entry["sha256"]
            assert len(data) == entry["bytes"]

    def test_rerun_from_manifest_reproduces_outputs(self, tmp_path):
        arts = run_simulation(accel_config(seed=9), tmp_path / "a")
        config = load_manifest_config(arts.manifest_json)
        again = run_simulation(config, tmp_path / "b")
        assert arts.trajectory_csv.read_bytes() == again.trajectory_csv.read_bytes()
        assert arts.summary_json.read_bytes() == again.summary_json.read_bytes()

    def test_free_summary_has_no_fit_fields(self, tmp_path):
        cfg = ScenarioConfig(kind="free", pr_right=0.5, n_events=5000, window=100, seed=2)
        arts = run_simulation(cfg, tmp_path / "run")
        summary = json.loads(arts.summary_json.read_text())
        assert "tanh_fit_pass" not in summary
        assert summary["pr_right"] == 0.5


class TestVerifySuites:
    def test_all_pass_with_reduced_trials(self):
        results = run_verify(trials=300, seed=3)
        assert all(r.passed for r in results)
        names = {r.name for r in results}
        assert {"mass-shell", "minkowski", "product-preservation", "projection-oracle", "lorentz"} <= names

    def test_unknown_suite_is_config_error(self):
        from influence import ConfigError

        with pytest.raises(ConfigError, match="suite"):
            run_verify(suites=["nonesuch"])

    def test_fixture_checks_pass_on_good_poset(self):
        text = make_ladder_poset().to_text()
        results = run_verify(suites=["mass-shell"], trials=100, fixture_text=text)
        fixture = {r.name: r for r in results if r.name.startswith("fixture:")}
        assert fixture["fixture:well-formed"].passed
        assert fixture["fixture:projection-oracle"].passed
        assert fixture["fixture:coordination"].passed

    def test_broken_fixture_names_coordination(self):
        text = make_ladder_poset(drop_edge=4).to_text()
        results = run_verify(suites=["mass-shell"], trials=100, fixture_text=text)
        by_name = {r.name: r for r in results}
        assert not by_name["fixture:coordination"].passed
        assert not all(r.passed for r in results)

    def test_malformed_fixture_fails_well_formed(self):
        results = run_verify(suites=["mass-shell"], trials=100, fixture_text="garbage\n")
        by_name = {r.name: r for r in results}
        assert not by_name["fixture:well-formed"].passed

    def test_table_format(self):
        results = run_verify(suites=["mass-shell"], trials=100)
        table = format_verify_table(results)
        assert "mass-shell" in table
        assert "PASS" in table


class TestCliSimulate:
    def test_accel_run_and_exit_zero(self, tmp_path, capsys):
        out = tmp_path / "run"
        code = cli.main(
            [
                "simulate", "--kind", "accel", "--r", "0.02", "--phi0", "0",
                "--n", "10000", "--window", "500", "--seed", "42", "--out", str(out),
            ]
        )
        assert code == 0
        assert (out / "trajectory.csv").exists()
        assert (out / "summary.json").exists()
        assert (out / "manifest.json").exists()
        assert "slope" in capsys.readouterr().out

    def test_deterministic_bytes(self, tmp_path):
        args = [
            "simulate", "--kind", "accel", "--r", "0.02", "--phi0", "0",
            "--n", "10000", "--window", "500", "--seed", "42",
        ]
        assert cli.main(args + ["--out", str(tmp_path / "a")]) == 0
        assert cli.main(args + ["--out", str(tmp_path / "b")]) == 0
        for name in ("trajectory.csv", "summary.json"):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()

    def test_missing_field_exits_2_naming_it(self, tmp_path, capsys):
        code = cli.main(
            ["simulate", "--kind", "free", "--n", "10000", "--window", "100",
             "--out", str(tmp_path / "x")]
        )
        assert code == 2
        assert "pr_right" in capsys.readouterr().err

    def test_missing_kind_exits_2(self, tmp_path, capsys):
        code = cli.main(["simulate", "--n", "10000", "--window", "100", "--out", str(tmp_path / "x")])
        assert code == 2
        assert "kind" in capsys.readouterr().err

    def test_bad_flag_usage_exits_2(self, tmp_path):
        assert cli.main(["simulate", "--kind", "sideways", "--out", str(tmp_path)]) == 2

    def test_runtime_error_exits_3(self, tmp_path, capsys):
        # rate beyond the resolution bound fails mid-run, not at config time
        code = cli.main(
            ["simulate", "--kind", "accel", "--r", "5.0", "--phi0", "0",
             "--n", "10000", "--window", "500", "--out", str(tmp_path / "x")]
        )
        assert code == 3
        assert "receipts per emission" in capsys.readouterr().err

    def test_config_file_equivalent_to_flags(self, tmp_path):
        cfg_file = tmp_path / "scenario.cfg"
        cfg_file.write_text(
            "schema_version 1\nkind accelerated\nr 0.02\nphi0 0.0\n"
            "n_events 10000\nwindow 500\nseed 42\n"
        )
        assert cli.main(["simulate", "--config", str(cfg_file), "--out", str(tmp_path / "a")]) == 0
        assert cli.main(
            ["simulate", "--kind", "accel", "--r", "0.02", "--phi0", "0",
             "--n", "10000", "--window", "500", "--seed", "42", "--out", str(tmp_path / "b")]
        ) == 0
        assert (tmp_path / "a" / "trajectory.csv").read_bytes() == (
            tmp_path / "b" / "trajectory.csv"
        ).read_bytes()

    def test_flag_overrides_config_file(self, tmp_path):
        cfg_file = tmp_path / "scenario.cfg"
        cfg_file.write_text(
            "schema_version 1\nkind free\npr_right 0.5\nn_events 5000\nwindow 100\nseed 1\n"
        )
        code = cli.main(
            ["simulate", "--config", str(cfg_file), "--seed", "7", "--out", str(tmp_path / "a")]
        )
        assert code == 0
        summary = json.loads((tmp_path / "a" / "summary.json").read_text())
        assert summary["seed"] == 7

    def test_env_seed_fallback(self, tmp_path, monkeypatch):
        monkeypatch.setenv(cli.SEED_ENV_VAR, "123")
        code = cli.main(
            ["simulate", "--kind", "free", "--pr-right", "0.5", "--n", "5000",
             "--window", "100", "--out", str(tmp_path / "a")]
        )
        assert code == 0
        summary = json.loads((tmp_path / "a" / "summary.json").read_text())
        assert summary["seed"] == 123

    def test_from_manifest_rerun(self, tmp_path):
        args = [
            "simulate", "--kind", "accel", "--r", "0.02", "--phi0", "0",
            "--n", "10000", "--window", "500", "--seed", "5", "--out", str(tmp_path / "a"),
        ]
        assert cli.main(args) == 0
        assert cli.main(
            ["simulate", "--from-manifest", str(tmp_path / "a" / "manifest.json"),
             "--out", str(tmp_path / "b")]
        ) == 0
        assert (tmp_path / "a" / "trajectory.csv").read_bytes() == (
            tmp_path / "b" / "trajectory.csv"
        ).read_bytes()


class TestCliVerify:
    def test_default_suites_pass(self, capsys):
        assert cli.main(["verify", "--trials", "200", "--seed", "2"]) == 0
        out = capsys.readouterr().out
        assert "overall" in out and "PASS" in out

    def test_suite_filter(self, capsys):
        assert cli.main(["verify", "--suite", "mass-shell,lorentz", "--trials", "500"]) == 0
        out = capsys.readouterr().out
        assert "mass-shell" in out
        assert "projection-oracle" not in out

    def test_broken_fixture_exits_1_and_names_invariant(self, tmp_path, capsys):
        fixture = tmp_path / "broken.poset"
        fixture.write_text(make_ladder_poset(drop_edge=4).to_text())
        code = cli.main(
            ["verify", "--suite", "mass-shell", "--trials", "100", "--fixture", str(fixture)]
        )
        assert code == 1
        out = capsys.readouterr().out
        assert "fixture:coordination" in out
        assert "FAIL" in out

    def test_unknown_suite_exits_2(self, capsys):
        assert cli.main(["verify", "--suite", "bogus"]) == 2
        assert "suite" in capsys.readouterr().err


class TestCliPlot:
    def test_measured_csv_plot(self, tmp_path):
        out = tmp_path / "run"
        cli.main(
            ["simulate", "--kind", "accel", "--r", "0.02", "--phi0", "0",
             "--n", "10000", "--window", "500", "--seed", "42", "--out", str(out)]
        )
        svg_path = tmp_path / "beta.svg"
        assert cli.main(["plot", "--input", str(out / "trajectory.csv"), "--out", str(svg_path)]) == 0
        svg = svg_path.read_text()
        assert svg.startswith("<svg")
        assert 'class="sample"' in svg
        assert 'class="analytic"' in svg
        assert 'class="residual-band"' in svg

    def test_walk_poset_plot_has_three_right_two_left(self, tmp_path, five_step_poset):
        poset_file = tmp_path / "walk.poset"
        poset_file.write_text(five_step_poset.to_text())
        svg_path = tmp_path / "walk.svg"
        assert cli.main(["plot", "--input", str(poset_file), "--out", str(svg_path)]) == 0
        svg = svg_path.read_text()
        assert svg.count('class="emission-right"') == 3
        assert svg.count('class="emission-left"') == 2
        assert 'class="worldline"' in svg

    def test_plot_is_deterministic(self, tmp_path, five_step_poset):
        poset_file = tmp_path / "walk.poset"
        poset_file.write_text(five_step_poset.to_text())
        a, b = tmp_path / "a.svg", tmp_path / "b.svg"
        cli.main(["plot", "--input", str(poset_file), "--out", str(a)])
        cli.main(["plot", "--input", str(poset_file), "--out", str(b)])
        assert a.read_bytes() == b.read_bytes()

    def test_malformed_csv_exits_2(self, tmp_path, capsys):
        bad = tmp_path / "bad.csv"
        bad.write_text("tau_mid,beta_hat,stderr\n1.0,0.5\n")
        assert cli.main(["plot", "--input", str(bad), "--out", str(tmp_path / "x.svg")]) == 2
        assert "fields" in capsys.readouterr().err

    def test_missing_input_exits_2(self, tmp_path):
        assert cli.main(
            ["plot", "--input", str(tmp_path / "none.csv"), "--out", str(tmp_path / "x.svg")]
        ) == 2


class TestCliServerMode:
    @pytest.fixture
    def fake_server(self, monkeypatch):
        from fastapi.testclient import TestClient

        from influence import service

        client = TestClient(service.app, raise_server_exceptions=False)

        def fake_post(url, payload, timeout=600.0):
            path = "/" + url.split("/", 3)[3]
            response = client.post(path, json=payload)
            if response.status_code >= 400:
                from influence.errors import ConfigError

                raise ConfigError(f"server rejected request ({response.status_code})")
            return response.json()

        monkeypatch.setattr(cli, "_http_post", fake_post)
        return client

    def test_simulate_via_server_matches_local(self, tmp_path, fake_server):
        args = [
            "simulate", "--kind", "accel", "--r", "0.02", "--phi0", "0",
            "--n", "10000", "--window", "500", "--seed", "42",
        ]
        assert cli.main(args + ["--out", str(tmp_path / "local")]) == 0
        assert cli.main(
            args + ["--out", str(tmp_path / "remote"), "--server", "http://example.test"]
        ) == 0
        for name in ("trajectory.csv", "summary.json"):
            assert (tmp_path / "local" / name).read_bytes() == (
                tmp_path / "remote" / name
            ).read_bytes()

    def test_verify_via_server(self, fake_server, capsys):
        code = cli.main(
            ["verify", "--suite", "mass-shell", "--trials", "200",
             "--server", "http://example.test"]
        )
        assert code == 0
        assert "mass-shell" in capsys.readouterr().out
