import json

import pytest

from conftest import explicit_detector, make_config, make_scenario
from rsop.cli import main
from rsop.errors import ScenarioError
from rsop.experiments import (
    run_analyze,
    run_ppersistent_compare,
    run_simulate,
    run_upper_bound,
    write_csv,
)


@pytest.fixture
def small_scenario():
    config = make_config(n_su=2, n_pu=3, presence=0.1)
    return make_scenario(config, 5.1e-3, 0.3, explicit_detector(0.1, 0.9),
                         name="small")


class TestCsvWriter:
    def test_schema_mismatch_rejected(self, tmp_path):
        with pytest.raises(ScenarioError):
            write_csv(tmp_path / "x.csv", {}, ["a", "b"], [(1, 2, 3)])

    def test_headers_and_layout(self, tmp_path):
        path = write_csv(tmp_path / "x.csv", {"seed": 5}, ["a", "b"],
                         [(1, 2.5), (3, 0.125)])
        lines = path.read_text().splitlines()
        assert lines[0].startswith("# rsop ")
        assert "# seed: 5" in lines
        assert lines[2] == "a,b"
        assert lines[3] == "1,2.5"
        assert lines[4] == "3,0.125"


class TestReproducibility:
    def test_byte_identical_reruns(self, tmp_path, small_scenario):
        out_a, out_b = tmp_path / "a", tmp_path / "b"
        run_simulate(small_scenario, out_a, n_slots=300, seed=9)
        run_simulate(small_scenario, out_b, n_slots=300, seed=9)
        fa = (out_a / "simulate_point.csv").read_bytes()
        fb = (out_b / "simulate_point.csv").read_bytes()
        assert fa == fb

    def test_seed_changes_file(self, tmp_path, small_scenario):
        out_a, out_b = tmp_path / "a", tmp_path / "b"
        run_simulate(small_scenario, out_a, n_slots=300, seed=9)
        run_simulate(small_scenario, out_b, n_slots=300, seed=10)
        assert (out_a / "simulate_point.csv").read_bytes() != \
            (out_b / "simulate_point.csv").read_bytes()

    def test_headers_carry_scenario_hash(self, tmp_path, small_scenario):
        out = run_analyze(small_scenario, tmp_path, axis="p",
                          values=[0.2, 0.5], seed=1)
        text = out.files[0].read_text()
        assert f"# scenario_hash: {small_scenario.content_hash()}" in text
        manifest = json.loads((tmp_path / "analyze_p.manifest.json").read_text())
        assert "summary" in manifest


class TestKinds:
    def test_trace_export_capped(self, tmp_path, small_scenario):
        out = run_simulate(small_scenario, tmp_path, n_slots=100, seed=4,
                           trace_rows=17)
        trace = [f for f in out.files if f.name == "trace.csv"][0]
        lines = [l for l in trace.read_text().splitlines()
                 if not l.startswith("#")]
        assert len(lines) - 1 <= 17  # header + capped rows
        assert lines[0].startswith("slot,su,transmitted")

    def test_chain_detail_shape(self, tmp_path, small_scenario):
        out = run_analyze(small_scenario, tmp_path, axis="p", values=[0.3],
                          seed=1)
        detail = [f for f in out.files if f.name == "chain_detail.csv"][0]
        rows = [l for l in detail.read_text().splitlines()
                if not l.startswith("#")]
        n_stages = 1  # tau = 5.1 ms leaves no room for a second probe
        assert len(rows) - 1 == small_scenario.config.n_pu * n_stages

    def test_upper_bound_value(self, tmp_path):
        config = make_config(n_su=5, n_pu=5, presence=0.5)
        sc = make_scenario(config, 1e-3, 0.8, explicit_detector(0.1, 0.9))
        out = run_upper_bound(sc, tmp_path)
        assert out.summary["upper_bound"] == pytest.approx(2.5)

    def test_ppersistent_compare_summary(self, tmp_path, small_scenario):
        out = run_ppersistent_compare(small_scenario, tmp_path, n_slots=4000,
                                      seed=2)
        assert 0.0 < out.summary["overhead_reduction"] < 1.0
        assert out.summary["throughput_rel_diff"] < 0.2


class TestCli:
    def test_analyze_subcommand(self, tmp_path, capsys):
        rc = main(["analyze", "--scenario", "validation_ns2_np5",
                   "--out", str(tmp_path), "--axis", "p"])
        assert rc == 0
        captured = capsys.readouterr()
        assert "best_network_r" in captured.out
        assert (tmp_path / "analyze_p.csv").exists()

    def test_upper_bound_subcommand(self, tmp_path, capsys):
        rc = main(["upper-bound", "--scenario", "dense_ns20_np5",
                   "--out", str(tmp_path)])
        assert rc == 0
        assert "upper_bound: 2.5" in capsys.readouterr().out

    def test_scenarios_listing(self, capsys):
        assert main(["scenarios"]) == 0
        out = capsys.readouterr().out
        assert "dense_ns20_np5" in out

    def test_unknown_scenario_fails_cleanly(self, tmp_path, capsys):
        rc = main(["analyze", "--scenario", "nope", "--out", str(tmp_path)])
        assert rc == 2
        assert "error:" in capsys.readouterr().err
