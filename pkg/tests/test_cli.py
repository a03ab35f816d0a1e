"""End-to-end tests of the paritylab command line."""

import json

import pytest
from click.testing import CliRunner

from paritylab_cli.main import cli


@pytest.fixture()
def runner():
    return CliRunner()


@pytest.fixture()
def invoke(runner, tmp_path):
    """Run the CLI with the artifact written to a file; returns (result, artifact text)."""

    def _invoke(*args):
        out = tmp_path / "artifact.out"
        if out.exists():
            out.unlink()
        result = runner.invoke(cli, ["--out", str(out), *args])
        return result, out.read_text() if out.exists() else ""

    return _invoke


def _csv_rows(text: str) -> list[list[str]]:
    lines = text.splitlines()
    assert lines[0].startswith("# config=")
    return [line.split(",") for line in lines[1:]]


# ── run ─────────────────────────────────────────────────────


def test_run_positive_d4(invoke):
    result, text = invoke("run", "--d", "4", "--m", "3", "--sign", "+")
    assert result.exit_code == 0, result.output
    data = json.loads(text)
    assert data["parity"] == "positive"
    assert data["success_prob"] == 1.0
    assert data["queries_used"] == 1
    assert data["distribution"] == [0.0, 1.0, 0.0, 0.0]
    assert data["config"]["command"] == "run"


def test_run_negative_d5(invoke):
    result, text = invoke("run", "--d", "5", "--m", "2", "--sign", "-")
    assert result.exit_code == 0, result.output
    data = json.loads(text)
    assert data["parity"] == "negative"
    assert data["distribution"][4] == 1.0


def test_run_rejects_d2(invoke):
    result, text = invoke("run", "--d", "2")
    assert result.exit_code == 3
    assert text == ""


def test_run_photonic_ideal(invoke):
    result, text = invoke("run", "--m", "1", "--sign", "-", "--noise", "ideal", "--shots", "1000")
    assert result.exit_code == 0, result.output
    data = json.loads(text)
    assert data["counts"]["VV"] == 1000
    assert data["parity"] == "negative"


def test_run_photonic_calibrated_is_seeded(invoke):
    args = ("--seed", "11", "run", "--m", "2", "--noise", "calibrated", "--shots", "5000")
    first = invoke(*args)[1]
    second = invoke(*args)[1]
    assert first == second
    data = json.loads(first)
    assert 0.85 < data["success_prob"] < 1.0
    assert data["config"]["seed"] == 11


def test_run_photonic_needs_d4(invoke):
    result, _ = invoke("run", "--d", "5", "--noise", "ideal")
    assert result.exit_code == 4


def test_run_photonic_rejects_zero_shots(invoke):
    result, text = invoke("run", "--noise", "ideal", "--shots", "0")
    assert result.exit_code == 3, result.output
    assert text == ""


def test_run_photonic_reports_oracle_queries(invoke):
    result, text = invoke("run", "--m", "2", "--noise", "calibrated", "--shots", "500")
    assert result.exit_code == 0, result.output
    assert json.loads(text)["queries_used"] == 1


# ── sweep ───────────────────────────────────────────────────


def test_sweep_ideal_dimensions(invoke):
    result, text = invoke("sweep", "--d-range", "3:5")
    assert result.exit_code == 0, result.output
    rows = _csv_rows(text)
    assert rows[0][:4] == ["spec", "d", "outcome", "label"]
    body = [r for r in rows[1:] if r[0].startswith("f_")]
    assert len(body) == sum(2 * d * d for d in (3, 4, 5))
    average = next(r for r in rows if r[0] == "average")
    assert float(average[6]) == pytest.approx(1.0)


def test_sweep_ideal_noise_json(invoke):
    result, text = invoke("--format", "json", "sweep", "--noise", "ideal", "--shots", "500", "--repeats", "2")
    assert result.exit_code == 0, result.output
    data = json.loads(text)
    assert len(data["results"]) == 8
    assert data["average_success"] == pytest.approx(1.0)
    assert data["reference_average_success"] == pytest.approx(0.93023)


def test_sweep_bad_range(invoke):
    result, _ = invoke("sweep", "--d-range", "three:five")
    assert result.exit_code == 7


@pytest.mark.parametrize("option", ["--repeats", "--shots"])
def test_sweep_rejects_zero_counts(invoke, option):
    result, text = invoke("sweep", "--noise", "ideal", option, "0")
    assert result.exit_code == 3, result.output
    assert text == ""


# ── hom ─────────────────────────────────────────────────────


def test_hom_csv(invoke):
    result, text = invoke("hom")
    assert result.exit_code == 0, result.output
    rows = _csv_rows(text)
    assert rows[0] == ["delay", "coincidence"]
    scan = {float(d): float(p) for d, p in rows[1:]}
    assert len(scan) == 61
    assert scan[0.0] == pytest.approx((1 - 0.92459) / 2, abs=1e-6)
    assert scan[-300.0] == pytest.approx(0.5, abs=1e-3)


def test_hom_perfect_overlap(invoke):
    result, text = invoke("--format", "json", "hom", "--delays", "-50:50:50", "--beta0", "1.0")
    assert result.exit_code == 0, result.output
    data = json.loads(text)
    assert data["visibility"] == 1.0
    assert [s["delay"] for s in data["scan"]] == [-50.0, 0.0, 50.0]
    assert data["scan"][1]["coincidence"] == 0.0


# ── lower-bound ─────────────────────────────────────────────


def test_lower_bound_d4(invoke):
    result, text = invoke("lower-bound", "--d", "4")
    assert result.exit_code == 0, result.output
    data = json.loads(text)
    assert data["best_one_query_worst_case"] == 0.5
    assert data["two_query_success"] == 1.0
    assert data["speedup"]["ratio"] == 2.0
    assert len(data["witness_pairs"]) == 16


def test_lower_bound_out_of_range(invoke):
    result, _ = invoke("lower-bound", "--d", "9")
    assert result.exit_code == 3


# ── tomo ────────────────────────────────────────────────────


def test_tomo_simulated_ideal(invoke):
    result, text = invoke("tomo", "--simulate", "--noise", "ideal", "--shots", "10000")
    assert result.exit_code == 0, result.output
    data = json.loads(text)
    assert data["fidelity"] > 0.995
    assert data["true_fidelity"] == pytest.approx(1.0)
    assert data["reference_fidelity"] == pytest.approx(0.8918)


def test_tomo_simulated_calibrated_with_spread(invoke):
    result, text = invoke("tomo", "--simulate", "--settings", "minimal", "--shots", "2000", "--resamples", "3")
    assert result.exit_code == 0, result.output
    data = json.loads(text)
    assert 0.85 < data["fidelity"] < 0.99
    assert data["fidelity_spread"]["resamples"] == 3


def test_tomo_counts_file(invoke, tmp_path):
    counts = [
        {"setting": [a, b], "counts": {o: 250 for o in (a + b, a + o2, o1 + b, o1 + o2)}}
        for a, o1 in (("H", "V"), ("D", "A"), ("R", "L"))
        for b, o2 in (("H", "V"), ("D", "A"), ("R", "L"))
    ]
    path = tmp_path / "counts.json"
    path.write_text(json.dumps(counts))
    result, text = invoke("tomo", "--counts", str(path), "--target", "none")
    assert result.exit_code == 0, result.output
    data = json.loads(text)
    assert data["purity"] == pytest.approx(0.25, abs=1e-4)
    assert "fidelity" not in data


def test_tomo_malformed_counts(invoke, tmp_path):
    path = tmp_path / "counts.json"
    path.write_text('[{"setting": ["H", "H"], "counts": {"HH": -3}}]')
    result, _ = invoke("tomo", "--counts", str(path))
    assert result.exit_code == 7
    path.write_text("{not json")
    result, _ = invoke("tomo", "--counts", str(path))
    assert result.exit_code == 7


def test_tomo_needs_a_source(invoke):
    result, _ = invoke("tomo")
    assert result.exit_code == 2


def test_tomo_rejects_zero_shots(invoke):
    result, text = invoke("tomo", "--simulate", "--noise", "ideal", "--shots", "0")
    assert result.exit_code == 6, result.output
    assert text == ""


# ── explore-cnot ────────────────────────────────────────────


def test_explore_cnot_angle(invoke):
    result, text = invoke("explore-cnot", "--hwp2", "22.5")
    assert result.exit_code == 0, result.output
    data = json.loads(text)
    assert data["hwp2_deg"] == 22.5
    assert len(data["matrix"]) == 4


def test_explore_cnot_network_file(invoke, tmp_path):
    path = tmp_path / "net.json"
    path.write_text(json.dumps([{"kind": "bd", "mode": 0}, {"kind": "bd", "mode": 0}]))
    result, text = invoke("explore-cnot", "--network", str(path))
    assert result.exit_code == 0, result.output
    data = json.loads(text)
    assert data["cnot_overlap"] == pytest.approx(0.25)


# ── configuration ───────────────────────────────────────────


def test_config_file_fills_defaults(invoke, tmp_path):
    path = tmp_path / "run.json"
    path.write_text(json.dumps({"seed": 7, "run": {"d": 5, "m": 2, "sign": "-"}}))
    result, text = invoke("--config", str(path), "run", "--m", "1")
    assert result.exit_code == 0, result.output
    data = json.loads(text)
    assert data["config"]["seed"] == 7
    assert data["spec"] == {"d": 5, "m": 1, "sign": "-", "label": "f_1^-"}


def test_config_file_rejects_unknown_options(invoke, tmp_path):
    path = tmp_path / "run.json"
    path.write_text(json.dumps({"run": {"qubits": 3}}))
    result, _ = invoke("--config", str(path), "run")
    assert result.exit_code == 7


@pytest.mark.parametrize(
    "config",
    [
        {"run": {"m": 2.7}},
        {"run": {"d": "four"}},
        {"run": {"m": True}},
        {"seed": "abc"},
        {"format": "xml"},
        {"log_level": "LOUD"},
    ],
)
def test_config_file_values_are_type_checked(invoke, tmp_path, config):
    path = tmp_path / "run.json"
    path.write_text(json.dumps(config))
    result, text = invoke("--config", str(path), "run")
    assert result.exit_code == 7, result.output
    assert text == ""


def test_config_file_converts_numeric_strings(invoke, tmp_path):
    path = tmp_path / "run.json"
    path.write_text(json.dumps({"seed": "9", "run": {"d": "5", "m": 3.0, "sign": "+"}}))
    result, text = invoke("--config", str(path), "run")
    assert result.exit_code == 0, result.output
    data = json.loads(text)
    assert data["config"]["seed"] == 9
    assert data["spec"]["label"] == "f_3^+"
    assert data["spec"]["d"] == 5


def test_config_file_accepts_inline_noise(invoke, tmp_path):
    path = tmp_path / "run.json"
    noise = {"beta": 1.0, "mz_dephasing": 1.0, "readout_flip": 0.0}
    path.write_text(json.dumps({"run": {"noise": noise, "shots": 200}}))
    result, text = invoke("--config", str(path), "run", "--m", "1")
    assert result.exit_code == 0, result.output
    assert json.loads(text)["counts"]["HV"] == 200


def test_noise_file_rejects_misspelled_keys(invoke, tmp_path):
    path = tmp_path / "noise.json"
    path.write_text(json.dumps({"betta": 0.5, "mz_dephasing": 1.0, "readout_flip": 0.0}))
    result, text = invoke("run", "--noise", str(path), "--shots", "100")
    assert result.exit_code == 7, result.output
    assert text == ""


def test_csv_format_for_run(invoke):
    result, text = invoke("--format", "csv", "run", "--d", "3", "--m", "1")
    assert result.exit_code == 0, result.output
    rows = _csv_rows(text)
    assert rows[0] == ["outcome", "label", "probability"]
    assert rows[2] == ["1", "1", "1.000000"]


def test_stdout_without_out(runner):
    result = runner.invoke(cli, ["lower-bound", "--d", "3"])
    assert result.exit_code == 0
    assert '"strategies_enumerated": 24' in result.output
