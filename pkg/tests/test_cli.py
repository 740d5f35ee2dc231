import json
from pathlib import Path

import pytest

from qirw.core.config import settings
from qirw.core.exceptions import EXIT_CERTIFICATION_FAILURE, EXIT_INPUT_ERROR, EXIT_OK, InvariantViolation
from qirw.commands import synthesis
from qirw.main import main
from qirw.schemas.reports import Verdict
from qirw.schemas.run import RunConfig
from qirw.services import weight_extension


def run(capsys, *argv) -> tuple[int, dict]:
    code = main([str(arg) for arg in argv])
    return code, json.loads(capsys.readouterr().out)


@pytest.fixture
def instance_file(tmp_path, capsys) -> Path:
    path = tmp_path / "instance.json"
    code, _ = run(capsys, "generate", "pathlike", "--n", 5, "--seed", 3, "--out", path)
    assert code == EXIT_OK
    return path


@pytest.fixture
def report_file(tmp_path, capsys, instance_file) -> Path:
    path = tmp_path / "report.json"
    code, payload = run(capsys, "synthesize", "--instance", instance_file, "--out", path)
    assert code == EXIT_OK, payload
    return path


def test_generate_writes_instance_and_sidecar(instance_file):
    document = json.loads(instance_file.read_text())
    assert set(document) >= {"g", "h", "bags", "phi"}
    assert json.loads(instance_file.with_name("instance.expected.json").read_text()) == {"verdict": "PASS"}


def test_generate_defaults_to_the_corpus_directory(capsys):
    code, payload = run(capsys, "generate", "comb", "--m", 2, "--seed", 4)
    assert code == EXIT_OK
    assert Path(payload["data"]["path"]) == Path(settings.CORPUS_DIR) / "comb" / "4.json"
    assert payload["data"]["width"] == 1


def test_synthesize_then_certify(capsys, instance_file, report_file):
    report = json.loads(report_file.read_text())
    assert report["verdict"] == "PASS"
    code, payload = run(capsys, "certify", "--instance", instance_file, "--report", report_file)
    assert code == EXIT_OK
    assert payload["status_code"] == EXIT_OK
    assert payload["data"]["verdict"] == "PASS"


def test_certify_rejects_a_tampered_constant(capsys, tmp_path, instance_file, report_file):
    _, payload = run(capsys, "certify", "--instance", instance_file, "--report", report_file)
    report = json.loads(report_file.read_text())
    report["c_prime"] = payload["data"]["oracle_additive"] - 1
    tampered = tmp_path / "tampered.json"
    tampered.write_text(json.dumps(report))
    code, payload = run(capsys, "certify", "--instance", instance_file, "--report", tampered)
    assert code == EXIT_CERTIFICATION_FAILURE
    assert payload["data"]["verdict"] == "FAIL"


def test_certify_appends_growth_rows(capsys, tmp_path, instance_file, report_file):
    out = tmp_path / "growth.csv"
    for _ in range(2):
        code, _ = run(capsys, "certify", "--instance", instance_file, "--report", report_file, "--format", "csv", "--out", out)
        assert code == EXIT_OK
    lines = out.read_text().splitlines()
    assert lines[0].startswith("generator,seed,width")
    assert len(lines) == 3


def test_synthesize_writes_dot(capsys, tmp_path, instance_file):
    out = tmp_path / "weights.json"
    code, _ = run(capsys, "synthesize", "--instance", instance_file, "--out", out, "--format", "dot")
    assert code == EXIT_OK
    dot = out.with_suffix(".dot").read_text()
    assert dot.startswith("graph") and '[label="' in dot


def test_synthesize_from_separate_files(capsys, tmp_path):
    files = {
        "g": {"vertices": [0, 1, 2, 3], "edges": [[0, 1], [1, 2], [2, 3]]},
        "h": {"vertices": [0, 1], "edges": [[0, 1]]},
        "bags": {"bags": [[0, 1]]},
        "phi": {"map": [[0, 0], [1, 0], [2, 1], [3, 1]]},
    }
    argv = ["synthesize", "--out", tmp_path / "report.json"]
    for flag, document in files.items():
        path = tmp_path / f"{flag}.json"
        path.write_text(json.dumps(document))
        argv += [f"--{flag}", path]
    code, payload = run(capsys, *argv)
    assert code == EXIT_OK, payload
    assert payload["data"]["verdict"] == "PASS"


def test_measure(capsys, instance_file):
    code, payload = run(capsys, "measure", "--instance", instance_file)
    assert code == EXIT_OK
    assert payload["data"]["C"] == 3 and payload["data"]["L"] == 2
    assert not payload["data"]["weighted"]


def test_measure_into_weights(capsys, tmp_path, instance_file):
    h = json.loads(instance_file.read_text())["h"]
    weights = tmp_path / "weights.json"
    weights.write_text(json.dumps({"weights": [[u, v, 1] for u, v in h["edges"]]}))
    code, payload = run(capsys, "measure", "--instance", instance_file, "--weights", weights)
    assert code == EXIT_OK
    assert payload["data"]["weighted"]


def test_missing_file_is_an_input_error(capsys, tmp_path):
    code, payload = run(capsys, "measure", "--instance", tmp_path / "nope.json")
    assert code == EXIT_INPUT_ERROR
    assert "file not found" in payload["message"]


def test_malformed_json_reports_its_position(capsys, tmp_path):
    broken = tmp_path / "broken.json"
    broken.write_text('{"g": {"vertices": [0, 1]\n  "h": }')
    code, payload = run(capsys, "measure", "--instance", broken)
    assert code == EXIT_INPUT_ERROR
    assert payload["data"]["line"] == 2


def test_incomplete_inputs(capsys, tmp_path):
    g = tmp_path / "g.json"
    g.write_text(json.dumps({"vertices": [0]}))
    code, payload = run(capsys, "measure", "--g", g)
    assert code == EXIT_INPUT_ERROR
    assert payload["data"]["missing"] == ["--h", "--bags", "--phi"]


@pytest.mark.parametrize(
    "argv",
    [
        [],
        ["synthesize", "--profile", "slow"],
        ["certify", "--instance", "x.json"],
        ["generate"],
        ["generate", "pathlike", "--seed", "-1"],
    ],
)
def test_bad_arguments_exit_with_input_error(capsys, argv):
    code, payload = run(capsys, *argv)
    assert code == EXIT_INPUT_ERROR
    assert payload["status_code"] == EXIT_INPUT_ERROR


def test_unknown_generator_is_an_input_error(capsys, tmp_path):
    code, _ = run(capsys, "generate", "grid", "--out", tmp_path / "grid.json")
    assert code == EXIT_INPUT_ERROR


def test_generate_is_deterministic(capsys, tmp_path):
    first, second = tmp_path / "a.json", tmp_path / "b.json"
    for out in (first, second):
        code, _ = run(capsys, "generate", "comb", "--m", 3, "--out", out)
        assert code == EXIT_OK
    assert first.read_bytes() == second.read_bytes()


@pytest.mark.parametrize("image, expected", [([[0, 0], [1, 1]], 1), ([[0, 0], [1, 0], [2, 1], [3, 1]], 2)])
def test_measure_small_fixtures(capsys, tmp_path, image, expected):
    n = len(image)
    files = {
        "g": {"vertices": list(range(n)), "edges": [[i, i + 1] for i in range(n - 1)]},
        "h": {"vertices": [0, 1], "edges": [[0, 1]]},
        "bags": {"bags": [[0, 1]]},
        "phi": {"map": image},
    }
    argv = ["measure"]
    for flag, document in files.items():
        path = tmp_path / f"{flag}.json"
        path.write_text(json.dumps(document))
        argv += [f"--{flag}", path]
    code, payload = run(capsys, *argv)
    assert code == EXIT_OK
    assert payload["data"]["C"] == expected


def test_synthesize_writes_a_failure_report(capsys, monkeypatch, tmp_path, instance_file):
    def overlapping_anchors(inp, bounder, checker=None):
        raise InvariantViolation("anchor subpaths overlap", data={"anchors": (3, 5), "depth": 0})

    monkeypatch.setattr(weight_extension, "usegeo", overlapping_anchors)
    out = tmp_path / "report.json"
    code, payload = run(capsys, "synthesize", "--instance", instance_file, "--out", out)
    assert code == EXIT_CERTIFICATION_FAILURE
    assert payload["message"] == "anchor subpaths overlap"
    assert payload["data"]["report"] == str(out)
    report = json.loads(out.read_text())
    assert report["verdict"] == "FAIL"
    assert report["failure"] == {"message": "anchor subpaths overlap", "witness": {"anchors": [3, 5], "depth": 0}}
    assert report["levels"][0]["depth"] == 0
    assert report["levels"][0]["measured_c"] == 3


def test_synthesize_fails_when_the_oracle_disagrees(capsys, monkeypatch, tmp_path, instance_file):
    def disagreeing_oracle(instance, report):
        return Verdict(
            verdict="FAIL", oracle_additive=report.c_prime + 1, achieved_size=report.achieved_size,
            claimed_c_prime=report.c_prime, claimed_w=report.w_bound, diffs=["oracle additive exceeds claimed C'"],
        )

    monkeypatch.setattr(synthesis, "certify", disagreeing_oracle)
    code, payload = run(capsys, "synthesize", "--instance", instance_file, "--out", tmp_path / "report.json")
    assert code == EXIT_CERTIFICATION_FAILURE
    assert payload["message"] == "Synthesized weights did not certify"
    assert payload["data"]["oracle"]["verdict"] == "FAIL"


def test_run_config_reads_the_profile_when_built(monkeypatch):
    monkeypatch.setattr(settings, "PROFILE", "fast")
    assert RunConfig(command="measure").profile == "fast"
