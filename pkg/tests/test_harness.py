import json
import math

import pytest

from hypbergman import built_in_group, quotient_distance, sample_pairs
from hypbergman.cli import main
from hypbergman.harness import (
    CSV_COLUMNS,
    EXIT_CONFIG,
    EXIT_INCOMPLETE,
    EXIT_OK,
    EXIT_VIOLATION,
    BoundReport,
    CaseRecord,
    ConfigError,
    SamplingError,
    VerificationConfig,
    emit_report,
    load_report,
    report_csv,
    resolve_delta,
    run_verification,
)


def small_config(**kw):
    base = {"group": "gamma2_width1", "k_list": [3, 5], "delta_list": ["r", "2r"],
            "sample_count": 3, "seed": 7}
    base.update(kw)
    return VerificationConfig.from_dict(base)


@pytest.fixture(scope="module")
def report():
    return run_verification(small_config())


def test_resolve_delta():
    assert resolve_delta("r", 0.5) == 0.5
    assert resolve_delta("r+1", 0.5) == 1.5
    assert resolve_delta("2r", 0.5) == 1.0
    assert resolve_delta("2*r", 0.5) == 1.0
    assert resolve_delta(3, 0.5) == 3.0
    assert resolve_delta("2.5", 0.5) == 2.5
    with pytest.raises(ConfigError):
        resolve_delta("r**2", 0.5)


@pytest.mark.parametrize("bad", [
    {"k_list": [2]},
    {"k_list": [3.0]},
    {"sample_count": 0},
    {"seed": -1},
    {"tolerance": 0},
    {"format": "xml"},
    {"r_policy": "user_override"},
    {"r_policy": -1.0},
    {"extra": 1},
])
def test_config_rejected(bad):
    with pytest.raises(ConfigError):
        small_config(**bad)


def test_config_missing_field():
    with pytest.raises(ConfigError):
        VerificationConfig.from_dict({"group": "bolza", "k_list": [3]})


def test_delta_below_radius_rejected():
    cfg = small_config(delta_list=[0.1])
    with pytest.raises(ConfigError):
        run_verification(cfg)


def test_test_only_group_rejected():
    with pytest.raises(ConfigError):
        run_verification(small_config(group="cyclic_test"))


def test_sample_pairs_deterministic_and_separated():
    G = built_in_group("gamma2_width1")
    a = sample_pairs(G, 1.2, 5, seed=3)
    b = sample_pairs(G, 1.2, 5, seed=3)
    assert a == b
    for z, w, q in a:
        assert q >= 1.2
        assert quotient_distance(G, z, w).value == pytest.approx(q)
        assert G.truncated_domain().contains(z.x, z.y) and G.truncated_domain().contains(w.x, w.y)


def test_sampling_failure_is_reported():
    G = built_in_group("bolza")
    with pytest.raises(SamplingError):
        sample_pairs(G, 3.0, 5, seed=0)


def test_report_cases(report):
    assert len(report.cases) == 2 * 3 * 2
    assert report.violations == 0 and report.uncertified == 0
    assert report.exit_code == EXIT_OK
    for c in report.cases:
        assert c.verdict == "pass"
        assert c.lhs <= c.majorant
        assert c.slack == pytest.approx(c.rhs - c.lhs)
        assert c.qdist >= c.delta


def test_report_formats(report, tmp_path):
    text = report_csv(report)
    lines = text.splitlines()
    assert lines[0] == ",".join(CSV_COLUMNS)
    assert len(lines) == len(report.cases) + 2
    assert lines[-1].startswith("# summary cases=12 violations=0")
    assert "timestamp=" in lines[-1] and "timestamp=" not in report_csv(report, timestamp=False)
    path = tmp_path / "r.json"
    emit_report(report, "json", path)
    back = load_report(path)
    assert back.cases == report.cases
    assert json.loads(path.read_text())["summary"]["violations"] == 0


def test_empty_report_csv():
    rep = BoundReport("bolza", 0, "x", 3.0, "systole_only",
                      errors=[{"delta": 3.0, "error": "none sampled"}])
    lines = report_csv(rep).splitlines()
    assert lines[0] == ",".join(CSV_COLUMNS) and lines[1].startswith("# summary cases=0")
    assert rep.exit_code == EXIT_INCOMPLETE


def test_violation_exit_code():
    case = CaseRecord(0, "g", 3, 1.0, 0, 1, 0, 1, 1.0, 2.0, 0.0, 2.0, 1.0, -1.0, "fail")
    assert BoundReport("g", 0, "x", 1.0, "m", cases=[case]).exit_code == EXIT_VIOLATION


def test_cli_bound(capsys):
    assert main(["bound", "--k", "3", "--delta", "2", "--r", "1", "--y", "1", "--v", "1"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["total"] == pytest.approx(10.2845, abs=1e-4)


def test_cli_count_and_kernel(capsys):
    assert main(["count", "--group", "cyclic_test", "--z", "0,1", "--w", "0,1", "--rho", "3"]) == 0
    assert capsys.readouterr().out.strip() == "5"
    assert main(["kernel", "--group", "gamma2_width1", "--z", "0,1", "--w", "4,1", "--k", "3"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["norm"]["certified"]


def test_cli_verify(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"group": "gamma2_width1", "k_list": [3], "delta_list": ["r"],
                               "sample_count": 2, "seed": 1}))
    out = tmp_path / "o.csv"
    assert main(["verify", "--config", str(cfg), "--output", str(out)]) == EXIT_OK
    assert out.read_text().splitlines()[0] == ",".join(CSV_COLUMNS)


def test_cli_config_errors(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"group": "gamma2_width1", "k_list": [2], "delta_list": ["r"]}))
    assert main(["verify", "--config", str(cfg)]) == EXIT_CONFIG
    assert main(["verify", "--config", str(tmp_path / "missing.json")]) == EXIT_CONFIG
    assert main(["count", "--group", "nope", "--z", "0,1", "--w", "0,1", "--rho", "1"]) == EXIT_CONFIG
    assert main(["kernel", "--group", "bolza", "--z", "0,-1", "--w", "0,1", "--k", "3"]) == EXIT_CONFIG
    assert main(["frobnicate"]) == EXIT_CONFIG


def test_cli_pairs_and_injectivity(capsys):
    assert main(["pairs", "--group", "gamma2_width1", "--delta", "r+1", "--n", "2"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "zx,zy,wx,wy,qdist" and len(lines) == 3
    assert main(["injectivity", "--group", "bolza"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["value"] == pytest.approx(2 * math.acosh(1 + math.sqrt(2)), abs=1e-9)


def test_empty_k_list():
    rep = run_verification(small_config(k_list=[]))
    assert rep.cases == [] and rep.exit_code == EXIT_OK
