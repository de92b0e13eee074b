import json

import pytest

from src.cli.main import EXIT_BUDGET, EXIT_INVALID, EXIT_OK, ComputationRequest, build_parser, main, run
from src.cli.report import Report, render_json, render_text
from src.cli.settings import ConfigurationError, EngineSettings, load_settings
from src.engine.abgroup import ring_from_spec
from src.engine.hochschild import HochschildComplex

ENV_VARS = ("MACLANE_CACHE_DIR", "MACLANE_BUDGET", "MACLANE_WORKERS", "MACLANE_LOG_LEVEL")


@pytest.fixture
def clean_env(monkeypatch):
    # setenv first so teardown also removes anything a .env file loads.
    for name in ENV_VARS:
        monkeypatch.setenv(name, "")
        monkeypatch.delenv(name)
    return monkeypatch


def run_json(capsys, *argv):
    code = main([*argv, "--format", "json"])
    return code, json.loads(capsys.readouterr().out) if code == EXIT_OK else None


def test_hml_json_output(clean_env, capsys, cache_dir):
    code, document = run_json(capsys, "hml", "--ring", "Z/2", "--max-degree", "2", "--cache-dir", str(cache_dir))
    assert code == EXIT_OK
    assert document["command"] == "hml"
    assert document["degrees"] == [0, 1, 2]
    assert document["HML"] == ["Z/2", "0", "Z/2"]
    assert document["input"] == {"ring": "Z/2", "coefficients": "self", "max_degree": 2, "normalized": False}
    assert "timings_ms" not in document


def test_q_homology_text_output(clean_env, capsys):
    assert main(["q-homology", "--group", "Z/2 x Z/2", "--max-degree", "0", "--no-cache"]) == EXIT_OK
    assert capsys.readouterr().out.strip() == "H_0(Q(Z/2 x Z/2)) = Z/2+Z/2"


def test_hh_json_output(clean_env, capsys):
    code, document = run_json(capsys, "hh", "--ring", "Z/2", "--max-degree", "2", "--no-cache")
    assert code == EXIT_OK
    assert document["HH"] == ["Z/2", "0", "0"]


def test_additivity_json_output(clean_env, capsys):
    code, document = run_json(capsys, "additivity", "--left", "Z/2", "--right", "Z/2", "--max-degree", "1", "--no-cache")
    assert code == EXIT_OK
    assert document["isomorphic"] == [True, True]
    assert document["details"][0]["target"] == "Z/2+Z/2"


def test_timings_are_optional(clean_env, capsys):
    code, document = run_json(capsys, "q-homology", "--group", "Z/3", "--max-degree", "1", "--no-cache", "--timings")
    assert code == EXIT_OK
    assert len(document["timings_ms"]) == 2


def test_output_is_deterministic(clean_env, capsys, cache_dir):
    argv = ["hml", "--ring", "Z/3", "--max-degree", "1", "--cache-dir", str(cache_dir), "--format", "json"]
    assert main(argv) == EXIT_OK
    first = capsys.readouterr().out
    assert main(argv) == EXIT_OK
    assert capsys.readouterr().out == first


def test_cache_directory_is_populated(clean_env, capsys, cache_dir):
    assert main(["q-homology", "--group", "Z/5", "--max-degree", "0", "--cache-dir", str(cache_dir)]) == EXIT_OK
    assert list(cache_dir.glob("*.json"))


def test_no_cache_leaves_the_directory_alone(clean_env, capsys, cache_dir):
    assert main(["q-homology", "--group", "Z/7", "--max-degree", "0", "--cache-dir", str(cache_dir), "--no-cache"]) == EXIT_OK
    assert not cache_dir.exists()


@pytest.mark.parametrize(
    "argv",
    [
        ["q-homology", "--group", "Z/1"],
        ["q-homology", "--group", "Z/2 + Z/2"],
        ["hml", "--ring", "Z/2 x Z/2"],
        ["hml", "--ring", "Z/2", "--max-degree", "-1"],
        ["hml", "--ring", "missing.json"],
    ],
)
def test_invalid_input_exits_with_one(clean_env, capsys, argv):
    assert main([*argv, "--no-cache"]) == EXIT_INVALID
    assert capsys.readouterr().out == ""


def test_budget_exhaustion_exits_with_two(clean_env, capsys):
    assert main(["q-homology", "--group", "Z/2", "--max-degree", "3", "--budget", "100", "--no-cache"]) == EXIT_BUDGET


def test_hml_budget_exhaustion_exits_with_two(clean_env, capsys):
    assert main(["hml", "--ring", "Z/3", "--max-degree", "2", "--budget", "50", "--no-cache"]) == EXIT_BUDGET


def test_inconsistent_complex_exits_with_one(clean_env, capsys, caplog, monkeypatch):
    original = HochschildComplex.bar_differential

    def d0_only(self, p, q):
        return self.face_matrix(0, 1, 0) if (p, q) == (1, 0) else original(self, p, q)

    monkeypatch.setattr(HochschildComplex, "bar_differential", d0_only)
    assert main(["hml", "--ring", "Z/3", "--max-degree", "1", "--no-cache"]) == EXIT_INVALID
    assert "Inconsistent chain complex" in caplog.text
    assert capsys.readouterr().out == ""


def test_unknown_subcommand_is_an_argparse_error():
    with pytest.raises(SystemExit):
        build_parser().parse_args(["cohomology"])


def test_ring_table_command(clean_env, capsys, tmp_path):
    output = tmp_path / "tables" / "m2f2.json"
    assert main(["ring-table", "--size", "2", "--modulus", "2", "--output", str(output), "--no-cache"]) == EXIT_OK
    assert capsys.readouterr().out.strip() == f"Wrote {output}"
    ring = ring_from_spec(output)
    assert ring.order == 16
    assert not ring.is_commutative


def test_hml_over_a_table_file(clean_env, capsys, tmp_path):
    table = tmp_path / "f3.json"
    assert main(["ring-table", "--size", "1", "--modulus", "3", "--output", str(table), "--no-cache"]) == EXIT_OK
    capsys.readouterr()
    code, document = run_json(capsys, "hml", "--ring", str(table), "--max-degree", "0", "--no-cache")
    assert code == EXIT_OK
    assert document["HML"] == ["Z/3"]


def test_run_without_the_parser(clean_env):
    report = run(ComputationRequest("q-homology", spec="Z/2", max_degree=0))
    assert report.groups == ["Z/2"]


def test_request_validation():
    with pytest.raises(ValueError, match="Unknown command"):
        ComputationRequest("cohomology")
    with pytest.raises(ValueError, match="budget"):
        ComputationRequest("hml", spec="Z/2", budget=0)


@pytest.mark.slow
def test_quick_selftest_passes(clean_env, capsys):
    code, document = run_json(capsys, "selftest", "--quick", "--no-cache")
    assert code == EXIT_OK
    assert document["ok"] is True
    assert all(item["passed"] for item in document["details"])


# Settings


def test_settings_defaults(clean_env, tmp_path):
    settings = load_settings(env_file=tmp_path / "absent.env")
    assert settings.budget == 10**8
    assert settings.workers == 1
    assert settings.log_level == "INFO"
    assert settings.use_cache
    assert settings.cache_dir.parts[-2:] == ("data", "cache")


def test_settings_from_env(clean_env, tmp_path):
    clean_env.setenv("MACLANE_BUDGET", "1_000_000")
    clean_env.setenv("MACLANE_WORKERS", "4")
    clean_env.setenv("MACLANE_LOG_LEVEL", "debug")
    clean_env.setenv("MACLANE_CACHE_DIR", str(tmp_path / "artifacts"))
    settings = load_settings(env_file=tmp_path / "absent.env")
    assert settings.budget == 1_000_000
    assert settings.workers == 4
    assert settings.log_level == "DEBUG"
    assert settings.cache_dir == tmp_path / "artifacts"


def test_settings_from_dotenv_file(clean_env, tmp_path):
    env_file = tmp_path / ".env"
    env_file.write_text("MACLANE_BUDGET=5000\nMACLANE_WORKERS=2\n")
    settings = load_settings(env_file=env_file)
    assert settings.budget == 5000
    assert settings.workers == 2


@pytest.mark.parametrize(
    "name, value",
    [("MACLANE_BUDGET", "lots"), ("MACLANE_BUDGET", "0"), ("MACLANE_WORKERS", "-1"), ("MACLANE_LOG_LEVEL", "chatty")],
)
def test_bad_settings_are_configuration_errors(clean_env, tmp_path, name, value):
    clean_env.setenv(name, value)
    with pytest.raises(ConfigurationError):
        load_settings(env_file=tmp_path / "absent.env")


def test_bad_environment_exits_with_one(clean_env, capsys):
    clean_env.setenv("MACLANE_WORKERS", "many")
    assert main(["q-homology", "--group", "Z/2"]) == EXIT_INVALID


def test_overrides_are_validated(tmp_path):
    settings = EngineSettings(cache_dir=tmp_path)
    assert settings.with_overrides(budget=None, workers=3).workers == 3
    with pytest.raises(ConfigurationError):
        settings.with_overrides(workers=0)


# Rendering


def test_render_additivity_text():
    report = Report("additivity", {"left": "Z/2", "right": "Z/3", "max_degree": 0})
    report.degrees.append(0)
    report.groups.append("Z/6")
    report.verdicts.append(True)
    report.details.append({"degree": 0, "source": "Z/6", "target": "Z/6", "cone": "0"})
    assert render_text(report) == "degree 0: Z/6 -> Z/6 (cone 0): isomorphism"


def test_render_json_rounds_timings():
    report = Report("hml", {"ring": "Z/2", "coefficients": "self"}, [0], ["Z/2"], timings_ms=[1.23456])
    document = json.loads(render_json(report, timings=True))
    assert document["timings_ms"] == [1.235]
    assert document["HML"] == ["Z/2"]
