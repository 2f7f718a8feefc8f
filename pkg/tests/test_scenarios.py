"""Every bundled scenario must replay cleanly through the public runner."""

import pytest

from evoware.cli import main as cli_main
from evoware.scenario import load_scenario, run_scenario

from conftest import SCENARIO_DIR

ALL_SCENARIOS = sorted(p.name for p in SCENARIO_DIR.iterdir() if p.is_dir())


@pytest.mark.parametrize("name", ALL_SCENARIOS)
def test_scenario_replays_clean(name, tmp_path):
    scenario = load_scenario(SCENARIO_DIR / name / "scenario.json")
    result = run_scenario(scenario, root=tmp_path / "root")
    assert result.ok, result.findings


def test_replay_cli_exit_codes(tmp_path, capsys):
    code = cli_main(
        ["replay", "--scenario", str(SCENARIO_DIR / "case1_weather" / "scenario.json"),
         "--root", str(tmp_path / "root")]
    )
    assert code == 0
    out = capsys.readouterr().out
    assert "case1_weather: ok" in out


def test_replay_cli_fails_on_divergence(tmp_path, capsys):
    # a scenario whose script cannot serve the first decision
    scenario_dir = tmp_path / "broken"
    scenario_dir.mkdir()
    (scenario_dir / "scenario.json").write_text(
        """
        {
          "name": "broken",
          "config": {"candidates": 1, "tests": 1},
          "script": [],
          "turns": [{"text": "hello", "expect": {"reply_contains": ["impossible text"]}}]
        }
        """,
        encoding="utf-8",
    )
    code = cli_main(["replay", "--scenario", str(scenario_dir / "scenario.json")])
    assert code == 1
    assert "FAIL" in capsys.readouterr().out
