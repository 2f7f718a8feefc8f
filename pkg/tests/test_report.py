import csv

from evoware.report import load_events, render_report
from evoware.scenario import load_scenario, run_scenario

from conftest import SCENARIO_DIR


def test_report_over_repeated_rejections(tmp_path):
    root = tmp_path / "root"
    scenario = load_scenario(SCENARIO_DIR / "never_consensus" / "scenario.json")
    result = run_scenario(scenario, root=root)
    assert result.ok, result.findings

    out = tmp_path / "report"
    written = render_report(root / ".evoware" / "events.ndjson", out)
    pngs = sorted(out.glob("validation_*.png"))
    csvs = sorted(out.glob("validation_*.csv"))
    assert len(pngs) == 3  # one per rejected round
    assert len(csvs) == 3
    assert all(p.stat().st_size > 0 for p in pngs)
    assert set(written) == set(pngs) | set(csvs) | {out / "turns.csv"}

    with csvs[0].open(newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert [r["risk"] for r in rows] == ["2", "2", "2"]
    assert [r["selected"] for r in rows] == ["yes", "no", "no"]

    with (out / "turns.csv").open(newline="") as fh:
        turn_rows = list(csv.DictReader(fh))
    assert turn_rows[0]["turn"] == "1"
    assert "failure" in turn_rows[0]["event_kinds"]


def test_load_events_round_trip(tmp_path):
    root = tmp_path / "root"
    scenario = load_scenario(SCENARIO_DIR / "case4_markdown" / "scenario.json")
    run_scenario(scenario, root=root)
    events = load_events(root / ".evoware" / "events.ndjson")
    assert events[0].kind == "requirement_received"
    assert events[0].seq == 1
    assert [e.seq for e in events] == sorted(e.seq for e in events)
