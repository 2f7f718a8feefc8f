import json
import urllib.error
import urllib.request

import pytest

from evoware.scenario import build_runtime, load_scenario, run_scenario
from evoware.server import serve

from conftest import SCENARIO_DIR


@pytest.fixture
def case1(tmp_path):
    return load_scenario(SCENARIO_DIR / "case1_weather" / "scenario.json")


def http(method: str, url: str, body: dict | None = None):
    data = json.dumps(body).encode() if body is not None else None
    request = urllib.request.Request(url, data=data, method=method)
    if data is not None:
        request.add_header("Content-Type", "application/json")
    try:
        with urllib.request.urlopen(request, timeout=30) as resp:
            return resp.status, json.loads(resp.read().decode())
    except urllib.error.HTTPError as exc:
        return exc.code, json.loads(exc.read().decode() or "{}")


@pytest.fixture
def server(case1, tmp_path):
    runtime = build_runtime(case1, tmp_path / "root")
    srv = serve(runtime, port=0)
    srv.serve_background()
    base = f"http://127.0.0.1:{srv.server_address[1]}"
    yield base, case1
    srv.shutdown()


class TestEndpoints:
    def test_full_turn_over_http(self, server):
        base, scenario = server
        status, created = http("POST", f"{base}/api/sessions")
        assert status == 200
        session_id = created["session_id"]

        status, reply = http(
            "POST",
            f"{base}/api/sessions/{session_id}/messages",
            {"text": scenario.turns[0]["text"]},
        )
        assert status == 200
        assert "Beijing" in reply["reply"]

        status, events = http("GET", f"{base}/api/sessions/{session_id}/events?after=0")
        assert status == 200
        kinds = [e["kind"] for e in events["events"]]
        for expected in ["generation_started", "validation_report", "integration", "invocation", "response"]:
            assert expected in kinds

        report_seq = next(
            e["seq"] for e in events["events"] if e["kind"] == "validation_report"
        )
        status, report = http("GET", f"{base}/api/validations/{report_seq}")
        assert status == 200
        assert report["verdict"] == "accepted"
        assert report["risk"] == [0, 0, 0]

        status, tree = http("GET", f"{base}/api/tree")
        assert status == 200
        assert any(c["name"] == "weather_forecast.py" for c in tree["children"])

    def test_unknown_session_404(self, server):
        base, _ = server
        status, _ = http("POST", f"{base}/api/sessions/nope/messages", {"text": "x"})
        assert status == 404
        status, _ = http("GET", f"{base}/api/sessions/nope/events")
        assert status == 404

    def test_fresh_root_tree(self, server):
        base, _ = server
        status, tree = http("GET", f"{base}/api/tree")
        assert status == 200
        assert tree["kind"] == "directory"

    def test_empty_text_rejected(self, server):
        base, _ = server
        status, created = http("POST", f"{base}/api/sessions")
        status, _ = http(
            "POST", f"{base}/api/sessions/{created['session_id']}/messages", {"text": "  "}
        )
        assert status == 400

    def test_unknown_route_404(self, server):
        base, _ = server
        status, _ = http("GET", f"{base}/api/bogus")
        assert status == 404

    def test_validation_lookup_miss(self, server):
        base, _ = server
        status, _ = http("GET", f"{base}/api/validations/99999")
        assert status == 404

    def test_turn_failure_is_a_200_with_failure_reply(self, server):
        base, _ = server
        _, created = http("POST", f"{base}/api/sessions")
        status, reply = http(
            "POST",
            f"{base}/api/sessions/{created['session_id']}/messages",
            {"text": "something the script never anticipated"},
        )
        assert status == 200  # user-level outcome, not an infrastructure failure
        assert "problem" in reply["reply"]

    def test_long_poll_times_out_empty(self, server):
        base, _ = server
        status, created = http("POST", f"{base}/api/sessions")
        session_id = created["session_id"]
        status, events = http(
            "GET", f"{base}/api/sessions/{session_id}/events?after=10000&wait=0.2"
        )
        assert status == 200
        assert events["events"] == []


class TestTransportEquivalence:
    def test_same_fixture_same_event_kinds(self, tmp_path):
        scenario = load_scenario(SCENARIO_DIR / "case1_weather" / "scenario.json")
        repl_result = run_scenario(scenario, root=tmp_path / "repl-root")
        repl_kinds = [e.kind for e in repl_result.events]

        scenario_http = load_scenario(SCENARIO_DIR / "case1_weather" / "scenario.json")
        runtime = build_runtime(scenario_http, tmp_path / "http-root")
        srv = serve(runtime, port=0)
        srv.serve_background()
        base = f"http://127.0.0.1:{srv.server_address[1]}"
        try:
            _, created = http("POST", f"{base}/api/sessions")
            session_id = created["session_id"]
            for turn in scenario_http.turns:
                status, reply = http(
                    "POST", f"{base}/api/sessions/{session_id}/messages", {"text": turn["text"]}
                )
                assert status == 200
            _, events = http("GET", f"{base}/api/sessions/{session_id}/events?after=0")
            http_kinds = [e["kind"] for e in events["events"]]
        finally:
            srv.shutdown()
        assert http_kinds == repl_kinds
