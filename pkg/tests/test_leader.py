import json

from evoware.gateway import ReplayScript
from evoware.sandbox import tree_digest
from evoware.session import Runtime
from evoware.tree import FunctionalityRecord

from conftest import make_config


def candidate_response(program, path="tool.py", purpose="a generated tool", usage="run it"):
    meta = json.dumps({"path": path, "purpose": purpose, "usage": usage, "dependencies": []})
    return f"```python\n{program}\n```\n\n```json\n{meta}\n```\n"


def decision(payload: dict) -> str:
    return f"```json\n{json.dumps(payload)}\n```"


def suite_response(*inputs) -> str:
    return f"```json\n{json.dumps(list(inputs))}\n```"


def runtime_with(root, entries, **overrides) -> Runtime:
    config = make_config(root, **overrides)
    return Runtime(config, script=ReplayScript.from_dicts(entries))


def turn_events(runtime: Runtime, turn: int):
    return [e for e in runtime.event_log.events() if e.payload.get("turn") == turn]


EVOLVE_ENTRIES = [
    dict(
        agent="leader",
        match="echo tool",
        response=decision(
            {
                "kind": "evolve",
                "spec": "build an echo tool taking one argument",
                "argv": ["hello"],
                "rationale": "nothing stored yet",
            }
        ),
    ),
    dict(agent="generator", match="echo tool", response=candidate_response("import sys\nprint(sys.argv[1])\n")),
    dict(agent="generator", match="echo tool", response=candidate_response("import sys\nvalue = sys.argv[1]\nprint(value)\n")),
    dict(agent="validator", match="echo tool", response=suite_response({"label": "t1", "argv": ["x"]})),
    dict(agent="leader", match="Compose the final reply", response="The tool says: hello"),
]


class TestEvolveTurn:
    def test_full_evolution_pipeline(self, root):
        runtime = runtime_with(root, EVOLVE_ENTRIES, candidates=2, tests=1)
        session = runtime.new_session("s1")
        reply = session.handle_line("I need an echo tool")
        assert reply == "The tool says: hello"
        assert (root / "tool.py").exists()
        kinds = [e.kind for e in turn_events(runtime, 1) if e.kind != "llm_exchange"]
        assert kinds == [
            "requirement_received",
            "decision",
            "generation_started",
            "candidates_produced",
            "validation_report",
            "integration",
            "invocation",
            "response",
        ]

    def test_no_integration_without_acceptance(self, root):
        runtime = runtime_with(root, EVOLVE_ENTRIES, candidates=2, tests=1)
        session = runtime.new_session("s1")
        session.handle_line("I need an echo tool")
        events = runtime.event_log.events()
        report_seq = next(e.seq for e in events if e.kind == "validation_report")
        integration_seq = next(e.seq for e in events if e.kind == "integration")
        report = next(e for e in events if e.kind == "validation_report")
        assert report.payload["verdict"] == "accepted"
        assert report_seq < integration_seq


class TestReuseTurn:
    def entries(self):
        return EVOLVE_ENTRIES + [
            dict(
                agent="leader",
                match="use it again",
                response=decision({"kind": "reuse", "path": "tool.py", "argv": ["again"], "rationale": "stored tool fits"}),
            ),
            dict(agent="leader", match="Compose the final reply", response="It echoed: again"),
        ]

    def test_reuse_before_rebuild(self, root):
        runtime = runtime_with(root, self.entries(), candidates=2, tests=1)
        session = runtime.new_session("s1")
        session.handle_line("I need an echo tool")
        reply = session.handle_line("use it again with 'again'")
        assert reply == "It echoed: again"
        kinds = {e.kind for e in turn_events(runtime, 2)}
        assert "invocation" in kinds
        assert kinds.isdisjoint({"generation_started", "candidates_produced", "validation_report"})


class TestReuseWithStdin:
    def test_stdin_reaches_the_program(self, root):
        entries = [
            dict(
                agent="leader",
                match="shout this",
                response=decision(
                    {"kind": "reuse", "path": "shout.py", "argv": [], "stdin": "quiet words", "rationale": ""}
                ),
            ),
        ]
        runtime = runtime_with(root, entries)
        runtime.data_manager.merge_artifact(
            "import sys\nprint(sys.stdin.read().upper())\n",
            FunctionalityRecord(path="shout.py", purpose="uppercase stdin", usage="pipe text"),
        )
        reply = runtime.new_session("s1").handle_line("shout this for me")
        assert reply == "QUIET WORDS"  # responder unscripted, falls back to stdout


class TestAnswerTurn:
    def test_direct_answer(self, root):
        entries = [
            dict(
                agent="leader",
                match="2+2",
                response=decision({"kind": "answer", "text": "4", "rationale": "arithmetic"}),
            )
        ]
        runtime = runtime_with(root, entries)
        reply = runtime.new_session("s1").handle_line("what is 2+2")
        assert reply == "4"
        kinds = {e.kind for e in turn_events(runtime, 1)}
        assert "invocation" not in kinds


class TestMalformedDecision:
    def test_retry_then_apology(self, root):
        entries = [
            dict(agent="leader", match="", response="no json at all"),
            dict(agent="leader", match="", response="still nothing"),
        ]
        runtime = runtime_with(root, entries)
        reply = runtime.new_session("s1").handle_line("do something")
        assert "rephrase" in reply
        decision_event = next(e for e in runtime.event_log.events() if e.kind == "decision")
        assert decision_event.payload["kind"] == "answer"

    def test_reuse_of_missing_path_is_malformed(self, root):
        entries = [
            dict(
                agent="leader",
                match="",
                response=decision({"kind": "reuse", "path": "ghost.py", "argv": []}),
            ),
            dict(agent="leader", match="", response="not valid either"),
        ]
        runtime = runtime_with(root, entries)
        reply = runtime.new_session("s1").handle_line("use the ghost")
        assert "rephrase" in reply

    def test_retry_recovers(self, root):
        entries = [
            dict(agent="leader", match="", response="garbled"),
            dict(
                agent="leader",
                match="unusable",
                response=decision({"kind": "answer", "text": "recovered", "rationale": ""}),
            ),
        ]
        runtime = runtime_with(root, entries)
        assert runtime.new_session("s1").handle_line("hello") == "recovered"


class TestNeverConsensus:
    def entries(self):
        rows = [
            dict(
                agent="leader",
                match="impossible",
                response=decision({"kind": "evolve", "spec": "do the impossible task", "rationale": ""}),
            ),
        ]
        for round_number in range(3):
            for variant in range(3):
                rows.append(
                    dict(
                        agent="generator",
                        match="impossible",
                        response=candidate_response(f"print('variant-{round_number}-{variant}')\n"),
                    )
                )
        rows.insert(
            4,  # after round 1's generator entries: suite proposed once
            dict(agent="validator", match="impossible", response=suite_response({"label": "t", "argv": []})),
        )
        return rows

    def test_three_rounds_then_failure_and_unchanged_tree(self, root):
        (root / "keep.txt").write_text("stable")
        runtime = runtime_with(root, self.entries(), candidates=3, tests=1, max_repair_rounds=3)
        before = tree_digest(root)
        session = runtime.new_session("s1")
        reply = session.handle_line("please do the impossible")
        assert "could not validate" in reply
        assert tree_digest(root) == before
        kinds = [e.kind for e in turn_events(runtime, 1) if e.kind != "llm_exchange"]
        assert kinds.count("generation_started") == 3
        assert kinds.count("validation_report") == 3
        assert "integration" not in kinds
        assert "failure" in kinds
        reports = [e for e in turn_events(runtime, 1) if e.kind == "validation_report"]
        assert all(e.payload["verdict"] == "rejected" for e in reports)
        # repair feedback reached later rounds: rounds tagged 1..3
        assert [e.payload["round"] for e in reports] == [1, 2, 3]


class TestReplyFallback:
    def test_missing_responder_entry_falls_back_to_stdout(self, root):
        entries = EVOLVE_ENTRIES[:-1]  # no responder entry scripted
        runtime = runtime_with(root, entries, candidates=2, tests=1)
        reply = runtime.new_session("s1").handle_line("I need an echo tool")
        assert reply == "hello"
