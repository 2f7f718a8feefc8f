import io

from evoware.cli import main as cli_main, repl
from evoware.gateway import ReplayScript
from evoware.session import Runtime
from evoware.tree import FunctionalityRecord

from conftest import SCENARIO_DIR, make_config


def make_runtime(root, entries):
    return Runtime(make_config(root), script=ReplayScript.from_dicts(entries))


def run_repl(runtime, lines):
    out = io.StringIO()
    repl(runtime, in_stream=io.StringIO("\n".join(lines) + "\n"), out_stream=out)
    return out.getvalue()


ANSWER = '```json\n{"kind": "answer", "text": "Four.", "rationale": "arithmetic"}\n```'


class TestRepl:
    def test_turn_and_quit(self, root):
        runtime = make_runtime(root, [dict(agent="leader", match="2+2", response=ANSWER)])
        output = run_repl(runtime, ["what is 2+2", ":quit"])
        assert "Four." in output

    def test_empty_lines_ignored(self, root):
        runtime = make_runtime(root, [])
        output = run_repl(runtime, ["", "   ", ":quit"])
        assert output.count("> ") == 3  # re-prompt for each blank line, no turn ran
        assert runtime.event_log.events() == []

    def test_tree_meta_command(self, root):
        (root / "weather_forecast.py").write_text("print('hi')")
        runtime = make_runtime(root, [])
        output = run_repl(runtime, [":tree", ":quit"])
        assert '"weather_forecast.py"' in output

    def test_events_meta_command_after_reuse(self, root):
        entries = [
            dict(agent="leader", match="again", response=json_decision()),
            dict(agent="leader", match="Compose the final reply", response="echoed"),
        ]
        runtime = make_runtime(root, entries)
        runtime.data_manager.merge_artifact(
            "import sys\nprint(sys.argv[1])\n",
            FunctionalityRecord(path="tool.py", purpose="echo helper", usage="tool.py VALUE"),
        )
        output = run_repl(runtime, ["run it again", ":events", ":quit"])
        assert '"invocation"' in output
        assert '"generation_started"' not in output


def json_decision():
    return '```json\n{"kind": "reuse", "path": "tool.py", "argv": ["hello"], "rationale": "fits"}\n```'


class TestInstalledEntryPoint:
    def test_repl_subcommand_over_pipe(self, tmp_path):
        import json
        import subprocess
        import sys

        script = tmp_path / "script.json"
        script.write_text(
            json.dumps(
                [{"agent": "leader", "match": "2+2", "response": ANSWER}]
            ),
            encoding="utf-8",
        )
        proc = subprocess.run(
            [
                sys.executable, "-m", "evoware.cli", "repl",
                "--root", str(tmp_path / "root"),
                "--llm", "replay",
                "--replay-script", str(script),
            ],
            input="what is 2+2\n:quit\n",
            capture_output=True,
            text=True,
            timeout=60,
        )
        assert proc.returncode == 0, proc.stderr
        assert "Four." in proc.stdout


class TestReportCommand:
    def test_report_renders_files(self, tmp_path, capsys):
        root = tmp_path / "root"
        code = cli_main(
            ["replay", "--scenario", str(SCENARIO_DIR / "case1_weather" / "scenario.json"),
             "--root", str(root)]
        )
        assert code == 0
        out_dir = tmp_path / "report"
        code = cli_main(["report", "--root", str(root), "--out", str(out_dir)])
        assert code == 0
        pngs = list(out_dir.glob("validation_*.png"))
        csvs = list(out_dir.glob("validation_*.csv"))
        assert len(pngs) == 1 and len(csvs) == 1
        header, row1, *_ = csvs[0].read_text().strip().splitlines()
        assert header == "generation_index,risk,err,selected"
        assert row1 == "1,0,0,yes"
        assert (out_dir / "turns.csv").exists()

    def test_report_without_events_fails(self, tmp_path, capsys):
        code = cli_main(["report", "--root", str(tmp_path), "--out", str(tmp_path / "o")])
        assert code == 1
