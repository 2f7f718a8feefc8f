"""Consensus validation of candidate pools without ground-truth outputs.

Every candidate runs on every suite input in an isolated clone. Two
candidates incur a hard mismatch loss of 1 if any input tells their
execution results apart, else 0. A candidate's risk is its summed loss
against the whole pool (itself included, which penalizes erroring
candidates); its error count is how many inputs it failed on. The winner
minimizes (risk, error count, generation order) lexicographically, and is
accepted only when it agrees with at least a majority of the pool and
errored nowhere.
"""

from __future__ import annotations

import json
import math
import uuid
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .config import RuntimeConfig
from .errors import (
    CloneFailure,
    IncompleteMatrix,
    LengthMismatch,
    MalformedSuite,
)
from .gateway import ChatMessage, ChatRequest, Gateway
from .generator import CandidateProgram
from .parsing import json_blocks
from .prompt_store import load_prompt
from .sandbox import ExecutionResult, Sandbox, TestInput, result_equal


@dataclass
class CandidatePool:
    candidates: list[CandidateProgram]

    def __post_init__(self) -> None:
        if not self.candidates:
            raise ValueError("candidate pool must be non-empty")
        indices = [c.generation_index for c in self.candidates]
        if indices != list(range(1, len(self.candidates) + 1)):
            raise ValueError(f"generation indices must be 1..N in order, got {indices}")

    def __len__(self) -> int:
        return len(self.candidates)


@dataclass
class ValidationReport:
    loss_matrix: list[list[int]]
    risk: list[int]
    err: list[int]
    selected_index: int  # 1-based generation index
    verdict: str  # accepted | rejected
    result_matrix: list[list[ExecutionResult]]
    suite: list[TestInput] = field(default_factory=list)
    candidates: list[dict] = field(default_factory=list)
    feedback: str | None = None

    @property
    def accepted(self) -> bool:
        return self.verdict == "accepted"

    def to_payload(self) -> dict:
        return {
            "loss_matrix": self.loss_matrix,
            "risk": self.risk,
            "err": self.err,
            "selected_index": self.selected_index,
            "verdict": self.verdict,
            "feedback": self.feedback,
            "suite": [t.to_dict() for t in self.suite],
            "candidates": self.candidates,
            "result_matrix": [
                [result.to_dict() for result in row] for row in self.result_matrix
            ],
        }


# -- pure scoring -----------------------------------------------------------


def mismatch_loss(row_i: list[ExecutionResult], row_j: list[ExecutionResult]) -> int:
    """1 if any aligned input discriminates the two result rows, else 0."""
    if len(row_i) != len(row_j):
        raise LengthMismatch(f"rows of length {len(row_i)} vs {len(row_j)}")
    if not row_i:
        raise LengthMismatch("rows must be non-empty")
    return max(0 if result_equal(a, b) else 1 for a, b in zip(row_i, row_j))


def score_pool(result_matrix: list[list[ExecutionResult]]) -> tuple[list[int], list[int]]:
    """Risk and error-count vectors for a complete N x K result grid."""
    n = len(result_matrix)
    if n == 0:
        raise IncompleteMatrix("empty result matrix")
    k = len(result_matrix[0])
    if any(len(row) != k for row in result_matrix):
        raise IncompleteMatrix("ragged result matrix")
    loss = loss_matrix(result_matrix)
    risk = [sum(loss[i]) for i in range(n)]
    err = [sum(1 for result in row if result.is_error) for row in result_matrix]
    return risk, err


def loss_matrix(result_matrix: list[list[ExecutionResult]]) -> list[list[int]]:
    n = len(result_matrix)
    loss = [[0] * n for _ in range(n)]
    for i in range(n):
        for j in range(i, n):
            value = mismatch_loss(result_matrix[i], result_matrix[j])
            loss[i][j] = value
            loss[j][i] = value
    return loss


def select_best(risk: list[int], err: list[int]) -> int:
    """1-based index of the candidate minimizing (risk, err), earliest
    generation order breaking ties."""
    if len(risk) != len(err) or not risk:
        raise LengthMismatch("risk and err vectors must be non-empty and aligned")
    best = min(range(len(risk)), key=lambda i: (risk[i], err[i], i))
    return best + 1


def acceptance_threshold(n: int) -> int:
    """Maximum risk at which the winner still agrees with a majority."""
    return n - math.ceil(n / 2)


# -- orchestration ------------------------------------------------------------


class Validator:
    def __init__(self, gateway: Gateway, sandbox: Sandbox, config: RuntimeConfig):
        self.gateway = gateway
        self.sandbox = sandbox
        self.config = config

    def propose_suite(self, functionality_spec: str, k: int) -> list[TestInput]:
        if k < 1:
            raise ValueError("suite size must be >= 1")
        prompt = (
            f"Functionality to test:\n{functionality_spec}\n\n"
            f"Propose exactly {k} input-only tests as a fenced JSON array."
        )
        response = self._call(prompt)
        try:
            return self._parse_suite(response.text, k)
        except MalformedSuite as first_error:
            retry = self._call(
                prompt + f"\n\nYour previous answer was unusable ({first_error}). "
                "Reply with exactly one fenced JSON array of test objects."
            )
            return self._parse_suite(retry.text, k)

    def _call(self, prompt: str):
        request = ChatRequest(
            messages=(
                ChatMessage("system", load_prompt("validator", self.config.prompt_dir)),
                ChatMessage("user", prompt),
            ),
            agent_name="validator",
            request_id=f"validator-{uuid.uuid4().hex[:12]}",
            temperature_hint=0.2,
        )
        return self.gateway.complete(request)

    @staticmethod
    def _parse_suite(text: str, k: int) -> list[TestInput]:
        arrays = [b for b in json_blocks(text) if isinstance(b, list)]
        if not arrays:
            raise MalformedSuite("response contains no fenced JSON array")
        raw = arrays[0]
        if len(raw) != k:
            raise MalformedSuite(f"expected {k} test inputs, got {len(raw)}")
        inputs = []
        labels: set[str] = set()
        for item in raw:
            try:
                parsed = TestInput.from_dict(item)
            except (ValueError, KeyError, TypeError) as exc:
                raise MalformedSuite(f"invalid test input {item!r}: {exc}") from exc
            if parsed.label in labels:
                raise MalformedSuite(f"duplicate test label {parsed.label!r}")
            labels.add(parsed.label)
            inputs.append(parsed)
        return inputs

    def validate(
        self, pool: CandidatePool, suite: list[TestInput], base_root: Path
    ) -> ValidationReport:
        if not suite:
            raise ValueError("suite must be non-empty")
        matrix = self._run_matrix(pool, suite, base_root)
        risk, err = score_pool(matrix)
        selected = select_best(risk, err)
        threshold = acceptance_threshold(len(pool))
        accepted = risk[selected - 1] <= threshold and err[selected - 1] == 0
        feedback = None if accepted else self._feedback(pool, suite, matrix)
        return ValidationReport(
            loss_matrix=loss_matrix(matrix),
            risk=risk,
            err=err,
            selected_index=selected,
            verdict="accepted" if accepted else "rejected",
            result_matrix=matrix,
            suite=list(suite),
            candidates=[
                {
                    "generation_index": c.generation_index,
                    "path": c.proposed_record.path,
                    "program_text": c.program_text,
                }
                for c in pool.candidates
            ],
            feedback=feedback,
        )

    def _run_matrix(
        self, pool: CandidatePool, suite: list[TestInput], base_root: Path
    ) -> list[list[ExecutionResult]]:
        cells: dict[tuple[int, int], ExecutionResult] = {}

        def run_cell(i: int, k: int) -> None:
            candidate = pool.candidates[i]
            cells[(i, k)] = self.sandbox.run(
                program_text=candidate.program_text,
                dependencies=candidate.dependencies,
                test_input=suite[k],
                base=base_root,
                program_path=candidate.proposed_record.path,
            )

        coords = [(i, k) for i in range(len(pool)) for k in range(len(suite))]
        try:
            with ThreadPoolExecutor(max_workers=self.config.worker_limit) as pool_exec:
                futures = [pool_exec.submit(run_cell, i, k) for i, k in coords]
                for future in futures:
                    future.result()
        except CloneFailure as exc:
            raise IncompleteMatrix(f"infrastructure failure while running cells: {exc}") from exc
        return [
            [cells[(i, k)] for k in range(len(suite))] for i in range(len(pool))
        ]

    @staticmethod
    def _feedback(
        pool: CandidatePool, suite: list[TestInput], matrix: list[list[ExecutionResult]]
    ) -> str:
        lines = ["Validation did not reach consensus."]
        for k, test_input in enumerate(suite):
            column = [matrix[i][k] for i in range(len(pool))]
            classes: list[ExecutionResult] = []
            for result in column:
                if not any(result_equal(result, seen) for seen in classes):
                    classes.append(result)
            if len(classes) > 1 or any(r.is_error for r in column):
                lines.append(f"- input {test_input.label!r} (argv={list(test_input.argv)}):")
                for i, result in enumerate(column):
                    brief = result.error_class if result.is_error else "ok"
                    stdout_head = result.stdout_norm[:60]
                    lines.append(
                        f"    candidate {i + 1}: {result.status}"
                        f"{f'/{brief}' if result.is_error else ''}"
                        f" stdout={stdout_head!r} fs_changes={len(result.fs_delta)}"
                    )
                    if result.is_error and result.stderr_tail:
                        lines.append(f"      stderr: {result.stderr_tail[-300:]}")
        return "\n".join(lines)


def report_payload_json(report: ValidationReport) -> str:
    return json.dumps(report.to_payload(), ensure_ascii=False)
