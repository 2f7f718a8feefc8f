"""evoware: a runtime for self-evolving software.

Natural-language requirements come in; the leader decides whether stored
functionality already covers them, otherwise candidate programs are
generated, validated by execution consensus in sandboxed clones, integrated
into the managed artifact tree and invoked to answer the user.
"""

from .config import RuntimeConfig, load_config
from .data_manager import DataManager
from .events import EventLog, EvolutionEvent
from .gateway import ChatMessage, ChatRequest, ChatResponse, Gateway, ReplayBackend, ReplayScript
from .generator import CandidateProgram, GenerationRequest, Generator, parse_candidate
from .leader import Leader, LeaderDecision, Requirement
from .sandbox import ExecutionResult, Sandbox, TestInput, canonicalize_stdout, result_equal
from .session import Runtime, Session
from .tree import FunctionalityRecord, TreeNode, parse_tree, serialize_tree
from .validator import (
    CandidatePool,
    ValidationReport,
    Validator,
    acceptance_threshold,
    mismatch_loss,
    score_pool,
    select_best,
)

__version__ = "0.1.0"

__all__ = [
    "CandidatePool",
    "CandidateProgram",
    "ChatMessage",
    "ChatRequest",
    "ChatResponse",
    "DataManager",
    "EventLog",
    "EvolutionEvent",
    "ExecutionResult",
    "FunctionalityRecord",
    "Gateway",
    "GenerationRequest",
    "Generator",
    "Leader",
    "LeaderDecision",
    "ReplayBackend",
    "ReplayScript",
    "Requirement",
    "Runtime",
    "RuntimeConfig",
    "Sandbox",
    "Session",
    "TestInput",
    "TreeNode",
    "ValidationReport",
    "Validator",
    "acceptance_threshold",
    "canonicalize_stdout",
    "load_config",
    "mismatch_loss",
    "parse_candidate",
    "parse_tree",
    "result_equal",
    "score_pool",
    "select_best",
    "serialize_tree",
]
