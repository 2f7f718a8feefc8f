"""Hierarchical metadata tree mirroring the managed root directory.

Each node describes one directory or file; file nodes may carry the
functionality record written at integration time. Serialization is
canonical: fixed key order, two-space indent, descriptions truncated so
agent-facing snapshots stay within token budgets. serialize(parse(s)) == s
for any s produced by serialize.
"""

from __future__ import annotations

import copy
import json
from dataclasses import dataclass, field
from pathlib import Path, PurePosixPath

BOOKKEEPING_DIR = ".evoware"
ENV_SIDE_CHANNEL = ".evoware-env"
DESCRIPTION_LIMIT = 200
ROOT_NODE_NAME = "."


@dataclass
class FunctionalityRecord:
    """Integration metadata for one stored artifact: where it lives, what
    it is for and how to invoke it."""

    path: str
    purpose: str
    usage: str
    dependencies: list[str] = field(default_factory=list)
    created_at: str | None = None
    updated_at: str | None = None

    def to_dict(self) -> dict:
        return {
            "path": self.path,
            "purpose": self.purpose,
            "usage": self.usage,
            "dependencies": list(self.dependencies),
            "created_at": self.created_at,
            "updated_at": self.updated_at,
        }

    @classmethod
    def from_dict(cls, raw: dict) -> "FunctionalityRecord":
        return cls(
            path=raw["path"],
            purpose=raw["purpose"],
            usage=raw["usage"],
            dependencies=list(raw.get("dependencies", [])),
            created_at=raw.get("created_at"),
            updated_at=raw.get("updated_at"),
        )


@dataclass
class TreeNode:
    name: str
    kind: str  # directory | file
    description: str = ""
    children: list["TreeNode"] = field(default_factory=list)
    record: FunctionalityRecord | None = None

    def copy(self) -> "TreeNode":
        return copy.deepcopy(self)

    def find_file(self, rel_path: str) -> "TreeNode | None":
        """Locate a file node by root-relative path."""
        parts = PurePosixPath(rel_path).parts
        node = self
        for part in parts:
            matches = [c for c in node.children if c.name == part]
            if not matches:
                return None
            node = matches[0]
        return node if node.kind == "file" else None

    def file_nodes(self) -> list["TreeNode"]:
        found: list[TreeNode] = []
        stack = [self]
        while stack:
            node = stack.pop()
            if node.kind == "file":
                found.append(node)
            else:
                stack.extend(reversed(node.children))
        return found


def _truncate(text: str) -> str:
    return text[:DESCRIPTION_LIMIT]


def tree_to_dict(node: TreeNode) -> dict:
    out: dict = {
        "name": node.name,
        "kind": node.kind,
        "description": _truncate(node.description),
    }
    if node.kind == "directory":
        out["children"] = [tree_to_dict(c) for c in node.children]
    if node.record is not None:
        out["record"] = node.record.to_dict()
    return out


def tree_from_dict(raw: dict) -> TreeNode:
    record = None
    if raw.get("record") is not None:
        record = FunctionalityRecord.from_dict(raw["record"])
    return TreeNode(
        name=raw["name"],
        kind=raw["kind"],
        description=raw.get("description", ""),
        children=[tree_from_dict(c) for c in raw.get("children", [])],
        record=record,
    )


def serialize_tree(node: TreeNode) -> str:
    return json.dumps(tree_to_dict(node), ensure_ascii=False, indent=2) + "\n"


def parse_tree(text: str) -> TreeNode:
    return tree_from_dict(json.loads(text))


def normalized_relative_path(path: str) -> str:
    """Validate and normalize a root-relative artifact path.

    Raises ValueError on anything that could escape the root or collide
    with runtime bookkeeping.
    """
    if not path or path != path.strip():
        raise ValueError(f"empty or whitespace-padded path: {path!r}")
    pure = PurePosixPath(path.replace("\\", "/"))
    if pure.is_absolute():
        raise ValueError(f"absolute path not allowed: {path!r}")
    parts = pure.parts
    if not parts:
        raise ValueError(f"empty path: {path!r}")
    if any(part in ("..", ".") for part in parts):
        raise ValueError(f"traversal segment in path: {path!r}")
    if parts[0] in (BOOKKEEPING_DIR, ENV_SIDE_CHANNEL):
        raise ValueError(f"path collides with runtime bookkeeping: {path!r}")
    return str(PurePosixPath(*parts))


def build_tree(root: Path, records: dict[str, FunctionalityRecord]) -> TreeNode:
    """Scan the directory and build the metadata tree.

    Directory descriptions are derived from child metadata; files without a
    record (created by stored programs at invocation time) get an empty
    description so a cold rescan is reproducible.
    """

    def scan(directory: Path, rel: PurePosixPath, name: str) -> TreeNode:
        children: list[TreeNode] = []
        entries = sorted(directory.iterdir(), key=lambda p: p.name)
        for entry in entries:
            if entry.name == BOOKKEEPING_DIR or entry.name == ENV_SIDE_CHANNEL:
                continue
            child_rel = rel / entry.name
            if entry.is_dir():
                children.append(scan(entry, child_rel, entry.name))
            else:
                record = records.get(str(child_rel))
                children.append(
                    TreeNode(
                        name=entry.name,
                        kind="file",
                        description=record.purpose if record else "",
                        record=record,
                    )
                )
        description = _truncate(
            "; ".join(c.description for c in children if c.description)
        )
        return TreeNode(name=name, kind="directory", description=description, children=children)

    return scan(root, PurePosixPath(), ROOT_NODE_NAME)
