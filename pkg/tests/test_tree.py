import json
import random
import string

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from evoware.tree import (
    DESCRIPTION_LIMIT,
    FunctionalityRecord,
    TreeNode,
    build_tree,
    normalized_relative_path,
    parse_tree,
    serialize_tree,
    tree_to_dict,
)


def random_tree(rng: random.Random, depth: int = 0) -> TreeNode:
    name = "".join(rng.choices(string.ascii_lowercase + string.digits + "_-.", k=rng.randint(1, 12)))
    description = "".join(rng.choices(string.printable.replace("\x0b", "").replace("\x0c", ""), k=rng.randint(0, 250)))
    if depth >= 3 or rng.random() < 0.45:
        record = None
        if rng.random() < 0.6:
            record = FunctionalityRecord(
                path=f"{name}",
                purpose="p" * rng.randint(1, 30),
                usage="u" * rng.randint(1, 30),
                dependencies=[f"dep{i}" for i in range(rng.randint(0, 3))],
                created_at="2026-08-08T00:00:00+00:00",
                updated_at="2026-08-08T00:00:00+00:00",
            )
        return TreeNode(name=name, kind="file", description=description, record=record)
    children = [random_tree(rng, depth + 1) for _ in range(rng.randint(0, 4))]
    return TreeNode(name=name, kind="directory", description=description, children=children)


class TestRoundTrip:
    def test_serialize_parse_serialize_is_identity(self):
        rng = random.Random(42)
        for _ in range(200):
            tree = random_tree(rng)
            first = serialize_tree(tree)
            second = serialize_tree(parse_tree(first))
            assert first == second

    @given(st.integers(min_value=0, max_value=2**32 - 1))
    @settings(max_examples=60, deadline=None)
    def test_round_trip_property(self, seed):
        tree = random_tree(random.Random(seed))
        first = serialize_tree(tree)
        assert serialize_tree(parse_tree(first)) == first


class TestSchema:
    def test_exact_key_names(self, root):
        record = FunctionalityRecord(path="tool.py", purpose="does things", usage="run it")
        (root / "tool.py").write_text("print('hi')")
        tree = build_tree(root, {"tool.py": record})
        raw = json.loads(serialize_tree(tree))
        assert set(raw) == {"name", "kind", "description", "children"}
        file_node = raw["children"][0]
        assert set(file_node) == {"name", "kind", "description", "record"}
        assert set(file_node["record"]) == {
            "path",
            "purpose",
            "usage",
            "dependencies",
            "created_at",
            "updated_at",
        }

    def test_description_truncated_in_serialization(self):
        node = TreeNode(name="n", kind="file", description="x" * 500)
        raw = tree_to_dict(node)
        assert len(raw["description"]) == DESCRIPTION_LIMIT

    def test_directory_description_from_children(self, root):
        (root / "a.py").write_text("")
        (root / "b.py").write_text("")
        records = {
            "a.py": FunctionalityRecord(path="a.py", purpose="alpha tool", usage="u"),
            "b.py": FunctionalityRecord(path="b.py", purpose="beta tool", usage="u"),
        }
        tree = build_tree(root, records)
        assert tree.description == "alpha tool; beta tool"


class TestPathValidation:
    @pytest.mark.parametrize(
        "bad",
        ["../evil.sh", "a/../../b", "/abs/path", "", "  padded.py", ".evoware/x", ".evoware-env"],
    )
    def test_rejected(self, bad):
        with pytest.raises(ValueError):
            normalized_relative_path(bad)

    @pytest.mark.parametrize("good", ["tool.py", "docs/conv.py", "a/b/c.txt"])
    def test_accepted(self, good):
        assert normalized_relative_path(good) == good

    def test_redundant_dot_segment_normalized(self):
        assert normalized_relative_path("a/./b") == "a/b"

    def test_backslashes_normalized(self):
        assert normalized_relative_path("docs\\tool.py") == "docs/tool.py"


class TestFind:
    def test_find_file(self, root):
        (root / "docs").mkdir()
        (root / "docs" / "conv.py").write_text("")
        record = FunctionalityRecord(path="docs/conv.py", purpose="p", usage="u")
        tree = build_tree(root, {"docs/conv.py": record})
        node = tree.find_file("docs/conv.py")
        assert node is not None and node.record.purpose == "p"
        assert tree.find_file("docs") is None
        assert tree.find_file("missing.py") is None
