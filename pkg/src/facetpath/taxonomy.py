"""Category taxonomy: product-to-path mapping and the node vocabulary.

A shop taxonomy is a tree of category labels. Every product carries exactly
one full path from depth 1 down to its own depth (the root is implied and
never stored). Node identity is the pair (label, depth): the same label may
legitimately appear under different parents and at different depths
("shoes" under running and under soccer), and scoping by depth keeps the
decoder vocabulary collision-free.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable

__all__ = [
    "NodeId",
    "Path",
    "TaxonomyTree",
    "START",
    "END",
    "CatalogError",
    "load_catalog",
    "truncate",
    "is_valid_path",
    "node_vocabulary",
]


class CatalogError(ValueError):
    """Raised for malformed or inconsistent catalog files."""


@dataclass(frozen=True, order=True)
class NodeId:
    """One category label at one depth. Sentinels use depth 0."""

    depth: int
    label: str

    def __repr__(self) -> str:
        return f"NodeId({self.label!r}@{self.depth})"


START = NodeId(0, "<start>")
END = NodeId(0, "<end>")


@dataclass(frozen=True)
class Path:
    """An ordered run of category labels from depth 1 downward.

    Catalog paths are always non-empty; the empty path is reserved for
    "no facet suggested" model outputs.
    """

    labels: tuple[str, ...]

    @classmethod
    def of(cls, *labels: str) -> "Path":
        return cls(tuple(labels))

    @classmethod
    def from_string(cls, s: str, sep: str = "/") -> "Path":
        parts = [p for p in s.split(sep) if p]
        return cls(tuple(parts))

    @property
    def depth(self) -> int:
        return len(self.labels)

    @property
    def nodes(self) -> tuple[NodeId, ...]:
        return tuple(NodeId(d + 1, lab) for d, lab in enumerate(self.labels))

    def is_prefix_of(self, other: "Path") -> bool:
        return self.labels == other.labels[: len(self.labels)]

    def __len__(self) -> int:
        return len(self.labels)

    def __bool__(self) -> bool:
        return bool(self.labels)

    def __str__(self) -> str:
        return "/".join(self.labels)


EMPTY_PATH = Path(())


class TaxonomyTree:
    """Immutable index of product paths: built once, shared read-only."""

    def __init__(self, product_to_path: dict[str, Path]):
        if not product_to_path:
            raise CatalogError("empty catalog")
        self._product_to_path = dict(product_to_path)
        self._prefixes: set[tuple[str, ...]] = set()
        self._children: dict[tuple[str, ...], set[str]] = {}
        self.max_depth = 0
        for path in self._product_to_path.values():
            labels = path.labels
            self.max_depth = max(self.max_depth, len(labels))
            for k in range(len(labels)):
                prefix = labels[:k]
                self._prefixes.add(labels[: k + 1])
                self._children.setdefault(prefix, set()).add(labels[k])

    @property
    def product_to_path(self) -> dict[str, Path]:
        return self._product_to_path

    def path_of(self, product_id: str) -> Path | None:
        return self._product_to_path.get(product_id)

    def __contains__(self, product_id: str) -> bool:
        return product_id in self._product_to_path

    def __len__(self) -> int:
        return len(self._product_to_path)

    def children(self, prefix: Path | Iterable[str] = ()) -> tuple[NodeId, ...]:
        """Child nodes observed directly under ``prefix`` (root by default)."""
        labels = prefix.labels if isinstance(prefix, Path) else tuple(prefix)
        kids = self._children.get(labels, set())
        depth = len(labels) + 1
        return tuple(NodeId(depth, lab) for lab in sorted(kids))

    def has_prefix(self, labels: tuple[str, ...]) -> bool:
        return labels in self._prefixes


def load_catalog(catalog_file: str) -> TaxonomyTree:
    """Load a JSON Lines catalog into a taxonomy tree.

    Each line is one product object: ``{"product_id": str, "path": [str, ...],
    "description": str}`` with the path ordered root-child first.
    """
    product_to_path: dict[str, Path] = {}
    with open(catalog_file, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                row = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CatalogError(f"malformed catalog row at line {lineno}: {exc}") from exc
            if not isinstance(row, dict) or "product_id" not in row or "path" not in row:
                raise CatalogError(f"malformed catalog row at line {lineno}: missing product_id/path")
            pid = str(row["product_id"])
            raw_path = row["path"]
            if not isinstance(raw_path, list) or not raw_path or not all(isinstance(x, str) and x for x in raw_path):
                raise CatalogError(f"malformed catalog row at line {lineno}: path must be a non-empty list of labels")
            if pid in product_to_path:
                raise CatalogError(f"duplicate product id {pid!r} at line {lineno}")
            product_to_path[pid] = Path(tuple(raw_path))
    if not product_to_path:
        raise CatalogError("empty catalog")
    return TaxonomyTree(product_to_path)


def load_descriptions(catalog_file: str) -> dict[str, str]:
    """Product id -> short description text, from the same catalog file."""
    out: dict[str, str] = {}
    with open(catalog_file, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            row = json.loads(line)
            out[str(row["product_id"])] = str(row.get("description", ""))
    return out


def truncate(path: Path, depth: int) -> Path:
    """First ``min(depth, len(path))`` nodes of ``path``."""
    if depth < 1:
        raise ValueError(f"depth must be >= 1, got {depth}")
    return Path(path.labels[:depth])


def is_valid_path(tree: TaxonomyTree, path: Path) -> bool:
    """True iff ``path`` is a prefix of at least one product's full path."""
    return tree.has_prefix(path.labels)


def node_vocabulary(tree: TaxonomyTree) -> list[NodeId]:
    """All distinct nodes plus START/END, in a stable (sorted) order.

    The ordering only depends on the catalog content, so model checkpoints
    keep working across process restarts.
    """
    seen: set[NodeId] = set()
    for path in tree.product_to_path.values():
        seen.update(path.nodes)
    return [START, END] + sorted(seen)
