"""Transitive type-hierarchy closure.

Materializes, for every type node, the full set of strict ancestors reachable
through subclass_of (items) or subproperty_of (properties) edges, so that
"instance of T, direct or inherited" is a set lookup at link time.
"""

from __future__ import annotations

import logging
from collections import deque
from collections.abc import Iterable, Mapping
from pathlib import Path

from .kb import EntityId, ItemRecord, TypeEdge

log = logging.getLogger(__name__)


class TypeClosure:
    """Immutable ancestor map. Self is excluded even inside cycles; members
    of a cycle are mutual ancestors. No cross-kind ancestry by construction."""

    def __init__(self, ancestors: Mapping[EntityId, frozenset[EntityId]],
                 rejected_edges: tuple[TypeEdge, ...] = ()):
        self._ancestors = dict(ancestors)
        self.rejected_edges = rejected_edges

    def __contains__(self, type_id: EntityId) -> bool:
        return type_id in self._ancestors

    def __len__(self) -> int:
        return len(self._ancestors)

    def nodes(self) -> list[EntityId]:
        return sorted(self._ancestors, key=EntityId.sort_key)

    def ancestors_of(self, type_id: EntityId) -> frozenset[EntityId]:
        return self._ancestors.get(type_id, frozenset())

    def reaches(self, child: EntityId, ancestor: EntityId) -> bool:
        return ancestor in self._ancestors.get(child, frozenset())


def build_closure(edges: Iterable[TypeEdge],
                  extra_nodes: Iterable[EntityId] = ()) -> TypeClosure:
    """Compute full reachability over the kind-consistent edges.

    Cross-kind or unknown-relation edges are logged and skipped, never fatal.
    extra_nodes (typically every direct_types target seen in the records) are
    included with whatever ancestry the edges give them, or none.
    """
    parents: dict[EntityId, set[EntityId]] = {}
    nodes: set[EntityId] = set(extra_nodes)
    rejected = []
    for edge in edges:
        if not edge.is_kind_consistent:
            rejected.append(edge)
            continue
        nodes.add(edge.child)
        nodes.add(edge.parent)
        parents.setdefault(edge.child, set()).add(edge.parent)
    if rejected:
        log.warning("skipped %d cross-kind or unknown-relation type edge(s)",
                    len(rejected))

    ancestors: dict[EntityId, frozenset[EntityId]] = {}
    for node in nodes:
        # BFS from the node's direct parents; reaching the node again via a
        # cycle never re-enqueues it, keeping self out of its own ancestry.
        seen: set[EntityId] = set()
        queue = deque(parents.get(node, ()))
        while queue:
            cur = queue.popleft()
            if cur in seen:
                continue
            seen.add(cur)
            queue.extend(p for p in parents.get(cur, ()) if p not in seen)
        seen.discard(node)
        ancestors[node] = frozenset(seen)
    return TypeClosure(ancestors, tuple(rejected))


def has_type(record: ItemRecord, type_id: EntityId, closure: TypeClosure) -> bool:
    """True iff type_id is a direct type of the record or an ancestor of one.
    Ids absent from the closure simply have no ancestors."""
    for direct in record.direct_types:
        if direct == type_id or closure.reaches(direct, type_id):
            return True
    return False


def write_closure(path: str | Path, closure: TypeClosure) -> int:
    """One line per node: the node id, then its ancestors in ascending order,
    space-separated."""
    n = 0
    with open(path, "w", encoding="utf-8", newline="\n") as fp:
        for node in closure.nodes():
            ancestors = sorted(closure.ancestors_of(node), key=EntityId.sort_key)
            fp.write(" ".join([node.raw] + [a.raw for a in ancestors]) + "\n")
            n += 1
    return n


def read_closure(path: str | Path) -> TypeClosure:
    ancestors = {}
    with open(path, "r", encoding="utf-8") as fp:
        for line in fp:
            parts = line.split()
            if not parts:
                continue
            node = EntityId.parse(parts[0])
            ancestors[node] = frozenset(EntityId.parse(p) for p in parts[1:])
    return TypeClosure(ancestors)
