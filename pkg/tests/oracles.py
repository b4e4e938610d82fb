"""Independent reference implementations used to cross-check the package.

Everything here is written from the documented behavior, not from the package
internals: search is a linear scan over all records, closure is matrix
reachability, and the end-to-end link oracle rebuilds the scoring formula
step by step. Only data (the stopword list) and plain value types (EntityId,
ItemRecord, config objects) are shared with the package.
"""

from __future__ import annotations

import math
import unicodedata
from collections import Counter

import numpy as np

from tablink import EntityId
from tablink.text import STOPWORDS

TIER_SCORES = {"TARGET": 1.0, "NEAR_MISS": 0.8, "GOOD": 0.6, "OK": 0.4,
               "UNKNOWN": 0.2}
MATCH_RANK = {"exact_label": 2, "exact_alias": 1, "partial": 0}


def o_normalize(text: str) -> str:
    return " ".join(unicodedata.normalize("NFC", text).lower().split())


def o_tokens(text: str) -> list[str]:
    return [t for t in o_normalize(text).split(" ")
            if t and t not in STOPWORDS]


def o_id_key(eid: EntityId) -> tuple[int, int]:
    return (0 if eid.kind == "item" else 1, eid.num)


class OracleKB:
    """Precomputed per-record text views for the linear-scan comparators."""

    def __init__(self, records):
        self.records = list(records)
        self.labels = []
        self.alias_sets = []
        self.token_sets = []
        for r in self.records:
            self.labels.append(o_normalize(r.label))
            self.alias_sets.append(frozenset(o_normalize(a) for a in r.aliases))
            toks = set(o_tokens(r.label))
            for a in r.aliases:
                toks.update(o_tokens(a))
            self.token_sets.append(frozenset(toks))


def o_search(kb: OracleKB, mention: str, k: int):
    """Linear scan over every record; returns ranked (record, tier, overlap)
    triples, or None when the mention is empty after normalization."""
    norm = o_normalize(mention)
    toks: list[str] = []
    for t in o_tokens(mention):
        if t not in toks:
            toks.append(t)
    if not norm or not toks:
        return None
    needed = math.ceil(len(toks) / 2)

    hits = []
    records = kb.records
    labels = kb.labels
    alias_sets = kb.alias_sets
    token_sets = kb.token_sets
    for i in range(len(records)):
        tset = token_sets[i]
        if norm == labels[i] or norm in alias_sets[i] \
                or any(t in tset for t in toks):
            hits.append(i)

    out = []
    for i in hits:
        if norm == labels[i]:
            out.append((records[i], "exact_label", 1.0))
        elif norm in alias_sets[i]:
            out.append((records[i], "exact_alias", 1.0))
        else:
            covered = sum(1 for t in toks if t in kb.token_sets[i])
            if covered >= needed:
                out.append((records[i], "partial", covered / len(toks)))
    out.sort(key=lambda h: (-MATCH_RANK[h[1]], -h[2], -h[0].sitelinks_count,
                            o_id_key(h[0].id)))
    return out[:k]


def warshall_ancestors(n: int, edge_pairs) -> list[set[int]]:
    """Transitive closure by the Floyd-Warshall boolean recurrence, diagonal
    (self-reachability) removed."""
    m = np.zeros((n, n), dtype=bool)
    for a, b in edge_pairs:
        m[a, b] = True
    for mid in range(n):
        m |= np.outer(m[:, mid], m[mid, :])
    np.fill_diagonal(m, False)
    return [set(np.nonzero(m[i])[0]) for i in range(n)]


def squaring_ancestors(nodes, edge_pairs) -> dict:
    """Transitive closure by repeated boolean matrix squaring; same contract
    as warshall_ancestors but scales to a few thousand nodes."""
    order = sorted(nodes, key=o_id_key)
    pos = {node: i for i, node in enumerate(order)}
    n = len(order)
    m = np.zeros((n, n), dtype=np.float32)
    for a, b in edge_pairs:
        m[pos[a], pos[b]] = 1.0
    reach = m.copy()
    while True:
        nxt = np.minimum(reach + reach @ reach, 1.0)
        if np.array_equal(nxt, reach):
            break
        reach = nxt
    np.fill_diagonal(reach, 0.0)
    return {node: frozenset(order[j] for j in np.nonzero(reach[i])[0])
            for node, i in pos.items()}


def o_has_type(record, type_id: EntityId, ancestors: dict) -> bool:
    return any(d == type_id or type_id in ancestors.get(d, frozenset())
               for d in record.direct_types)


def o_tier(record, config, ancestors: dict, expected) -> str:
    if any(o_has_type(record, b, ancestors) for b in config.bad_ids):
        return "BAD"
    if expected:
        if any(o_has_type(record, t, ancestors)
               for t in config.resolve_names(expected)):
            return "TARGET"
        for name in expected:
            if any(o_has_type(record, t, ancestors)
                   for t in config.near_miss_ids.get(name, ())):
                return "NEAR_MISS"
    inferred = {r.then_type_name for r in config.property_inference
                if r.if_property in record.flagged_props}
    if (inferred & set(config.good_names)
            or any(o_has_type(record, t, ancestors) for t in config.good_ids)):
        return "GOOD"
    if (inferred & set(config.ok_names)
            or any(o_has_type(record, t, ancestors) for t in config.ok_ids)):
        return "OK"
    return "UNKNOWN"


def o_context_sim(context, record) -> float:
    if not context:
        return 0.0
    a = Counter(o_tokens(context))
    if not a:
        return 0.0
    b = Counter(o_tokens(" ".join([record.label, record.description,
                                   *record.aliases])))
    if not b:
        return 0.0
    dot = sum(n * b[t] for t, n in a.items())
    if dot == 0:
        return 0.0
    na = sum(n * n for n in a.values())
    nb = sum(n * n for n in b.values())
    return min(1.0, dot / math.sqrt(na * nb))


def o_link(kb: OracleKB, ancestors: dict, config, mention: str, mode: str,
           context=None, expected=None):
    """Brute-force pipeline: linear-scan retrieval, tier classification,
    scoring, argmax with documented tie-breaks, NIL threshold.

    Returns the chosen record id (or None for NIL), or the string "EMPTY"
    when the mention has no searchable content.
    """
    raw = o_search(kb, mention, config.params.k)
    if raw is None:
        return "EMPTY"
    expected = tuple(sorted(set(expected))) if expected else ()
    w = config.weights

    survivors = []
    for record, tier_name, overlap in raw:
        tier = o_tier(record, config, ancestors, expected)
        if tier == "BAD":
            continue
        survivors.append((record, tier_name, overlap, tier))
    s_max = max((r.sitelinks_count for r, _, _, _ in survivors), default=0)

    scored = []
    for record, match_tier, overlap, tier in survivors:
        type_score = TIER_SCORES[tier]
        if match_tier == "exact_label":
            match_score = 1.0
        elif match_tier == "exact_alias":
            match_score = 0.8
        else:
            match_score = 0.4 * overlap
        prominence = record.sitelinks_count / s_max if s_max else 0.0
        context_sim = o_context_sim(context, record)
        boosts = 0.0
        if mode == "header" and record.id.kind == "property":
            boosts += config.params.header_property_boost
        final = (w.w_type * type_score + w.w_match * match_score
                 + w.w_prom * prominence + w.w_ctx * context_sim) + boosts
        scored.append((record, final))

    if not scored:
        return None
    best = min(scored, key=lambda s: (-s[1], -s[0].sitelinks_count,
                                      o_id_key(s[0].id)))
    if best[1] >= config.params.min_link_score:
        return best[0].id
    return None
