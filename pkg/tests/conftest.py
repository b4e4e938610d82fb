import json
from types import SimpleNamespace

import pytest

from tablink import (
    Index,
    build_closure,
    generate_synthetic_kb,
    load_config,
    read_edges,
    read_gold,
    read_records,
)


def build_bundle(out_dir, **kw):
    """Generate a synthetic corpus and load every pipeline stage from it."""
    result = generate_synthetic_kb(out_dir, **kw)
    records = list(read_records(result.records_path))
    edges = list(read_edges(result.edges_path))
    extra = sorted({t for r in records for t in r.direct_types})
    closure = build_closure(edges, extra_nodes=extra)
    with open(result.mentions_path, "r", encoding="utf-8") as fp:
        mentions = [line.rstrip("\n") for line in fp if line.strip()]
    return SimpleNamespace(
        dir=result.out_dir,
        result=result,
        truth=json.loads(result.truth_path.read_text(encoding="utf-8")),
        records=records,
        edges=edges,
        closure=closure,
        index=Index(records),
        config=load_config(result.config_path),
        gold=read_gold(result.gold_path),
        mentions=mentions,
    )


@pytest.fixture(scope="session")
def small_kb(tmp_path_factory):
    return build_bundle(tmp_path_factory.mktemp("kb_small"),
                        seed=1, n_items=2000, n_types=120, n_tables=6)


@pytest.fixture(scope="session")
def big_kb(tmp_path_factory):
    """Acceptance-scale corpus; session-scoped because it takes seconds."""
    return build_bundle(tmp_path_factory.mktemp("kb_big"),
                        seed=7, n_items=100_000, n_types=1500, n_tables=12)
