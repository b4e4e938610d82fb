import contextlib
import io
import json
import subprocess
import sys
from pathlib import Path
from types import SimpleNamespace

import pytest

from tablink.cli import run


def quiet_run(argv):
    """run() with captured streams, for fixture plumbing."""
    out, err = io.StringIO(), io.StringIO()
    with contextlib.redirect_stdout(out), contextlib.redirect_stderr(err):
        code = run(argv)
    return code, out.getvalue(), err.getvalue()


@pytest.fixture(scope="module")
def pipeline(tmp_path_factory):
    """A full corpus processed end to end through the command line."""
    root = tmp_path_factory.mktemp("cli")
    kb = root / "kb"
    code, out, _ = quiet_run(["gen-kb", "--out", str(kb), "--seed", "11",
                              "--items", "800", "--types", "60",
                              "--tables", "4"])
    assert code == 0
    gen = json.loads(out)

    records = root / "records.jsonl"
    edges = root / "edges.jsonl"
    code, out, _ = quiet_run([
        "ingest", "--dump", str(kb / "dump.jsonl"),
        "--out-records", str(records), "--out-edges", str(edges),
        "--watchlist", "P50001,P50002", "--jobs", "2"])
    assert code == 0
    stats = json.loads(out)
    assert stats["records_emitted"] == gen["labeled"]

    closure = root / "closure.txt"
    code, out, _ = quiet_run(["closure", "--edges", str(edges),
                              "--records", str(records),
                              "--out", str(closure)])
    assert code == 0

    index_dir = root / "index"
    code, out, _ = quiet_run(["build-index", "--records", str(records),
                              "--out", str(index_dir)])
    assert code == 0
    build = json.loads(out)

    return SimpleNamespace(root=root, kb=kb, records=records, edges=edges,
                           closure=closure, index=index_dir,
                           config=kb / "config.json",
                           build_id=build["build_id"])


def common(p):
    return ["--index", str(p.index), "--closure", str(p.closure),
            "--config", str(p.config)]


def test_version_and_help():
    code, out, _ = quiet_run(["--version"])
    assert code == 0
    assert out.strip() == "tablink 0.1.0 (format 1)"
    code, out, _ = quiet_run(["--help"])
    assert code == 0
    assert "SUBCOMMAND" in out


def test_usage_errors_exit_1():
    for argv in ([], ["no-such-command"], ["ingest"],
                 ["link", "--mention", "x"],  # missing required inputs
                 ["link", "--mode", "bogus", "--mention", "x",
                  "--index", "i", "--closure", "c", "--config", "g"]):
        code, _, err = quiet_run(argv)
        assert code == 1, argv
        assert "error:" in err


def test_missing_input_file_exits_2(tmp_path):
    code, _, err = quiet_run([
        "ingest", "--dump", str(tmp_path / "nope.jsonl"),
        "--out-records", str(tmp_path / "r"), "--out-edges", str(tmp_path / "e")])
    assert code == 2
    assert "error:" in err


def test_domain_errors_exit_1(pipeline, tmp_path):
    # Not an index directory -> IndexUnavailable.
    code, _, err = quiet_run(["link", "--mention", "x",
                              "--index", str(tmp_path),
                              "--closure", str(pipeline.closure),
                              "--config", str(pipeline.config)])
    assert code == 1 and "error:" in err
    # Whitespace mention -> EmptyMention.
    code, _, err = quiet_run(["link", "--mention", "   ", *common(pipeline)])
    assert code == 1 and "error:" in err


def test_link_stdout_is_pure_json(pipeline, capsys):
    truth = json.loads((pipeline.kb / "truth.json").read_text(encoding="utf-8"))
    plant = next(p for p in truth["plants"] if p["pattern"] == "bad_twin")
    code = run(["link", "--mention", plant["label"], *common(pipeline)])
    captured = capsys.readouterr()
    assert code == 0
    payload = json.loads(captured.out)  # would fail on any stray output
    assert payload["chosen"]["record"]["id"] == plant["gold"]
    manifest = json.loads(captured.err.strip().splitlines()[-1])
    assert manifest["subcommand"] == "link"
    assert manifest["index_build_id"] == pipeline.build_id


def test_link_out_file_keeps_stdout_empty(pipeline, tmp_path, capsys):
    out_path = tmp_path / "result.json"
    code = run(["link", "--mention", "anything here", *common(pipeline),
                "--out", str(out_path)])
    captured = capsys.readouterr()
    assert code == 0
    assert captured.out == ""
    json.loads(out_path.read_text(encoding="utf-8"))


def test_manifest_file_and_reproducibility(pipeline, tmp_path):
    manifests = []
    for i in range(2):
        path = tmp_path / f"m{i}.json"
        code, out, err = quiet_run(["--manifest", str(path),
                                    "link", "--mention", "zzz unlinkable",
                                    *common(pipeline)])
        assert code == 0
        assert err == ""  # manifest redirected away from stderr
        obj = json.loads(path.read_text(encoding="utf-8"))
        assert isinstance(obj.pop("wall_time_s"), float)
        manifests.append(obj)
    assert manifests[0] == manifests[1]
    assert manifests[0]["config_hash"]
    assert manifests[0]["closure_hash"]
    assert manifests[0]["format_version"] == 1


def test_link_table_eval_bench_flow(pipeline, tmp_path, capsys):
    truth = json.loads((pipeline.kb / "truth.json").read_text(encoding="utf-8"))
    ann_dir = tmp_path / "annotations"
    ann_dir.mkdir()
    for meta in truth["tables"]:
        code = run(["link-table",
                    "--table", str(pipeline.kb / "tables" / meta["file"]),
                    *common(pipeline), "--jobs", "2",
                    "--cache", str(tmp_path / "cache"),
                    "--out", str(ann_dir / (meta["table_id"] + ".json"))])
        capsys.readouterr()
        assert code == 0

    code = run(["eval", "--annotations", str(ann_dir),
                "--gold", str(pipeline.kb / "gold.jsonl")])
    captured = capsys.readouterr()
    assert code == 0
    report = json.loads(captured.out)
    assert report["precision"] == 1.0
    assert report["candidate_recall"] == 1.0
    assert not report["degenerate"]

    mentions = tmp_path / "mentions.txt"
    all_lines = (pipeline.kb / "mentions.txt").read_text(
        encoding="utf-8").splitlines()
    mentions.write_text("\n".join(all_lines[:40]) + "\n", encoding="utf-8")
    code = run(["bench", "--mentions", str(mentions), *common(pipeline),
                "--online-latency", "0.01,0.02",
                "--projection", "120000,10,30"])
    captured = capsys.readouterr()
    assert code == 0
    report = json.loads(captured.out)
    assert report["mismatches"] == 0
    assert report["speedup"] > 3
    assert report["projected_days"] == pytest.approx(416.6667, abs=1e-3)


def test_bench_rejects_bad_latency_argument(pipeline, tmp_path):
    mentions = tmp_path / "m.txt"
    mentions.write_text("whatever\n", encoding="utf-8")
    code, _, err = quiet_run(["bench", "--mentions", str(mentions),
                              *common(pipeline), "--online-latency", "12"])
    assert code == 1
    assert "online-latency" in err


def test_link_table_csv_input(pipeline, tmp_path, capsys):
    csv_path = tmp_path / "mini.csv"
    csv_path.write_text("Name,Count\nsomething,5\n", encoding="utf-8")
    code = run(["link-table", "--table", str(csv_path), "--has-header",
                *common(pipeline)])
    captured = capsys.readouterr()
    assert code == 0
    payload = json.loads(captured.out)
    assert payload["table_id"] == "mini"
    kinds = {(c["row"], c["col"]): c["outcome"]["kind"]
             for c in payload["cells"]}
    assert kinds[(0, 1)] == "literal"


def test_gen_kb_cli_is_deterministic(tmp_path):
    outs = []
    for name in ("a", "b"):
        code, out, _ = quiet_run(["gen-kb", "--out", str(tmp_path / name),
                                  "--seed", "3", "--items", "800",
                                  "--types", "60", "--tables", "4"])
        assert code == 0
        payload = json.loads(out)
        payload.pop("out_dir")
        outs.append(payload)
    assert outs[0] == outs[1]
    a = (tmp_path / "a" / "records.jsonl").read_bytes()
    b = (tmp_path / "b" / "records.jsonl").read_bytes()
    assert a == b


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "tablink.cli", "--version"],
                          capture_output=True, text=True, timeout=60)
    assert proc.returncode == 0
    assert proc.stdout.strip() == "tablink 0.1.0 (format 1)"
