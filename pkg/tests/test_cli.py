from __future__ import annotations

import csv
import json
import subprocess
import sys

import pytest

from langmine.cli import build_parser, main

from conftest import make_wet


@pytest.fixture
def workspace(tmp_path):
    (tmp_path / "a.wet").write_bytes(make_wet([
        ("mwen ka palé kréyòl\nsa ka fèt an kréyòl tout jan", "http://x.gf/1", "fra"),
        ("bonjour le monde", "http://y.fr/2", "fra"),
        ("mwen ka fèt kréyòl jan bonjour", "http://z.fr/3", "fra"),
    ]))
    (tmp_path / "gcf.txt").write_text("mwen\npalé\nkréyòl\nfèt\ntout\n", encoding="utf-8")
    (tmp_path / "fra.txt").write_text("bonjour\nmonde\n", encoding="utf-8")
    (tmp_path / "sp.yaml").write_text("target: gcf\nblocked_url_patterns: [x.gf]\n", encoding="utf-8")
    return tmp_path


def test_first_and_second_pass(workspace, capsys):
    w = workspace
    rc = main(["first-pass", "--input", str(w / "a.wet"), "--wordlist", f"gcf={w / 'gcf.txt'}",
               "--blacklist", str(w / "fra.txt"), "--threshold", "2", "--emit-lines",
               "--index-out", str(w / "idx"), "--out", str(w / "out")])
    assert rc == 0
    report = json.loads(capsys.readouterr().out)
    assert report["documents_scanned"] == 3 and report["documents_kept"] == {"gcf": 1}
    assert report["rejection_breakdown"]["blacklisted"] == 1
    assert (w / "out" / "gcf.lines.jsonl").exists()
    rc = main(["second-pass", "--in", str(w / "out"), "--config", str(w / "sp.yaml"), "--out", str(w / "sp")])
    assert rc == 0
    assert json.loads(capsys.readouterr().out)["dropped"] == {"sources": 1}
    rc = main(["replay", "--index", *map(str, (w / "idx").iterdir()), "--wordlist", f"gcf={w / 'gcf.txt'}",
               "--threshold", "4", "--out", str(w / "replay.jsonl")])
    assert rc == 0
    rows = [json.loads(x) for x in (w / "replay.jsonl").read_text().splitlines()]
    assert [r["uri"] for r in rows] == ["http://x.gf/1"]


def test_bench_synthetic(tmp_path, capsys):
    out = tmp_path / "r.csv"
    assert main(["bench", "--synthetic", "--thresholds", "1,5,15", "--out", str(out)]) == 0
    rows = list(csv.DictReader(out.open()))
    assert [int(r["threshold"]) for r in rows] == [1, 5, 15]
    meta = json.loads((tmp_path / "r.csv.manifest.json").read_text())
    assert meta["source"] == "synthetic"


def test_bench_from_files(workspace, tmp_path):
    needles = tmp_path / "n.jsonl"
    needles.write_text("".join(json.dumps({"text": f"mwen palé kréyòl {i}"}) + "\n" for i in range(5)))
    hay = tmp_path / "h.jsonl"
    hay.write_text("".join(json.dumps({"text": f"le monde {i} créole"}) + "\n" for i in range(3))
                   + "".join(json.dumps({"text": f"le monde {i}"}) + "\n" for i in range(10)))
    out = tmp_path / "b.csv"
    rc = main(["bench", "--needles", str(needles), "--hay", str(hay), "--wordlist", f"gcf={workspace / 'gcf.txt'}",
               "--needle-count", "5", "--hay-count", "10", "--thresholds", "1,3,4", "--out", str(out)])
    assert rc == 0
    rows = {int(r["threshold"]): r for r in csv.DictReader(out.open())}
    assert float(rows[3]["recall_pct"]) == 100.0 and float(rows[4]["recall_pct"]) == 0.0


def test_errors_exit_2(workspace, capsys):
    assert main(["first-pass", "--input", str(workspace / "a.wet"), "--out", str(workspace / "o")]) == 2
    assert "wordlist" in capsys.readouterr().err
    assert main(["second-pass", "--in", str(workspace), "--config", str(workspace / "sp.yaml"),
                 "--out", str(workspace / "o")]) == 2
    assert main(["bench", "--out", str(workspace / "x.csv")]) == 2


def test_argument_validation():
    parser = build_parser()
    with pytest.raises(SystemExit):
        parser.parse_args(["bench", "--thresholds", "1,x", "--out", "o"])
    with pytest.raises(SystemExit):
        parser.parse_args(["first-pass", "--input", "a", "--shards", "0", "--out", "o"])
    args = parser.parse_args(["first-pass", "--input", "a", "--wordlist", "w.txt", "--out", "o"])
    assert args.threshold == 5 and args.tolerance == 1 and args.min_type_len == 3 and not args.normalize_punct


def test_console_script_help():
    res = subprocess.run([sys.executable, "-m", "langmine.cli", "--help"], capture_output=True, text=True)
    assert res.returncode == 0 and "first-pass" in res.stdout
