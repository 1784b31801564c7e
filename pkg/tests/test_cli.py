import json
import xml.etree.ElementTree as ET

import pytest

from rpyskit.cli import main
from rpyskit.wos import CitingRecord, format_tagged


def _export(path, n=30, offset=0, one_year=False):
    recs = []
    for i in range(offset, offset + n):
        refs = tuple(f"W{j} A, {1970 + j}, J W{j}, V{j + 1}, P{j + 1}" for j in range(12))
        if i % 2 == 0 and not one_year:
            refs += ("HAHN H, 1976, CELL, V85, P841",)
        if one_year:
            refs = ("HAHN H, 1976, CELL, V85, P841",)
        recs.append(CitingRecord(f"WOS:{i:06d}", 2000 if one_year else 1995 + i % 5,
                                 f"title {i}", "SRC", refs))
    path.write_text(format_tagged(recs))
    return path


@pytest.fixture
def corpus(tmp_path, capsys):
    a = _export(tmp_path / "a.txt", 30)
    b = _export(tmp_path / "b.txt", 20, offset=20)
    out = tmp_path / "corpus.json"
    assert main(["ingest", str(a), str(b), "-o", str(out)]) == 0
    summary = capsys.readouterr().out
    assert "union\t40" in summary
    return out


def test_ingest_two_files(corpus):
    doc = json.loads(corpus.read_text())
    assert len(doc["provenance"]) == 2
    assert len(doc["records"]) == 40


def test_missing_file_exit_code(tmp_path, capsys):
    missing = tmp_path / "nope.txt"
    assert main(["ingest", str(missing)]) == 2
    assert str(missing) in capsys.readouterr().err


def test_stage_commands(corpus, tmp_path, capsys):
    d = tmp_path
    assert main(["dedupe", str(corpus), "-o", str(d / "clusters.csv")]) == 0
    assert (d / "clusters.csv").read_text().startswith("cluster_id,")
    assert main(["spectrum", str(corpus), "-o", str(d / "spectrum.csv")]) == 0
    assert main(["peaks", str(d / "spectrum.csv"), "-o", str(d / "p1.json")]) == 0
    assert main(["peaks", str(corpus), "-o", str(d / "p2.json")]) == 0
    p1 = json.loads((d / "p1.json").read_text())["peaks"]
    p2 = json.loads((d / "p2.json").read_text())["peaks"]
    assert [p["year"] for p in p1] == [p["year"] for p in p2] == [1976]
    top = [t["reference"] for t in p2[0]["top_references"]]
    assert top == ["W6 A, 1976, J W6, V7, P7", "HAHN H, 1976, CELL, V85, P841"]
    assert main(["toprefs", str(corpus), "--year", "1976", "-o", str(d / "top.csv")]) == 0
    assert "HAHN H" in (d / "top.csv").read_text().split("\n")[2]
    assert main(["multi", str(corpus), "-o", str(d / "m.csv"), "--json", str(d / "m.json")]) == 0
    assert main(["stats", str(d / "m.json"), "-o", str(d / "stats.json")]) == 0
    stats = json.loads((d / "stats.json").read_text())
    assert stats["top_years"][0] == 1976
    ms = d / "ms.csv"
    ms.write_text("1976,x,hahn h|1976|cell\n")
    assert main(["validate", "--search", f"A={corpus}", "--milestones", str(ms),
                 "--stats", str(d / "stats.json"), "-o", str(d / "report.json")]) == 0
    rep = json.loads((d / "report.json").read_text())
    assert rep["article_capture_rate"] == 1.0
    for kind, src in (("spectrogram", "spectrum.csv"), ("heatmap", "m.json")):
        out = d / f"{kind}.svg"
        assert main(["plot", kind, str(d / src), "-o", str(out)]) == 0
        ET.fromstring(out.read_bytes())


def test_validate_needs_search(capsys):
    assert main(["validate"]) == 2


def test_pipeline_outputs_and_rerun(corpus, tmp_path, capsys):
    out1, out2 = tmp_path / "o1", tmp_path / "o2"
    args = ["--milestones", "bundled"]
    assert main(["pipeline", str(corpus), "-o", str(out1)] + args) == 0
    assert main(["pipeline", str(corpus), "-o", str(out2)] + args) == 0
    names = sorted(p.name for p in out1.iterdir())
    assert names == sorted(["clusters.csv", "spectrum.csv", "peaks.json", "matrix.csv",
                            "matrix.json", "stats.json", "report.json", "spectrogram.svg",
                            "heatmap.svg"])
    for n in names:
        assert (out1 / n).read_bytes() == (out2 / n).read_bytes()


def test_pipeline_failure_cleans_up(tmp_path, capsys):
    src = _export(tmp_path / "one.txt", 5, one_year=True)
    corpus = tmp_path / "c.json"
    assert main(["ingest", str(src), "-o", str(corpus)]) == 0
    out = tmp_path / "out"
    assert main(["pipeline", str(corpus), "-o", str(out)]) == 1
    err = capsys.readouterr().err
    assert "stage 'stats'" in err
    assert list(out.iterdir()) == []
