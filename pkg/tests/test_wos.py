import codecs

import pytest
from hypothesis import given, strategies as st

from rpyskit.wos import (Corpus, CitingRecord, FormatError, FramingError, format_tabular,
                         format_tagged, normalize_doi, parse_cited_ref, parse_export, union)

ONE_RECORD = """FN Clarivate Analytics Web of Science
VR 1.0
PT J
AU Hahn, H
TI Mutations of the human homolog of Drosophila patched
SO CELL
CR NUSSLEINVOLHARD C, 1980, NATURE, V287, P795
   Jacob A, 1827, DUBLIN HOSP REP, V4, P232
   GORLIN RJ, 1960, NEW ENGL J MED, V262, P908, DOI 10.1056/NEJM196005052621803
PY 1996
UT WOS:A1996UQ00700016
ER

EF
"""


def _records(n, offset=0, year=2000):
    return tuple(CitingRecord(f"WOS:{i + offset:06d}", year, f"t{i}", "SRC",
                              (f"AUTHOR{i} A, 1990, J X, V{i + 1}, P{i + 2}",))
                 for i in range(n))


def test_single_tagged_record():
    c = parse_export(ONE_RECORD.encode())
    assert len(c) == 1
    rec = c.records[0]
    assert rec.pub_year == 1996
    assert rec.record_id == "WOS:A1996UQ00700016"
    assert len(rec.cited_refs) == 3
    assert c.provenance[0].format == "tagged"
    assert c.provenance[0].record_count == 1
    assert c.provenance[0].ref_count == 3


def test_empty_file_gives_empty_corpus():
    c = parse_export(b"", path="empty.txt")
    assert len(c) == 0
    assert len(c.provenance) == 1
    assert c.provenance[0].record_count == 0


@pytest.mark.parametrize("encode", [
    lambda s: s.encode("utf-8"),
    lambda s: codecs.BOM_UTF8 + s.encode("utf-8"),
    lambda s: s.encode("utf-16"),
    lambda s: codecs.BOM_UTF16_LE + s.encode("utf-16-le"),
])
def test_encodings(encode):
    c = parse_export(encode(ONE_RECORD))
    assert len(c) == 1 and len(c.records[0].cited_refs) == 3


def test_missing_er_is_framing_error():
    bad = ONE_RECORD.replace("ER\n", "")
    with pytest.raises(FramingError) as ei:
        parse_export(bad.encode())
    assert ei.value.offset >= 0
    assert "byte offset" in str(ei.value)


def test_missing_ef_is_framing_error():
    with pytest.raises(FramingError):
        parse_export(ONE_RECORD.replace("EF\n", "").encode())


def test_unknown_format():
    with pytest.raises(FormatError):
        parse_export(b"hello world\nnot an export\n")
    with pytest.raises(FormatError):
        parse_export(ONE_RECORD.encode(), format_hint="xml")


def test_tabular_export_and_bad_rows():
    text = "PT\tAU\tTI\tSO\tCR\tPY\tUT\n" \
           "J\tX, Y\tT1\tS\tA B, 1980, NATURE, V1, P2; C D, 1981, CELL, V3, P4\t2001\tWOS:1\n" \
           "J\tonly\ttoo\tmany\tcells\there\tx\ty\tz\n" \
           "J\tX\tT2\tS\t\tabcd\tWOS:2\n"
    c = parse_export(text.encode())
    assert c.provenance[0].format == "tabular"
    assert [r.record_id for r in c.records] == ["WOS:1", "WOS:2"]
    assert len(c.records[0].cited_refs) == 2
    assert c.records[1].pub_year is None
    assert any("row 3" in w for w in c.warnings)
    assert any("unparseable PY" in w for w in c.warnings)


def test_synthesized_id_is_stable():
    text = ONE_RECORD.replace("UT WOS:A1996UQ00700016\n", "")
    a = parse_export(text.encode()).records[0].record_id
    b = parse_export(text.encode()).records[0].record_id
    assert a == b and a.startswith("HASH:")


def test_parse_cited_ref_examples():
    r = parse_cited_ref("NUSSLEINVOLHARD C, 1980, NATURE, V287, P795", "p")
    assert (r.first_author, r.ref_year, r.source, r.volume, r.first_page) == \
        ("nussleinvolhard c", 1980, "nature", "287", "795")
    assert r.parent_record_id == "p"
    r = parse_cited_ref("ANON, UNTITLED", "p")
    assert r.ref_year is None and r.volume is None and r.first_page is None and r.doi is None
    assert r.original == "ANON, UNTITLED"
    assert parse_cited_ref("Jacob A, 1827, DUBLIN HOSP REP, V4, P232").ref_year == 1827


def test_parse_cited_ref_doi_and_hyphen():
    r = parse_cited_ref("Nusslein-Volhard C., 1980, NATURE, V287, P795, DOI 10.1038/287795A0")
    assert r.first_author == "nusslein volhard c" or r.first_author == "nussleinvolhard c"
    assert r.doi == "10.1038/287795a0"
    assert normalize_doi("doi:10.1/X") is None or normalize_doi("doi:10.1/X").startswith("10.")


def test_out_of_range_year_is_unknown():
    assert parse_cited_ref("SMITH J, 1234, J X, V1, P1").ref_year is None
    assert parse_cited_ref("SMITH J, 2999, J X, V1, P1").ref_year is None


@given(st.text(max_size=80))
def test_parse_cited_ref_never_raises(s):
    r = parse_cited_ref(s, "x")
    assert r.original == s
    if r.ref_year is not None:
        assert 1500 <= r.ref_year <= 2100
    if r.doi is not None:
        assert r.doi.startswith("10.")


def test_union_examples():
    c = Corpus(_records(3))
    assert len(union([c, c])) == 3
    d = Corpus(_records(2, offset=100))
    assert len(union([c, d])) == 5
    assert len(union([c, d]).provenance) == len(c.provenance) + len(d.provenance)


@given(st.lists(st.integers(0, 30), max_size=25), st.lists(st.integers(0, 30), max_size=25))
def test_union_order_insensitive_ids(a, b):
    def corp(ids):
        return Corpus(tuple(CitingRecord(f"R{i}", 2000) for i in sorted(set(ids))))

    ca, cb = corp(a), corp(b)
    ab = {r.record_id for r in union([ca, cb]).records}
    ba = {r.record_id for r in union([cb, ca]).records}
    assert ab == ba == {f"R{i}" for i in set(a) | set(b)}
    u = union([ca, cb])
    assert union([u, u]).records == u.records


def test_first_occurrence_wins():
    a = Corpus((CitingRecord("R1", 2000, "first"),))
    b = Corpus((CitingRecord("R1", 2001, "second"),))
    assert union([a, b]).records[0].title == "first"


def test_json_round_trip():
    c = parse_export(ONE_RECORD.encode(), path="one.txt")
    assert Corpus.from_json(c.to_json()) == c


def test_tagged_and_tabular_writers_round_trip():
    recs = _records(5)
    a = parse_export(format_tagged(recs).encode())
    b = parse_export(format_tabular(recs).encode())
    assert a.records == recs
    assert b.records == recs


def test_planted_search_sizes(planted, tmp_path):
    from rpyskit.wos import read_export

    paths = planted.write_exports(tmp_path)
    parts = [read_export(paths[lab]) for lab in "ABCD"]
    assert [len(p) for p in parts] == [1148, 244, 918, 92]
    assert sum(len(p) for p in parts) == 2402
    u = union(parts)
    assert len(u) == 1948
    assert sum(p.record_count for p in u.provenance) >= len(u)
