"""Web of Science export parsing.

Two export shapes are understood:

* field-tagged plain text (``FN``/``VR`` header, two-letter tags, three-space
  continuation lines, ``ER`` closing each record and ``EF`` closing the file);
* tab-delimited text with a header row of field tags, where the ``CR`` cell
  holds all cited references joined by ``"; "``.

Only PT, AU, TI, SO, PY, UT and CR are consumed.
"""
from __future__ import annotations

import codecs
import datetime as _dt
import hashlib
import json
import logging
import re
from dataclasses import dataclass, replace
from functools import lru_cache
from pathlib import Path
from typing import Iterable, Optional

log = logging.getLogger(__name__)

MIN_YEAR = 1500
CORPUS_SCHEMA = "rpyskit.corpus/1"


def max_year() -> int:
    return _dt.date.today().year + 1


class WosParseError(ValueError):
    """Base class for export parsing failures."""


class FramingError(WosParseError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (byte offset {offset})")
        self.offset = offset


class FormatError(WosParseError):
    pass


@dataclass(frozen=True)
class RawCitedRef:
    original: str
    first_author: str = ""
    ref_year: Optional[int] = None
    source: str = ""
    volume: Optional[str] = None
    first_page: Optional[str] = None
    doi: Optional[str] = None
    parent_record_id: str = ""

    def populated_fields(self) -> int:
        vals = (self.first_author, self.ref_year, self.source, self.volume,
                self.first_page, self.doi)
        return sum(1 for v in vals if v not in (None, ""))

    def to_dict(self) -> dict:
        return {
            "original": self.original,
            "first_author": self.first_author,
            "ref_year": self.ref_year,
            "source": self.source,
            "volume": self.volume,
            "first_page": self.first_page,
            "doi": self.doi,
        }


@dataclass(frozen=True)
class CitingRecord:
    record_id: str
    pub_year: Optional[int]
    title: str = ""
    source: str = ""
    cited_refs: tuple = ()

    def parsed_refs(self) -> list:
        return [parse_cited_ref(cr, self.record_id) for cr in self.cited_refs]


@dataclass(frozen=True)
class Provenance:
    path: str
    format: str
    record_count: int
    ref_count: int = 0
    warnings: tuple = ()


@dataclass(frozen=True)
class Corpus:
    records: tuple = ()
    provenance: tuple = ()

    def __post_init__(self):
        seen = set()
        for rec in self.records:
            if rec.record_id in seen:
                raise ValueError(f"duplicate record_id {rec.record_id!r} in corpus")
            seen.add(rec.record_id)

    def __len__(self) -> int:
        return len(self.records)

    @property
    def warnings(self) -> list:
        return [w for p in self.provenance for w in p.warnings]

    def cited_refs(self) -> list:
        """All cited references, parsed, in record order."""
        out = []
        for rec in self.records:
            out.extend(rec.parsed_refs())
        return out

    # canonical JSON -------------------------------------------------------
    def to_json(self) -> str:
        doc = {
            "schema": CORPUS_SCHEMA,
            "provenance": [
                {"path": p.path, "format": p.format, "record_count": p.record_count,
                 "ref_count": p.ref_count, "warnings": list(p.warnings)}
                for p in self.provenance
            ],
            "records": [
                {
                    "record_id": r.record_id,
                    "pub_year": r.pub_year,
                    "title": r.title,
                    "source": r.source,
                    "cited_refs": [ref.to_dict() for ref in r.parsed_refs()],
                }
                for r in self.records
            ],
        }
        return json.dumps(doc, ensure_ascii=False, indent=1) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "Corpus":
        doc = json.loads(text)
        if doc.get("schema") != CORPUS_SCHEMA:
            raise WosParseError(f"not a corpus file (schema {doc.get('schema')!r})")
        prov = tuple(
            Provenance(p["path"], p["format"], int(p["record_count"]),
                       int(p.get("ref_count", 0)), tuple(p.get("warnings", ())))
            for p in doc["provenance"]
        )
        recs = tuple(
            CitingRecord(
                record_id=r["record_id"],
                pub_year=r["pub_year"],
                title=r.get("title", ""),
                source=r.get("source", ""),
                cited_refs=tuple(c["original"] for c in r["cited_refs"]),
            )
            for r in doc["records"]
        )
        return cls(recs, prov)


# ---------------------------------------------------------------------------
# cited reference strings
# ---------------------------------------------------------------------------

_YEAR_TOKEN = re.compile(r"^\d{4}$")
_PUNCT = re.compile(r"[^\w\s]", re.UNICODE)
_WS = re.compile(r"\s+")
_VOL = re.compile(r"^V\s?(\S.*)$")
_PAGE = re.compile(r"^P\s?(\S.*)$")
_DOI = re.compile(r"^DOI\s+(.*)$", re.IGNORECASE)


def normalize_text(text: str) -> str:
    """Lowercase, drop punctuation (periods, hyphens, ...), collapse spaces."""
    t = _PUNCT.sub("", text.lower().replace("_", ""))
    return _WS.sub(" ", t).strip()


def normalize_doi(text: str) -> Optional[str]:
    t = text.strip().strip("[]").strip().lower()
    if t.startswith("https://doi.org/"):
        t = t[len("https://doi.org/"):]
    t = t.rstrip(".,;")
    return t if t.startswith("10.") else None


def digits(text: Optional[str]) -> str:
    return re.sub(r"\D", "", text or "")


def parse_cited_ref(cr_string: str, parent: str = "") -> RawCitedRef:
    """Split a WoS ``CR`` entry into its positional fields.

    Never raises.  Unparseable fields stay unset, and ``original`` is always
    the input string unchanged.
    """
    ref = _parse_cached(cr_string)
    return replace(ref, parent_record_id=parent) if parent else ref


# The same CR string recurs across many citing records.
@lru_cache(maxsize=1 << 18)
def _parse_cached(cr_string: str) -> RawCitedRef:
    try:
        return _parse_cited_ref(cr_string, "")
    except Exception:  # pragma: no cover - defensive, see docstring
        log.debug("unparseable cited reference %r", cr_string)
        return RawCitedRef(original=cr_string)


def _parse_cited_ref(cr: str, parent: str) -> RawCitedRef:
    parts = [p.strip() for p in cr.split(",")]
    if not parts or not any(parts):
        return RawCitedRef(original=cr, parent_record_id=parent)
    author = normalize_text(parts[0])
    year = None
    rest = parts[1:]
    if rest and _YEAR_TOKEN.match(rest[0]):
        y = int(rest[0])
        if MIN_YEAR <= y <= min(2100, max_year()):
            year = y
        rest = rest[1:]

    source = ""
    volume = page = doi = None
    for k, tok in enumerate(rest):
        if not tok:
            continue
        m = _DOI.match(tok)
        if m:
            if doi is None:
                doi = normalize_doi(m.group(1))
            continue
        if tok.lower().lstrip("[").startswith("10.") and k > 0:
            # trailing members of a bracketed multi-DOI list
            if doi is None:
                doi = normalize_doi(tok)
            continue
        if k == 0:
            source = normalize_text(tok)
            continue
        m = _VOL.match(tok)
        if m and volume is None:
            volume = m.group(1).strip()
            continue
        m = _PAGE.match(tok)
        if m and page is None:
            page = m.group(1).strip()
            continue
    return RawCitedRef(
        original=cr,
        first_author=author,
        ref_year=year,
        source=source,
        volume=volume or None,
        first_page=page or None,
        doi=doi,
        parent_record_id=parent,
    )


# ---------------------------------------------------------------------------
# export files
# ---------------------------------------------------------------------------

def decode_export(data: bytes) -> str:
    """Decode UTF-8 (optionally BOM-prefixed) or UTF-16 with BOM."""
    if data.startswith(codecs.BOM_UTF16_LE) or data.startswith(codecs.BOM_UTF16_BE):
        text = data.decode("utf-16")
    elif data.startswith(codecs.BOM_UTF8):
        text = data[len(codecs.BOM_UTF8):].decode("utf-8")
    else:
        text = data.decode("utf-8")
    return text.lstrip("﻿")


def sniff_format(text: str) -> str:
    first = text.split("\n", 1)[0]
    if first.startswith("FN ") or first.rstrip("\r") == "FN":
        return "tagged"
    if "\t" in first:
        return "tabular"
    raise FormatError("cannot detect export format: expected a leading 'FN ' line "
                      "or a tab-delimited header row")


def _synth_id(authors: str, title: str, year: str, source: str) -> str:
    h = hashlib.sha1("\x1f".join([authors, title, year, source]).encode("utf-8"))
    return "HASH:" + h.hexdigest()[:20]


def _parse_year(value: str) -> Optional[int]:
    v = value.strip()
    if re.fullmatch(r"\d{4}", v):
        y = int(v)
        if MIN_YEAR <= y <= max_year():
            return y
    return None


def _build_record(fields: dict, where: str, warnings: list) -> Optional[CitingRecord]:
    py_raw = fields.get("PY", "")
    year = _parse_year(py_raw)
    if py_raw and year is None:
        warnings.append(f"{where}: unparseable PY {py_raw!r}; year marked unknown")
    elif not py_raw:
        warnings.append(f"{where}: missing PY; year marked unknown")
    ut = fields.get("UT", "").strip()
    authors = fields.get("AU", "")
    title = _WS.sub(" ", fields.get("TI", "")).strip()
    source = _WS.sub(" ", fields.get("SO", "")).strip()
    rid = ut or _synth_id(authors, title, py_raw, source)
    refs = tuple(r for r in fields.get("CR_LIST", ()) if r.strip())
    return CitingRecord(rid, year, title, source, refs)


def _parse_tagged(text: str, warnings: list) -> list:
    records = []
    fields: Optional[dict] = None
    tag = None
    offset = 0
    rec_start = 0
    ended = False
    for lineno, raw in enumerate(text.splitlines(keepends=True), start=1):
        line_offset = offset
        offset += len(raw.encode("utf-8"))
        line = raw.rstrip("\r\n")
        if not line.strip():
            continue
        if ended:
            raise FramingError(f"content after EF on line {lineno}", line_offset)
        if line.startswith("   ") or line.startswith("\t"):
            if fields is None or tag is None:
                raise FramingError(f"continuation line {lineno} outside a record", line_offset)
            value = line.strip()
            if tag == "CR":
                fields["CR_LIST"].append(value)
            elif tag == "AU":
                fields["AU"] += "; " + value
            else:
                fields[tag] = fields.get(tag, "") + " " + value
            continue
        t = line[:2]
        value = line[3:].strip() if len(line) > 2 else ""
        if t in ("FN", "VR") and fields is None:
            tag = None
            continue
        if t == "EF":
            if fields is not None:
                raise FramingError("record not closed by ER before EF", rec_start)
            ended = True
            continue
        if t == "ER":
            if fields is None:
                raise FramingError(f"ER without an open record on line {lineno}", line_offset)
            rec = _build_record(fields, f"record at byte {rec_start}", warnings)
            if rec is not None:
                records.append(rec)
            fields = None
            tag = None
            continue
        if not re.fullmatch(r"[A-Z][A-Z0-9]", t):
            raise FramingError(f"malformed tag {t!r} on line {lineno}", line_offset)
        if fields is None:
            fields = {"CR_LIST": []}
            rec_start = line_offset
        tag = t
        if t == "CR":
            if value:
                fields["CR_LIST"].append(value)
        else:
            fields[t] = value
    if fields is not None:
        raise FramingError("record not closed by ER", rec_start)
    if not ended:
        raise FramingError("file not closed by EF", offset)
    return records


def _parse_tabular(text: str, warnings: list) -> list:
    lines = text.splitlines()
    header = [h.strip() for h in lines[0].split("\t")]
    records = []
    for rowno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        cells = line.split("\t")
        # WoS tab exports often end every row with a trailing tab
        while len(cells) > len(header) and cells[-1] == "":
            cells.pop()
        if len(cells) != len(header):
            if len(cells) < len(header):
                cells = cells + [""] * (len(header) - len(cells))
            else:
                warnings.append(f"row {rowno}: {len(cells)} cells for {len(header)} "
                                "header fields; row skipped")
                continue
        fields = dict(zip(header, (c.strip() for c in cells)))
        cr = fields.pop("CR", "")
        fields["CR_LIST"] = [c.strip() for c in cr.split("; ")] if cr else []
        rec = _build_record(fields, f"row {rowno}", warnings)
        if rec is not None:
            records.append(rec)
    return records


def parse_export(data: bytes, format_hint: str = "auto", path: str = "<bytes>") -> Corpus:
    """Parse one WoS export into a :class:`Corpus`.

    ``format_hint`` is ``"auto"``, ``"tagged"`` or ``"tabular"``.  Framing
    problems in tagged files raise :class:`FramingError`; row-level problems
    are recorded as warnings on the provenance entry.
    """
    if format_hint not in ("auto", "tagged", "tabular"):
        raise FormatError(f"unknown format hint {format_hint!r}")
    text = decode_export(data)
    warnings: list = []
    if not text.strip():
        fmt = "empty" if format_hint == "auto" else format_hint
        return Corpus((), (Provenance(path, fmt, 0, 0, ()),))
    fmt = sniff_format(text) if format_hint == "auto" else format_hint
    if fmt == "tagged":
        recs = _parse_tagged(text, warnings)
    else:
        recs = _parse_tabular(text, warnings)

    unique = []
    seen = set()
    for r in recs:
        if r.record_id in seen:
            warnings.append(f"duplicate record {r.record_id} within file; later copy dropped")
            continue
        seen.add(r.record_id)
        unique.append(r)
    n_refs = sum(len(r.cited_refs) for r in unique)
    prov = Provenance(path, fmt, len(unique), n_refs, tuple(warnings))
    for w in warnings:
        log.warning("%s: %s", path, w)
    return Corpus(tuple(unique), (prov,))


def read_export(path, format_hint: str = "auto") -> Corpus:
    p = Path(path)
    return parse_export(p.read_bytes(), format_hint, path=str(p))


def union(corpora: Iterable[Corpus]) -> Corpus:
    """Merge corpora, keeping the first record seen for each record_id."""
    records = []
    provenance = []
    seen = set()
    for c in corpora:
        provenance.extend(c.provenance)
        for r in c.records:
            if r.record_id not in seen:
                seen.add(r.record_id)
                records.append(r)
    return Corpus(tuple(records), tuple(provenance))


# ---------------------------------------------------------------------------
# writers (used by the synthetic fixtures and round-trip tests)
# ---------------------------------------------------------------------------

def format_tagged(records: Iterable[CitingRecord], authors=None) -> str:
    """Render records as a field-tagged WoS export."""
    out = ["FN Clarivate Analytics Web of Science", "VR 1.0"]
    for r in records:
        out.append("PT J")
        au = (authors or {}).get(r.record_id, ["Anonymous"])
        out.append("AU " + au[0])
        out.extend("   " + a for a in au[1:])
        out.append("TI " + (r.title or "Untitled"))
        out.append("SO " + (r.source or "UNKNOWN"))
        if r.cited_refs:
            out.append("CR " + r.cited_refs[0])
            out.extend("   " + c for c in r.cited_refs[1:])
        out.append("NR " + str(len(r.cited_refs)))
        if r.pub_year is not None:
            out.append("PY " + str(r.pub_year))
        out.append("UT " + r.record_id)
        out.append("ER")
        out.append("")
    out.append("EF")
    return "\n".join(out) + "\n"


def format_tabular(records: Iterable[CitingRecord]) -> str:
    cols = ["PT", "AU", "TI", "SO", "CR", "PY", "UT"]
    lines = ["\t".join(cols)]
    for r in records:
        row = ["J", "Anonymous", r.title, r.source, "; ".join(r.cited_refs),
               "" if r.pub_year is None else str(r.pub_year), r.record_id]
        lines.append("\t".join(row))
    return "\n".join(lines) + "\n"
