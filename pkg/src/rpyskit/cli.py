"""Command-line interface.

Each subcommand reads and writes plain files (corpus JSON, CSV, JSON, SVG)
so every stage can be rerun or inspected on its own.  ``pipeline`` chains
them and writes everything into one output directory.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import shutil
import sys
import tempfile
from pathlib import Path
from typing import Optional

from . import __version__
from .disambig import MatchConfig, cluster_refs, clusters_to_csv
from .multi import MultiRpysMatrix, SegmentSpec, build_matrix
from .render import PALETTES, PlotStyle, RenderError, render_heatmap, render_spectrogram
from .rpys import Spectrum, build_spectrum, detect_peaks, spectrum_from_counts, top_references
from .stats import StatsError, stats_report, stats_report_json, stats_text
from .validation import (MilestoneFileError, SearchData, bundled_milestones, evaluate_articles,
                         load_milestones)
from .wos import Corpus, WosParseError, read_export, union

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_USAGE = 2


class CliError(Exception):
    def __init__(self, message: str, code: int = EXIT_FAIL):
        super().__init__(message)
        self.code = code


class StageError(CliError):
    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"stage '{stage}' failed: {cause}")
        self.stage = stage


# ---------------------------------------------------------------------------
# file helpers
# ---------------------------------------------------------------------------

def _require_file(path) -> Path:
    p = Path(path)
    if not p.is_file():
        raise CliError(f"input file not found: {p}", EXIT_USAGE)
    return p


def _write(path, text: str) -> None:
    p = Path(path)
    if p.parent and not p.parent.exists():
        p.parent.mkdir(parents=True, exist_ok=True)
    with open(p, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        _write(out, text)
    else:
        sys.stdout.write(text)


def load_corpus(path) -> Corpus:
    """Read a corpus JSON file, or parse a raw export if it is not one."""
    p = _require_file(path)
    if p.suffix.lower() == ".json":
        return Corpus.from_json(p.read_text(encoding="utf-8"))
    return read_export(p)


def read_spectrum_csv(path) -> Spectrum:
    p = _require_file(path)
    counts = {}
    with open(p, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            counts[int(row["year"])] = int(row["count"])
    return spectrum_from_counts(counts)


def _load_spectrum(path) -> Spectrum:
    """Spectrum from ``spectrum.csv`` or from a corpus (deduplicated first)."""
    if Path(path).suffix.lower() == ".csv":
        return read_spectrum_csv(path)
    return build_spectrum(cluster_refs(load_corpus(path).cited_refs()))


def _load_matrix(path) -> MultiRpysMatrix:
    p = _require_file(path)
    text = p.read_text(encoding="utf-8")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError:
        raise CliError(f"{p}: expected matrix JSON (written by 'multi --json')")
    if "rank" in doc:
        return MultiRpysMatrix.from_json(text)
    corpus = Corpus.from_json(text)
    return build_matrix(corpus, _clusters_for(corpus))


def _clusters_for(corpus: Corpus, cfg: Optional[MatchConfig] = None) -> list:
    return cluster_refs(corpus.cited_refs(), cfg)


def _parse_search(spec: str) -> tuple:
    label, sep, path = spec.partition("=")
    if not sep or not label or not path:
        raise CliError(f"--search expects LABEL=PATH, got {spec!r}", EXIT_USAGE)
    return label, path


def _milestones(arg: str) -> list:
    if arg == "bundled":
        return bundled_milestones()
    return load_milestones(_require_file(arg))


def _match_config(args) -> MatchConfig:
    return MatchConfig(string_sim_threshold=args.threshold,
                       require_year_block=True,
                       doi_overrides=not args.no_doi)


def _segment_spec(args) -> SegmentSpec:
    rng = None
    if args.citing_from is not None or args.citing_to is not None:
        rng = (args.citing_from if args.citing_from is not None else -10 ** 6,
               args.citing_to if args.citing_to is not None else 10 ** 6)
    return SegmentSpec(min_segment_records=args.min_segment, citing_year_range=rng)


def _style(args) -> PlotStyle:
    return PlotStyle(width=args.width, height=args.height, color_map=args.color_map)


def peaks_document(spectrum: Spectrum, clusters: Optional[list], top_n: int) -> dict:
    peaks = detect_peaks(spectrum)
    dev = spectrum.deviation_map()
    out = []
    for y in peaks:
        item = {"year": y, "deviation": dev[y]}
        if clusters is not None:
            tl = top_references(clusters, y, top_n)
            item["top_references"] = [
                {"rank": e.rank, "count": e.count, "cluster_id": e.cluster.cluster_id,
                 "reference": e.cluster.representative.original}
                for e in tl.entries
            ]
        out.append(item)
    return {"peaks": out}


def _json(doc) -> str:
    return json.dumps(doc, indent=1, ensure_ascii=False) + "\n"


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def ingest_summary(corpus: Corpus, parts: list) -> str:
    lines = ["file\trecords\tcited_refs"]
    for c in parts:
        for p in c.provenance:
            lines.append(f"{p.path}\t{p.record_count}\t{p.ref_count}")
    lines.append(f"union\t{len(corpus)}\t{sum(len(r.cited_refs) for r in corpus.records)}")
    return "\n".join(lines) + "\n"


def cmd_ingest(args) -> int:
    paths = [_require_file(f) for f in args.files]
    parts = [read_export(p, args.format) for p in paths]
    corpus = union(parts)
    _write(args.output, corpus.to_json())
    summary = ingest_summary(corpus, parts)
    if args.summary:
        _write(args.summary, summary)
    sys.stdout.write(summary)
    for w in corpus.warnings:
        print(f"warning: {w}", file=sys.stderr)
    return EXIT_OK


def cmd_dedupe(args) -> int:
    clusters = _clusters_for(load_corpus(args.corpus), _match_config(args))
    _emit(clusters_to_csv(clusters), args.output)
    return EXIT_OK


def cmd_spectrum(args) -> int:
    clusters = _clusters_for(load_corpus(args.corpus), _match_config(args))
    _emit(build_spectrum(clusters).to_csv(), args.output)
    return EXIT_OK


def cmd_peaks(args) -> int:
    clusters = None
    if Path(args.input).suffix.lower() == ".csv":
        s = read_spectrum_csv(args.input)
    else:
        clusters = _clusters_for(load_corpus(args.input), _match_config(args))
        s = build_spectrum(clusters)
    _emit(_json(peaks_document(s, clusters, args.top_n)), args.output)
    return EXIT_OK


def cmd_toprefs(args) -> int:
    clusters = _clusters_for(load_corpus(args.corpus), _match_config(args))
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["year", "rank", "count", "cluster_id", "reference"])
    years = args.year or detect_peaks(build_spectrum(clusters))
    for y in years:
        for e in top_references(clusters, y, args.top_n).entries:
            w.writerow([y, e.rank, e.count, e.cluster.cluster_id, e.cluster.representative.original])
    _emit(buf.getvalue(), args.output)
    return EXIT_OK


def cmd_multi(args) -> int:
    corpus = load_corpus(args.corpus)
    m = build_matrix(corpus, _clusters_for(corpus, _match_config(args)), _segment_spec(args))
    _emit(m.to_long_csv(), args.output)
    if args.json:
        _write(args.json, m.to_json())
    return EXIT_OK


def cmd_stats(args) -> int:
    m = _load_matrix(args.matrix)
    rep = stats_report(m, args.top_k, args.alpha)
    _emit(stats_report_json(rep), args.output)
    if args.text:
        sys.stderr.write(stats_text(rep))
    return EXIT_OK


def _search_data(corpora: dict, cfg: MatchConfig) -> dict:
    out = {}
    for lab, c in corpora.items():
        cl = _clusters_for(c, cfg)
        out[lab] = SearchData(build_spectrum(cl), cl)
    return out


def cmd_validate(args) -> int:
    if not args.search:
        raise CliError("validate needs at least one --search LABEL=corpus.json", EXIT_USAGE)
    corpora = {}
    for spec in args.search:
        lab, path = _parse_search(spec)
        corpora[lab] = load_corpus(path)
    ms = _milestones(args.milestones)
    candidates = None
    if args.stats:
        candidates = json.loads(_require_file(args.stats).read_text(encoding="utf-8"))["top_years"]
    span = tuple(args.span) if args.span else None
    rep = evaluate_articles(_search_data(corpora, _match_config(args)), ms, args.top_n,
                            candidates=candidates, span=span)
    _emit(rep.to_json(), args.output)
    if args.text:
        sys.stderr.write(rep.to_text())
    return EXIT_OK


def cmd_plot(args) -> int:
    style = _style(args)
    if args.kind == "spectrogram":
        s = _load_spectrum(args.input)
        svg = render_spectrogram(s, detect_peaks(s), style)
    else:
        svg = render_heatmap(_load_matrix(args.input), style)
    _emit(svg, args.output)
    return EXIT_OK


PIPELINE_OUTPUTS = ("clusters.csv", "spectrum.csv", "peaks.json", "matrix.csv", "matrix.json",
                    "stats.json", "report.json", "spectrogram.svg", "heatmap.svg")


def run_pipeline(corpus: Corpus, outdir, cfg: MatchConfig, spec: SegmentSpec,
                 top_n: int = 10, top_k: int = 10, milestones: Optional[list] = None,
                 searches: Optional[dict] = None, style: Optional[PlotStyle] = None,
                 span: Optional[tuple] = None) -> list:
    """Run every stage and write the artifacts into ``outdir``.

    Outputs are staged in a temporary directory next to ``outdir`` and moved
    in only when every stage succeeded, so a failure leaves no partial
    results behind.  Returns the written file names.
    """
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    stage_dir = Path(tempfile.mkdtemp(prefix=".rpyskit-", dir=outdir))
    written = []
    stage = "dedupe"

    def put(name, text):
        _write(stage_dir / name, text)
        written.append(name)

    try:
        clusters = _clusters_for(corpus, cfg)
        put("clusters.csv", clusters_to_csv(clusters))
        stage = "spectrum"
        s = build_spectrum(clusters)
        put("spectrum.csv", s.to_csv())
        stage = "peaks"
        put("peaks.json", _json(peaks_document(s, clusters, top_n)))
        stage = "multi"
        m = build_matrix(corpus, clusters, spec)
        put("matrix.csv", m.to_long_csv())
        put("matrix.json", m.to_json())
        stage = "stats"
        rep = stats_report(m, top_k)
        put("stats.json", stats_report_json(rep))
        if milestones is not None:
            stage = "validate"
            if searches:
                data = _search_data(searches, cfg)
            else:
                data = {"all": SearchData(s, clusters)}
            vr = evaluate_articles(data, milestones, top_n, cfg=cfg,
                                   candidates=rep["top_years"], span=span)
            put("report.json", vr.to_json())
        stage = "plot"
        style = style or PlotStyle()
        put("spectrogram.svg", render_spectrogram(s, detect_peaks(s), style))
        put("heatmap.svg", render_heatmap(m, style))
        for name in written:
            os.replace(stage_dir / name, outdir / name)
    except CliError:
        raise
    except Exception as exc:
        raise StageError(stage, exc) from exc
    finally:
        shutil.rmtree(stage_dir, ignore_errors=True)
    return written


def cmd_pipeline(args) -> int:
    corpus = load_corpus(args.corpus)
    searches = None
    if args.search:
        searches = {}
        for spec in args.search:
            lab, path = _parse_search(spec)
            searches[lab] = load_corpus(path)
    ms = _milestones(args.milestones) if args.milestones else None
    written = run_pipeline(corpus, args.outdir, _match_config(args), _segment_spec(args),
                           args.top_n, args.top_k, ms, searches, _style(args),
                           tuple(args.span) if args.span else None)
    for name in written:
        print(Path(args.outdir) / name)
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def _add_match(p):
    g = p.add_argument_group("disambiguation")
    g.add_argument("--threshold", type=float, default=0.75,
                   help="similarity needed to join two references (default 0.75)")
    g.add_argument("--no-doi", action="store_true",
                   help="ignore DOIs when comparing references")


def _add_segment(p):
    g = p.add_argument_group("segmentation")
    g.add_argument("--min-segment", type=int, default=1,
                   help="minimum records per citing-year segment (default 1)")
    g.add_argument("--citing-from", type=int, default=None)
    g.add_argument("--citing-to", type=int, default=None)


def _add_style(p):
    g = p.add_argument_group("plot style")
    g.add_argument("--width", type=int, default=960)
    g.add_argument("--height", type=int, default=540)
    g.add_argument("--color-map", default="viridis", choices=sorted(PALETTES))


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="rpyskit",
                                 description="Reference publication year spectroscopy toolkit.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="parse WoS exports into a corpus JSON file")
    p.add_argument("files", nargs="+")
    p.add_argument("--format", default="auto", choices=["auto", "tagged", "tabular"])
    p.add_argument("-o", "--output", default="corpus.json")
    p.add_argument("--summary", help="also write the per-file summary here")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("dedupe", help="cluster cited references, write clusters.csv")
    p.add_argument("corpus")
    p.add_argument("-o", "--output")
    _add_match(p)
    p.set_defaults(func=cmd_dedupe)

    p = sub.add_parser("spectrum", help="write the detrended year spectrum as CSV")
    p.add_argument("corpus")
    p.add_argument("-o", "--output")
    _add_match(p)
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("peaks", help="peak years (from a corpus or spectrum.csv)")
    p.add_argument("input")
    p.add_argument("-o", "--output")
    p.add_argument("--top-n", type=int, default=10)
    _add_match(p)
    p.set_defaults(func=cmd_peaks)

    p = sub.add_parser("toprefs", help="most cited references of given (or peak) years")
    p.add_argument("corpus")
    p.add_argument("--year", type=int, action="append")
    p.add_argument("--top-n", type=int, default=10)
    p.add_argument("-o", "--output")
    _add_match(p)
    p.set_defaults(func=cmd_toprefs)

    p = sub.add_parser("multi", help="build the citing-year x cited-year rank matrix")
    p.add_argument("corpus")
    p.add_argument("-o", "--output", help="long-format CSV")
    p.add_argument("--json", help="also write the full matrix as JSON")
    _add_match(p)
    _add_segment(p)
    p.set_defaults(func=cmd_multi)

    p = sub.add_parser("stats", help="ANOVA and year effects from matrix JSON")
    p.add_argument("matrix")
    p.add_argument("-o", "--output")
    p.add_argument("--top-k", type=int, default=10)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--text", action="store_true", help="print a readable table to stderr")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("validate", help="check milestone articles against searches")
    p.add_argument("--search", action="append", metavar="LABEL=PATH")
    p.add_argument("--milestones", default="bundled",
                   help="milestone CSV/JSON file, or 'bundled' (default)")
    p.add_argument("--stats", help="stats.json whose top_years are scored against milestone years")
    p.add_argument("--span", type=int, nargs=2, metavar=("FIRST", "LAST"))
    p.add_argument("--top-n", type=int, default=10)
    p.add_argument("-o", "--output")
    p.add_argument("--text", action="store_true")
    _add_match(p)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("plot", help="render a spectrogram or heatmap as SVG")
    p.add_argument("kind", choices=["spectrogram", "heatmap"])
    p.add_argument("input", help="spectrum.csv / corpus JSON, or matrix JSON")
    p.add_argument("-o", "--output")
    _add_style(p)
    p.set_defaults(func=cmd_plot)

    p = sub.add_parser("pipeline", help="run every stage into one output directory")
    p.add_argument("corpus")
    p.add_argument("-o", "--outdir", default="rpys_out")
    p.add_argument("--search", action="append", metavar="LABEL=PATH",
                   help="per-search corpora for article validation")
    p.add_argument("--milestones", help="milestone file, or 'bundled'")
    p.add_argument("--span", type=int, nargs=2, metavar=("FIRST", "LAST"))
    p.add_argument("--top-n", type=int, default=10)
    p.add_argument("--top-k", type=int, default=10)
    _add_match(p)
    _add_segment(p)
    _add_style(p)
    p.set_defaults(func=cmd_pipeline)
    return ap


def main(argv: Optional[list] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"rpyskit: error: {exc}", file=sys.stderr)
        return exc.code
    except (WosParseError, MilestoneFileError, StatsError, RenderError, ValueError, OSError) as exc:
        print(f"rpyskit: error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
