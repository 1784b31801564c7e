"""Synthetic corpora with known ground truth.

``planted_fixture()`` builds a four-search corpus (1148/244/918/92 records,
1948 unique) whose citation counts are flat or monotone except at 18
planted years.  Every citing record cites one background work for each
year from :data:`BACKGROUND_START` up to the year before its own, so any
record subset yields a non-increasing count curve with zero or negative
median deviation; the planted works add positive spikes on top.  Each
work also receives occasional one- or two-character typos so that
disambiguation has something to do.

``noisy_reference_fixture()`` builds perturbed copies of canonical
references with ground-truth labels for clustering accuracy checks.
"""
from __future__ import annotations

import string
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .wos import CitingRecord, format_tagged

PLANTED_YEARS = (1827, 1859, 1901, 1928, 1947, 1959, 1963, 1968, 1974, 1980,
                 1987, 1993, 1996, 2000, 2003, 2006, 2009, 2012)
BACKGROUND_START = 1940
CITING_YEARS = tuple(range(1990, 2016))
N_UNIQUE = 1948
N_BACKGROUND_WORKS = 12
SEARCH_LABELS = ("A", "B", "C", "D")

# Index ranges into the unique record list.  B and D sit inside A, and A and
# C share 118 records, giving 2402 search hits over 1948 unique records.
SEARCH_RANGES = {
    "A": (0, 1148),
    "B": (0, 244),
    "C": (1030, 1948),
    "D": (300, 392),
}

_SURNAMES = [
    "ABERNATHY", "BALDRIDGE", "CARMODY", "DELACROIX", "EASTWOOD", "FAIRBANKS",
    "GALLOWAY", "HATHAWAY", "IRONSIDE", "JARDINE", "KILBRIDE", "LOCKHART",
    "MONTAGUE", "NORTHCOTT", "OSBORNE", "PEMBERTON", "QUINLAN", "RADCLIFFE",
    "SINCLAIR", "THORNBURY", "UPSHAW", "VANDERMEER", "WHITCOMBE", "YARBOROUGH",
    "ZIMMERMANN", "ASHCROFT", "BRADSHAW", "CRANSTON", "DUNMORE",
]
_JOURNALS = [
    "J CLIN INVEST", "BIOCHEM J", "LANCET", "ANN SURG", "J EXP MED", "AM J PATHOL",
    "BRIT J DERMATOL", "ARCH INTERN MED", "PHYSIOL REV", "Q REV BIOL",
    "ENDOCRINOLOGY", "VIROLOGY",
]


@dataclass(frozen=True)
class Work:
    author: str
    year: int
    source: str
    volume: int
    page: int

    def cr(self, author: Optional[str] = None) -> str:
        return f"{author or self.author}, {self.year}, {self.source}, V{self.volume}, P{self.page}"

    @property
    def key(self) -> str:
        return f"{self.author.lower()}|{self.year}|{self.source.lower()}"


@dataclass(frozen=True)
class PlantedWork:
    work: Work
    # population: "all", "c_only" (records only in search C),
    # "a_not_c" (records in A but not C) or "every_nth" (deterministic)
    population: str
    fraction: float = 1.0
    nth: tuple = ()


def _w(author, year, source, vol, page):
    return Work(author, year, source, vol, page)


PLANTED_WORKS = (
    PlantedWork(_w("JACOB A", 1827, "DUBLIN HOSP REP", 4, 232), "all", 0.9),
    PlantedWork(_w("HUTCHINSON J", 1859, "MED TIMES GAZ", 1, 112), "all", 0.7),
    PlantedWork(_w("KRAUSE W", 1901, "ARCH DERMATOL SYPH", 58, 377), "all", 0.7),
    PlantedWork(_w("PINKUS H", 1928, "ARCH DERMATOL", 17, 602), "all", 0.7),
    PlantedWork(_w("LEVER WF", 1947, "ARCH PATHOL", 44, 221), "all", 0.7),
    PlantedWork(_w("BINNS W", 1959, "J AM VET MED RES", 134, 180), "c_only", 0.9),
    PlantedWork(_w("BINNS W", 1963, "AM J VET RES", 24, 1164), "all", 0.8),
    PlantedWork(_w("KEELER RF", 1968, "TERATOLOGY", 1, 5), "all", 0.8),
    PlantedWork(_w("ZORN P", 1968, "EXP CELL RES", 50, 99), "every_nth", nth=(50, 7)),
    PlantedWork(_w("ALDER K", 1974, "DEV GENET", 3, 44), "all", 0.8),
    PlantedWork(_w("NUSSLEINVOLHARD C", 1980, "NATURE", 287, 795), "all", 1.0),
    PlantedWork(_w("WIESCHAUS E", 1980, "DEV BIOL", 80, 276), "all", 1.0),
    PlantedWork(_w("LEWIS EB", 1987, "CELL", 49, 11), "all", 0.8),
    PlantedWork(_w("ECHELARD Y", 1993, "CELL", 75, 1417), "all", 0.8),
    PlantedWork(_w("HAHN H", 1996, "CELL", 85, 841), "all", 0.6),
    PlantedWork(_w("JOHNSON RL", 1996, "SCIENCE", 272, 1668), "all", 0.45),
    PlantedWork(_w("STONE DM", 1996, "NATURE", 384, 129), "all", 0.3),
    PlantedWork(_w("CHIANG C", 1996, "NATURE", 383, 407), "all", 0.2),
    PlantedWork(_w("TAIPALE J", 2000, "NATURE", 406, 1005), "all", 0.7),
    PlantedWork(_w("WU X", 2000, "ONCOGENE", 19, 5531), "a_not_c", 0.8),
    PlantedWork(_w("GRACHTCHOUK V", 2003, "EMBO J", 22, 2741), "all", 0.8),
    PlantedWork(_w("YANG L", 2003, "J BIOL CHEM", 278, 3108), "every_nth", nth=(50, 3)),
    PlantedWork(_w("BERMAN DM", 2006, "SCIENCE", 297, 1559), "all", 0.8),
    PlantedWork(_w("RUDIN CM", 2009, "NEW ENGL J MED", 361, 1173), "all", 0.6),
    PlantedWork(_w("VON HOFF DD", 2009, "NEW ENGL J MED", 361, 1164), "all", 0.5),
    PlantedWork(_w("YAUCH RL", 2009, "SCIENCE", 326, 572), "all", 0.4),
    PlantedWork(_w("TANG JY", 2012, "NEW ENGL J MED", 366, 2180), "all", 0.8),
)


def background_work(year: int, w: int) -> Work:
    surname = _SURNAMES[(year * 7 + w * 13) % len(_SURNAMES)]
    initial = string.ascii_uppercase[(year + w) % 26]
    return Work(f"{surname} {initial}", year, _JOURNALS[w], (year - 1900) % 90 + 10 + 3 * w,
                100 + 37 * w + year % 50)


def _planted_lookup():
    return {(p.work.author, p.work.year): p.work for p in PLANTED_WORKS}


def _fixture_milestones():
    """(year, description, [keys], {key: expected captured-by searches})."""
    pw = _planted_lookup()

    def k(author, year):
        return pw[(author, year)].key

    bg1991 = background_work(1991, 0).key
    bg2011 = background_work(2011, 0).key
    allx = set(SEARCH_LABELS)
    rows = [
        (1827, "First clinical description", [(k("JACOB A", 1827), allx)]),
        (1859, "Early histology", [(k("HUTCHINSON J", 1859), allx)]),
        (1901, "Tumour classification", [(k("KRAUSE W", 1901), allx)]),
        (1928, "Syndrome named", [(k("PINKUS H", 1928), allx)]),
        (1959, "Field observation", [(k("BINNS W", 1959), {"C"})]),
        (1963, "Teratogen source found", [(k("BINNS W", 1963), allx)]),
        (1968, "Compound isolated", [(k("KEELER RF", 1968), allx), (k("ZORN P", 1968), set())]),
        (1974, "No document referenced", [("*", allx)]),
        (1980, "Patterning genes discovered", [(k("NUSSLEINVOLHARD C", 1980), allx)]),
        (1987, "Homeotic mechanism", [(k("LEWIS EB", 1987), allx),
                                      ("marti e|1987|nature", set())]),
        (1991, "Flat year milestone", [(bg1991, set())]),
        (1993, "Mammalian genes cloned", [(k("ECHELARD Y", 1993), allx)]),
        (1996, "Receptor mutations", [(k("HAHN H", 1996), allx), (k("JOHNSON RL", 1996), allx)]),
        (1996, "Receptor identified", [(k("STONE DM", 1996), allx)]),
        (1996, "Impaired signalling", [(k("CHIANG C", 1996), allx),
                                       ("belloni e|1996|nat genet", set())]),
        (2000, "Inhibitor mechanism", [(k("TAIPALE J", 2000), allx),
                                       (k("WU X", 2000), {"A", "B", "D"})]),
        (2003, "Aberrant signalling in cancers", [(k("GRACHTCHOUK V", 2003), allx),
                                                  (k("YANG L", 2003), set())]),
        (2006, "Preclinical treatment", [(k("BERMAN DM", 2006), allx)]),
        (2009, "Phase I trials", [(k("RUDIN CM", 2009), allx), (k("VON HOFF DD", 2009), allx),
                                  (k("YAUCH RL", 2009), allx)]),
        (2011, "Topical trials", [("skvara h|2011|j invest dermatol", set()), (bg2011, set())]),
        (2012, "Prevention trial", [(k("TANG JY", 2012), allx)]),
    ]
    return rows


@dataclass
class PlantedFixture:
    records: list
    searches: dict  # label -> list of record indices
    planted_years: tuple = PLANTED_YEARS
    milestone_rows: list = field(default_factory=list)
    authors: dict = field(default_factory=dict)

    def search_records(self, label: str) -> list:
        return [self.records[i] for i in self.searches[label]]

    @property
    def milestones_csv(self) -> str:
        lines = ["year,description,article_keys"]
        for year, desc, arts in self.milestone_rows:
            lines.append(f"{year},{desc},{';'.join(a for a, _ in arts)}")
        return "\n".join(lines) + "\n"

    @property
    def expected_capture(self) -> dict:
        """``{article key: set of searches expected to capture it}``."""
        out = {}
        for year, _, arts in self.milestone_rows:
            for key, labels in arts:
                out[(year, key)] = set(labels)
        return out

    @property
    def expected_capture_rate(self) -> float:
        exp = self.expected_capture
        return sum(1 for v in exp.values() if v) / len(exp)

    def write_exports(self, directory) -> dict:
        """Write one tagged WoS export per search; returns ``{label: path}``."""
        d = Path(directory)
        d.mkdir(parents=True, exist_ok=True)
        paths = {}
        for lab in SEARCH_LABELS:
            p = d / f"search_{lab}.txt"
            p.write_text(format_tagged(self.search_records(lab), self.authors), encoding="utf-8")
            paths[lab] = p
        return paths

    def write_milestones(self, path) -> Path:
        p = Path(path)
        p.write_text(self.milestones_csv, encoding="utf-8")
        return p


def _typo(author: str, rng: np.random.Generator) -> str:
    surname, _, initials = author.partition(" ")
    letters = list(surname)
    edits = 1 if rng.random() < 0.7 else 2
    for _ in range(edits):
        pos = int(rng.integers(len(letters)))
        choices = [c for c in string.ascii_uppercase if c != letters[pos]]
        letters[pos] = choices[int(rng.integers(len(choices)))]
    return "".join(letters) + (" " + initials if initials else "")


def _cites(p: PlantedWork, i: int, draw: float) -> bool:
    if p.population == "every_nth":
        n, r = p.nth
        return i % n == r
    lo_c = SEARCH_RANGES["C"][0]
    hi_a = SEARCH_RANGES["A"][1]
    if p.population == "c_only" and i < hi_a:
        return False
    if p.population == "a_not_c" and i >= lo_c:
        return False
    return draw < p.fraction


def planted_fixture(seed: int = 20160201, typo_rate: float = 0.03) -> PlantedFixture:
    """Build the four-search planted-milestone corpus (deterministic for a seed)."""
    rng = np.random.default_rng(seed)
    records = []
    authors = {}
    for i in range(N_UNIQUE):
        cy = CITING_YEARS[i % len(CITING_YEARS)]
        refs = []
        for y in range(BACKGROUND_START, cy):
            refs.append(background_work(y, (i + y) % N_BACKGROUND_WORKS))
        draws = rng.random(len(PLANTED_WORKS))
        for p, u in zip(PLANTED_WORKS, draws):
            if p.work.year < cy and _cites(p, i, u):
                refs.append(p.work)
        crs = []
        for wk in refs:
            if rng.random() < typo_rate:
                crs.append(wk.cr(_typo(wk.author, rng)))
            else:
                crs.append(wk.cr())
        rid = f"WOS:SYN{i:09d}"
        authors[rid] = [f"{_SURNAMES[i % len(_SURNAMES)].title()}, {string.ascii_uppercase[i % 26]}"]
        records.append(CitingRecord(rid, cy, f"Synthetic citing record {i}",
                                    _JOURNALS[i % len(_JOURNALS)], tuple(crs)))
    searches = {lab: list(range(*SEARCH_RANGES[lab])) for lab in SEARCH_LABELS}
    return PlantedFixture(records, searches, PLANTED_YEARS, _fixture_milestones(), authors)


# ---------------------------------------------------------------------------
# disambiguation accuracy fixture
# ---------------------------------------------------------------------------

_SYL = ["ka", "lo", "mi", "ne", "ru", "sa", "to", "vi", "ba", "de", "fo", "gu",
        "ha", "ji", "ko", "lu", "ma", "no", "pe", "qi", "ro", "su", "ta", "wo"]
_JOURNAL_POOL = [
    "NATURE", "SCIENCE", "CELL", "LANCET", "GENE DEV", "EMBO J", "NAT GENET", "DEV BIOL",
    "J BIOL CHEM", "ONCOGENE", "CANCER RES", "J INVEST DERMATOL", "NEW ENGL J MED",
    "P NATL ACAD SCI USA", "MOL CELL BIOL", "DEVELOPMENT", "J CELL BIOL", "CURR BIOL",
    "NEURON", "IMMUNITY", "BLOOD", "CIRCULATION", "HEPATOLOGY", "GUT", "BRAIN",
    "ANN NEUROL", "J NEUROSCI", "J IMMUNOL", "J VIROL", "PLANT CELL",
]


def _edit_string(s: str, rng: np.random.Generator, alphabet: str) -> str:
    chars = list(s)
    op = int(rng.integers(3))
    pos = int(rng.integers(len(chars)))
    if op == 0 or len(chars) < 3:
        chars[pos] = alphabet[int(rng.integers(len(alphabet)))]
    elif op == 1:
        del chars[pos]
    else:
        chars.insert(pos, alphabet[int(rng.integers(len(alphabet)))])
    return "".join(chars)


def noisy_reference_fixture(n_canonical: int = 1000, variants: int = 3, seed: int = 7,
                            years: tuple = (1950, 2015)):
    """Canonical CR strings plus copies with author/source typos (edit distance <= 2).

    Returns ``(cr_strings, labels)``; ``labels[i]`` is the canonical index of
    string ``i``.  Canonical strings come first, in label order.
    """
    rng = np.random.default_rng(seed)
    canon = []
    seen = set()
    while len(canon) < n_canonical:
        name = "".join(_SYL[int(rng.integers(len(_SYL)))] for _ in range(int(rng.integers(3, 5))))
        initial = string.ascii_uppercase[int(rng.integers(26))]
        year = int(rng.integers(years[0], years[1] + 1))
        src = _JOURNAL_POOL[int(rng.integers(len(_JOURNAL_POOL)))]
        vol = int(rng.integers(1, 400))
        page = int(rng.integers(1, 3000))
        key = (name, year)
        if key in seen:
            continue
        seen.add(key)
        canon.append((f"{name.upper()} {initial}", year, src, str(vol), str(page)))
    strings = []
    labels = []
    for lab, (au, y, src, vol, page) in enumerate(canon):
        strings.append(f"{au}, {y}, {src}, V{vol}, P{page}")
        labels.append(lab)
    for lab, (au, y, src, vol, page) in enumerate(canon):
        for _ in range(variants):
            # typos hit the free-text fields; volume and page stay exact
            fields = [au, src]
            for _ in range(int(rng.integers(1, 3))):
                f = int(rng.integers(2))
                fields[f] = _edit_string(fields[f], rng, string.ascii_uppercase)
            strings.append(f"{fields[0]}, {y}, {fields[1]}, V{vol}, P{page}")
            labels.append(lab)
    return strings, labels


def planted_year_counts(planted=PLANTED_YEARS, span=(1827, 2012), spike_factor: float = 4.0,
                        base: int = 20, growth: float = 0.02) -> dict:
    """``{year: count}`` with a smooth growing baseline and planted spikes.

    Each planted year gets ``spike_factor`` times its local baseline on top.
    """
    out = {}
    for y in range(span[0], span[1] + 1):
        b = int(round(base * np.exp(growth * (y - span[0]))))
        out[y] = b + (int(round(spike_factor * b)) if y in planted else 0)
    return out


def main(argv=None) -> int:
    import argparse

    ap = argparse.ArgumentParser(description="Write the planted-milestone fixture exports.")
    ap.add_argument("outdir")
    ap.add_argument("--seed", type=int, default=20160201)
    args = ap.parse_args(argv)
    fx = planted_fixture(args.seed)
    for lab, p in fx.write_exports(args.outdir).items():
        print(f"{lab}\t{p}")
    print(f"milestones\t{fx.write_milestones(Path(args.outdir) / 'milestones.csv')}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
