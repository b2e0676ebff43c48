"""State-level geolocation by a descending-confidence cascade of sources.

Sources are tried from most to least reliable; the first one that yields a
state wins:

1. profile metadata (profile location field)          1.0
2. username                                           0.9
3. first-person residence phrases in posts            0.6
4. most frequent state mentioned across posts         0.2
5. most frequent state among friends                  0.1
"""
from __future__ import annotations

import csv
import enum
import re
from collections import Counter
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Iterable, Optional, Protocol, Sequence

from .graph import UserNode
from .ingest import PostRecord


class GeoSource(enum.Enum):
    METADATA = "Metadata"
    USERNAME = "Username"
    PHRASE = "Phrase"
    FREQUENCY = "Frequency"
    FRIEND = "Friend"

    @property
    def confidence(self) -> float:
        return _CONFIDENCE[self]


_CONFIDENCE = {
    GeoSource.METADATA: 1.0,
    GeoSource.USERNAME: 0.9,
    GeoSource.PHRASE: 0.6,
    GeoSource.FREQUENCY: 0.2,
    GeoSource.FRIEND: 0.1,
}

# First-person residence patterns; the captured text is handed to the parser.
RESIDENCE_PATTERNS = (
    re.compile(r"\bi live in\s+([^.!?\n]{1,40})", re.IGNORECASE),
    re.compile(r"\bborn in\s+([^.!?\n]{1,40})", re.IGNORECASE),
    re.compile(r"\bfrom\s+([^.!?\n]{1,40}?)\s+here\b", re.IGNORECASE),
)

MIN_FREQUENCY_MENTIONS = 3


@dataclass(frozen=True)
class GeoAssignment:
    user: str
    state: str
    source: GeoSource
    confidence: float


class TextLocationParser(Protocol):
    def parse(self, text: str) -> Optional[str]: ...


def _norm(text: str) -> str:
    text = text.lower().replace(".", "")
    text = re.sub(r"[^a-z0-9 ]+", " ", text)
    return re.sub(r"\s+", " ", text).strip()


def load_state_table() -> list[tuple[str, str, int]]:
    """Bundled (code, name, population) rows; populations are approximate 2023 estimates."""
    text = resources.files("rumornet.data").joinpath("states.csv").read_text(encoding="utf-8")
    rows = list(csv.DictReader(text.splitlines()))
    return [(r["code"], r["name"], int(r["population"])) for r in rows]


def default_populations() -> dict[str, int]:
    return {code: pop for code, _, pop in load_state_table()}


class GazetteerParser:
    """Reference parser: full state names, city names from a gazetteer, and
    two-letter codes written as ``City, ST`` or standing alone."""

    def __init__(self, places: Optional[dict[str, str]] = None):
        states = load_state_table()
        self.codes = {code for code, _, _ in states}
        table = {_norm(name): code for code, name, _ in states}
        table["d c"] = "DC"
        if places is None:
            places = self._bundled_places()
        for place, code in places.items():
            code = code.strip().upper()
            if code in self.codes:
                table[_norm(place)] = code
        self.table = table
        names = sorted(table, key=len, reverse=True)
        alternation = "|".join(r"[\s_\-.]+".join(map(re.escape, n.split(" "))) for n in names)
        self._names = re.compile(r"(?<![A-Za-z0-9])(?:" + alternation + r")(?![A-Za-z0-9])", re.IGNORECASE)
        self._code_after_comma = re.compile(r",\s*([A-Z]{2})(?![A-Za-z])")

    @staticmethod
    def _bundled_places() -> dict[str, str]:
        text = resources.files("rumornet.data").joinpath("gazetteer.csv").read_text(encoding="utf-8")
        return {r["place"]: r["state"] for r in csv.DictReader(text.splitlines())}

    @classmethod
    def from_csv(cls, path) -> "GazetteerParser":
        with Path(path).open("r", encoding="utf-8", newline="") as fh:
            return cls({r["place"]: r["state"] for r in csv.DictReader(fh)})

    def mentions(self, text: str) -> list[str]:
        """State mentions in reading order; ``Dallas, TX`` counts once."""
        if not text:
            return []
        stripped = text.strip()
        if len(stripped) == 2 and stripped in self.codes:
            return [stripped]
        hits = [(m.start(), m.end(), self.table[_norm(m.group(0))]) for m in self._names.finditer(text)]
        for m in self._code_after_comma.finditer(text):
            if m.group(1) in self.codes:
                hits.append((m.start(), m.end(), m.group(1)))
        hits.sort()
        found, last_end, last_state = [], -1, None
        for start, end, state in hits:
            if start < last_end:
                continue
            between = text[last_end:start] if last_end >= 0 else None
            if state == last_state and between is not None and between.strip() == "":
                last_end = end
                continue
            found.append(state)
            last_end, last_state = end, state
        return found

    def parse(self, text: str) -> Optional[str]:
        """The explicit ``, ST`` code when present, else the first mention."""
        if not text:
            return None
        for m in self._code_after_comma.finditer(text):
            if m.group(1) in self.codes:
                return m.group(1)
        found = self.mentions(text)
        return found[0] if found else None


def _unique_mode(values: Iterable[str]) -> tuple[Optional[str], int]:
    counts = Counter(v for v in values if v)
    if not counts:
        return None, 0
    ranked = counts.most_common()
    if len(ranked) > 1 and ranked[0][1] == ranked[1][1]:
        return None, sum(counts.values())
    return ranked[0][0], sum(counts.values())


def _assign(user: str, state: str, source: GeoSource) -> GeoAssignment:
    return GeoAssignment(user, state, source, source.confidence)


def geolocate_user(user: UserNode, profile_location: Optional[str], username: str,
                   posts: Sequence[PostRecord], friend_states: Sequence[str],
                   parser: TextLocationParser) -> Optional[GeoAssignment]:
    if profile_location:
        state = parser.parse(profile_location)
        if state:
            return _assign(user.id, state, GeoSource.METADATA)
    if username:
        state = parser.parse(username.replace("_", " "))
        if state:
            return _assign(user.id, state, GeoSource.USERNAME)
    for post in posts:
        for pattern in RESIDENCE_PATTERNS:
            for m in pattern.finditer(post.content):
                state = parser.parse(m.group(1))
                if state:
                    return _assign(user.id, state, GeoSource.PHRASE)
    mentions = []
    find_all = getattr(parser, "mentions", None)
    for post in posts:
        if find_all is not None:
            mentions.extend(find_all(post.content))
        else:
            state = parser.parse(post.content)
            if state:
                mentions.append(state)
    state, total = _unique_mode(mentions)
    if state and total >= MIN_FREQUENCY_MENTIONS:
        return _assign(user.id, state, GeoSource.FREQUENCY)
    state, _ = _unique_mode(friend_states)
    if state:
        return _assign(user.id, state, GeoSource.FRIEND)
    return None


def geolocation_report(assignments: Sequence[Optional[GeoAssignment]]) -> dict:
    counts = {src.value: 0 for src in GeoSource}
    unassigned = 0
    for a in assignments:
        if a is None:
            unassigned += 1
        else:
            counts[a.source.value] += 1
    total = len(assignments)
    assigned = total - unassigned
    return {
        "total": total,
        "assigned": assigned,
        "unassigned": unassigned,
        "per_source": counts,
        "coverage": assigned / total if total else 0.0,
        "per_source_fraction": {k: (v / total if total else 0.0) for k, v in counts.items()},
    }


def write_assignments(assignments: Iterable[Optional[GeoAssignment]], path) -> None:
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["user", "state", "source", "confidence"])
        for a in sorted((a for a in assignments if a is not None), key=lambda a: a.user):
            w.writerow([a.user, a.state, a.source.value, a.confidence])


def read_assignments(path) -> list[GeoAssignment]:
    out = []
    with Path(path).open("r", encoding="utf-8", newline="") as fh:
        for r in csv.DictReader(fh):
            src = GeoSource(r["source"])
            out.append(GeoAssignment(r["user"], r["state"], src, src.confidence))
    return out
