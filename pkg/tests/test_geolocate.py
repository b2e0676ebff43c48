import itertools

import pytest
from hypothesis import given, strategies as st

from rumornet.geolocate import (
    GazetteerParser,
    GeoAssignment,
    GeoSource,
    geolocate_user,
    geolocation_report,
    read_assignments,
    write_assignments,
)
from rumornet.graph import UserNode
from rumornet.ingest import PostRecord

PARSER = GazetteerParser()
USER = UserNode("u1", 5)


def posts(*texts):
    return [PostRecord(f"p{i}", "u1", i + 1, t) for i, t in enumerate(texts)]


def locate(profile=None, username="", texts=(), friends=()):
    return geolocate_user(USER, profile, username, posts(*texts), list(friends), PARSER)


def test_confidences_are_fixed():
    assert {s.confidence for s in GeoSource} == {1.0, 0.9, 0.6, 0.2, 0.1}
    assert GeoSource.METADATA.confidence == 1.0 and GeoSource.FRIEND.confidence == 0.1


def test_metadata_wins():
    a = locate("Dallas, TX", "joe_from_ohio")
    assert (a.state, a.source, a.confidence) == ("TX", GeoSource.METADATA, 1.0)


def test_username_second():
    a = locate(None, "joe_from_ohio")
    assert (a.state, a.source, a.confidence) == ("OH", GeoSource.USERNAME, 0.9)


def test_friend_unique_mode():
    a = locate(friends=["TX", "TX", "CA"])
    assert (a.state, a.source, a.confidence) == ("TX", GeoSource.FRIEND, 0.1)


def test_friend_tie_gives_nothing():
    assert locate(friends=["TX", "CA"]) is None


@pytest.mark.parametrize("text", ["I live in Phoenix now", "born in Ohio", "I'm from Nevada, love it here"])
def test_residence_phrases(text):
    assert locate(texts=[text]).source is GeoSource.PHRASE


def test_frequency_needs_three_mentions_and_unique_mode():
    assert locate(texts=["Georgia game", "Georgia peaches"]) is None
    a = locate(texts=["Georgia game", "Georgia peaches", "Georgia rain", "Kansas"])
    assert (a.state, a.source) == ("GA", GeoSource.FREQUENCY)
    assert locate(texts=["Georgia", "Georgia", "Kansas", "Kansas"]) is None


def test_no_signal_is_none():
    assert locate("somewhere nice", "patriot1776", ["hello"]) is None


def test_parser_forms():
    assert PARSER.parse("TX") == "TX"
    assert PARSER.parse("New York City") == "NY"
    assert PARSER.parse("west virginia") == "WV"
    assert PARSER.mentions("Dallas, TX") == ["TX"]
    assert PARSER.parse("it is what it is") is None


def test_custom_gazetteer(tmp_path):
    p = tmp_path / "g.csv"
    p.write_text("place,state\nSmallville,KS\n")
    assert GazetteerParser.from_csv(p).parse("Smallville") == "KS"


# one representative signal per source, each pointing to a different state
SIGNALS = {
    GeoSource.METADATA: ("profile", "Dallas, TX", "TX"),
    GeoSource.USERNAME: ("username", "joe_from_ohio", "OH"),
    GeoSource.PHRASE: ("texts", ["I live in Florida"], "FL"),
    GeoSource.FREQUENCY: ("texts", ["Georgia game", "Georgia peach", "Georgia rain"], "GA"),
    GeoSource.FRIEND: ("friends", ["NV", "NV", "CA"], "NV"),
}


def build(sources):
    kwargs = {"profile": None, "username": "patriot", "texts": [], "friends": []}
    for s in sources:
        key, value, _ = SIGNALS[s]
        kwargs[key] = kwargs[key] + value if key == "texts" else value
    return kwargs


@pytest.mark.parametrize("pair", list(itertools.combinations(GeoSource, 2)), ids=lambda p: f"{p[0].value}+{p[1].value}")
def test_pairwise_priority(pair):
    best = max(pair, key=lambda s: s.confidence)
    a = locate(**build(pair))
    assert (a.source, a.state, a.confidence) == (best, SIGNALS[best][2], best.confidence)


@given(st.sets(st.sampled_from(list(GeoSource))))
def test_priority_over_any_subset(sources):
    a = locate(**build(sorted(sources, key=lambda s: s.confidence)))
    if not sources:
        assert a is None
    else:
        best = max(sources, key=lambda s: s.confidence)
        assert a.source is best
        assert a.confidence in {1.0, 0.9, 0.6, 0.2, 0.1}
        assert a == locate(**build(sorted(sources, key=lambda s: s.confidence)))


def _a(src):
    return GeoAssignment("x", "TX", src, src.confidence)


def test_report_arithmetic():
    r = geolocation_report([_a(GeoSource.METADATA), _a(GeoSource.METADATA), _a(GeoSource.FRIEND), None])
    assert r["coverage"] == 0.75
    assert geolocation_report([None, None])["coverage"] == 0.0


def test_report_reproduces_reported_proportions():
    counts = {GeoSource.METADATA: 52_918, GeoSource.FRIEND: 8_451, GeoSource.USERNAME: 1_772,
              GeoSource.FREQUENCY: 441, GeoSource.PHRASE: 369}
    unassigned = 126_494
    fixture = [_a(s) for s, n in counts.items() for _ in range(n)] + [None] * unassigned
    r = geolocation_report(fixture)
    total = sum(counts.values()) + unassigned
    assert r["total"] == total == 190_445
    for s, n in counts.items():
        assert r["per_source"][s.value] == n
        assert r["per_source_fraction"][s.value] == n / total
    assert round(100 * r["coverage"], 2) == 33.58
    assert round(100 * r["per_source_fraction"]["Metadata"], 2) == 27.79
    assert round(100 * r["per_source_fraction"]["Friend"], 2) == 4.44


def test_assignment_file_round_trip(tmp_path):
    rows = [GeoAssignment("b", "OH", GeoSource.USERNAME, 0.9), None, GeoAssignment("a", "TX", GeoSource.METADATA, 1.0)]
    write_assignments(rows, tmp_path / "g.csv")
    assert read_assignments(tmp_path / "g.csv") == [rows[2], rows[0]]
