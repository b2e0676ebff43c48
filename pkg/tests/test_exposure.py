import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rumornet.errors import EmptyInputError, InputError, MissingPostError
from rumornet.exposure import (
    ExposureRecord,
    build_panel,
    cohort_curve,
    diffusion_timeline,
    read_panel,
    sharing_curve,
    write_curve,
    write_panel,
)
from rumornet.graph import InformationGraph, UserNode
from rumornet.ingest import PostRecord, RumorCategory
from rumornet.synth import monotone_hazard_panel, random_panel


def brute_force_curve(panel, k_max):
    """Count each k from scratch over the raw records."""
    out = []
    for k in range(k_max + 1):
        at_risk = [r for r in panel if r.exposure_count >= k]
        if not at_risk:
            continue
        shared = [r for r in at_risk if r.first_share_exposure is not None and r.first_share_exposure <= k]
        out.append((k, len(shared) / len(at_risk), len(at_risk)))
    return out


def as_tuples(points):
    return [(p.k, p.probability, p.sample_size) for p in points]


def _g(*ids):
    g = InformationGraph()
    for u in ids:
        g.add_user(UserNode(u))
    return g


DV = RumorCategory.DEAD_VOTERS


def test_single_exposure_share():
    posts = [PostRecord("p", "v", 1, "", rumor_label=True, rumor_category=DV),
             PostRecord("r", "u", 2, "", repost_of="p")]
    g = _g("u", "v").add_edge("v", "u", 1)
    u = {r.user: r for r in build_panel(g, posts)}["u"]
    assert (u.exposure_count, u.first_share_exposure) == (1, 1)


def test_never_shares():
    posts = [PostRecord(f"p{t}", "v", t, "", rumor_label=True, rumor_category=DV) for t in (1, 3, 5)]
    g = _g("u", "v").add_edge("v", "u", 1)
    u = {r.user: r for r in build_panel(g, posts)}["u"]
    assert (u.exposure_count, u.first_share_exposure) == (3, None)


def test_originator_gets_zero():
    posts = [PostRecord("p", "v", 1, "", rumor_label=True, rumor_category=DV)]
    v = {r.user: r for r in build_panel(_g("v"), posts)}["v"]
    assert v.first_share_exposure == 0


def test_same_second_counts_impression_first():
    posts = [PostRecord("a", "v", 5, "", rumor_label=True, rumor_category=DV),
             PostRecord("b", "u", 5, "", rumor_label=True, rumor_category=DV),
             PostRecord("c", "v", 9, "", rumor_label=True, rumor_category=DV)]
    g = _g("u", "v").add_edge("v", "u", 1)
    u = {r.user: r for r in build_panel(g, posts)}["u"]
    assert (u.exposure_count, u.first_share_exposure) == (2, 1)


def test_categories_are_separate_rumors():
    posts = [PostRecord("a", "v", 1, "", rumor_label=True, rumor_category=DV),
             PostRecord("b", "u", 2, "", rumor_label=True, rumor_category=RumorCategory.SOFTWARE_SECURITY)]
    g = _g("u", "v").add_edge("v", "u", 1)
    rows = {(r.user, r.rumor): r for r in build_panel(g, posts)}
    assert rows[("u", "DeadVoters")].first_share_exposure is None
    assert rows[("u", "SoftwareSecurity")].first_share_exposure == 0


def test_unlabeled_posts_rejected():
    with pytest.raises(InputError):
        build_panel(_g("v"), [PostRecord("p", "v", 1, "")])


def test_three_record_panel():
    panel = [ExposureRecord("a", "r", 3, 2), ExposureRecord("b", "r", 3, None), ExposureRecord("c", "r", 1, 1)]
    got = {p.k: p.probability for p in sharing_curve(panel, 3)}
    assert got[1] == pytest.approx(1 / 3)
    assert got[2] == pytest.approx(1 / 2)
    assert got[3] == pytest.approx(1 / 2)


def test_degenerate_curves(use_numba):
    nobody = [ExposureRecord(f"u{i}", "r", i, None) for i in range(5)]
    assert all(p.probability == 0 for p in sharing_curve(nobody, 6, use_numba))
    everyone = [ExposureRecord(f"u{i}", "r", i + 1, 1) for i in range(5)]
    assert all(p.probability == 1 for p in sharing_curve(everyone, 6, use_numba) if p.k >= 1)
    with pytest.raises(EmptyInputError):
        sharing_curve([], 3)


def test_empty_denominators_omitted():
    assert [p.k for p in sharing_curve([ExposureRecord("a", "r", 2, None)], 5)] == [0, 1, 2]


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 50))
def test_curve_matches_brute_force(seed, k_max):
    panel = random_panel(int(np.random.default_rng(seed).integers(1, 120)), np.random.default_rng(seed))
    expected = brute_force_curve(panel, k_max)
    for flag in (True, False):
        assert as_tuples(sharing_curve(panel, k_max, use_numba=flag)) == expected


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_sample_sizes_nonincreasing(seed):
    panel = random_panel(80, np.random.default_rng(seed))
    sizes = [p.sample_size for p in sharing_curve(panel, 45)]
    assert sizes == sorted(sizes, reverse=True)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 25))
def test_fixed_cohort_monotone(seed, horizon):
    panel = random_panel(150, np.random.default_rng(seed))
    probs = [p.probability for p in cohort_curve(panel, horizon)]
    assert all(b >= a for a, b in zip(probs, probs[1:]))


def test_monotone_hazard_cohort_rises():
    panel = monotone_hazard_panel(3000, np.random.default_rng(11))
    probs = [p.probability for p in cohort_curve(panel, 20)]
    assert probs[-1] > probs[0]
    assert all(b >= a for a, b in zip(probs, probs[1:]))


def test_panel_and_curve_files(tmp_path):
    panel = [ExposureRecord("a", "r", 3, 2), ExposureRecord("b", "r", 3, None)]
    write_panel(panel, tmp_path / "panel.csv")
    assert read_panel(tmp_path / "panel.csv") == panel
    write_curve(sharing_curve(panel, 3), tmp_path / "curve.csv")
    assert (tmp_path / "curve.csv").read_text().splitlines()[:3] == ["k,probability,n_k", "0,0.0000,2", "1,0.0000,2"]


def _timeline_posts():
    posts = [PostRecord("root", "v", 1000, "", rumor_label=True, rumor_category=DV)]
    posts += [PostRecord(f"r{t}", f"u{t}", 1000 + t, "", repost_of="root") for t in (10, 20, 30)]
    return posts


def test_timeline_direct_cascade():
    tl = diffusion_timeline("root", _timeline_posts(), horizon=100)
    assert tl.points == [(0, 0), (10, 1), (20, 2), (30, 3), (100, 3)]
    assert tl.total == 3


def test_timeline_secondary_post():
    posts = _timeline_posts() + [
        PostRecord("s", "w", 1000 + 3600, "", rumor_label=True, rumor_category=DV),
        PostRecord("s1", "a", 1000 + 3700, "", repost_of="s"),
        PostRecord("s2", "b", 1000 + 3800, "", repost_of="s"),
        PostRecord("o", "w", 1000 + 50, "", rumor_label=True, rumor_category=RumorCategory.SOFTWARE_SECURITY),
        PostRecord("o1", "c", 1000 + 60, "", repost_of="o"),
    ]
    tl = diffusion_timeline("root", posts, horizon=86400)
    assert [c for t, c in tl.points if t > 3600] == [4, 5, 5]
    assert tl.secondary_posters == [("v", 0), ("w", 3600)]


def test_timeline_flat_and_missing():
    tl = diffusion_timeline("root", _timeline_posts()[:1], horizon=60)
    assert tl.points == [(0, 0), (60, 0)]
    with pytest.raises(MissingPostError):
        diffusion_timeline("nope", _timeline_posts())


@settings(max_examples=40, deadline=None)
@given(st.lists(st.integers(-50, 5000), max_size=40), st.integers(1, 4000))
def test_timeline_nondecreasing_and_total(offsets, horizon):
    posts = [PostRecord("root", "v", 10_000, "", rumor_label=True, rumor_category=DV)]
    posts += [PostRecord(f"r{i}", f"u{i}", 10_000 + dt, "", repost_of="root") for i, dt in enumerate(offsets)]
    tl = diffusion_timeline("root", posts, horizon=horizon)
    counts = [c for _, c in tl.points]
    assert counts == sorted(counts)
    assert all(0 <= t <= horizon for t, _ in tl.points)
    assert tl.total == sum(0 <= dt <= horizon for dt in offsets)
