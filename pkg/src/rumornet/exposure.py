"""Per-user rumor exposure panels, the cumulative sharing curve, and
root-post diffusion timelines."""
from __future__ import annotations

import bisect
import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Hashable, Optional, Sequence

import numpy as np

from ._kernels import sharing_counts
from .errors import EmptyInputError, InputError, MissingPostError, RangeError
from .graph import InformationGraph
from .ingest import PostIndex, PostRecord, RumorCategory

DEFAULT_SIMILARITY_WINDOW = 24 * 3600


@dataclass(frozen=True)
class ExposureRecord:
    """``first_share_exposure`` is None when the user never shared the rumor."""

    user: str
    rumor: Hashable
    exposure_count: int
    first_share_exposure: Optional[int]


@dataclass(frozen=True)
class SharingCurvePoint:
    k: int
    probability: float
    sample_size: int


def category_group(post: PostRecord, category: Optional[RumorCategory]) -> Hashable:
    return category.value if category is not None else "Uncategorized"


def build_panel(graph: InformationGraph, posts: Sequence[PostRecord],
                group: Callable[[PostRecord, Optional[RumorCategory]], Optional[Hashable]] = category_group
                ) -> list[ExposureRecord]:
    """Exposure counts per (user, rumor).

    Every rumor post or repost by an in-neighbor v of u is one impression on
    u; repeated posts by v are separate impressions. ``exposure_count`` counts
    all impressions in the data. ``first_share_exposure`` counts impressions
    at or before u's first share of that rumor (an impression with the same
    timestamp as the share is taken to come first); 0 marks an originator.
    Users with neither impressions nor shares are left out.
    """
    index = PostIndex(posts)
    times: dict[Hashable, dict[str, list[int]]] = {}
    for p in sorted(index.posts, key=lambda p: (p.timestamp, p.post_id)):
        label, cat = index.effective_label(p)
        if label is None:
            raise InputError(f"post {p.post_id!r} has no rumor label")
        if not label:
            continue
        g = group(p, cat)
        if g is None:
            continue
        times.setdefault(g, {}).setdefault(p.author, []).append(p.timestamp)

    panel = []
    for g in sorted(times, key=str):
        by_author = times[g]
        impressions: dict[str, list[int]] = {}
        for v in sorted(by_author):
            if v not in graph:
                continue
            for u, _w in graph.out_neighbors(v):
                impressions.setdefault(u, []).extend(by_author[v])
        users = set(impressions) | {u for u in by_author if u in graph}
        for u in sorted(users):
            imps = sorted(impressions.get(u, ()))
            shares = by_author.get(u)
            first = None
            if shares:
                first = bisect.bisect_right(imps, shares[0])
            panel.append(ExposureRecord(u, g, len(imps), first))
    return panel


def _panel_arrays(panel):
    e = np.fromiter((r.exposure_count for r in panel), dtype=np.int64, count=len(panel))
    t = np.fromiter((-1 if r.first_share_exposure is None else r.first_share_exposure for r in panel),
                    dtype=np.int64, count=len(panel))
    return e, t


def sharing_curve(panel: Sequence[ExposureRecord], k_max: int, use_numba=None) -> list[SharingCurvePoint]:
    """P(k) = |{u: E_u >= k and T_u <= k}| / |{u: E_u >= k}| for k = 0..k_max;
    points with an empty denominator are omitted."""
    if not panel:
        raise EmptyInputError("sharing_curve needs a non-empty panel")
    if k_max < 1:
        raise RangeError(f"k_max must be positive, got {k_max}")
    e, t = _panel_arrays(panel)
    n_k, hits = sharing_counts(e, t, k_max, use_numba=use_numba)
    return [
        SharingCurvePoint(k, float(hits[k]) / float(n_k[k]), int(n_k[k]))
        for k in range(k_max + 1)
        if n_k[k] > 0
    ]


def cohort_curve(panel: Sequence[ExposureRecord], horizon_k: int) -> list[SharingCurvePoint]:
    """Sharing curve over k = 0..horizon_k restricted to users with at least
    ``horizon_k`` exposures; nondecreasing by construction."""
    cohort = [r for r in panel if r.exposure_count >= horizon_k]
    if not cohort:
        return []
    return sharing_curve(cohort, horizon_k)


def write_curve(points: Sequence[SharingCurvePoint], path) -> None:
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["k", "probability", "n_k"])
        for p in points:
            w.writerow([p.k, f"{p.probability:.4f}", p.sample_size])


def write_panel(panel: Sequence[ExposureRecord], path) -> None:
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["user", "rumor", "exposure_count", "first_share_exposure"])
        for r in panel:
            w.writerow([r.user, r.rumor, r.exposure_count,
                        "" if r.first_share_exposure is None else r.first_share_exposure])


def read_panel(path) -> list[ExposureRecord]:
    """Panel CSV; an empty or ``Never`` first_share_exposure means no share."""
    out = []
    with Path(path).open("r", encoding="utf-8", newline="") as fh:
        for line_no, r in enumerate(csv.DictReader(fh), start=2):
            try:
                t = (r.get("first_share_exposure") or "").strip()
                out.append(ExposureRecord(
                    r.get("user", f"row{line_no}"),
                    r.get("rumor", ""),
                    int(r["exposure_count"]),
                    None if t in ("", "Never", "never") else int(t),
                ))
            except (KeyError, ValueError) as exc:
                raise InputError(f"{path}:{line_no}: {exc}") from None
    return out


# -- diffusion timelines -----------------------------------------------------


@dataclass
class DiffusionTimeline:
    root_post_id: str
    horizon: int
    points: list = field(default_factory=list)  # (elapsed seconds, cumulative reposts)
    secondary_posters: list = field(default_factory=list)  # (user, first-post elapsed seconds)

    @property
    def total(self) -> int:
        return self.points[-1][1] if self.points else 0


def diffusion_timeline(root_post_id: str, posts: Sequence[PostRecord], graph: Optional[InformationGraph] = None,
                       horizon: int = 24 * 3600, similarity_window: int = DEFAULT_SIMILARITY_WINDOW
                       ) -> DiffusionTimeline:
    """Cumulative reposts after a root rumor post.

    Counted reposts are those of the root and of every other original post in
    the same category created within ``similarity_window`` after the root,
    restricted to ``[0, horizon]`` seconds of elapsed time. ``graph`` is
    accepted for interface symmetry and not needed here.
    """
    if horizon <= 0:
        raise RangeError("horizon must be positive")
    index = PostIndex(posts)
    root = index.by_id.get(root_post_id)
    if root is None:
        raise MissingPostError(f"unknown root post {root_post_id!r}")
    if root.repost_of is not None:
        raise InputError(f"root {root_post_id!r} is a repost")
    label, category = index.effective_label(root)
    if not label:
        raise InputError(f"root {root_post_id!r} is not rumor-labeled")
    t0 = root.timestamp

    sources = [root]
    for p in index.posts:
        if p is root or p.repost_of is not None:
            continue
        lab, cat = index.effective_label(p)
        if lab and cat == category and 0 <= p.timestamp - t0 <= similarity_window:
            sources.append(p)

    first_post: dict[str, int] = {}
    for s in sources:
        dt = s.timestamp - t0
        if dt <= horizon and (s.author not in first_post or dt < first_post[s.author]):
            first_post[s.author] = dt

    elapsed = []
    for s in sources:
        for r in index.reposts_of_root.get(s.post_id, ()):
            dt = r.timestamp - t0
            if 0 <= dt <= horizon:
                elapsed.append(dt)
    elapsed.sort()

    points = [(0, 0)]
    for i, dt in enumerate(elapsed, start=1):
        if points[-1][0] == dt:
            points[-1] = (dt, i)
        else:
            points.append((dt, i))
    if points[-1][0] != horizon:
        points.append((horizon, points[-1][1]))
    posters = sorted(first_post.items(), key=lambda kv: (kv[1], kv[0]))
    return DiffusionTimeline(root_post_id, horizon, points, posters)


def write_timeline(tl: DiffusionTimeline, path, posters_path=None) -> None:
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["elapsed_seconds", "cumulative_reposts"])
        w.writerows(tl.points)
    if posters_path is not None:
        with Path(posters_path).open("w", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["user", "first_post_elapsed_seconds"])
            w.writerows(tl.secondary_posters)
