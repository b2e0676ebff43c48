"""Audience-reach influence metric, its overlap robustness variants, rank
comparison statistics and state-level rate analyses."""
from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Optional, Sequence, Union

import numpy as np

from .errors import InputError, MissingNodeError, RangeError
from .geolocate import GeoAssignment
from .graph import InformationGraph
from .ingest import PostIndex, PostRecord, as_index

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class InfluenceScore:
    user: str
    value: float
    variant: str = "base"  # "base", "theta=<x>" or "topk=<k>"


class RumorReach:
    """Per-author original rumor posts with the follower counts of their
    distinct reposters (repost chains resolve to the root post)."""

    def __init__(self, graph: InformationGraph, posts: Union[Sequence[PostRecord], PostIndex]):
        self.graph = graph
        index = as_index(posts)
        self.posts_by_author: dict[str, list[str]] = {}
        self.reposter_followers: dict[str, list[tuple[str, int]]] = {}
        for p in index.posts:
            if p.repost_of is not None or p.rumor_label is not True:
                continue
            self.posts_by_author.setdefault(p.author, []).append(p.post_id)
            reposters = {r.author for r in index.reposts_of_root.get(p.post_id, ()) if r.author != p.author}
            self.reposter_followers[p.post_id] = sorted(
                ((r, self._followers(r)) for r in reposters), key=lambda t: (-t[1], t[0])
            )

    def _followers(self, uid):
        return self.graph.node(uid).follower_count if uid in self.graph else 0

    def authors(self) -> list[str]:
        return sorted(self.posts_by_author)

    def score(self, u: str, theta: float = 0.0, k: Optional[int] = None) -> float:
        if u not in self.graph:
            raise MissingNodeError(f"unknown node {u!r}")
        f_u = self.graph.node(u).follower_count
        total = 0.0
        for pid in self.posts_by_author.get(u, ()):
            reposters = self.reposter_followers[pid]
            if k is not None:
                reposters = reposters[:k]
            audience = sum(f for _, f in reposters)
            total += f_u + (1.0 - theta) * audience
        return total


def _reach(graph, posts):
    return posts if isinstance(posts, RumorReach) else RumorReach(graph, posts)


def influence(u: str, graph: InformationGraph, posts) -> InfluenceScore:
    """Sum over u's original rumor posts of u's followers plus the followers of
    every distinct reposter of that post."""
    return InfluenceScore(u, _reach(graph, posts).score(u), "base")


def influence_overlap_adjusted(u: str, graph: InformationGraph, posts, theta: float) -> InfluenceScore:
    if not 0.0 <= theta <= 1.0:
        raise RangeError(f"theta must be in [0, 1], got {theta}")
    return InfluenceScore(u, _reach(graph, posts).score(u, theta=theta), f"theta={theta:g}")


def influence_topk(u: str, graph: InformationGraph, posts, k: int) -> InfluenceScore:
    """Only the k largest-audience reposters of each post count (ties by id)."""
    if int(k) != k or k < 1:
        raise RangeError(f"k must be a positive integer, got {k}")
    return InfluenceScore(u, _reach(graph, posts).score(u, k=int(k)), f"topk={int(k)}")


def influence_table(graph: InformationGraph, posts, thetas=(0.25, 0.5, 0.75), ks=(10, 25, 50),
                    users: Optional[Sequence[str]] = None) -> list[dict]:
    """One row per user with at least one original rumor post (or per ``users``)."""
    reach = _reach(graph, posts)
    rows = []
    for u in users if users is not None else reach.authors():
        row = {"user": u, "base": reach.score(u)}
        for t in thetas:
            row[f"theta_{t:g}"] = reach.score(u, theta=t)
        for k in ks:
            row[f"top{k}"] = reach.score(u, k=k)
        rows.append(row)
    return rows


def write_influence_table(rows: Sequence[dict], path) -> None:
    if not rows:
        Path(path).write_text("user,base\n", encoding="utf-8")
        return
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(rows[0]), lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({k: (_fmt(v) if isinstance(v, float) else v) for k, v in r.items()})


def _fmt(x: float) -> str:
    return repr(round(x, 6))


# -- rank statistics ---------------------------------------------------------


def average_ranks(values) -> np.ndarray:
    """1-based ranks, tied values receive the mean of their positions."""
    x = np.asarray(values, dtype=float)
    order = np.argsort(x, kind="mergesort")
    sorted_x = x[order]
    ranks = np.empty(len(x), dtype=float)
    i = 0
    n = len(x)
    while i < n:
        j = i
        while j + 1 < n and sorted_x[j + 1] == sorted_x[i]:
            j += 1
        ranks[order[i:j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def _aligned(a, b):
    da, db = dict(a), dict(b)
    if len(da) != len(a) or len(db) != len(b):
        raise InputError("duplicate user ids in ranking")
    if set(da) != set(db):
        raise InputError("rankings cover different user sets")
    users = sorted(da)
    return [da[u] for u in users], [db[u] for u in users]


def pearson_r(x: Sequence[float], y: Sequence[float]) -> Optional[float]:
    """Product-moment correlation; None when either side has zero variance."""
    if len(x) != len(y):
        raise InputError("pearson_r needs equal-length inputs")
    if len(x) < 2:
        raise InputError("pearson_r needs at least two points")
    xa = np.asarray(x, dtype=float)
    ya = np.asarray(y, dtype=float)
    dx = xa - xa.mean()
    dy = ya - ya.mean()
    sxx = float(dx @ dx)
    syy = float(dy @ dy)
    if sxx == 0.0 or syy == 0.0:
        return None
    r = float(dx @ dy) / math.sqrt(sxx * syy)
    return max(-1.0, min(1.0, r))


def spearman_rho(a: Sequence[tuple[str, float]], b: Sequence[tuple[str, float]]) -> Optional[float]:
    """Spearman correlation of two scorings of the same users (average ranks for ties)."""
    xa, xb = _aligned(a, b)
    if len(xa) < 2:
        raise InputError("spearman_rho needs at least two users")
    return pearson_r(average_ranks(xa), average_ranks(xb))


def top_n(scores: Sequence[tuple[str, float]], n: int) -> list[str]:
    return [u for u, _ in sorted(scores, key=lambda t: (-t[1], t[0]))[:n]]


def top_set_overlap(a: Sequence[tuple[str, float]], b: Sequence[tuple[str, float]], n: int) -> float:
    if n < 1:
        raise InputError("n must be positive")
    if n > len(a) or n > len(b):
        raise InputError(f"n={n} exceeds ranking length")
    return len(set(top_n(a, n)) & set(top_n(b, n))) / n


# -- geography ---------------------------------------------------------------


@dataclass(frozen=True)
class StateRumorRate:
    state: str
    rumor_posts_per_100k: float
    geolocated_users: int
    vote_margin: Optional[float] = None
    rumor_posts: int = 0


def state_rumor_rates(posts: Sequence[PostRecord], assignments: Sequence[Optional[GeoAssignment]],
                      populations: Mapping[str, float],
                      margins: Optional[Mapping[str, float]] = None) -> list[StateRumorRate]:
    """Rumor-labeled posts (Truths and ReTruths) per 100K residents, by the
    author's assigned state. Unassigned authors are ignored."""
    state_of = {a.user: a.state for a in assignments if a is not None}
    users_in = {}
    for st in state_of.values():
        users_in[st] = users_in.get(st, 0) + 1
    counts = {}
    for p in posts:
        if p.rumor_label is True and p.author in state_of:
            st = state_of[p.author]
            counts[st] = counts.get(st, 0) + 1
    out = []
    for st in sorted(populations):
        pop = populations[st]
        if not pop or pop <= 0:
            log.warning("state %s has non-positive population; excluded", st)
            continue
        n = counts.get(st, 0)
        out.append(StateRumorRate(
            state=st,
            rumor_posts_per_100k=100000.0 * n / pop,
            geolocated_users=users_in.get(st, 0),
            vote_margin=None if margins is None else margins.get(st),
            rumor_posts=n,
        ))
    return out


def rate_margin_correlation(rates: Sequence[StateRumorRate]) -> Optional[float]:
    pairs = [(r.vote_margin, r.rumor_posts_per_100k) for r in rates if r.vote_margin is not None]
    if len(pairs) < 2:
        return None
    return pearson_r([p[0] for p in pairs], [p[1] for p in pairs])


def write_state_rates(rates: Sequence[StateRumorRate], path) -> None:
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["state", "rate", "margin", "geolocated_users"])
        for r in rates:
            w.writerow([r.state, _fmt(r.rumor_posts_per_100k), "" if r.vote_margin is None else r.vote_margin,
                        r.geolocated_users])


def read_state_values(path) -> dict[str, float]:
    """Two-column CSV (state, value) with a header row."""
    out = {}
    with Path(path).open("r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        next(reader, None)
        for row in reader:
            if len(row) >= 2 and row[0].strip():
                out[row[0].strip()] = float(row[1])
    return out
