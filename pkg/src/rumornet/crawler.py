"""Breadth-first user discovery and prioritized incremental post scraping
against an abstract platform client."""
from __future__ import annotations

import logging
from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Protocol, Sequence

import numpy as np

from .graph import UserNode
from .ingest import PostRecord

log = logging.getLogger(__name__)

DEFAULT_PER_USER_CAP = 20


class PlatformClient(Protocol):
    def fetch_followers(self, user: str, limit: int) -> list[str]: ...

    def fetch_following(self, user: str, limit: int) -> list[str]: ...

    def fetch_posts(self, user: str, since: int) -> list[PostRecord]: ...

    def fetch_profile(self, user: str) -> UserNode: ...


class ClientError(RuntimeError):
    pass


class SimulatedPlatform:
    """In-memory platform. ``following[u]`` lists the accounts u follows; the
    follower lists are derived from it in insertion order."""

    def __init__(self, following: dict, posts: Optional[dict] = None, follower_counts: Optional[dict] = None,
                 failing: Sequence[str] = ()):
        self.following = {u: list(vs) for u, vs in following.items()}
        self.followers: dict[str, list[str]] = {u: [] for u in self.following}
        for u, vs in self.following.items():
            for v in vs:
                self.followers.setdefault(v, []).append(u)
                self.following.setdefault(v, [])
        self.posts = {u: sorted(ps, key=lambda p: (p.timestamp, p.post_id)) for u, ps in (posts or {}).items()}
        self.follower_counts = follower_counts or {}
        self.failing = set(failing)
        self.calls: list[tuple[str, str, Optional[int]]] = []

    @classmethod
    def generate(cls, n_nodes: int, mean_degree: float, rng_seed: int = 0, posts_per_user: float = 0.0,
                 start_time: int = 1_726_000_000) -> "SimulatedPlatform":
        """Random follow network: each user follows Poisson(mean_degree)
        others, chosen with preferential weights so follower counts are skewed."""
        rng = np.random.default_rng(rng_seed)
        ids = [f"user{i:05d}" for i in range(n_nodes)]
        pop = rng.pareto(1.5, size=n_nodes) + 1.0
        p = pop / pop.sum()
        following = {}
        for i, u in enumerate(ids):
            k = min(int(rng.poisson(mean_degree)), n_nodes - 1)
            if k == 0:
                following[u] = []
                continue
            q = p.copy()
            q[i] = 0.0
            q /= q.sum()
            picks = rng.choice(n_nodes, size=k, replace=False, p=q)
            following[u] = [ids[j] for j in picks]
        posts = {}
        if posts_per_user > 0:
            for i, u in enumerate(ids):
                count = int(rng.poisson(posts_per_user))
                times = np.sort(rng.integers(start_time, start_time + 30 * 86400, size=count))
                posts[u] = [PostRecord(f"{u}-p{j}", u, int(t), f"post {j} by {u}") for j, t in enumerate(times)]
        return cls(following, posts)

    def _check(self, user):
        if user in self.failing:
            raise ClientError(f"simulated failure for {user}")
        if user not in self.following:
            raise ClientError(f"unknown user {user}")

    def fetch_followers(self, user, limit):
        self.calls.append(("followers", user, limit))
        self._check(user)
        return self.followers.get(user, [])[:limit]

    def fetch_following(self, user, limit):
        self.calls.append(("following", user, limit))
        self._check(user)
        return self.following.get(user, [])[:limit]

    def fetch_posts(self, user, since):
        self.calls.append(("posts", user, since))
        self._check(user)
        return [p for p in self.posts.get(user, []) if p.timestamp > since]

    def fetch_profile(self, user):
        self.calls.append(("profile", user, None))
        self._check(user)
        count = self.follower_counts.get(user, len(self.followers.get(user, [])))
        return UserNode(user, int(count))


@dataclass
class CrawlState:
    queue: deque = field(default_factory=deque)
    visited: set = field(default_factory=set)
    stored_users: list = field(default_factory=list)
    last_scraped: dict = field(default_factory=dict)


def _fetch_neighbors(client, user, cap):
    profile = client.fetch_profile(user)
    followers = list(client.fetch_followers(user, cap))[:cap]
    following = list(client.fetch_following(user, cap))[:cap]
    return profile, followers + following


def bfs_crawl(client: PlatformClient, seed: str, max_users: int, per_user_cap: int = DEFAULT_PER_USER_CAP,
              workers: int = 1, state: Optional[CrawlState] = None) -> list[UserNode]:
    """Breadth-first discovery from ``seed``.

    Each dequeued user is stored, then up to ``per_user_cap`` followers and
    ``per_user_cap`` followed accounts are fetched and unseen ids are enqueued.
    With ``workers > 1`` a window of queued users is fetched concurrently, but
    storage and enqueueing still follow dequeue order, so the result does not
    depend on the worker count.
    """
    if max_users < 1 or per_user_cap < 1:
        raise ValueError("max_users and per_user_cap must be positive")
    if state is None:
        state = CrawlState()
    if not state.queue and not state.stored_users:
        state.queue.append(seed)
        state.visited.add(seed)
    stored_ids = {u.id for u in state.stored_users}

    def fetch(user):
        try:
            return _fetch_neighbors(client, user, per_user_cap)
        except Exception as exc:  # client failures skip the user, never the crawl
            log.warning("skipping %s: %s", user, exc)
            return None

    pool = ThreadPoolExecutor(max_workers=workers) if workers > 1 else None
    try:
        while state.queue and len(state.stored_users) < max_users:
            window = []
            while state.queue and len(window) < max(1, workers):
                window.append(state.queue.popleft())
            fetched = list(pool.map(fetch, window)) if pool else [fetch(u) for u in window]
            for i, (user, got) in enumerate(zip(window, fetched)):
                if len(state.stored_users) >= max_users:
                    # put back what was not consumed, in order
                    state.queue.extendleft(reversed(window[i:]))
                    break
                if got is None:
                    continue
                profile, neighbors = got
                if profile.id not in stored_ids:
                    state.stored_users.append(profile)
                    stored_ids.add(profile.id)
                for v in neighbors:
                    if v not in state.visited:
                        state.visited.add(v)
                        state.queue.append(v)
    finally:
        if pool:
            pool.shutdown()
    return list(state.stored_users)


def scrape_posts(client: PlatformClient, users: Sequence[UserNode], state: CrawlState, batch_size: int,
                 now: Optional[Callable[[], int]] = None) -> list[PostRecord]:
    """Scrape one batch: least recently scraped first, then most followers,
    then id. Only posts newer than the user's last scrape are kept. A failing
    user keeps its old timestamp so it leads the next batch."""
    import time

    clock = now or (lambda: int(time.time()))
    never = float("-inf")
    order = sorted(users, key=lambda u: (state.last_scraped.get(u.id, never), -u.follower_count, u.id))
    out = []
    for user in order[:batch_size]:
        since = state.last_scraped.get(user.id, 0)
        try:
            posts = client.fetch_posts(user.id, since)
        except Exception as exc:
            log.warning("deferring %s: %s", user.id, exc)
            continue
        out.extend(p for p in posts if p.timestamp > since)
        state.last_scraped[user.id] = int(clock())
    return out
