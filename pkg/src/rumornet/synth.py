"""Deterministic synthetic datasets for tests, benchmarks and the bundled
``report`` run. Nothing here is real platform data."""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .detect import FixtureAnswer, MockVerifier, content_hash
from .exposure import ExposureRecord
from .geolocate import load_state_table
from .graph import InformationGraph, UserNode
from .ingest import PostRecord, RumorCategory, write_posts, write_users

START = 1_726_358_400  # 2024-09-15 UTC
END = 1_733_011_200  # 2024-12-01 UTC

FILLER = (
    "great rally today", "prayers for the family", "beautiful sunset tonight", "gas prices keep rising",
    "watching the game with friends", "coffee first then work", "happy birthday to my dad",
    "the economy needs fixing", "support our troops", "freedom of speech matters", "church this morning",
    "new puppy at home", "fishing trip this weekend", "inflation is hurting families", "God bless america",
    "border security now", "love this country", "farmers deserve better", "teachers work hard",
)

RUMOR_TEMPLATES = {
    RumorCategory.DIRTY_VOTER_ROLLS: "the voter rolls are full of phantom voters and never cleaned",
    RumorCategory.BALLOT_MAIL_IN_FRAUD: "thousands of fraudulent ballots came through mail-in ballots",
    RumorCategory.DROP_BOX_TAMPERING: "ballot mules stuffed the drop boxes overnight",
    RumorCategory.SOFTWARE_SECURITY: "the voting machines flipped votes again",
    RumorCategory.DEAD_VOTERS: "dead voters cast ballots in this county",
}

# keyword hits the verifier rejects (commentary, jokes, debunks)
NEAR_MISS_TEMPLATES = (
    "I checked the voter rolls with my clerk and everything was fine",
    "dropped my absentee ballot at the drop box today easy",
    "voting machines worked great in our precinct",
)


def funnel_corpus(n_posts: int = 10_000, n_candidates: int = 680, rng_seed: int = 7):
    """Posts where exactly ``n_candidates`` contain a rumor keyword, plus a
    verifier fixture confirming half of those candidates."""
    rng = np.random.default_rng(rng_seed)
    cand_idx = set(rng.choice(n_posts, size=n_candidates, replace=False).tolist())
    cats = list(RumorCategory)
    posts, answers = [], {}
    for i in range(n_posts):
        if i in cand_idx:
            cat = cats[int(rng.integers(len(cats)))]
            if rng.random() < 0.5:
                text = f"{RUMOR_TEMPLATES[cat]} #{i}"
                answers[content_hash(text)] = FixtureAnswer(True, cat, True)
            else:
                text = f"{NEAR_MISS_TEMPLATES[int(rng.integers(len(NEAR_MISS_TEMPLATES)))]} #{i}"
                answers[content_hash(text)] = FixtureAnswer(bool(rng.random() < 0.5), cat, False)
        else:
            text = f"{FILLER[int(rng.integers(len(FILLER)))]} #{i}"
        posts.append(PostRecord(f"p{i:06d}", f"user{i % 500:04d}", START + i * 60, text))
    return posts, MockVerifier(answers)


def monotone_hazard_panel(n_users: int, rng: np.random.Generator, max_exposures: int = 30,
                          base: float = 0.02, slope: float = 0.01) -> list[ExposureRecord]:
    """Panel where the per-exposure share hazard rises with every exposure."""
    out = []
    for i in range(n_users):
        e = int(rng.integers(0, max_exposures + 1))
        t = None
        if rng.random() < 0.05:
            t = 0
        else:
            for k in range(1, e + 1):
                if rng.random() < min(1.0, base + slope * k):
                    t = k
                    break
        out.append(ExposureRecord(f"u{i}", "r", e, t))
    return out


def random_panel(n_users: int, rng: np.random.Generator, max_exposures: int = 40) -> list[ExposureRecord]:
    """Unstructured panel (any T_u <= E_u or never)."""
    out = []
    for i in range(n_users):
        e = int(rng.integers(0, max_exposures + 1))
        t = int(rng.integers(0, e + 1)) if rng.random() < 0.5 else None
        out.append(ExposureRecord(f"u{i}", "r", e, t))
    return out


def random_graph(n_nodes: int, edge_prob: float, rng: np.random.Generator, max_weight: int = 5) -> InformationGraph:
    g = InformationGraph()
    ids = [f"n{i:04d}" for i in range(n_nodes)]
    for u in ids:
        g.add_user(UserNode(u, int(rng.integers(0, 1000))))
    mask = rng.random((n_nodes, n_nodes)) < edge_prob
    np.fill_diagonal(mask, False)
    for s, t in zip(*np.nonzero(mask)):
        g.add_edge(ids[s], ids[t], int(rng.integers(1, max_weight + 1)))
    return g


@dataclass
class SyntheticDataset:
    users: list
    posts: list
    profiles: list  # (id, username, profile_location)
    follows: list  # (follower, followee)
    verifier: MockVerifier
    margins: dict = field(default_factory=dict)

    def write(self, directory) -> dict:
        d = Path(directory)
        d.mkdir(parents=True, exist_ok=True)
        paths = {
            "users": d / "users.csv",
            "posts": d / "posts.jsonl",
            "profiles": d / "profiles.csv",
            "follows": d / "follows.csv",
            "verifier_fixture": d / "verifier_fixture.jsonl",
            "margins": d / "margins.csv",
        }
        write_users(self.users, paths["users"])
        write_posts(self.posts, paths["posts"])
        with paths["profiles"].open("w", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["id", "username", "profile_location"])
            w.writerows(self.profiles)
        with paths["follows"].open("w", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["follower", "followee"])
            w.writerows(self.follows)
        self.verifier.dump(paths["verifier_fixture"])
        with paths["margins"].open("w", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["state", "margin"])
            for st in sorted(self.margins):
                w.writerow([st, self.margins[st]])
        return {k: str(v) for k, v in paths.items()}


def synthetic_dataset(n_users: int = 800, n_posts: int = 10_000, repost_share: float = 0.3,
                      rumor_rate: float = 0.04, rng_seed: int = 2024) -> SyntheticDataset:
    rng = np.random.default_rng(rng_seed)
    states = load_state_table()
    codes = [c for c, _, _ in states]
    state_names = {c: n for c, n, _ in states}
    ids = [f"user{i:04d}" for i in range(n_users)]

    followers = np.floor(rng.lognormal(5.0, 1.8, size=n_users)).astype(int)
    home = [codes[int(rng.integers(len(codes)))] for _ in ids]
    users = [UserNode(u, int(f)) for u, f in zip(ids, followers)]

    # follow network with popularity bias
    pop = (followers + 1.0) / (followers + 1.0).sum()
    following = {}
    follows = []
    for i, u in enumerate(ids):
        k = min(int(rng.poisson(10)) + 1, n_users - 1)
        q = pop.copy()
        q[i] = 0.0
        q /= q.sum()
        picks = sorted(rng.choice(n_users, size=k, replace=False, p=q).tolist())
        following[u] = [ids[j] for j in picks]
        follows.extend((u, ids[j]) for j in picks)

    profiles = []
    for i, u in enumerate(ids):
        r = rng.random()
        loc = ""
        name = f"patriot{i}"
        if r < 0.30:
            loc = f"{state_names[home[i]]}"
        elif r < 0.34:
            name = f"{state_names[home[i]].lower().replace(' ', '_')}_patriot{i}"
        profiles.append((u, name, loc))

    n_reposts = int(n_posts * repost_share)
    n_orig = n_posts - n_reposts
    cats = list(RumorCategory)
    verifier = MockVerifier()
    posts = []
    activity = rng.pareto(1.2, size=n_users) + 1.0
    activity /= activity.sum()
    authors = rng.choice(n_users, size=n_orig, p=activity)
    times = np.sort(rng.integers(START, END, size=n_orig))
    for i in range(n_orig):
        a = ids[int(authors[i])]
        roll = rng.random()
        if roll < rumor_rate:
            cat = cats[int(rng.integers(len(cats)))]
            text = f"{RUMOR_TEMPLATES[cat]} #{i}"
            verifier.answers[content_hash(text)] = FixtureAnswer(True, cat, True)
        elif roll < rumor_rate + 0.03:
            text = f"{NEAR_MISS_TEMPLATES[int(rng.integers(len(NEAR_MISS_TEMPLATES)))]} #{i}"
            verifier.answers[content_hash(text)] = FixtureAnswer(bool(rng.random() < 0.4), None, False)
        else:
            text = f"{FILLER[int(rng.integers(len(FILLER)))]} #{i}"
            if rng.random() < 0.01:
                text = f"I live in {state_names[home[int(authors[i])]]} and {text}"
        posts.append(PostRecord(f"t{i:06d}", a, int(times[i]), text))

    rumorish = np.array([p.content.split(" #")[0] in RUMOR_TEMPLATES.values() for p in posts])
    by_author: dict[str, list[int]] = {}
    for j, p in enumerate(posts):
        by_author.setdefault(p.author, []).append(j)

    made = 0
    attempts = 0
    while made < n_reposts and attempts < n_reposts * 20:
        u = ids[int(rng.choice(n_users, p=activity))]
        attempts += 1
        pool = [j for v in following[u] for j in by_author.get(v, ())]
        if not pool:
            continue
        w = np.array([40.0 if (j < len(rumorish) and rumorish[j]) else 1.0 for j in pool])
        j = pool[int(rng.choice(len(pool), p=w / w.sum()))]
        src = posts[j]
        t = min(END, src.timestamp + 1 + int(rng.exponential(3 * 3600)))
        new = PostRecord(f"r{made:06d}", u, t, src.content, repost_of=src.post_id)
        posts.append(new)
        by_author.setdefault(u, []).append(len(posts) - 1)
        rumorish = np.append(rumorish, rumorish[j] if j < len(rumorish) else False)
        made += 1

    margins = {c: round(float(rng.normal(5.0, 15.0)), 1) for c in codes}
    return SyntheticDataset(users, posts, profiles, follows, verifier, margins)


def write_json(obj, path) -> None:
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n", encoding="utf-8")
