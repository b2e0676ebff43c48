"""Post/user datasets: parsing, serialization, rumor taxonomy and graph building.

Post JSONL schema (one object per line, unknown fields ignored)::

    {"post_id": str, "author": str, "timestamp": int | float | ISO-8601 str,
     "content": str, "repost_of": str?, "rumor_label": bool?, "rumor_category": str?}

Post CSV columns, in order: post_id, author, timestamp, content, repost_of,
rumor_label, rumor_category. Empty cells mean absent.

User CSV columns, in order: id, follower_count, state, geo_confidence.
"""
from __future__ import annotations

import csv
import enum
import json
import logging
import math
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable, NamedTuple, Optional, Sequence

from .errors import FormatError, MissingNodeError
from .graph import InformationGraph, Role, UserNode

log = logging.getLogger(__name__)

POST_FIELDS = ("post_id", "author", "timestamp", "content", "repost_of", "rumor_label", "rumor_category")
USER_FIELDS = ("id", "follower_count", "state", "geo_confidence")


class RumorCategory(str, enum.Enum):
    DIRTY_VOTER_ROLLS = "DirtyVoterRolls"
    BALLOT_MAIL_IN_FRAUD = "BallotMailInFraud"
    DROP_BOX_TAMPERING = "DropBoxTampering"
    SOFTWARE_SECURITY = "SoftwareSecurity"
    DEAD_VOTERS = "DeadVoters"

    @classmethod
    def parse(cls, value) -> "RumorCategory":
        if isinstance(value, cls):
            return value
        key = "".join(ch for ch in str(value) if ch.isalnum()).lower()
        for cat in cls:
            if cat.value.lower() == key or cat.name.replace("_", "").lower() == key:
                return cat
        raise ValueError(f"unknown rumor category {value!r}")

    @property
    def description(self) -> str:
        return RUMOR_DESCRIPTIONS[self]


# CISA "Rumor vs. Reality" claims, one per category.
RUMOR_DESCRIPTIONS = {
    RumorCategory.DIRTY_VOTER_ROLLS: (
        "Election officials don't clean the voter rolls. The voter rolls are inaccurate and not updated."
    ),
    RumorCategory.BALLOT_MAIL_IN_FRAUD: (
        "People can easily violate the mail-in/absentee ballot request process to receive and cast "
        "unauthorized ballots, or prevent authorized in-person voting."
    ),
    RumorCategory.DROP_BOX_TAMPERING: (
        "Drop boxes used to collect mail-in/absentee ballots can be easily tampered with, stolen, or destroyed."
    ),
    RumorCategory.SOFTWARE_SECURITY: (
        "Voting system software is not reviewed or tested and can be easily manipulated."
    ),
    RumorCategory.DEAD_VOTERS: (
        "Votes are being cast on behalf of dead people and these votes are being counted."
    ),
}


@dataclass(frozen=True)
class PostRecord:
    post_id: str
    author: str
    timestamp: int
    content: str = ""
    repost_of: Optional[str] = None
    rumor_label: Optional[bool] = None
    rumor_category: Optional[RumorCategory] = None

    def __post_init__(self):
        if not self.post_id:
            raise ValueError("post_id must be non-empty")
        if not self.author:
            raise ValueError("author must be non-empty")
        if self.timestamp <= 0:
            raise ValueError(f"timestamp must be positive, got {self.timestamp}")
        if self.repost_of is not None and self.repost_of == self.post_id:
            raise ValueError(f"post {self.post_id!r} reposts itself")
        if self.rumor_category is not None and self.rumor_label is not True:
            raise ValueError(f"post {self.post_id!r} has a rumor_category without rumor_label=true")

    @property
    def is_repost(self) -> bool:
        return self.repost_of is not None

    def to_dict(self) -> dict:
        d = {
            "post_id": self.post_id,
            "author": self.author,
            "timestamp": self.timestamp,
            "content": self.content,
        }
        if self.repost_of is not None:
            d["repost_of"] = self.repost_of
        if self.rumor_label is not None:
            d["rumor_label"] = self.rumor_label
        if self.rumor_category is not None:
            d["rumor_category"] = self.rumor_category.value
        return d


@dataclass(frozen=True)
class Reject:
    line_no: int
    reason: str


class LoadResult(NamedTuple):
    records: list
    rejects: list


@dataclass(frozen=True)
class DatasetSummary:
    user_count: int
    truth_count: int
    retruth_count: int
    rumor_truth_count: int
    rumor_retruth_count: int
    retruth_ratio: Optional[float]
    rumor_retruth_ratio: Optional[float]

    def to_dict(self) -> dict:
        return dict(self.__dict__)


# -- field parsing -----------------------------------------------------------


def parse_timestamp(value) -> int:
    """UTC seconds since epoch, sub-second precision truncated."""
    if isinstance(value, bool) or value is None:
        raise ValueError(f"bad timestamp {value!r}")
    if isinstance(value, (int, float)):
        if not math.isfinite(value):
            raise ValueError(f"bad timestamp {value!r}")
        ts = int(value)
    else:
        text = str(value).strip()
        try:
            ts = int(float(text))
        except ValueError:
            dt = datetime.fromisoformat(text.replace("Z", "+00:00"))
            if dt.tzinfo is None:
                dt = dt.replace(tzinfo=timezone.utc)
            ts = int(dt.timestamp())
    if ts <= 0:
        raise ValueError(f"timestamp must be positive, got {value!r}")
    return ts


def _parse_bool(value) -> Optional[bool]:
    if value is None or value == "":
        return None
    if isinstance(value, bool):
        return value
    text = str(value).strip().lower()
    if text in ("true", "1", "yes", "t"):
        return True
    if text in ("false", "0", "no", "f"):
        return False
    raise ValueError(f"bad boolean {value!r}")


def _opt_str(value) -> Optional[str]:
    if value is None:
        return None
    text = str(value)
    return text if text != "" else None


def post_from_mapping(row: dict) -> PostRecord:
    for key in ("post_id", "author", "timestamp"):
        if row.get(key) in (None, ""):
            raise ValueError(f"missing {key}")
    category = _opt_str(row.get("rumor_category"))
    content = row.get("content")
    return PostRecord(
        post_id=str(row["post_id"]),
        author=str(row["author"]),
        timestamp=parse_timestamp(row["timestamp"]),
        content="" if content is None else str(content),
        repost_of=_opt_str(row.get("repost_of")),
        rumor_label=_parse_bool(row.get("rumor_label")),
        rumor_category=RumorCategory.parse(category) if category is not None else None,
    )


# -- files -------------------------------------------------------------------


def _detect_format(path: Path, fmt: Optional[str]) -> str:
    if fmt:
        fmt = fmt.lower()
    elif path.suffix.lower() == ".csv":
        fmt = "csv"
    else:
        fmt = "jsonl"
    if fmt not in ("jsonl", "csv"):
        raise FormatError(f"unsupported post format {fmt!r}")
    return fmt


def load_posts(path, fmt: Optional[str] = None) -> LoadResult:
    """Read posts from a JSONL or CSV file.

    Malformed rows (and duplicate post ids) go to ``rejects`` with their
    1-based line number. More than half of the rows being malformed raises
    :class:`FormatError`. Unreadable files raise ``OSError``.
    """
    path = Path(path)
    fmt = _detect_format(path, fmt)
    records: list[PostRecord] = []
    rejects: list[Reject] = []
    seen: set[str] = set()
    total = 0

    def accept(line_no, row):
        try:
            if not isinstance(row, dict):
                raise ValueError("row is not an object")
            post = post_from_mapping(row)
            if post.post_id in seen:
                raise ValueError(f"duplicate post_id {post.post_id!r}")
        except (ValueError, TypeError) as exc:
            rejects.append(Reject(line_no, str(exc)))
            return
        seen.add(post.post_id)
        records.append(post)

    with path.open("r", encoding="utf-8", newline="") as fh:
        if fmt == "jsonl":
            for line_no, line in enumerate(fh, start=1):
                if not line.strip():
                    continue
                total += 1
                try:
                    row = json.loads(line)
                except json.JSONDecodeError as exc:
                    rejects.append(Reject(line_no, f"invalid JSON: {exc.msg}"))
                    continue
                accept(line_no, row)
        else:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header is None:
                return LoadResult(records, rejects)
            columns = [h.strip() for h in header]
            if "post_id" not in columns:
                columns = list(POST_FIELDS)
                fh.seek(0)
                reader = csv.reader(fh)
            for row in reader:
                if not row:
                    continue
                total += 1
                accept(reader.line_num, dict(zip(columns, row)))

    if total and len(rejects) * 2 > total:
        raise FormatError(f"{path}: {len(rejects)} of {total} rows malformed")
    return LoadResult(records, rejects)


def write_posts(posts: Iterable[PostRecord], path) -> None:
    """Canonical JSONL: fixed key order, absent optionals omitted."""
    with Path(path).open("w", encoding="utf-8", newline="\n") as fh:
        for post in posts:
            fh.write(json.dumps(post.to_dict(), ensure_ascii=False))
            fh.write("\n")


def write_rejects(rejects: Iterable[Reject], path) -> None:
    with Path(path).open("w", encoding="utf-8", newline="\n") as fh:
        for r in rejects:
            fh.write(json.dumps({"line_no": r.line_no, "reason": r.reason}) + "\n")


def load_users(path) -> list[UserNode]:
    users = []
    with Path(path).open("r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        for line_no, row in enumerate(reader, start=2):
            try:
                state = _opt_str(row.get("state"))
                conf = _opt_str(row.get("geo_confidence"))
                users.append(
                    UserNode(
                        id=str(row["id"]),
                        follower_count=int(row.get("follower_count") or 0),
                        state=state,
                        geo_confidence=float(conf) if conf is not None else (1.0 if state else None),
                    )
                )
            except (KeyError, ValueError, TypeError) as exc:
                raise FormatError(f"{path}:{line_no}: {exc}") from None
    return users


def write_users(users: Iterable[UserNode], path) -> None:
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(USER_FIELDS)
        for u in users:
            w.writerow([
                u.id,
                u.follower_count,
                u.state or "",
                "" if u.geo_confidence is None else repr(float(u.geo_confidence)),
            ])


# -- post indexing -----------------------------------------------------------


class PostIndex:
    """Lookup tables over a post list: by id, by author, and repost chains."""

    def __init__(self, posts: Sequence[PostRecord]):
        self.posts = list(posts)
        self.by_id = {p.post_id: p for p in self.posts}
        self._root_cache: dict[str, Optional[str]] = {}
        self.reposts_of_root: dict[str, list[PostRecord]] = {}
        for p in self.posts:
            if p.repost_of is not None:
                root = self.root_id(p.post_id)
                if root is not None:
                    self.reposts_of_root.setdefault(root, []).append(p)

    def root_id(self, post_id: str) -> Optional[str]:
        """Id of the original post at the end of the repost chain, or None when
        the chain leaves the dataset (or cycles)."""
        if post_id in self._root_cache:
            return self._root_cache[post_id]
        chain = []
        current = post_id
        seen = set()
        root = None
        while True:
            if current in self._root_cache:
                root = self._root_cache[current]
                break
            post = self.by_id.get(current)
            if post is None or current in seen:
                root = None
                break
            seen.add(current)
            chain.append(current)
            if post.repost_of is None:
                root = current
                break
            current = post.repost_of
        for pid in chain:
            self._root_cache[pid] = root
        return root

    def root(self, post: PostRecord) -> Optional[PostRecord]:
        rid = self.root_id(post.post_id)
        return self.by_id.get(rid) if rid is not None else None

    def effective_label(self, post: PostRecord) -> tuple[Optional[bool], Optional[RumorCategory]]:
        """A repost without its own label inherits the label of its root."""
        if post.rumor_label is not None or post.repost_of is None:
            return post.rumor_label, post.rumor_category
        root = self.root(post)
        if root is None:
            return None, None
        return root.rumor_label, root.rumor_category


def as_index(posts) -> PostIndex:
    return posts if isinstance(posts, PostIndex) else PostIndex(posts)


def propagate_labels(posts: Sequence[PostRecord]) -> list[PostRecord]:
    """Copy root labels onto unlabeled reposts."""
    from dataclasses import replace

    index = PostIndex(posts)
    out = []
    for p in posts:
        if p.repost_of is not None and p.rumor_label is None:
            label, cat = index.effective_label(p)
            if label is not None:
                p = replace(p, rumor_label=label, rumor_category=cat)
        out.append(p)
    return out


# -- graph and summary -------------------------------------------------------


def build_graph(posts: Sequence[PostRecord], users: Iterable[UserNode], rumor_only: bool = False) -> InformationGraph:
    """Information graph from repost records.

    A repost by u of a post whose chain starts at author v adds ``v -> u``;
    when u reposted another user's repost, the intermediate resharer w also
    gets ``w -> u``. Self-impressions are skipped. Authors of original rumor
    posts become Seeds, users with only rumor reposts become Spreaders.
    """
    graph = InformationGraph()
    for u in users:
        graph.add_user(UserNode(u.id, u.follower_count, Role.ORDINARY, u.state, u.geo_confidence))
    ordered = sorted(posts, key=lambda p: (p.timestamp, p.post_id))
    for p in ordered:
        if p.author not in graph:
            raise MissingNodeError(f"post {p.post_id!r}: author {p.author!r} not in users")
    index = PostIndex(ordered)

    seeds, spreaders = set(), set()
    for p in ordered:
        label, _ = index.effective_label(p)
        if label:
            (spreaders if p.is_repost else seeds).add(p.author)
        if not p.is_repost:
            continue
        root = index.root(p)
        if root is None:
            continue
        if rumor_only and not label:
            continue
        sources = [root.author]
        parent = index.by_id[p.repost_of]
        if parent.is_repost and parent.author not in sources:
            sources.append(parent.author)
        for v in sources:
            if v != p.author:
                graph.add_edge(v, p.author, 1)

    for uid in seeds:
        graph.set_role(uid, Role.SEED)
    for uid in spreaders - seeds:
        graph.set_role(uid, Role.SPREADER)
    return graph


def dataset_summary(posts: Sequence[PostRecord], user_count: Optional[int] = None) -> DatasetSummary:
    truths = retruths = rumor_truths = rumor_retruths = 0
    authors = set()
    index = PostIndex(posts)
    for p in posts:
        authors.add(p.author)
        label, _ = index.effective_label(p)
        if p.is_repost:
            retruths += 1
            rumor_retruths += bool(label)
        else:
            truths += 1
            rumor_truths += bool(label)
    return summary_from_counts(
        truths, retruths, rumor_truths, rumor_retruths,
        user_count=len(authors) if user_count is None else user_count,
    )


def summary_from_counts(truths: int, retruths: int, rumor_truths: int, rumor_retruths: int, user_count: int = 0) -> DatasetSummary:
    return DatasetSummary(
        user_count=user_count,
        truth_count=truths,
        retruth_count=retruths,
        rumor_truth_count=rumor_truths,
        rumor_retruth_count=rumor_retruths,
        retruth_ratio=retruths / truths if truths else None,
        rumor_retruth_ratio=rumor_retruths / rumor_truths if rumor_truths else None,
    )
