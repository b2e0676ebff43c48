"""Rumor Detection Agent funnel and validation metrics.

Stages: a coarse scorer and a keyword filter run in parallel; a post that
clears either one becomes a candidate and is sent to a two-pass verifier.
Only posts affirmed by both verifier passes are labeled as rumors.
"""
from __future__ import annotations

import enum
import hashlib
import json
import logging
import re
import time
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Callable, Iterable, Mapping, Optional, Protocol, Sequence

from .errors import EmptyInputError, FormatError, ProviderError, RangeError
from .ingest import RUMOR_DESCRIPTIONS, PostRecord, RumorCategory

log = logging.getLogger(__name__)

DEFAULT_TAU = 0.5

_WS = re.compile(r"\s+")


def normalize_text(text: str) -> str:
    return _WS.sub(" ", text).strip().lower()


class KeywordIndex:
    """Category -> lowercase keyword phrases, matched on word boundaries."""

    def __init__(self, phrases: Mapping[RumorCategory, Iterable[str]]):
        self.phrases: dict[RumorCategory, tuple[str, ...]] = {}
        for cat in RumorCategory:
            seen = []
            for phrase in phrases.get(cat, ()):
                phrase = normalize_text(phrase)
                if phrase and phrase not in seen:
                    seen.append(phrase)
            if not seen:
                raise FormatError(f"keyword index has no phrases for {cat.value}")
            self.phrases[cat] = tuple(seen)
        self._patterns = {
            cat: re.compile(
                r"(?<!\w)(?:" + "|".join(re.escape(p) for p in sorted(ps, key=len, reverse=True)) + r")(?!\w)"
            )
            for cat, ps in self.phrases.items()
        }

    @classmethod
    def load(cls, path=None) -> "KeywordIndex":
        """Parse ``[Category]`` sections with one phrase per line; ``#`` starts a comment.

        With no path, the bundled starter list is used.
        """
        if path is None:
            text = resources.files("rumornet.data").joinpath("keywords.txt").read_text(encoding="utf-8")
        else:
            text = Path(path).read_text(encoding="utf-8")
        return cls.parse(text)

    @classmethod
    def parse(cls, text: str) -> "KeywordIndex":
        phrases: dict[RumorCategory, list[str]] = {}
        current = None
        for line_no, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if line.startswith("[") and line.endswith("]"):
                try:
                    current = RumorCategory.parse(line[1:-1])
                except ValueError as exc:
                    raise FormatError(f"line {line_no}: {exc}") from None
                phrases.setdefault(current, [])
                continue
            if current is None:
                raise FormatError(f"line {line_no}: phrase outside any [Category] section")
            phrases[current].append(line)
        return cls(phrases)

    def matches(self, content: str) -> dict[RumorCategory, list[str]]:
        text = normalize_text(content)
        found = {}
        for cat, pat in self._patterns.items():
            hits = pat.findall(text)
            if hits:
                found[cat] = hits
        return found


def keyword_filter(post: PostRecord, index: KeywordIndex) -> set[RumorCategory]:
    return set(index.matches(post.content))


class CoarseScorer(Protocol):
    def score(self, content: str) -> float: ...


class KeywordDensityScorer:
    """Matched keyword characters over content length, clipped to [0, 1]."""

    def __init__(self, index: KeywordIndex):
        self.index = index

    def score(self, content: str) -> float:
        text = normalize_text(content)
        if not text:
            return 0.0
        matched = sum(len(h) for hits in self.index.matches(text).values() for h in hits)
        return min(1.0, matched / len(text))


@dataclass(frozen=True)
class Pass1Answer:
    is_rumor: bool
    category: Optional[RumorCategory] = None


class VerifierProvider(Protocol):
    def verify_pass1(self, content: str, rumor_descriptions: Mapping[RumorCategory, str]) -> Pass1Answer: ...

    def verify_pass2(self, content: str, category_description: str) -> bool: ...


def content_hash(content: str) -> str:
    return hashlib.sha256(content.encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class FixtureAnswer:
    pass1: bool
    category: Optional[RumorCategory] = None
    pass2: bool = False


class MockVerifier:
    """Deterministic verifier answering from a fixture keyed on content hash.

    Unknown content gets ``default`` (pass 1 negative unless configured).
    ``failures`` maps a content hash to the number of calls that raise
    :class:`ProviderError` before the fixture answer is returned. Every call is
    appended to ``calls`` as ``(pass_no, content_hash)``.
    """

    concurrency_safe = True

    def __init__(self, answers: Optional[Mapping[str, FixtureAnswer]] = None,
                 default: FixtureAnswer = FixtureAnswer(False),
                 failures: Optional[Mapping[str, int]] = None):
        self.answers = dict(answers or {})
        self.default = default
        self.failures = dict(failures or {})
        self.calls: list[tuple[int, str]] = []

    @classmethod
    def load(cls, path, **kwargs) -> "MockVerifier":
        """Fixture file: JSONL of ``{content_hash, pass1, category, pass2}``."""
        answers = {}
        with Path(path).open("r", encoding="utf-8") as fh:
            for line_no, line in enumerate(fh, start=1):
                if not line.strip():
                    continue
                try:
                    row = json.loads(line)
                    cat = row.get("category")
                    answers[row["content_hash"]] = FixtureAnswer(
                        bool(row["pass1"]),
                        RumorCategory.parse(cat) if cat else None,
                        bool(row.get("pass2", False)),
                    )
                except (KeyError, ValueError, TypeError) as exc:
                    raise FormatError(f"{path}:{line_no}: {exc}") from None
        return cls(answers, **kwargs)

    def dump(self, path) -> None:
        with Path(path).open("w", encoding="utf-8", newline="\n") as fh:
            for h in sorted(self.answers):
                a = self.answers[h]
                fh.write(json.dumps({
                    "content_hash": h,
                    "pass1": a.pass1,
                    "category": a.category.value if a.category else None,
                    "pass2": a.pass2,
                }) + "\n")

    def _answer(self, pass_no: int, content: str) -> FixtureAnswer:
        h = content_hash(content)
        self.calls.append((pass_no, h))
        if self.failures.get(h, 0) > 0:
            self.failures[h] -= 1
            raise ProviderError(f"mock provider failure for {h[:12]}")
        return self.answers.get(h, self.default)

    def verify_pass1(self, content, rumor_descriptions):
        a = self._answer(1, content)
        return Pass1Answer(a.pass1, a.category if a.pass1 else None)

    def verify_pass2(self, content, category_description):
        return self._answer(2, content).pass2


class Stage(str, enum.Enum):
    FILTERED_OUT = "FilteredOut"
    REJECTED_PASS1 = "VerifierRejectedPass1"
    REJECTED_PASS2 = "VerifierRejectedPass2"
    LABELED_RUMOR = "LabeledRumor"


@dataclass(frozen=True)
class ClassificationResult:
    post_id: str
    stage_reached: Stage
    category: Optional[RumorCategory]
    coarse_score: float
    keyword_hit: bool

    @property
    def is_candidate(self) -> bool:
        return self.stage_reached is not Stage.FILTERED_OUT

    def to_dict(self) -> dict:
        return {
            "post_id": self.post_id,
            "stage_reached": self.stage_reached.value,
            "category": self.category.value if self.category else None,
            "coarse_score": round(self.coarse_score, 6),
            "keyword_hit": self.keyword_hit,
        }


def classify_post(post: PostRecord, scorer: CoarseScorer, index: KeywordIndex,
                  verifier: VerifierProvider, tau: float = DEFAULT_TAU) -> ClassificationResult:
    if not 0.0 <= tau <= 1.0:
        raise RangeError(f"tau must be in [0, 1], got {tau}")
    score = float(scorer.score(post.content))
    hits = keyword_filter(post, index)
    if score < tau and not hits:
        return ClassificationResult(post.post_id, Stage.FILTERED_OUT, None, score, False)

    def rejected(stage):
        return ClassificationResult(post.post_id, stage, None, score, bool(hits))

    try:
        first = verifier.verify_pass1(post.content, RUMOR_DESCRIPTIONS)
        if not first.is_rumor:
            return rejected(Stage.REJECTED_PASS1)
        category = first.category
        if category is None and hits:
            category = min(hits, key=lambda c: list(RumorCategory).index(c))
        if category is None:
            # a rumor that maps to no known category cannot be confirmed
            return rejected(Stage.REJECTED_PASS1)
        if not verifier.verify_pass2(post.content, category.description):
            return rejected(Stage.REJECTED_PASS2)
    except ProviderError as exc:
        raise ProviderError(str(exc), post_id=post.post_id) from exc
    except Exception as exc:
        raise ProviderError(f"verifier failed: {exc}", post_id=post.post_id) from exc
    return ClassificationResult(post.post_id, Stage.LABELED_RUMOR, category, score, bool(hits))


@dataclass
class BatchOutcome:
    results: list
    dead_letters: list  # post ids that exhausted their retries


def classify_batch(posts: Sequence[PostRecord], scorer: CoarseScorer, index: KeywordIndex,
                   verifier: VerifierProvider, tau: float = DEFAULT_TAU, attempts: int = 3,
                   backoff: float = 0.05, sleep: Callable[[float], None] = time.sleep,
                   dead_letter_path=None) -> BatchOutcome:
    """Classify every post, retrying provider errors with exponential backoff.

    Posts still failing after ``attempts`` tries are parked (and appended to
    ``dead_letter_path`` when given); they never receive a label. Results are
    returned in post_id order.
    """
    results, dead = [], []
    for post in sorted(posts, key=lambda p: p.post_id):
        for attempt in range(attempts):
            try:
                results.append(classify_post(post, scorer, index, verifier, tau))
                break
            except ProviderError as exc:
                if attempt + 1 == attempts:
                    log.warning("post %s parked after %d attempts: %s", post.post_id, attempts, exc)
                    dead.append(post.post_id)
                else:
                    sleep(backoff * (2 ** attempt))
    if dead_letter_path is not None and dead:
        with Path(dead_letter_path).open("a", encoding="utf-8") as fh:
            for pid in dead:
                fh.write(json.dumps({"post_id": pid}) + "\n")
    return BatchOutcome(results, dead)


def apply_labels(posts: Sequence[PostRecord], results: Iterable[ClassificationResult]) -> list[PostRecord]:
    """Return posts with rumor_label/category set from classification results."""
    from dataclasses import replace

    by_id = {r.post_id: r for r in results}
    out = []
    for p in posts:
        r = by_id.get(p.post_id)
        if r is not None:
            labeled = r.stage_reached is Stage.LABELED_RUMOR
            p = replace(p, rumor_label=labeled, rumor_category=r.category if labeled else None)
        out.append(p)
    return out


def write_results(results: Iterable[ClassificationResult], path) -> None:
    with Path(path).open("w", encoding="utf-8", newline="\n") as fh:
        for r in results:
            fh.write(json.dumps(r.to_dict()) + "\n")


def funnel_stats(results: Sequence[ClassificationResult]) -> dict:
    if not results:
        raise EmptyInputError("funnel_stats needs at least one result")
    candidates = sum(1 for r in results if r.is_candidate)
    frac = candidates / len(results)
    return {"candidate_fraction": frac, "verifier_call_reduction": 1.0 - frac}


# -- validation metrics ------------------------------------------------------


def _ratio(num, den):
    return num / den if den else None


@dataclass(frozen=True)
class ConfusionMetrics:
    """Binary validation statistics. Ratios with a zero denominator are None.

    ``fdr`` is FP/(TP+FP); the "false positive rate" of the original
    validation table is this quantity. ``standard_fpr`` is FP/(FP+TN).
    """

    tp: int
    fp: int
    tn: int
    fn: int
    accuracy: Optional[float]
    precision: Optional[float]
    recall: Optional[float]
    f1: Optional[float]
    fdr: Optional[float]
    standard_fpr: Optional[float]
    fnr: Optional[float]

    @property
    def specificity(self) -> Optional[float]:
        return _ratio(self.tn, self.tn + self.fp)

    def to_dict(self) -> dict:
        d = dict(self.__dict__)
        d["specificity"] = self.specificity
        return d


def confusion_metrics(tp: int, fp: int, tn: int, fn: int) -> ConfusionMetrics:
    counts = (tp, fp, tn, fn)
    if any(int(c) != c or c < 0 for c in counts):
        raise RangeError(f"confusion counts must be non-negative integers, got {counts}")
    total = tp + fp + tn + fn
    if total == 0:
        raise EmptyInputError("confusion matrix is empty")
    precision = _ratio(tp, tp + fp)
    recall = _ratio(tp, tp + fn)
    if precision is None or recall is None or precision + recall == 0:
        f1 = None
    else:
        f1 = 2 * precision * recall / (precision + recall)
    return ConfusionMetrics(
        tp, fp, tn, fn,
        accuracy=(tp + tn) / total,
        precision=precision,
        recall=recall,
        f1=f1,
        fdr=_ratio(fp, tp + fp),
        standard_fpr=_ratio(fp, fp + tn),
        fnr=_ratio(fn, fn + tp),
    )


def prevalence_adjusted_ppv(sensitivity: float, specificity: float, prevalence: float) -> Optional[float]:
    """Positive predictive value at a given prevalence (Bayes' rule)."""
    for name, v in (("sensitivity", sensitivity), ("specificity", specificity), ("prevalence", prevalence)):
        if not 0.0 <= v <= 1.0:
            raise RangeError(f"{name} must be in [0, 1], got {v}")
    true_pos = sensitivity * prevalence
    den = true_pos + (1.0 - specificity) * (1.0 - prevalence)
    return true_pos / den if den > 0 else None
