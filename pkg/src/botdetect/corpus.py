"""Corpus ingestion, synthetic corpus generation, and group-aware splitting.

Comments are grouped by their author account; no split or fold ever places
comments of one account on both sides of a partition.
"""

from __future__ import annotations

import csv
import json
import random
from collections import defaultdict
from dataclasses import dataclass, field

from botdetect.errors import (
    DuplicateCommentId,
    MalformedRecord,
    TooFewGroups,
    UnknownLabel,
)

BOT = "bot"
HUMAN = "human"
LABELS = (BOT, HUMAN)
SOURCES = ("pull_request", "issue")


@dataclass(frozen=True)
class LabeledComment:
    """One PR/issue comment. ``label`` is None for unlabeled prediction input."""

    comment_id: str
    account_id: str
    label: str | None
    text: str
    source: str = "issue"
    created_at: str | None = None


@dataclass(frozen=True)
class Corpus:
    comments: tuple[LabeledComment, ...]
    accounts: dict[str, list[int]] = field(compare=False, default=None)

    def __post_init__(self):
        if self.accounts is None:
            index: dict[str, list[int]] = defaultdict(list)
            for i, c in enumerate(self.comments):
                index[c.account_id].append(i)
            object.__setattr__(self, "accounts", dict(index))

    def __len__(self) -> int:
        return len(self.comments)

    def label_counts(self) -> dict[str, int]:
        counts = {BOT: 0, HUMAN: 0}
        for c in self.comments:
            if c.label is not None:
                counts[c.label] += 1
        return counts

    def subset(self, indices) -> "Corpus":
        return Corpus(tuple(self.comments[i] for i in indices))


@dataclass(frozen=True)
class SplitResult:
    train: Corpus
    test: Corpus
    seed: int
    target_train_fraction: float


def make_corpus(comments) -> Corpus:
    """Build a Corpus, enforcing comment_id uniqueness."""
    seen = set()
    for c in comments:
        if c.comment_id in seen:
            raise DuplicateCommentId(c.comment_id)
        seen.add(c.comment_id)
    return Corpus(tuple(comments))


_REQUIRED_FIELDS = ("comment_id", "account_id", "text")


def _parse_record(rec: dict, line_no: int, require_label: bool) -> LabeledComment:
    for f in _REQUIRED_FIELDS:
        if rec.get(f) is None:
            raise MalformedRecord(line_no, f"missing field {f!r}")
    raw_label = rec.get("label")
    if raw_label is None:
        if require_label:
            raise MalformedRecord(line_no, "missing field 'label'")
        label = None
    else:
        label = str(raw_label).strip().lower()
        if label not in LABELS:
            raise UnknownLabel(raw_label, line_no)
    source = rec.get("source") or "issue"
    if source not in SOURCES:
        raise MalformedRecord(line_no, f"unknown source {source!r}")
    created = rec.get("created_at") or None
    return LabeledComment(
        comment_id=str(rec["comment_id"]),
        account_id=str(rec["account_id"]),
        label=label,
        text=str(rec["text"]),
        source=source,
        created_at=created,
    )


def load_corpus(path, format: str | None = None, require_label: bool = True) -> Corpus:
    """Load a corpus from a JSONL or CSV file.

    ``format`` is inferred from the extension when omitted. With
    ``require_label=False`` records may omit the label (prediction input).
    """
    fmt = format
    if fmt is None:
        fmt = "csv" if str(path).endswith(".csv") else "jsonl"
    comments: list[LabeledComment] = []
    seen: dict[str, int] = {}
    with open(path, encoding="utf-8", newline="") as fh:
        if fmt == "jsonl":
            for line_no, line in enumerate(fh, start=1):
                if not line.strip():
                    continue
                try:
                    rec = json.loads(line)
                except json.JSONDecodeError as exc:
                    raise MalformedRecord(line_no, f"invalid JSON: {exc.msg}") from exc
                if not isinstance(rec, dict):
                    raise MalformedRecord(line_no, "record is not a JSON object")
                comments.append(_parse_record(rec, line_no, require_label))
                _check_dup(comments[-1], seen, line_no)
        elif fmt == "csv":
            reader = csv.DictReader(fh)
            for line_no, row in enumerate(reader, start=2):
                rec = {k: (v if v != "" else None) for k, v in row.items() if k is not None}
                comments.append(_parse_record(rec, line_no, require_label))
                _check_dup(comments[-1], seen, line_no)
        else:
            raise ValueError(f"unknown corpus format {fmt!r}")
    return Corpus(tuple(comments))


def _check_dup(comment: LabeledComment, seen: dict, line_no: int) -> None:
    if comment.comment_id in seen:
        raise DuplicateCommentId(comment.comment_id, line_no)
    seen[comment.comment_id] = line_no


def comment_to_dict(c: LabeledComment) -> dict:
    rec = {
        "comment_id": c.comment_id,
        "account_id": c.account_id,
        "text": c.text,
        "source": c.source,
    }
    if c.label is not None:
        rec["label"] = c.label
    if c.created_at is not None:
        rec["created_at"] = c.created_at
    return rec


def save_corpus_jsonl(corpus: Corpus, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for c in corpus.comments:
            fh.write(json.dumps(comment_to_dict(c), sort_keys=True) + "\n")


# --- group-aware partitioning ---

def _account_stats(corpus: Corpus):
    """Per-account (size, per-class counts), plus per-class totals."""
    stats = {}
    totals = defaultdict(int)
    for aid, idxs in corpus.accounts.items():
        per_class = defaultdict(int)
        for i in idxs:
            label = corpus.comments[i].label
            per_class[label] += 1
            totals[label] += 1
        stats[aid] = (len(idxs), dict(per_class))
    return stats, dict(totals)


def _greedy_assign(corpus: Corpus, targets: list[float], seed: int) -> dict[str, int]:
    """Assign each account to one of len(targets) parts.

    Accounts are visited largest-first (seeded shuffle among equal sizes);
    each goes to the part minimizing the summed squared deviation of per-class
    comment proportions from the part targets, ties to the lowest part index.
    """
    stats, totals = _account_stats(corpus)
    classes = sorted(totals)
    rng = random.Random(seed)

    by_size: dict[int, list[str]] = defaultdict(list)
    for aid in sorted(stats):
        by_size[stats[aid][0]].append(aid)
    order: list[str] = []
    for size in sorted(by_size, reverse=True):
        bucket = by_size[size]
        rng.shuffle(bucket)
        order.extend(bucket)

    n_parts = len(targets)
    counts = [defaultdict(int) for _ in range(n_parts)]
    assignment: dict[str, int] = {}
    for aid in order:
        _, per_class = stats[aid]
        best_part, best_cost = 0, None
        for p in range(n_parts):
            cost = 0.0
            for cl in classes:
                total = totals[cl]
                if total == 0:
                    continue
                for q in range(n_parts):
                    have = counts[q][cl] + (per_class.get(cl, 0) if q == p else 0)
                    cost += (have / total - targets[q]) ** 2
            if best_cost is None or cost < best_cost:
                best_part, best_cost = p, cost
        assignment[aid] = best_part
        for cl, n in stats[aid][1].items():
            counts[best_part][cl] += n
    return assignment


def group_train_test_split(
    corpus: Corpus, target_train_fraction: float, seed: int
) -> SplitResult:
    """Account-disjoint, class-stratified train/test split."""
    if not 0 < target_train_fraction < 1:
        raise ValueError("target_train_fraction must be in (0, 1)")
    if len(corpus.accounts) < 2:
        raise TooFewGroups("need at least 2 accounts to split")
    assignment = _greedy_assign(
        corpus, [target_train_fraction, 1.0 - target_train_fraction], seed
    )
    train_idx = [
        i for i, c in enumerate(corpus.comments) if assignment[c.account_id] == 0
    ]
    test_idx = [
        i for i, c in enumerate(corpus.comments) if assignment[c.account_id] == 1
    ]
    return SplitResult(
        train=corpus.subset(train_idx),
        test=corpus.subset(test_idx),
        seed=seed,
        target_train_fraction=target_train_fraction,
    )


def stratified_group_kfold(
    corpus: Corpus, k: int, seed: int
) -> list[tuple[Corpus, Corpus]]:
    """k (train, validation) pairs; validation parts partition the corpus."""
    if k < 2:
        raise ValueError("k must be >= 2")
    if len(corpus.accounts) < k:
        raise TooFewGroups(f"need at least {k} accounts for {k} folds")
    assignment = _greedy_assign(corpus, [1.0 / k] * k, seed)
    folds = []
    for p in range(k):
        val_idx = [
            i for i, c in enumerate(corpus.comments) if assignment[c.account_id] == p
        ]
        train_idx = [
            i for i, c in enumerate(corpus.comments) if assignment[c.account_id] != p
        ]
        folds.append((corpus.subset(train_idx), corpus.subset(val_idx)))
    return folds


# --- synthetic corpora for desk-scale testing ---

_BOT_TEMPLATES = (
    "build {a} passed after {b} seconds",
    "build {a} failed with exit status {b}",
    "coverage report generated for commit {a} total {b} percent",
    "merging pull request {a} automatically checks green",
    "bump dependency version {a} to {b} scheduled update",
    "deployment pipeline {a} finished status success artifact {b}",
    "stale branch {a} closed automatically after {b} days inactivity",
)

_BOT_WORDS = sorted(
    {
        w
        for t in _BOT_TEMPLATES
        for w in t.replace("{a}", "").replace("{b}", "").split()
    }
)

_HUMAN_WORDS = (
    "thanks great work looks good merged appreciate nice catch maybe "
    "think should probably fix typo question wondering could please review "
    "agree disagree idea suggestion comment reply sorry late busy week "
    "refactor cleanup readable naming style prefer opinion discussion thread "
    "tested locally works confirm reproduce environment setup docs example "
    "helpful awesome cool interesting tricky edge case careful attention detail"
).split()

assert not set(_BOT_WORDS) & set(_HUMAN_WORDS)


def _pure_bot_text(rng: random.Random) -> str:
    template = rng.choice(_BOT_TEMPLATES)
    return template.format(a=rng.randint(1, 40), b=rng.randint(1, 40))


def _pure_human_text(rng: random.Random) -> str:
    n = rng.randint(6, 14)
    return " ".join(rng.choice(_HUMAN_WORDS) for _ in range(n))


def _ambiguous_text(rng: random.Random) -> str:
    # 50/50 word-level mixture of both vocabularies: indistinguishable by class
    n = rng.randint(6, 14)
    words = []
    for _ in range(n):
        pool = _BOT_WORDS if rng.random() < 0.5 else _HUMAN_WORDS
        words.append(rng.choice(pool))
    return " ".join(words)


def generate_synthetic_corpus(
    n_accounts: int,
    comments_per_account: int,
    bot_fraction: float,
    vocabulary_overlap: float,
    seed: int,
) -> Corpus:
    """Deterministic synthetic corpus with account-level label purity.

    ``vocabulary_overlap`` is the probability that a comment is drawn from the
    shared 50/50 word mixture instead of its class vocabulary: 0.0 gives fully
    disjoint bot/human word types, 1.0 makes both classes indistinguishable.
    """
    if n_accounts < 1 or comments_per_account < 1:
        raise ValueError("n_accounts and comments_per_account must be positive")
    if not 0 <= bot_fraction <= 1:
        raise ValueError("bot_fraction must be in [0, 1]")
    if not 0 <= vocabulary_overlap <= 1:
        raise ValueError("vocabulary_overlap must be in [0, 1]")
    rng = random.Random(seed)
    n_bot_accounts = round(n_accounts * bot_fraction)
    comments = []
    for a in range(n_accounts):
        is_bot = a < n_bot_accounts
        aid = f"{'bot' if is_bot else 'hum'}-{a:04d}"
        for j in range(comments_per_account):
            if rng.random() < vocabulary_overlap:
                text = _ambiguous_text(rng)
            elif is_bot:
                text = _pure_bot_text(rng)
            else:
                text = _pure_human_text(rng)
            comments.append(
                LabeledComment(
                    comment_id=f"{aid}-c{j:04d}",
                    account_id=aid,
                    label=BOT if is_bot else HUMAN,
                    text=text,
                    source="issue",
                )
            )
    return Corpus(tuple(comments))
