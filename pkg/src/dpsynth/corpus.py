"""Labeled news corpora: loading, label normalization, splits, and token histograms.

Four-class news records (World / Sports / Business / Sci/Tech) ingested from
the classic 3-column CSV (class index, title, description) or from JSONL with
``Title`` / ``Description`` / ``Class_Label`` keys. Token histograms computed
here are the statistic the dp module perturbs and the synth module reconciles
against, so the tokenizer is versioned and fingerprinted.
"""
from __future__ import annotations

import csv
import json
import re
from collections import Counter
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

from .errors import (
    EmptyCorpus,
    EmptyFile,
    InsufficientRecords,
    MalformedRow,
    NonDivisibleSize,
    UnknownLabel,
)
from .rngutil import make_rng

# Bump when tokenize() changes; embedded in histogram fingerprints.
TOKENIZER_ID = "unigram-lower-min2-v1"


class ClassLabel(Enum):
    """The four news classes, in canonical order."""

    WORLD = "World"
    SPORTS = "Sports"
    BUSINESS = "Business"
    SCITECH = "Sci/Tech"

    @property
    def display(self) -> str:
        return self.value


LABELS: tuple[ClassLabel, ...] = tuple(ClassLabel)

_CSV_INDEX_TO_LABEL = {
    1: ClassLabel.WORLD,
    2: ClassLabel.SPORTS,
    3: ClassLabel.BUSINESS,
    4: ClassLabel.SCITECH,
}

_LABEL_ALIASES = {
    "world": ClassLabel.WORLD,
    "sports": ClassLabel.SPORTS,
    "business": ClassLabel.BUSINESS,
    # Spelling used inside the bundled prompt templates; accepted everywhere.
    "bussiness": ClassLabel.BUSINESS,
    "sci/tech": ClassLabel.SCITECH,
    "scitech": ClassLabel.SCITECH,
    "science/technology": ClassLabel.SCITECH,
}


class Origin(Enum):
    ORIGINAL = "Original"
    SYNTHETIC = "Synthetic"


class Split(Enum):
    TRAIN = "Train"
    TEST = "Test"
    UNSPLIT = "Unsplit"


class CorpusFormat(Enum):
    CSV = "csv"
    JSONL = "jsonl"


def normalize_label(raw: str) -> ClassLabel:
    """Map a raw label string to a ClassLabel.

    Matching is case-insensitive and whitespace-trimmed; the alias table
    covers the display names plus common variant spellings. Raises
    UnknownLabel for anything else.
    """
    if not isinstance(raw, str):
        raise UnknownLabel(str(raw))
    key = raw.strip().lower()
    try:
        return _LABEL_ALIASES[key]
    except KeyError:
        raise UnknownLabel(raw) from None


@dataclass(frozen=True)
class NewsRecord:
    """One labeled news item. Title and description must survive trimming."""

    title: str
    description: str
    label: ClassLabel
    origin: Origin = Origin.ORIGINAL

    def __post_init__(self):
        if not isinstance(self.title, str) or not self.title.strip():
            raise ValueError("title must be a non-empty string")
        if not isinstance(self.description, str) or not self.description.strip():
            raise ValueError("description must be a non-empty string")

    @property
    def text(self) -> str:
        return self.title + " " + self.description


@dataclass(frozen=True)
class Corpus:
    """An ordered, immutable collection of records with a split tag."""

    records: tuple[NewsRecord, ...]
    split: Split = Split.UNSPLIT

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def label_counts(self) -> dict[ClassLabel, int]:
        counts = {label: 0 for label in LABELS}
        for rec in self.records:
            counts[rec.label] += 1
        return counts

    def by_class(self, label: ClassLabel) -> tuple[NewsRecord, ...]:
        return tuple(r for r in self.records if r.label is label)


# ---------------------------------------------------------------- loading

def _coerce_format(fmt: CorpusFormat | str) -> CorpusFormat:
    if isinstance(fmt, CorpusFormat):
        return fmt
    try:
        return CorpusFormat(str(fmt).strip().lower())
    except ValueError:
        raise ValueError(f"unknown corpus format: {fmt!r}") from None


def load_agnews(
    path: str | Path,
    fmt: CorpusFormat | str = CorpusFormat.CSV,
    *,
    origin: Origin = Origin.ORIGINAL,
) -> Corpus:
    """Load a labeled news file into a Corpus.

    CSV rows are (class index 1..4, title, description), no header, fields
    double-quoted with embedded quotes doubled. JSONL rows are objects with
    exactly the keys Title, Description, Class_Label (extra keys ignored).
    Raises MalformedRow (with 1-based row index), UnknownLabel, or EmptyFile.
    """
    fmt = _coerce_format(fmt)
    path = Path(path)
    records: list[NewsRecord] = []
    with path.open("r", encoding="utf-8", newline="") as fh:
        if fmt is CorpusFormat.CSV:
            for i, row in enumerate(csv.reader(fh), start=1):
                if not row:
                    continue  # blank line
                records.append(_record_from_csv_row(i, row, origin))
        else:
            for i, line in enumerate(fh, start=1):
                if not line.strip():
                    continue
                records.append(_record_from_jsonl_line(i, line, origin))
    if not records:
        raise EmptyFile(f"no records in {path}")
    return Corpus(tuple(records))


def _record_from_csv_row(index: int, row: list[str], origin: Origin) -> NewsRecord:
    if len(row) != 3:
        raise MalformedRow(index, f"expected 3 columns, found {len(row)}")
    raw_idx, title, description = row
    try:
        class_idx = int(raw_idx.strip())
    except ValueError:
        raise UnknownLabel(raw_idx) from None
    if class_idx not in _CSV_INDEX_TO_LABEL:
        raise UnknownLabel(raw_idx.strip())
    if not title.strip():
        raise MalformedRow(index, "empty title")
    if not description.strip():
        raise MalformedRow(index, "empty description")
    return NewsRecord(title, description, _CSV_INDEX_TO_LABEL[class_idx], origin)


def _record_from_jsonl_line(index: int, line: str, origin: Origin) -> NewsRecord:
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise MalformedRow(index, f"invalid JSON: {exc.msg}") from None
    if not isinstance(obj, dict):
        raise MalformedRow(index, "line is not a JSON object")
    for key in ("Title", "Description", "Class_Label"):
        if key not in obj:
            raise MalformedRow(index, f"missing key {key}")
        if not isinstance(obj[key], str):
            raise MalformedRow(index, f"key {key} must be a string")
    if not obj["Title"].strip():
        raise MalformedRow(index, "empty title")
    if not obj["Description"].strip():
        raise MalformedRow(index, "empty description")
    return NewsRecord(obj["Title"], obj["Description"], normalize_label(obj["Class_Label"]), origin)


def save_jsonl(corpus: Corpus, path: str | Path) -> Path:
    """Write a corpus as JSONL with Title/Description/Class_Label keys."""
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        for rec in corpus.records:
            fh.write(
                json.dumps(
                    {
                        "Title": rec.title,
                        "Description": rec.description,
                        "Class_Label": rec.label.display,
                    },
                    ensure_ascii=False,
                )
            )
            fh.write("\n")
    return path


# ---------------------------------------------------------------- splitting

def sample_split(corpus: Corpus, n_train: int, n_test: int, seed: int) -> tuple[Corpus, Corpus]:
    """Stratified, disjoint train/test sample of the corpus.

    Each output holds exactly n/4 records per class, chosen by a seeded
    per-class permutation; selected records keep their ingestion order.
    Raises NonDivisibleSize when 4 does not divide a size, and
    InsufficientRecords when a class cannot cover its share.
    """
    for name, n in (("n_train", n_train), ("n_test", n_test)):
        if n % 4 != 0:
            raise NonDivisibleSize(f"{name}={n} is not divisible by 4")
    if n_train <= 0 or n_test <= 0:
        raise InsufficientRecords("split sizes must be positive")
    per_train = n_train // 4
    per_test = n_test // 4
    need = per_train + per_test

    by_class: dict[ClassLabel, list[int]] = {label: [] for label in LABELS}
    for i, rec in enumerate(corpus.records):
        by_class[rec.label].append(i)

    rng = make_rng(seed)
    train_idx: list[int] = []
    test_idx: list[int] = []
    for label in LABELS:
        pool = by_class[label]
        if len(pool) < need:
            raise InsufficientRecords(
                f"class {label.display}: need {need} records, have {len(pool)}"
            )
        perm = rng.permutation(len(pool))
        chosen = [pool[j] for j in perm[:need]]
        train_idx.extend(chosen[:per_train])
        test_idx.extend(chosen[per_train:])

    train = Corpus(tuple(corpus.records[i] for i in sorted(train_idx)), Split.TRAIN)
    test = Corpus(tuple(corpus.records[i] for i in sorted(test_idx)), Split.TEST)
    return train, test


# ---------------------------------------------------------------- tokens

_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)


def tokenize(text: str) -> list[str]:
    """Lowercase, split on non-alphanumeric runs, drop tokens shorter than 2.

    Idempotent on its own space-joined output, which is what lets corpus
    reconciliation re-render edited records without disturbing counts.
    """
    return [t for t in _TOKEN_RE.findall(text.lower()) if len(t) >= 2]


def record_tokens(record: NewsRecord) -> list[str]:
    return tokenize(record.title) + tokenize(record.description)


def class_token_counts(corpus: Corpus) -> dict[ClassLabel, Counter]:
    """Exact per-class token counts over title + description."""
    counts: dict[ClassLabel, Counter] = {label: Counter() for label in LABELS}
    for rec in corpus.records:
        counts[rec.label].update(record_tokens(rec))
    return counts


def histogram_fingerprint(vocab_limit: int) -> str:
    return f"{TOKENIZER_ID}:k{int(vocab_limit)}"


@dataclass(frozen=True)
class TokenHistogram:
    """Per-class counts of the top-K tokens (ties broken lexicographically)."""

    per_class: dict[ClassLabel, dict[str, int]]
    vocab_limit: int
    fingerprint: str = ""

    def __post_init__(self):
        if not self.fingerprint:
            object.__setattr__(self, "fingerprint", histogram_fingerprint(self.vocab_limit))

    def total(self, label: ClassLabel) -> int:
        return sum(self.per_class.get(label, {}).values())

    def to_json_dict(self) -> dict:
        return {
            "fingerprint": self.fingerprint,
            "vocab_limit": self.vocab_limit,
            "per_class": {
                label.display: dict(sorted(self.per_class.get(label, {}).items()))
                for label in LABELS
            },
        }


def histogram_from_json(obj: dict) -> TokenHistogram:
    per_class = {
        label: {str(t): int(c) for t, c in obj["per_class"].get(label.display, {}).items()}
        for label in LABELS
    }
    return TokenHistogram(
        per_class=per_class,
        vocab_limit=int(obj["vocab_limit"]),
        fingerprint=str(obj.get("fingerprint", "")),
    )


def build_histogram(corpus: Corpus, vocab_limit: int = 500) -> TokenHistogram:
    """Top-``vocab_limit`` token counts per class.

    Ranking is by count descending, then token ascending, so the retained
    vocabulary is deterministic. Counts are exact occurrence counts; no
    clipping happens here. Raises EmptyCorpus when there are no records.
    """
    if not corpus.records:
        raise EmptyCorpus("cannot build a histogram from an empty corpus")
    if vocab_limit < 1:
        raise ValueError("vocab_limit must be >= 1")
    counts = class_token_counts(corpus)
    per_class: dict[ClassLabel, dict[str, int]] = {}
    for label in LABELS:
        ranked = sorted(counts[label].items(), key=lambda kv: (-kv[1], kv[0]))
        per_class[label] = dict(ranked[:vocab_limit])
    return TokenHistogram(per_class=per_class, vocab_limit=vocab_limit)
