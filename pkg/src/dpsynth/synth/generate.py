"""Synthetic corpus generation: batch requests, parsing, and quota balancing."""
from __future__ import annotations

import hashlib
import json
import math
import re
from dataclasses import dataclass, replace

from ..corpus import LABELS, ClassLabel, Corpus, NewsRecord, Origin, Split, normalize_label
from ..errors import AllRecordsMalformed, MissingClassDemo, QuotaUnreachable, UnknownLabel
from ..rngutil import make_rng, subseed
from .backends import BackendSpec, make_backend
from .prompts import build_generation_prompt


@dataclass(frozen=True)
class GenerationConfig:
    """Sampling and loop parameters for one generation run."""

    temperature: float = 0.7
    top_p: float = 1.0
    max_tokens: int = 200
    num_shots: int = 4
    batch_size: int = 16
    total_records: int = 400
    seed: int = 0
    # 0 means automatic: 8 + 6 * ceil(total/batch) calls before giving up.
    max_calls: int = 0

    def __post_init__(self):
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.total_records < 4 or self.total_records % 4 != 0:
            raise ValueError("total_records must be a positive multiple of 4")
        if self.max_tokens < 1:
            raise ValueError("max_tokens must be >= 1")
        if self.num_shots < 0:
            raise ValueError("num_shots must be >= 0")
        if self.max_calls < 0:
            raise ValueError("max_calls must be >= 0")

    def to_json_dict(self) -> dict:
        return {
            "temperature": self.temperature,
            "top_p": self.top_p,
            "max_tokens": self.max_tokens,
            "num_shots": self.num_shots,
            "batch_size": self.batch_size,
            "total_records": self.total_records,
            "seed": self.seed,
            "max_calls": self.max_calls,
        }


@dataclass(frozen=True)
class SynthBatch:
    """Parsed records from one backend response."""

    records: tuple[NewsRecord, ...]
    raw_response: str
    prompt_hash: str
    n_malformed: int = 0


def prompt_sha256(prompt: str) -> str:
    return hashlib.sha256(prompt.encode("utf-8")).hexdigest()


# ---------------------------------------------------------------- parsing

_FENCE_RE = re.compile(r"```(?:[A-Za-z0-9_-]+)?\s*\n(.*?)```", re.DOTALL)


def _json_payload(text: str) -> str:
    """The response body with any fenced code block unwrapped."""
    m = _FENCE_RE.search(text)
    return (m.group(1) if m else text).strip()


def _normalize_keys(item: dict) -> dict:
    return {re.sub(r"[\s_]+", "_", str(k).strip().lower()): v for k, v in item.items()}


def _record_from_item(item) -> NewsRecord | None:
    if not isinstance(item, dict):
        return None
    fields = _normalize_keys(item)
    title = fields.get("title")
    description = fields.get("description")
    raw_label = fields.get("class_label")
    if not isinstance(title, str) or not title.strip():
        return None
    if not isinstance(description, str) or not description.strip():
        return None
    if not isinstance(raw_label, str):
        return None
    try:
        label = normalize_label(raw_label)
    except UnknownLabel:
        return None
    return NewsRecord(title.strip(), description.strip(), label, Origin.SYNTHETIC)


def parse_synth_records(raw: str) -> tuple[list[NewsRecord], int]:
    """Records parsed from a backend response plus the dropped-item count.

    Tolerates a fenced code block, a single top-level object instead of an
    array, and case or spacing drift in the three keys. Raises
    AllRecordsMalformed when nothing survives.
    """
    payload = _json_payload(raw)
    try:
        data = json.loads(payload)
    except json.JSONDecodeError:
        raise AllRecordsMalformed("response is not JSON") from None
    if isinstance(data, dict):
        items = [data]
    elif isinstance(data, list):
        items = data
    else:
        raise AllRecordsMalformed(f"unexpected JSON payload of type {type(data).__name__}")
    records: list[NewsRecord] = []
    dropped = 0
    for item in items:
        rec = _record_from_item(item)
        if rec is None:
            dropped += 1
        else:
            records.append(rec)
    if not records:
        raise AllRecordsMalformed(f"0 of {len(items)} records parsed")
    return records, dropped


def generate_batch(backend, prompt: str, config: GenerationConfig) -> SynthBatch:
    """Request one batch from the backend and parse it.

    ``backend`` may be a BackendSpec (a client is constructed) or an already
    constructed client exposing ``complete``.
    """
    if isinstance(backend, BackendSpec):
        backend = make_backend(backend)
    raw = backend.complete(
        prompt,
        temperature=config.temperature,
        top_p=config.top_p,
        max_tokens=config.max_tokens,
        seed=config.seed,
    )
    records, dropped = parse_synth_records(raw)
    return SynthBatch(
        records=tuple(records),
        raw_response=raw,
        prompt_hash=prompt_sha256(prompt),
        n_malformed=dropped,
    )


# ---------------------------------------------------------------- demo selection

def select_demos(original: Corpus, num_shots: int, seed: int) -> list[NewsRecord]:
    """Seed-deterministic demonstration picks from the original corpus.

    When num_shots is a multiple of 4 each class contributes equally
    (MissingClassDemo if a class cannot); otherwise classes are cycled in
    enum order until the count is met.
    """
    if num_shots == 0:
        return []
    rng = make_rng(subseed(seed, "demos"))
    pools = {label: list(original.by_class(label)) for label in LABELS}
    demos: list[NewsRecord] = []
    if num_shots % 4 == 0:
        per_class = num_shots // 4
        for label in LABELS:
            pool = pools[label]
            if len(pool) < per_class:
                raise MissingClassDemo(
                    f"class {label.display}: need {per_class} demo records, have {len(pool)}"
                )
            picks = rng.choice(len(pool), size=per_class, replace=False)
            demos.extend(pool[int(i)] for i in picks)
    else:
        for k in range(num_shots):
            label = LABELS[k % 4]
            pool = pools[label]
            if not pool:
                raise MissingClassDemo(f"class {label.display}: no demo records available")
            demos.append(pool[int(rng.integers(0, len(pool)))])
    return demos


# ---------------------------------------------------------------- generation loop

def run_generation(original: Corpus, backend, config: GenerationConfig) -> Corpus:
    """Generate a class-balanced synthetic corpus.

    Demonstrations are selected once per run. Batches are requested until
    every class holds total_records/4 records; surplus records of a full
    class are discarded, and exact (title, description) duplicates,
    including the demonstrations themselves, are dropped. Each call uses a
    derived batch seed so a keyed mock backend produces fresh records.
    Raises QuotaUnreachable once the call cap is hit.
    """
    if isinstance(backend, BackendSpec):
        backend = make_backend(backend)
    demos = select_demos(original, config.num_shots, config.seed)
    quota = config.total_records // 4
    buckets: dict[ClassLabel, int] = {label: 0 for label in LABELS}
    seen: set[tuple[str, str]] = {(d.title, d.description) for d in demos}
    collected: list[NewsRecord] = []

    max_calls = config.max_calls or (
        8 + 6 * math.ceil(config.total_records / config.batch_size)
    )
    calls = 0
    while len(collected) < config.total_records:
        if calls >= max_calls:
            missing = {
                label.display: quota - buckets[label]
                for label in LABELS
                if buckets[label] < quota
            }
            raise QuotaUnreachable(
                f"after {calls} calls still missing {missing} records per class"
            )
        n_request = min(config.batch_size, config.total_records - len(collected))
        prompt = build_generation_prompt(demos, n_request)
        batch_config = replace(config, seed=subseed(config.seed, "batch", calls))
        calls += 1
        try:
            batch = generate_batch(backend, prompt, batch_config)
        except AllRecordsMalformed:
            continue  # a wasted call; the cap still bounds the loop
        for rec in batch.records:
            key = (rec.title, rec.description)
            if key in seen or buckets[rec.label] >= quota:
                continue
            seen.add(key)
            buckets[rec.label] += 1
            collected.append(rec)
    return Corpus(tuple(collected), Split.UNSPLIT)
