"""Corpus reconciliation: edit records until protected token counts match a target.

After a histogram release is noised, the corpus itself must agree with the
released counts, otherwise the text would leak the true statistics. For every
(class, token) cell in the target vocabulary the corpus is edited at token
granularity: surplus occurrences are deleted uniformly at random, missing
occurrences are inserted as copies at uniformly random token boundaries of
uniformly chosen records. Tokens outside the target vocabulary are never
touched.

Edited records are re-rendered as space-joined token sequences; tokenize()
is idempotent on exactly that form, which is what makes the recount land on
the target. Untouched records keep their original text byte for byte.

The generator is consumed single-threaded in a fixed order (classes in enum
order, tokens lexicographically, then per-copy draws), so a seeded generator
reproduces the edit sequence exactly.
"""
from __future__ import annotations

import numpy as np

from ..corpus import (
    LABELS,
    Corpus,
    NewsRecord,
    TokenHistogram,
    histogram_fingerprint,
    tokenize,
)
from ..dp import NoisyHistogram
from ..errors import InsufficientRecords, VocabMismatch

# A field whose tokens were all deleted is rendered as ".": non-empty text
# that tokenizes to nothing, so record invariants hold and counts do not move.
_EMPTY_FIELD = "."


def reconcile_corpus(
    synthetic: Corpus,
    target: NoisyHistogram | TokenHistogram,
    rng: np.random.Generator,
) -> Corpus:
    """Return a copy of ``synthetic`` whose counts match ``target`` exactly.

    The target must have been built with the current tokenizer and its own
    vocab_limit (fingerprint check, VocabMismatch otherwise). Postcondition,
    verified by an independent recount before returning: for every class and
    every token in the target vocabulary, the exact occurrence count in the
    result equals the target count.
    """
    expected = histogram_fingerprint(target.vocab_limit)
    if target.fingerprint != expected:
        raise VocabMismatch(
            f"target fingerprint {target.fingerprint!r} does not match {expected!r}"
        )

    # Working token state; records are re-rendered only if edited.
    titles = [tokenize(r.title) for r in synthetic.records]
    descs = [tokenize(r.description) for r in synthetic.records]
    dirty = [False] * len(synthetic.records)
    members: dict = {label: [] for label in LABELS}
    for i, rec in enumerate(synthetic.records):
        members[rec.label].append(i)

    for label in LABELS:
        cells = target.per_class.get(label, {})
        idx = members[label]
        for token in sorted(cells):
            goal = cells[token]
            occurrences = [
                (i, where, pos)
                for i in idx
                for where, seq in ((0, titles[i]), (1, descs[i]))
                for pos, word in enumerate(seq)
                if word == token
            ]
            current = len(occurrences)
            if goal < current:
                picks = rng.choice(current, size=current - goal, replace=False)
                # Delete deepest positions first so earlier indices stay valid.
                chosen = sorted((occurrences[int(j)] for j in picks), reverse=True)
                for i, where, pos in chosen:
                    seq = titles[i] if where == 0 else descs[i]
                    del seq[pos]
                    dirty[i] = True
            elif goal > current:
                if not idx:
                    raise InsufficientRecords(
                        f"class {label.display} has no records to absorb insertions"
                    )
                for _ in range(goal - current):
                    i = idx[int(rng.integers(0, len(idx)))]
                    boundary = int(rng.integers(0, len(titles[i]) + len(descs[i]) + 1))
                    if boundary <= len(titles[i]):
                        titles[i].insert(boundary, token)
                    else:
                        descs[i].insert(boundary - len(titles[i]) - 1, token)
                    dirty[i] = True

    records = []
    for i, rec in enumerate(synthetic.records):
        if not dirty[i]:
            records.append(rec)
            continue
        title_tokens, desc_tokens = titles[i], descs[i]
        if not title_tokens and desc_tokens:
            # Keep the title non-empty by promoting a description token;
            # pooled per-record counts are unchanged.
            title_tokens = [desc_tokens[0]]
            desc_tokens = desc_tokens[1:]
        records.append(
            NewsRecord(
                title=" ".join(title_tokens) or _EMPTY_FIELD,
                description=" ".join(desc_tokens) or _EMPTY_FIELD,
                label=rec.label,
                origin=rec.origin,
            )
        )
    result = Corpus(tuple(records), synthetic.split)

    _verify_counts(result, target)
    return result


def count_vocab_tokens(corpus: Corpus, target: NoisyHistogram | TokenHistogram) -> dict:
    """Exact per-class counts of the target-vocabulary tokens in ``corpus``."""
    out = {}
    for label in LABELS:
        vocab = set(target.per_class.get(label, {}))
        counts = {t: 0 for t in vocab}
        for rec in corpus.by_class(label):
            for tok in tokenize(rec.title) + tokenize(rec.description):
                if tok in vocab:
                    counts[tok] += 1
        out[label] = counts
    return out


def _verify_counts(corpus: Corpus, target) -> None:
    actual = count_vocab_tokens(corpus, target)
    for label in LABELS:
        expected = target.per_class.get(label, {})
        if actual[label] != {t: int(c) for t, c in expected.items()}:
            diff = {
                t: (actual[label].get(t), expected[t])
                for t in expected
                if actual[label].get(t) != expected[t]
            }
            raise AssertionError(f"reconciliation failed for {label.display}: {diff}")
