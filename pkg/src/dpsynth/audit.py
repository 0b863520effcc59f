"""Membership-inference audit.

A threshold attacker sees the classifier's confidence in the true label of
a record and guesses "member" when that confidence clears a threshold. The
audit measures how well that attacker separates training members from held
out non-members: advantage = max over thresholds of (TPR - FPR), plus a
rank-based AUC. Comparing an attack against a model trained on original
data with one trained on noised synthetic data quantifies leakage reduction.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import expit
from scipy.stats import rankdata

from .corpus import ClassLabel, Corpus
from .errors import OverlapDetected, SingleClassInput
from .evaluation.features import TfIdfModel, transform_corpus
from .evaluation.mnb import MnbModel, mnb_posterior
from .evaluation.svm import SvmModel, svm_margins
from .rngutil import sub_rng


@dataclass(frozen=True)
class ConfidenceRecord:
    """One record's confidence in its true label, tagged by membership."""

    confidence: float
    label: ClassLabel
    is_member: bool

    def __post_init__(self):
        if not 0.0 <= self.confidence <= 1.0:
            raise ValueError(f"confidence must lie in [0, 1], got {self.confidence}")


@dataclass(frozen=True)
class MiaResult:
    advantage: float
    auc: float
    best_threshold: float
    n_members: int
    n_nonmembers: int

    def to_json_dict(self) -> dict:
        return {
            "advantage": self.advantage,
            "auc": self.auc,
            "best_threshold": self.best_threshold,
            "n_members": self.n_members,
            "n_nonmembers": self.n_nonmembers,
        }


@dataclass(frozen=True)
class LeakageReport:
    baseline: MiaResult
    private: MiaResult
    delta: float
    verdict: str

    def to_json_dict(self) -> dict:
        return {
            "baseline": self.baseline.to_json_dict(),
            "private": self.private.to_json_dict(),
            "advantage_delta": self.delta,
            "verdict": self.verdict,
        }


def _true_label_confidences(model, features: TfIdfModel, corpus: Corpus) -> np.ndarray:
    """Probability mass each model assigns to every record's true label.

    MNB exposes a posterior directly. SVM margins are squashed through a
    sigmoid and normalized across classes so a zero-weight model yields a
    flat 0.25 everywhere. Labels the model never saw get confidence 0.
    """
    X = transform_corpus(features, corpus)
    if isinstance(model, MnbModel):
        probs = mnb_posterior(model, X)
    elif isinstance(model, SvmModel):
        squashed = expit(svm_margins(model, X))
        probs = squashed / squashed.sum(axis=1, keepdims=True)
    else:
        raise TypeError(f"no confidence rule for model type {type(model).__name__}")
    column = {label: j for j, label in enumerate(model.classes)}
    out = np.zeros(len(corpus.records))
    for i, rec in enumerate(corpus.records):
        j = column.get(rec.label)
        if j is not None:
            out[i] = probs[i, j]
    # guard against sigmoid round-off nudging past 1
    return np.clip(out, 0.0, 1.0)


def collect_confidences(
    model,
    features: TfIdfModel,
    members: Corpus,
    nonmembers: Corpus,
    seed: int = 0,
) -> tuple[list[ConfidenceRecord], list[ConfidenceRecord]]:
    """Balanced member/non-member confidence samples for one model.

    Exact (title, description) collisions across the two corpora would make
    membership ill-defined, so they abort the audit. The larger side is
    down-sampled (seed-deterministic, ingestion order preserved) so both
    sides contribute equally to the attack.
    """
    member_keys = {(r.title, r.description) for r in members.records}
    clash = [
        r.title for r in nonmembers.records if (r.title, r.description) in member_keys
    ]
    if clash:
        raise OverlapDetected(
            f"{len(clash)} record(s) appear in both member and non-member sets; "
            f"first title: {clash[0]!r}"
        )

    rng = sub_rng(seed, "mia-balance")
    size = min(len(members.records), len(nonmembers.records))

    def pick(corpus: Corpus) -> list:
        recs = corpus.records
        if len(recs) == size:
            return list(recs)
        keep = sorted(rng.choice(len(recs), size=size, replace=False).tolist())
        return [recs[i] for i in keep]

    member_recs = pick(members)
    nonmember_recs = pick(nonmembers)

    def score(recs: list, is_member: bool) -> list[ConfidenceRecord]:
        sub = Corpus(records=tuple(recs), split=members.split)
        conf = _true_label_confidences(model, features, sub)
        return [
            ConfidenceRecord(confidence=float(c), label=r.label, is_member=is_member)
            for r, c in zip(recs, conf)
        ]

    return score(member_recs, True), score(nonmember_recs, False)


def _values(side) -> list[float]:
    out = []
    for item in side:
        if isinstance(item, ConfidenceRecord):
            out.append(item.confidence)
        else:
            out.append(float(item))
    return out


def threshold_attack(members, nonmembers) -> MiaResult:
    """Best threshold attacker over the observed confidence values.

    Every distinct confidence is tried as a threshold (guess member when
    confidence >= threshold). Advantage is the best TPR - FPR; ties on
    advantage resolve to the smallest threshold. AUC is the Mann-Whitney
    statistic computed from midranks, so heavy ties are handled exactly.
    """
    member_conf = np.asarray(_values(members))
    nonmember_conf = np.asarray(_values(nonmembers))
    if member_conf.size == 0 or nonmember_conf.size == 0:
        raise SingleClassInput("need at least one member and one non-member confidence")

    thresholds = np.unique(np.concatenate([member_conf, nonmember_conf]))
    best_adv = -1.0
    best_threshold = float(thresholds[0])
    for theta in thresholds:
        tpr = float(np.mean(member_conf >= theta))
        fpr = float(np.mean(nonmember_conf >= theta))
        adv = tpr - fpr
        if adv > best_adv:
            best_adv = adv
            best_threshold = float(theta)

    combined = np.concatenate([member_conf, nonmember_conf])
    ranks = rankdata(combined, method="average")
    n_m = member_conf.size
    n_n = nonmember_conf.size
    u_stat = float(ranks[:n_m].sum()) - n_m * (n_m + 1) / 2.0
    auc = u_stat / (n_m * n_n)

    return MiaResult(
        advantage=best_adv,
        auc=auc,
        best_threshold=best_threshold,
        n_members=int(n_m),
        n_nonmembers=int(n_n),
    )


def compare_leakage(baseline: MiaResult, private: MiaResult) -> LeakageReport:
    """Advantage drop when the original-data model is replaced by the
    private one. Positive delta means the private pipeline leaked less."""
    delta = baseline.advantage - private.advantage
    verdict = "reduced-leakage" if delta > 0 else "no-reduction"
    return LeakageReport(baseline=baseline, private=private, delta=delta, verdict=verdict)
