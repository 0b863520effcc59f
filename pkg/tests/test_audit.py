"""Membership-inference audit: threshold attack, confidence collection,
and leakage comparison."""
from __future__ import annotations

import numpy as np
import pytest

from dpsynth.audit import (
    ConfidenceRecord,
    LeakageReport,
    MiaResult,
    collect_confidences,
    compare_leakage,
    threshold_attack,
)
from dpsynth.corpus import ClassLabel, Corpus, Origin, Split
from dpsynth.errors import OverlapDetected, SingleClassInput
from dpsynth.evaluation import fit_tfidf, train_mnb, train_svm
from dpsynth.rngutil import make_rng, subseed
from dpsynth.synth.mock import mock_original_corpus

from helpers import corp, rec, threshold_oracle

W, S = ClassLabel.WORLD, ClassLabel.SPORTS


class TestThresholdAttack:
    def test_worked_example(self):
        result = threshold_attack([0.9, 0.6], [0.7, 0.2])
        # theta=0.6: TPR 1.0, FPR 0.5; no threshold does better
        assert result.advantage == pytest.approx(0.5)
        assert result.best_threshold == pytest.approx(0.6)
        # pairs: (.9,.7) (.9,.2) (.6,.7) (.6,.2) -> 3 wins of 4
        assert result.auc == pytest.approx(0.75)
        assert result.n_members == 2 and result.n_nonmembers == 2

    def test_perfect_separation(self):
        result = threshold_attack([0.9, 0.8], [0.1, 0.2])
        assert result.advantage == pytest.approx(1.0)
        assert result.auc == pytest.approx(1.0)
        assert result.best_threshold == pytest.approx(0.8)

    def test_identical_distributions(self):
        result = threshold_attack([0.5, 0.5], [0.5, 0.5])
        assert result.advantage == pytest.approx(0.0)
        assert result.auc == pytest.approx(0.5)

    def test_ties_resolve_to_smallest_threshold(self):
        # advantage 0.5 at both 0.4 and 0.8; the smaller one is reported
        result = threshold_attack([0.4, 0.8], [0.1, 0.6])
        assert result.advantage == pytest.approx(0.5)
        assert result.best_threshold == pytest.approx(0.4)

    def test_accepts_confidence_records(self):
        members = [ConfidenceRecord(0.9, W, True), ConfidenceRecord(0.6, S, True)]
        nonmembers = [ConfidenceRecord(0.7, W, False), ConfidenceRecord(0.2, S, False)]
        assert threshold_attack(members, nonmembers).advantage == pytest.approx(0.5)

    def test_empty_side_rejected(self):
        with pytest.raises(SingleClassInput):
            threshold_attack([], [0.5])
        with pytest.raises(SingleClassInput):
            threshold_attack([0.5], [])

    @pytest.mark.parametrize("case", range(60))
    def test_agreement_with_exhaustive_oracle(self, case):
        rng = make_rng(subseed(17, "mia-case", case))
        n_m = int(rng.integers(1, 11))
        n_n = int(rng.integers(1, 11))
        # quantized so cross-group ties actually occur
        members = np.round(rng.random(n_m), 1).tolist()
        nonmembers = np.round(rng.random(n_n), 1).tolist()
        result = threshold_attack(members, nonmembers)
        oracle_adv, _, oracle_auc = threshold_oracle(members, nonmembers)
        assert result.advantage == pytest.approx(oracle_adv, abs=1e-12)
        assert result.auc == pytest.approx(oracle_auc, abs=1e-12)

    def test_result_json_shape(self):
        obj = threshold_attack([0.9], [0.1]).to_json_dict()
        assert set(obj) == {"advantage", "auc", "best_threshold", "n_members", "n_nonmembers"}


class TestConfidenceRecord:
    def test_range_validation(self):
        ConfidenceRecord(0.0, W, True)
        ConfidenceRecord(1.0, W, False)
        with pytest.raises(ValueError):
            ConfidenceRecord(-0.01, W, True)
        with pytest.raises(ValueError):
            ConfidenceRecord(1.01, W, True)


class TestCollectConfidences:
    def fitted_mnb(self, corpus):
        features = fit_tfidf(corpus)
        return train_mnb(corpus, features), features

    def test_overlap_aborts(self):
        members = mock_original_corpus(3, seed=0)
        nonmembers = Corpus(members.records[:4], Split.UNSPLIT)
        model, features = self.fitted_mnb(members)
        with pytest.raises(OverlapDetected, match="4 record"):
            collect_confidences(model, features, members, nonmembers)

    def test_balanced_downsampling(self):
        members = mock_original_corpus(8, seed=1)     # 32 records
        nonmembers = mock_original_corpus(3, seed=2)  # 12 records
        model, features = self.fitted_mnb(members)
        m, n = collect_confidences(model, features, members, nonmembers, seed=5)
        assert len(m) == len(n) == 12
        assert all(r.is_member for r in m)
        assert not any(r.is_member for r in n)

    def test_downsampling_keeps_ingestion_order_and_is_deterministic(self):
        members = mock_original_corpus(8, seed=1)
        nonmembers = mock_original_corpus(3, seed=2)
        model, features = self.fitted_mnb(members)
        m1, _ = collect_confidences(model, features, members, nonmembers, seed=5)
        m2, _ = collect_confidences(model, features, members, nonmembers, seed=5)
        assert [r.confidence for r in m1] == [r.confidence for r in m2]
        m3, _ = collect_confidences(model, features, members, nonmembers, seed=6)
        assert [r.confidence for r in m1] != [r.confidence for r in m3]
        # order: member labels follow the corpus interleaving subsequence
        labels = [r.label for r in m1]
        source = [r.label for r in members.records]
        it = iter(source)
        assert all(any(lab is x for x in it) for lab in labels)

    def test_mnb_confidence_is_true_label_posterior(self):
        members = mock_original_corpus(4, seed=3)
        nonmembers = mock_original_corpus(4, seed=4)
        model, features = self.fitted_mnb(members)
        m, n = collect_confidences(model, features, members, nonmembers)
        for record in m + n:
            assert 0.0 <= record.confidence <= 1.0
        # members are trained on, so their own-label posterior should beat
        # the uniform floor on average
        assert float(np.mean([r.confidence for r in m])) > 0.25

    def test_svm_confidences_in_range(self):
        members = mock_original_corpus(4, seed=5)
        nonmembers = mock_original_corpus(4, seed=6)
        features = fit_tfidf(members)
        model = train_svm(members, features, c_grid=(1.0,), epochs=3)
        m, n = collect_confidences(model, features, members, nonmembers)
        for record in m + n:
            assert 0.0 <= record.confidence <= 1.0

    def test_zero_weight_svm_gives_uniform_confidence(self):
        members = mock_original_corpus(2, seed=7)
        nonmembers = mock_original_corpus(2, seed=8)
        features = fit_tfidf(members)
        model = train_svm(members, features, c_grid=(1.0,), epochs=3)
        flat = type(model)(
            classes=model.classes,
            weights=np.zeros_like(model.weights),
            biases=np.zeros_like(model.biases),
            c_value=model.c_value,
            epochs=model.epochs,
            objective_history=model.objective_history,
        )
        m, n = collect_confidences(flat, features, members, nonmembers)
        for record in m + n:
            assert record.confidence == pytest.approx(0.25)

    def test_missing_class_scores_zero(self):
        # model trained without Sports; Sports records get confidence 0
        members = corp(
            rec("war border", "treaty talks", W),
            rec("chips code", "robots ship", ClassLabel.SCITECH),
        )
        nonmembers = corp(rec("match goal", "league final", S))
        model, features = self.fitted_mnb(members)
        _, n = collect_confidences(model, features, members, nonmembers)
        assert n[0].confidence == 0.0


class TestCompareLeakage:
    def result(self, adv):
        return MiaResult(advantage=adv, auc=0.5, best_threshold=0.5,
                         n_members=10, n_nonmembers=10)

    def test_reduced_leakage(self):
        report = compare_leakage(self.result(0.4), self.result(0.1))
        assert report.delta == pytest.approx(0.3)
        assert report.verdict == "reduced-leakage"

    def test_no_reduction(self):
        report = compare_leakage(self.result(0.1), self.result(0.4))
        assert report.delta == pytest.approx(-0.3)
        assert report.verdict == "no-reduction"
        assert compare_leakage(self.result(0.2), self.result(0.2)).verdict == "no-reduction"

    def test_json_shape(self):
        obj = compare_leakage(self.result(0.4), self.result(0.1)).to_json_dict()
        assert set(obj) == {"baseline", "private", "advantage_delta", "verdict"}
        assert obj["advantage_delta"] == pytest.approx(0.3)
