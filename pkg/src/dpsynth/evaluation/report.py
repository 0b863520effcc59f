"""Evaluation reports: exact accuracy accounting plus JSON/markdown rendering."""
from __future__ import annotations

from dataclasses import dataclass

from ..corpus import LABELS, ClassLabel, Corpus
from ..errors import EmptyCorpus
from .features import TfIdfModel, transform
from .mnb import MnbModel, mnb_predict
from .svm import SvmModel, svm_predict


@dataclass(frozen=True)
class EvalReport:
    model_tag: str
    train_source: str                      # "Original" | "Synthetic"
    accuracy: float
    per_class_accuracy: dict[ClassLabel, float]
    n_test: int
    config_fingerprint: str = ""
    n_unparseable: int = 0                 # ICL only: responses with no readable label

    def to_json_dict(self) -> dict:
        return {
            "model_tag": self.model_tag,
            "train_source": self.train_source,
            "accuracy": self.accuracy,
            "per_class_accuracy": {
                label.display: acc for label, acc in self.per_class_accuracy.items()
            },
            "n_test": self.n_test,
            "config_fingerprint": self.config_fingerprint,
            "n_unparseable": self.n_unparseable,
        }


def evaluate(
    predict_fn,
    test: Corpus,
    *,
    model_tag: str = "model",
    train_source: str = "Original",
    config_fingerprint: str = "",
    n_unparseable: int = 0,
) -> EvalReport:
    """Score a predictor over a test corpus.

    ``predict_fn`` maps a NewsRecord to a ClassLabel (or None, counted
    wrong). Accuracy is the exact ratio correct / n.
    """
    if not test.records:
        raise EmptyCorpus("cannot evaluate on an empty corpus")
    correct = 0
    class_total: dict[ClassLabel, int] = {}
    class_correct: dict[ClassLabel, int] = {}
    for rec in test.records:
        predicted = predict_fn(rec)
        class_total[rec.label] = class_total.get(rec.label, 0) + 1
        if predicted is rec.label:
            correct += 1
            class_correct[rec.label] = class_correct.get(rec.label, 0) + 1
    per_class = {
        label: class_correct.get(label, 0) / class_total[label]
        for label in LABELS
        if label in class_total
    }
    return EvalReport(
        model_tag=model_tag,
        train_source=train_source,
        accuracy=correct / len(test.records),
        per_class_accuracy=per_class,
        n_test=len(test.records),
        config_fingerprint=config_fingerprint,
        n_unparseable=n_unparseable,
    )


def make_predictor(model, features: TfIdfModel):
    """Bind a trained model and its featurizer into a record-level predictor."""
    if isinstance(model, MnbModel):
        return lambda rec: mnb_predict(model, transform(features, rec))[0]
    if isinstance(model, SvmModel):
        return lambda rec: svm_predict(model, transform(features, rec))[0]
    raise TypeError(f"no predictor for model type {type(model).__name__}")


# ---------------------------------------------------------------- markdown

def _pct(x: float) -> str:
    return f"{100.0 * x:.2f}"


def render_model_table(reports: list[EvalReport]) -> str:
    """Accuracy of each model trained on original vs synthetic data."""
    by_tag: dict[str, dict[str, EvalReport]] = {}
    order: list[str] = []
    for rep in reports:
        if rep.model_tag not in by_tag:
            by_tag[rep.model_tag] = {}
            order.append(rep.model_tag)
        by_tag[rep.model_tag][rep.train_source] = rep
    lines = [
        "| Method | Accuracy (Original Data) | Accuracy (Synthetic Data) |",
        "| --- | --- | --- |",
    ]
    for tag in order:
        row = by_tag[tag]
        orig = _pct(row["Original"].accuracy) if "Original" in row else "-"
        synth = _pct(row["Synthetic"].accuracy) if "Synthetic" in row else "-"
        lines.append(f"| {tag} | {orig} | {synth} |")
    return "\n".join(lines)


def render_icl_table(reports: list[EvalReport]) -> str:
    """Shot-count rows with original/synthetic demonstration columns."""
    cells: dict[int, dict[str, EvalReport]] = {}
    unparsed = 0
    for rep in reports:
        shots = rep_shots(rep)
        cells.setdefault(shots, {})[rep.train_source] = rep
        unparsed += rep.n_unparseable
    lines = [
        "| Shots | Accuracy (Original Demos) | Accuracy (Synthetic Demos) |",
        "| --- | --- | --- |",
    ]
    for shots in sorted(cells):
        row = cells[shots]
        orig = _pct(row["Original"].accuracy) if "Original" in row else "-"
        synth = _pct(row["Synthetic"].accuracy) if "Synthetic" in row else "-"
        lines.append(f"| {shots}-shot | {orig} | {synth} |")
    if unparsed:
        lines.append("")
        lines.append(f"Unparseable responses (scored incorrect): {unparsed}")
    return "\n".join(lines)


def rep_shots(report: EvalReport) -> int:
    """Shot count encoded in an ICL model tag like ``icl-4shot``."""
    tag = report.model_tag
    try:
        return int(tag.split("-")[1].replace("shot", ""))
    except (IndexError, ValueError):
        return -1


def render_sweep_table(rows: list[dict]) -> str:
    """Accuracy by privacy level; one row per (model, epsilon).

    Each row dict needs: model, epsilon_requested, epsilon_used, floored,
    accuracy_mean, accuracy_sd, n_seeds.
    """
    lines = [
        "| Method | epsilon | Accuracy |",
        "| --- | --- | --- |",
    ]
    for row in rows:
        eps = row["epsilon_requested"]
        note = f" (ran at {row['epsilon_used']})" if row.get("floored") else ""
        acc = _pct(row["accuracy_mean"])
        if row.get("n_seeds", 1) > 1:
            acc += f" +/- {_pct(row['accuracy_sd'])}"
        lines.append(f"| {row['model']} | {eps}{note} | {acc} |")
    return "\n".join(lines)
