"""One-vs-rest linear SVM trained with Pegasos-style subgradient descent.

Per binary problem the objective is the usual C-parameterized hinge form,
(1/(2C)) ||w||^2 + sum_i hinge_i, handled in its mean-loss equivalent with
lambda = 1 / (C n) and learning rate eta_t = 1 / (lambda t). Shuffling is
seed-deterministic, the weight scale trick keeps updates sparse, and the
bias rides along as one extra always-on coordinate. Model selection tries
the C grid on a held-out validation slice (ties prefer the smaller C), then
refits on the full training set.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import sparse

from ..corpus import LABELS, ClassLabel, Corpus
from ..errors import EmptyCorpus, SingleClassCorpus
from ..rngutil import make_rng, subseed
from .features import TfIdfModel, transform_corpus

DEFAULT_C_GRID = (0.1, 1.0, 10.0)
DEFAULT_VAL_FRACTION = 0.30
DEFAULT_EPOCHS = 10


@dataclass(frozen=True)
class SvmModel:
    classes: tuple[ClassLabel, ...]
    weights: np.ndarray            # (n_classes, V)
    biases: np.ndarray             # (n_classes,)
    c_value: float
    epochs: int
    # Epoch-end objective values per class from the final fit, for sanity
    # checks on convergence.
    objective_history: tuple[tuple[float, ...], ...]


def _pegasos_binary(X: sparse.csr_matrix, y: np.ndarray, lam: float, epochs: int,
                    rng: np.random.Generator) -> tuple[np.ndarray, float, list[float]]:
    """Train one binary hinge classifier; y in {-1, +1}."""
    n, V = X.shape
    indptr, indices, data = X.indptr, X.indices, X.data
    w = np.zeros(V)
    wb = 0.0          # bias coordinate (constant feature 1)
    a = 1.0           # lazy scale: effective weights are a * w
    t = 1             # starts at 2 on first use; the t=1 shrink factor is 0
    history: list[float] = []
    for _ in range(epochs):
        order = rng.permutation(n)
        for i in order:
            t += 1
            eta = 1.0 / (lam * t)
            lo, hi = indptr[i], indptr[i + 1]
            cols = indices[lo:hi]
            vals = data[lo:hi]
            margin = y[i] * (a * (w[cols] @ vals) + a * wb)
            a *= 1.0 - 1.0 / t
            if margin < 1.0:
                step = eta * y[i] / a
                w[cols] += step * vals
                wb += step
            if a < 1e-9:
                w *= a
                wb *= a
                a = 1.0
        margins = y * (a * (X @ w) + a * wb)
        hinge = np.maximum(0.0, 1.0 - margins).mean()
        reg = 0.5 * lam * (a * a) * (w @ w + wb * wb)
        history.append(float(reg + hinge))
    return a * w, a * wb, history


def _fit_ovr(X: sparse.csr_matrix, y: np.ndarray, n_classes: int, c_value: float,
             epochs: int, seed: int) -> tuple[np.ndarray, np.ndarray, list[list[float]]]:
    n, V = X.shape
    lam = 1.0 / (c_value * n)
    weights = np.zeros((n_classes, V))
    biases = np.zeros(n_classes)
    histories = []
    for k in range(n_classes):
        ybin = np.where(y == k, 1.0, -1.0)
        rng = make_rng(subseed(seed, "svm", repr(c_value), k))
        weights[k], biases[k], hist = _pegasos_binary(X, ybin, lam, epochs, rng)
        histories.append(hist)
    return weights, biases, histories


def _split_validation(y: np.ndarray, n_classes: int, val_fraction: float,
                      rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Per-class proportional holdout; returns (train_idx, val_idx)."""
    train_idx: list[int] = []
    val_idx: list[int] = []
    for k in range(n_classes):
        rows = np.flatnonzero(y == k)
        perm = rng.permutation(len(rows))
        n_val = int(np.floor(len(rows) * val_fraction))
        if len(rows) > 1:
            n_val = min(max(n_val, 1), len(rows) - 1)
        else:
            n_val = 0
        val_idx.extend(rows[perm[:n_val]])
        train_idx.extend(rows[perm[n_val:]])
    return np.sort(np.asarray(train_idx)), np.sort(np.asarray(val_idx))


def train_svm(
    train: Corpus,
    features: TfIdfModel,
    c_grid=DEFAULT_C_GRID,
    val_fraction: float = DEFAULT_VAL_FRACTION,
    seed: int = 0,
    epochs: int = DEFAULT_EPOCHS,
) -> SvmModel:
    """Grid-selected one-vs-rest linear SVM.

    Candidate C values are tried in ascending order on a seed-deterministic
    validation split; validation-accuracy ties keep the smaller C. The
    winner is refit on the full training corpus.
    """
    if not train.records:
        raise EmptyCorpus("cannot train an SVM on an empty corpus")
    labels = [rec.label for rec in train.records]
    classes = tuple(label for label in LABELS if label in set(labels))
    if len(classes) < 2:
        raise SingleClassCorpus("SVM training needs at least two classes")
    if not (0 < val_fraction < 1):
        raise ValueError("val_fraction must be in (0, 1)")
    c_grid = tuple(sorted(float(c) for c in c_grid))
    if not c_grid or any(c <= 0 for c in c_grid):
        raise ValueError("C grid must hold positive values")

    X = transform_corpus(features, train)
    y = np.array([classes.index(lab) for lab in labels])
    n_classes = len(classes)

    best_c = c_grid[0]
    best_acc = -1.0
    if len(c_grid) > 1:
        rng = make_rng(subseed(seed, "svm-val-split"))
        tr_idx, val_idx = _split_validation(y, n_classes, val_fraction, rng)
        X_tr, y_tr = X[tr_idx], y[tr_idx]
        X_val, y_val = X[val_idx], y[val_idx]
        for c_value in c_grid:  # ascending, so strict > keeps the smaller C on ties
            weights, biases, _ = _fit_ovr(X_tr, y_tr, n_classes, c_value, epochs, seed)
            scores = X_val @ weights.T + biases
            acc = float(np.mean(np.argmax(scores, axis=1) == y_val)) if len(y_val) else 0.0
            if acc > best_acc:
                best_acc = acc
                best_c = c_value

    weights, biases, histories = _fit_ovr(X, y, n_classes, best_c, epochs, seed)
    return SvmModel(
        classes=classes,
        weights=weights,
        biases=biases,
        c_value=best_c,
        epochs=epochs,
        objective_history=tuple(tuple(h) for h in histories),
    )


def svm_margins(model: SvmModel, X: sparse.csr_matrix) -> np.ndarray:
    return X @ model.weights.T + model.biases


def svm_predict(model: SvmModel, X: sparse.csr_matrix) -> list[ClassLabel]:
    scores = svm_margins(model, X)
    return [model.classes[k] for k in np.argmax(scores, axis=1)]
