"""Differential privacy primitives for histogram releases.

Calibration follows the standard mechanisms: Laplace noise with scale
b = l1_sensitivity / epsilon gives pure epsilon-DP, and Gaussian noise with
sigma = l2_sensitivity * sqrt(2 * ln(1.25 / delta)) / epsilon gives
(epsilon, delta)-DP for epsilon in (0, 1]. Samplers are explicit transforms
of PCG64 uniforms so draws are bit-stable across platforms for a fixed seed.
Rounding and clamping the noised counts is post-processing and does not
weaken the guarantee.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable

import numpy as np

from .corpus import LABELS, ClassLabel, TokenHistogram
from .errors import (
    EpsilonOutOfRange,
    InvalidDelta,
    InvalidMechanism,
    NonPositiveEpsilon,
)


class Mechanism(Enum):
    LAPLACE = "laplace"
    GAUSSIAN = "gaussian"


@dataclass(frozen=True)
class PrivacyParams:
    """A privacy target. epsilon must be > 0; Gaussian additionally needs delta > 0."""

    epsilon: float
    delta: float = 0.0
    mechanism: Mechanism = Mechanism.LAPLACE

    def __post_init__(self):
        if not (self.epsilon > 0):
            raise NonPositiveEpsilon(f"epsilon must be > 0, got {self.epsilon}")
        if not (0 <= self.delta < 1):
            raise InvalidDelta(f"delta must be in [0, 1), got {self.delta}")
        if self.mechanism is Mechanism.GAUSSIAN and self.delta == 0:
            raise InvalidDelta("the Gaussian mechanism requires delta > 0")

    def to_json_dict(self) -> dict:
        return {
            "epsilon": self.epsilon,
            "delta": self.delta,
            "mechanism": self.mechanism.value,
        }


@dataclass(frozen=True)
class SensitivityBound:
    """L1/L2 sensitivity of the released statistic to one record."""

    l1: float
    l2: float

    def __post_init__(self):
        if not (self.l1 > 0 and self.l2 > 0):
            raise ValueError("sensitivities must be positive")
        if self.l2 > self.l1:
            raise ValueError("l2 sensitivity cannot exceed l1 sensitivity")

    def to_json_dict(self) -> dict:
        return {"l1": self.l1, "l2": self.l2}


# One document contributes at most 200 tokens (the generation cap), so a
# histogram changes by at most 200 in L1 and sqrt(200) in L2 when one
# document is swapped.
DEFAULT_SENSITIVITY = SensitivityBound(l1=200.0, l2=math.sqrt(200.0))


# ---------------------------------------------------------------- calibration

def laplace_scale(params: PrivacyParams, sensitivity: SensitivityBound) -> float:
    """Laplace scale b = l1 / epsilon."""
    if params.mechanism is not Mechanism.LAPLACE:
        raise InvalidMechanism("laplace_scale requires the Laplace mechanism")
    return sensitivity.l1 / params.epsilon


def gaussian_sigma(params: PrivacyParams, sensitivity: SensitivityBound) -> float:
    """Analytic calibration sigma = l2 * sqrt(2 ln(1.25/delta)) / epsilon.

    Valid only for epsilon in (0, 1]; larger epsilon raises EpsilonOutOfRange
    rather than silently extrapolating the bound.
    """
    if params.mechanism is not Mechanism.GAUSSIAN:
        raise InvalidMechanism("gaussian_sigma requires the Gaussian mechanism")
    if not (0 < params.delta < 1):
        raise InvalidDelta(f"delta must be in (0, 1), got {params.delta}")
    if params.epsilon > 1:
        raise EpsilonOutOfRange(
            f"analytic Gaussian calibration is valid for epsilon <= 1, got {params.epsilon}"
        )
    return sensitivity.l2 * math.sqrt(2.0 * math.log(1.25 / params.delta)) / params.epsilon


def noise_scale(params: PrivacyParams, sensitivity: SensitivityBound) -> float:
    if params.mechanism is Mechanism.LAPLACE:
        return laplace_scale(params, sensitivity)
    return gaussian_sigma(params, sensitivity)


# ---------------------------------------------------------------- samplers

def laplace_from_uniform(u, b: float):
    """Inverse-CDF transform: u in [-1/2, 1/2) to Laplace(0, b).

    Pure function of its inputs; the endpoint u = -1/2 (probability 2^-53
    under a 53-bit uniform) is clamped to the smallest positive float before
    the log so the output stays finite.
    """
    arr = np.asarray(u, dtype=np.float64)
    mag = np.maximum(1.0 - 2.0 * np.abs(arr), np.finfo(np.float64).tiny)
    out = -b * np.sign(arr) * np.log(mag)
    return float(out) if np.ndim(u) == 0 else out


def sample_laplace(rng: np.random.Generator, b: float, size: int | None = None):
    """Laplace(0, b) draws via the inverse CDF of PCG64 uniforms.

    A vectorized call consumes ``size`` uniforms in one block; repeated
    scalar calls consume them one at a time. Both are deterministic given
    the generator state, but they are different consumption orders.
    """
    if not (b > 0):
        raise ValueError("scale b must be positive")
    u = rng.random(size) - 0.5
    return laplace_from_uniform(u, b)


def gaussian_from_uniforms(u1, u2, sigma: float):
    """Box-Muller cosine branch: u1 in (0, 1], u2 in [0, 1) to N(0, sigma^2)."""
    a1 = np.asarray(u1, dtype=np.float64)
    a2 = np.asarray(u2, dtype=np.float64)
    out = sigma * np.sqrt(-2.0 * np.log(a1)) * np.cos(2.0 * np.pi * a2)
    return float(out) if np.ndim(u1) == 0 and np.ndim(u2) == 0 else out


def sample_gaussian(rng: np.random.Generator, sigma: float, size: int | None = None):
    """N(0, sigma^2) draws via Box-Muller over PCG64 uniforms.

    Each output consumes two uniforms (the sine branch is discarded).
    Vectorized calls draw the two uniform blocks back to back, so the stream
    order differs from repeated scalar calls; both are deterministic.
    """
    if not (sigma > 0):
        raise ValueError("sigma must be positive")
    u1 = 1.0 - rng.random(size)  # (0, 1]: keeps the log finite
    u2 = rng.random(size)
    return gaussian_from_uniforms(u1, u2, sigma)


# ---------------------------------------------------------------- histogram release

@dataclass(frozen=True)
class NoisyHistogram:
    """A noised histogram: nonnegative integer counts plus release metadata."""

    per_class: dict[ClassLabel, dict[str, int]]
    vocab_limit: int
    fingerprint: str
    params_used: PrivacyParams
    sensitivity_used: SensitivityBound

    def __post_init__(self):
        for label, cells in self.per_class.items():
            for token, count in cells.items():
                if not isinstance(count, int) or count < 0:
                    raise ValueError(
                        f"count for ({label.display}, {token!r}) must be a nonnegative int"
                    )

    def total(self, label: ClassLabel) -> int:
        return sum(self.per_class.get(label, {}).values())

    def to_json_dict(self) -> dict:
        return {
            "fingerprint": self.fingerprint,
            "vocab_limit": self.vocab_limit,
            "params": self.params_used.to_json_dict(),
            "sensitivity": self.sensitivity_used.to_json_dict(),
            "per_class": {
                label.display: dict(sorted(self.per_class.get(label, {}).items()))
                for label in LABELS
            },
        }


def perturb_histogram(
    histogram: TokenHistogram,
    params: PrivacyParams,
    sensitivity: SensitivityBound,
    rng: np.random.Generator,
    *,
    noise_fn: Callable[[], float] | None = None,
) -> NoisyHistogram:
    """Noise every histogram cell and round-clamp to nonnegative integers.

    Cells are visited in a fixed order (classes in enum order, tokens
    lexicographically) with one fresh draw each, so a seeded generator
    reproduces the release exactly. Rounding is round-half-to-even.
    ``noise_fn`` is a test hook replacing the mechanism draw; calibration is
    still validated first so parameter errors always surface.
    """
    scale = noise_scale(params, sensitivity)
    if noise_fn is None:
        if params.mechanism is Mechanism.LAPLACE:
            def noise_fn() -> float:
                return sample_laplace(rng, scale)
        else:
            def noise_fn() -> float:
                return sample_gaussian(rng, scale)

    noisy: dict[ClassLabel, dict[str, int]] = {}
    for label in LABELS:
        cells = histogram.per_class.get(label, {})
        out: dict[str, int] = {}
        for token in sorted(cells):
            out[token] = max(0, int(round(cells[token] + noise_fn())))
        noisy[label] = out
    return NoisyHistogram(
        per_class=noisy,
        vocab_limit=histogram.vocab_limit,
        fingerprint=histogram.fingerprint,
        params_used=params,
        sensitivity_used=sensitivity,
    )


def noisy_histogram_from_json(obj: dict) -> NoisyHistogram:
    params = PrivacyParams(
        epsilon=float(obj["params"]["epsilon"]),
        delta=float(obj["params"]["delta"]),
        mechanism=Mechanism(obj["params"]["mechanism"]),
    )
    sens = SensitivityBound(l1=float(obj["sensitivity"]["l1"]), l2=float(obj["sensitivity"]["l2"]))
    per_class = {
        label: {str(t): int(c) for t, c in obj["per_class"].get(label.display, {}).items()}
        for label in LABELS
    }
    return NoisyHistogram(
        per_class=per_class,
        vocab_limit=int(obj["vocab_limit"]),
        fingerprint=str(obj["fingerprint"]),
        params_used=params,
        sensitivity_used=sens,
    )


# ---------------------------------------------------------------- budget ledger

@dataclass(frozen=True)
class BudgetLedger:
    """Append-only record of privacy charges under sequential composition."""

    entries: tuple[tuple[str, PrivacyParams], ...] = ()

    @property
    def spent_epsilon(self) -> float:
        return sum(p.epsilon for _, p in self.entries)

    @property
    def spent_delta(self) -> float:
        return sum(p.delta for _, p in self.entries)

    def to_json_dict(self) -> dict:
        return {
            "spent_epsilon": self.spent_epsilon,
            "spent_delta": self.spent_delta,
            "entries": [
                {"label": label, **params.to_json_dict()} for label, params in self.entries
            ],
        }


def charge(ledger: BudgetLedger, label: str, params: PrivacyParams) -> BudgetLedger:
    """Return a new ledger with one more charge appended."""
    return BudgetLedger(entries=ledger.entries + ((label, params),))
