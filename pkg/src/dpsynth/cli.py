"""Experiment orchestration CLI.

Four subcommands drive the pipeline end to end:

  generate   original data -> synthetic corpus, noised release, JSONL output
  evaluate   train the requested models on original vs synthetic, report
  sweep      generate + evaluate across a list of epsilons, aggregate
  audit      membership-inference comparison, original vs synthetic models

Configuration is a JSON file (flat keys matching ExperimentConfig fields,
with nested "backend" and "gen" objects) plus command-line flag overrides;
flags win over the file, the file wins over defaults. Every command writes
a manifest (manifest_<command>.json) recording the resolved config, its
fingerprint, the privacy budget spent, backend call counters, and the paths
of every artifact it produced.

The experiment seed is the single source of randomness: stage seeds are
derived from it by labeled hashing, so a config file must not set gen.seed.
"""
from __future__ import annotations

import argparse
import dataclasses
import hashlib
import json
import math
import sys
import time
from contextlib import contextmanager
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import __version__
from .corpus import (
    Corpus,
    CorpusFormat,
    Origin,
    build_histogram,
    load_agnews,
    sample_split,
    save_jsonl,
)
from .dp import (
    BudgetLedger,
    Mechanism,
    PrivacyParams,
    SensitivityBound,
    charge,
    perturb_histogram,
)
from .errors import DpSynthError, NoModelsRequested, StageError
from .evaluation import (
    EvalReport,
    IclConfig,
    evaluate,
    fit_tfidf,
    icl_evaluate,
    make_predictor,
    render_icl_table,
    render_model_table,
    render_sweep_table,
    train_mnb,
    train_svm,
)
from .audit import collect_confidences, compare_leakage, threshold_attack
from .rngutil import sub_rng, subseed
from .synth import (
    BackendSpec,
    GenerationConfig,
    make_backend,
    mock_original_corpus,
    reconcile_corpus,
    run_generation,
)

VALID_MODELS = ("mnb", "svm", "icl")
VALID_SHOTS = (0, 2, 4)


# ---------------------------------------------------------------- config

@dataclass(frozen=True)
class ExperimentConfig:
    """Every knob of one experiment, resolved and validated.

    dataset_path accepts a real file (.csv or .jsonl) or "mock:<N>" for the
    built-in offline sample corpus with N records. epsilon drives the
    single-release commands (generate, evaluate, audit); epsilons drives
    sweep. A requested epsilon of exactly 0 runs at epsilon_floor and is
    flagged wherever it is reported.
    """

    dataset_path: str = ""
    dataset_format: str = ""              # "" = infer from the file suffix
    n_train: int = 12000
    n_test: int = 4000
    backend: BackendSpec = field(default_factory=BackendSpec)
    gen: GenerationConfig = field(default_factory=GenerationConfig)
    epsilon: float = 1.0
    epsilons: tuple = (0.0, 0.5, 1.0, 10.0)
    mechanism: str = "laplace"
    delta: float = 1e-5
    sensitivity_l1: float = 200.0
    sensitivity_l2: float = math.sqrt(200.0)
    vocab_limit: int = 500
    models: tuple = ("mnb", "svm")
    icl_shots: tuple = (0, 2, 4)
    seed: int = 42
    output_dir: str = "runs"
    epsilon_floor: float = 0.05
    sweep_seeds: int = 1
    fresh_generation_per_epsilon: bool = False
    cache_enabled: bool = True
    cache_dir: str = ""
    mnb_alpha: float = 1.0
    svm_c_grid: tuple = (0.1, 1.0, 10.0)
    svm_epochs: int = 10
    svm_val_fraction: float = 0.30

    def __post_init__(self):
        if self.mechanism not in ("laplace", "gaussian"):
            raise ValueError(f"mechanism must be 'laplace' or 'gaussian', got {self.mechanism!r}")
        if self.epsilon < 0:
            raise ValueError("epsilon must be >= 0 (0 runs at the surrogate floor)")
        if any(e < 0 for e in self.epsilons):
            raise ValueError("sweep epsilons must be >= 0")
        if not (self.epsilon_floor > 0):
            raise ValueError("epsilon_floor must be > 0")
        if self.sweep_seeds < 1:
            raise ValueError("sweep_seeds must be >= 1")
        deduped = []
        for m in self.models:
            if m not in VALID_MODELS:
                raise ValueError(f"unknown model {m!r}; choose from {VALID_MODELS}")
            if m not in deduped:
                deduped.append(m)
        object.__setattr__(self, "models", tuple(deduped))
        shots = sorted(set(self.icl_shots))
        for s in shots:
            if s not in VALID_SHOTS:
                raise ValueError(f"icl_shots must be drawn from {VALID_SHOTS}, got {s}")
        object.__setattr__(self, "icl_shots", tuple(shots))
        object.__setattr__(self, "epsilons", tuple(float(e) for e in self.epsilons))
        object.__setattr__(self, "svm_c_grid", tuple(float(c) for c in self.svm_c_grid))
        if self.dataset_format not in ("", "csv", "jsonl"):
            raise ValueError("dataset_format must be 'csv' or 'jsonl'")
        # sensitivity bounds validated by construction
        SensitivityBound(self.sensitivity_l1, self.sensitivity_l2)

    @property
    def sensitivity(self) -> SensitivityBound:
        return SensitivityBound(self.sensitivity_l1, self.sensitivity_l2)

    def resolve_epsilon(self, requested: float) -> tuple[float, bool]:
        """Map a requested epsilon to the one actually run. 0 -> floor."""
        if requested == 0.0:
            return self.epsilon_floor, True
        return float(requested), False

    def privacy_for(self, epsilon: float) -> PrivacyParams:
        mech = Mechanism(self.mechanism)
        # Laplace gives pure epsilon-DP; its ledger entries carry delta 0.
        delta = self.delta if mech is Mechanism.GAUSSIAN else 0.0
        return PrivacyParams(epsilon=epsilon, delta=delta, mechanism=mech)

    def to_json_dict(self) -> dict:
        return {
            "dataset_path": self.dataset_path,
            "dataset_format": self.dataset_format,
            "n_train": self.n_train,
            "n_test": self.n_test,
            "backend": self.backend.to_json_dict(),
            "gen": self.gen.to_json_dict(),
            "epsilon": self.epsilon,
            "epsilons": list(self.epsilons),
            "mechanism": self.mechanism,
            "delta": self.delta,
            "sensitivity_l1": self.sensitivity_l1,
            "sensitivity_l2": self.sensitivity_l2,
            "vocab_limit": self.vocab_limit,
            "models": list(self.models),
            "icl_shots": list(self.icl_shots),
            "seed": self.seed,
            "output_dir": self.output_dir,
            "epsilon_floor": self.epsilon_floor,
            "sweep_seeds": self.sweep_seeds,
            "fresh_generation_per_epsilon": self.fresh_generation_per_epsilon,
            "cache_enabled": self.cache_enabled,
            "cache_dir": self.cache_dir,
            "mnb_alpha": self.mnb_alpha,
            "svm_c_grid": list(self.svm_c_grid),
            "svm_epochs": self.svm_epochs,
            "svm_val_fraction": self.svm_val_fraction,
        }

    # Execution details that do not change what the experiment computes;
    # relocating outputs or toggling the cache must not look like a new run.
    _NON_IDENTITY_FIELDS = ("output_dir", "cache_dir", "cache_enabled")

    def fingerprint(self) -> str:
        identity = self.to_json_dict()
        for field_name in self._NON_IDENTITY_FIELDS:
            identity.pop(field_name, None)
        canon = json.dumps(identity, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canon.encode("utf-8")).hexdigest()


def _merge_config_values(file_values: dict, overrides: dict) -> ExperimentConfig:
    merged = dict(file_values)
    for key, value in overrides.items():
        if key in ("backend", "gen") and isinstance(value, dict):
            nested = dict(merged.get(key, {}))
            nested.update(value)
            merged[key] = nested
        else:
            merged[key] = value

    known = {f.name for f in dataclasses.fields(ExperimentConfig)}
    unknown = sorted(set(merged) - known)
    if unknown:
        raise ValueError(f"unknown config key(s): {', '.join(unknown)}")

    if "backend" in merged and isinstance(merged["backend"], dict):
        merged["backend"] = BackendSpec(**merged["backend"])
    if "gen" in merged and isinstance(merged["gen"], dict):
        if "seed" in merged["gen"]:
            raise ValueError(
                "gen.seed is derived from the experiment seed; set top-level 'seed' instead"
            )
        merged["gen"] = GenerationConfig(**merged["gen"])
    for key in ("epsilons", "models", "icl_shots", "svm_c_grid"):
        if key in merged and isinstance(merged[key], list):
            merged[key] = tuple(merged[key])
    return ExperimentConfig(**merged)


def load_config(path: str | None, overrides: dict) -> ExperimentConfig:
    """Defaults <- JSON file <- flag overrides."""
    file_values: dict = {}
    if path:
        with open(path, "r", encoding="utf-8") as fh:
            file_values = json.load(fh)
        if not isinstance(file_values, dict):
            raise ValueError("config file must hold a JSON object")
    return _merge_config_values(file_values, overrides)


# ---------------------------------------------------------------- manifest

@dataclass(frozen=True)
class RunManifest:
    command: str
    config_fingerprint: str
    config: dict
    tool_version: str
    started_at: str
    finished_at: str
    outputs: dict                      # artifact name -> path (str)
    budget: BudgetLedger
    backend_stats: dict
    notes: dict

    def to_json_dict(self) -> dict:
        return {
            "command": self.command,
            "config_fingerprint": self.config_fingerprint,
            "config": self.config,
            "tool_version": self.tool_version,
            "started_at": self.started_at,
            "finished_at": self.finished_at,
            "outputs": self.outputs,
            "budget_ledger": self.budget.to_json_dict(),
            "backend_stats": self.backend_stats,
            "notes": self.notes,
        }


def _utc_now() -> str:
    return time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime())


def _finish_manifest(
    command: str,
    config: ExperimentConfig,
    started_at: str,
    out_dir: Path,
    outputs: dict,
    ledger: BudgetLedger,
    backend_stats: dict,
    notes: dict,
) -> RunManifest:
    manifest = RunManifest(
        command=command,
        config_fingerprint=config.fingerprint(),
        config=config.to_json_dict(),
        tool_version=__version__,
        started_at=started_at,
        finished_at=_utc_now(),
        outputs={name: str(p) for name, p in outputs.items()},
        budget=ledger,
        backend_stats=dict(backend_stats),
        notes=notes,
    )
    path = out_dir / f"manifest_{command}.json"
    path.write_text(json.dumps(manifest.to_json_dict(), indent=2, sort_keys=True) + "\n",
                    encoding="utf-8")
    return manifest


# ---------------------------------------------------------------- stages

@contextmanager
def stage(name: str):
    """Tag any failure below with the pipeline stage that raised it."""
    try:
        yield
    except StageError:
        raise
    except BaseException as exc:
        if isinstance(exc, (KeyboardInterrupt, SystemExit)):
            raise
        raise StageError(name, exc) from exc


def _infer_format(config: ExperimentConfig, path: Path) -> CorpusFormat:
    if config.dataset_format:
        return CorpusFormat(config.dataset_format)
    suffix = path.suffix.lower()
    if suffix == ".csv":
        return CorpusFormat.CSV
    if suffix == ".jsonl":
        return CorpusFormat.JSONL
    raise ValueError(
        f"cannot infer dataset format from {path.name!r}; set dataset_format"
    )


def _load_original(config: ExperimentConfig) -> tuple[Corpus, Corpus]:
    """Original data as a stratified (train, test) pair."""
    with stage("load-dataset"):
        if not config.dataset_path:
            raise ValueError(
                "dataset_path is not set; point it at an AGNews file "
                "or use 'mock:<N>' for the built-in sample corpus"
            )
        if config.dataset_path.startswith("mock:"):
            n = int(config.dataset_path.split(":", 1)[1])
            if n < 4 or n % 4 != 0:
                raise ValueError("mock:<N> needs N to be a positive multiple of 4")
            corpus = mock_original_corpus(n // 4, seed=config.seed)
        else:
            path = Path(config.dataset_path)
            corpus = load_agnews(path, _infer_format(config, path))
    with stage("split"):
        return sample_split(corpus, config.n_train, config.n_test, seed=config.seed)


def _external_data_note(config: ExperimentConfig) -> None:
    if config.backend.kind == "http":
        print(
            "note: the http backend sends original-data text (demonstrations "
            "and/or queries) to the configured endpoint",
            file=sys.stderr,
        )


def _make_client(config: ExperimentConfig):
    return make_backend(
        config.backend,
        cache_dir=config.cache_dir or None,
        cache_enabled=config.cache_enabled,
    )


def _ledger_for_input(synthetic_file: str | Path) -> tuple[BudgetLedger, bool]:
    """Recover the budget spent producing a synthetic file, if recorded.

    Looks for manifest_generate.json next to the file. Returns an empty
    ledger and a provenance-unknown flag when nothing usable is found.
    """
    sibling = Path(synthetic_file).parent / "manifest_generate.json"
    try:
        data = json.loads(sibling.read_text(encoding="utf-8"))
        entries = []
        for entry in data["budget_ledger"]["entries"]:
            params = PrivacyParams(
                epsilon=float(entry["epsilon"]),
                delta=float(entry["delta"]),
                mechanism=Mechanism(entry["mechanism"]),
            )
            entries.append((str(entry["label"]), params))
        return BudgetLedger(entries=tuple(entries)), True
    except Exception:
        return BudgetLedger(), False


# ---------------------------------------------------------------- generate

def cmd_generate(config: ExperimentConfig) -> RunManifest:
    """Produce a reconciled synthetic corpus under one epsilon release."""
    started_at = _utc_now()
    out_dir = Path(config.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    train, _test = _load_original(config)

    _external_data_note(config)
    if config.gen.max_tokens > config.sensitivity_l1:
        print(
            f"warning: gen.max_tokens={config.gen.max_tokens} exceeds the assumed "
            f"per-document contribution bound l1={config.sensitivity_l1}; "
            "the privacy calibration no longer covers the longest documents",
            file=sys.stderr,
        )

    with stage("generate-records"):
        client = _make_client(config)
        gen_config = replace(config.gen, seed=subseed(config.seed, "generation"))
        synthetic_raw = run_generation(train, client, gen_config)

    with stage("histogram"):
        hist = build_histogram(synthetic_raw, config.vocab_limit)

    with stage("dp-noise"):
        eps_used, floored = config.resolve_epsilon(config.epsilon)
        if floored:
            print(
                f"note: epsilon 0 has no finite calibration; running at the "
                f"surrogate floor {config.epsilon_floor} (flagged in the manifest)",
                file=sys.stderr,
            )
        params = config.privacy_for(eps_used)
        noisy = perturb_histogram(hist, params, config.sensitivity,
                                  sub_rng(config.seed, "dp-noise"))
        ledger = charge(BudgetLedger(), f"release-eps{config.epsilon}", params)

    with stage("reconcile"):
        synthetic = reconcile_corpus(synthetic_raw, noisy,
                                     sub_rng(config.seed, "reconcile"))

    created: list[Path] = []
    with stage("write-output"):
        try:
            jsonl_path = out_dir / "synthetic.jsonl"
            save_jsonl(synthetic, jsonl_path)
            created.append(jsonl_path)
            hist_path = out_dir / "histogram_noisy.json"
            hist_path.write_text(
                json.dumps(noisy.to_json_dict(), indent=2, sort_keys=True) + "\n",
                encoding="utf-8",
            )
            created.append(hist_path)
            manifest = _finish_manifest(
                "generate", config, started_at, out_dir,
                outputs={"synthetic": jsonl_path, "noisy_histogram": hist_path},
                ledger=ledger,
                backend_stats=client.stats,
                notes={
                    "epsilon_requested": config.epsilon,
                    "epsilon_used": eps_used,
                    "epsilon_floored": floored,
                    "n_records": len(synthetic.records),
                },
            )
        except BaseException:
            for p in created:
                p.unlink(missing_ok=True)
            raise

    print(f"wrote {len(synthetic.records)} synthetic records to {jsonl_path}")
    print(f"manifest: {out_dir / 'manifest_generate.json'}")
    return manifest


# ---------------------------------------------------------------- evaluate

def _train_and_score(
    config: ExperimentConfig,
    name: str,
    train_corpus: Corpus,
    source: str,
    test: Corpus,
    fingerprint: str,
) -> EvalReport:
    features = fit_tfidf(train_corpus)
    if name == "mnb":
        model = train_mnb(train_corpus, features, alpha=config.mnb_alpha)
    else:
        model = train_svm(
            train_corpus,
            features,
            c_grid=config.svm_c_grid,
            val_fraction=config.svm_val_fraction,
            seed=subseed(config.seed, "train", name, source),
            epochs=config.svm_epochs,
        )
    predict = make_predictor(model, features)
    return evaluate(predict, test, model_tag=name, train_source=source,
                    config_fingerprint=fingerprint)


def _icl_reports(
    config: ExperimentConfig,
    client,
    train: Corpus,
    synthetic: Corpus,
    test: Corpus,
    fingerprint: str,
) -> list[EvalReport]:
    reports = []
    for shots in config.icl_shots:
        if shots == 0:
            # demo-free, so one run covers both table columns
            icl_cfg = IclConfig(shots=0, demo_source="Original",
                                backend=config.backend,
                                seed=subseed(config.seed, "icl", shots))
            rep = icl_evaluate(icl_cfg, train, test, client=client,
                               config_fingerprint=fingerprint)
            reports.append(rep)
            reports.append(dataclasses.replace(rep, train_source="Synthetic",
                                               n_unparseable=0))
            continue
        for source, demo_corpus in (("Original", train), ("Synthetic", synthetic)):
            icl_cfg = IclConfig(shots=shots, demo_source=source,
                                backend=config.backend,
                                seed=subseed(config.seed, "icl", shots, source))
            reports.append(icl_evaluate(icl_cfg, demo_corpus, test, client=client,
                                        config_fingerprint=fingerprint))
    return reports


def cmd_evaluate(config: ExperimentConfig, synthetic_file: str | Path) -> RunManifest:
    """Train requested models on original and synthetic data, score both on
    the same held-out original test split."""
    started_at = _utc_now()
    out_dir = Path(config.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    with stage("config"):
        if not config.models:
            raise NoModelsRequested("evaluation needs at least one of mnb, svm, icl")

    train, test = _load_original(config)
    with stage("load-synthetic"):
        synthetic = load_agnews(synthetic_file, CorpusFormat.JSONL,
                                origin=Origin.SYNTHETIC)

    fp = config.fingerprint()
    reports: list[EvalReport] = []
    client = None
    for name in config.models:
        if name == "icl":
            continue
        with stage(f"train-{name}"):
            reports.append(_train_and_score(config, name, train, "Original", test, fp))
            reports.append(_train_and_score(config, name, synthetic, "Synthetic", test, fp))
    if "icl" in config.models:
        _external_data_note(config)
        with stage("icl"):
            client = _make_client(config)
            reports.extend(_icl_reports(config, client, train, synthetic, test, fp))

    with stage("report"):
        classic = [r for r in reports if not r.model_tag.startswith("icl-")]
        icl = [r for r in reports if r.model_tag.startswith("icl-")]
        sections = []
        if classic:
            sections.append(render_model_table(classic))
        if icl:
            sections.append(render_icl_table(icl))
        markdown = "\n\n".join(sections) + "\n"

        json_path = out_dir / "evaluation.json"
        json_path.write_text(
            json.dumps([r.to_json_dict() for r in reports], indent=2) + "\n",
            encoding="utf-8",
        )
        md_path = out_dir / "evaluation.md"
        md_path.write_text(markdown, encoding="utf-8")

        ledger, known = _ledger_for_input(synthetic_file)
        manifest = _finish_manifest(
            "evaluate", config, started_at, out_dir,
            outputs={"reports_json": json_path, "reports_markdown": md_path},
            ledger=ledger,
            backend_stats=client.stats if client is not None else {},
            notes={"synthetic_file": str(synthetic_file),
                   "synthetic_provenance_known": known},
        )

    print(markdown, end="")
    print(f"manifest: {out_dir / 'manifest_evaluate.json'}")
    return manifest


# ---------------------------------------------------------------- sweep

def _sweep_accuracy(
    config: ExperimentConfig,
    name: str,
    synthetic: Corpus,
    test: Corpus,
    rep_seed: int,
    client,
) -> float:
    if name == "icl":
        shots = max(config.icl_shots) if config.icl_shots else 4
        icl_cfg = IclConfig(shots=shots, demo_source="Synthetic",
                            backend=config.backend,
                            seed=subseed(rep_seed, "icl", shots, "Synthetic"))
        rep = icl_evaluate(icl_cfg, synthetic, test, client=client)
        return rep.accuracy
    features = fit_tfidf(synthetic)
    if name == "mnb":
        model = train_mnb(synthetic, features, alpha=config.mnb_alpha)
    else:
        model = train_svm(synthetic, features, c_grid=config.svm_c_grid,
                          val_fraction=config.svm_val_fraction,
                          seed=subseed(rep_seed, "train", name, "Synthetic"),
                          epochs=config.svm_epochs)
    predict = make_predictor(model, features)
    return evaluate(predict, test, model_tag=name, train_source="Synthetic").accuracy


def cmd_sweep(config: ExperimentConfig) -> RunManifest:
    """Accuracy across the epsilon list, optionally averaged over seeds.

    Per seed, one base corpus is generated and every epsilon re-noises the
    same histogram, so row differences isolate the privacy level; the
    fresh_generation_per_epsilon flag regenerates per epsilon instead.
    """
    started_at = _utc_now()
    out_dir = Path(config.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    with stage("config"):
        if len(config.epsilons) < 2:
            raise ValueError("a sweep needs at least two epsilon values")
        if not config.models:
            raise NoModelsRequested("sweep needs at least one of mnb, svm, icl")

    train, test = _load_original(config)
    _external_data_note(config)

    client = _make_client(config)
    ledger = BudgetLedger()
    # accuracies[(model, requested_eps)] -> one value per seed
    accuracies: dict[tuple[str, float], list[float]] = {}
    eps_used_by: dict[float, tuple[float, bool]] = {}

    for rep in range(config.sweep_seeds):
        rep_seed = config.seed + rep
        base_raw = None
        base_hist = None
        if not config.fresh_generation_per_epsilon:
            with stage("generate-records"):
                gen_config = replace(config.gen, seed=subseed(rep_seed, "generation"))
                base_raw = run_generation(train, client, gen_config)
            with stage("histogram"):
                base_hist = build_histogram(base_raw, config.vocab_limit)

        for requested in config.epsilons:
            eps_used, floored = config.resolve_epsilon(requested)
            eps_used_by[requested] = (eps_used, floored)
            params = config.privacy_for(eps_used)

            if config.fresh_generation_per_epsilon:
                with stage("generate-records"):
                    gen_config = replace(
                        config.gen,
                        seed=subseed(rep_seed, "generation", repr(requested)),
                    )
                    raw = run_generation(train, client, gen_config)
                with stage("histogram"):
                    hist = build_histogram(raw, config.vocab_limit)
            else:
                raw, hist = base_raw, base_hist

            with stage("dp-noise"):
                noisy = perturb_histogram(
                    hist, params, config.sensitivity,
                    sub_rng(rep_seed, "dp-noise", repr(requested)),
                )
                ledger = charge(ledger, f"seed{rep_seed}-eps{requested}", params)
            with stage("reconcile"):
                synthetic = reconcile_corpus(
                    raw, noisy, sub_rng(rep_seed, "reconcile", repr(requested)))

            for name in config.models:
                with stage(f"evaluate-{name}"):
                    acc = _sweep_accuracy(config, name, synthetic, test, rep_seed, client)
                accuracies.setdefault((name, requested), []).append(acc)

    with stage("report"):
        rows = []
        for requested in config.epsilons:
            eps_used, floored = eps_used_by[requested]
            for name in config.models:
                vals = accuracies[(name, requested)]
                mean = float(np.mean(vals))
                sd = float(np.std(vals, ddof=1)) if len(vals) > 1 else 0.0
                rows.append({
                    "model": name,
                    "epsilon_requested": requested,
                    "epsilon_used": eps_used,
                    "floored": floored,
                    "accuracies": vals,
                    "accuracy_mean": mean,
                    "accuracy_sd": sd,
                    "n_seeds": len(vals),
                })
        markdown = render_sweep_table(rows) + "\n"

        json_path = out_dir / "sweep.json"
        json_path.write_text(json.dumps(rows, indent=2) + "\n", encoding="utf-8")
        md_path = out_dir / "sweep.md"
        md_path.write_text(markdown, encoding="utf-8")
        manifest = _finish_manifest(
            "sweep", config, started_at, out_dir,
            outputs={"sweep_json": json_path, "sweep_markdown": md_path},
            ledger=ledger,
            backend_stats=client.stats,
            notes={"n_seeds": config.sweep_seeds,
                   "fresh_generation_per_epsilon": config.fresh_generation_per_epsilon},
        )

    print(markdown, end="")
    print(f"manifest: {out_dir / 'manifest_sweep.json'}")
    return manifest


# ---------------------------------------------------------------- audit

def cmd_audit(config: ExperimentConfig, synthetic_file: str | Path) -> RunManifest:
    """Membership-inference advantage, original-trained vs synthetic-trained.

    Members are the original training records, non-members the held-out
    test records. Both attacks score the same member/non-member samples.
    """
    started_at = _utc_now()
    out_dir = Path(config.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    train, test = _load_original(config)
    with stage("load-synthetic"):
        synthetic = load_agnews(synthetic_file, CorpusFormat.JSONL,
                                origin=Origin.SYNTHETIC)

    with stage("train-models"):
        features_orig = fit_tfidf(train)
        model_orig = train_mnb(train, features_orig, alpha=config.mnb_alpha)
        features_synth = fit_tfidf(synthetic)
        model_synth = train_mnb(synthetic, features_synth, alpha=config.mnb_alpha)

    with stage("mia"):
        mia_seed = subseed(config.seed, "mia")
        m0, n0 = collect_confidences(model_orig, features_orig, train, test,
                                     seed=mia_seed)
        baseline = threshold_attack(m0, n0)
        m1, n1 = collect_confidences(model_synth, features_synth, train, test,
                                     seed=mia_seed)
        private = threshold_attack(m1, n1)
        report = compare_leakage(baseline, private)

    with stage("report"):
        json_path = out_dir / "audit.json"
        json_path.write_text(
            json.dumps(report.to_json_dict(), indent=2, sort_keys=True) + "\n",
            encoding="utf-8",
        )
        ledger, known = _ledger_for_input(synthetic_file)
        manifest = _finish_manifest(
            "audit", config, started_at, out_dir,
            outputs={"audit_json": json_path},
            ledger=ledger,
            backend_stats={},
            notes={"synthetic_file": str(synthetic_file),
                   "synthetic_provenance_known": known},
        )

    print(f"baseline advantage {baseline.advantage:.4f} (auc {baseline.auc:.4f}); "
          f"synthetic advantage {private.advantage:.4f} (auc {private.auc:.4f})")
    print(f"verdict: {report.verdict} (delta {report.delta:+.4f})")
    print(f"manifest: {out_dir / 'manifest_audit.json'}")
    return manifest


# ---------------------------------------------------------------- arg parsing

def _add_shared_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON config file")
    p.add_argument("--seed", type=int)
    p.add_argument("--backend", choices=["mock", "http"])
    p.add_argument("--endpoint", help="http backend endpoint URL")
    p.add_argument("--model", help="http backend model name")
    p.add_argument("--epsilon", type=float)
    p.add_argument("--mechanism", choices=["laplace", "gaussian"])
    p.add_argument("--delta", type=float)
    p.add_argument("--out", help="output directory")
    p.add_argument("--dataset", help="AGNews file path or mock:<N>")
    p.add_argument("--n-train", type=int, dest="n_train")
    p.add_argument("--n-test", type=int, dest="n_test")
    p.add_argument("--vocab-limit", type=int, dest="vocab_limit")
    p.add_argument("--no-cache", action="store_true")
    p.add_argument("--cache-dir", dest="cache_dir")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dpsynth",
        description="Privacy-preserving synthetic news text: generate, evaluate, sweep, audit.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_gen = sub.add_parser("generate", help="produce a noised synthetic corpus")
    _add_shared_flags(p_gen)
    p_gen.add_argument("--total-records", type=int, dest="total_records")
    p_gen.add_argument("--batch-size", type=int, dest="batch_size")
    p_gen.add_argument("--num-shots", type=int, dest="num_shots")

    p_eval = sub.add_parser("evaluate", help="score models on original vs synthetic")
    _add_shared_flags(p_eval)
    p_eval.add_argument("--synthetic", required=True, help="synthetic JSONL file")
    p_eval.add_argument("--models", help="comma list from mnb,svm,icl")
    p_eval.add_argument("--icl-shots", dest="icl_shots", help="comma list from 0,2,4")

    p_sweep = sub.add_parser("sweep", help="accuracy across epsilon values")
    _add_shared_flags(p_sweep)
    p_sweep.add_argument("--epsilons", help="comma list, e.g. 0,0.5,1,10")
    p_sweep.add_argument("--models", help="comma list from mnb,svm,icl")
    p_sweep.add_argument("--sweep-seeds", type=int, dest="sweep_seeds")
    p_sweep.add_argument("--fresh-generation", action="store_true",
                         dest="fresh_generation")
    p_sweep.add_argument("--total-records", type=int, dest="total_records")
    p_sweep.add_argument("--batch-size", type=int, dest="batch_size")

    p_audit = sub.add_parser("audit", help="membership-inference comparison")
    _add_shared_flags(p_audit)
    p_audit.add_argument("--synthetic", required=True, help="synthetic JSONL file")

    return parser


def _overrides_from_args(args: argparse.Namespace) -> dict:
    over: dict = {}
    simple = {
        "seed": "seed",
        "epsilon": "epsilon",
        "mechanism": "mechanism",
        "delta": "delta",
        "out": "output_dir",
        "dataset": "dataset_path",
        "n_train": "n_train",
        "n_test": "n_test",
        "vocab_limit": "vocab_limit",
        "cache_dir": "cache_dir",
        "sweep_seeds": "sweep_seeds",
    }
    for attr, key in simple.items():
        value = getattr(args, attr, None)
        if value is not None:
            over[key] = value

    backend: dict = {}
    if getattr(args, "backend", None):
        backend["kind"] = args.backend
    if getattr(args, "endpoint", None):
        backend["endpoint_url"] = args.endpoint
    if getattr(args, "model", None):
        backend["model_name"] = args.model
    if backend:
        over["backend"] = backend

    gen: dict = {}
    for attr in ("total_records", "batch_size", "num_shots"):
        value = getattr(args, attr, None)
        if value is not None:
            gen[attr] = value
    if gen:
        over["gen"] = gen

    if getattr(args, "no_cache", False):
        over["cache_enabled"] = False
    if getattr(args, "fresh_generation", False):
        over["fresh_generation_per_epsilon"] = True
    if getattr(args, "models", None):
        over["models"] = tuple(m.strip() for m in args.models.split(",") if m.strip())
    if getattr(args, "icl_shots", None):
        over["icl_shots"] = tuple(int(s) for s in args.icl_shots.split(",") if s.strip())
    if getattr(args, "epsilons", None):
        over["epsilons"] = tuple(float(e) for e in args.epsilons.split(",") if e.strip())
    return over


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        with stage("config"):
            config = load_config(args.config, _overrides_from_args(args))
        if args.command == "generate":
            cmd_generate(config)
        elif args.command == "evaluate":
            cmd_evaluate(config, args.synthetic)
        elif args.command == "sweep":
            cmd_sweep(config)
        else:
            cmd_audit(config, args.synthetic)
    except DpSynthError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


def console_entry() -> None:
    sys.exit(main())
