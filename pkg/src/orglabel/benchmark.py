"""Cross-validated benchmark of every model over one shared fold plan.

Each model trains on nine folds and is scored on the held-out fold, for all
ten rotations of the same stratified plan. The designated champion row is
then compared against every other row with one-tailed paired t-tests per
metric, and the report renders as JSON (full per-fold detail plus the plan
hash) and as a Markdown table with per-column bold best means and
significance stars.
"""

from __future__ import annotations

import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, asdict
from pathlib import Path

import numpy as np

from .baselines import BASELINE_KINDS, bow_matrix, make_baseline
from .corpus import GoldDataset
from .embeddings import EmbeddingTable, build_matrix
from .errors import TrainingDivergedError
from .evaluation import METRIC_NAMES, FoldPlan, Metrics, evaluate_predictions, stratified_kfold
from .nn import MODEL_KINDS as DEEP_KINDS
from .nn.classifier import SequenceClassifier
from .stats import TTestResult, paired_ttest, significance_stars
from .textprep import build_vocab, encode_corpus

MODEL_ORDER = ("nb", "logreg", "dtree", "svm", "rnn", "gru", "lstm", "bilstm")

DISPLAY_NAMES = {
    "nb": "Naive Bayes",
    "logreg": "Logistic Regression",
    "dtree": "Decision Tree",
    "svm": "SVM",
    "rnn": "RNN",
    "gru": "GRU",
    "lstm": "LSTM",
    "bilstm": "BiLSTM",
}

GROUPS = {
    **{k: "Classical Machine Learning" for k in BASELINE_KINDS},
    **{k: "Deep Learning" for k in DEEP_KINDS},
}

COLUMN_TITLES = {"accuracy": "Accuracy", "f1": "F1-Score",
                 "precision": "Precision", "recall": "Recall"}

AVERAGING_NOTE = (
    "accuracy is micro-averaged; precision, recall, and F1 are per-class "
    "one-vs-rest values macro-averaged over classes present in the gold fold"
)


@dataclass
class BenchmarkConfig:
    folds: int = 10
    seed: int = 0
    maxlen: int = 200
    min_freq: int = 2
    champion: str = "bilstm"
    jobs: int = 1
    hidden_dim: int = 32
    embedding_dim: int = 50
    trainable_embeddings: bool = True
    epochs: int = 10
    batch_size: int = 32
    learning_rate: float = 1e-3
    optimizer: str = "adam"
    clip_norm: float = 5.0
    patience: int = 0
    model_overrides: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class ModelRow:
    row_id: str
    kind: str
    fold_metrics: list[Metrics] = field(default_factory=list)
    failed: bool = False
    error: str = ""

    @property
    def display(self) -> str:
        return DISPLAY_NAMES[self.kind]

    @property
    def group(self) -> str:
        return GROUPS[self.kind]

    def mean(self, metric: str) -> float:
        return float(np.mean([m.by_name(metric) for m in self.fold_metrics]))

    def scores(self, metric: str) -> list[float]:
        return [m.by_name(metric) for m in self.fold_metrics]


@dataclass
class BenchmarkReport:
    rows: list[ModelRow]
    ttests: dict[str, dict[str, TTestResult]]
    champion: str
    plan_hash: str
    config: BenchmarkConfig
    embedding_coverage: float

    def row(self, row_id: str) -> ModelRow:
        for r in self.rows:
            if r.row_id == row_id:
                return r
        raise KeyError(row_id)

    def to_json_dict(self) -> dict:
        def num(x):
            if isinstance(x, float) and not np.isfinite(x):
                return "inf" if x > 0 else "-inf"
            return x

        models = []
        for r in self.rows:
            entry = {
                "row_id": r.row_id,
                "kind": r.kind,
                "display": r.display,
                "group": r.group,
                "failed": r.failed,
            }
            if r.failed:
                entry["error"] = r.error
            else:
                entry["folds"] = [m.to_dict() for m in r.fold_metrics]
                entry["mean"] = {
                    name: r.mean(name) for name in METRIC_NAMES
                }
            models.append(entry)
        tests = {
            other: {
                metric: {
                    "t": num(res.t),
                    "p": res.p,
                    "stars": significance_stars(res.p),
                }
                for metric, res in by_metric.items()
            }
            for other, by_metric in self.ttests.items()
        }
        return {
            "champion": self.champion,
            "plan_hash": self.plan_hash,
            "averaging": AVERAGING_NOTE,
            "embedding_coverage": self.embedding_coverage,
            "config": self.config.to_dict(),
            "models": models,
            "ttests": tests,
        }


def _derived_seed(seed: int, model_pos: int, fold: int) -> int:
    return int(np.random.SeedSequence([seed, model_pos, fold]).generate_state(1)[0])


def _train_eval_fold(kind, row_seed, train_idx, test_idx, data, config, overrides):
    labels = data["labels"]
    k = data["num_classes"]
    if kind in BASELINE_KINDS:
        bow = data["bow"]
        model = make_baseline(kind, seed=row_seed, num_classes=k, **overrides)
        model.fit(bow[train_idx], labels[train_idx])
        preds = model.predict(bow[test_idx])
    else:
        ids, lengths = data["ids"], data["lengths"]
        params = dict(
            kind=kind,
            hidden_dim=config.hidden_dim,
            epochs=config.epochs,
            batch_size=config.batch_size,
            learning_rate=config.learning_rate,
            optimizer=config.optimizer,
            clip_norm=config.clip_norm,
            patience=config.patience,
            seed=row_seed,
            embedding_init=data["embedding"],
            trainable_embeddings=config.trainable_embeddings,
            num_classes=k,
        )
        params.update(overrides)
        model = SequenceClassifier(**params)
        model.fit(ids[train_idx], labels[train_idx], lengths=lengths[train_idx])
        preds = model.predict(ids[test_idx], lengths=lengths[test_idx])
    return evaluate_predictions(labels[test_idx], preds, k)


def _job(payload):
    row_pos, fold, args = payload
    try:
        return row_pos, fold, _train_eval_fold(*args), ""
    except TrainingDivergedError as exc:
        return row_pos, fold, None, str(exc)


def prepare_dataset(dataset: GoldDataset, config: BenchmarkConfig,
                    embedding_table: EmbeddingTable | None = None):
    """Vocabulary, encodings, features, and the shared embedding init."""
    tokens = dataset.token_lists()
    vocab = build_vocab(tokens, min_freq=config.min_freq)
    ids, lengths = encode_corpus(tokens, vocab, maxlen=config.maxlen)
    bow = bow_matrix(tokens, vocab)
    embedding = build_matrix(
        vocab,
        embedding_table,
        seed=config.seed,
        dim=None if embedding_table is not None else config.embedding_dim,
        trainable=config.trainable_embeddings,
    )
    labels = np.asarray(dataset.label_indices(), dtype=np.int64)
    data = {
        "ids": ids,
        "lengths": lengths,
        "bow": bow,
        "labels": labels,
        "num_classes": len(dataset.class_order),
        "embedding": embedding,
    }
    return vocab, data


def _row_ids(models) -> list[str]:
    seen: dict[str, int] = {}
    out = []
    for kind in models:
        if kind not in MODEL_ORDER:
            raise ValueError(f"unknown model kind {kind!r}")
        seen[kind] = seen.get(kind, 0) + 1
        out.append(kind if seen[kind] == 1 else f"{kind}-{seen[kind]}")
    return out


def run_benchmark(
    dataset: GoldDataset,
    models=MODEL_ORDER,
    config: BenchmarkConfig | None = None,
    embedding_table: EmbeddingTable | None = None,
) -> BenchmarkReport:
    """Train and score every model on one shared stratified fold plan."""
    config = config or BenchmarkConfig()
    models = list(models)
    if not models:
        raise ValueError("model list is empty")
    row_ids = _row_ids(models)

    champion = config.champion
    if champion not in row_ids:
        matches = [rid for rid, kind in zip(row_ids, models) if kind == champion]
        if not matches:
            raise ValueError(
                f"champion {champion!r} is not among the benchmark models"
            )
        champion = matches[0]

    vocab, data = prepare_dataset(dataset, config, embedding_table)
    plan = stratified_kfold(data["labels"], k=config.folds, seed=config.seed)

    jobs = []
    for row_pos, kind in enumerate(models):
        overrides = config.model_overrides.get(row_ids[row_pos], {})
        for fold in range(plan.k):
            args = (
                kind,
                _derived_seed(config.seed, row_pos, fold),
                plan.train_indices(fold),
                plan.test_indices(fold),
                data,
                config,
                overrides,
            )
            jobs.append((row_pos, fold, args))

    rows = [ModelRow(row_id=row_ids[i], kind=kind) for i, kind in enumerate(models)]
    results: dict[tuple[int, int], tuple[Metrics | None, str]] = {}
    if config.jobs > 1:
        with ProcessPoolExecutor(max_workers=config.jobs) as pool:
            for row_pos, fold, metrics, error in pool.map(_job, jobs):
                results[(row_pos, fold)] = (metrics, error)
    else:
        for payload in jobs:
            row_pos, fold, metrics, error = _job(payload)
            results[(row_pos, fold)] = (metrics, error)

    for row_pos, row in enumerate(rows):
        for fold in range(plan.k):
            metrics, error = results[(row_pos, fold)]
            if metrics is None:
                row.failed = True
                row.error = error
                row.fold_metrics = []
                break
            row.fold_metrics.append(metrics)

    champ_row = next(r for r in rows if r.row_id == champion)
    ttests: dict[str, dict[str, TTestResult]] = {}
    if not champ_row.failed:
        for row in rows:
            if row.row_id == champion or row.failed:
                continue
            ttests[row.row_id] = {
                metric: paired_ttest(champ_row.scores(metric), row.scores(metric))
                for metric in METRIC_NAMES
            }

    return BenchmarkReport(
        rows=rows,
        ttests=ttests,
        champion=champion,
        plan_hash=plan.content_hash(),
        config=config,
        embedding_coverage=data["embedding"].coverage,
    )


def render_markdown(report: BenchmarkReport) -> str:
    """Benchmark table: grouped rows, bold best per column, star suffixes."""
    best = {}
    for metric in METRIC_NAMES:
        values = [r.mean(metric) for r in report.rows if not r.failed]
        best[metric] = max(values) if values else None

    def cell(row: ModelRow, metric: str) -> str:
        if row.failed:
            return "failed"
        text = f"{100.0 * row.mean(metric):.2f}%"
        if row.mean(metric) == best[metric]:
            text = f"**{text}**"
        if row.row_id in report.ttests:
            stars = significance_stars(report.ttests[row.row_id][metric].p)
            if stars:
                text += f" {stars}"
        return text

    lines = [
        "# Benchmark Report",
        "",
        f"Champion: {report.row(report.champion).display} "
        f"({report.champion}); fold plan {report.plan_hash[:12]}; "
        f"seed {report.config.seed}.",
        "",
        f"Averaging: {AVERAGING_NOTE}.",
        "",
        "Stars mark one-tailed paired t-tests of the champion against each "
        "row: * p < 0.05, ** p < 0.01, *** p < 0.001.",
        "",
        "| Type | Model | Accuracy | F1-Score | Precision | Recall |",
        "| --- | --- | ---: | ---: | ---: | ---: |",
    ]
    previous_group = None
    for row in report.rows:
        group = row.group if row.group != previous_group else ""
        previous_group = row.group
        cells = " | ".join(cell(row, metric) for metric in ("accuracy", "f1", "precision", "recall"))
        suffix = f" (failed: {row.error})" if row.failed else ""
        lines.append(f"| {group} | {row.display}{suffix} | {cells} |")
    return "\n".join(lines) + "\n"


def write_reports(report: BenchmarkReport, out_dir) -> tuple[Path, Path]:
    """Write report.json and report.md; byte-stable for a fixed config."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    json_path = out_dir / "report.json"
    md_path = out_dir / "report.md"
    json_path.write_text(
        json.dumps(report.to_json_dict(), sort_keys=True, indent=2) + "\n",
        encoding="utf-8",
    )
    md_path.write_text(render_markdown(report), encoding="utf-8")
    return json_path, md_path
