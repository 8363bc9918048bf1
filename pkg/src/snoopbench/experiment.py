"""Paired experiment grid and comparison reports.

For each optimizer configuration and embedding kind, two otherwise
identical runs are executed, differing only in whether the embedding
training set was contaminated with the classifier's train/validation
samples. Classifier train/val membership, weight init, batch order and
dropout draws are all shared across the pair, so per-metric deltas isolate
the snooping condition. Reports mirror the value-plus-parenthesized-delta
table convention, with a best-model summary per embedding kind.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import jsonschema

from . import __version__
from .classifier import (
    ClassifierConfig,
    EncodedDataset,
    LstmClassifier,
    MetricsRecord,
    OptimizerSpec,
    save_model,
    select_best_epoch,
    train,
)
from .embeddings import (
    KIND_SKIPGRAM,
    NATIVE_KINDS,
    EmbeddingModel,
    Word2VecConfig,
    export_external,
    import_external,
    train_word2vec,
)
from .errors import GridError, PairingError
from .ir_corpus import Corpus
from .partitioner import (
    MODE_NONE,
    MODE_SNOOP,
    Partition,
    build_partition,
    write_manifest,
)
from .seeding import RNG_ALGORITHM, derive_seed
from .tokenizer import Vocabulary, build_vocab, encode, tokenize

REPORT_SCHEMA_VERSION = 1

METRIC_FIELDS = ("loss", "accuracy", "precision", "recall", "f1")

# The seven hyperparameter settings of the reference study: one SGD run at
# lr 0.01, three SGD runs at lr 1e-4 sweeping momentum, and three Adam runs
# sweeping the learning rate.
PAPER_GRID: tuple[OptimizerSpec, ...] = (
    OptimizerSpec("sgd", 0.01, 0.01),
    OptimizerSpec("sgd", 0.0001, 0.01),
    OptimizerSpec("sgd", 0.0001, 0.001),
    OptimizerSpec("sgd", 0.0001, 0.0001),
    OptimizerSpec("adam", 0.01),
    OptimizerSpec("adam", 0.001),
    OptimizerSpec("adam", 0.0001),
)


@dataclass(frozen=True)
class ReportRow:
    embedding_kind: str
    config_label: str
    optimizer: OptimizerSpec
    baseline: MetricsRecord
    snooped: MetricsRecord

    def deltas(self) -> dict[str, float]:
        d: dict[str, float] = {"epoch": self.snooped.epoch - self.baseline.epoch}
        for m in METRIC_FIELDS:
            d[m] = getattr(self.snooped, m) - getattr(self.baseline, m)
        return d


@dataclass
class ComparisonReport:
    rows: list[ReportRow]
    best_models: dict[str, dict]
    environment: dict
    tool_version: str = __version__


REPORT_SCHEMA = {
    "type": "object",
    "required": ["schema_version", "tool_version", "environment", "rows", "best_models"],
    "additionalProperties": False,
    "properties": {
        "schema_version": {"type": "integer"},
        "tool_version": {"type": "string"},
        "environment": {"type": "object"},
        "rows": {
            "type": "array",
            "items": {
                "type": "object",
                "required": [
                    "embedding_kind",
                    "config_label",
                    "optimizer",
                    "baseline",
                    "snooped",
                    "deltas",
                ],
                "additionalProperties": False,
                "properties": {
                    "embedding_kind": {"type": "string"},
                    "config_label": {"type": "string"},
                    "optimizer": {
                        "type": "object",
                        "required": ["kind", "lr", "momentum"],
                        "properties": {
                            "kind": {"enum": ["sgd", "adam"]},
                            "lr": {"type": "number"},
                            "momentum": {"type": "number"},
                        },
                    },
                    "baseline": {"$ref": "#/$defs/metrics"},
                    "snooped": {"$ref": "#/$defs/metrics"},
                    "deltas": {
                        "type": "object",
                        "required": ["epoch", *METRIC_FIELDS],
                    },
                },
            },
        },
        "best_models": {
            "type": "object",
            "additionalProperties": {
                "type": "object",
                "required": ["baseline_row", "snooped_row", "baseline", "snooped"],
                "properties": {
                    "baseline_row": {"type": "integer"},
                    "snooped_row": {"type": "integer"},
                    "baseline": {"type": "object"},
                    "snooped": {"type": "object"},
                },
            },
        },
    },
    "$defs": {
        "metrics": {
            "type": "object",
            "required": ["epoch", "loss", "accuracy", "precision", "recall", "f1", "confusion"],
            "properties": {
                "epoch": {"type": "integer"},
                "loss": {"type": "number"},
                "accuracy": {"type": "number", "minimum": 0, "maximum": 1},
                "precision": {"type": "number", "minimum": 0, "maximum": 1},
                "recall": {"type": "number", "minimum": 0, "maximum": 1},
                "f1": {"type": "number", "minimum": 0, "maximum": 1},
                "confusion": {
                    "type": "object",
                    "required": ["tp", "fp", "fn", "tn"],
                },
            },
        }
    },
}


def validate_report(doc: dict) -> None:
    jsonschema.validate(doc, REPORT_SCHEMA)


# ---------------------------------------------------------------------------
# Grid execution
# ---------------------------------------------------------------------------

@dataclass
class _ModeContext:
    """Everything one snooping mode needs to train classifiers."""

    mode: str
    partition: Partition
    vocab: Vocabulary
    embeddings: dict[str, EmbeddingModel]
    train_set: EncodedDataset
    val_set: EncodedDataset


def run_grid(
    corpus: Corpus,
    embedding_kinds: tuple[str, ...] = (KIND_SKIPGRAM,),
    configs: tuple[OptimizerSpec, ...] = PAPER_GRID,
    master_seed: int = 0,
    cwe: str = "CWE-121",
    modes: tuple[str, ...] = (MODE_NONE, MODE_SNOOP),
    out_dir: str | Path | None = None,
    jobs: int = 1,
    word2vec: dict | None = None,
    classifier: dict | None = None,
    external_paths: dict[str, str | Path] | None = None,
) -> ComparisonReport:
    """Run the paired grid and assemble a comparison report.

    `word2vec` and `classifier` override fields of the respective config
    dataclasses (epochs, dim, ...). For external embedding kinds,
    `external_paths` maps mode name to the file to import for that mode.
    Both modes must be requested for delta rows; a single-mode run still
    produces artifacts on disk but the report needs the pair.
    """
    if set(modes) != {MODE_NONE, MODE_SNOOP}:
        raise GridError(f"paired report needs modes {MODE_NONE} and {MODE_SNOOP}")
    out = Path(out_dir) if out_dir is not None else None
    env = {
        "master_seed": master_seed,
        "corpus_digest": corpus.digest(),
        "corpus_size": len(corpus),
        "cwe": cwe,
        "embedding_kinds": list(embedding_kinds),
        "config_labels": [c.label() for c in configs],
        "modes": list(modes),
        "rng_algorithm": RNG_ALGORITHM,
        "word2vec_overrides": dict(word2vec or {}),
        "classifier_overrides": dict(classifier or {}),
    }
    if out is not None:
        for sub in ("manifests", "embeddings", "models", "metrics"):
            (out / sub).mkdir(parents=True, exist_ok=True)
        # environment echo goes to disk before any computation output
        (out / "env.json").write_text(
            json.dumps({"tool_version": __version__, **env}, sort_keys=True, indent=2) + "\n",
            encoding="utf-8",
        )

    contexts = {
        mode: _prepare_mode(
            corpus, cwe, master_seed, mode, embedding_kinds, out, word2vec, external_paths
        )
        for mode in (MODE_NONE, MODE_SNOOP)
    }
    _check_pairing(contexts[MODE_NONE].partition, contexts[MODE_SNOOP].partition)

    cells = [
        (kind, spec)
        for kind in embedding_kinds
        for spec in configs
    ]

    def run_cell(cell) -> ReportRow:
        kind, spec = cell
        records: dict[str, MetricsRecord] = {}
        for mode in (MODE_NONE, MODE_SNOOP):
            ctx = contexts[mode]
            try:
                records[mode] = _train_cell(ctx, kind, spec, master_seed, classifier, out)
            except Exception as exc:
                raise GridError(
                    f"grid cell (kind={kind}, config={spec.label()}, mode={mode}) failed: {exc}"
                ) from exc
        return ReportRow(
            embedding_kind=kind,
            config_label=spec.label(),
            optimizer=spec,
            baseline=records[MODE_NONE],
            snooped=records[MODE_SNOOP],
        )

    if jobs > 1 and len(cells) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(run_cell, cells))
    else:
        rows = [run_cell(c) for c in cells]

    best_models: dict[str, dict] = {}
    for kind in embedding_kinds:
        kind_rows = [(i, r) for i, r in enumerate(rows) if r.embedding_kind == kind]
        if not kind_rows:
            continue
        bi, base_best = min(kind_rows, key=lambda ir: (-ir[1].baseline.f1, ir[1].baseline.loss, ir[0]))
        si, snoop_best = min(kind_rows, key=lambda ir: (-ir[1].snooped.f1, ir[1].snooped.loss, ir[0]))
        best_models[kind] = {
            "baseline_row": bi,
            "snooped_row": si,
            "baseline": {"accuracy": base_best.baseline.accuracy, "f1": base_best.baseline.f1},
            "snooped": {"accuracy": snoop_best.snooped.accuracy, "f1": snoop_best.snooped.f1},
        }

    report = ComparisonReport(rows=rows, best_models=best_models, environment=env)
    if out is not None:
        (out / "report.json").write_text(render(report, "json"), encoding="utf-8")
        (out / "report.md").write_text(render(report, "markdown"), encoding="utf-8")
    return report


def _prepare_mode(
    corpus, cwe, master_seed, mode, embedding_kinds, out, word2vec, external_paths
) -> _ModeContext:
    part = build_partition(corpus, cwe, seed=derive_seed(master_seed, "partition"), mode=mode)
    if out is not None:
        write_manifest(part.manifest, out / "manifests" / f"{mode}.json")
    sentences = [tokenize(f.normalized_text) for f in part.embedding_train]
    vocab = build_vocab(sentences)
    encoded = [encode(s, vocab) for s in sentences]
    embeddings: dict[str, EmbeddingModel] = {}
    for kind in embedding_kinds:
        if kind in NATIVE_KINDS:
            overrides = dict(word2vec or {})
            # the seed is mode-independent so composition is the only change
            cfg = Word2VecConfig(
                kind=kind, seed=derive_seed(master_seed, f"w2v:{kind}"), **overrides
            )
            model = train_word2vec(encoded, vocab, cfg)
            if out is not None:
                export_external(model, out / "embeddings" / f"{kind}_{mode}.vec")
        else:
            paths = external_paths or {}
            if mode not in paths:
                raise GridError(f"external embedding kind {kind} needs a path for mode {mode}")
            model = import_external(paths[mode], kind)
        embeddings[kind] = model
    train_set = EncodedDataset.from_corpus(part.classifier_train, vocab)
    val_set = EncodedDataset.from_corpus(part.classifier_val, vocab)
    return _ModeContext(
        mode=mode,
        partition=part,
        vocab=vocab,
        embeddings=embeddings,
        train_set=train_set,
        val_set=val_set,
    )


def _train_cell(ctx: _ModeContext, kind, spec, master_seed, classifier_overrides, out) -> MetricsRecord:
    overrides = dict(classifier_overrides or {})
    config = ClassifierConfig(
        optimizer=spec,
        seed=derive_seed(master_seed, f"clf:{kind}:{spec.label()}"),
        **overrides,
    )
    model = LstmClassifier(ctx.embeddings[kind], config, vocab=ctx.vocab)
    records = train(model, ctx.train_set, ctx.val_set, manifest=ctx.partition.manifest)
    if out is not None:
        stem = f"{kind}_{ctx.mode}_{spec.label()}"
        with (out / "metrics" / f"{stem}.jsonl").open("w", encoding="utf-8") as fh:
            for r in records:
                fh.write(json.dumps(r.to_dict(), sort_keys=True) + "\n")
        save_model(model, out / "models" / f"{stem}.npz")
    return select_best_epoch(records)


def _check_pairing(p_none: Partition, p_snoop: Partition) -> None:
    if (
        p_none.manifest.classifier_train_ids != p_snoop.manifest.classifier_train_ids
        or p_none.manifest.classifier_val_ids != p_snoop.manifest.classifier_val_ids
    ):
        raise PairingError("paired modes disagree on classifier train/val membership")


# ---------------------------------------------------------------------------
# Serialization / rendering
# ---------------------------------------------------------------------------

def report_to_doc(report: ComparisonReport) -> dict:
    return {
        "schema_version": REPORT_SCHEMA_VERSION,
        "tool_version": report.tool_version,
        "environment": report.environment,
        "rows": [
            {
                "embedding_kind": r.embedding_kind,
                "config_label": r.config_label,
                "optimizer": {
                    "kind": r.optimizer.kind,
                    "lr": r.optimizer.lr,
                    "momentum": r.optimizer.momentum,
                },
                "baseline": r.baseline.to_dict(),
                "snooped": r.snooped.to_dict(),
                "deltas": r.deltas(),
            }
            for r in report.rows
        ],
        "best_models": report.best_models,
    }


def report_from_doc(doc: dict) -> ComparisonReport:
    validate_report(doc)
    rows = [
        ReportRow(
            embedding_kind=rd["embedding_kind"],
            config_label=rd["config_label"],
            optimizer=OptimizerSpec(
                rd["optimizer"]["kind"], rd["optimizer"]["lr"], rd["optimizer"]["momentum"]
            ),
            baseline=MetricsRecord.from_dict(rd["baseline"]),
            snooped=MetricsRecord.from_dict(rd["snooped"]),
        )
        for rd in doc["rows"]
    ]
    return ComparisonReport(
        rows=rows,
        best_models=doc["best_models"],
        environment=doc["environment"],
        tool_version=doc["tool_version"],
    )


def fmt_percent(value: float, delta: float | None = None) -> str:
    """Percent to one decimal; delta in parens, signed; exact tie as ±0%."""
    s = f"{value * 100:.1f}%"
    if delta is None:
        return s
    if delta == 0:
        return f"{s} (±0%)"
    return f"{s} ({delta * 100:+.1f}%)"


def fmt_loss(value: float, delta: float | None = None) -> str:
    s = f"{value:.4f}"
    if delta is None:
        return s
    if delta == 0:
        return f"{s} (±0)"
    return f"{s} ({delta:+.4f})"


def fmt_epoch(epoch: int, delta: int | None = None) -> str:
    if delta is None:
        return str(epoch)
    if delta == 0:
        return f"{epoch}(±0)"
    return f"{epoch}({delta:+d})"


def render(report: ComparisonReport, fmt: str = "json") -> str:
    """Render as canonical JSON or a markdown document.

    Markdown cells show the snooped value followed by the parenthesized
    signed delta against the baseline: losses to four decimals,
    percentages to one.
    """
    if fmt == "json":
        return json.dumps(report_to_doc(report), sort_keys=True, indent=2) + "\n"
    if fmt != "markdown":
        raise ValueError(f"unknown format: {fmt!r}")
    lines = [
        "# Snooping comparison report",
        "",
        f"tool {report.tool_version}, master seed {report.environment.get('master_seed')}, "
        f"corpus {str(report.environment.get('corpus_digest'))[:12]}",
        "",
    ]
    for kind in dict.fromkeys(r.embedding_kind for r in report.rows):
        lines.append(f"## {kind}: metrics with snooping (delta vs without)")
        lines.append("")
        lines.append("| Hyperparameters | Epoch | Loss | Accuracy | Precision | Recall | F1-Score |")
        lines.append("|---|---|---|---|---|---|---|")
        for r in report.rows:
            if r.embedding_kind != kind:
                continue
            d = r.deltas()
            lines.append(
                "| {cfg} | {ep} | {loss} | {acc} | {prec} | {rec} | {f1} |".format(
                    cfg=r.config_label,
                    ep=fmt_epoch(r.snooped.epoch, int(d["epoch"])),
                    loss=fmt_loss(r.snooped.loss, d["loss"]),
                    acc=fmt_percent(r.snooped.accuracy, d["accuracy"]),
                    prec=fmt_percent(r.snooped.precision, d["precision"]),
                    rec=fmt_percent(r.snooped.recall, d["recall"]),
                    f1=fmt_percent(r.snooped.f1, d["f1"]),
                )
            )
        lines.append("")
    if report.best_models:
        lines.append("## Best performing models")
        lines.append("")
        lines.append("| Model | Accuracy (without) | F1 (without) | Accuracy (with) | F1 (with) |")
        lines.append("|---|---|---|---|---|")
        for kind, entry in report.best_models.items():
            lines.append(
                "| {kind} | {ab} | {fb} | {as_} | {fs} |".format(
                    kind=kind,
                    ab=fmt_percent(entry["baseline"]["accuracy"]),
                    fb=fmt_percent(entry["baseline"]["f1"]),
                    as_=fmt_percent(entry["snooped"]["accuracy"]),
                    fs=fmt_percent(entry["snooped"]["f1"]),
                )
            )
        lines.append("")
    return "\n".join(lines)
