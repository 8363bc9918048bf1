"""Data-snooping audit over dataset manifests.

Embedding overlap is detected from the manifest id sets; the remaining
subcategories are judged from the declared pipeline metadata. The rule
table below is versioned so the policy is diffable: each subcategory has a
fixed parent category and severity.

    test:      preparatory_work, kfold_cv, normalization, embeddings
    temporal:  time_dependency, aging_dataset
    selective: cherry_picking, survivorship_bias
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any

from .partitioner import (
    DatasetManifest,
    FEATURE_SCOPE_ALL,
    NORMALIZATION_GLOBAL,
)

RULE_TABLE_VERSION = 1

SEVERITY_VIOLATION = "violation"
SEVERITY_WARNING = "warning"
SEVERITY_INFO = "info"

CATEGORY_OF_SUBCATEGORY = {
    "preparatory_work": "test",
    "kfold_cv": "test",
    "normalization": "test",
    "embeddings": "test",
    "time_dependency": "temporal",
    "aging_dataset": "temporal",
    "cherry_picking": "selective",
    "survivorship_bias": "selective",
}

DEFAULT_MAX_DATASET_AGE_YEARS = 5.0

_EVIDENCE_ID_CAP = 10


@dataclass(frozen=True)
class AuditFinding:
    category: str
    subcategory: str
    severity: str
    evidence: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        expected = CATEGORY_OF_SUBCATEGORY.get(self.subcategory)
        if expected is None:
            raise ValueError(f"unknown subcategory: {self.subcategory!r}")
        if self.category != expected:
            raise ValueError(
                f"subcategory {self.subcategory} belongs to category "
                f"{expected}, not {self.category}"
            )
        if self.severity not in (SEVERITY_VIOLATION, SEVERITY_WARNING, SEVERITY_INFO):
            raise ValueError(f"unknown severity: {self.severity!r}")


def _finding(subcategory: str, severity: str, evidence: dict[str, Any]) -> AuditFinding:
    return AuditFinding(
        category=CATEGORY_OF_SUBCATEGORY[subcategory],
        subcategory=subcategory,
        severity=severity,
        evidence=evidence,
    )


def audit_embedding_overlap(manifest: DatasetManifest) -> AuditFinding | None:
    """Flag any classifier sample that also trained the embedding model.

    Fully automated: computed from the manifest id sets, so it catches
    overlap regardless of what the pipeline declared about itself.
    """
    overlap = manifest.embedding_train_ids & manifest.classifier_ids()
    if not overlap:
        return None
    return _finding(
        "embeddings",
        SEVERITY_VIOLATION,
        {
            "overlap_count": len(overlap),
            "sample_ids": sorted(overlap)[:_EVIDENCE_ID_CAP],
        },
    )


def audit_declared_steps(
    manifest: DatasetManifest,
    max_dataset_age_years: float = DEFAULT_MAX_DATASET_AGE_YEARS,
) -> list[AuditFinding]:
    """Evaluate the declared-metadata rules in rule-table order."""
    steps = manifest.declared_steps
    findings: list[AuditFinding] = []
    if steps.feature_selection_scope == FEATURE_SCOPE_ALL:
        findings.append(
            _finding(
                "preparatory_work",
                SEVERITY_VIOLATION,
                {"feature_selection_scope": steps.feature_selection_scope},
            )
        )
    if steps.used_kfold_for_tuning:
        findings.append(
            _finding("kfold_cv", SEVERITY_VIOLATION, {"used_kfold_for_tuning": True})
        )
    if steps.normalization_scope == NORMALIZATION_GLOBAL:
        findings.append(
            _finding(
                "normalization",
                SEVERITY_VIOLATION,
                {"normalization_scope": steps.normalization_scope},
            )
        )
    if steps.time_dependency_note:
        findings.append(
            _finding(
                "time_dependency",
                SEVERITY_WARNING,
                {"note": steps.time_dependency_note},
            )
        )
    if (
        steps.dataset_age_years is not None
        and steps.dataset_age_years > max_dataset_age_years
    ):
        findings.append(
            _finding(
                "aging_dataset",
                SEVERITY_WARNING,
                {
                    "dataset_age_years": steps.dataset_age_years,
                    "threshold_years": max_dataset_age_years,
                },
            )
        )
    if steps.cherry_picking_note:
        findings.append(
            _finding(
                "cherry_picking",
                SEVERITY_INFO,
                {"note": steps.cherry_picking_note},
            )
        )
    for rule in steps.filter_rules:
        findings.append(
            _finding("survivorship_bias", SEVERITY_INFO, {"filter_rule": rule})
        )
    return findings


def audit_manifest(
    manifest: DatasetManifest,
    max_dataset_age_years: float = DEFAULT_MAX_DATASET_AGE_YEARS,
) -> list[AuditFinding]:
    """Run every audit; read-only."""
    findings: list[AuditFinding] = []
    overlap = audit_embedding_overlap(manifest)
    if overlap is not None:
        findings.append(overlap)
    findings.extend(audit_declared_steps(manifest, max_dataset_age_years))
    return findings


def has_violation(findings: list[AuditFinding]) -> bool:
    return any(f.severity == SEVERITY_VIOLATION for f in findings)


def findings_to_json(findings: list[AuditFinding]) -> str:
    doc = {
        "rule_table_version": RULE_TABLE_VERSION,
        "findings": [
            {
                "category": f.category,
                "subcategory": f.subcategory,
                "severity": f.severity,
                "evidence": f.evidence,
            }
            for f in findings
        ],
    }
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def render_findings(findings: list[AuditFinding]) -> str:
    """Human-readable report, one line per finding."""
    if not findings:
        return "clean: no findings\n"
    lines = []
    for f in findings:
        detail = ", ".join(f"{k}={v}" for k, v in sorted(f.evidence.items()))
        lines.append(f"[{f.severity.upper():9s}] {f.category}/{f.subcategory}: {detail}")
    n_viol = sum(1 for f in findings if f.severity == SEVERITY_VIOLATION)
    lines.append(f"{len(findings)} finding(s), {n_viol} violation(s)")
    return "\n".join(lines) + "\n"
