"""Snooping audit: overlap detection and declared-step rules."""

from __future__ import annotations

from dataclasses import replace

import pytest

from snoopbench.partitioner import (
    MODE_NONE,
    MODE_SNOOP,
    DatasetManifest,
    DeclaredSteps,
    build_partition,
    write_manifest,
)
from snoopbench.seeding import make_rng
from snoopbench.snoop_audit import (
    CATEGORY_OF_SUBCATEGORY,
    AuditFinding,
    audit_declared_steps,
    audit_embedding_overlap,
    audit_manifest,
    findings_to_json,
    has_violation,
    render_findings,
)


def _manifest(mode=MODE_NONE, emb=("p1", "p2", "p3"), tr=("t1", "t2"), va=("v1",),
              steps=DeclaredSteps()) -> DatasetManifest:
    return DatasetManifest(
        embedding_train_ids=frozenset(emb),
        classifier_train_ids=frozenset(tr),
        classifier_val_ids=frozenset(va),
        seed=1,
        snooping_mode=mode,
        declared_steps=steps,
    )


class TestEmbeddingOverlap:
    def test_snooped_manifest_flagged_with_full_count(self, small_corpus):
        p = build_partition(small_corpus, "CWE-121", seed=3, mode=MODE_SNOOP)
        finding = audit_embedding_overlap(p.manifest)
        assert finding is not None
        assert finding.severity == "violation"
        assert finding.category == "test" and finding.subcategory == "embeddings"
        assert finding.evidence["overlap_count"] == p.manifest.counts["classifier_total"]
        assert len(finding.evidence["sample_ids"]) <= 10

    def test_clean_manifest_passes(self, small_corpus):
        p = build_partition(small_corpus, "CWE-121", seed=3, mode=MODE_NONE)
        assert audit_embedding_overlap(p.manifest) is None

    def test_single_shared_id_counted(self):
        # set-intersection oracle: exactly one id in both sets
        m = _manifest(mode=MODE_SNOOP, emb=("t1", "v1", "t2", "x"), tr=("t1", "t2"), va=("v1",))
        shared = frozenset(("t1", "t2", "v1")) & m.embedding_train_ids
        assert len(shared) == 3
        one = _manifest(emb=("p1", "v1"), tr=("t1",), va=("v1",), mode=MODE_SNOOP)
        # bypass validation deliberately: hand-built manifest, one overlap only
        one = replace(one, snooping_mode=MODE_NONE)
        finding = audit_embedding_overlap(one)
        assert finding.evidence["overlap_count"] == 1
        assert finding.evidence["sample_ids"] == ["v1"]

    def test_monotonicity_adding_ids_never_clears_violation(self):
        m = _manifest(emb=("p1", "t1"))
        base = audit_embedding_overlap(m)
        assert base is not None
        grown = replace(m, embedding_train_ids=m.embedding_train_ids | {"z1", "z2"})
        grown_finding = audit_embedding_overlap(grown)
        assert grown_finding is not None
        assert grown_finding.evidence["overlap_count"] >= base.evidence["overlap_count"]

    def test_soundness_iff_over_partitioner_manifests(self, small_corpus):
        for seed in range(8):
            for mode in (MODE_NONE, MODE_SNOOP):
                p = build_partition(small_corpus, "CWE-121", seed=seed, mode=mode)
                finding = audit_embedding_overlap(p.manifest)
                assert (finding is not None) == (mode == MODE_SNOOP)

    def test_audit_is_read_only(self, small_corpus, tmp_path):
        p = build_partition(small_corpus, "CWE-121", seed=3, mode=MODE_SNOOP)
        path = tmp_path / "m.json"
        write_manifest(p.manifest, path)
        before = path.read_bytes()
        audit_manifest(p.manifest)
        assert path.read_bytes() == before


def oracle_declared_rules(steps: DeclaredSteps, max_age: float) -> list[tuple[str, str]]:
    """Independent rule-table evaluator: (subcategory, severity) pairs."""
    out = []
    if steps.feature_selection_scope == "all_samples":
        out.append(("preparatory_work", "violation"))
    if steps.used_kfold_for_tuning:
        out.append(("kfold_cv", "violation"))
    if steps.normalization_scope == "pre_split_global":
        out.append(("normalization", "violation"))
    if steps.time_dependency_note:
        out.append(("time_dependency", "warning"))
    if steps.dataset_age_years is not None and steps.dataset_age_years > max_age:
        out.append(("aging_dataset", "warning"))
    if steps.cherry_picking_note:
        out.append(("cherry_picking", "info"))
    for _ in steps.filter_rules:
        out.append(("survivorship_bias", "info"))
    return out


class TestDeclaredSteps:
    def test_baseline_declarations_one_info_no_violations(self):
        steps = DeclaredSteps(filter_rules=("token_length<=2048",))
        findings = audit_declared_steps(_manifest(steps=steps))
        assert not has_violation(findings)
        assert [f.subcategory for f in findings] == ["survivorship_bias"]
        assert findings[0].severity == "info"
        assert findings[0].evidence["filter_rule"] == "token_length<=2048"

    def test_kfold_flagged(self):
        steps = DeclaredSteps(used_kfold_for_tuning=True)
        findings = audit_declared_steps(_manifest(steps=steps))
        assert [(f.subcategory, f.severity) for f in findings] == [("kfold_cv", "violation")]

    def test_preparatory_and_normalization_flagged(self):
        steps = DeclaredSteps(
            feature_selection_scope="all_samples", normalization_scope="pre_split_global"
        )
        findings = audit_declared_steps(_manifest(steps=steps))
        assert {(f.subcategory, f.severity) for f in findings} == {
            ("preparatory_work", "violation"),
            ("normalization", "violation"),
        }

    def test_aging_threshold_configurable(self):
        steps = DeclaredSteps(dataset_age_years=7.0)
        assert any(
            f.subcategory == "aging_dataset"
            for f in audit_declared_steps(_manifest(steps=steps), max_dataset_age_years=5.0)
        )
        assert not audit_declared_steps(_manifest(steps=steps), max_dataset_age_years=10.0)

    def test_fuzzed_declarations_match_rule_table_oracle(self):
        rng = make_rng(55, "fuzz")
        scopes = ("preprocessing_only", "split_isolated", "all_samples")
        norms = ("none", "per_split", "pre_split_global")
        for _ in range(200):
            steps = DeclaredSteps(
                feature_selection_scope=scopes[int(rng.integers(0, 3))],
                used_kfold_for_tuning=bool(rng.integers(0, 2)),
                normalization_scope=norms[int(rng.integers(0, 3))],
                filter_rules=tuple(f"r{i}" for i in range(int(rng.integers(0, 4)))),
                dataset_age_years=(
                    float(rng.integers(0, 12)) if rng.integers(0, 2) else None
                ),
                time_dependency_note="td" if rng.integers(0, 2) else None,
                cherry_picking_note="cp" if rng.integers(0, 2) else None,
            )
            max_age = float(rng.integers(3, 9))
            got = [
                (f.subcategory, f.severity)
                for f in audit_declared_steps(_manifest(steps=steps), max_dataset_age_years=max_age)
            ]
            assert sorted(got) == sorted(oracle_declared_rules(steps, max_age))


class TestFindingType:
    def test_category_subcategory_pairs_enforced(self):
        with pytest.raises(ValueError, match="belongs to category"):
            AuditFinding(category="temporal", subcategory="embeddings", severity="violation")
        with pytest.raises(ValueError, match="unknown subcategory"):
            AuditFinding(category="test", subcategory="nonsense", severity="info")
        for sub, cat in CATEGORY_OF_SUBCATEGORY.items():
            AuditFinding(category=cat, subcategory=sub, severity="info")

    def test_renderings(self, small_corpus):
        p = build_partition(small_corpus, "CWE-121", seed=3, mode=MODE_SNOOP)
        findings = audit_manifest(p.manifest)
        text = render_findings(findings)
        assert "VIOLATION" in text and "embeddings" in text
        as_json = findings_to_json(findings)
        assert '"rule_table_version"' in as_json
        assert render_findings([]) == "clean: no findings\n"
