"""Synthetic corpus generation: counts, determinism, planted signal."""

from __future__ import annotations

import pytest

from snoopbench.ir_corpus import (
    LABEL_CLEAN,
    LABEL_VULNERABLE,
    extract_functions,
    ingest_dir,
    normalize_function,
)
from snoopbench.synth_corpus import SynthSpec, generate, write_ll_files
from snoopbench.tokenizer import tokenize


class TestSpec:
    def test_validation(self):
        with pytest.raises(ValueError):
            SynthSpec(n_pool=-1, n_pairs=1)
        with pytest.raises(ValueError):
            SynthSpec(n_pool=1, n_pairs=0)
        with pytest.raises(ValueError):
            SynthSpec(n_pool=1, n_pairs=1, signal_strength=1.5)
        with pytest.raises(ValueError):
            SynthSpec(n_pool=1, n_pairs=1, vuln_pattern="nonsense")


class TestGenerate:
    def test_counts(self):
        corpus = generate(SynthSpec(n_pool=7, n_pairs=2))
        assert len(corpus) == 11
        labeled = [f for f in corpus if f.label != "unlabeled"]
        assert len(labeled) == 4
        assert sum(1 for f in labeled if f.label == LABEL_VULNERABLE) == 2
        assert all(f.cwe == "CWE-121" for f in labeled)

    def test_extra_clean_unpaired(self):
        corpus = generate(SynthSpec(n_pool=3, n_pairs=2, n_extra_clean=3))
        labels = [f.label for f in corpus if f.label != "unlabeled"]
        assert labels.count(LABEL_CLEAN) == 5
        assert labels.count(LABEL_VULNERABLE) == 2

    def test_same_seed_byte_identical(self):
        a = generate(SynthSpec(n_pool=8, n_pairs=3, signal_strength=0.5, seed=21))
        b = generate(SynthSpec(n_pool=8, n_pairs=3, signal_strength=0.5, seed=21))
        assert [f.raw_text for f in a] == [f.raw_text for f in b]
        assert [f.normalized_text for f in a] == [f.normalized_text for f in b]

    def test_all_ids_distinct(self):
        corpus = generate(SynthSpec(n_pool=50, n_pairs=20, n_extra_clean=10, seed=4))
        assert len(corpus.ids()) == len(corpus)

    def test_signal_one_separable_by_copy_bigram(self):
        # rule oracle: an unguarded copy call shows up as the adjacent
        # tokens '@strcpy' '('
        corpus = generate(SynthSpec(n_pool=10, n_pairs=25, signal_strength=1.0, seed=3))

        def rule(f) -> bool:
            toks = tokenize(f.normalized_text)
            return any(
                a == "@strcpy" and b == "(" for a, b in zip(toks, toks[1:])
            )

        labeled = [f for f in corpus if f.label != "unlabeled"]
        correct = sum(1 for f in labeled if rule(f) == (f.label == LABEL_VULNERABLE))
        assert correct == len(labeled)

    def test_pair_diff_confined_to_copy_region(self):
        corpus = generate(SynthSpec(n_pool=0, n_pairs=6, signal_strength=0.5, seed=8))
        labeled = [f for f in corpus if f.label != "unlabeled"]
        for vuln, clean in zip(labeled[0::2], labeled[1::2]):
            v_lines = vuln.normalized_text.splitlines()
            c_lines = clean.normalized_text.splitlines()
            assert len(v_lines) == len(c_lines)
            differing = [
                i for i, (a, b) in enumerate(zip(v_lines, c_lines)) if a != b
            ]
            assert len(differing) == 1
            assert "@strcpy" in v_lines[differing[0]]
            assert "@strncpy" in c_lines[differing[0]]

    def test_pipeline_survival_and_idempotence(self):
        corpus = generate(SynthSpec(n_pool=6, n_pairs=3, signal_strength=0.6, seed=12))
        for f in corpus:
            extracted = extract_functions(f.raw_text)
            assert len(extracted) == 1
            name, raw = extracted[0]
            assert name == f.source_name
            norm = normalize_function(raw)
            assert norm == f.normalized_text
            assert normalize_function(norm) == norm

    def test_ll_emission_round_trips_through_ingest(self, tmp_path):
        corpus = generate(SynthSpec(n_pool=9, n_pairs=4, signal_strength=0.8, seed=2))
        write_ll_files(corpus, tmp_path)
        back = ingest_dir(tmp_path)
        assert back.ids() == corpus.ids()
        by_id = corpus.by_id()
        for f in back:
            assert f.label == by_id[f.id].label
            assert f.cwe == by_id[f.id].cwe
