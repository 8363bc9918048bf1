"""Shared fixtures: small corpora and quick dataset builders."""

from __future__ import annotations

import numpy as np
import pytest

from snoopbench.ir_corpus import Corpus, IrFunction
from snoopbench.synth_corpus import SynthSpec, generate


def make_fn(text: str, source_name: str = "", label: str = "unlabeled",
            cwe: str | None = None) -> IrFunction:
    """IrFunction straight from normalized text (for set-algebra tests)."""
    return IrFunction.from_normalized(
        source_name or f"fn_{abs(hash(text)) % 10_000_000}", text, label=label, cwe=cwe
    )


def tiny_labeled_corpus(n_pool: int = 10, n_pairs: int = 3, seed: int = 0,
                        signal: float = 1.0) -> Corpus:
    return generate(
        SynthSpec(n_pool=n_pool, n_pairs=n_pairs, signal_strength=signal, seed=seed)
    )


@pytest.fixture(scope="session")
def small_corpus() -> Corpus:
    """Labeled corpus shared by partitioner/audit/experiment tests."""
    return generate(SynthSpec(n_pool=60, n_pairs=12, signal_strength=0.9, seed=101))


@pytest.fixture(scope="session")
def mini_experiment_corpus() -> Corpus:
    """Just big enough for a quick end-to-end grid."""
    return generate(SynthSpec(n_pool=160, n_pairs=30, signal_strength=1.0, seed=77))
