from __future__ import annotations

import pytest

from emovad import data_path, synth
from emovad._features import load_cue_vocab
from emovad.lexicon import load_lexicon
from emovad.train import TrainConfig


@pytest.fixture(scope="session")
def lexicon():
    return load_lexicon(data_path("vad_lexicon.tsv"))


@pytest.fixture(scope="session")
def cue_vocab():
    return load_cue_vocab(data_path("cue_vocab.txt"))


@pytest.fixture(scope="session")
def corpus_a(lexicon):
    return synth.make_corpus(120, "goe", seed=1, lexicon=lexicon)


@pytest.fixture(scope="session")
def corpus_b(lexicon):
    return synth.make_corpus(120, "emp", seed=2, lexicon=lexicon)


@pytest.fixture()
def fast_config():
    """Small, converging config for loop-level tests."""
    return TrainConfig(
        seed=42,
        grad_accum=1,
        epochs=1,
        max_steps=150,
        lr=0.05,
        weight_decay=0.01,
        logging_steps=1,
    )
