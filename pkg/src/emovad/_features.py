"""Shared bag-of-cues featurization used by the toy generator and the
appraisal verifier (kept separate so the inference path never touches the
verifier module)."""

from __future__ import annotations

import hashlib
import os

import numpy as np

from .errors import FileMissing
from .lexicon import _TOKEN_RE, tokenize


def load_cue_vocab(path: str) -> tuple[str, ...]:
    if not os.path.exists(path):
        raise FileMissing(path)
    vocab = []
    with open(path, "r", encoding="utf-8") as f:
        for line in f:
            tok = line.strip().lower()
            if tok and not tok.startswith("#"):
                vocab.append(tok)
    return tuple(vocab)


def cue_counts(text: str, cue_vocab) -> np.ndarray:
    index = {tok: i for i, tok in enumerate(cue_vocab)}
    out = np.zeros(len(cue_vocab), dtype=np.float64)
    for tok in tokenize(text):
        i = index.get(tok)
        if i is not None:
            out[i] += 1.0
    return out


def feature_length(cue_vocab) -> int:
    """Verifier feature arity: cue counts over x and a, plus the VAD triple."""
    return 2 * len(cue_vocab) + 3


def tokenizer_hash(cue_vocab) -> str:
    """Hash of the tokenizer rule plus the cue vocabulary, stamped into
    checkpoints."""
    payload = _TOKEN_RE.pattern + "\x00" + "\x00".join(cue_vocab)
    return hashlib.sha1(payload.encode("utf-8")).hexdigest()
