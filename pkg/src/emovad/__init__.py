"""Joint emotion + VAD harness: strict one-line JSON answers, weak-VAD
lexicon supervision, entropy-aware A/B mixture training over a toy
generator, and budget-aware evaluation."""

from __future__ import annotations

import os

__version__ = "0.1.0"

_DATA_DIR = os.path.join(os.path.dirname(__file__), "data")


def data_path(name: str) -> str:
    """Absolute path of a shipped data file (cue vocab, prototypes, ...)."""
    return os.path.join(_DATA_DIR, name)
