"""Deterministic synthetic corpora for fixtures, demos, and tests.

Texts are assembled from per-label signature words (all present in the
shipped cue vocabulary and lexicon) plus neutral fillers, so the toy
generator can actually learn them and lexicon coverage stays high. Targets
are the lexicon aggregate of the text with a small seeded jitter.
"""

from __future__ import annotations

import numpy as np

from .lexicon import Lexicon, weak_vad_of_text
from .schema import UtteranceRecord, VadTriple

LABEL_SIGNATURES = {
    "joy": [
        "happy", "delighted", "great", "wonderful", "thrilled",
        "won", "success", "proud", "grateful", "love",
    ],
    "sadness": [
        "sad", "miserable", "lonely", "grief", "hopeless", "lost", "hurt", "cry",
    ],
    "anger": [
        "angry", "furious", "unfair", "outraged", "hate",
        "betrayed", "insulted", "cheated",
    ],
    "fear": [
        "afraid", "scared", "terrified", "anxious", "danger", "helpless", "worried",
    ],
    "disgust": ["disgusting", "gross", "awful", "terrible", "nasty"],
    "surprise": ["surprised", "shocked", "unexpected", "stunned"],
}

DEFAULT_LABELS = tuple(LABEL_SIGNATURES)

_TEMPLATES = (
    "i am {w0} about this",
    "this is {w0}",
    "i feel {w0} today",
    "it was {w0} and {w1}",
    "so {w0} again",
    "i felt {w0} when it happened",
    "everything feels {w0} now",
    "that was really {w0}",
)

CROSS_TAGS = (
    "happiness",
    "sadness",
    "anger",
    "fear",
    "disgust",
    "surprise",
    "no_emotion",
    "boredom",
)

DEFAULT_LABEL_MAP = {
    "happiness": "joy",
    "sadness": "sadness",
    "anger": "anger",
    "fear": "fear",
    "disgust": "disgust",
    "surprise": "surprise",
    "no_emotion": "other",
    # boredom intentionally unmapped -> "other"
}


def _record_text(rng: np.random.Generator, labels) -> str:
    words = []
    for lab in labels:
        sig = LABEL_SIGNATURES[lab]
        words.append(sig[int(rng.integers(len(sig)))])
    template = _TEMPLATES[int(rng.integers(len(_TEMPLATES)))]
    w0 = words[0]
    w1 = words[1] if len(words) > 1 else LABEL_SIGNATURES[labels[0]][
        int(rng.integers(len(LABEL_SIGNATURES[labels[0]])))
    ]
    return template.format(w0=w0, w1=w1)


def make_corpus(
    n: int,
    prefix: str,
    seed: int,
    lexicon: Lexicon,
    labels=DEFAULT_LABELS,
    multi_label_frac: float = 0.15,
    dup_frac: float = 0.02,
    bad_qc_frac: float = 0.03,
    vad_jitter: float = 0.05,
) -> list[UtteranceRecord]:
    """n seeded records with lexicon-consistent targets and QC flags.

    A small fraction are exact duplicates (to exercise dedup) or carry
    failing QC flags (to exercise the filter).
    """
    rng = np.random.Generator(np.random.PCG64(seed))
    out: list[UtteranceRecord] = []
    labels = list(labels)
    for i in range(n):
        if out and rng.random() < dup_frac:
            out.append(out[int(rng.integers(len(out)))])
            continue
        chosen = [labels[int(rng.integers(len(labels)))]]
        if rng.random() < multi_label_frac:
            extra = labels[int(rng.integers(len(labels)))]
            if extra not in chosen:
                chosen.append(extra)
        text = _record_text(rng, chosen)
        weak = weak_vad_of_text(text, lexicon)
        base = weak.vad_text if weak.vad_text else VadTriple(0.5, 0.5, 0.5)
        jitter = rng.uniform(-vad_jitter, vad_jitter, size=3)
        vad = VadTriple(
            *(
                round(float(min(0.99, max(0.01, x + j))), 4)
                for x, j in zip(base.as_tuple(), jitter)
            )
        )
        bad_qc = rng.random() < bad_qc_frac
        qc = {
            "len_ok": not bad_qc or bool(rng.random() < 0.5),
            "tox": bad_qc and bool(rng.random() < 0.5),
            "lang": "en",
            "dedup": False,
        }
        out.append(
            UtteranceRecord(
                id=f"{prefix}_{i:06d}",
                text=text,
                labels=frozenset(chosen),
                vad=vad,
                vad_conf=weak.vad_conf,
                qc_flags=tuple(sorted(qc.items())),
                split="train",
            )
        )
    return out


def make_cross_corpus(n: int, prefix: str, seed: int) -> list[UtteranceRecord]:
    """Foreign-tagged records (neutral VAD) for the cross-corpus probe."""
    rng = np.random.Generator(np.random.PCG64(seed))
    out = []
    tag_to_label = {
        "happiness": "joy",
        "no_emotion": "joy",  # text content only; tag mapping happens downstream
        "boredom": "sadness",
    }
    for i in range(n):
        tag = CROSS_TAGS[int(rng.integers(len(CROSS_TAGS)))]
        sig_label = tag_to_label.get(tag, tag)
        text = _record_text(rng, [sig_label])
        out.append(
            UtteranceRecord(
                id=f"{prefix}_{i:06d}",
                text=text,
                labels=frozenset({tag}),
                vad=VadTriple(0.5, 0.5, 0.5),
                vad_conf=1.0,
                qc_flags=(("lang", "en"),),
                split="dev",
            )
        )
    return out
