"""Polarity-mirror augmentation and the symmetry diagnostic.

Lexical flips swap antonym tokens in place ("this is terrible" -> "this is
great") and mirror the weak valence target (v -> 1-v); arousal and dominance
are untouched. Symmetry of predicted valences around 0.5 is both a per-pair
penalty and a corpus diagnostic.
"""

from __future__ import annotations

import json
import logging
import os
import re
from dataclasses import dataclass

from .errors import EmptyPairs, FileMissing, MalformedRow
from .schema import UtteranceRecord, VadTriple

log = logging.getLogger(__name__)

_WORD_RE = re.compile(r"[A-Za-z0-9]+")

FLIP_LEXICAL = "lexical"
FLIP_OUTCOME_REWRITE = "outcome_rewrite"


@dataclass(frozen=True)
class AntonymTable:
    """Symmetric token->token map; a->b implies b->a."""

    entries: dict[str, str]

    def __len__(self) -> int:
        return len(self.entries)


@dataclass(frozen=True)
class FlipPair:
    original: UtteranceRecord
    flipped: UtteranceRecord
    flip_kind: str


def load_antonyms(path: str) -> AntonymTable:
    """Load a<TAB>b pairs; the symmetric closure is enforced at load."""
    if not os.path.exists(path):
        raise FileMissing(path)
    entries: dict[str, str] = {}
    with open(path, "r", encoding="utf-8") as f:
        for i, line in enumerate(f, start=1):
            line = line.rstrip("\n")
            if not line or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 2 or not parts[0] or not parts[1]:
                raise MalformedRow("expected two tab-separated tokens", i)
            a, b = parts[0].lower(), parts[1].lower()
            if entries.get(a, b) != b or entries.get(b, a) != a:
                log.warning("antonym conflict at line %d (last wins)", i)
            entries[a] = b
            entries[b] = a
    return AntonymTable(entries=entries)


def _match_case(template: str, word: str) -> str:
    if template[:1].isupper():
        return word[:1].upper() + word[1:]
    return word


def flip_text(text: str, table: AntonymTable) -> tuple[str, int]:
    """Replace every table token with its antonym, preserving surrounding
    text and first-letter casing. Returns (new_text, replacement_count)."""
    count = 0

    def sub(match: re.Match) -> str:
        nonlocal count
        word = match.group(0)
        antonym = table.entries.get(word.lower())
        if antonym is None:
            return word
        count += 1
        return _match_case(word, antonym)

    return _WORD_RE.sub(sub, text), count


def flip_lexical(record: UtteranceRecord, table: AntonymTable) -> FlipPair | None:
    """Build a lexically flipped pair, or None when no token matched."""
    new_text, count = flip_text(record.text, table)
    if count == 0:
        return None
    flipped = record.with_fields(
        id=record.id + "_flip",
        text=new_text,
        vad=VadTriple(1.0 - record.vad.v, record.vad.a, record.vad.d),
    )
    return FlipPair(original=record, flipped=flipped, flip_kind=FLIP_LEXICAL)


def build_rewrite_pairs(records, rewrites: dict[str, str]) -> list[FlipPair]:
    """Outcome rewrites come from a user-supplied id->text map, not generated."""
    by_id = {r.id: r for r in records}
    out = []
    for rec_id, new_text in sorted(rewrites.items()):
        rec = by_id.get(rec_id)
        if rec is None or new_text == rec.text:
            continue
        flipped = rec.with_fields(
            id=rec.id + "_flip",
            text=new_text,
            vad=VadTriple(1.0 - rec.vad.v, rec.vad.a, rec.vad.d),
        )
        out.append(FlipPair(original=rec, flipped=flipped, flip_kind=FLIP_OUTCOME_REWRITE))
    return out


def flip_loss(v_x: float, v_xp: float) -> float:
    """Per-pair symmetry penalty |(v(x)-1/2) + (v(x')-1/2)|."""
    return abs((v_x - 0.5) + (v_xp - 0.5))


def flip_symmetry_diag(pairs, valence_of) -> float:
    """Mean absolute sum of centered valences over pairs (S_flip)."""
    pairs = list(pairs)
    if not pairs:
        raise EmptyPairs("symmetry diagnostic over an empty pair set")
    total = 0.0
    for pair in pairs:
        total += flip_loss(valence_of(pair.original), valence_of(pair.flipped))
    return total / len(pairs)


def write_pairs_jsonl(pairs, path: str) -> int:
    """Pair log: one {orig_id, flip_id, flip_kind} object per line."""
    n = 0
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for pair in pairs:
            f.write(
                json.dumps(
                    {
                        "orig_id": pair.original.id,
                        "flip_id": pair.flipped.id,
                        "flip_kind": pair.flip_kind,
                    },
                    separators=(",", ":"),
                )
                + "\n"
            )
            n += 1
    return n
