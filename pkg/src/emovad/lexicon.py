"""Weak-VAD supervision from a token lexicon.

A lexicon maps lowercase tokens to VAD triples in [0,1]^3. Values on a
[1,9] scale are min-max normalized via (x-1)/8 and clipped; all entries then
receive label smoothing x <- (1-2*eps)*x + eps. Utterance-level weak VAD is
the unweighted mean over covered tokens; vad_conf is the covered fraction.
"""

from __future__ import annotations

import logging
import os
import re
from dataclasses import dataclass

from .errors import BadEps, FileMissing, MalformedRow, OutputCollision
from .schema import UtteranceRecord, VadTriple

log = logging.getLogger(__name__)

_TOKEN_RE = re.compile(r"[a-z0-9]+")

NEGATORS = frozenset({"not", "no", "never", "n't"})
INTENSIFIERS = frozenset({"very", "so", "extremely"})
NEGATION_WINDOW = 3
INTENSIFIER_BOOST = 1.5


@dataclass(frozen=True)
class Lexicon:
    entries: dict[str, VadTriple]
    scale_applied: str  # "unit" | "one_to_nine"
    smoothing_eps: float

    def lookup(self, token: str) -> VadTriple | None:
        return self.entries.get(token)

    def __len__(self) -> int:
        return len(self.entries)


@dataclass(frozen=True)
class WeakVadResult:
    """Utterance aggregate: vad_text is None when no token is covered."""

    vad_text: VadTriple | None
    vad_conf: float
    covered: int
    total: int


def smooth(vad: VadTriple, eps: float) -> VadTriple:
    """Componentwise (1-2*eps)*x + eps; maps [0,1] onto [eps, 1-eps]."""
    if not 0.0 <= eps < 0.5:
        raise BadEps(f"smoothing eps must be in [0, 0.5), got {eps}")
    scale = 1.0 - 2.0 * eps
    return VadTriple(
        scale * vad.v + eps, scale * vad.a + eps, scale * vad.d + eps
    )


def _clip01(x: float) -> float:
    return 0.0 if x < 0.0 else 1.0 if x > 1.0 else x


def load_lexicon(path: str, scale: str = "unit", eps: float = 0.01) -> Lexicon:
    """Load a TSV lexicon (header line, then token<TAB>v<TAB>a<TAB>d rows).

    Duplicate tokens: last row wins, with a warning.
    """
    if scale not in ("unit", "one_to_nine"):
        raise ValueError(f"scale must be 'unit' or 'one_to_nine', got {scale!r}")
    if not os.path.exists(path):
        raise FileMissing(path)
    entries: dict[str, VadTriple] = {}
    with open(path, "r", encoding="utf-8") as f:
        for i, line in enumerate(f, start=1):
            if i == 1:  # header
                continue
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 4:
                raise MalformedRow(f"expected 4 tab-separated fields, got {len(parts)}", i)
            token = parts[0].lower()
            try:
                vals = [float(x) for x in parts[1:]]
            except ValueError as exc:
                raise MalformedRow(f"non-numeric VAD value: {exc}", i) from exc
            if scale == "one_to_nine":
                vals = [_clip01((x - 1.0) / 8.0) for x in vals]
            else:
                vals = [_clip01(x) for x in vals]
            if token in entries:
                log.warning("duplicate lexicon token %r at line %d (last wins)", token, i)
            entries[token] = smooth(VadTriple(*vals), eps)
    return Lexicon(entries=entries, scale_applied=scale, smoothing_eps=eps)


def tokenize(text: str) -> list[str]:
    """Lowercase and split on runs of non-alphanumeric characters."""
    return _TOKEN_RE.findall(text.lower())


def _heuristic_adjust(tokens: list[str], lexicon: Lexicon):
    """Optional negation/intensifier pass.

    A covered token within NEGATION_WINDOW positions after a negator has its
    valence mirrored (v -> 1-v); an intensifier multiplies the next covered
    token's weight by INTENSIFIER_BOOST.
    """
    adjusted: list[tuple[VadTriple, float]] = []
    negate_until = -1
    boost_next = False
    for i, tok in enumerate(tokens):
        if tok in NEGATORS:
            negate_until = i + NEGATION_WINDOW
            continue
        if tok in INTENSIFIERS:
            boost_next = True
            continue
        entry = lexicon.lookup(tok)
        if entry is None:
            continue
        if i <= negate_until:
            entry = VadTriple(1.0 - entry.v, entry.a, entry.d)
        weight = INTENSIFIER_BOOST if boost_next else 1.0
        boost_next = False
        adjusted.append((entry, weight))
    return adjusted


def aggregate_utterance(
    tokens: list[str], lexicon: Lexicon, heuristics: bool = False
) -> WeakVadResult:
    """Weighted mean of lexicon entries over covered tokens (weights 1 by
    default); vad_conf = covered/total."""
    total = len(tokens)
    if heuristics:
        pairs = _heuristic_adjust(tokens, lexicon)
    else:
        pairs = [
            (entry, 1.0)
            for entry in (lexicon.lookup(t) for t in tokens)
            if entry is not None
        ]
    covered = len(pairs)
    if covered == 0 or total == 0:
        return WeakVadResult(vad_text=None, vad_conf=0.0, covered=covered, total=total)
    wsum = sum(w for _, w in pairs)
    v = sum(e.v * w for e, w in pairs) / wsum
    a = sum(e.a * w for e, w in pairs) / wsum
    d = sum(e.d * w for e, w in pairs) / wsum
    return WeakVadResult(
        vad_text=VadTriple(v, a, d),
        vad_conf=covered / total,
        covered=covered,
        total=total,
    )


def weak_vad_of_text(text: str, lexicon: Lexicon, heuristics: bool = False) -> WeakVadResult:
    return aggregate_utterance(tokenize(text), lexicon, heuristics=heuristics)


def filter_by_conf(records, tau: float) -> list[UtteranceRecord]:
    """Stable-order subsequence with vad_conf >= tau (boundary inclusive)."""
    return [r for r in records if r.vad_conf >= tau]


def convert_cross_corpus(
    records, label_map: dict[str, str], lexicon: Lexicon, heuristics: bool = False
) -> list[UtteranceRecord]:
    """Relabel foreign-corpus records and attach weak VAD.

    Source tags map through ``label_map``; unmapped tags become "other".
    Records with zero lexicon coverage keep a neutral triple at conf 0 and
    are expected to fall to the downstream vad_conf filter.
    """
    out = []
    for rec in records:
        mapped = frozenset(label_map.get(tag, "other") for tag in rec.labels)
        weak = weak_vad_of_text(rec.text, lexicon, heuristics=heuristics)
        vad = weak.vad_text if weak.vad_text is not None else VadTriple(0.5, 0.5, 0.5)
        out.append(rec.with_fields(labels=mapped, vad=vad, vad_conf=weak.vad_conf))
    return out


def check_output_path(out_path: str, protected_paths) -> None:
    """Refuse to overwrite any manifest-listed dev shard."""
    target = os.path.abspath(out_path)
    for p in protected_paths:
        if os.path.abspath(p) == target:
            raise OutputCollision(
                f"{out_path} would overwrite a manifest-listed dev file"
            )
