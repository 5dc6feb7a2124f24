"""The one-line JSON answer contract.

Answers look like
``{"labels":["joy"],"vad":{"v":0.70,"a":0.30,"d":0.50},"rationale":"ok"}``
with exactly those keys, VAD in [0,1] at two decimals, and a nonempty label
list. ``tail_scan`` extracts the last syntactically complete object from a
raw generation; schema failure of that object is terminal (no fallback to
earlier objects). ParseOK is the fraction of outcomes that validate.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass

from .errors import EmptyInput, InvalidAnswer
from .schema import VadTriple

DEFAULT_MAX_RATIONALE_WORDS = 12


class FailureKind(enum.Enum):
    NONE = "none"
    NO_JSON_OBJECT = "no_json_object"
    SCHEMA_VIOLATION = "schema_violation"
    VAD_OUT_OF_RANGE = "vad_out_of_range"
    EMPTY_LABELS = "empty_labels"
    OVERFLOW = "overflow"


@dataclass(frozen=True)
class EmotionAnswer:
    """Validated contract answer: labels, VAD triple, short rationale."""

    labels: tuple[str, ...]
    vad: VadTriple
    rationale: str


@dataclass(frozen=True)
class ParseOutcome:
    raw: str
    answer: EmotionAnswer | None
    failure_kind: FailureKind

    @property
    def ok(self) -> bool:
        return self.failure_kind is FailureKind.NONE


def overflow_outcome(raw: str = "") -> ParseOutcome:
    """Outcome for inputs that exceeded the length budget (no generation)."""
    return ParseOutcome(raw=raw, answer=None, failure_kind=FailureKind.OVERFLOW)


def rationale_word_count(rationale: str) -> int:
    return len(rationale.split())


# -- tail scan -------------------------------------------------------------


def _balanced_spans(raw: str) -> list[tuple[int, int]]:
    """All balanced {...} spans found in a single forward pass.

    Outside any open brace the text is treated as prose (only '{' matters);
    inside a candidate object JSON string literals are honored, so braces
    within quoted strings do not count. Every matched close brace yields a
    span, nested ones included.
    """
    spans: list[tuple[int, int]] = []
    stack: list[int] = []
    in_string = False
    escaped = False
    for i, ch in enumerate(raw):
        if stack:
            if in_string:
                if escaped:
                    escaped = False
                elif ch == "\\":
                    escaped = True
                elif ch == '"':
                    in_string = False
            elif ch == '"':
                in_string = True
            elif ch == "{":
                stack.append(i)
            elif ch == "}":
                spans.append((stack.pop(), i))
        elif ch == "{":
            stack.append(i)
            in_string = False
            escaped = False
    return spans


def _is_two_decimal(x: float) -> bool:
    return x == round(x, 2)


def _validate_answer_obj(obj) -> tuple[EmotionAnswer | None, FailureKind]:
    if not isinstance(obj, dict) or set(obj) != {"labels", "vad", "rationale"}:
        return None, FailureKind.SCHEMA_VIOLATION

    labels = obj["labels"]
    if not isinstance(labels, list) or not all(
        isinstance(x, str) and x for x in labels
    ):
        return None, FailureKind.SCHEMA_VIOLATION
    if not labels:
        return None, FailureKind.EMPTY_LABELS

    vad = obj["vad"]
    if not isinstance(vad, dict) or set(vad) != {"v", "a", "d"}:
        return None, FailureKind.SCHEMA_VIOLATION
    vals = []
    for key in ("v", "a", "d"):
        x = vad[key]
        if isinstance(x, bool) or not isinstance(x, (int, float)):
            return None, FailureKind.SCHEMA_VIOLATION
        vals.append(float(x))
    if any(x < 0.0 or x > 1.0 for x in vals):
        return None, FailureKind.VAD_OUT_OF_RANGE
    # strict contract: more than two decimal places is rejected, not rounded
    if any(not _is_two_decimal(x) for x in vals):
        return None, FailureKind.SCHEMA_VIOLATION

    rationale = obj["rationale"]
    if not isinstance(rationale, str):
        return None, FailureKind.SCHEMA_VIOLATION

    answer = EmotionAnswer(
        labels=tuple(labels), vad=VadTriple(*vals), rationale=rationale
    )
    return answer, FailureKind.NONE


def tail_scan(raw: str) -> ParseOutcome:
    """Extract and validate the last complete JSON object in ``raw``.

    Candidates are tried from the end of the string; an earlier object is
    considered only when a later one fails to parse as JSON. Once a candidate
    parses, its schema verdict is final. Never raises.
    """
    spans = _balanced_spans(raw)
    spans.sort(key=lambda se: (-se[1], se[0]))
    for start, end in spans:
        try:
            obj = json.loads(raw[start : end + 1])
        except Exception:
            continue
        answer, kind = _validate_answer_obj(obj)
        return ParseOutcome(raw=raw, answer=answer, failure_kind=kind)
    return ParseOutcome(raw=raw, answer=None, failure_kind=FailureKind.NO_JSON_OBJECT)


# -- serialization -----------------------------------------------------------


def validate_answer(
    answer: EmotionAnswer, max_rationale_words: int = DEFAULT_MAX_RATIONALE_WORDS
) -> None:
    """Raise InvalidAnswer unless all contract invariants hold."""
    if not answer.labels or not all(
        isinstance(x, str) and x for x in answer.labels
    ):
        raise InvalidAnswer("labels must be a nonempty list of nonempty strings")
    if not answer.vad.in_range():
        raise InvalidAnswer(f"vad out of [0,1]: {answer.vad.as_tuple()}")
    if any(not _is_two_decimal(x) for x in answer.vad.as_tuple()):
        raise InvalidAnswer(
            f"vad must carry at most 2 decimal places: {answer.vad.as_tuple()}"
        )
    if not isinstance(answer.rationale, str):
        raise InvalidAnswer("rationale must be a string")
    if rationale_word_count(answer.rationale) > max_rationale_words:
        raise InvalidAnswer(
            f"rationale exceeds {max_rationale_words} words: {answer.rationale!r}"
        )


def serialize_answer(
    answer: EmotionAnswer, max_rationale_words: int = DEFAULT_MAX_RATIONALE_WORDS
) -> str:
    """One line, fixed key order, VAD at exactly two decimals.

    tail_scan(serialize_answer(a)) recovers ``a`` bit-identically.
    """
    validate_answer(answer, max_rationale_words)
    labels_json = json.dumps(list(answer.labels), separators=(",", ":"), ensure_ascii=False)
    rationale_json = json.dumps(answer.rationale, ensure_ascii=False)
    v, a, d = answer.vad.as_tuple()
    return (
        f'{{"labels":{labels_json},'
        f'"vad":{{"v":{v:.2f},"a":{a:.2f},"d":{d:.2f}}},'
        f'"rationale":{rationale_json}}}'
    )


# -- ParseOK ---------------------------------------------------------------


def parse_ok_rate(outcomes) -> float:
    """N_val/N over ALL outcomes, overflow and truncation included."""
    outcomes = list(outcomes)
    if not outcomes:
        raise EmptyInput("parse_ok_rate over an empty sequence")
    n_val = sum(1 for o in outcomes if o.ok)
    return n_val / len(outcomes)
