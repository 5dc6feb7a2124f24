"""Evaluation metrics: gold-subspace Macro-P/R/F1, VAD 1-RMSE, ParseOK
integration, the quick-eval composite, and the backbone-screening composite.

Macro metrics average only over classes with at least one gold positive
across ALL examples (the gold subspace); counts themselves come from the
valid subset. Every per-class ratio carries the 1e-9 stability guard, the
F1 denominator included.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

from .contract import FailureKind, rationale_word_count
from .errors import (
    EmptyGoldSubspace,
    EmptyValidSet,
    TooFewPairs,
    TooFewRows,
)

EPS_GUARD = 1e-9

SNAPSHOT_CORE_FIELDS = (
    "macro_p",
    "macro_r",
    "macro_f1",
    "vad_one_minus_rmse",
    "parse_ok",
    "n",
    "n_val",
    "gold_subspace",
    "decode_config_hash",
)


@dataclass
class ClassCounts:
    """Per-class TP/FP/FN over the valid subset; merges losslessly."""

    counts: dict[str, tuple[int, int, int]] = field(default_factory=dict)

    def add(self, gold: set, pred: set) -> None:
        for k in gold | pred:
            tp, fp, fn = self.counts.get(k, (0, 0, 0))
            if k in gold and k in pred:
                tp += 1
            elif k in pred:
                fp += 1
            else:
                fn += 1
            self.counts[k] = (tp, fp, fn)

    def merge(self, other: "ClassCounts") -> "ClassCounts":
        out = ClassCounts(dict(self.counts))
        for k, (tp, fp, fn) in other.counts.items():
            a, b, c = out.counts.get(k, (0, 0, 0))
            out.counts[k] = (a + tp, b + fp, c + fn)
        return out


@dataclass(frozen=True)
class EvalSnapshot:
    """Full/quick evaluation result. Metric fields are None when undefined
    (empty gold subspace or no valid outcomes)."""

    macro_p: float | None
    macro_r: float | None
    macro_f1: float | None
    vad_one_minus_rmse: float | None
    parse_ok: float
    n: int
    n_val: int
    gold_subspace: tuple[str, ...]
    decode_config_hash: str
    wall_clock_s: float
    mode: str  # "full" | "quick"

    def core_dict(self) -> dict:
        """Deterministic payload: everything except mode and timing."""
        return {
            "macro_p": self.macro_p,
            "macro_r": self.macro_r,
            "macro_f1": self.macro_f1,
            "vad_one_minus_rmse": self.vad_one_minus_rmse,
            "parse_ok": self.parse_ok,
            "n": self.n,
            "n_val": self.n_val,
            "gold_subspace": list(self.gold_subspace),
            "decode_config_hash": self.decode_config_hash,
        }

    def to_dict(self) -> dict:
        out = self.core_dict()
        out["mode"] = self.mode
        return out

    def core_json(self) -> str:
        return json.dumps(self.core_dict(), sort_keys=True, separators=(",", ":"))

    def csv_row(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(SNAPSHOT_CORE_FIELDS + ("mode",))
        row = self.core_dict()
        writer.writerow(
            [
                row[k] if k != "gold_subspace" else "|".join(row[k])
                for k in SNAPSHOT_CORE_FIELDS
            ]
            + [self.mode]
        )
        return buf.getvalue()


@dataclass(frozen=True)
class ScreeningRow:
    """One backbone candidate's quick-eval numbers (Table-1 shape)."""

    model: str
    macro_f1: float
    rmse_mean: float
    rho_mean: float
    quality: float
    q_json_ok: float = 0.0
    q_struct_ok: float = 0.0
    q_rat_len_ok: float = 0.0


# -- gold-subspace macro metrics ---------------------------------------------


def gold_subspace(gold_label_sets) -> list[str]:
    """Classes with at least one gold positive over ALL examples, sorted."""
    seen: set[str] = set()
    for labels in gold_label_sets:
        seen.update(labels)
    return sorted(seen)


def class_counts(gold_sets, pred_sets) -> ClassCounts:
    if len(gold_sets) != len(pred_sets):
        raise ValueError("gold and pred must be index-aligned")
    counts = ClassCounts()
    for gold, pred in zip(gold_sets, pred_sets):
        counts.add(set(gold), set(pred))
    return counts


def macro_prf(gold_sets, pred_sets, kstar) -> tuple[float, float, float]:
    """Unweighted mean P/R/F1 over the gold subspace, eps-guarded."""
    kstar = list(kstar)
    if not kstar:
        raise EmptyGoldSubspace("macro metrics need a nonempty gold subspace")
    counts = class_counts(gold_sets, pred_sets).counts
    ps, rs, f1s = [], [], []
    for k in kstar:
        tp, fp, fn = counts.get(k, (0, 0, 0))
        p = tp / (tp + fp + EPS_GUARD)
        r = tp / (tp + fn + EPS_GUARD)
        f1 = 2.0 * p * r / (p + r + EPS_GUARD)
        ps.append(p)
        rs.append(r)
        f1s.append(f1)
    m = len(kstar)
    return sum(ps) / m, sum(rs) / m, sum(f1s) / m


def vad_one_minus_rmse(pairs) -> float:
    """1 - sqrt(sum ||v - vhat||^2 / (3 * N_val)) over valid pairs."""
    pairs = list(pairs)
    if not pairs:
        raise EmptyValidSet("VAD RMSE over an empty valid set")
    total = 0.0
    for pred, gold in pairs:
        total += (
            (pred.v - gold.v) ** 2 + (pred.a - gold.a) ** 2 + (pred.d - gold.d) ** 2
        )
    return 1.0 - math.sqrt(total / (3.0 * len(pairs)))


def composite_score(
    macro_f1: float, one_minus_rmse: float, parse_ok: float, beta: float = 1.0, gamma: float = 1.0
) -> float:
    """Quick-eval selection score S = MacroF1 + beta*(1-RMSE) + gamma*ParseOK."""
    return macro_f1 + beta * one_minus_rmse + gamma * parse_ok


def rho_vad(pairs) -> tuple[float, tuple[str, ...]]:
    """Mean Pearson correlation across the three VAD dimensions.

    Dimensions with zero variance contribute 0 and are reported in the
    returned flag tuple.
    """
    pairs = list(pairs)
    if len(pairs) < 2:
        raise TooFewPairs("Pearson correlation needs at least two valid pairs")
    dims = ("v", "a", "d")
    flagged = []
    rs = []
    n = len(pairs)
    for dim in dims:
        xs = [getattr(pred, dim) for pred, _ in pairs]
        ys = [getattr(gold, dim) for _, gold in pairs]
        mx = sum(xs) / n
        my = sum(ys) / n
        sxx = sum((x - mx) ** 2 for x in xs)
        syy = sum((y - my) ** 2 for y in ys)
        if sxx == 0.0 or syy == 0.0:
            flagged.append(dim)
            rs.append(0.0)
            continue
        sxy = sum((x - mx) * (y - my) for x, y in zip(xs, ys))
        rs.append(sxy / math.sqrt(sxx * syy))
    return sum(rs) / 3.0, tuple(flagged)


def quality_rate(outcomes, max_rationale_words: int = 12):
    """(quality, q_json_ok, q_struct_ok, q_rat_len_ok).

    json_ok counts outcomes where a complete tail object existed (schema
    verdict aside); struct_ok counts full schema passes; rat_len_ok is the
    fraction of schema-VALID answers within the word cap. quality is the
    unweighted mean of the three.
    """
    outcomes = list(outcomes)
    if not outcomes:
        return 0.0, 0.0, 0.0, 0.0
    n = len(outcomes)
    json_ok = sum(
        1
        for o in outcomes
        if o.failure_kind not in (FailureKind.NO_JSON_OBJECT, FailureKind.OVERFLOW)
    )
    valid = [o for o in outcomes if o.ok]
    struct_ok = len(valid)
    if valid:
        rat_ok = sum(
            1
            for o in valid
            if rationale_word_count(o.answer.rationale) <= max_rationale_words
        ) / len(valid)
    else:
        rat_ok = 0.0
    q_json = json_ok / n
    q_struct = struct_ok / n
    quality = (q_json + q_struct + rat_ok) / 3.0
    return quality, q_json, q_struct, rat_ok


# -- backbone screening ---------------------------------------------------------


def _pop_z(values) -> list[float]:
    n = len(values)
    mean = sum(values) / n
    var = sum((x - mean) ** 2 for x in values) / n
    if var == 0.0:
        return [0.0] * n
    sd = math.sqrt(var)
    return [(x - mean) / sd for x in values]


def screening_composite(rows):
    """Composite = 0.4*z_cls + 0.4*z_vad + 0.2*z_qual across candidates.

    z-scores use the population standard deviation (divisor n), so two
    candidates land at exactly +/-1. The VAD term z(rho) - z(rmse) spans
    +/-2 for two rows; it is re-standardized into a single z_vad column
    (the raw bracket is also returned).
    """
    rows = list(rows)
    if len(rows) < 2:
        raise TooFewRows("screening needs at least two candidate rows")
    z_cls = _pop_z([r.macro_f1 for r in rows])
    z_rho = _pop_z([r.rho_mean for r in rows])
    z_rmse = _pop_z([r.rmse_mean for r in rows])
    z_qual = _pop_z([r.quality for r in rows])
    bracket = [zr - zm for zr, zm in zip(z_rho, z_rmse)]
    z_vad = _pop_z(bracket)
    out = []
    for i, row in enumerate(rows):
        composite = 0.4 * z_cls[i] + 0.4 * z_vad[i] + 0.2 * z_qual[i]
        out.append(
            {
                "model": row.model,
                "z_cls": z_cls[i],
                "z_vad": z_vad[i],
                "z_qual": z_qual[i],
                "vad_bracket": bracket[i],
                "composite": composite,
            }
        )
    return out


# -- snapshot construction ------------------------------------------------------


def snapshot_from_examples(
    rows,
    decode_config_hash: str,
    mode: str,
    wall_clock_s: float = 0.0,
) -> EvalSnapshot:
    """Recompute a snapshot from per-example log rows.

    Rows carry {gold_labels, pred_labels, gold_vad, pred_vad, failure_kind};
    every exported snapshot is regenerable through this path.
    """
    from .schema import VadTriple

    rows = list(rows)
    n = len(rows)
    n_val = sum(1 for r in rows if r["failure_kind"] == FailureKind.NONE.value)
    kstar = gold_subspace([r["gold_labels"] for r in rows])
    valid = [r for r in rows if r["failure_kind"] == FailureKind.NONE.value]
    macro_p = macro_r = macro_f1 = vad_score = None
    if valid and kstar:
        macro_p, macro_r, macro_f1 = macro_prf(
            [set(r["gold_labels"]) for r in valid],
            [set(r["pred_labels"]) for r in valid],
            kstar,
        )
        vad_score = vad_one_minus_rmse(
            [
                (VadTriple(*r["pred_vad"]), VadTriple(*r["gold_vad"]))
                for r in valid
            ]
        )
    return EvalSnapshot(
        macro_p=macro_p,
        macro_r=macro_r,
        macro_f1=macro_f1,
        vad_one_minus_rmse=vad_score,
        parse_ok=(n_val / n) if n else 0.0,
        n=n,
        n_val=n_val,
        gold_subspace=tuple(kstar),
        decode_config_hash=decode_config_hash,
        wall_clock_s=wall_clock_s,
        mode=mode,
    )


def aggregate_snapshots(snapshots) -> dict:
    """mean +/- std (population) per metric over seed runs."""
    snapshots = list(snapshots)
    if not snapshots:
        raise EmptyValidSet("no snapshots to aggregate")
    out = {}
    for name in ("macro_p", "macro_r", "macro_f1", "vad_one_minus_rmse", "parse_ok"):
        vals = [getattr(s, name) for s in snapshots if getattr(s, name) is not None]
        if not vals:
            out[name] = None
            continue
        mean = sum(vals) / len(vals)
        var = sum((x - mean) ** 2 for x in vals) / len(vals)
        out[name] = {"mean": mean, "std": math.sqrt(var), "n_seeds": len(vals)}
    return out
