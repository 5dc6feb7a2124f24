"""Budget-aware evaluation: the full-eval driver, the time-bounded streaming
quick eval with online ETA, and epoch-level checkpoint selection with
budget-aware early stopping.

Both eval modes enforce the protocol gate: the decode configuration must
hash-match the one recorded in the checkpoint's run stamp. Quick eval reads
the clock exactly once per processed item, so a fake clock makes every
budget decision deterministic; no item starts after the budget is exhausted.
"""

from __future__ import annotations

import enum
import json
import math
import time
from collections import deque
from dataclasses import dataclass, field, replace

import numpy as np

from .contract import FailureKind, overflow_outcome, tail_scan
from .errors import EmptyDev, EmptyWindow, InputOverflow, ProtocolMismatch
from .metrics import (
    EvalSnapshot,
    composite_score,
    gold_subspace,
    macro_prf,
    snapshot_from_examples,
    vad_one_minus_rmse,
)
from .mixer import rebalance
from .schema import DecodeConfig, RunStamp, VadTriple
from .train import ToyModel, TrainConfig, forward, run_training


@dataclass
class Budget:
    """Wall-clock budget with an injectable time source."""

    limit_s: float
    clock: callable = time.monotonic
    started_at: float | None = None

    def start(self) -> float:
        if self.started_at is None:
            self.started_at = self.clock()
        return self.started_at

    def elapsed(self) -> float:
        if self.started_at is None:
            return 0.0
        return self.clock() - self.started_at

    def remaining(self) -> float:
        return self.limit_s - self.elapsed()


class FakeClock:
    """Deterministic clock: each read returns the current time, then advances
    by ``tick``."""

    def __init__(self, start: float = 0.0, tick: float = 1.0):
        self.now = start
        self.tick = tick

    def __call__(self) -> float:
        t = self.now
        self.now += self.tick
        return t


@dataclass(frozen=True)
class QuickEvalParams:
    beta: float = 1.0
    gamma: float = 1.0
    delta: float = 0.005
    w_score: int = 3
    w_eta: int = 32


@dataclass
class WindowStats:
    """Sliding windows of composite scores and per-item latencies."""

    w_score: int = 3
    w_eta: int = 32
    scores: deque = field(default_factory=deque)
    latencies: deque = field(default_factory=deque)

    def __post_init__(self):
        self.scores = deque(self.scores, maxlen=self.w_score)
        self.latencies = deque(self.latencies, maxlen=self.w_eta)

    def push_score(self, s: float) -> None:
        self.scores.append(s)

    def push_latency(self, dt: float) -> None:
        self.latencies.append(dt)

    def score_mean(self) -> float | None:
        if not self.scores:
            return None
        return sum(self.scores) / len(self.scores)

    def latency_median(self) -> float | None:
        if not self.latencies:
            return None
        ordered = sorted(self.latencies)
        return ordered[(len(ordered) - 1) // 2]  # lower-middle on even length


class StopKind(enum.Enum):
    CONTINUE = "continue"
    BUDGET_EXHAUSTED = "budget_exhausted"
    EARLY_STOP = "early_stop"
    NEW_BEST = "new_best"


@dataclass(frozen=True)
class StopDecision:
    kind: StopKind
    best_score: float
    delta: float


def eta_estimate(window: WindowStats, remaining_items: int) -> float:
    """Median per-item latency times remaining count."""
    med = window.latency_median()
    if med is None:
        raise EmptyWindow("no latencies recorded yet")
    return med * remaining_items


def early_stop(
    windows: WindowStats,
    best_score: float,
    current_s: float,
    delta: float,
    remaining_budget_s: float,
    items_per_epoch: int,
) -> StopDecision:
    """NewBest beats everything; EarlyStop needs BOTH a stalled score window
    and a projected epoch cost above the remaining budget."""
    if current_s > best_score:
        return StopDecision(StopKind.NEW_BEST, current_s, delta)
    mean = windows.score_mean()
    stalled = mean is not None and mean < best_score + delta
    if stalled and windows.latency_median() is not None:
        if eta_estimate(windows, items_per_epoch) > remaining_budget_s:
            return StopDecision(StopKind.EARLY_STOP, best_score, delta)
    return StopDecision(StopKind.CONTINUE, best_score, delta)


# -- per-example evaluation -----------------------------------------------------


def evaluate_record(model: ToyModel, record, decode: DecodeConfig):
    try:
        res = forward(model, record.text, max_len=decode.max_len)
    except InputOverflow:
        return overflow_outcome()
    return tail_scan(res.answer_text)


def example_row(record, outcome) -> dict:
    row = {
        "id": record.id,
        "gold_labels": sorted(record.labels),
        "gold_vad": list(record.vad.as_tuple()),
        "failure_kind": outcome.failure_kind.value,
        "pred_labels": [],
        "pred_vad": None,
    }
    if outcome.ok:
        row["pred_labels"] = list(outcome.answer.labels)
        row["pred_vad"] = list(outcome.answer.vad.as_tuple())
    return row


def _check_gate(decode: DecodeConfig, stamp: RunStamp) -> None:
    if decode.hash() != stamp.decode_config.hash():
        raise ProtocolMismatch(
            "decode config differs from the checkpoint's recorded config: "
            f"eval={decode.to_dict()} vs train={stamp.decode_config.to_dict()}"
        )


# -- full eval -------------------------------------------------------------------


def run_full_eval(
    model: ToyModel,
    dev_records,
    decode: DecodeConfig,
    stamp: RunStamp,
    workers: int = 1,
    clock=time.monotonic,
):
    """Evaluate every record; returns (EvalSnapshot, per-example rows)."""
    _check_gate(decode, stamp)
    dev_records = list(dev_records)
    if not dev_records:
        raise EmptyDev("full eval over an empty dev set")
    t0 = clock()
    if workers > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(
                pool.map(lambda r: evaluate_record(model, r, decode), dev_records)
            )
    else:
        outcomes = [evaluate_record(model, r, decode) for r in dev_records]
    rows = [example_row(r, o) for r, o in zip(dev_records, outcomes)]
    snapshot = snapshot_from_examples(
        rows, decode.hash(), mode="full", wall_clock_s=clock() - t0
    )
    return snapshot, rows


# -- quick eval -------------------------------------------------------------------


def stream_order(records, seed: int) -> list:
    """Seeded deterministic stream order for quick eval."""
    records = list(records)
    rng = np.random.Generator(np.random.PCG64(seed))
    return [records[i] for i in rng.permutation(len(records))]


def _online_metrics(rows):
    valid = [r for r in rows if r["failure_kind"] == FailureKind.NONE.value]
    kstar = gold_subspace([r["gold_labels"] for r in rows])
    macro_f1 = vad = None
    if valid and kstar:
        _, _, macro_f1 = macro_prf(
            [set(r["gold_labels"]) for r in valid],
            [set(r["pred_labels"]) for r in valid],
            kstar,
        )
        vad = vad_one_minus_rmse(
            [(VadTriple(*r["pred_vad"]), VadTriple(*r["gold_vad"])) for r in valid]
        )
    parse_ok = len(valid) / len(rows) if rows else 0.0
    return macro_f1, vad, parse_ok


def run_quick_eval(
    model: ToyModel,
    stream,
    budget: Budget,
    params: QuickEvalParams,
    decode: DecodeConfig,
    stamp: RunStamp,
    windows: WindowStats | None = None,
    progress=None,
):
    """Process the stream until the budget is exhausted.

    The guard runs before each item using the last measured time, so the
    clock is read exactly once per item and total overrun is at most one
    item's latency. Returns (EvalSnapshot, rows).
    """
    _check_gate(decode, stamp)
    stream = list(stream)
    if windows is None:
        windows = WindowStats(w_score=params.w_score, w_eta=params.w_eta)
    started = budget.start()
    t_prev = started
    rows = []
    for record in stream:
        if t_prev - started >= budget.limit_s:
            break
        outcome = evaluate_record(model, record, decode)
        rows.append(example_row(record, outcome))
        t_now = budget.clock()
        windows.push_latency(t_now - t_prev)
        t_prev = t_now
        if progress is not None:
            macro_f1, vad, parse_ok = _online_metrics(rows)
            med = windows.latency_median()
            progress.write(
                json.dumps(
                    {
                        "items": len(rows),
                        "elapsed_s": t_prev - started,
                        "eta_s": med * (len(stream) - len(rows)) if med else None,
                        "macro_f1": macro_f1,
                        "vad": vad,
                        "parse_ok": parse_ok,
                    },
                    sort_keys=True,
                    separators=(",", ":"),
                )
                + "\n"
            )
    snapshot = snapshot_from_examples(
        rows, decode.hash(), mode="quick", wall_clock_s=t_prev - started
    )
    return snapshot, rows


# -- epoch-level selection (budgeted training + eval) -------------------------------


@dataclass
class EpochRecord:
    epoch: int
    score: float
    decision: str
    mix_w: tuple[float, float]
    snapshot: EvalSnapshot


def select_checkpoint_under_budget(
    config: TrainConfig,
    data_a,
    data_b,
    dev_records,
    budget: Budget,
    params: QuickEvalParams,
    lexicon=None,
    appraisal=None,
    flip_pairs=None,
    cue_vocab=None,
    max_epochs: int = 64,
):
    """Train one pass per epoch, evaluate, keep the best composite, stop on
    budget exhaustion or the early-stop rule; the mixture weights are
    rebalanced per epoch from the configured baseline using the entropy EMAs.

    Returns (best_model, best_score, history).
    """
    budget.start()
    windows = WindowStats(w_score=params.w_score, w_eta=params.w_eta)
    best_model = None
    best_score = -math.inf
    history: list[EpochRecord] = []
    model = None
    mix_w = config.mix_weights()
    base_w = config.mix_weights()
    for epoch in range(1, max_epochs + 1):
        epoch_cfg = replace(config, seed=config.seed + epoch)
        result = run_training(
            epoch_cfg,
            data_a,
            data_b,
            lexicon=lexicon,
            appraisal=appraisal,
            flip_pairs=flip_pairs,
            model=model,
            cue_vocab=cue_vocab,
            mix_w=mix_w,
        )
        model = result.model
        if budget.elapsed() >= budget.limit_s:
            history.append(
                EpochRecord(epoch, best_score, StopKind.BUDGET_EXHAUSTED.value, mix_w, None)
            )
            break
        snapshot, _ = run_quick_eval(
            model,
            dev_records,
            Budget(limit_s=math.inf, clock=budget.clock, started_at=budget.started_at),
            params,
            config.decode,
            result.stamp,
            windows=windows,
        )
        s = composite_score(
            snapshot.macro_f1 or 0.0,
            snapshot.vad_one_minus_rmse or 0.0,
            snapshot.parse_ok,
            beta=params.beta,
            gamma=params.gamma,
        )
        windows.push_score(s)
        decision = early_stop(
            windows, best_score, s, params.delta, budget.remaining(), len(dev_records)
        )
        if decision.kind is StopKind.NEW_BEST:
            best_model = model.copy()
            best_score = s
        history.append(EpochRecord(epoch, s, decision.kind.value, mix_w, snapshot))
        if decision.kind is StopKind.EARLY_STOP:
            break
        ema = result.summary["entropy_ema"]
        mix_w = rebalance(base_w, (ema["A"], ema["B"]), config.mix_eps)
    if best_model is None and model is not None:
        best_model = model.copy()
    return best_model, best_score, history
