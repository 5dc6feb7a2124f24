import dataclasses
import io
import json
import math

import numpy as np
import pytest

from emovad.errors import EmptyDev, EmptyWindow, ProtocolMismatch
from emovad.metrics import aggregate_snapshots
from emovad.quickeval import (
    Budget,
    FakeClock,
    QuickEvalParams,
    StopKind,
    WindowStats,
    early_stop,
    eta_estimate,
    run_full_eval,
    run_quick_eval,
    select_checkpoint_under_budget,
    stream_order,
)
from emovad.schema import DecodeConfig
from emovad.train import TrainConfig, run_training


@pytest.fixture(scope="module")
def trained(cue_vocab, corpus_a, corpus_b):
    cfg = TrainConfig(
        seed=42, grad_accum=1, max_steps=120, lr=0.08, weight_decay=0.01, logging_steps=20
    )
    result = run_training(cfg, corpus_a[:60], corpus_b[:60], cue_vocab=cue_vocab)
    return cfg, result


# -- windows / eta -------------------------------------------------------------------


def test_eta_estimate_examples():
    w = WindowStats(w_eta=8)
    for latency in (1.0, 1.0, 1.0):
        w.push_latency(latency)
    assert eta_estimate(w, 10) == 10.0

    w = WindowStats(w_eta=8)
    w.push_latency(1.0)
    w.push_latency(100.0)
    assert w.latency_median() == 1.0  # lower-middle median on even windows
    assert eta_estimate(w, 10) == 10.0

    w = WindowStats(w_eta=8)
    for latency in (2.0, 4.0, 9.0):
        w.push_latency(latency)
    assert eta_estimate(w, 3) == 12.0


def test_eta_estimate_empty_window():
    with pytest.raises(EmptyWindow):
        eta_estimate(WindowStats(), 5)


def test_windows_bounded_capacity():
    w = WindowStats(w_score=3, w_eta=2)
    for i in range(10):
        w.push_score(float(i))
        w.push_latency(float(i))
    assert list(w.scores) == [7.0, 8.0, 9.0]
    assert len(w.latencies) == 2
    assert w.score_mean() == pytest.approx(8.0)


# -- early stop -------------------------------------------------------------------------


def window_fixture(scores, latencies):
    w = WindowStats(w_score=3, w_eta=8)
    for s in scores:
        w.push_score(s)
    for latency in latencies:
        w.push_latency(latency)
    return w


def test_early_stop_new_best_beats_eta():
    w = window_fixture([1.0, 1.0], [100.0])
    decision = early_stop(w, best_score=1.0, current_s=1.5, delta=0.005,
                          remaining_budget_s=1.0, items_per_epoch=100)
    assert decision.kind is StopKind.NEW_BEST
    assert decision.best_score == 1.5


def test_early_stop_continue_when_window_strong():
    # window mean well above best + delta: first condition fails, huge ETA ignored
    w = window_fixture([2.0, 2.0, 2.0], [100.0])
    decision = early_stop(w, best_score=1.0, current_s=0.9, delta=0.005,
                          remaining_budget_s=1.0, items_per_epoch=100)
    assert decision.kind is StopKind.CONTINUE


def test_early_stop_fires_when_both_conditions_hold():
    # stalled window and projected epoch cost double the remaining budget
    w = window_fixture([1.0, 1.0, 1.0], [2.0, 2.0, 2.0])
    decision = early_stop(w, best_score=1.0, current_s=1.0, delta=0.005,
                          remaining_budget_s=100.0, items_per_epoch=100)
    assert decision.kind is StopKind.EARLY_STOP


def test_early_stop_continue_when_eta_fits():
    w = window_fixture([1.0, 1.0, 1.0], [0.5])
    decision = early_stop(w, best_score=1.0, current_s=1.0, delta=0.005,
                          remaining_budget_s=1000.0, items_per_epoch=10)
    assert decision.kind is StopKind.CONTINUE


def test_early_stop_pure_function():
    w = window_fixture([1.0], [2.0])
    args = dict(best_score=1.0, current_s=1.0, delta=0.005,
                remaining_budget_s=1.0, items_per_epoch=100)
    assert early_stop(w, **args) == early_stop(w, **args)


# -- budget guard -----------------------------------------------------------------------


def test_budget_guard_exact_item_count(trained, corpus_a):
    cfg, result = trained
    clock = FakeClock(tick=1.0)
    budget = Budget(limit_s=10.0, clock=clock)
    stream = stream_order(corpus_a[:100], seed=7)
    snap, rows = run_quick_eval(
        result.model, stream, budget, QuickEvalParams(), cfg.decode, result.stamp
    )
    assert snap.n == 10 and len(rows) == 10
    assert snap.mode == "quick"


def test_budget_zero_items(trained, corpus_a):
    cfg, result = trained
    budget = Budget(limit_s=0.0, clock=FakeClock())
    snap, rows = run_quick_eval(
        result.model, corpus_a[:5], budget, QuickEvalParams(), cfg.decode, result.stamp
    )
    assert snap.n == 0 and snap.macro_f1 is None and snap.parse_ok == 0.0


def test_quick_nonbinding_budget_equals_full(trained, corpus_a):
    cfg, result = trained
    stream = stream_order(corpus_a[:50], seed=3)
    full_snap, full_rows = run_full_eval(result.model, stream, cfg.decode, result.stamp)
    budget = Budget(limit_s=1e9, clock=FakeClock())
    quick_snap, quick_rows = run_quick_eval(
        result.model, stream, budget, QuickEvalParams(), cfg.decode, result.stamp
    )
    assert quick_snap.core_json() == full_snap.core_json()
    full_bytes = "\n".join(json.dumps(r, sort_keys=True) for r in full_rows)
    quick_bytes = "\n".join(json.dumps(r, sort_keys=True) for r in quick_rows)
    assert full_bytes == quick_bytes


def test_stream_order_seeded_deterministic(corpus_a):
    a = [r.id for r in stream_order(corpus_a, seed=5)]
    b = [r.id for r in stream_order(corpus_a, seed=5)]
    c = [r.id for r in stream_order(corpus_a, seed=6)]
    assert a == b and a != c


def test_progress_lines_shape(trained, corpus_a):
    cfg, result = trained
    sink = io.StringIO()
    budget = Budget(limit_s=5.0, clock=FakeClock())
    run_quick_eval(
        result.model,
        corpus_a[:10],
        budget,
        QuickEvalParams(),
        cfg.decode,
        result.stamp,
        progress=sink,
    )
    lines = [json.loads(x) for x in sink.getvalue().splitlines()]
    assert len(lines) == 5
    for row in lines:
        assert set(row) == {"items", "elapsed_s", "eta_s", "macro_f1", "vad", "parse_ok"}
    assert lines[-1]["items"] == 5


# -- protocol gate -----------------------------------------------------------------------


def test_protocol_gate_blocks_decode_drift(trained, corpus_a):
    cfg, result = trained
    drifted = dataclasses.replace(cfg.decode, kv_cache=True)
    with pytest.raises(ProtocolMismatch):
        run_full_eval(result.model, corpus_a[:5], drifted, result.stamp)
    drifted = dataclasses.replace(cfg.decode, max_new_tokens=48)
    with pytest.raises(ProtocolMismatch):
        run_quick_eval(
            result.model,
            corpus_a[:5],
            Budget(limit_s=1.0, clock=FakeClock()),
            QuickEvalParams(),
            drifted,
            result.stamp,
        )


def test_full_eval_empty_dev(trained):
    cfg, result = trained
    with pytest.raises(EmptyDev):
        run_full_eval(result.model, [], cfg.decode, result.stamp)


def test_full_eval_counts(trained, corpus_a):
    cfg, result = trained
    snap, rows = run_full_eval(result.model, corpus_a[:50], cfg.decode, result.stamp)
    assert snap.n == 50 and snap.n_val == 50  # template decoder always parses
    assert snap.parse_ok == 1.0


def test_full_eval_worker_pool_matches_sequential(trained, corpus_a):
    cfg, result = trained
    seq_snap, seq_rows = run_full_eval(result.model, corpus_a[:30], cfg.decode, result.stamp)
    par_snap, par_rows = run_full_eval(
        result.model, corpus_a[:30], cfg.decode, result.stamp, workers=4
    )
    assert seq_snap.core_json() == par_snap.core_json()
    assert seq_rows == par_rows


def test_three_seed_aggregation(cue_vocab, corpus_a, corpus_b):
    snaps = []
    for seed in (11, 22, 33):
        cfg = TrainConfig(seed=seed, grad_accum=1, max_steps=80, lr=0.08, logging_steps=20)
        result = run_training(cfg, corpus_a[:40], corpus_b[:40], cue_vocab=cue_vocab)
        snap, _ = run_full_eval(result.model, corpus_a[:30], cfg.decode, result.stamp)
        snaps.append(snap)
    agg = aggregate_snapshots(snaps)
    assert agg["macro_f1"]["n_seeds"] == 3
    assert agg["parse_ok"]["mean"] == 1.0 and agg["parse_ok"]["std"] == 0.0


# -- epoch-level selection ------------------------------------------------------------------


def test_select_checkpoint_best_is_monotone(cue_vocab, corpus_a, corpus_b):
    cfg = TrainConfig(
        seed=1, grad_accum=1, max_steps=60, lr=0.08, weight_decay=0.01, logging_steps=30
    )
    clock = FakeClock(tick=0.001)
    budget = Budget(limit_s=1e9, clock=clock)
    best_model, best_score, history = select_checkpoint_under_budget(
        cfg,
        corpus_a[:40],
        corpus_b[:40],
        corpus_a[:20],
        budget,
        QuickEvalParams(delta=0.005),
        cue_vocab=cue_vocab,
        max_epochs=5,
    )
    assert best_model is not None
    bests = []
    cur = -math.inf
    for rec in history:
        if rec.decision == StopKind.NEW_BEST.value:
            assert rec.score > cur
            cur = rec.score
        bests.append(cur)
    assert bests == sorted(bests)
    assert best_score == cur


def test_select_checkpoint_budget_exhaustion_breaks(cue_vocab, corpus_a, corpus_b):
    cfg = TrainConfig(seed=1, grad_accum=1, max_steps=30, lr=0.05, logging_steps=10)
    clock = FakeClock(tick=10.0)  # every clock read costs 10s
    budget = Budget(limit_s=15.0, clock=clock)
    _, _, history = select_checkpoint_under_budget(
        cfg,
        corpus_a[:20],
        corpus_b[:20],
        corpus_a[:10],
        budget,
        QuickEvalParams(),
        cue_vocab=cue_vocab,
        max_epochs=50,
    )
    assert history[-1].decision == StopKind.BUDGET_EXHAUSTED.value
    assert len(history) < 50
