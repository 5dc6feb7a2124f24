import math

import numpy as np
import pytest

from emovad.errors import BadSchedule
from emovad.mixer import (
    MixtureState,
    draw_source,
    normalized_label_entropy,
    rebalance,
    source_probs,
    temperature,
    update_conf,
)


def state(**kw):
    defaults = dict(w=(0.5, 0.5), conf=(1.0, 1.0), t0=1.0, t1=1.0, t=0, t_max=10)
    defaults.update(kw)
    return MixtureState(**defaults)


# -- temperature ------------------------------------------------------------------


def test_temperature_endpoints_and_midpoint():
    assert temperature(0, 1.5, 0.5, 100) == 1.5
    assert temperature(100, 1.5, 0.5, 100) == 0.5
    assert temperature(50, 1.5, 0.5, 100) == pytest.approx(1.0)


def test_temperature_constant_schedule():
    assert temperature(3, 0.7, 0.7, 10) == 0.7


def test_temperature_is_affine_three_point_collinear():
    t0, t1, tm = 2.0, 0.4, 64
    a, b, c = (temperature(t, t0, t1, tm) for t in (10, 20, 30))
    assert (b - a) == pytest.approx(c - b, abs=1e-15)


def test_temperature_bad_schedule():
    with pytest.raises(BadSchedule):
        temperature(0, 0.0, 0.5, 10)
    with pytest.raises(BadSchedule):
        temperature(0, 1.0, -0.1, 10)
    with pytest.raises(BadSchedule):
        temperature(0, 1.0, 1.0, 0)


# -- source_probs ------------------------------------------------------------------


def test_source_probs_symmetric():
    for t in (1, 5, 9):
        p = source_probs(state(t=t, t0=1.5, t1=0.5))
        assert p[0] == pytest.approx(0.5) and p[1] == pytest.approx(0.5)


def test_source_probs_softmax_oracle():
    # logits (0.2, 0.8) at T=1: p(B) = sigmoid(0.6)
    p = source_probs(state(w=(0.2, 0.8)))
    assert p[1] == pytest.approx(1 / (1 + math.exp(-0.6)), abs=1e-12)
    assert p[1] == pytest.approx(0.6456563062257954, abs=1e-12)


def test_source_probs_high_temperature_limit():
    p = source_probs(state(w=(0.2, 0.8), t0=1e6, t1=1e6))
    assert abs(p[0] - 0.5) < 1e-3 and abs(p[1] - 0.5) < 1e-3


def test_source_probs_sum_to_one():
    for w in ((0.1, 0.9), (0.99, 0.01), (0.4, 0.6)):
        for conf in ((1.0, 1.0), (0.2, 0.9), (1e-6, 1.0)):
            p = source_probs(state(w=w, conf=conf))
            assert abs(p.sum() - 1.0) < 1e-12


def test_source_probs_degenerate_weights_not_certain():
    # softmax of logits (1, 0) at T=1 gives ~0.731, never 1.0
    p = source_probs(state(w=(1.0, 0.0)))
    assert p[0] == pytest.approx(1 / (1 + math.exp(-1.0)), abs=1e-12)
    assert p[0] == pytest.approx(0.731, abs=1e-3)


def test_source_probs_permutation_symmetry():
    p = source_probs(state(w=(0.3, 0.7), conf=(0.8, 0.6)))
    q = source_probs(state(w=(0.7, 0.3), conf=(0.6, 0.8)))
    assert p[0] == pytest.approx(q[1]) and p[1] == pytest.approx(q[0])


def test_source_probs_conf_monotonicity():
    lo = source_probs(state(w=(0.5, 0.5), conf=(1.0, 1.0)))
    hi = source_probs(state(w=(0.5, 0.5), conf=(2.0, 1.0)))
    assert hi[0] < lo[0]  # raising conf_A strictly lowers p(A)


# -- draw_source --------------------------------------------------------------------


def test_draw_source_deterministic_given_seed():
    s1 = [draw_source(state(w=(0.2, 0.8)), np.random.Generator(np.random.PCG64(9))) for _ in range(5)]
    rng = np.random.Generator(np.random.PCG64(9))
    s2 = [draw_source(state(w=(0.2, 0.8)), rng) for _ in range(1)]
    assert s1[0] == s2[0]


def test_draw_source_sequence_reproducible():
    rng1 = np.random.Generator(np.random.PCG64(123))
    rng2 = np.random.Generator(np.random.PCG64(123))
    st8 = state(w=(0.3, 0.7))
    seq1 = [draw_source(st8, rng1) for _ in range(50)]
    seq2 = [draw_source(st8, rng2) for _ in range(50)]
    assert seq1 == seq2


def test_draw_source_empirical_frequency():
    st8 = state(w=(0.2, 0.8))
    p_b = source_probs(st8)[1]
    rng = np.random.Generator(np.random.PCG64(42))
    n = 100_000
    hits = sum(draw_source(st8, rng) == "B" for _ in range(n))
    bound = 3 * math.sqrt(p_b * (1 - p_b) / n)
    assert abs(hits / n - p_b) <= bound


# -- update_conf --------------------------------------------------------------------


def test_update_conf_fixed_point_at_zero_entropy():
    s = state()
    update_conf(s, "A", 0.0)
    assert s.conf[0] == pytest.approx(1.0)


def test_update_conf_arithmetic():
    s = state(alpha=0.9)
    update_conf(s, "A", math.log(2))
    assert s.conf[0] == pytest.approx(0.9 + 0.1 * 0.5)
    assert s.conf[1] == 1.0  # drawn source only


def test_update_conf_geometric_decay_to_floor():
    s = state(alpha=0.5)
    prev = s.conf[0]
    for _ in range(200):
        update_conf(s, "A", 1e9)
        assert s.conf[0] <= prev + 1e-15
        prev = s.conf[0]
    assert s.conf[0] == pytest.approx(1e-6)


def test_update_conf_rejects_negative_entropy():
    with pytest.raises(ValueError):
        update_conf(state(), "A", -0.1)


def test_update_conf_contraction_toward_exp_neg_h():
    s = state(alpha=0.9)
    target = math.exp(-0.7)
    gap = abs(s.conf[0] - target)
    update_conf(s, "A", 0.7)
    assert abs(s.conf[0] - target) == pytest.approx(0.9 * gap)


# -- rebalance ----------------------------------------------------------------------


def test_rebalance_equal_entropy_no_change():
    w = rebalance((0.3, 0.7), (0.5, 0.5), 1e-8)
    assert w[0] == pytest.approx(0.3) and w[1] == pytest.approx(0.7)


def test_rebalance_low_entropy_dominates():
    w = rebalance((0.5, 0.5), (1.0, 0.0), 1e-8)
    assert w[0] == pytest.approx(0.0, abs=1e-7)
    assert w[1] == pytest.approx(1.0, abs=1e-7)


def test_rebalance_large_eps_is_identity_limit():
    w = rebalance((0.5, 0.5), (1e-9, 2e-9), 1e3)
    assert w[0] == pytest.approx(0.5, abs=1e-9)


def test_rebalance_normalizes():
    w = rebalance((0.2, 0.8), (0.7, 0.1), 1e-8)
    assert sum(w) == pytest.approx(1.0)


# -- entropy ------------------------------------------------------------------------


def test_normalized_entropy_range_and_extremes():
    assert normalized_label_entropy([0.5, 0.5]) == pytest.approx(1.0)
    assert normalized_label_entropy([1.0, 0.0]) == pytest.approx(0.0, abs=1e-9)
    assert normalized_label_entropy([0.9]) == 0.0  # K=1 defined as 0
    h = normalized_label_entropy([0.2, 0.5, 0.9, 0.1])
    assert 0.0 <= h <= 1.0


def test_mixture_state_normalizes_weights():
    s = MixtureState(w=(2.0, 6.0))
    assert s.w == (0.25, 0.75)
    with pytest.raises(ValueError):
        MixtureState(w=(0.0, 0.0))
    with pytest.raises(ValueError):
        MixtureState(conf=(0.0, 1.0))


def test_snapshot_is_plain_data():
    snap = state(t=3, t0=1.5, t1=0.5).snapshot()
    assert snap["t"] == 3 and isinstance(snap["w"], list)
