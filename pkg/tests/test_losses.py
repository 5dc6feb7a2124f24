import math

import numpy as np
import pytest

from emovad.errors import DimensionMismatch
from emovad.lexicon import Lexicon
from emovad.losses import (
    LossWeights,
    appraisal_loss,
    batch_mean,
    bce_multilabel,
    combine,
    mse_vad,
    vad_consistency,
)
from emovad.schema import VadTriple


def unit_lexicon(entries):
    return Lexicon(
        entries={k: VadTriple(*v) for k, v in entries.items()},
        scale_applied="unit",
        smoothing_eps=0.0,
    )


# -- bce_multilabel ---------------------------------------------------------------


def test_bce_symmetric_half_is_ln2():
    assert bce_multilabel([1, 0], [0.5, 0.5]) == pytest.approx(math.log(2))


def test_bce_perfect_is_near_zero():
    eps = 1e-7
    val = bce_multilabel([1, 0], [1 - eps, eps])
    assert val == pytest.approx(0.0, abs=1e-6)


def test_bce_scalar_oracle():
    # independent arithmetic oracle
    expect = (-math.log(0.9) - math.log(0.8) - math.log(0.9)) / 3
    assert bce_multilabel([1, 1, 0], [0.9, 0.8, 0.1]) == pytest.approx(expect, rel=1e-12)
    assert expect == pytest.approx(0.1446, abs=5e-5)


def test_bce_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        bce_multilabel([1, 0], [0.5])


def test_bce_finite_on_closed_domain():
    assert np.isfinite(bce_multilabel([1.0, 0.0], [0.0, 1.0]))


# -- mse_vad ------------------------------------------------------------------------


def test_mse_vad_examples():
    v = VadTriple(0.5, 0.5, 0.5)
    assert mse_vad(v, v) == 0.0
    assert mse_vad(VadTriple(1, 1, 1), VadTriple(0, 0, 0)) == 3.0
    got = mse_vad(VadTriple(0.6, 0.5, 0.4), VadTriple(0.5, 0.5, 0.5))
    assert got == pytest.approx(0.02)


def test_mse_vad_is_unnormalized():
    # squared norm exactly, not divided by 3
    got = mse_vad(VadTriple(1, 0, 0), VadTriple(0, 0, 0))
    assert got == 1.0


# -- vad_consistency ------------------------------------------------------------------


def test_vad_consistency_exact_match():
    lex = unit_lexicon({"happy": (0.5, 0.5, 0.5)})
    value, covered = vad_consistency("happy", lex, VadTriple(0.5, 0.5, 0.5))
    assert covered and value == 0.0


def test_vad_consistency_single_axis():
    lex = unit_lexicon({"word": (0.5, 0.5, 0.5)})
    value, covered = vad_consistency("word", lex, VadTriple(0.5, 0.5, 0.2))
    assert covered and value == pytest.approx(0.3)


def test_vad_consistency_euclidean_not_squared():
    lex = unit_lexicon({"word": (0.5, 0.5, 0.5)})
    value, _ = vad_consistency("word", lex, VadTriple(0.1, 0.5, 0.2))
    assert value == pytest.approx(math.sqrt(0.4**2 + 0.3**2))


def test_vad_consistency_uncovered_flag():
    lex = unit_lexicon({})
    value, covered = vad_consistency("totally uncovered", lex, VadTriple(0.5, 0.5, 0.5))
    assert value == 0.0 and not covered


# -- appraisal_loss --------------------------------------------------------------------


def test_appraisal_matches_at_extremes():
    eps = 1e-7
    s = [1 - eps, eps, 1 - eps]
    assert appraisal_loss(s, [1, 0, 1]) == pytest.approx(0.0, abs=1e-6)


def test_appraisal_half_scores_are_ln2():
    assert appraisal_loss([0.5, 0.5], [0.3, 0.9]) == pytest.approx(math.log(2))


def test_appraisal_scalar_oracle():
    # BCE with soft target 0.5 at p=0.5 is ln 2
    expect = (-math.log(0.9) - math.log(0.9) + 2 * math.log(2)) / 4
    got = appraisal_loss([0.9, 0.1, 0.5, 0.5], [1, 0, 0.5, 0.5])
    assert got == pytest.approx(expect, rel=1e-12)
    assert expect == pytest.approx(0.3992, abs=1e-4)


def test_appraisal_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        appraisal_loss([0.5], [0.5, 0.5])


# -- combine -----------------------------------------------------------------------------


def test_combine_all_ones():
    w = LossWeights(1, 1, 1, 1, 1)
    out = combine(w, cls=0.1, reg=0.2, vad=0.3, app=0.4, flip=0.5)
    assert out.total == pytest.approx(1.5)
    assert out.present == frozenset({"cls", "reg", "vad", "app", "flip"})


def test_combine_zero_weight_excludes_value():
    w = LossWeights(lambda_flip=0.0)
    out = combine(w, cls=0.0, flip=123.0)
    assert out.total == 0.0
    assert out.flip == 123.0  # value retained for logging


def test_combine_weighted_arithmetic():
    w = LossWeights(1, 1, 1, 0.5, 0.4)
    out = combine(w, cls=0.2, reg=0.02, vad=0.3, app=0.4, flip=0.5)
    assert out.total == pytest.approx(0.2 + 0.02 + 0.3 + 0.2 + 0.2)
    assert out.total == pytest.approx(0.92)


def test_combine_absent_terms_are_zero_with_flag():
    out = combine(LossWeights(), cls=0.3)
    assert out.present == frozenset({"cls"})
    assert out.reg == 0.0 and out.vad == 0.0
    assert out.total == pytest.approx(0.3)


def test_combine_total_monotone_in_terms():
    w = LossWeights()
    lo = combine(w, cls=0.1, reg=0.1).total
    hi = combine(w, cls=0.2, reg=0.1).total
    assert hi >= lo


def test_weights_reject_negative():
    with pytest.raises(ValueError):
        LossWeights(lambda_cls=-0.1)


def test_default_weights_in_flat_bands():
    w = LossWeights()
    assert w.lambda_cls == 1.0 and w.lambda_reg == 1.0
    assert 0.5 <= w.lambda_vad <= 1.5
    assert 0.5 <= w.lambda_app <= 1.0
    assert 0.2 <= w.lambda_flip <= 0.6


def test_batch_mean_deterministic():
    vals = list(np.random.default_rng(5).random(1000))
    assert batch_mean(vals) == batch_mean(vals)
    assert batch_mean(vals) == pytest.approx(sum(vals) / len(vals), rel=1e-12)
