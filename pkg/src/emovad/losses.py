"""The five training loss terms and their weighted combination.

Conventions match the objective exactly: the classification and appraisal
terms are per-component mean BCE, the VAD regression term is an UNnormalized
squared L2 norm, the text-consistency term is a plain (not squared) L2
distance, and the flip term is the absolute sum of centered valences.
Probabilities are clamped to [1e-7, 1-1e-7] before any log.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .augment import flip_loss
from .errors import DimensionMismatch
from .lexicon import Lexicon, weak_vad_of_text
from .schema import VadTriple

TERMS = ("cls", "reg", "vad", "app", "flip")


@dataclass(frozen=True)
class LossWeights:
    """Term weights; defaults sit at the midpoints of the flat bands."""

    lambda_cls: float = 1.0
    lambda_reg: float = 1.0
    lambda_vad: float = 1.0
    lambda_app: float = 0.75
    lambda_flip: float = 0.4

    def __post_init__(self):
        for name in (
            "lambda_cls",
            "lambda_reg",
            "lambda_vad",
            "lambda_app",
            "lambda_flip",
        ):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be nonnegative")

    def of(self, term: str) -> float:
        return getattr(self, f"lambda_{term}")


@dataclass(frozen=True)
class LossBreakdown:
    """Per-term values plus the weighted total; absent terms are 0 and not
    listed in ``present``."""

    cls: float
    reg: float
    vad: float
    app: float
    flip: float
    total: float
    present: frozenset[str]

    def to_dict(self) -> dict:
        return {
            "cls": self.cls,
            "reg": self.reg,
            "vad": self.vad,
            "app": self.app,
            "flip": self.flip,
            "total": self.total,
        }


def bce_multilabel(y, p) -> float:
    """Mean over K classes of binary cross-entropy."""
    y = np.asarray(y, dtype=np.float64)
    p = np.asarray(p, dtype=np.float64)
    if y.shape != p.shape or y.ndim != 1:
        raise DimensionMismatch(f"y {y.shape} vs p {p.shape}")
    return float(_kernels.bce_mean(y, p))


def mse_vad(v: VadTriple, vhat: VadTriple) -> float:
    """Squared L2 norm of the componentwise difference (no /3)."""
    dv = v.v - vhat.v
    da = v.a - vhat.a
    dd = v.d - vhat.d
    return dv * dv + da * da + dd * dd


def vad_consistency(
    answer_text: str, lexicon: Lexicon, vhat: VadTriple
) -> tuple[float, bool]:
    """L2 distance between the text-implied VAD and the target.

    Returns (value, covered). Zero lexicon coverage yields (0.0, False) and
    the term is skipped by the caller.
    """
    weak = weak_vad_of_text(answer_text, lexicon)
    if weak.vad_text is None:
        return 0.0, False
    vt = weak.vad_text
    dist = np.sqrt(
        (vt.v - vhat.v) ** 2 + (vt.a - vhat.a) ** 2 + (vt.d - vhat.d) ** 2
    )
    return float(dist), True


def appraisal_loss(s, s_tilde) -> float:
    """Mean BCE of verifier scores against the atom prototype."""
    s = np.asarray(s, dtype=np.float64)
    s_tilde = np.asarray(s_tilde, dtype=np.float64)
    if s.shape != s_tilde.shape or s.ndim != 1:
        raise DimensionMismatch(f"s {s.shape} vs s_tilde {s_tilde.shape}")
    return float(_kernels.bce_mean(s_tilde, s))


def combine(
    weights: LossWeights,
    cls: float | None = None,
    reg: float | None = None,
    vad: float | None = None,
    app: float | None = None,
    flip: float | None = None,
) -> LossBreakdown:
    """Weighted sum over the present terms; None marks a term absent."""
    parts = {"cls": cls, "reg": reg, "vad": vad, "app": app, "flip": flip}
    present = frozenset(k for k, val in parts.items() if val is not None)
    values = {k: (parts[k] if parts[k] is not None else 0.0) for k in TERMS}
    total = sum(weights.of(k) * values[k] for k in TERMS if k in present)
    return LossBreakdown(
        cls=values["cls"],
        reg=values["reg"],
        vad=values["vad"],
        app=values["app"],
        flip=values["flip"],
        total=total,
        present=present,
    )


def batch_mean(values) -> float:
    """Deterministic batch reduction (adjacent-pair folding)."""
    return _kernels.pairwise_mean(np.asarray(list(values), dtype=np.float64))


__all__ = [
    "LossWeights",
    "LossBreakdown",
    "bce_multilabel",
    "mse_vad",
    "vad_consistency",
    "appraisal_loss",
    "combine",
    "batch_mean",
    "flip_loss",
    "TERMS",
]
