"""Two-source sampling: softmax over temperature-scaled, confidence-adjusted
weights, linear temperature cooling, per-source confidence EMA, and the
entropy-driven epoch rebalance."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import BadSchedule

SOURCES = ("A", "B")
CONF_FLOOR = 1e-6


@dataclass
class MixtureState:
    """Mutable sampling state owned by the training loop.

    Weights stay normalized; confidences start at 1 and stay positive.
    """

    w: tuple[float, float] = (0.5, 0.5)
    conf: tuple[float, float] = (1.0, 1.0)
    t0: float = 1.5
    t1: float = 0.5
    t: int = 0
    t_max: int = 1
    alpha: float = 0.9
    eps: float = 1e-8
    entropy_ema: dict = field(default_factory=lambda: {"A": 0.0, "B": 0.0})

    def __post_init__(self):
        total = self.w[0] + self.w[1]
        if total <= 0:
            raise ValueError("mixture weights must have positive sum")
        self.w = (self.w[0] / total, self.w[1] / total)
        if min(self.conf) <= 0:
            raise ValueError("confidences must be positive")
        if not 0.0 <= self.alpha < 1.0:
            raise ValueError("alpha must be in [0,1)")

    def snapshot(self) -> dict:
        return {
            "t": self.t,
            "T": temperature(self.t, self.t0, self.t1, self.t_max),
            "w": list(self.w),
            "conf": list(self.conf),
        }


def temperature(t: int, t0: float, t1: float, t_max: int) -> float:
    """Linear cooling: T(0)=t0, T(t_max)=t1."""
    if t0 <= 0 or t1 <= 0:
        raise BadSchedule(f"temperatures must be positive, got T0={t0}, T1={t1}")
    if t_max <= 0:
        raise BadSchedule(f"t_max must be positive, got {t_max}")
    return t0 - (t0 - t1) * t / t_max


def source_probs(state: MixtureState) -> np.ndarray:
    """softmax((w_s/conf_s)/T) over the two sources."""
    t_cur = temperature(state.t, state.t0, state.t1, state.t_max)
    logits = np.array(
        [state.w[0] / state.conf[0], state.w[1] / state.conf[1]]
    ) / t_cur
    logits -= logits.max()
    e = np.exp(logits)
    return e / e.sum()


def draw_source(state: MixtureState, rng: np.random.Generator) -> str:
    """Inverse-CDF draw against source_probs; deterministic given rng state."""
    p = source_probs(state)
    return "A" if rng.random() < p[0] else "B"


def update_conf(state: MixtureState, source: str, h_t: float) -> MixtureState:
    """EMA update conf_s <- alpha*conf_s + (1-alpha)*exp(-H_t), drawn source only."""
    if h_t < 0:
        raise ValueError(f"entropy must be nonnegative, got {h_t}")
    idx = SOURCES.index(source)
    conf = list(state.conf)
    conf[idx] = max(
        CONF_FLOOR, state.alpha * conf[idx] + (1.0 - state.alpha) * math.exp(-h_t)
    )
    state.conf = tuple(conf)
    return state


def update_entropy_ema(state: MixtureState, source: str, h_t: float) -> None:
    prev = state.entropy_ema[source]
    state.entropy_ema[source] = state.alpha * prev + (1.0 - state.alpha) * h_t


def rebalance(w, h_bar, eps: float) -> tuple[float, float]:
    """w_s <- normalize(w_s / (Hbar_s + eps)); low-entropy sources gain."""
    scaled = [wi / (hi + eps) for wi, hi in zip(w, h_bar)]
    total = sum(scaled)
    return tuple(x / total for x in scaled)


def normalized_label_entropy(p) -> float:
    """Shannon entropy (nats) of p renormalized to a distribution, divided
    by ln K so the value lies in [0,1]. Returns 0 for K=1."""
    p = np.asarray(p, dtype=np.float64)
    k = p.shape[0]
    if k <= 1:
        return 0.0
    total = p.sum()
    if total <= 0:
        return 1.0
    q = p / total
    q = np.clip(q, 1e-300, None)
    h = float(-(q * np.log(q)).sum())
    return min(1.0, max(0.0, h / math.log(k)))
