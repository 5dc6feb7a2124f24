"""Protocol-true training loop over a built-in differentiable toy generator.

The toy model is two logistic heads (multi-label probabilities and a VAD
triple) over bag-of-cues features; decoding is a deterministic template that
always emits a contract-valid one-line answer. Each step draws a source via
the entropy-aware mixture, computes the five-term objective with analytic
gradients, clips at global norm 1.0, and applies a from-scratch AdamW with
cosine LR and warmup. Simulated memory faults trigger the self-healing
policy: shrink the length budget by a fixed step, double gradient
accumulation, retry the step.

The text-consistency term backpropagates straight-through: its logged value
is the text-side distance, its gradient is that of ||v - vhat||_2 routed to
the numeric VAD head.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field

import numpy as np
import yaml

from . import _kernels
from ._features import cue_counts, tokenizer_hash
from .contract import EmotionAnswer, serialize_answer
from .errors import (
    EmptyDataset,
    FileMissing,
    HealingExhausted,
    InputOverflow,
    ProtocolMismatch,
)
from .lexicon import tokenize
from .losses import LossBreakdown, LossWeights, combine, mse_vad, vad_consistency
from .mixer import (
    MixtureState,
    draw_source,
    normalized_label_entropy,
    temperature,
    update_conf,
    update_entropy_ema,
)
from .schema import DecodeConfig, RunStamp, VadTriple, sha1_of_json

PROMPT_TEMPLATE_ID = "joint-emotion-vad-v1"
GRAD_CLIP_NORM = 1.0
ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.95
ADAM_EPS = 1e-8
# Smoothing radius for the straight-through norm gradient: the L2 distance is
# nonsmooth at v == vhat, so the routed gradient uses sqrt(||d||^2 + r^2) - r,
# which vanishes at the target instead of orbiting it. The logged term value
# is always the text-side distance.
VAD_ST_RADIUS = 0.02


# -- model ---------------------------------------------------------------


@dataclass
class ToyModel:
    """Two logistic heads over a flat parameter vector.

    theta layout: [w_label (K*F), b_label (K), w_vad (3*F), b_vad (3)];
    the head views share memory with theta so in-place optimizer updates
    propagate.
    """

    label_vocab: tuple[str, ...]
    cue_vocab: tuple[str, ...]
    theta: np.ndarray

    @property
    def k(self) -> int:
        return len(self.label_vocab)

    @property
    def f(self) -> int:
        return len(self.cue_vocab)

    def views(self):
        k, f = self.k, self.f
        w_label = self.theta[: k * f].reshape(k, f)
        b_label = self.theta[k * f : k * f + k]
        w_vad = self.theta[k * f + k : k * f + k + 3 * f].reshape(3, f)
        b_vad = self.theta[k * f + k + 3 * f :]
        return w_label, b_label, w_vad, b_vad

    def featurize(self, text: str) -> np.ndarray:
        return cue_counts(text, self.cue_vocab)

    def copy(self) -> "ToyModel":
        return ToyModel(self.label_vocab, self.cue_vocab, self.theta.copy())


def param_count(k: int, f: int) -> int:
    return k * f + k + 3 * f + 3


def init_model(label_vocab, cue_vocab, seed: int = 0, scale: float = 0.0) -> ToyModel:
    """Zero-initialized by default; scale > 0 adds seeded gaussian noise."""
    k, f = len(label_vocab), len(cue_vocab)
    theta = np.zeros(param_count(k, f))
    if scale > 0:
        rng = np.random.Generator(np.random.PCG64(seed))
        theta += scale * rng.standard_normal(theta.shape)
    return ToyModel(tuple(label_vocab), tuple(cue_vocab), theta)


@dataclass(frozen=True)
class ForwardResult:
    p: np.ndarray
    v: np.ndarray
    answer: EmotionAnswer
    answer_text: str


def forward(model: ToyModel, text: str, max_len: int = 1536) -> ForwardResult:
    """Deterministic greedy decode to a contract line.

    Emitted labels are the classes strictly above probability 0.5, falling
    back to the argmax (lowest index on ties) so the label list is never
    empty; a zero-weight model therefore emits exactly class 0. The
    rationale is a fixed per-label template, so the output always parses.
    """
    if len(tokenize(text)) > max_len:
        raise InputOverflow(f"input exceeds max_len={max_len}")
    phi = model.featurize(text)
    w_label, b_label, w_vad, b_vad = model.views()
    p, v = _kernels.toy_forward(w_label, b_label, w_vad, b_vad, phi)
    chosen = [i for i in range(model.k) if p[i] > 0.5]
    if not chosen:
        chosen = [int(np.argmax(p))]
    labels = tuple(model.label_vocab[i] for i in chosen)
    top = model.label_vocab[max(chosen, key=lambda i: (p[i], -i))]
    vad = VadTriple(float(v[0]), float(v[1]), float(v[2])).rounded()
    answer = EmotionAnswer(labels=labels, vad=vad, rationale=f"expresses {top}")
    return ForwardResult(p=p, v=v, answer=answer, answer_text=serialize_answer(answer))


# -- configuration -----------------------------------------------------------


@dataclass(frozen=True)
class TrainConfig:
    """Field names mirror the public run config; extras are desk-scale knobs."""

    seed: int = 42
    max_len: int = 1536
    epochs: int = 1
    batch_size: int = 1
    grad_accum: int = 128
    lr: float = 1.2e-5
    weight_decay: float = 0.1
    warmup_ratio: float = 0.03
    schedule: str = "cosine"
    mix_ratio: str = "50:50"
    t0: float = 1.5
    t1: float = 0.5
    alpha: float = 0.9
    mix_eps: float = 1e-8
    oom_floor: int = 1024
    oom_step: int = 128
    ema_enabled: bool = True
    ema_decay: float = 0.999
    logging_steps: int = 1
    max_steps: int | None = None
    weights: LossWeights = field(default_factory=LossWeights)
    decode: DecodeConfig = field(default_factory=DecodeConfig)

    def __post_init__(self):
        if self.max_len < self.oom_floor:
            raise ValueError("max_len must start at or above the healing floor")
        if self.grad_accum < 1:
            raise ValueError("grad_accum must be >= 1")

    def mix_weights(self) -> tuple[float, float]:
        a, b = (float(x) for x in self.mix_ratio.split(":"))
        total = a + b
        if total <= 0:
            raise ValueError(f"bad mix ratio {self.mix_ratio!r}")
        return a / total, b / total

    def config_hash(self) -> str:
        payload = {
            "seed": self.seed,
            "max_len": self.max_len,
            "epochs": self.epochs,
            "batch_size": self.batch_size,
            "grad_accum": self.grad_accum,
            "lr": self.lr,
            "weight_decay": self.weight_decay,
            "warmup_ratio": self.warmup_ratio,
            "schedule": self.schedule,
            "mix_ratio": self.mix_ratio,
            "t0": self.t0,
            "t1": self.t1,
            "alpha": self.alpha,
            "weights": {t: self.weights.of(t) for t in ("cls", "reg", "vad", "app", "flip")},
            "decode": self.decode.to_dict(),
        }
        return sha1_of_json(payload)


_CONFIG_ALIASES = {
    "gradient_accumulation_steps": "grad_accum",
    "learning_rate": "lr",
    "lr_scheduler_type": "schedule",
    "per_device_train_batch_size": "batch_size",
    "ratio": "mix_ratio",
}

_CONFIG_IGNORED = {
    "base_model",
    "train_path",
    "dev_path",
    "save_dir",
    "bf16",
    "gradient_checkpointing",
    "save_steps",
    "save_total_limit",
    "report_to",
}


def load_train_config(path: str) -> tuple[TrainConfig, dict]:
    """Read a YAML or JSON config; returns (config, passthrough fields).

    Passthrough holds recognized-but-out-of-band keys (paths, GPU-only
    switches) so the CLI can consume them.
    """
    if not os.path.exists(path):
        raise FileMissing(path)
    with open(path, "r", encoding="utf-8") as f:
        raw = yaml.safe_load(f)
    if not isinstance(raw, dict):
        raise ValueError("train config must be a mapping")
    kwargs = {}
    weights_kwargs = {}
    passthrough = {}
    for key, value in raw.items():
        key = _CONFIG_ALIASES.get(key, key)
        if key in _CONFIG_IGNORED:
            passthrough[key] = value
        elif key.startswith("lambda_"):
            weights_kwargs[key] = float(value)
        elif key in TrainConfig.__dataclass_fields__:
            kwargs[key] = value
        else:
            passthrough[key] = value
    if weights_kwargs:
        kwargs["weights"] = LossWeights(**weights_kwargs)
    return TrainConfig(**kwargs), passthrough


# -- per-example objective -----------------------------------------------------


def _example_terms(
    model: ToyModel,
    record,
    weights: LossWeights,
    lexicon=None,
    appraisal=None,
    pair=None,
    max_len: int = 1536,
    frozen_answer_text: str | None = None,
    surrogate_vad: bool = False,
):
    """Loss terms and the analytic gradient for one example.

    Returns (term values dict with None for absent, flat grad, extras).
    ``surrogate_vad`` swaps the logged text-side consistency value for the
    straight-through surrogate ||v-vhat||_2 (used by finite-difference
    checks; the gradient is identical either way).
    """
    k, f = model.k, model.f
    phi = model.featurize(record.text)
    w_label, b_label, w_vad, b_vad = model.views()
    p, v = _kernels.toy_forward(w_label, b_label, w_vad, b_vad, phi)
    if frozen_answer_text is None:
        answer_text = forward(model, record.text, max_len=max_len).answer_text
    else:
        answer_text = frozen_answer_text

    vhat = np.array(record.vad.as_tuple())
    y = np.zeros(k)
    for i, lab in enumerate(model.label_vocab):
        if lab in record.labels:
            y[i] = 1.0

    g_wl = np.zeros((k, f))
    g_bl = np.zeros(k)
    g_wv = np.zeros((3, f))
    g_bv = np.zeros(3)

    terms: dict[str, float | None] = {t: None for t in ("cls", "reg", "vad", "app", "flip")}

    # classification: mean BCE over K, d/dz = (p - y)/K
    terms["cls"] = float(_kernels.bce_mean(y, p))
    dz = weights.lambda_cls * (p - y) / k
    g_wl += np.outer(dz, phi)
    g_bl += dz

    du = np.zeros(3)
    sig_prime = v * (1.0 - v)

    # regression: squared L2, d/dv = 2(v - vhat)
    diff = v - vhat
    terms["reg"] = float(diff @ diff)
    du += weights.lambda_reg * 2.0 * diff * sig_prime

    # text consistency, straight-through on the numeric head
    if lexicon is not None:
        smooth_norm = float(np.sqrt(diff @ diff + VAD_ST_RADIUS**2))
        if surrogate_vad:
            value, covered = smooth_norm - VAD_ST_RADIUS, True
        else:
            value, covered = vad_consistency(answer_text, lexicon, record.vad)
        if covered:
            terms["vad"] = value
            du += weights.lambda_vad * (diff / smooth_norm) * sig_prime

    # appraisal guidance through the verifier's VAD feature slots
    if appraisal is not None and record.labels:
        s = appraisal.score(record.text, answer_text, v)
        s_tilde = appraisal.prototype(record.labels)
        terms["app"] = float(_kernels.bce_mean(s_tilde, s))
        dl_dv = ((s - s_tilde) @ appraisal.vad_weights()) / len(s)
        du += weights.lambda_app * dl_dv * sig_prime

    g_wv += np.outer(du, phi)
    g_bv += du

    # valence-flip symmetry over the mirrored pair (second forward pass)
    if pair is not None:
        phi_p = model.featurize(pair.flipped.text)
        _, v_p = _kernels.toy_forward(w_label, b_label, w_vad, b_vad, phi_p)
        resid = (v[0] - 0.5) + (v_p[0] - 0.5)
        terms["flip"] = abs(resid)
        sign = 0.0 if resid == 0.0 else math.copysign(1.0, resid)
        coeff = weights.lambda_flip * sign
        g_wv[0] += coeff * sig_prime[0] * phi
        g_bv[0] += coeff * sig_prime[0]
        g_wv[0] += coeff * (v_p[0] * (1.0 - v_p[0])) * phi_p
        g_bv[0] += coeff * v_p[0] * (1.0 - v_p[0])

    grad = np.concatenate([g_wl.ravel(), g_bl, g_wv.ravel(), g_bv])
    extras = {"p": p, "v": v, "answer_text": answer_text}
    return terms, grad, extras


def train_step(
    model: ToyModel,
    batch,
    weights: LossWeights,
    lexicon=None,
    appraisal=None,
    flip_pairs=None,
    max_len: int = 1536,
    clip: bool = True,
):
    """Mean loss terms and (optionally clipped) mean gradient over a batch.

    Absent terms count as zero in the means, so the breakdown total equals
    the mean of per-example totals exactly.
    """
    batch = list(batch)
    if not batch:
        raise EmptyDataset("train_step over an empty batch")
    flip_pairs = flip_pairs or {}
    n = len(batch)
    sums = {t: 0.0 for t in ("cls", "reg", "vad", "app", "flip")}
    present: set[str] = set()
    grad = np.zeros_like(model.theta)
    entropies = []
    for record in batch:
        terms, g, extras = _example_terms(
            model,
            record,
            weights,
            lexicon=lexicon,
            appraisal=appraisal,
            pair=flip_pairs.get(record.id),
            max_len=max_len,
        )
        for t, value in terms.items():
            if value is not None:
                sums[t] += value
                present.add(t)
        grad += g
        entropies.append(normalized_label_entropy(extras["p"]))
    grad /= n
    grad_norm = float(np.sqrt(grad @ grad))
    if clip and grad_norm > GRAD_CLIP_NORM:
        grad *= GRAD_CLIP_NORM / grad_norm
    breakdown = combine(
        weights,
        **{t: (sums[t] / n if t in present else None) for t in sums},
    )
    extras = {
        "grad_norm": grad_norm,
        "entropy": float(np.mean(entropies)),
    }
    return breakdown, grad, extras


# -- gradient check --------------------------------------------------------------


def grad_check(
    model: ToyModel,
    record,
    weights: LossWeights,
    lexicon=None,
    appraisal=None,
    pair=None,
    h: float = 1e-5,
) -> float:
    """Max relative error of the analytic gradient against central finite
    differences over every parameter, on the differentiable loss paths (the
    decoded text is frozen at the center point; the consistency term uses its
    straight-through surrogate)."""
    frozen = forward(model, record.text, max_len=1 << 30).answer_text

    def objective(theta: np.ndarray) -> float:
        probe = ToyModel(model.label_vocab, model.cue_vocab, theta)
        terms, _, _ = _example_terms(
            probe,
            record,
            weights,
            lexicon=lexicon,
            appraisal=appraisal,
            pair=pair,
            frozen_answer_text=frozen,
            surrogate_vad=True,
        )
        total = 0.0
        for t, value in terms.items():
            if value is not None:
                total += weights.of(t) * value
        return total

    _, analytic, _ = _example_terms(
        model,
        record,
        weights,
        lexicon=lexicon,
        appraisal=appraisal,
        pair=pair,
        frozen_answer_text=frozen,
        surrogate_vad=True,
    )
    theta = model.theta
    max_rel = 0.0
    for i in range(theta.shape[0]):
        saved = theta[i]
        theta_plus = theta.copy()
        theta_plus[i] = saved + h
        theta_minus = theta.copy()
        theta_minus[i] = saved - h
        numeric = (objective(theta_plus) - objective(theta_minus)) / (2.0 * h)
        rel = abs(analytic[i] - numeric) / max(abs(analytic[i]), abs(numeric), 1e-6)
        max_rel = max(max_rel, rel)
    return max_rel


# -- the training loop --------------------------------------------------------------


@dataclass
class HealingLog:
    events: list[dict] = field(default_factory=list)

    def record(self, step: int, old_len: int, new_len: int, old_accum: int, new_accum: int):
        self.events.append(
            {
                "step": step,
                "old_max_len": old_len,
                "new_max_len": new_len,
                "old_accum": old_accum,
                "new_accum": new_accum,
            }
        )


@dataclass
class TrainResult:
    model: ToyModel
    ema_model: ToyModel | None
    step_logs: list[dict]
    healing: HealingLog
    summary: dict
    stamp: RunStamp


def _cosine_lr(step: int, total: int, base_lr: float, warmup_ratio: float) -> float:
    warmup = max(1, round(warmup_ratio * total))
    if step <= warmup:
        return base_lr * step / warmup
    if total <= warmup:
        return base_lr
    progress = (step - warmup) / (total - warmup)
    return base_lr * 0.5 * (1.0 + math.cos(math.pi * progress))


def _smoothed_min(values, window: int = 5) -> tuple[float, int]:
    """(min smoothed value, index) under a trailing moving average."""
    best = math.inf
    best_i = 0
    acc = 0.0
    buf = []
    for i, x in enumerate(values):
        buf.append(x)
        acc += x
        if len(buf) > window:
            acc -= buf.pop(0)
        smoothed = acc / len(buf)
        if smoothed < best:
            best = smoothed
            best_i = i
    return best, best_i


def make_run_stamp(config: TrainConfig, environment=()) -> RunStamp:
    return RunStamp(
        seed=config.seed,
        config_hash=config.config_hash(),
        prompt_template_id=PROMPT_TEMPLATE_ID,
        decode_config=config.decode,
        environment=tuple(environment),
    )


def run_training(
    config: TrainConfig,
    data_a,
    data_b,
    fault_schedule=(),
    lexicon=None,
    appraisal=None,
    flip_pairs=None,
    model: ToyModel | None = None,
    label_vocab=None,
    cue_vocab=None,
    log_path: str | None = None,
    mix_w: tuple[float, float] | None = None,
) -> TrainResult:
    """One full protocol run; see the module docstring for the step anatomy.

    ``fault_schedule`` lists step indices that raise a simulated memory
    fault; each occurrence triggers one healing event before the step
    completes. Raises HealingExhausted (with logs intact in the result's
    ``step_logs``) when a fault arrives at the floor.
    """
    data_a, data_b = list(data_a), list(data_b)
    if not data_a or not data_b:
        raise EmptyDataset("both sources must be nonempty")
    if config.decode.kv_cache:
        raise ProtocolMismatch("protocol-true training requires kv_cache=false")

    if model is None:
        if label_vocab is None:
            label_vocab = sorted({lab for r in data_a + data_b for lab in r.labels})
        if cue_vocab is None:
            raise ValueError("cue_vocab is required when no model is given")
        model = init_model(label_vocab, cue_vocab, seed=config.seed)

    t_max = config.max_steps or config.epochs * (len(data_a) + len(data_b))
    rng = np.random.Generator(np.random.PCG64(config.seed))
    state = MixtureState(
        w=mix_w if mix_w is not None else config.mix_weights(),
        t0=config.t0,
        t1=config.t1,
        t_max=t_max,
        alpha=config.alpha,
        eps=config.mix_eps,
    )
    flip_pairs = flip_pairs or {}
    fault_budget: dict[int, int] = {}
    for s in fault_schedule:
        fault_budget[s] = fault_budget.get(s, 0) + 1

    max_len = config.max_len
    grad_accum = config.grad_accum
    healing = HealingLog()
    step_logs: list[dict] = []
    stamp = make_run_stamp(config)

    opt_m = np.zeros_like(model.theta)
    opt_v = np.zeros_like(model.theta)
    opt_step = 0
    accum = np.zeros_like(model.theta)
    accum_count = 0
    ema = model.theta.copy() * 0.0 if config.ema_enabled else None
    ema_steps = 0

    log_file = open(log_path, "w", encoding="utf-8", newline="\n") if log_path else None
    totals_logged: list[float] = []
    steps_logged: list[int] = []

    def emit(row: dict):
        step_logs.append(row)
        if log_file:
            log_file.write(json.dumps(row, sort_keys=True, separators=(",", ":")) + "\n")
            log_file.flush()

    try:
        for t in range(1, t_max + 1):
            state.t = t
            t_cur = temperature(t, config.t0, config.t1, t_max)
            source = draw_source(state, rng)
            pool = data_a if source == "A" else data_b
            idx = [int(rng.integers(len(pool))) for _ in range(config.batch_size)]
            batch = [pool[i] for i in idx]

            while fault_budget.get(t, 0) > 0:
                fault_budget[t] -= 1
                if max_len <= config.oom_floor:
                    exc = HealingExhausted(
                        f"fault at step {t} with max_len={max_len} at the floor"
                    )
                    exc.step_logs = step_logs
                    exc.healing = healing
                    raise exc
                new_len = max_len - config.oom_step
                new_accum = grad_accum * 2
                healing.record(t, max_len, new_len, grad_accum, new_accum)
                max_len, grad_accum = new_len, new_accum
                accum[:] = 0.0  # restart the accumulation window on retry
                accum_count = 0

            breakdown, grad, extras = train_step(
                model,
                batch,
                config.weights,
                lexicon=lexicon,
                appraisal=appraisal,
                flip_pairs=flip_pairs,
                max_len=max_len,
            )
            accum += grad
            accum_count += 1
            lr_t = _cosine_lr(t, t_max, config.lr, config.warmup_ratio)
            if accum_count >= grad_accum:
                opt_step += 1
                mean_grad = accum / accum_count
                _kernels.adamw_update(
                    model.theta,
                    mean_grad,
                    opt_m,
                    opt_v,
                    opt_step,
                    lr_t,
                    ADAM_BETA1,
                    ADAM_BETA2,
                    ADAM_EPS,
                    config.weight_decay,
                )
                accum[:] = 0.0
                accum_count = 0

            if ema is not None:
                ema *= config.ema_decay
                ema += (1.0 - config.ema_decay) * model.theta
                ema_steps += 1

            h_t = extras["entropy"]
            update_conf(state, source, h_t)
            update_entropy_ema(state, source, h_t)

            if t % config.logging_steps == 0 or t == t_max:
                row = {
                    "step": t,
                    "T": t_cur,
                    "w": list(state.w),
                    "conf": list(state.conf),
                    "drawn_source": source,
                    "H_t": h_t,
                    "lr": lr_t,
                    "grad_norm": extras["grad_norm"],
                    "max_len": max_len,
                    "grad_accum": grad_accum,
                }
                row.update(breakdown.to_dict())
                emit(row)
                totals_logged.append(breakdown.total)
                steps_logged.append(t)
    finally:
        if log_file:
            log_file.close()

    steps_per_epoch = t_max / max(1, config.epochs)
    best_loss, best_i = _smoothed_min(totals_logged)
    summary = {
        "points": len(totals_logged),
        "best_loss": best_loss,
        "best_epoch": steps_logged[best_i] / steps_per_epoch if totals_logged else 0.0,
        "t_max": t_max,
        "final_max_len": max_len,
        "final_grad_accum": grad_accum,
        "healing_events": len(healing.events),
        "entropy_ema": dict(state.entropy_ema),
    }

    ema_model = None
    if ema is not None and ema_steps > 0:
        correction = 1.0 - config.ema_decay**ema_steps
        ema_model = ToyModel(model.label_vocab, model.cue_vocab, ema / correction)

    return TrainResult(
        model=model,
        ema_model=ema_model,
        step_logs=step_logs,
        healing=healing,
        summary=summary,
        stamp=stamp,
    )


# -- checkpoints ----------------------------------------------------------------


def save_checkpoint(result: TrainResult, path: str) -> None:
    obj = {
        "label_vocab": list(result.model.label_vocab),
        "cue_vocab": list(result.model.cue_vocab),
        "theta": result.model.theta.tolist(),
        "theta_ema": result.ema_model.theta.tolist() if result.ema_model else None,
        "run_stamp": result.stamp.to_dict(),
        "tokenizer_hash": tokenizer_hash(result.model.cue_vocab),
        "summary": result.summary,
        "healing_events": result.healing.events,
    }
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        json.dump(obj, f, sort_keys=True, separators=(",", ":"))
        f.write("\n")


def load_checkpoint(path: str, use_ema: bool = True):
    """Returns (model, stamp). Prefers EMA weights when present."""
    if not os.path.exists(path):
        raise FileMissing(path)
    with open(path, "r", encoding="utf-8") as f:
        obj = json.load(f)
    theta = obj["theta_ema"] if (use_ema and obj.get("theta_ema")) else obj["theta"]
    model = ToyModel(
        label_vocab=tuple(obj["label_vocab"]),
        cue_vocab=tuple(obj["cue_vocab"]),
        theta=np.asarray(theta, dtype=np.float64),
    )
    stamp_obj = obj["run_stamp"]
    stamp = RunStamp(
        seed=stamp_obj["seed"],
        config_hash=stamp_obj["config_hash"],
        prompt_template_id=stamp_obj["prompt_template_id"],
        decode_config=DecodeConfig(**stamp_obj["decode_config"]),
        environment=tuple(sorted(stamp_obj.get("environment", {}).items())),
    )
    return model, stamp
