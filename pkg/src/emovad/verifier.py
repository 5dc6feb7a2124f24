"""External appraisal-atom classifier (training-time guidance only).

A per-atom logistic regression over weak cue features scores text pairs on
appraisal dimensions (goal attainment, controllability, certainty, fairness).
Prototypes for multi-label targets are componentwise means of per-label rows.
The generator's inference path never imports or reads this module's
artifacts.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
from dataclasses import dataclass

import numpy as np

from . import _kernels
from ._features import cue_counts, feature_length, load_cue_vocab
from .errors import FileMissing, UnknownLabel

__all__ = [
    "AtomPrototypeTable",
    "VerifierModel",
    "AppraisalGuide",
    "load_prototype_table",
    "load_cue_vocab",
    "prototype",
    "featurize",
    "feature_length",
    "train_verifier",
    "verifier_loss",
    "score",
    "save_verifier",
    "load_verifier",
    "init_verifier",
    "DEFAULT_ATOMS",
]

log = logging.getLogger(__name__)

DEFAULT_ATOMS = ("goal_attainment", "controllability", "certainty", "fairness")
LOSS_TOLERANCE = 1e-9


@dataclass(frozen=True)
class AtomPrototypeTable:
    atoms: tuple[str, ...]
    rows: dict[str, tuple[float, ...]]


@dataclass
class VerifierModel:
    weights: np.ndarray  # (M, F)
    bias: np.ndarray  # (M,)
    feature_vocab: tuple[str, ...]
    atoms: tuple[str, ...]


def load_prototype_table(path: str) -> AtomPrototypeTable:
    if not os.path.exists(path):
        raise FileMissing(path)
    with open(path, "r", encoding="utf-8") as f:
        obj = json.load(f)
    atoms = tuple(obj["atoms"])
    rows = {}
    for label, row in obj["rows"].items():
        if len(row) != len(atoms):
            raise ValueError(f"prototype row for {label!r} has wrong arity")
        rows[label] = tuple(float(x) for x in row)
    return AtomPrototypeTable(atoms=atoms, rows=rows)


def prototype(labels, table: AtomPrototypeTable) -> np.ndarray:
    """Componentwise mean of the rows for the given (nonempty) label set."""
    labels = sorted(labels)
    if not labels:
        raise UnknownLabel("prototype of an empty label set")
    rows = []
    for label in labels:
        if label not in table.rows:
            raise UnknownLabel(f"no prototype row for label {label!r}")
        rows.append(table.rows[label])
    return np.asarray(rows, dtype=np.float64).mean(axis=0)


# -- featurization -----------------------------------------------------------


def _vad_from_answer_text(answer_text: str) -> tuple[float, float, float]:
    from .contract import tail_scan  # deferred: keep import graphs one-way

    outcome = tail_scan(answer_text)
    if outcome.answer is not None:
        return outcome.answer.vad.as_tuple()
    return (0.0, 0.0, 0.0)


def featurize(x: str, a: str, cue_vocab, vad=None) -> np.ndarray:
    """Cue counts over x, cue counts over a, then the answer's VAD triple.

    Pass the unrounded numeric triple as ``vad`` during training so the
    appraisal loss stays differentiable through the VAD slots; when omitted
    the (rounded) triple is recovered from the answer text.
    """
    if vad is None:
        vad = _vad_from_answer_text(a)
    return np.concatenate(
        [
            cue_counts(x, cue_vocab),
            cue_counts(a, cue_vocab),
            np.asarray(vad, dtype=np.float64),
        ]
    )


# -- training ----------------------------------------------------------------


def init_verifier(cue_vocab, atoms=DEFAULT_ATOMS) -> VerifierModel:
    f = feature_length(cue_vocab)
    return VerifierModel(
        weights=np.zeros((len(atoms), f)),
        bias=np.zeros(len(atoms)),
        feature_vocab=tuple(cue_vocab),
        atoms=tuple(atoms),
    )


def _canonical_order(examples) -> list[int]:
    keys = []
    for i, (x, a, s_tilde) in enumerate(examples):
        payload = "\x00".join([x, a, ",".join(f"{t:.12g}" for t in s_tilde)])
        keys.append((hashlib.sha1(payload.encode("utf-8")).hexdigest(), i))
    keys.sort()
    return [i for _, i in keys]


def train_verifier(
    examples,
    epochs: int,
    lr: float = 0.5,
    seed: int = 0,
    cue_vocab=None,
    atoms=DEFAULT_ATOMS,
) -> VerifierModel:
    """Full-batch gradient descent on mean BCE, deterministic given seed.

    Example order is canonicalized by content digest and then permuted by the
    seed, so shuffled inputs train identical models. The per-epoch loss must
    not increase (tolerance 1e-9); a violating step is retried at half lr.
    """
    examples = list(examples)
    if not examples:
        raise ValueError("train_verifier needs a nonempty training set")
    if cue_vocab is None:
        raise ValueError("cue_vocab is required")
    order = _canonical_order(examples)
    rng = np.random.Generator(np.random.PCG64(seed))
    order = [order[i] for i in rng.permutation(len(order))]

    x_mat = np.stack(
        [
            featurize(examples[i][0], examples[i][1], cue_vocab)
            for i in order
        ]
    )
    y_mat = np.stack(
        [np.asarray(examples[i][2], dtype=np.float64) for i in order]
    )
    zero_cols = np.flatnonzero(~x_mat.any(axis=0))
    if zero_cols.size:
        log.warning("degenerate features: %d all-zero columns", zero_cols.size)

    model = init_verifier(cue_vocab, atoms)
    w, b = model.weights, model.bias
    for _ in range(epochs):
        loss_here, gw, gb = _kernels.logreg_epoch(x_mat, y_mat, w, b)
        while True:
            w_new = w - lr * gw
            b_new = b - lr * gb
            loss_new, _, _ = _kernels.logreg_epoch(x_mat, y_mat, w_new, b_new)
            if loss_new <= loss_here + LOSS_TOLERANCE:
                w, b = w_new, b_new
                break
            lr *= 0.5
    model.weights, model.bias = w, b
    return model


def verifier_loss(model: VerifierModel, examples) -> float:
    x_mat = np.stack(
        [featurize(x, a, model.feature_vocab) for x, a, _ in examples]
    )
    y_mat = np.stack([np.asarray(s, dtype=np.float64) for _, _, s in examples])
    loss, _, _ = _kernels.logreg_epoch(x_mat, y_mat, model.weights, model.bias)
    return float(loss)


def score(model: VerifierModel, x: str, a: str, vad=None) -> np.ndarray:
    """Per-atom logistic scores in the open interval (0,1)."""
    phi = featurize(x, a, model.feature_vocab, vad=vad)
    s = _kernels.sigmoid(model.weights @ phi + model.bias)
    return np.clip(s, 1e-12, 1.0 - 1e-12)


@dataclass(frozen=True)
class AppraisalGuide:
    """Training-time handle handed to the trainer (which never imports this
    module directly): scoring, prototypes, and the VAD-slot weights the
    appraisal gradient flows through."""

    model: VerifierModel
    table: AtomPrototypeTable

    def score(self, x: str, a: str, vad) -> np.ndarray:
        return score(self.model, x, a, vad=vad)

    def prototype(self, labels) -> np.ndarray:
        return prototype(labels, self.table)

    def vad_weights(self) -> np.ndarray:
        return self.model.weights[:, -3:]


# -- persistence ---------------------------------------------------------------


def save_verifier(model: VerifierModel, path: str) -> None:
    obj = {
        "weights": model.weights.tolist(),
        "bias": model.bias.tolist(),
        "feature_vocab": list(model.feature_vocab),
        "atoms": list(model.atoms),
    }
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        json.dump(obj, f, sort_keys=True, separators=(",", ":"))
        f.write("\n")


def load_verifier(path: str) -> VerifierModel:
    if not os.path.exists(path):
        raise FileMissing(path)
    with open(path, "r", encoding="utf-8") as f:
        obj = json.load(f)
    return VerifierModel(
        weights=np.asarray(obj["weights"], dtype=np.float64),
        bias=np.asarray(obj["bias"], dtype=np.float64),
        feature_vocab=tuple(obj["feature_vocab"]),
        atoms=tuple(obj["atoms"]),
    )
