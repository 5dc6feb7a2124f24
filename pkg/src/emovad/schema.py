"""Data model, JSONL ingestion, dedup, frozen splits, manifests, integrity checks.

Record lines are UTF-8, one JSON object per line, LF-terminated. The text
field may be named ``utterance`` or ``text`` on read (``utterance`` wins when
both are present); labels may arrive as ``label_cat`` or ``labels``. Writes
emit ``utterance`` and ``labels``. Unknown ``qc_flags`` keys pass through
verbatim.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import math
import os
from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyDataset, FileMissing, MalformedJson, SchemaViolation

VALID_SPLITS = ("train", "dev")


@dataclass(frozen=True)
class VadTriple:
    """Valence/arousal/dominance, each in [0,1]."""

    v: float
    a: float
    d: float

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.v, self.a, self.d)

    def rounded(self) -> "VadTriple":
        return VadTriple(round(self.v, 2), round(self.a, 2), round(self.d, 2))

    def in_range(self) -> bool:
        return all(0.0 <= x <= 1.0 for x in self.as_tuple())


@dataclass(frozen=True)
class UtteranceRecord:
    """One training/eval example (multi-hot labels plus a VAD target)."""

    id: str
    text: str
    labels: frozenset[str]
    vad: VadTriple
    vad_conf: float = 1.0
    context: str = ""
    qc_flags: tuple[tuple[str, object], ...] = ()
    split: str = "train"

    def qc(self) -> dict:
        return dict(self.qc_flags)

    def with_fields(self, **changes) -> "UtteranceRecord":
        return dataclasses.replace(self, **changes)


@dataclass(frozen=True)
class DecodeConfig:
    """The public decoding recipe; identical for training and evaluation."""

    kv_cache: bool = False
    temperature: float = 0.0
    top_p: float = 1.0
    max_new_tokens: int = 64
    max_len: int = 1536

    def to_dict(self) -> dict:
        return {
            "kv_cache": self.kv_cache,
            "temperature": self.temperature,
            "top_p": self.top_p,
            "max_new_tokens": self.max_new_tokens,
            "max_len": self.max_len,
        }

    def hash(self) -> str:
        return sha1_of_json(self.to_dict())


@dataclass(frozen=True)
class RunStamp:
    """Reproducibility stamp bundled with every run's outputs."""

    seed: int
    config_hash: str
    prompt_template_id: str
    decode_config: DecodeConfig
    environment: tuple[tuple[str, str], ...] = ()

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "config_hash": self.config_hash,
            "prompt_template_id": self.prompt_template_id,
            "decode_config": self.decode_config.to_dict(),
            "environment": dict(self.environment),
        }


@dataclass
class DatasetManifest:
    """Shard bookkeeping: mixture ratio, seed, paths, checksums, split sizes.

    All relative paths are resolved against the manifest's own directory.
    The shard for split key ``s`` is ``<manifest_dir>/<s>.jsonl``.
    """

    mix: str
    seed: int
    dev_frac: float
    sources: dict[str, str]
    dev: dict[str, str]
    checksums: dict[str, str] = field(default_factory=dict)
    split_sizes: dict[str, int] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "mix": self.mix,
            "seed": self.seed,
            "dev_frac": self.dev_frac,
            "sources": self.sources,
            "dev": self.dev,
            "checksums": self.checksums,
            "split_sizes": self.split_sizes,
        }


@dataclass(frozen=True)
class ManifestIssue:
    path: str
    kind: str  # ChecksumMismatch | CountMismatch | FileMissing
    detail: str


@dataclass(frozen=True)
class ManifestReport:
    ok: bool
    issues: tuple[ManifestIssue, ...]


# -- canonical JSON helpers ----------------------------------------------


def canonical_json(obj) -> str:
    """Deterministic single-line JSON (sorted keys, compact separators)."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def sha1_of_json(obj) -> str:
    return hashlib.sha1(canonical_json(obj).encode("utf-8")).hexdigest()


def sha1_of_file(path: str) -> str:
    h = hashlib.sha1()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


# -- record parsing / serialization ---------------------------------------


def _vad_from_obj(obj, line_no) -> VadTriple:
    if not isinstance(obj, dict):
        raise SchemaViolation("vad must be an object with keys v,a,d", line_no)
    try:
        vad = VadTriple(float(obj["v"]), float(obj["a"]), float(obj["d"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaViolation(f"bad vad object: {exc!r}", line_no) from exc
    if not vad.in_range():
        raise SchemaViolation(f"vad component out of [0,1]: {vad.as_tuple()}", line_no)
    return vad


def parse_record(line: str, line_no: int | None = None) -> UtteranceRecord:
    """Parse one JSONL line into an UtteranceRecord.

    Required: id, utterance/text, vad. Optional with defaults: labels/label_cat
    (empty), vad_conf (1.0), context (""), qc_flags ({}), split ("train").
    VAD bounds are checked, never silently clamped.
    """
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise MalformedJson(f"not valid JSON: {exc.msg}", line_no) from exc
    if not isinstance(obj, dict):
        raise MalformedJson("line is not a JSON object", line_no)

    rec_id = obj.get("id")
    if not isinstance(rec_id, str) or not rec_id:
        raise SchemaViolation("missing or empty 'id'", line_no)

    text = obj.get("utterance", obj.get("text"))
    if not isinstance(text, str):
        raise SchemaViolation("missing text field ('utterance' or 'text')", line_no)

    if "vad" not in obj:
        raise SchemaViolation("missing 'vad'", line_no)
    vad = _vad_from_obj(obj["vad"], line_no)

    raw_labels = obj.get("label_cat", obj.get("labels", []))
    if not isinstance(raw_labels, list) or not all(
        isinstance(x, str) for x in raw_labels
    ):
        raise SchemaViolation("labels must be a list of strings", line_no)

    vad_conf = obj.get("vad_conf", 1.0)
    if not isinstance(vad_conf, (int, float)) or not 0.0 <= float(vad_conf) <= 1.0:
        raise SchemaViolation(f"vad_conf out of [0,1]: {vad_conf!r}", line_no)

    qc = obj.get("qc_flags", {})
    if not isinstance(qc, dict):
        raise SchemaViolation("qc_flags must be an object", line_no)

    split = obj.get("split", "train")
    if split not in VALID_SPLITS:
        raise SchemaViolation(f"split must be one of {VALID_SPLITS}", line_no)

    return UtteranceRecord(
        id=rec_id,
        text=text,
        labels=frozenset(raw_labels),
        vad=vad,
        vad_conf=float(vad_conf),
        context=obj.get("context", "") or "",
        qc_flags=tuple(sorted(qc.items())),
        split=split,
    )


def serialize_record(record: UtteranceRecord) -> str:
    """Canonical one-line form; parse_record round-trips it."""
    obj = {
        "id": record.id,
        "utterance": record.text,
        "context": record.context,
        "labels": sorted(record.labels),
        "vad": {"v": record.vad.v, "a": record.vad.a, "d": record.vad.d},
        "vad_conf": record.vad_conf,
        "qc_flags": dict(record.qc_flags),
        "split": record.split,
    }
    return json.dumps(obj, separators=(",", ":"), ensure_ascii=False)


# -- dedup ---------------------------------------------------------------


def dedup_key(record: UtteranceRecord) -> str:
    """SHA-1 of the raw byte concatenation text||id (no separator).

    The concatenation is ambiguous by design — ("ab","") and ("a","b")
    collide — and accepted as such.
    """
    return hashlib.sha1((record.text + record.id).encode("utf-8")).hexdigest()


def dedup_records(records) -> list[UtteranceRecord]:
    """Drop records whose dedup_key already appeared; keep first occurrences."""
    seen: set[str] = set()
    out = []
    for rec in records:
        key = dedup_key(rec)
        if key in seen:
            continue
        seen.add(key)
        out.append(rec)
    return out


# -- frozen splits ---------------------------------------------------------


def split_dev(records, dev_frac: float, seed: int):
    """Deterministic dev split: the first ceil(dev_frac*N) of a PCG64(seed)
    permutation become dev, the rest train, both in permuted order."""
    records = list(records)
    if not records:
        raise EmptyDataset("cannot split an empty dataset")
    if not 0.0 < dev_frac < 1.0:
        raise ValueError(f"dev_frac must be in (0,1), got {dev_frac}")
    rng = np.random.Generator(np.random.PCG64(seed))
    perm = rng.permutation(len(records))
    n_dev = math.ceil(dev_frac * len(records))
    dev = [records[i] for i in perm[:n_dev]]
    train = [records[i] for i in perm[n_dev:]]
    return train, dev


# -- JSONL I/O -------------------------------------------------------------


def read_jsonl(path: str) -> list[UtteranceRecord]:
    if not os.path.exists(path):
        raise FileMissing(path)
    out = []
    with open(path, "r", encoding="utf-8") as f:
        for i, line in enumerate(f, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            out.append(parse_record(line, line_no=i))
    return out


def write_jsonl(records, path: str) -> int:
    n = 0
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for rec in records:
            f.write(serialize_record(rec) + "\n")
            n += 1
    return n


def count_lines(path: str) -> int:
    n = 0
    with open(path, "rb") as f:
        for _ in f:
            n += 1
    return n


# -- manifests and checksums ----------------------------------------------


def write_manifest(manifest: DatasetManifest, path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(canonical_json(manifest.to_dict()) + "\n")


def load_manifest(path: str) -> DatasetManifest:
    if not os.path.exists(path):
        raise FileMissing(path)
    with open(path, "r", encoding="utf-8") as f:
        obj = json.load(f)
    return DatasetManifest(
        mix=obj["mix"],
        seed=obj["seed"],
        dev_frac=obj["dev_frac"],
        sources=obj.get("sources", {}),
        dev=obj.get("dev", {}),
        checksums=obj.get("checksums", {}),
        split_sizes=obj.get("split_sizes", {}),
    )


def write_checksum_sidecar(checksums: dict[str, str], path: str) -> None:
    """sha1sum-style sidecar: ``<hex>  <path>`` per line, sorted by path."""
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for p in sorted(checksums):
            f.write(f"{checksums[p]}  {p}\n")


def _resolve(path: str, base_dir: str) -> str:
    return path if os.path.isabs(path) else os.path.join(base_dir, path)


def verify_manifest(manifest: DatasetManifest, base_dir: str = ".") -> ManifestReport:
    """Recompute every checksum and split line count; ok iff zero mismatches."""
    issues: list[ManifestIssue] = []
    for rel, expected in sorted(manifest.checksums.items()):
        full = _resolve(rel, base_dir)
        if not os.path.exists(full):
            raise FileMissing(full)
        actual = sha1_of_file(full)
        if actual != expected:
            issues.append(
                ManifestIssue(rel, "ChecksumMismatch", f"expected {expected}, got {actual}")
            )
    for split, declared in sorted(manifest.split_sizes.items()):
        shard = os.path.join(base_dir, f"{split}.jsonl")
        if not os.path.exists(shard):
            raise FileMissing(shard)
        actual = count_lines(shard)
        if actual != declared:
            issues.append(
                ManifestIssue(
                    f"{split}.jsonl", "CountMismatch", f"declared {declared}, got {actual}"
                )
            )
    return ManifestReport(ok=not issues, issues=tuple(issues))
