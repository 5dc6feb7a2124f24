"""Command-line surface: mix, weaklabel, flip, train, eval, quick-eval,
screen, compare, verify-manifest, verify-env.

Flag names mirror the public runbook verbatim (--vad_conf_min, --dev_frac,
--time_budget_min, ...). Exit codes: 0 ok, 2 validation error, 3 protocol
mismatch, 4 missing input. Every command that writes into an output
directory takes a lock file there and leaves a deterministic run_stamp.json;
volatile timing goes to a separate timing sidecar so reruns are
byte-identical.
"""

from __future__ import annotations

import argparse
import contextlib
import csv
import json
import math
import os
import platform
import sys
import time

import numpy as np

from . import __version__, data_path
from . import _kernels
from ._features import load_cue_vocab
from .augment import flip_lexical, load_antonyms, write_pairs_jsonl
from .errors import (
    EmovadError,
    LockHeld,
    MissingInput,
    MissingSnapshot,
    ProtocolMismatch,
    TooFewRows,
    ValidationError,
)
from .lexicon import (
    check_output_path,
    convert_cross_corpus,
    filter_by_conf,
    load_lexicon,
    weak_vad_of_text,
)
from .metrics import ScreeningRow, screening_composite
from .quickeval import (
    Budget,
    QuickEvalParams,
    run_full_eval,
    run_quick_eval,
    stream_order,
)
from .schema import (
    DatasetManifest,
    DecodeConfig,
    RunStamp,
    dedup_records,
    load_manifest,
    read_jsonl,
    sha1_of_file,
    sha1_of_json,
    split_dev,
    verify_manifest,
    write_checksum_sidecar,
    write_jsonl,
    write_manifest,
)
from .train import (
    TrainConfig,
    load_checkpoint,
    load_train_config,
    run_training,
    save_checkpoint,
)
from .verifier import (
    AppraisalGuide,
    load_prototype_table,
    prototype,
    save_verifier,
    train_verifier,
)

SEED_TRIO = (11, 22, 33)
LOCK_NAME = ".emovad.lock"

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_PROTOCOL = 3
EXIT_MISSING = 4


@contextlib.contextmanager
def output_lock(outdir: str):
    os.makedirs(outdir, exist_ok=True)
    lock_path = os.path.join(outdir, LOCK_NAME)
    try:
        fd = os.open(lock_path, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
    except FileExistsError:
        raise LockHeld(f"output directory is locked: {lock_path}")
    try:
        os.close(fd)
        yield
    finally:
        with contextlib.suppress(FileNotFoundError):
            os.remove(lock_path)


def _env_facts() -> dict:
    return {
        "package": __version__,
        "python": ".".join(platform.python_version_tuple()[:2]),
        "numpy_major": np.__version__.split(".")[0],
        "platform": platform.system(),
        "kernel_backend": _kernels.BACKEND,
    }


def _write_json(obj, path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        json.dump(obj, f, sort_keys=True, separators=(",", ":"))
        f.write("\n")


def _write_run_stamp(outdir: str, seed: int, config_payload: dict) -> None:
    payload = {k: v for k, v in config_payload.items() if not callable(v)}
    stamp = RunStamp(
        seed=seed,
        config_hash=sha1_of_json(payload),
        prompt_template_id="joint-emotion-vad-v1",
        decode_config=DecodeConfig(),
        environment=tuple(sorted(_env_facts().items())),
    )
    _write_json(stamp.to_dict(), os.path.join(outdir, "run_stamp.json"))


def _write_timing(outdir: str, name: str, seconds: float) -> None:
    _write_json({"wall_clock_s": seconds}, os.path.join(outdir, f"{name}.timing.json"))


def _qc_pass(record) -> bool:
    qc = record.qc()
    if qc.get("len_ok") is False:
        return False
    if qc.get("tox") is True:
        return False
    if "lang" in qc and qc["lang"] != "en":
        return False
    if qc.get("dedup") is True:
        return False
    return True


# -- mix ----------------------------------------------------------------------


def cmd_mix(args) -> int:
    records_a = read_jsonl(args.goemo)
    records_b = read_jsonl(args.empat)
    try:
        ra, rb = (float(x) for x in args.ratio.split(":"))
    except ValueError:
        raise ValidationError(f"bad --ratio {args.ratio!r}, expected like 20:80")
    if ra < 0 or rb < 0 or ra + rb <= 0:
        raise ValidationError(f"bad --ratio {args.ratio!r}")
    ra, rb = ra / (ra + rb), rb / (ra + rb)

    with output_lock(args.outdir):
        pool = dedup_records(
            [r for r in records_a + records_b if _qc_pass(r)]
        )
        a_ids = {r.id for r in records_a}
        pool = filter_by_conf(pool, args.vad_conf_min)
        pool_a = [r for r in pool if r.id in a_ids]
        pool_b = [r for r in pool if r.id not in a_ids]

        scale = math.inf
        if ra > 0:
            scale = min(scale, len(pool_a) / ra)
        if rb > 0:
            scale = min(scale, len(pool_b) / rb)
        n_a = min(len(pool_a), round(ra * scale))
        n_b = min(len(pool_b), round(rb * scale))
        rng = np.random.Generator(np.random.PCG64(args.seed))
        take_a = [pool_a[i] for i in rng.permutation(len(pool_a))[:n_a]]
        take_b = [pool_b[i] for i in rng.permutation(len(pool_b))[:n_b]]

        train, dev = split_dev(take_a + take_b, args.dev_frac, args.seed)
        train = [r.with_fields(split="train") for r in train]
        dev = [r.with_fields(split="dev") for r in dev]
        train_a = [r for r in train if r.id in a_ids]
        train_b = [r for r in train if r.id not in a_ids]

        paths = {
            "train_A": os.path.join(args.outdir, "train_A.jsonl"),
            "train_B": os.path.join(args.outdir, "train_B.jsonl"),
            "dev": os.path.join(args.outdir, "dev.jsonl"),
        }
        write_jsonl(train_a, paths["train_A"])
        write_jsonl(train_b, paths["train_B"])
        write_jsonl(dev, paths["dev"])

        checksums = {f"{k}.jsonl": sha1_of_file(p) for k, p in paths.items()}
        checksums[args.goemo] = sha1_of_file(args.goemo)
        checksums[args.empat] = sha1_of_file(args.empat)
        manifest = DatasetManifest(
            mix=args.ratio,
            seed=args.seed,
            dev_frac=args.dev_frac,
            sources={"A": args.goemo, "B": args.empat},
            dev={"mix": "dev.jsonl"},
            checksums=checksums,
            split_sizes={"train_A": len(train_a), "train_B": len(train_b), "dev": len(dev)},
        )
        write_manifest(manifest, os.path.join(args.outdir, "manifest.json"))
        write_checksum_sidecar(checksums, os.path.join(args.outdir, "checksums.sha1"))
        _write_run_stamp(args.outdir, args.seed, vars(args))
    print(
        f"mix {args.ratio}: train_A={len(train_a)} train_B={len(train_b)} "
        f"dev={len(dev)} -> {args.outdir}"
    )
    return EXIT_OK


# -- weaklabel -------------------------------------------------------------------


def cmd_weaklabel(args) -> int:
    records = read_jsonl(args.input)
    lex = load_lexicon(args.lexicon, scale=args.scale)
    if args.manifest:
        manifest = load_manifest(args.manifest)
        base = os.path.dirname(os.path.abspath(args.manifest))
        protected = [
            p if os.path.isabs(p) else os.path.join(base, p)
            for p in manifest.dev.values()
        ]
        check_output_path(args.out, protected)
    if args.label_map:
        with open(args.label_map, "r", encoding="utf-8") as f:
            label_map = json.load(f)
        records = convert_cross_corpus(records, label_map, lex, heuristics=args.heuristics)
    else:
        out = []
        for rec in records:
            weak = weak_vad_of_text(rec.text, lex, heuristics=args.heuristics)
            vad = weak.vad_text if weak.vad_text is not None else rec.vad
            out.append(rec.with_fields(vad=vad, vad_conf=weak.vad_conf))
        records = out
    if args.vad_conf_min is not None:
        records = filter_by_conf(records, args.vad_conf_min)
    n = write_jsonl(records, args.out)
    print(f"weaklabel: wrote {n} records -> {args.out}")
    return EXIT_OK


# -- flip -----------------------------------------------------------------------


def cmd_flip(args) -> int:
    records = read_jsonl(args.input)
    table = load_antonyms(args.antonyms)
    pairs = []
    for rec in records:
        pair = flip_lexical(rec, table)
        if pair is not None:
            pairs.append(pair)
    write_jsonl([p.flipped for p in pairs], args.out_records)
    write_pairs_jsonl(pairs, args.out_pairs)
    print(f"flip: {len(pairs)} pairs from {len(records)} records")
    return EXIT_OK


# -- train ----------------------------------------------------------------------


def _build_appraisal(train_records, cue_vocab, prototypes_path, seed):
    """Bootstrap the verifier on template answers derived from gold labels."""
    from .train import forward, init_model  # late import keeps module load light

    table = load_prototype_table(prototypes_path)
    probe = init_model(
        sorted({lab for r in train_records for lab in r.labels}), cue_vocab
    )
    examples = []
    for rec in train_records:
        if not rec.labels:
            continue
        answer_text = forward(probe, rec.text, max_len=1 << 30).answer_text
        examples.append((rec.text, answer_text, prototype(rec.labels, table)))
    model = train_verifier(
        examples, epochs=50, lr=0.5, seed=seed, cue_vocab=cue_vocab
    )
    return AppraisalGuide(model=model, table=table), model


def _train_one_seed(args, config: TrainConfig, outdir: str) -> None:
    data_a = read_jsonl(args.train_a)
    data_b = read_jsonl(args.train_b)
    cue_vocab = load_cue_vocab(args.cue_vocab)
    lex = load_lexicon(args.lexicon, scale=args.lexicon_scale) if args.lexicon else None

    flip_pairs = {}
    if args.antonyms:
        table = load_antonyms(args.antonyms)
        for rec in data_a + data_b:
            pair = flip_lexical(rec, table)
            if pair is not None:
                flip_pairs[rec.id] = pair

    appraisal = None
    if not args.no_verifier:
        appraisal, vmodel = _build_appraisal(
            data_a + data_b, cue_vocab, args.prototypes, config.seed
        )
        save_verifier(vmodel, os.path.join(outdir, "verifier.json"))

    fault_schedule = (
        [int(x) for x in args.fault_steps.split(",") if x] if args.fault_steps else []
    )

    t0 = time.monotonic()
    result = run_training(
        config,
        data_a,
        data_b,
        fault_schedule=fault_schedule,
        lexicon=lex,
        appraisal=appraisal,
        flip_pairs=flip_pairs,
        cue_vocab=cue_vocab,
        log_path=os.path.join(outdir, "step_log.jsonl"),
    )
    save_checkpoint(result, os.path.join(outdir, "checkpoint.json"))
    _write_json(result.healing.events, os.path.join(outdir, "healing_log.json"))
    _write_json(result.summary, os.path.join(outdir, "train_summary.json"))
    _write_json(result.stamp.to_dict(), os.path.join(outdir, "run_stamp.json"))
    _write_timing(outdir, "train", time.monotonic() - t0)
    print(
        f"train seed={config.seed}: {result.summary['points']} points, "
        f"best_loss={result.summary['best_loss']:.4f}, "
        f"best_epoch={result.summary['best_epoch']:.3f} -> {outdir}"
    )


def cmd_train(args) -> int:
    config, _ = load_train_config(args.cfg)
    if args.seed is not None:
        config = __import__("dataclasses").replace(config, seed=args.seed)
    seeds = None
    if args.seeds:
        seeds = (
            list(SEED_TRIO)
            if args.seeds == "trio"
            else [int(x) for x in args.seeds.split(",")]
        )
    with output_lock(args.outdir):
        if seeds is None:
            _train_one_seed(args, config, args.outdir)
        else:
            import dataclasses

            for seed in seeds:
                sub = os.path.join(args.outdir, f"seed_{seed}")
                os.makedirs(sub, exist_ok=True)
                _train_one_seed(args, dataclasses.replace(config, seed=seed), sub)
    return EXIT_OK


# -- eval -------------------------------------------------------------------------


def _write_eval_outputs(outdir: str, name: str, snapshot, rows) -> None:
    _write_json(snapshot.to_dict(), os.path.join(outdir, f"{name}.json"))
    with open(os.path.join(outdir, f"{name}.csv"), "w", encoding="utf-8", newline="\n") as f:
        f.write(snapshot.csv_row())
    with open(
        os.path.join(outdir, f"{name}.examples.jsonl"), "w", encoding="utf-8", newline="\n"
    ) as f:
        for row in rows:
            f.write(json.dumps(row, sort_keys=True, separators=(",", ":")) + "\n")
    _write_timing(outdir, name, snapshot.wall_clock_s)


def cmd_eval(args) -> int:
    model, stamp = load_checkpoint(os.path.join(args.model_dir, "checkpoint.json"))
    dev = read_jsonl(args.dev)
    outdir = os.path.dirname(os.path.abspath(args.out)) or "."
    os.makedirs(outdir, exist_ok=True)
    snapshot, rows = run_full_eval(
        model, dev, stamp.decode_config, stamp, workers=args.workers
    )
    name = os.path.splitext(os.path.basename(args.out))[0]
    _write_eval_outputs(outdir, name, snapshot, rows)
    print(
        f"eval: n={snapshot.n} n_val={snapshot.n_val} parse_ok={snapshot.parse_ok:.4f} "
        f"macro_f1={snapshot.macro_f1} vad={snapshot.vad_one_minus_rmse}"
    )
    return EXIT_OK


def cmd_quick_eval(args) -> int:
    model, stamp = load_checkpoint(os.path.join(args.model_dir, "checkpoint.json"))
    dev = read_jsonl(args.dev)
    if args.ctx_max_chars:
        dev = [r.with_fields(text=r.text[: args.ctx_max_chars]) for r in dev]
    decode = stamp.decode_config
    if args.max_new_tokens is not None:
        import dataclasses

        decode = dataclasses.replace(decode, max_new_tokens=args.max_new_tokens)
    params = QuickEvalParams(
        beta=args.beta, gamma=args.gamma, delta=args.delta,
        w_score=args.w_score, w_eta=args.w_eta,
    )
    outdir = os.path.join(args.base_outs, args.exp)
    with output_lock(outdir):
        stream = stream_order(dev, args.seed)
        budget = Budget(limit_s=args.time_budget_min * 60.0)
        snapshot, rows = run_quick_eval(
            model, stream, budget, params, decode, stamp, progress=sys.stderr
        )
        _write_eval_outputs(outdir, "snapshot", snapshot, rows)
        _write_run_stamp(outdir, args.seed, vars(args))
    print(
        f"quick-eval {args.exp}: n={snapshot.n} parse_ok={snapshot.parse_ok:.4f} "
        f"macro_f1={snapshot.macro_f1} vad={snapshot.vad_one_minus_rmse}"
    )
    return EXIT_OK


# -- screen ------------------------------------------------------------------------


def _load_screening_rows(path: str) -> list[ScreeningRow]:
    if not os.path.exists(path):
        raise MissingInput(path)
    rows = []
    if path.endswith(".json"):
        with open(path, "r", encoding="utf-8") as f:
            raw = json.load(f)
        for obj in raw:
            rows.append(ScreeningRow(**obj))
    else:
        with open(path, "r", encoding="utf-8", newline="") as f:
            for obj in csv.DictReader(f):
                rows.append(
                    ScreeningRow(
                        model=obj["model"],
                        **{
                            k: float(obj[k])
                            for k in (
                                "macro_f1",
                                "rmse_mean",
                                "rho_mean",
                                "quality",
                                "q_json_ok",
                                "q_struct_ok",
                                "q_rat_len_ok",
                            )
                            if k in obj and obj[k] != ""
                        },
                    )
                )
    if len(rows) < 2:
        raise TooFewRows("screening needs at least two rows")
    return rows


SCREEN_COLUMNS = (
    "model",
    "macro_f1",
    "rmse_mean",
    "rho_mean",
    "quality",
    "q_json_ok",
    "q_struct_ok",
    "q_rat_len_ok",
    "z_cls",
    "z_vad",
    "z_qual",
    "vad_bracket",
    "composite",
)


def cmd_screen(args) -> int:
    rows = _load_screening_rows(args.rows)
    scored = screening_composite(rows)
    out_path = args.out or "screening.csv"
    with open(out_path, "w", encoding="utf-8", newline="\n") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(SCREEN_COLUMNS)
        for row, z in zip(rows, scored):
            writer.writerow(
                [
                    row.model,
                    row.macro_f1,
                    row.rmse_mean,
                    row.rho_mean,
                    row.quality,
                    row.q_json_ok,
                    row.q_struct_ok,
                    row.q_rat_len_ok,
                    z["z_cls"],
                    z["z_vad"],
                    z["z_qual"],
                    z["vad_bracket"],
                    z["composite"],
                ]
            )
    for z in scored:
        print(f"{z['model']}: composite={z['composite']:+.4f}")
    return EXIT_OK


# -- compare -------------------------------------------------------------------------


COMPARE_COLUMNS = ("macro_f1", "macro_r", "vad", "parse_ok", "best_loss", "best_epoch")
# direction: True = higher is better; None = informational, no markers
COMPARE_DIRECTION = {
    "macro_f1": True,
    "macro_r": True,
    "vad": True,
    "parse_ok": True,
    "best_loss": False,
    "best_epoch": None,
}


def _collect_experiment(base: str, name: str) -> dict:
    snap_path = os.path.join(base, name, "snapshot.json")
    if not os.path.exists(snap_path):
        raise MissingSnapshot(snap_path)
    with open(snap_path, "r", encoding="utf-8") as f:
        snap = json.load(f)
    row = {
        "exp": name,
        "macro_f1": snap.get("macro_f1"),
        "macro_r": snap.get("macro_r"),
        "vad": snap.get("vad_one_minus_rmse"),
        "parse_ok": snap.get("parse_ok"),
        "best_loss": None,
        "best_epoch": None,
    }
    summary_path = os.path.join(base, name, "train_summary.json")
    if os.path.exists(summary_path):
        with open(summary_path, "r", encoding="utf-8") as f:
            summary = json.load(f)
        row["best_loss"] = summary.get("best_loss")
        row["best_epoch"] = summary.get("best_epoch")
    return row


def compare_markers(rows: list[dict]) -> dict:
    """Per-column best/second-best experiment names; name order breaks ties."""
    markers = {}
    for col, higher in COMPARE_DIRECTION.items():
        if higher is None:
            continue
        scored = [
            (r[col], r["exp"]) for r in rows if r[col] is not None
        ]
        if not scored:
            continue
        scored.sort(key=lambda t: ((-t[0]) if higher else t[0], t[1]))
        markers[col] = {
            "best": scored[0][1],
            "second": scored[1][1] if len(scored) > 1 else None,
        }
    return markers


def cmd_compare(args) -> int:
    rows = [_collect_experiment(args.base_outs, name) for name in args.exps]
    markers = compare_markers(rows)
    report = {"rows": rows, "markers": markers}
    _write_json(report, os.path.join(args.base_outs, "compare.json"))
    with open(
        os.path.join(args.base_outs, "compare.csv"), "w", encoding="utf-8", newline="\n"
    ) as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(("exp",) + COMPARE_COLUMNS)
        for r in rows:
            writer.writerow([r["exp"]] + [r[c] for c in COMPARE_COLUMNS])
    with open(
        os.path.join(args.base_outs, "compare_marked.csv"), "w", encoding="utf-8", newline="\n"
    ) as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(("exp",) + COMPARE_COLUMNS)
        for r in rows:
            cells = [r["exp"]]
            for c in COMPARE_COLUMNS:
                val = r[c]
                mark = ""
                if c in markers and val is not None:
                    if markers[c]["best"] == r["exp"]:
                        mark = "†"
                    elif markers[c]["second"] == r["exp"]:
                        mark = "‡"
                cells.append("" if val is None else f"{val}{mark}")
            writer.writerow(cells)
    print(f"compare: {len(rows)} experiments -> {args.base_outs}/compare.csv")
    return EXIT_OK


# -- verify ---------------------------------------------------------------------------


def cmd_verify_manifest(args) -> int:
    manifest = load_manifest(args.manifest)
    base = os.path.dirname(os.path.abspath(args.manifest)) or "."
    report = verify_manifest(manifest, base_dir=base)
    if report.ok:
        print("verify-manifest: ok")
        return EXIT_OK
    for issue in report.issues:
        print(f"{issue.kind}: {issue.path}: {issue.detail}")
    return EXIT_VALIDATION


PROTOCOL_FIELDS = ("decode_config", "seed_policy")


def cmd_verify_env(args) -> int:
    current = {
        "facts": _env_facts(),
        "decode_config": DecodeConfig().to_dict(),
        "seed_policy": list(SEED_TRIO),
    }
    if args.write:
        _write_json(current, args.stamp)
        print(f"verify-env: wrote stamp -> {args.stamp}")
        return EXIT_OK
    if not os.path.exists(args.stamp):
        raise MissingInput(args.stamp)
    with open(args.stamp, "r", encoding="utf-8") as f:
        stored = json.load(f)
    for field in PROTOCOL_FIELDS:
        if stored.get(field) != current[field]:
            raise ProtocolMismatch(
                f"{field} drifted: stored={stored.get(field)} current={current[field]}"
            )
    warnings = [
        f"  {k}: stored={v!r} current={current['facts'].get(k)!r}"
        for k, v in stored.get("facts", {}).items()
        if current["facts"].get(k) != v
    ]
    if warnings:
        print("verify-env: drift warnings (non-fatal):")
        for w in warnings:
            print(w)
    else:
        print("verify-env: ok")
    return EXIT_OK


# -- parser -----------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="emovad",
        description="Protocol-true joint emotion+VAD harness",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("mix", help="QC/dedup/filter, ratio-sample, frozen split")
    p.add_argument("--goemo", required=True)
    p.add_argument("--empat", required=True)
    p.add_argument("--ratio", default="20:80")
    p.add_argument("--vad_conf_min", type=float, default=0.80)
    p.add_argument("--dev_frac", type=float, default=0.05)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--outdir", required=True)
    p.set_defaults(func=cmd_mix)

    p = sub.add_parser("weaklabel", help="attach lexicon weak VAD (and map labels)")
    p.add_argument("--input", required=True)
    p.add_argument("--lexicon", default=data_path("vad_lexicon.tsv"))
    p.add_argument("--scale", choices=("unit", "one_to_nine"), default="unit")
    p.add_argument("--label_map", default=None)
    p.add_argument("--manifest", default=None, help="guards against overwriting dev shards")
    p.add_argument("--vad_conf_min", type=float, default=None)
    p.add_argument("--heuristics", action="store_true", help="negation/intensifier pass")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_weaklabel)

    p = sub.add_parser("flip", help="build valence-flip pairs")
    p.add_argument("--input", required=True)
    p.add_argument("--antonyms", default=data_path("antonyms.tsv"))
    p.add_argument("--out_records", required=True)
    p.add_argument("--out_pairs", required=True)
    p.set_defaults(func=cmd_flip)

    p = sub.add_parser("train", help="protocol-true training on the toy model")
    p.add_argument("--cfg", required=True, help="YAML or JSON train config")
    p.add_argument("--train_a", required=True)
    p.add_argument("--train_b", required=True)
    p.add_argument("--outdir", required=True)
    p.add_argument("--lexicon", default=data_path("vad_lexicon.tsv"))
    p.add_argument("--lexicon_scale", choices=("unit", "one_to_nine"), default="unit")
    p.add_argument("--cue_vocab", default=data_path("cue_vocab.txt"))
    p.add_argument("--prototypes", default=data_path("atom_prototypes.json"))
    p.add_argument("--antonyms", default=None, help="enable lexical flip pairs")
    p.add_argument("--no_verifier", action="store_true")
    p.add_argument("--fault_steps", default=None, help="comma list of simulated faults")
    p.add_argument("--seed", type=int, default=None, help="override config seed")
    p.add_argument("--seeds", default=None, help="comma list or 'trio' (11,22,33)")
    p.set_defaults(func=cmd_train, no_verifier=False)

    p = sub.add_parser("eval", help="full dev evaluation of a checkpoint")
    p.add_argument("--model_dir", required=True)
    p.add_argument("--dev", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("quick-eval", help="time-budgeted streaming evaluation")
    p.add_argument("--model_dir", required=True)
    p.add_argument("--dev", required=True)
    p.add_argument("--exp", required=True)
    p.add_argument("--base_outs", default="outs")
    p.add_argument("--time_budget_min", type=float, default=60.0)
    p.add_argument("--max_new_tokens", type=int, default=None)
    p.add_argument("--ctx_max_chars", type=int, default=None)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--beta", type=float, default=1.0)
    p.add_argument("--gamma", type=float, default=1.0)
    p.add_argument("--delta", type=float, default=0.005)
    p.add_argument("--w_score", type=int, default=3)
    p.add_argument("--w_eta", type=int, default=32)
    p.set_defaults(func=cmd_quick_eval)

    p = sub.add_parser("screen", help="backbone screening composite (z-scores)")
    p.add_argument("--rows", required=True, help="CSV or JSON of candidate rows")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_screen)

    p = sub.add_parser("compare", help="collect experiment snapshots into a table")
    p.add_argument("--base_outs", required=True)
    p.add_argument("--exps", nargs="+", required=True)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("verify-manifest", help="recompute checksums and counts")
    p.add_argument("--manifest", required=True)
    p.set_defaults(func=cmd_verify_manifest)

    p = sub.add_parser("verify-env", help="environment stamp check")
    p.add_argument("--stamp", required=True)
    p.add_argument("--write", action="store_true")
    p.set_defaults(func=cmd_verify_env)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ProtocolMismatch as exc:
        print(f"protocol mismatch: {exc}", file=sys.stderr)
        return EXIT_PROTOCOL
    except MissingInput as exc:
        print(f"missing input: {exc}", file=sys.stderr)
        return EXIT_MISSING
    except (ValidationError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except EmovadError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
