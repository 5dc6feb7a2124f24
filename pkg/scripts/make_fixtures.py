#!/usr/bin/env python3
"""Regenerate the shipped synthetic fixtures (deterministic; commit outputs).

Usage: python scripts/make_fixtures.py [outdir]
"""

from __future__ import annotations

import json
import os
import sys

from emovad import data_path, synth
from emovad.lexicon import load_lexicon
from emovad.schema import write_jsonl


def main(outdir: str = "fixtures") -> None:
    os.makedirs(outdir, exist_ok=True)
    lexicon = load_lexicon(data_path("vad_lexicon.tsv"))

    corpora = {
        "goemo_synth.jsonl": synth.make_corpus(600, "goe", seed=1001, lexicon=lexicon),
        "empathetic_synth.jsonl": synth.make_corpus(600, "emp", seed=1002, lexicon=lexicon),
        "dailydialog_synth.jsonl": synth.make_cross_corpus(200, "dd", seed=1003),
    }
    for name, records in corpora.items():
        n = write_jsonl(records, os.path.join(outdir, name))
        print(f"{name}: {n} records")

    with open(os.path.join(outdir, "label_map.json"), "w", encoding="utf-8") as f:
        json.dump(synth.DEFAULT_LABEL_MAP, f, indent=2, sort_keys=True)
        f.write("\n")

    config = """\
# desk-scale training config (public field names)
seed: 42
max_len: 1536
epochs: 1
per_device_train_batch_size: 1
gradient_accumulation_steps: 1
learning_rate: 0.08
weight_decay: 0.01
warmup_ratio: 0.03
lr_scheduler_type: cosine
logging_steps: 1
lambda_cls: 1.0
lambda_reg: 1.0
lambda_vad: 1.0
lambda_app: 0.75
lambda_flip: 0.4
"""
    with open(os.path.join(outdir, "train_config.yaml"), "w", encoding="utf-8") as f:
        f.write(config)
    print("label_map.json and train_config.yaml written")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "fixtures")
