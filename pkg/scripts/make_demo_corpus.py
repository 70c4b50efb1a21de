#!/usr/bin/env python3
"""Walk the corpus pipeline end to end on a tiny built-in dataset:
build a manifest, derive a top-k relation subset, plan 4-voice
upsampling, select a human-read test subset, and print statistics.
Outputs land in --out-dir and are identical across runs."""

import argparse
from pathlib import Path

from spokenre import (
    build_manifest,
    compute_stats,
    plan_upsampling,
    select_human_subset,
    subset_top_k_relations,
    write_manifest,
)

RECORDS = [
    ("d1", "train", "Ahmed Rashid is a Pakistani author.",
     [("Ahmed Rashid", "per:origin", "Pakistani")]),
    ("d2", "train", "The Khost region contains Miran Shah.",
     [("Khost", "loc:contains", "Miran Shah")]),
    ("d3", "train", "Sara Khan became president of Acme Labs.",
     [("Sara Khan", "per:title", "president"), ("Sara Khan", "org:member", "Acme Labs")]),
    ("d4", "train", "Acme Labs opened an office in Khost.",
     [("Acme Labs", "loc:contains", "office")]),
    ("d5", "dev", "Wali is an Afghan journalist.",
     [("Wali", "per:origin", "Afghan")]),
    ("d6", "test", "Author Ahmed Rashid wrote about Khost.",
     [("Ahmed Rashid", "per:title", "Author")]),
    ("d7", "test", "Miran Shah lies inside the Khost region.",
     [("Khost", "loc:contains", "Miran Shah")]),
    ("d8", "test", "Tariq is a Pakistani writer.",
     [("Tariq", "per:origin", "Pakistani")]),
    ("d9", "test", "Sara Khan joined Acme Labs.",
     [("Sara Khan", "org:member", "Acme Labs")]),
]


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out-dir", default="demo_out")
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)

    manifest = build_manifest("demo", RECORDS)
    write_manifest(manifest, out / "demo.jsonl")

    subset = subset_top_k_relations(manifest, 2)
    write_manifest(subset, out / "demo_top2.jsonl")

    plan = plan_upsampling(manifest, ["v1", "v2", "v3", "v4"])
    write_manifest(plan, out / "demo_upsample_plan.jsonl")

    human = select_human_subset(manifest, 2, seed=args.seed)
    write_manifest(human, out / "demo_human.jsonl")

    for name, m in (("full", manifest), ("top-2", subset), ("upsample plan", plan)):
        stats = compute_stats(m)
        print(f"{name}: instances={dict(stats.instances)} triplets={dict(stats.triplets)} "
              f"avg_tokens={stats.avg_tokens:.1f}")
    print(f"human subset ids: {[i.id for i in human.instances]}")
    print(f"wrote 4 manifests under {out}/")


if __name__ == "__main__":
    main()
