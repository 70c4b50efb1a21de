"""Command line interface over JSONL manifests.

Every subcommand is deterministic: identical arguments and inputs produce
byte-identical stdout and output files.  File outputs are written
atomically and inputs are never mutated.  Exit codes: 0 success, 1
operation/validation failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction

from . import align, augment, corpus, scoring
from .adaptor import DEFAULT_ADAPTOR, AdaptorSpec, layer_lengths
from .codec import ParseWarning, parse_lenient
from .manifest import (
    Manifest,
    ManifestError,
    Triplet,
    atomic_write_text,
    read_manifest,
    write_manifest,
)

SEED_ENV_VAR = "SPOKENRE_SEED"


def _default_seed() -> int:
    return int(os.environ.get(SEED_ENV_VAR, "0"))


def _policy(name: str):
    return scoring.RELAXED_POLICY if name == "relaxed" else scoring.STRICT_POLICY


def _emit_json(obj) -> None:
    print(json.dumps(obj, ensure_ascii=False, indent=2, sort_keys=False))


def _read_jsonl(path: str) -> list[tuple[int, dict]]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            raw = raw.rstrip("\n")
            if not raw.strip():
                raise ManifestError("empty line", line_no)
            try:
                obj = json.loads(raw)
            except json.JSONDecodeError as e:
                raise ManifestError(f"malformed JSON: {e.msg}", line_no) from None
            if not isinstance(obj, dict):
                raise ManifestError("each line must be a JSON object", line_no)
            out.append((line_no, obj))
    return out


# --- build ---------------------------------------------------------------

_RECORD_KEYS = {"kind", "id", "split", "transcript", "triplets"}


def cmd_build(args) -> int:
    records = []
    for line_no, obj in _read_jsonl(args.records):
        if obj.get("kind") not in (None, "instance"):
            raise ManifestError(f"expected an instance record, got kind={obj.get('kind')!r}", line_no)
        extra = set(obj) - _RECORD_KEYS
        if extra:
            raise ManifestError(f"unknown record keys: {', '.join(sorted(extra))}", line_no)
        missing = {"id", "split", "transcript", "triplets"} - set(obj)
        if missing:
            raise ManifestError(f"record missing keys: {', '.join(sorted(missing))}", line_no)
        triplets = [Triplet(t["head"], t["relation"], t["tail"]) for t in obj["triplets"]]
        records.append((obj["id"], obj["split"], obj["transcript"], triplets))
    m = corpus.build_manifest(args.name, records, audio_dir=args.audio_dir)
    write_manifest(m, args.out)
    print(f"wrote {args.out}: {len(m.instances)} instances, {len(m.relations)} relations")
    return 0


# --- subset / stats / upsample-plan / human-subset -----------------------


def cmd_subset(args) -> int:
    m = read_manifest(args.manifest)
    exclude = frozenset(x for x in args.exclude.split(",") if x) if args.exclude else frozenset()
    sub = corpus.subset_top_k_relations(m, args.k, exclude_relations=exclude)
    write_manifest(sub, args.out)
    print(f"wrote {args.out}: kept {len(sub.relations)} relations, {len(sub.instances)} instances")
    return 0


def cmd_stats(args) -> int:
    m = read_manifest(args.manifest)
    stats = corpus.compute_stats(m)
    if args.json:
        _emit_json({"name": m.name, **stats.as_dict()})
        return 0
    print(f"manifest: {m.name}")
    print(f"{'split':<8}{'instances':>12}{'triplets':>12}")
    for split in ("train", "dev", "test"):
        print(f"{split:<8}{stats.instances[split]:>12}{stats.triplets[split]:>12}")
    print(f"{'total':<8}{sum(stats.instances.values()):>12}{sum(stats.triplets.values()):>12}")
    print(f"relations: {len(m.relations)}")
    print(f"avg tokens: {stats.avg_tokens:.1f}")
    if stats.avg_audio_seconds is not None:
        print(f"avg audio seconds: {stats.avg_audio_seconds:.1f}")
    return 0


def cmd_upsample_plan(args) -> int:
    m = read_manifest(args.manifest)
    voices = [v for v in args.voices.split(",") if v]
    planned = corpus.plan_upsampling(m, voices)
    write_manifest(planned, args.out)
    added = len(planned.instances) - len(m.instances)
    print(f"wrote {args.out}: added {added} planned instances for {len(voices)} voices")
    return 0


def cmd_human_subset(args) -> int:
    m = read_manifest(args.manifest)
    sub = corpus.select_human_subset(m, args.n, per_relation=args.per_relation, seed=args.seed)
    write_manifest(sub, args.out)
    print(f"wrote {args.out}: {len(sub.instances)} instances marked human-pending")
    return 0


# --- relabel --------------------------------------------------------------


def _read_hypotheses(path: str) -> dict[str, str]:
    with open(path, encoding="utf-8") as fh:
        first = fh.readline()
    try:
        is_manifest = json.loads(first or "{}").get("kind") == "manifest"
    except json.JSONDecodeError:
        is_manifest = False
    if is_manifest:
        m = read_manifest(path)
        return {i.id: i.hypothesis for i in m.instances if i.hypothesis is not None}
    out: dict[str, str] = {}
    for line_no, obj in _read_jsonl(path):
        if set(obj) != {"id", "hypothesis"}:
            raise ManifestError("hypothesis records must have exactly the keys id, hypothesis", line_no)
        if obj["id"] in out:
            raise ManifestError(f"duplicate hypothesis id {obj['id']!r}", line_no)
        out[obj["id"]] = obj["hypothesis"]
    return out


def cmd_relabel(args) -> int:
    m = read_manifest(args.manifest)
    hypotheses = _read_hypotheses(args.hypotheses)
    known = {i.id for i in m.instances}
    unknown = set(hypotheses) - known
    if unknown:
        raise ManifestError(f"hypothesis ids not in manifest: {', '.join(sorted(unknown))}")
    out_instances = []
    relabeled = emptied = skipped = 0
    for inst in m.instances:
        if inst.split != args.split or inst.id not in hypotheses:
            if inst.split == args.split:
                skipped += 1
            out_instances.append(inst)
            continue
        new = align.relabel_instance(inst, hypotheses[inst.id], threshold=args.threshold)
        relabeled += 1
        if not new.triplets:
            emptied += 1
            continue
        out_instances.append(new)
    meta = dict(m.meta)
    meta["relabel_split"] = args.split
    meta["relabel_threshold"] = str(args.threshold)
    meta["relabel_emptied"] = str(emptied)
    out = Manifest(name=m.name, relations=m.relations, instances=tuple(out_instances), meta=meta)
    write_manifest(out, args.out)
    print(
        f"wrote {args.out}: relabeled {relabeled} {args.split} instances"
        f" ({emptied} emptied and removed, {skipped} without hypothesis)"
    )
    return 0


# --- filter-pseudo ---------------------------------------------------------


def _read_pronouns(path: str) -> frozenset[str]:
    with open(path, encoding="utf-8") as fh:
        return frozenset(
            line.strip().casefold() for line in fh if line.strip() and not line.startswith("#")
        )


def cmd_filter_pseudo(args) -> int:
    pseudo = read_manifest(args.pseudo)
    gold = read_manifest(args.gold)
    pronouns = _read_pronouns(args.pronouns) if args.pronouns else None
    kept, dropped = augment.filter_pseudo(pseudo.instances, gold.relations, pronouns)
    if args.factor is not None:
        gold_counts = corpus.relation_instance_counts(gold, splits=("train",))
        kept = augment.sample_per_relation(kept, gold_counts, Fraction(args.factor), seed=args.seed)
    meta = dict(pseudo.meta)
    meta["filter_gold"] = gold.name
    meta["filter_dropped"] = str(len(dropped))
    if args.factor is not None:
        meta["filter_factor"] = args.factor
        meta["filter_seed"] = str(args.seed)
    out = Manifest(
        name=f"{pseudo.name}-filtered", relations=gold.relations, instances=tuple(kept), meta=meta
    )
    write_manifest(out, args.out)
    report = "".join(
        json.dumps({"id": d.id, "reason": d.reason, "detail": d.detail}, ensure_ascii=False) + "\n"
        for d in dropped
    )
    atomic_write_text(args.drop_report, report)
    print(f"wrote {args.out}: kept {len(kept)} of {len(pseudo.instances)} candidates")
    print(f"wrote {args.drop_report}: {len(dropped)} drop records")
    return 0


# --- evaluate ---------------------------------------------------------------


def _read_predictions(path: str) -> tuple[dict[str, list[Triplet]], int]:
    predictions: dict[str, list[Triplet]] = {}
    warning_count = 0
    for line_no, obj in _read_jsonl(path):
        if "id" not in obj:
            raise ManifestError("prediction record missing 'id'", line_no)
        if obj["id"] in predictions:
            raise ManifestError(f"duplicate prediction id {obj['id']!r}", line_no)
        if "generation" in obj:
            triplets, warnings = parse_lenient(obj["generation"])
            warning_count += len(warnings)
        elif "triplets" in obj:
            triplets = [Triplet(t["head"], t["relation"], t["tail"]) for t in obj["triplets"]]
        else:
            raise ManifestError("prediction record needs 'generation' or 'triplets'", line_no)
        predictions[obj["id"]] = triplets
    return predictions, warning_count


def _facet_table(report: scoring.EvalReport) -> str:
    facets = [("Entity", report.entity), ("Relation", report.relation), ("Triplet", report.triplet)]
    lines = ["{:<11}".format("") + "".join(f"{name:>10}" for name, _ in facets)]
    for label, attr in (("precision", "precision"), ("recall", "recall"), ("f1", "f1")):
        row = "".join(f"{float(getattr(score, attr)):>10.3f}" for _, score in facets)
        lines.append(f"{label:<11}{row}")
    for label, attr in (("tp", "tp"), ("predicted", "pred_total"), ("gold", "gold_total")):
        row = "".join(f"{getattr(score, attr):>10}" for _, score in facets)
        lines.append(f"{label:<11}{row}")
    return "\n".join(lines)


def cmd_evaluate(args) -> int:
    gold = read_manifest(args.gold)
    predictions, warning_count = _read_predictions(args.pred)
    report = scoring.evaluate_corpus(gold, predictions, policy=_policy(args.policy), split=args.split)
    if args.json:
        _emit_json({"split": args.split or "all", "parse_warnings": warning_count, **report.as_dict()})
        return 0
    print(f"instances: {report.n_instances}   policy: {args.policy}   split: {args.split or 'all'}")
    print(_facet_table(report))
    if warning_count:
        print(f"parse warnings in predictions: {warning_count}")
    if report.unknown_relations:
        print(f"predicted relations outside the inventory: {', '.join(report.unknown_relations)}")
    return 0


# --- triplet-lint / wer / adaptor-len ---------------------------------------


def cmd_triplet_lint(args) -> int:
    results: list[tuple[int, int, list[ParseWarning]]] = []
    with open(args.file, encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            triplets, warnings = parse_lenient(raw.rstrip("\n"))
            results.append((line_no, len(triplets), warnings))
    if args.json:
        _emit_json(
            [
                {
                    "line": line_no,
                    "triplets": n,
                    "warnings": [
                        {"kind": w.kind, "position": w.position, "detail": w.detail} for w in warnings
                    ],
                }
                for line_no, n, warnings in results
            ]
        )
        return 0
    total_warnings = 0
    for line_no, n, warnings in results:
        suffix = f", {len(warnings)} warning{'s' if len(warnings) != 1 else ''}" if warnings else ""
        print(f"line {line_no}: {n} triplet{'s' if n != 1 else ''}{suffix}")
        for w in warnings:
            print(f"  {w.kind} at {w.position}: {w.detail}")
        total_warnings += len(warnings)
    print(f"lines: {len(results)}, triplets: {sum(n for _, n, _ in results)}, warnings: {total_warnings}")
    return 0


def _read_lines(path: str) -> list[str]:
    with open(path, encoding="utf-8") as fh:
        return [line.rstrip("\n") for line in fh]


def cmd_wer(args) -> int:
    refs = _read_lines(args.ref)
    hyps = _read_lines(args.hyp)
    if len(refs) != len(hyps):
        raise ManifestError(f"line count mismatch: {len(refs)} references vs {len(hyps)} hypotheses")
    errors = 0
    ref_words = 0
    for line_no, (ref, hyp) in enumerate(zip(refs, hyps), start=1):
        ref_tokens = ref.split()
        if not ref_tokens:
            raise ManifestError("empty reference line", line_no)
        errors += align.edit_distance(ref_tokens, hyp.split())
        ref_words += len(ref_tokens)
    rate = Fraction(errors, ref_words)
    if args.json:
        _emit_json({"wer": float(rate), "errors": errors, "ref_words": ref_words, "lines": len(refs)})
        return 0
    print(f"wer: {float(rate):.4f} ({errors} errors / {ref_words} reference words, {len(refs)} lines)")
    return 0


def cmd_adaptor_len(args) -> int:
    spec = AdaptorSpec.parse(args.spec) if args.spec else DEFAULT_ADAPTOR
    lengths = layer_lengths(args.length, spec)
    if args.json:
        _emit_json({"input": args.length, "lengths": lengths})
        return 0
    print(f"input: {args.length}")
    for idx, ((k, s, p), out) in enumerate(zip(spec.layers, lengths), start=1):
        print(f"layer {idx} (k={k},s={s},p={p}): {out}")
    return 0


# --- parser -----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spokenre",
        description="Corpus construction, filtering, and evaluation for relation extraction from speech.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build", help="build a manifest from a records JSONL export")
    p.add_argument("--records", required=True)
    p.add_argument("--name", required=True)
    p.add_argument("--audio-dir", default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("subset", help="keep the k most frequent relations")
    p.add_argument("--manifest", required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--exclude", default="no_relation", help="comma-separated labels barred from selection")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_subset)

    p = sub.add_parser("stats", help="dataset statistics")
    p.add_argument("--manifest", required=True)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("upsample-plan", help="plan multi-voice duplicates of the train split")
    p.add_argument("--manifest", required=True)
    p.add_argument("--voices", required=True, help="comma-separated voice ids")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_upsample_plan)

    p = sub.add_parser("human-subset", help="sample a test subset for human re-reading")
    p.add_argument("--manifest", required=True)
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--n", type=int, default=None)
    group.add_argument("--per-relation", type=int, default=None)
    p.add_argument("--seed", type=int, default=_default_seed())
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_human_subset)

    p = sub.add_parser("relabel", help="rewrite gold entities against ASR hypotheses")
    p.add_argument("--manifest", required=True)
    p.add_argument("--hypotheses", required=True, help="JSONL of {id, hypothesis} or a manifest with hypothesis fields")
    p.add_argument("--threshold", type=int, default=align.DEFAULT_RELABEL_THRESHOLD)
    p.add_argument("--split", default="train", choices=("train", "dev", "test"))
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_relabel)

    p = sub.add_parser("filter-pseudo", help="filter pseudo-labeled candidates against a gold manifest")
    p.add_argument("--pseudo", required=True)
    p.add_argument("--gold", required=True)
    p.add_argument("--factor", default=None, help="per-relation sampling factor, e.g. 1.8")
    p.add_argument("--seed", type=int, default=_default_seed())
    p.add_argument("--pronouns", default=None, help="override the bundled pronoun lexicon")
    p.add_argument("--out", required=True)
    p.add_argument("--drop-report", required=True)
    p.set_defaults(func=cmd_filter_pseudo)

    p = sub.add_parser("evaluate", help="score predictions against a gold manifest")
    p.add_argument("--gold", required=True)
    p.add_argument("--pred", required=True)
    p.add_argument("--split", default=None, choices=("train", "dev", "test"))
    p.add_argument("--policy", default="strict", choices=("strict", "relaxed"))
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("triplet-lint", help="lenient-parse a file of generations, one per line")
    p.add_argument("--file", required=True)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_triplet_lint)

    p = sub.add_parser("wer", help="word error rate between line-paired text files")
    p.add_argument("--ref", required=True)
    p.add_argument("--hyp", required=True)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_wer)

    p = sub.add_parser("adaptor-len", help="per-layer sequence lengths through the length adaptor")
    p.add_argument("--length", type=int, required=True)
    p.add_argument("--spec", default=None, help='layers as "k,s,p[;k,s,p...]", default 3,2,1 x3')
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_adaptor_len)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ManifestError, ValueError, KeyError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
