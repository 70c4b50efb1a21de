import hashlib
import json
import subprocess
import sys
from pathlib import Path

from spokenre import read_manifest

DATA = Path(__file__).parent / "data"


def run_cli(*args, cwd=None):
    return subprocess.run(
        [sys.executable, "-m", "spokenre", *args],
        capture_output=True,
        cwd=cwd,
        timeout=120,
    )


def test_usage_error_exits_2():
    proc = run_cli("no-such-command")
    assert proc.returncode == 2
    assert b"usage" in proc.stderr.lower()


def test_operation_error_exits_1(tmp_path):
    missing = tmp_path / "nope.jsonl"
    proc = run_cli("stats", "--manifest", str(missing))
    assert proc.returncode == 1
    assert b"error:" in proc.stderr


def test_build_then_stats(tmp_path):
    out = tmp_path / "built.jsonl"
    proc = run_cli("build", "--records", str(DATA / "records_small.jsonl"), "--name", "built", "--out", str(out))
    assert proc.returncode == 0, proc.stderr
    m = read_manifest(out)
    assert len(m.instances) == 3
    assert m.relations == ("loc:contains", "per:origin", "per:title")

    proc = run_cli("stats", "--manifest", str(out), "--json")
    assert proc.returncode == 0
    stats = json.loads(proc.stdout)
    assert stats["instances"] == {"train": 1, "dev": 1, "test": 1}
    assert stats["triplets"] == {"train": 1, "dev": 1, "test": 1}


def test_evaluate_perfect_predictions():
    proc = run_cli(
        "evaluate", "--gold", str(DATA / "gold_small.jsonl"), "--pred", str(DATA / "preds_perfect.jsonl")
    )
    assert proc.returncode == 0, proc.stderr
    text = proc.stdout.decode()
    f1_line = next(line for line in text.splitlines() if line.startswith("f1"))
    assert f1_line.split()[1:] == ["1.000", "1.000", "1.000"]
    assert "Entity" in text and "Relation" in text and "Triplet" in text


def test_evaluate_noisy_generations_json():
    proc = run_cli(
        "evaluate",
        "--gold", str(DATA / "gold_small.jsonl"),
        "--pred", str(DATA / "preds_noisy.jsonl"),
        "--split", "test",
        "--json",
    )
    assert proc.returncode == 0, proc.stderr
    report = json.loads(proc.stdout)
    assert report["n_instances"] == 3
    assert report["parse_warnings"] == 1
    assert report["unknown_relations"] == ["org:country"]
    # g6's first generated triplet is exactly gold
    assert report["triplet"]["tp"] == 1
    assert report["relation"]["tp"] == 2  # per:origin on g4 and loc:contains on g6


def test_triplet_lint_is_total():
    proc = run_cli("triplet-lint", "--file", str(DATA / "gens.txt"))
    assert proc.returncode == 0
    out = proc.stdout.decode()
    assert "line 1: 1 triplet" in out
    assert "truncated_triplet" in out
    assert "stray_text" in out

    proc = run_cli("triplet-lint", "--file", str(DATA / "gens.txt"), "--json")
    rows = json.loads(proc.stdout)
    assert [r["triplets"] for r in rows] == [1, 1, 0]


def test_wer_subcommand():
    proc = run_cli("wer", "--ref", str(DATA / "wer_ref.txt"), "--hyp", str(DATA / "wer_hyp.txt"), "--json")
    assert proc.returncode == 0
    out = json.loads(proc.stdout)
    # hyphenated ASR tokens stay whole: "bin Laden" -> "bin-laden" costs a
    # substitution plus a deletion, "US" -> "U-S" and "Ahmed" -> "Akmed"
    # one substitution each
    assert out["ref_words"] == 15
    assert out["errors"] == 4
    assert abs(out["wer"] - 4 / 15) < 1e-12


def test_relabel_rewrites_train_split(tmp_path):
    out = tmp_path / "relabeled.jsonl"
    proc = run_cli(
        "relabel",
        "--manifest", str(DATA / "gold_small.jsonl"),
        "--hypotheses", str(DATA / "hyps_small.jsonl"),
        "--threshold", "60",
        "--out", str(out),
    )
    assert proc.returncode == 0, proc.stderr
    m = read_manifest(out)
    by_id = m.instance_by_id()
    assert by_id["g1"].triplets[0].head == "akmed rashid"
    assert by_id["g1"].triplets[0].relation == "per:origin"
    assert by_id["g1"].transcript == "akmed rashid is a pakistani author"
    assert by_id["g1"].source == "gold|relabeled"
    # dev/test untouched
    assert by_id["g4"].transcript.startswith("When bin Laden")


def test_filter_pseudo_subcommand(tmp_path):
    out = tmp_path / "kept.jsonl"
    report = tmp_path / "drops.jsonl"
    proc = run_cli(
        "filter-pseudo",
        "--pseudo", str(DATA / "pseudo_small.jsonl"),
        "--gold", str(DATA / "gold_small.jsonl"),
        "--out", str(out),
        "--drop-report", str(report),
    )
    assert proc.returncode == 0, proc.stderr
    kept = read_manifest(out)
    assert {i.id for i in kept.instances} == {"p1", "p6", "p7", "p8"}
    drops = [json.loads(line) for line in report.read_text().splitlines()]
    assert {d["id"]: d["reason"] for d in drops} == {
        "p2": "no_relation",
        "p3": "missing_entity",
        "p4": "pronoun_pair",
        "p5": "foreign_relation",
    }


def test_filter_pseudo_with_sampling(tmp_path):
    out = tmp_path / "kept.jsonl"
    report = tmp_path / "drops.jsonl"
    args = (
        "filter-pseudo",
        "--pseudo", str(DATA / "pseudo_small.jsonl"),
        "--gold", str(DATA / "gold_small.jsonl"),
        "--factor", "1.8",
        "--seed", "5",
        "--out", str(out),
        "--drop-report", str(report),
    )
    proc = run_cli(*args)
    assert proc.returncode == 0, proc.stderr
    kept = read_manifest(out)
    # gold train counts: per:origin 1, loc:contains 1 -> targets round(1.8) = 2 each;
    # availability: per:origin {p1,p6,p7}, loc:contains {p8}
    relations = [i.triplets[0].relation for i in kept.instances]
    assert relations.count("per:origin") == 2
    assert relations.count("loc:contains") == 1
    first = out.read_bytes()
    proc = run_cli(*args)
    assert out.read_bytes() == first


def test_human_subset_and_upsample_plan(tmp_path):
    sub_out = tmp_path / "human.jsonl"
    proc = run_cli(
        "human-subset", "--manifest", str(DATA / "gold_small.jsonl"), "--n", "2", "--seed", "3",
        "--out", str(sub_out),
    )
    assert proc.returncode == 0, proc.stderr
    sub = read_manifest(sub_out)
    assert len(sub.instances) == 2
    assert all(i.source == "human-pending" for i in sub.instances)

    plan_out = tmp_path / "plan.jsonl"
    proc = run_cli(
        "upsample-plan", "--manifest", str(DATA / "gold_small.jsonl"), "--voices", "v1,v2",
        "--out", str(plan_out),
    )
    assert proc.returncode == 0, proc.stderr
    plan = read_manifest(plan_out)
    assert len(plan.instances) == 6 + 4  # 2 train instances x 2 voices


def test_subset_subcommand(tmp_path):
    out = tmp_path / "sub.jsonl"
    proc = run_cli(
        "subset", "--manifest", str(DATA / "gold_small.jsonl"), "--k", "2", "--out", str(out)
    )
    assert proc.returncode == 0, proc.stderr
    sub = read_manifest(out)
    # three relations tie at two instances each; lexicographic order breaks it
    assert sub.relations == ("loc:contains", "org:member")
    assert {i.id for i in sub.instances} == {"g2", "g5", "g6"}


def test_seed_env_var_is_default(tmp_path):
    import os

    env = dict(os.environ, SPOKENRE_SEED="21")
    with_env = subprocess.run(
        [sys.executable, "-m", "spokenre", "human-subset", "--manifest", str(DATA / "gold_small.jsonl"),
         "--n", "2", "--out", str(tmp_path / "a.jsonl")],
        capture_output=True, env=env, timeout=60,
    )
    explicit = run_cli(
        "human-subset", "--manifest", str(DATA / "gold_small.jsonl"), "--n", "2",
        "--seed", "21", "--out", str(tmp_path / "b.jsonl"),
    )
    assert with_env.returncode == explicit.returncode == 0
    assert (tmp_path / "a.jsonl").read_bytes() == (tmp_path / "b.jsonl").read_bytes()


def test_adaptor_len_subcommand():
    proc = run_cli("adaptor-len", "--length", "100")
    assert proc.returncode == 0
    assert proc.stdout.decode().splitlines()[-1].endswith("13")
    proc = run_cli("adaptor-len", "--length", "100", "--spec", "3,2,1;3,2,1", "--json")
    assert json.loads(proc.stdout) == {"input": 100, "lengths": [50, 25]}


def _digest_dir(path: Path) -> dict:
    return {p.name: hashlib.sha256(p.read_bytes()).hexdigest() for p in sorted(path.iterdir())}


def test_every_subcommand_is_deterministic_and_does_not_mutate_inputs(tmp_path):
    data = DATA
    before = _digest_dir(data)
    out = tmp_path / "out"
    out.mkdir()
    commands = [
        ("build", "--records", str(data / "records_small.jsonl"), "--name", "b", "--out", str(out / "b.jsonl")),
        ("subset", "--manifest", str(data / "gold_small.jsonl"), "--k", "2", "--out", str(out / "s.jsonl")),
        ("stats", "--manifest", str(data / "gold_small.jsonl"), "--json"),
        ("upsample-plan", "--manifest", str(data / "gold_small.jsonl"), "--voices", "v1,v2,v3,v4",
         "--out", str(out / "u.jsonl")),
        ("human-subset", "--manifest", str(data / "gold_small.jsonl"), "--n", "2", "--seed", "11",
         "--out", str(out / "h.jsonl")),
        ("relabel", "--manifest", str(data / "gold_small.jsonl"), "--hypotheses", str(data / "hyps_small.jsonl"),
         "--out", str(out / "r.jsonl")),
        ("filter-pseudo", "--pseudo", str(data / "pseudo_small.jsonl"), "--gold", str(data / "gold_small.jsonl"),
         "--factor", "1.8", "--seed", "2", "--out", str(out / "f.jsonl"), "--drop-report", str(out / "d.jsonl")),
        ("evaluate", "--gold", str(data / "gold_small.jsonl"), "--pred", str(data / "preds_noisy.jsonl"), "--json"),
        ("triplet-lint", "--file", str(data / "gens.txt"), "--json"),
        ("wer", "--ref", str(data / "wer_ref.txt"), "--hyp", str(data / "wer_hyp.txt")),
        ("adaptor-len", "--length", "1000"),
    ]
    for args in commands:
        first = run_cli(*args)
        assert first.returncode == 0, (args, first.stderr)
        files_first = _digest_dir(out)
        second = run_cli(*args)
        assert second.returncode == 0
        assert second.stdout == first.stdout, args
        assert _digest_dir(out) == files_first, args
    assert _digest_dir(data) == before
