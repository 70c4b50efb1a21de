import json
from pathlib import Path

import pytest

import spokenre
from spokenre_adapters.jobs import AdapterJob
from spokenre_adapters.synthesize import synthesize
from spokenre_adapters.train_e2e import (
    CharVocab,
    SpeechToTriplets,
    TrainerConfig,
    apply_freeze_policy,
    param_budget,
    train,
)

DATA = Path(__file__).parent / "data"


@pytest.fixture(scope="module")
def overfit_run(tmp_path_factory):
    """One 50-step overfit run on the synthesized 10-instance fixture."""
    work = tmp_path_factory.mktemp("train")
    voiced = work / "voiced.jsonl"
    synthesize(
        AdapterJob(str(DATA / "labeled_small.jsonl"), str(voiced), model="tone"),
        ["v1"],
        str(work / "audio"),
    )
    report_path = work / "report.json"
    report = train(
        AdapterJob(str(voiced), str(report_path), model="reference"),
        TrainerConfig(steps=50, seed=0),
        str(work / "audio"),
    )
    return report, report_path


def test_report_file_written(overfit_run):
    report, path = overfit_run
    on_disk = json.loads(path.read_text())
    assert on_disk["param_budget"] == report["param_budget"]
    assert on_disk["losses"] == report["losses"]
    assert report["n_instances"] == 10


def test_loss_strictly_decreases_over_50_steps(overfit_run):
    report, _ = overfit_run
    losses = report["losses"]
    assert len(losses) == 50
    assert all(later < earlier for earlier, later in zip(losses, losses[1:]))


def test_trainable_fraction_in_band(overfit_run):
    report, _ = overfit_run
    budget = spokenre.ParamBudget(**report["param_budget"])
    fraction = spokenre.trainable_fraction(budget)
    assert 0.15 <= fraction <= 0.25


def test_observed_lengths_match_adaptor_arithmetic(overfit_run):
    report, _ = overfit_run
    assert report["length_map"], "no lengths observed"
    for frames_in, frames_out in report["length_map"]:
        assert spokenre.output_length(frames_in) == frames_out


def test_generations_parse_leniently(overfit_run):
    report, _ = overfit_run
    assert len(report["generations"]) == 10
    for text in report["generations"].values():
        triplets, _warnings = spokenre.parse_lenient(text)
        for t in triplets:
            assert t.head and t.relation and t.tail


def test_freeze_policy_trains_only_the_named_parts():
    config = TrainerConfig()
    model = SpeechToTriplets(config, vocab_size=40)
    apply_freeze_policy(model, "partial")
    for name, p in model.named_parameters():
        trainable = p.requires_grad
        in_scope = (
            "adaptor" in name
            or ".attn" in name and name.startswith("encoder.")
            or "cross_attn" in name
            or ".ln" in name
            or "_norm" in name
        )
        assert trainable == in_scope, name
    assert all(not p.requires_grad for p in model.feature_extractor.parameters())
    assert all(not p.requires_grad for p in model.embed.parameters())

    budget = param_budget(model)
    assert 0 < budget["trainable_params"] < budget["total_params"]

    apply_freeze_policy(model, "none")
    # "none" leaves whatever is set; fresh model trains everything
    fresh = SpeechToTriplets(config, vocab_size=40)
    apply_freeze_policy(fresh, "none")
    assert all(p.requires_grad for p in fresh.parameters())


def test_decoder_dimension_mismatch_rejected():
    with pytest.raises(ValueError, match="decoder input dimension"):
        TrainerConfig(decoder_dim=96)
    with pytest.raises(ValueError, match="freeze"):
        TrainerConfig(freeze="half")


def test_training_is_seed_deterministic(tmp_path):
    voiced = tmp_path / "voiced.jsonl"
    synthesize(
        AdapterJob(str(DATA / "labeled_small.jsonl"), str(voiced), model="tone"),
        ["v1"],
        str(tmp_path / "audio"),
    )
    runs = []
    for i in range(2):
        report = train(
            AdapterJob(str(voiced), str(tmp_path / f"r{i}.json"), model="reference"),
            TrainerConfig(steps=3, seed=7),
            str(tmp_path / "audio"),
        )
        runs.append(report["losses"])
    assert runs[0] == runs[1]
