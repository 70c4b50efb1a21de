"""Reference end-to-end trainer: speech encoder -> length adaptor -> text decoder.

A compact, CPU-friendly stand-in for the full-scale architecture that
keeps its structure exactly: a frozen convolutional feature extractor
over raw waveforms, transformer encoder layers, a stack of strided 1-d
convolutions shrinking the sequence toward text length, and a
transformer decoder generating linearized triplets character by
character.  The partial freeze policy trains the adaptor, encoder
self-attention, decoder cross-attention, and every layer norm while
freezing the rest, which lands the trainable share of parameters around
a fifth of the model.

Training is full-batch and deterministic under a fixed seed.  The run
report carries the parameter budget, the observed per-instance mapping
from encoder frames to adaptor frames (for cross-checking against the
toolkit's length arithmetic), per-step losses, and greedy generations.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path

import torch
from torch import nn

from .jobs import AdapterJob
from .manifest_io import linearize, read_manifest
from .tone_speech import read_wav

PAD, BOS, EOS = 0, 1, 2
FREEZE_POLICIES = ("partial", "none")

# (kernel, stride) per feature-extractor conv; total stride 320 over raw
# 16 kHz audio, i.e. one frame per 20 ms.
FEATURE_CONVS = ((10, 5), (3, 2), (3, 2), (3, 2), (3, 2), (2, 2), (2, 2))


@dataclass
class TrainerConfig:
    d_model: int = 64
    heads: int = 4
    ff_mult: int = 4
    encoder_layers: int = 4
    decoder_layers: int = 4
    feat_channels: int = 128
    adaptor: tuple = ((3, 2, 1), (3, 2, 1), (3, 2, 1))
    decoder_dim: int = 64
    max_generate: int = 200
    lr: float = 1e-3
    steps: int = 50
    seed: int = 0
    freeze: str = "partial"

    def __post_init__(self):
        if self.freeze not in FREEZE_POLICIES:
            raise ValueError(f"unknown freeze policy {self.freeze!r}")
        if self.decoder_dim != self.d_model:
            raise ValueError(
                f"adaptor output dimension {self.d_model} does not match decoder input dimension {self.decoder_dim}"
            )


def sinusoidal(length: int, dim: int) -> torch.Tensor:
    position = torch.arange(length, dtype=torch.float32).unsqueeze(1)
    div = torch.exp(torch.arange(0, dim, 2, dtype=torch.float32) * (-math.log(10000.0) / dim))
    enc = torch.zeros(length, dim)
    enc[:, 0::2] = torch.sin(position * div)
    enc[:, 1::2] = torch.cos(position * div)
    return enc


class FeatureExtractor(nn.Module):
    def __init__(self, channels: int):
        super().__init__()
        convs = []
        in_ch = 1
        for kernel, stride in FEATURE_CONVS:
            convs.append(nn.Conv1d(in_ch, channels, kernel, stride=stride))
            convs.append(nn.GELU())
            in_ch = channels
        self.convs = nn.Sequential(*convs)

    def forward(self, wave: torch.Tensor) -> torch.Tensor:
        # wave: [B, T] -> frames [B, L, C]
        return self.convs(wave.unsqueeze(1)).transpose(1, 2)


class EncoderLayer(nn.Module):
    def __init__(self, d: int, heads: int, ff_mult: int):
        super().__init__()
        self.attn = nn.MultiheadAttention(d, heads, batch_first=True)
        self.ff = nn.Sequential(nn.Linear(d, ff_mult * d), nn.GELU(), nn.Linear(ff_mult * d, d))
        self.ln1 = nn.LayerNorm(d)
        self.ln2 = nn.LayerNorm(d)

    def forward(self, x):
        h = self.ln1(x)
        x = x + self.attn(h, h, h, need_weights=False)[0]
        return x + self.ff(self.ln2(x))


class DecoderLayer(nn.Module):
    def __init__(self, d: int, heads: int, ff_mult: int):
        super().__init__()
        self.self_attn = nn.MultiheadAttention(d, heads, batch_first=True)
        self.cross_attn = nn.MultiheadAttention(d, heads, batch_first=True)
        self.ff = nn.Sequential(nn.Linear(d, ff_mult * d), nn.GELU(), nn.Linear(ff_mult * d, d))
        self.ln1 = nn.LayerNorm(d)
        self.ln2 = nn.LayerNorm(d)
        self.ln3 = nn.LayerNorm(d)

    def forward(self, x, memory, causal_mask):
        h = self.ln1(x)
        x = x + self.self_attn(h, h, h, attn_mask=causal_mask, need_weights=False)[0]
        h = self.ln2(x)
        x = x + self.cross_attn(h, memory, memory, need_weights=False)[0]
        return x + self.ff(self.ln3(x))


class SpeechToTriplets(nn.Module):
    def __init__(self, config: TrainerConfig, vocab_size: int):
        super().__init__()
        d = config.d_model
        self.feature_extractor = FeatureExtractor(config.feat_channels)
        self.feat_proj = nn.Linear(config.feat_channels, d)
        self.encoder = nn.ModuleList(
            EncoderLayer(d, config.heads, config.ff_mult) for _ in range(config.encoder_layers)
        )
        self.encoder_norm = nn.LayerNorm(d)
        self.adaptor = nn.ModuleList(
            nn.Conv1d(d, d, kernel, stride=stride, padding=padding)
            for kernel, stride, padding in config.adaptor
        )
        self.embed = nn.Embedding(vocab_size, d, padding_idx=PAD)
        self.decoder = nn.ModuleList(
            DecoderLayer(d, config.heads, config.ff_mult) for _ in range(config.decoder_layers)
        )
        self.decoder_norm = nn.LayerNorm(d)

    def extract_features(self, wave: torch.Tensor) -> torch.Tensor:
        """Frozen front end; safe to precompute once per utterance."""
        return self.feat_proj(self.feature_extractor(wave))

    def encode_frames(self, features: torch.Tensor) -> tuple[torch.Tensor, int, int]:
        frames_in = features.shape[1]
        x = features + sinusoidal(frames_in, features.shape[2])
        for layer in self.encoder:
            x = layer(x)
        x = self.encoder_norm(x).transpose(1, 2)
        for conv in self.adaptor:
            x = torch.nn.functional.gelu(conv(x))
        memory = x.transpose(1, 2)
        return memory, frames_in, memory.shape[1]

    def encode(self, wave: torch.Tensor) -> tuple[torch.Tensor, int, int]:
        return self.encode_frames(self.extract_features(wave))

    def decode(self, tokens: torch.Tensor, memory: torch.Tensor) -> torch.Tensor:
        x = self.embed(tokens) + sinusoidal(tokens.shape[1], memory.shape[2])
        mask = torch.triu(torch.full((tokens.shape[1], tokens.shape[1]), float("-inf")), diagonal=1)
        for layer in self.decoder:
            x = layer(x, memory, mask)
        x = self.decoder_norm(x)
        return x @ self.embed.weight.t()  # tied output projection


def apply_freeze_policy(model: SpeechToTriplets, policy: str) -> None:
    """partial = train the adaptor, encoder self-attention, decoder
    cross-attention, and all layer norms; freeze the rest."""
    if policy == "none":
        return
    for p in model.parameters():
        p.requires_grad = False
    trainable_modules = [model.adaptor, model.encoder_norm, model.decoder_norm]
    trainable_modules.extend(layer.attn for layer in model.encoder)
    trainable_modules.extend(layer.cross_attn for layer in model.decoder)
    for module in model.modules():
        if isinstance(module, nn.LayerNorm):
            trainable_modules.append(module)
    for module in trainable_modules:
        for p in module.parameters():
            p.requires_grad = True


def param_budget(model: nn.Module) -> dict:
    total = sum(p.numel() for p in model.parameters())
    trainable = sum(p.numel() for p in model.parameters() if p.requires_grad)
    return {"total_params": total, "trainable_params": trainable}


class CharVocab:
    def __init__(self, texts):
        chars = sorted({ch for text in texts for ch in text})
        self.itos = ["<pad>", "<bos>", "<eos>", *chars]
        self.stoi = {ch: i for i, ch in enumerate(self.itos)}

    def __len__(self):
        return len(self.itos)

    def encode(self, text: str) -> list[int]:
        return [BOS, *(self.stoi[ch] for ch in text), EOS]

    def decode(self, ids) -> str:
        return "".join(self.itos[i] for i in ids if i > EOS)


def load_training_set(manifest_path: str, audio_root: str):
    source = read_manifest(manifest_path)
    examples = []
    for inst in source["instances"]:
        if not inst.get("audio") or not inst.get("triplets"):
            continue
        wave = torch.tensor(read_wav(Path(audio_root) / inst["audio"]), dtype=torch.float32)
        examples.append((inst["id"], wave, linearize(inst["triplets"])))
    if not examples:
        raise ValueError("no trainable instances (need audio and triplets)")
    return examples


def train(job: AdapterJob, config: TrainerConfig, audio_root: str) -> dict:
    torch.manual_seed(config.seed)
    examples = load_training_set(job.input_manifest, audio_root)
    vocab = CharVocab([target for _id, _wave, target in examples])
    model = SpeechToTriplets(config, len(vocab))
    apply_freeze_policy(model, config.freeze)
    budget = param_budget(model)

    targets = {inst_id: torch.tensor(vocab.encode(t)) for inst_id, _w, t in examples}
    with torch.no_grad():
        features = {inst_id: model.extract_features(wave.unsqueeze(0)) for inst_id, wave, _t in examples}
    optimizer = torch.optim.Adam((p for p in model.parameters() if p.requires_grad), lr=config.lr)

    length_map: dict[int, int] = {}
    losses: list[float] = []
    model.train()
    for _step in range(config.steps):
        optimizer.zero_grad()
        step_loss = torch.zeros(())
        for inst_id, _wave, _target in examples:
            memory, frames_in, frames_out = model.encode_frames(features[inst_id])
            length_map[frames_in] = frames_out
            tokens = targets[inst_id].unsqueeze(0)
            logits = model.decode(tokens[:, :-1], memory)
            step_loss = step_loss + torch.nn.functional.cross_entropy(
                logits.squeeze(0), tokens[0, 1:], ignore_index=PAD
            )
        step_loss = step_loss / len(examples)
        step_loss.backward()
        optimizer.step()
        losses.append(step_loss.item())

    model.eval()
    generations = {}
    with torch.no_grad():
        for inst_id, _wave, _target in examples:
            memory, _fi, _fo = model.encode_frames(features[inst_id])
            tokens = torch.tensor([[BOS]])
            for _ in range(config.max_generate):
                logits = model.decode(tokens, memory)
                nxt = int(logits[0, -1].argmax())
                tokens = torch.cat([tokens, torch.tensor([[nxt]])], dim=1)
                if nxt == EOS:
                    break
            generations[inst_id] = vocab.decode(tokens[0].tolist())

    report = {
        "param_budget": budget,
        "trainable_fraction": budget["trainable_params"] / budget["total_params"],
        "freeze_policy": config.freeze,
        "adaptor": [list(layer) for layer in config.adaptor],
        "length_map": sorted(length_map.items()),
        "losses": losses,
        "generations": generations,
        "n_instances": len(examples),
        "steps": config.steps,
        "seed": config.seed,
    }
    Path(job.output_manifest).parent.mkdir(parents=True, exist_ok=True)
    Path(job.output_manifest).write_text(json.dumps(report, indent=2) + "\n", encoding="utf-8")
    return report


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description="overfit the reference end-to-end model on a manifest")
    parser.add_argument("--manifest", required=True)
    parser.add_argument("--audio-root", required=True)
    parser.add_argument("--report", required=True, help="where to write the run report JSON")
    parser.add_argument("--steps", type=int, default=50)
    parser.add_argument("--lr", type=float, default=1e-3)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--freeze", default="partial", choices=FREEZE_POLICIES)
    args = parser.parse_args(argv)
    config = TrainerConfig(steps=args.steps, lr=args.lr, seed=args.seed, freeze=args.freeze)
    job = AdapterJob(args.manifest, args.report, model="reference")
    report = train(job, config, args.audio_root)
    budget = report["param_budget"]
    print(
        f"trainable {budget['trainable_params']}/{budget['total_params']} "
        f"({report['trainable_fraction']:.1%}), "
        f"loss {report['losses'][0]:.3f} -> {report['losses'][-1]:.3f} over {args.steps} steps"
    )
    return 0


if __name__ == "__main__":
    sys.exit(main())
