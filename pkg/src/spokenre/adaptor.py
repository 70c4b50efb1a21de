"""Length-adaptor and parameter-budget arithmetic.

The end-to-end model bridges speech-encoder and text-decoder sequence
lengths with a stack of strided 1-d convolutions; each layer maps a length
L to floor((L + 2p - k) / s) + 1.  With same-ish padding (p = floor(k/2),
k odd) the stack shrinks sequences by roughly s**n overall.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction


@dataclass(frozen=True)
class AdaptorSpec:
    """An ordered stack of (kernel, stride, padding) convolution layers.

    Requires k >= 1, s >= 1, p >= 0 and 2p < k per layer, which keeps
    output lengths positive for any positive input length.
    """

    layers: tuple[tuple[int, int, int], ...]

    def __post_init__(self):
        object.__setattr__(self, "layers", tuple(tuple(layer) for layer in self.layers))
        if not self.layers:
            raise ValueError("adaptor needs at least one layer")
        for idx, layer in enumerate(self.layers, start=1):
            if len(layer) != 3:
                raise ValueError(f"layer {idx}: expected (kernel, stride, padding)")
            k, s, p = layer
            if k < 1 or s < 1 or p < 0:
                raise ValueError(f"layer {idx}: need kernel >= 1, stride >= 1, padding >= 0")
            if 2 * p >= k:
                raise ValueError(f"layer {idx}: padding too large (2*{p} >= kernel {k})")

    @classmethod
    def parse(cls, text: str) -> "AdaptorSpec":
        """Parse "k,s,p[;k,s,p...]", e.g. "3,2,1;3,2,1;3,2,1"."""
        layers = []
        for part in text.split(";"):
            fields = part.split(",")
            if len(fields) != 3:
                raise ValueError(f"bad adaptor layer {part!r}: expected k,s,p")
            layers.append(tuple(int(f) for f in fields))
        return cls(tuple(layers))


DEFAULT_ADAPTOR = AdaptorSpec(((3, 2, 1), (3, 2, 1), (3, 2, 1)))


def layer_lengths(length: int, spec: AdaptorSpec = DEFAULT_ADAPTOR) -> list[int]:
    """Sequence length after each layer, in order."""
    if length < 1:
        raise ValueError("input length must be positive")
    lengths = []
    for idx, (k, s, p) in enumerate(spec.layers, start=1):
        length = (length + 2 * p - k) // s + 1
        if length < 1:
            raise ValueError(f"layer {idx} reduces the sequence below length 1")
        lengths.append(length)
    return lengths


def output_length(length: int, spec: AdaptorSpec = DEFAULT_ADAPTOR) -> int:
    """Final sequence length after the whole stack."""
    return layer_lengths(length, spec)[-1]


@dataclass(frozen=True)
class ParamBudget:
    """Trainable vs total parameter counts of a model."""

    total_params: int
    trainable_params: int

    def __post_init__(self):
        if self.total_params < 0 or not 0 <= self.trainable_params <= self.total_params:
            raise ValueError("need 0 <= trainable_params <= total_params")


def trainable_fraction(budget: ParamBudget) -> Fraction:
    """Exact fraction of parameters that are trained."""
    if budget.total_params == 0:
        raise ValueError("total_params must be positive")
    return Fraction(budget.trainable_params, budget.total_params)


__all__ = [
    "AdaptorSpec",
    "DEFAULT_ADAPTOR",
    "ParamBudget",
    "layer_lengths",
    "output_length",
    "trainable_fraction",
]
