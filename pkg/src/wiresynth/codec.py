"""Bidirectional scene <-> token sequence codec.

Vocabulary layout (contiguous, disjoint): PAD=0, BOS=1, EOS=2, then 60 camera
pose tokens, 7 shape tokens, position bins, rotation bins, size bins. The
sequence layout is [BOS, pose, 9-token object blocks..., EOS]; a block reads
[shape, pos-x, pos-y, pos-z, yaw, pitch, size-x, size-y, size-z].

Scalar quantization maps x over [lo, hi] to round((x - lo) / (hi - lo) *
(n_bins - 1)) with ties rounded away from zero. Rotation uses 4 bins over
[0, 270], so right angles survive the round trip exactly.

Decoding is strict for dataset files (any malformed token is an error naming
position and expectation) and lenient for model outputs (malformed object
blocks are skipped and reported in diagnostics, never raised).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .scene import (
    CameraPose,
    N_POSES,
    ObjectSpec,
    QuantizationSpec,
    SceneDescriptor,
    ShapeType,
)

PAD = 0
BOS = 1
EOS = 2

N_SPECIALS = 3
N_SHAPES = len(ShapeType)

BLOCK_SLOTS = (
    "shape",
    "pos-x",
    "pos-y",
    "pos-z",
    "yaw",
    "pitch",
    "size-x",
    "size-y",
    "size-z",
)
BLOCK_LEN = len(BLOCK_SLOTS)


class QuantizeRangeError(ValueError):
    pass


class DecodeError(ValueError):
    """Strict-mode structural error; names the offending position."""

    def __init__(self, position: int, expected: str, got):
        super().__init__(f"position {position}: expected {expected}, got {got!r}")
        self.position = position
        self.expected = expected


def quantize(x: float, lo: float, hi: float, n_bins: int, strict: bool = True) -> int:
    """Uniform scalar quantization to a bin index in [0, n_bins - 1]."""
    if n_bins < 2:
        raise ValueError("n_bins must be >= 2")
    if hi <= lo:
        raise ValueError("empty value range")
    if strict and not lo <= x <= hi:
        raise QuantizeRangeError(f"value {x} outside [{lo}, {hi}]")
    x = min(max(x, lo), hi)
    q = (x - lo) / (hi - lo) * (n_bins - 1)
    q = math.floor(q + 0.5)  # half away from zero; q is never negative here
    return min(max(q, 0), n_bins - 1)


def dequantize(q: int, lo: float, hi: float, n_bins: int) -> float:
    """Center value of a bin: the exact inverse on bin indices."""
    if not 0 <= q <= n_bins - 1:
        raise ValueError(f"bin {q} outside [0, {n_bins - 1}]")
    return lo + q / (n_bins - 1) * (hi - lo)


@dataclass(frozen=True)
class Vocabulary:
    """Token id ranges derived from a quantization spec."""

    quant: QuantizationSpec

    @property
    def pose_offset(self) -> int:
        return N_SPECIALS

    @property
    def shape_offset(self) -> int:
        return self.pose_offset + N_POSES

    @property
    def pos_offset(self) -> int:
        return self.shape_offset + N_SHAPES

    @property
    def rot_offset(self) -> int:
        return self.pos_offset + self.quant.n_bins_pos

    @property
    def size_offset(self) -> int:
        return self.rot_offset + self.quant.n_bins_rot

    @property
    def size(self) -> int:
        return self.size_offset + self.quant.n_bins_size

    def family(self, token: int) -> str:
        """Which disjoint range a token id falls in."""
        if token in (PAD, BOS, EOS):
            return ("pad", "bos", "eos")[token]
        if self.pose_offset <= token < self.shape_offset:
            return "pose"
        if self.shape_offset <= token < self.pos_offset:
            return "shape"
        if self.pos_offset <= token < self.rot_offset:
            return "pos"
        if self.rot_offset <= token < self.size_offset:
            return "rot"
        if self.size_offset <= token < self.size:
            return "size"
        return "invalid"

    def pose_token(self, pose_id: int) -> int:
        return self.pose_offset + pose_id

    def shape_token(self, shape: ShapeType) -> int:
        return self.shape_offset + shape.value

    def pos_token(self, x: float, strict: bool = True) -> int:
        return self.pos_offset + quantize(
            x, 0.0, self.quant.world_size, self.quant.n_bins_pos, strict
        )

    def rot_token(self, deg: float, strict: bool = True) -> int:
        return self.rot_offset + quantize(
            deg, 0.0, self.quant.rot_max, self.quant.n_bins_rot, strict
        )

    def size_token(self, s: float, strict: bool = True) -> int:
        return self.size_offset + quantize(
            s, 0.0, self.quant.size_max, self.quant.n_bins_size, strict
        )

    def pos_value(self, token: int) -> float:
        return dequantize(
            token - self.pos_offset, 0.0, self.quant.world_size, self.quant.n_bins_pos
        )

    def rot_value(self, token: int) -> float:
        return dequantize(
            token - self.rot_offset, 0.0, self.quant.rot_max, self.quant.n_bins_rot
        )

    def size_value(self, token: int) -> float:
        return dequantize(
            token - self.size_offset, 0.0, self.quant.size_max, self.quant.n_bins_size
        )


def vocab_size(quant: QuantizationSpec) -> int:
    """3 specials + 60 poses + 7 shapes + the three bin families."""
    return (
        N_SPECIALS
        + N_POSES
        + N_SHAPES
        + quant.n_bins_pos
        + quant.n_bins_rot
        + quant.n_bins_size
    )


@dataclass(frozen=True)
class TokenSequence:
    tokens: tuple[int, ...]

    def __len__(self) -> int:
        return len(self.tokens)


def encode_scene(
    scene: SceneDescriptor,
    pose: CameraPose,
    quant: QuantizationSpec,
    order_seed: int,
) -> TokenSequence:
    """Tokenize a scene; object blocks appear in a seeded random order."""
    vocab = Vocabulary(quant)
    order = np.random.default_rng(order_seed).permutation(len(scene.objects))
    tokens = [BOS, vocab.pose_token(pose.pose_id)]
    for k in order:
        obj = scene.objects[int(k)]
        tokens.append(vocab.shape_token(obj.shape))
        tokens.extend(vocab.pos_token(p) for p in obj.position)
        tokens.extend(vocab.rot_token(r) for r in obj.rotation)
        tokens.extend(vocab.size_token(s) for s in obj.size)
    tokens.append(EOS)
    return TokenSequence(tuple(tokens))


_SLOT_FAMILY = ("shape", "pos", "pos", "pos", "rot", "rot", "size", "size", "size")


def _block_to_object(vocab: Vocabulary, window: list[int]) -> ObjectSpec:
    shape = ShapeType(window[0] - vocab.shape_offset)
    position = tuple(vocab.pos_value(t) for t in window[1:4])
    rotation = tuple(int(round(vocab.rot_value(t))) for t in window[4:6])
    size = tuple(vocab.size_value(t) for t in window[6:9])
    return ObjectSpec(shape, position, rotation, size)


def _profile_for(quant: QuantizationSpec, explicit: str | None) -> str:
    if explicit is not None:
        return explicit
    for name in ("simple", "complex"):
        if quant == QuantizationSpec.for_profile(name):
            return name
    raise ValueError("cannot infer profile from quantization spec; pass profile=")


def decode_sequence(
    tokens,
    quant: QuantizationSpec,
    mode: str = "strict",
    profile: str | None = None,
) -> tuple[CameraPose | None, SceneDescriptor, tuple[str, ...]]:
    """Invert encode_scene.

    Strict mode raises DecodeError on any structural problem. Lenient mode
    never raises on token content: malformed object blocks are skipped,
    decoding truncates at the first EOS (or the end), and every repair is
    recorded in the returned diagnostics.
    """
    if mode not in ("strict", "lenient"):
        raise ValueError(f"unknown decode mode {mode!r}")
    strict = mode == "strict"
    vocab = Vocabulary(quant)
    tokens = [int(t) for t in tokens]
    diagnostics: list[str] = []
    pos = 0

    if pos < len(tokens) and tokens[pos] == BOS:
        pos += 1
    elif strict:
        raise DecodeError(0, "BOS", tokens[0] if tokens else None)
    else:
        diagnostics.append("position 0: missing BOS")

    pose: CameraPose | None = None
    if pos < len(tokens) and vocab.family(tokens[pos]) == "pose":
        pose = CameraPose.from_id(tokens[pos] - vocab.pose_offset)
        pos += 1
    elif strict:
        raise DecodeError(pos, "camera pose token", tokens[pos] if pos < len(tokens) else None)
    elif pos < len(tokens) and tokens[pos] not in (EOS,):
        diagnostics.append(f"position {pos}: invalid pose token {tokens[pos]}")
        pos += 1
    else:
        diagnostics.append(f"position {pos}: missing pose token")

    objects: list[ObjectSpec] = []
    block_idx = 0
    ended = False
    while pos < len(tokens):
        if tokens[pos] == EOS:
            pos += 1
            ended = True
            break
        if not strict and tokens[pos] == PAD:
            diagnostics.append(f"position {pos}: padding inside sequence")
            pos += 1
            continue
        window = tokens[pos : pos + BLOCK_LEN]
        bad_slot = None
        for k, fam in enumerate(_SLOT_FAMILY):
            if k >= len(window) or vocab.family(window[k]) != fam:
                bad_slot = k
                break
        if bad_slot is None:
            objects.append(_block_to_object(vocab, window))
            pos += BLOCK_LEN
        elif strict:
            if bad_slot >= len(window):
                raise DecodeError(
                    len(tokens), f"{_SLOT_FAMILY[bad_slot]} token (truncated object block)", None
                )
            raise DecodeError(
                pos + bad_slot, f"{_SLOT_FAMILY[bad_slot]} token", window[bad_slot]
            )
        else:
            if bad_slot < len(window) and window[bad_slot] == EOS:
                diagnostics.append(
                    f"block {block_idx}: truncated by EOS at position {pos + bad_slot}"
                )
                pos += bad_slot
            elif bad_slot >= len(window):
                diagnostics.append(f"block {block_idx}: truncated at sequence end")
                pos = len(tokens)
            else:
                diagnostics.append(
                    f"block {block_idx}: skipped, slot {_SLOT_FAMILY[bad_slot]} "
                    f"got token {window[bad_slot]} at position {pos + bad_slot}"
                )
                pos += BLOCK_LEN
        block_idx += 1

    if strict and not ended:
        raise DecodeError(len(tokens), "EOS", None)
    if strict and pos < len(tokens):
        raise DecodeError(pos, "end of sequence after EOS", tokens[pos])
    if not strict and ended and pos < len(tokens):
        diagnostics.append(f"position {pos}: {len(tokens) - pos} tokens after EOS ignored")
    if not strict and not ended:
        diagnostics.append("missing EOS")

    scene = SceneDescriptor(
        world_size=quant.world_size,
        profile=_profile_for(quant, profile),
        objects=tuple(objects),
    )
    return pose, scene, tuple(diagnostics)


def quant_to_dict(quant: QuantizationSpec) -> dict:
    return {
        "n_bins_pos": quant.n_bins_pos,
        "n_bins_rot": quant.n_bins_rot,
        "n_bins_size": quant.n_bins_size,
        "world_size": quant.world_size,
        "size_max": quant.size_max,
        "rot_max": quant.rot_max,
    }


def quant_from_dict(raw: dict) -> QuantizationSpec:
    return QuantizationSpec(
        n_bins_pos=int(raw["n_bins_pos"]),
        n_bins_rot=int(raw["n_bins_rot"]),
        n_bins_size=int(raw["n_bins_size"]),
        world_size=float(raw["world_size"]),
        size_max=float(raw["size_max"]),
        rot_max=float(raw.get("rot_max", 270.0)),
    )


def write_sequence_json(
    seq: TokenSequence, quant: QuantizationSpec, order_seed: int
) -> bytes:
    doc = {
        "tokens": list(seq.tokens),
        "quant": quant_to_dict(quant),
        "order_seed": int(order_seed),
    }
    return (json.dumps(doc, indent=2) + "\n").encode("utf-8")


def read_sequence_json(data: bytes | str) -> tuple[TokenSequence, QuantizationSpec, int]:
    raw = json.loads(data)
    return (
        TokenSequence(tuple(int(t) for t in raw["tokens"])),
        quant_from_dict(raw["quant"]),
        int(raw["order_seed"]),
    )
