"""Image-to-sequence model: ViT encoder + vanilla transformer decoder.

Encoder parameter names follow the timm ViT convention (patch_embed.proj,
blocks.N.attn.qkv, ls1/ls2 layer-scale, ...) so published DeiT-III weights
can be loaded when a weights file is supplied; without one the encoder is
randomly initialized. The decoder is always randomly initialized. The output
head starts at exactly zero, so an untrained model predicts the uniform
distribution and its cross-entropy equals ln(vocab_size).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import torch
from torch import nn

from .data import BOS, EOS


@dataclass(frozen=True)
class EncoderSpec:
    image_size: int
    patch_size: int
    dim: int
    depth: int
    heads: int
    layer_scale: float | None = 1e-4


ENCODER_VARIANTS = {
    # The paper-scale encoder: DeiT-III Small geometry.
    "deit3-small": EncoderSpec(image_size=224, patch_size=16, dim=384, depth=12, heads=6),
    # Desk-scale variants for the toy overfit runs.
    "vit-micro": EncoderSpec(image_size=128, patch_size=16, dim=192, depth=4, heads=4),
    "vit-nano": EncoderSpec(image_size=96, patch_size=16, dim=128, depth=3, heads=4),
}


class Mlp(nn.Module):
    def __init__(self, dim: int, hidden: int):
        super().__init__()
        self.fc1 = nn.Linear(dim, hidden)
        self.act = nn.GELU()
        self.fc2 = nn.Linear(hidden, dim)

    def forward(self, x):
        return self.fc2(self.act(self.fc1(x)))


class Attention(nn.Module):
    def __init__(self, dim: int, heads: int):
        super().__init__()
        self.heads = heads
        self.scale = (dim // heads) ** -0.5
        self.qkv = nn.Linear(dim, dim * 3, bias=True)
        self.proj = nn.Linear(dim, dim)

    def forward(self, x):
        b, n, d = x.shape
        qkv = self.qkv(x).reshape(b, n, 3, self.heads, d // self.heads)
        q, k, v = qkv.permute(2, 0, 3, 1, 4)
        attn = (q @ k.transpose(-2, -1)) * self.scale
        attn = attn.softmax(dim=-1)
        out = (attn @ v).transpose(1, 2).reshape(b, n, d)
        return self.proj(out)


class LayerScale(nn.Module):
    def __init__(self, dim: int, init: float):
        super().__init__()
        self.gamma = nn.Parameter(init * torch.ones(dim))

    def forward(self, x):
        return x * self.gamma


class Block(nn.Module):
    def __init__(self, dim: int, heads: int, layer_scale: float | None):
        super().__init__()
        self.norm1 = nn.LayerNorm(dim)
        self.attn = Attention(dim, heads)
        self.ls1 = LayerScale(dim, layer_scale) if layer_scale else nn.Identity()
        self.norm2 = nn.LayerNorm(dim)
        self.mlp = Mlp(dim, dim * 4)
        self.ls2 = LayerScale(dim, layer_scale) if layer_scale else nn.Identity()

    def forward(self, x):
        x = x + self.ls1(self.attn(self.norm1(x)))
        x = x + self.ls2(self.mlp(self.norm2(x)))
        return x


class VisionEncoder(nn.Module):
    def __init__(self, spec: EncoderSpec):
        super().__init__()
        self.spec = spec
        n_patches = (spec.image_size // spec.patch_size) ** 2
        self.patch_embed = nn.Sequential()
        self.patch_embed.proj = nn.Conv2d(
            3, spec.dim, kernel_size=spec.patch_size, stride=spec.patch_size
        )
        self.cls_token = nn.Parameter(torch.zeros(1, 1, spec.dim))
        self.pos_embed = nn.Parameter(torch.zeros(1, n_patches + 1, spec.dim))
        self.blocks = nn.ModuleList(
            Block(spec.dim, spec.heads, spec.layer_scale) for _ in range(spec.depth)
        )
        self.norm = nn.LayerNorm(spec.dim)
        nn.init.trunc_normal_(self.pos_embed, std=0.02)
        nn.init.trunc_normal_(self.cls_token, std=0.02)

    def forward(self, images: torch.Tensor) -> torch.Tensor:
        x = self.patch_embed.proj(images)  # (B, D, H/p, W/p)
        x = x.flatten(2).transpose(1, 2)
        cls = self.cls_token.expand(len(x), -1, -1)
        x = torch.cat([cls, x], dim=1) + self.pos_embed
        for block in self.blocks:
            x = block(x)
        return self.norm(x)

    @property
    def n_tokens(self) -> int:
        return (self.spec.image_size // self.spec.patch_size) ** 2 + 1


class SequenceDecoder(nn.Module):
    """Causal transformer decoder over token prefixes with image memory."""

    def __init__(self, vocab_size: int, max_len: int, dim: int, depth: int, heads: int):
        super().__init__()
        self.vocab_size = vocab_size
        self.max_len = max_len
        self.token_embed = nn.Embedding(vocab_size, dim)
        self.pos_embed = nn.Parameter(torch.zeros(1, max_len, dim))
        layer = nn.TransformerDecoderLayer(
            d_model=dim,
            nhead=heads,
            dim_feedforward=dim * 4,
            dropout=0.0,
            batch_first=True,
            norm_first=True,
        )
        self.decoder = nn.TransformerDecoder(layer, num_layers=depth)
        self.norm = nn.LayerNorm(dim)
        self.head = nn.Linear(dim, vocab_size)
        nn.init.trunc_normal_(self.pos_embed, std=0.02)
        # Zero head: the untrained model emits the uniform distribution.
        nn.init.zeros_(self.head.weight)
        nn.init.zeros_(self.head.bias)

    def forward(self, memory: torch.Tensor, tokens: torch.Tensor) -> torch.Tensor:
        b, n = tokens.shape
        x = self.token_embed(tokens) + self.pos_embed[:, :n]
        mask = nn.Transformer.generate_square_subsequent_mask(n, device=tokens.device)
        x = self.decoder(x, memory, tgt_mask=mask)
        return self.head(self.norm(x))


class ImageToSequence(nn.Module):
    def __init__(
        self,
        vocab_size: int,
        max_len: int,
        encoder_variant: str = "vit-micro",
        decoder_dim: int = 256,
        decoder_depth: int = 6,
        decoder_heads: int = 8,
    ):
        super().__init__()
        spec = ENCODER_VARIANTS[encoder_variant]
        self.encoder_variant = encoder_variant
        self.encoder = VisionEncoder(spec)
        self.bridge = (
            nn.Linear(spec.dim, decoder_dim) if spec.dim != decoder_dim else nn.Identity()
        )
        self.decoder = SequenceDecoder(vocab_size, max_len, decoder_dim, decoder_depth, decoder_heads)

    @property
    def image_size(self) -> int:
        return self.encoder.spec.image_size

    def encode(self, images: torch.Tensor) -> torch.Tensor:
        return self.bridge(self.encoder(images))

    def forward(self, images: torch.Tensor, tokens: torch.Tensor) -> torch.Tensor:
        return self.decoder(self.encode(images), tokens)

    @torch.no_grad()
    def greedy_decode(self, images: torch.Tensor) -> list[list[int]]:
        """Argmax decoding from BOS until EOS or the profile's max length."""
        self.eval()
        memory = self.encode(images)
        b = len(images)
        seq = torch.full((b, 1), BOS, dtype=torch.long, device=images.device)
        done = torch.zeros(b, dtype=torch.bool, device=images.device)
        while seq.shape[1] < self.decoder.max_len and not bool(done.all()):
            logits = self.decoder(memory, seq)[:, -1]
            nxt = logits.argmax(dim=-1)
            nxt = torch.where(done, torch.full_like(nxt, EOS), nxt)
            done = done | (nxt == EOS)
            seq = torch.cat([seq, nxt[:, None]], dim=1)
        out = []
        for row in seq.tolist():
            if EOS in row:
                row = row[: row.index(EOS) + 1]
            out.append(row)
        return out


def load_encoder_weights(model: ImageToSequence, path: str) -> tuple[int, int]:
    """Best-effort load of pretrained ViT weights into the encoder.

    Returns (loaded, total) parameter-tensor counts. Keys follow the timm
    convention; mismatched shapes (e.g. a different image size's pos_embed)
    are skipped rather than fatal.
    """
    raw = torch.load(path, map_location="cpu")
    state = raw.get("model", raw) if isinstance(raw, dict) else raw
    own = model.encoder.state_dict()
    picked = {}
    for key, value in state.items():
        key = key.removeprefix("encoder.").removeprefix("module.")
        if key in own and own[key].shape == value.shape:
            picked[key] = value
    model.encoder.load_state_dict(picked, strict=False)
    return len(picked), len(own)


def count_parameters(model: nn.Module) -> int:
    return sum(p.numel() for p in model.parameters())


def uniform_cross_entropy(vocab_size: int) -> float:
    return math.log(vocab_size)
