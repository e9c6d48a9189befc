import math

import pytest
import torch

from wiresynth_trainer.data import BOS, EOS
from wiresynth_trainer.model import (
    ENCODER_VARIANTS,
    ImageToSequence,
    VisionEncoder,
    uniform_cross_entropy,
)


def tiny_model(vocab=114, max_len=48):
    torch.manual_seed(0)
    return ImageToSequence(vocab, max_len, "vit-nano", decoder_dim=64, decoder_depth=2, decoder_heads=2)


class TestShapes:
    def test_encoder_token_grid(self):
        spec = ENCODER_VARIANTS["vit-nano"]
        enc = VisionEncoder(spec)
        out = enc(torch.randn(2, 3, spec.image_size, spec.image_size))
        expected = (spec.image_size // spec.patch_size) ** 2 + 1  # patches + cls
        assert out.shape == (2, expected, spec.dim)
        assert enc.n_tokens == expected

    def test_decoder_logits_cover_vocabulary(self):
        model = tiny_model(vocab=114)
        imgs = torch.randn(3, 3, 96, 96)
        tokens = torch.randint(0, 114, (3, 20))
        logits = model(imgs, tokens)
        assert logits.shape == (3, 20, 114)

    def test_variants_registry(self):
        assert ENCODER_VARIANTS["deit3-small"].dim == 384
        assert ENCODER_VARIANTS["deit3-small"].depth == 12
        assert ENCODER_VARIANTS["deit3-small"].patch_size == 16


class TestInitialLoss:
    def test_untrained_cross_entropy_is_uniform(self):
        # Zero-initialized head: exactly ln(vocab) per token, well within
        # the 5% sanity band.
        for vocab in (114, 334):
            model = tiny_model(vocab=vocab)
            imgs = torch.randn(4, 3, 96, 96)
            tokens = torch.randint(3, vocab, (4, 30))
            logits = model(imgs, tokens)
            loss = torch.nn.functional.cross_entropy(
                logits.reshape(-1, vocab), tokens.reshape(-1)
            )
            expected = uniform_cross_entropy(vocab)
            assert abs(float(loss) - expected) / expected < 0.05
            assert expected == pytest.approx(math.log(vocab))


class TestGreedyDecode:
    def test_starts_with_bos_and_terminates(self):
        model = tiny_model()
        out = model.greedy_decode(torch.randn(2, 3, 96, 96))
        for row in out:
            assert row[0] == BOS
            assert len(row) <= 48
            if EOS in row:
                assert row.index(EOS) == len(row) - 1

    def test_batch_rows_independent(self):
        model = tiny_model()
        imgs = torch.randn(3, 3, 96, 96)
        solo = [model.greedy_decode(imgs[k : k + 1])[0] for k in range(3)]
        batched = model.greedy_decode(imgs)
        assert solo == batched
