import numpy as np
import pytest

from facetok.face_model import MotionSequence, make_synthetic_model
from facetok.vqvae import (
    Codebook,
    GeometryTokenSequence,
    GeometryVqvae,
    VqvaeConfig,
    cycle_finetune,
    quantize,
    roundtrip_consistency,
    sequence_features,
    token_roundtrip,
    train_vqvae,
)

SMALL = VqvaeConfig(expr_dim=4, latent_dim=6, codebook_size=8, hidden=10, seed=0)

def _toy_sequence(rng, length=100, expr_dim=4):
    """Smooth low-dimensional motion without the full lexicon machinery."""
    t = np.linspace(0, 2 * np.pi, length)
    phases = rng.uniform(0, 2 * np.pi, expr_dim)
    amps = rng.uniform(0.2, 1.0, expr_dim)
    expr = amps * np.sin(t[:, None] + phases)
    pose = 0.2 * np.sin(t[:, None] * rng.uniform(0.5, 2.0, 3) + rng.uniform(0, 6, 3))
    return MotionSequence.from_arrays(expr, pose)



@pytest.fixture(scope="module")
def tiny_model():
    return GeometryVqvae(SMALL)


class TestConfig:
    def test_even_kernel_rejected(self):
        with pytest.raises(ValueError, match="odd"):
            VqvaeConfig(kernel_width=4)

    def test_tiny_codebook_rejected(self):
        with pytest.raises(ValueError):
            VqvaeConfig(codebook_size=1)

    def test_nonpositive_beta_rejected(self):
        with pytest.raises(ValueError):
            VqvaeConfig(beta=0.0)


class TestQuantize:
    def test_nearest_by_hand(self):
        cb = Codebook(2, 2)
        cb.entries = np.array([[0.0, 0.0], [1.0, 1.0]], dtype=np.float32)
        z = np.array([[0.1, 0.1], [0.9, 0.8]], dtype=np.float32)
        tokens, q, commit = quantize(z, cb)
        np.testing.assert_array_equal(tokens, [0, 1])
        np.testing.assert_allclose(q, [[0, 0], [1, 1]])
        # commitment = mean squared element of (z - q)
        assert commit == pytest.approx(np.mean((z - q) ** 2), rel=1e-6)

    def test_batched_shape(self):
        cb = Codebook(4, 3)
        z = np.zeros((2, 5, 3), dtype=np.float32)
        tokens, q, _ = quantize(z, cb)
        assert tokens.shape == (2, 5)
        assert q.shape == (2, 5, 3)

    def test_dim_mismatch_rejected(self):
        with pytest.raises(ValueError, match="dim"):
            quantize(np.zeros((3, 5)), Codebook(4, 3))


class TestCodebookEma:
    def test_ema_update_oracle(self):
        cb = Codebook(2, 1)
        cb.entries = np.array([[0.0], [10.0]], dtype=np.float32)
        cb.ema_counts = np.array([1.0, 1.0])
        cb.ema_sums = np.array([[0.0], [10.0]])
        tokens = np.array([0, 0, 1])
        latents = np.array([[2.0], [4.0], [8.0]])
        cb.ema_update(tokens, latents, decay=0.5)
        # counts: 0.5*1 + 0.5*[2,1] = [1.5, 1.0]; sums: 0.5*[0,10] + 0.5*[6,8]
        np.testing.assert_allclose(cb.ema_counts, [1.5, 1.0])
        np.testing.assert_allclose(cb.ema_sums, [[3.0], [9.0]])
        np.testing.assert_allclose(cb.entries, [[2.0], [9.0]])

    def test_unused_code_entry_unchanged_in_value(self):
        cb = Codebook(2, 1)
        cb.entries = np.array([[5.0], [7.0]], dtype=np.float32)
        cb.ema_counts = np.array([3.0, 3.0])
        cb.ema_sums = np.array([[15.0], [21.0]])
        cb.ema_update(np.array([0]), np.array([[5.0]]), decay=0.99)
        # code 1 receives no mass: sums/counts ratio (and thus entry) unchanged
        assert cb.entries[1, 0] == pytest.approx(7.0, rel=1e-6)

    def test_reseed_dead_replaces_starved_codes(self):
        rng = np.random.default_rng(0)
        cb = Codebook(4, 2)
        cb.ema_counts = np.array([10.0, 10.0, 10.0, 0.001])
        cb.ema_sums = rng.standard_normal((4, 2))
        pool = np.full((5, 2), 42.0)
        n = cb.reseed_dead(pool, rng)
        assert n == 1
        np.testing.assert_allclose(cb.entries[3], [42.0, 42.0])

    def test_healthy_codes_not_reseeded(self):
        rng = np.random.default_rng(0)
        cb = Codebook(4, 2)
        cb.ema_counts = np.ones(4)
        before = cb.entries.copy()
        assert cb.reseed_dead(np.zeros((3, 2)), rng) == 0
        np.testing.assert_array_equal(cb.entries, before)


class TestEncoderDecoder:
    def test_shapes(self, tiny_model):
        feats = np.zeros((20, 7), dtype=np.float32)
        z = tiny_model.encode(feats)
        assert z.shape == (20, 6)
        expr, pose = tiny_model.decode(z)
        assert expr.shape == (20, 4) and pose.shape == (20, 3)

    def test_batched_matches_single(self, tiny_model):
        rng = np.random.default_rng(0)
        x = rng.standard_normal((3, 12, 7)).astype(np.float32)
        zb = tiny_model.encode(x)
        for i in range(3):
            np.testing.assert_array_equal(zb[i], tiny_model.encode(x[i]))

    def test_pose_output_bounded(self, tiny_model):
        rng = np.random.default_rng(1)
        _, pose = tiny_model.decode(rng.standard_normal((30, 6)).astype(np.float32) * 50)
        # pi * tanh: float32 tanh saturates to exactly 1, so the bound is closed
        assert np.abs(pose).max() <= np.pi

    def test_too_short_sequence_rejected(self, tiny_model):
        with pytest.raises(ValueError, match="kernel"):
            tiny_model.encode(np.zeros((3, 7), dtype=np.float32))


class TestTokenRoundTrip:
    def test_detokenize_range_checks(self, tiny_model):
        with pytest.raises(ValueError):
            tiny_model.detokenize([0, 99])
        with pytest.raises(ValueError):
            tiny_model.detokenize([])

    def test_token_sequence_one_per_frame(self):
        with pytest.raises(ValueError, match="one token per"):
            GeometryTokenSequence(tokens=[1, 2, 3], source_length=5)

    def test_tokenize_emits_one_token_per_frame(self, tiny_model):
        seq = _toy_sequence(np.random.default_rng(0), length=110)
        toks = tiny_model.tokenize(seq)
        assert len(toks.tokens) == 110
        assert all(0 <= t < 8 for t in toks.tokens)


class TestTraining:
    def test_loss_decreases_and_codebook_initializes(self):
        fm = make_synthetic_model(0, 16, 4)
        rng = np.random.default_rng(0)
        seqs = [_toy_sequence(rng) for _ in range(6)]
        model = GeometryVqvae(SMALL)
        assert not model.codebook.initialized
        trace = train_vqvae(model, fm, seqs, steps=60, batch_size=4, lr=3e-3, seed=0)
        assert model.codebook.initialized
        first = np.mean([t.total for t in trace[:10]])
        last = np.mean([t.total for t in trace[-10:]])
        assert last < 0.5 * first

    def test_training_deterministic(self):
        fm = make_synthetic_model(0, 16, 4)
        seqs = [_toy_sequence(np.random.default_rng(7))]

        def run():
            model = GeometryVqvae(SMALL)
            train_vqvae(model, fm, seqs, steps=10, batch_size=2, lr=1e-3, seed=4)
            return model

        a, b = run(), run()
        np.testing.assert_array_equal(a.codebook.entries, b.codebook.entries)
        for pa, pb in zip(a.parameters(), b.parameters()):
            np.testing.assert_array_equal(pa.data, pb.data)


@pytest.fixture(scope="module")
def trained():
    fm = make_synthetic_model(0, 16, 4)
    rng = np.random.default_rng(3)
    seqs = [_toy_sequence(rng) for _ in range(6)]
    model = GeometryVqvae(SMALL)
    train_vqvae(model, fm, seqs, steps=80, batch_size=4, lr=3e-3, seed=0)
    return model, seqs


class TestCycleFinetune:
    def test_roundtrip_metrics_bounded_and_deterministic(self, trained):
        model, seqs = trained
        rt = token_roundtrip(model, n_sequences=10, seed=5)
        assert 0.0 <= rt <= 1.0
        assert token_roundtrip(model, n_sequences=10, seed=5) == rt
        dc = roundtrip_consistency(model, seqs)
        assert 0.0 <= dc <= 1.0

    def test_codebook_frozen_encoder_carries_adaptation(self, trained):
        model, seqs = trained
        before = {p.name: p.data.copy() for p in model.parameters()}
        entries = model.codebook.entries.copy()
        cycle_finetune(model, seqs, steps=6, batch_size=2, lr=1e-3,
                       decoder_lr=0.0, seed=0)
        np.testing.assert_array_equal(model.codebook.entries, entries)
        # with a zero decoder rate the decoder is exactly frozen
        for p in model.parameters():
            if ".decoder." in p.name:
                np.testing.assert_array_equal(p.data, before[p.name])
        assert any(
            ".encoder." in p.name and not np.array_equal(p.data, before[p.name])
            for p in model.parameters()
        )

    def test_improves_random_token_roundtrip(self):
        fm = make_synthetic_model(0, 16, 4)
        rng = np.random.default_rng(3)
        seqs = [_toy_sequence(rng) for _ in range(6)]
        model = GeometryVqvae(SMALL)
        train_vqvae(model, fm, seqs, steps=80, batch_size=4, lr=3e-3, seed=0)
        before = token_roundtrip(model, n_sequences=20, seed=2)
        trace = cycle_finetune(model, seqs, steps=120, batch_size=4, lr=3e-3, seed=0)
        after = token_roundtrip(model, n_sequences=20, seed=2)
        assert after >= before
        # the random-token half of the objective (odd steps) must improve
        odd = trace[1::2]
        assert np.mean(odd[-10:]) < np.mean(odd[:10])

    def test_deterministic(self, trained):
        _, seqs = trained

        def run():
            fm = make_synthetic_model(0, 16, 4)
            model = GeometryVqvae(SMALL)
            train_vqvae(model, fm, seqs, steps=30, batch_size=4, lr=3e-3, seed=0)
            cycle_finetune(model, seqs, steps=20, batch_size=4, lr=1e-3, seed=9)
            return model

        a, b = run(), run()
        for pa, pb in zip(a.parameters(), b.parameters()):
            np.testing.assert_array_equal(pa.data, pb.data)


def test_sequence_features_layout():
    seq = _toy_sequence(np.random.default_rng(0))
    feats = sequence_features(seq)
    assert feats.shape == (100, 7)
    assert feats.dtype == np.float32
    np.testing.assert_allclose(feats[:, :4], seq.expr_matrix(), atol=1e-6)
    np.testing.assert_allclose(feats[:, 4:], seq.pose_matrix(), atol=1e-6)
