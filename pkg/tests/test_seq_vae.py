"""Sequence VAE: loss terms, training, sampling, variations, projections."""

import numpy as np
import pytest

from choreo import tensor as T
from choreo.data import center_and_scale, make_sequence_windows, rotate_augment
from choreo.pose_ae import AeTrainConfig, PoseAutoencoder, train_pose_autoencoder
from choreo.rng import split_rng
from choreo.seq_vae import (
    SequenceVae,
    VaeTrainConfig,
    VariationRequest,
    project_to_pose_space,
    train_seq_vae,
    vae_loss,
    vary_from_request,
)
from choreo.synth import SynthConfig, generate_synthetic
from choreo.tensor import Adam, GradientTape, ShapeError
from choreo.training import iter_batches


def tiny_vae(**kwargs):
    defaults = dict(seq_len=16, latent_dim=8, lstm_units=(32, 32), dense_units=16,
                    kl_weight=1e-4, mse_scale=1e4, seed=2)
    defaults.update(kwargs)
    return SequenceVae(**defaults)


@pytest.fixture(scope="module")
def norm_ds():
    raw = generate_synthetic(SynthConfig(frames=800), 41)
    norm, _ = center_and_scale(raw)
    return norm


@pytest.fixture(scope="module")
def trained(norm_ds):
    model = tiny_vae()
    report = train_seq_vae(model, norm_ds,
                           VaeTrainConfig(epochs=100, batch_size=10, lr=2e-3,
                                          seed=5, stride=16))
    return model, report


class TestEncodeDecode:
    def test_encode_deterministic(self, norm_ds):
        model = tiny_vae(seed=7)
        seq = norm_ds.frames[:16]
        m1, lv1 = model.encode(seq)
        m2, lv2 = model.encode(seq)
        np.testing.assert_array_equal(m1, m2)
        np.testing.assert_array_equal(lv1, lv2)

    def test_logvar_finite_on_zero_input(self):
        model = tiny_vae(seed=8)
        _, logvar = model.encode(np.zeros((16, 159)))
        assert np.all(np.isfinite(logvar))

    def test_decode_shape(self, trained):
        model, _ = trained
        out = model.decode(np.zeros(8))
        assert out.shape == (16, 159)

    def test_decode_deterministic(self, trained):
        model, _ = trained
        z = np.linspace(-1, 1, 8)
        np.testing.assert_array_equal(model.decode(z), model.decode(z))

    def test_dimension_mismatch_rejected(self, trained):
        model, _ = trained
        with pytest.raises(ShapeError):
            model.decode(np.zeros(9))
        with pytest.raises(ShapeError):
            model.encode(np.zeros((15, 159)))

    def test_distinct_sequences_distinct_means(self, trained, norm_ds):
        model, _ = trained
        m1, _ = model.encode(norm_ds.frames[:16])
        m2, _ = model.encode(norm_ds.frames[100:116])
        assert np.linalg.norm(m1 - m2) > 0

    def test_trained_reconstruction_mse(self, trained, norm_ds):
        model, _ = trained
        seq = norm_ds.frames[:16].reshape(16, 159)
        mean, _ = model.encode(seq)
        recon = model.decode(mean)
        assert ((recon - seq) ** 2).mean() < 0.05

    def test_reparameterization_statistics(self):
        """Empirical mean/variance of z draws match (mean, exp(logvar))."""
        model = tiny_vae()
        rng = np.random.default_rng(3)
        mean = np.linspace(0.5, 2.0, 8)
        logvar = np.linspace(-1.0, 1.0, 8)
        draws = np.stack([model.reparameterize(mean, logvar, rng)
                          for _ in range(100_000)])
        emp_mean = draws.mean(axis=0)
        emp_var = draws.var(axis=0)
        assert np.all(np.abs(emp_mean - mean) / np.abs(mean) < 0.02)
        assert np.all(np.abs(emp_var - np.exp(logvar)) / np.exp(logvar) < 0.02)


class TestLoss:
    def test_kl_zero_for_standard_posterior(self):
        model = tiny_vae(seed=9)
        # force heads to emit exactly mean=0, logvar=0
        for _, p in model.mean_head.named_params():
            p.data[...] = 0.0
        for _, p in model.logvar_head.named_params():
            p.data[...] = 0.0
        batch = np.random.default_rng(0).uniform(0, 1, size=(2, 16, 159))
        _, _, kl = vae_loss(model, batch)
        assert kl.item() == 0.0

    def test_kl_closed_form_unit_mean(self):
        model = tiny_vae(seed=10)
        for _, p in model.mean_head.named_params():
            p.data[...] = 0.0
        for _, p in model.logvar_head.named_params():
            p.data[...] = 0.0
        model.mean_head.b.data[...] = 1.0  # mean = 1 on all 8 axes
        batch = np.random.default_rng(1).uniform(0, 1, size=(2, 16, 159))
        _, _, kl = vae_loss(model, batch)
        np.testing.assert_allclose(kl.item(), 0.5 * 8, atol=1e-12)

    def test_kl_weight_zero_reduces_to_scaled_mse(self, norm_ds):
        model = tiny_vae(kl_weight=0.0, seed=11)
        batch = norm_ds.frames[:32].reshape(2, 16, 159)
        total, mse, _ = vae_loss(model, batch)
        assert total.item() == model.mse_scale * mse.item()

    def test_kl_always_nonnegative(self, norm_ds):
        rng = np.random.default_rng(4)
        for seed in range(5):
            model = tiny_vae(seed=seed)
            batch = norm_ds.frames[rng.integers(0, 700):][:32].reshape(2, 16, 159)
            _, _, kl = vae_loss(model, batch)
            assert kl.item() >= 0.0

    def test_gradient_check_micro(self):
        """End-to-end loss gradient on a micro instance vs finite differences."""
        model = SequenceVae(seq_len=3, latent_dim=4, lstm_units=(6,), dense_units=5,
                            frame_dim=5, kl_weight=0.5, mse_scale=2.0, seed=12)
        rng = np.random.default_rng(5)
        batch = rng.uniform(0, 1, size=(2, 3, 5))
        eps = rng.standard_normal((2, 4))

        def loss_fn():
            total, _, _ = vae_loss(model, batch, eps)
            return total

        result = T.gradient_check(loss_fn, dict(model.named_params()))
        assert result.max_rel_error < 1e-4


class TestTraining:
    def test_mse_reduced_5x(self, trained):
        _, report = trained
        first = report.epochs[0].extra["train_mse"]
        last = report.epochs[-1].extra["train_mse"]
        assert first / last >= 5.0
        assert not report.aborted

    def test_kl_positive_at_convergence(self, trained):
        _, report = trained
        assert report.epochs[-1].extra["train_kl"] > 0.0

    def test_seeded_rerun_identical(self, norm_ds):
        def run():
            model = tiny_vae(seed=13)
            rep = train_seq_vae(model, norm_ds,
                                VaeTrainConfig(epochs=2, batch_size=10, lr=1e-3,
                                               seed=13, stride=16))
            return [e.train_loss for e in rep.epochs]
        assert run() == run()

    def test_deterministic_latent_equals_plain_autoencoder(self, norm_ds):
        """With sampling off and zero KL weight, training dynamics match an
        independently written deterministic sequence-autoencoder loop."""
        cfg = VaeTrainConfig(epochs=3, batch_size=10, lr=1e-3, seed=14,
                             stride=16, rotation_augment=False, sample_latent=False)
        vae = tiny_vae(kl_weight=0.0, seed=14)
        report = train_seq_vae(vae, norm_ds, cfg)
        vae_curve = [e.train_loss for e in report.epochs[1:]]

        # manual loop: same init, split, batching and update rule, no VAE terms
        model = tiny_vae(kl_weight=0.0, seed=14)
        seqs = make_sequence_windows(norm_ds, 16, 16)
        cut = max(1, int(round(seqs.shape[0] * 0.8)))
        flat = seqs.reshape(seqs.shape[0], 16, -1)
        train_flat = flat[:cut]
        opt = Adam([p for _, p in model.named_params()], lr=cfg.lr)
        batch_rng = split_rng(cfg.seed, "seq_vae.batches")

        def seq_ae_loss(batch):
            mean, _ = model._encode_t(batch)
            outs = model._decode_t(mean)
            sq = None
            for t, out in enumerate(outs):
                diff = out - batch[:, t, :]
                term = (diff * diff).sum()
                sq = term if sq is None else sq + term
            mse = sq * (1.0 / (batch.shape[0] * 16 * 159))
            return model.mse_scale * mse

        manual_curve = []
        for _ in range(cfg.epochs):
            for idx in iter_batches(train_flat.shape[0], cfg.batch_size, batch_rng):
                opt.zero_grad()
                with GradientTape() as tape:
                    loss = seq_ae_loss(train_flat[idx])
                tape.backward(loss)
                opt.step()
            total = 0.0
            for start in range(0, train_flat.shape[0], 64):
                chunk = train_flat[start:start + 64]
                total += seq_ae_loss(chunk).item() * chunk.shape[0]
            manual_curve.append(total / train_flat.shape[0])

        np.testing.assert_allclose(vae_curve, manual_curve, atol=1e-9)

    def test_rotation_soft_equivariance(self, trained, norm_ds):
        """Reconstruction error on a held-out sequence and a rotated copy
        stay within 50% of each other after rotation-augmented training."""
        model, _ = trained
        seq = norm_ds.frames[700:716]
        rot = rotate_augment(seq[None], np.random.default_rng(15))[0]

        def recon_err(s):
            flat = s.reshape(16, 159)
            mean, _ = model.encode(flat)
            return ((model.decode(mean) - flat) ** 2).mean()

        a, b = recon_err(seq), recon_err(rot)
        assert abs(a - b) / max(a, b) < 0.5


class TestSampling:
    def test_radius_zero_decodes_origin(self, trained):
        model, _ = trained
        a = model.sample_unconditional(np.random.default_rng(0), radius=0.0)
        b = model.sample_unconditional(np.random.default_rng(42), radius=0.0)
        np.testing.assert_array_equal(a, b)
        np.testing.assert_array_equal(a, model.decode(np.zeros(8)))

    def test_different_seeds_differ(self, trained):
        model, _ = trained
        a = model.sample_unconditional(np.random.default_rng(1))
        b = model.sample_unconditional(np.random.default_rng(2))
        assert np.abs(a - b).max() > 0

    def test_samples_near_unit_cube(self, trained):
        model, _ = trained
        rng = np.random.default_rng(3)
        for _ in range(10):
            seq = model.sample_unconditional(rng)
            inside = (seq > -0.5) & (seq < 1.5)
            assert inside.mean() >= 0.99


class TestVary:
    def test_zero_noise_exact_reconstructions(self, trained, norm_ds):
        model, _ = trained
        base = norm_ds.frames[:16]
        mean, _ = model.encode(base)
        recon = model.decode(mean)
        outs = model.vary(base, 0.0, 3, np.random.default_rng(0))
        for out in outs:
            np.testing.assert_array_equal(out, recon)

    def test_deviation_nondecreasing_in_noise(self, trained, norm_ds):
        model, _ = trained
        base = norm_ds.frames[:16]
        mean, _ = model.encode(base)
        recon = model.decode(mean)
        devs = []
        for k in (0.0, 0.5, 1.0, 2.0, 4.0):
            outs = model.vary(base, k, 20, np.random.default_rng(7))
            devs.append(np.mean([np.abs(o - recon).mean() for o in outs]))
        assert all(a <= b + 1e-12 for a, b in zip(devs, devs[1:]))

    def test_fixed_seed_reproducible(self, trained, norm_ds):
        model, _ = trained
        req = VariationRequest(base=norm_ds.frames[:16], noise_scale=1.0,
                               count=4, seed=99)
        a = vary_from_request(model, req)
        b = vary_from_request(model, req)
        for x, y in zip(a, b):
            np.testing.assert_array_equal(x, y)


@pytest.fixture(scope="module")
def pose2d(norm_ds):
    model = PoseAutoencoder(latent_dim=2, seed=20)
    train_pose_autoencoder(model, norm_ds,
                           AeTrainConfig(epochs=10, batch_size=64, lr=3e-3, seed=20))
    return model


class TestProjection:
    def test_zero_noise_identical_trajectories(self, trained, pose2d, norm_ds):
        model, _ = trained
        base = norm_ds.frames[:16]
        mean, _ = model.encode(base)
        recon = model.decode(mean)
        variation = model.vary(base, 0.0, 1, np.random.default_rng(0))[0]
        a = project_to_pose_space(pose2d, recon)
        b = project_to_pose_space(pose2d, variation)
        np.testing.assert_array_equal(a.points, b.points)

    def test_trajectory_length(self, trained, pose2d):
        model, _ = trained
        seq = model.sample_unconditional(np.random.default_rng(5))
        traj = project_to_pose_space(pose2d, seq)
        assert traj.points.shape == (16, 2)

    def test_small_noise_trajectory_distance_below_large(self, trained, pose2d, norm_ds):
        model, _ = trained
        base = norm_ds.frames[:16]
        mean, _ = model.encode(base)
        base_traj = project_to_pose_space(pose2d, model.decode(mean)).points

        def mean_distance(k):
            outs = model.vary(base, k, 20, np.random.default_rng(11))
            ds = [np.linalg.norm(project_to_pose_space(pose2d, o).points - base_traj,
                                 axis=1).mean() for o in outs]
            return np.mean(ds)

        small, large = mean_distance(0.5), mean_distance(4.0)
        assert 0.0 < small < large
