"""Smoke tests for the Python bindings against numpy references."""

import math
import os
import tempfile

import numpy as np
import pytest

import mppa


def test_fft_matches_numpy():
    rng = np.random.default_rng(7)
    for n in (8, 16, 64):
        x = rng.standard_normal(n)
        re, im = mppa.fft_forward(list(x), [0.0] * n)
        want = np.fft.fft(x)
        np.testing.assert_allclose(re, want.real, atol=1e-9)
        np.testing.assert_allclose(im, want.imag, atol=1e-9)


def test_softmax_matches_numpy():
    rng = np.random.default_rng(8)
    scores = rng.standard_normal((5, 9))
    got = mppa.softmax_rows(scores)
    e = np.exp(scores - scores.max(axis=1, keepdims=True))
    want = e / e.sum(axis=1, keepdims=True)
    np.testing.assert_allclose(got, want, atol=1e-12)
    np.testing.assert_allclose(got.sum(axis=1), 1.0, atol=1e-12)


def test_causal_attention_is_causal():
    rng = np.random.default_rng(9)
    h = rng.standard_normal((12, 8))
    full = mppa.causal_attention(h, heads=2, seed=3)
    part = mppa.causal_attention(h[:7], heads=2, seed=3)
    np.testing.assert_array_equal(full[:7], part)


def test_energy_encode_identity_and_scaling():
    rng = np.random.default_rng(10)
    h = rng.standard_normal((40, 4))
    np.testing.assert_array_equal(mppa.energy_encode(h, 0.0, 8), h)
    out = mppa.energy_encode(h, 1.0, 8)
    # first two chunks untouched, later chunks scaled per chunk
    np.testing.assert_array_equal(out[:16], h[:16])
    ratios = out[16:] / h[16:]
    for start in range(16, 40, 8):
        chunk = out[start:start + 8] / h[start:start + 8]
        assert np.allclose(chunk, chunk.flat[0])
        assert chunk.flat[0] > 1.0  # compensation factor is exp(positive)
    assert ratios.shape == (24, 4)


def test_periodicity_encode_identity():
    rng = np.random.default_rng(11)
    h = rng.standard_normal((24, 4))
    np.testing.assert_array_equal(mppa.periodicity_encode(h, 8), h)
    modulated = mppa.periodicity_encode(h, 8, seed=5, weight_scale=0.3)
    np.testing.assert_array_equal(modulated[:8], h[:8])  # first chunk identity
    assert not np.array_equal(modulated[8:], h[8:])


def test_simulate_harmonic_period():
    times, states = mppa.simulate(
        "harmonic", [1.0, 0.0], dt=1e-3, steps=1000, omega=2 * math.pi
    )
    assert len(states) == 1001
    assert abs(states[-1][0] - 1.0) < 1e-6
    assert abs(states[-1][1]) < 1e-6


def test_tokenize_shape_and_alphabet():
    _, states = mppa.simulate("harmonic", [0.5, 0.0], dt=0.05, steps=100, omega=1.5)
    tokens = mppa.tokenize(states, seq_len=64)
    assert len(tokens) == 64
    assert tokens[0] == 62  # beginning-of-sequence id for 62 bins
    assert all(0 <= t <= 63 for t in tokens)


def test_model_logits_loss_and_decode():
    model = mppa.Model(vocab=16, d=8, layers=1, heads=2, chunk_size=4, n_max=32, seed=0)
    tokens = [1, 5, 3, 9, 0, 2]
    logits = model.logits(tokens)
    assert logits.shape == (6, 16)
    loss, ppl = model.loss(tokens)
    assert math.isfinite(loss)
    assert ppl == pytest.approx(math.exp(loss), rel=1e-12)
    assert abs(loss - math.log(16)) < 0.1  # fresh init is near uniform
    decoded = model.decode(tokens, 10)
    assert len(decoded) == 10
    assert decoded[:6] == tokens


def test_model_checkpoint_roundtrip(tmp_path):
    model = mppa.Model(vocab=16, d=8, layers=1, heads=2, chunk_size=4, n_max=32, seed=4)
    path = str(tmp_path / "model.ckpt")
    model.save(path)
    loaded = mppa.Model(path)
    tokens = [3, 1, 4, 1, 5]
    np.testing.assert_array_equal(model.logits(tokens), loaded.logits(tokens))


def test_generate_dataset(tmp_path):
    out = str(tmp_path / "ds.txt")
    mppa.generate_dataset(out, count=4, seed=42)
    lines = open(out).read().splitlines()
    assert len(lines) == 4
    assert os.path.exists(out + ".manifest")
    for line in lines:
        ids = [int(tok) for tok in line.split()]
        assert len(ids) == 64
