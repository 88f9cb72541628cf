import json

import numpy as np
import pytest

from sigmadelta2d.corpus import corpus_dir, corpus_paths, grayscale_view, load_corpus
from sigmadelta2d.halftone import read_image
from sigmadelta2d.metrics import (
    FsimConfig,
    box_downsample,
    downsample_factor,
    fsim,
    fsimc,
    gradient_magnitude,
    phase_congruency,
    rgb_to_yiq,
)


@pytest.fixture(scope="module")
def golden(data_dir):
    return json.loads((data_dir / "fsim_golden.json").read_text())


@pytest.fixture(scope="module")
def astronaut():
    return read_image(corpus_dir() / "astronaut.png")


def _load_pair(data_dir, p):
    ref = read_image(corpus_dir() / p["ref"].split(":", 1)[1])
    return ref, read_image(data_dir / p["dist"])


def test_golden_has_three_pairs(golden):
    assert len(golden["pairs"]) >= 3
    assert sum("fsimc_reference" in p for p in golden["pairs"]) >= 3


def test_golden_fsim(golden, data_dir):
    for p in golden["pairs"]:
        ref, dist = _load_pair(data_dir, p)
        assert abs(fsim(ref, dist).score - p["fsim_aligned"]) <= 5e-4, p["dist"]


def test_golden_fsimc(golden, data_dir):
    for p in golden["pairs"]:
        if "fsimc_reference" not in p:
            continue
        ref, dist = _load_pair(data_dir, p)
        assert abs(fsimc(ref, dist).score - p["fsimc_reference"]) <= 5e-4, p["dist"]


def test_golden_maps(data_dir):
    maps = np.load(data_dir / "pattern64_maps.npz")
    img = read_image(data_dir / "pattern64.png")
    assert np.abs(phase_congruency(img) - maps["pc"]).max() <= 1e-3
    assert np.abs(gradient_magnitude(img) - maps["grad"]).max() <= 1e-6


def test_identity_exact(astronaut):
    assert fsim(astronaut, astronaut).score == 1.0
    assert fsimc(astronaut, astronaut).score == 1.0


def test_symmetry(astronaut):
    rng = np.random.default_rng(0)
    noisy = np.clip(astronaut + rng.normal(0, 20, astronaut.shape), 0, 255).astype(np.uint8)
    assert abs(fsim(astronaut, noisy).score - fsim(noisy, astronaut).score) <= 1e-9
    assert abs(fsimc(astronaut, noisy).score - fsimc(noisy, astronaut).score) <= 1e-9


def test_noise_monotone():
    img = grayscale_view(read_image(corpus_dir() / "camera.png"))
    means = []
    for sigma in (5, 15, 40):
        vals = []
        for seed in range(3):
            rng = np.random.default_rng(seed)
            noisy = np.clip(img + rng.normal(0, sigma, img.shape), 0, 255).astype(np.uint8)
            vals.append(fsim(img, noisy).score)
        means.append(np.mean(vals))
    assert means[0] > means[1] > means[2]


def test_shift_robustness():
    img = read_image(corpus_dir() / "camera.png")
    rng = np.random.default_rng(3)
    dist = np.clip(img + rng.normal(0, 12, img.shape), 0, 255).astype(np.uint8)
    base = fsim(img, dist).score
    for axis in (0, 1):
        moved = fsim(np.roll(img, 1, axis=axis), np.roll(dist, 1, axis=axis)).score
        assert abs(moved - base) < 0.02


def test_range(astronaut):
    rng = np.random.default_rng(1)
    other = rng.integers(0, 256, astronaut.shape, dtype=np.uint8)
    s = fsim(astronaut, other).score
    assert 0 < s <= 1


def test_fsimc_reduces_to_fsim_for_gray_triplets():
    g = read_image(corpus_dir() / "coins.png")
    rng = np.random.default_rng(2)
    d = np.clip(g + rng.normal(0, 10, g.shape), 0, 255).astype(np.uint8)
    rgb = lambda x: np.repeat(x[..., None], 3, axis=2)
    assert fsimc(rgb(g), rgb(d)).score == pytest.approx(fsim(g, d).score, abs=1e-9)


def test_constant_images():
    flat = np.full((64, 64), 90.0)
    assert np.abs(phase_congruency(flat)).max() == 0.0
    assert np.abs(gradient_magnitude(flat)[1:-1, 1:-1]).max() == 0.0
    assert fsim(flat, flat).score == 1.0


def test_edge_ridge():
    img = np.zeros((64, 64))
    img[:, 32:] = 200.0
    profile = phase_congruency(img).mean(axis=0)
    # FFT filtering is periodic, so columns 0/63 form a second edge
    assert set(np.argsort(profile)[-4:]) == {0, 31, 32, 63}
    assert profile[31] > 3 * profile.min()


def test_ramp_gradient():
    img = np.tile(np.arange(40, dtype=float), (40, 1))
    g = gradient_magnitude(img)
    assert np.allclose(g[1:-1, 1:-1], 2.0)


def test_errors():
    with pytest.raises(ValueError):
        phase_congruency(np.zeros((20, 64)))
    with pytest.raises(ValueError):
        fsim(np.zeros((64, 64)), np.zeros((64, 65)))
    with pytest.raises(ValueError):
        fsimc(np.zeros((64, 64)), np.zeros((64, 64)))
    with pytest.raises(ValueError):
        FsimConfig(scales=0)


def test_downsample_factor():
    assert downsample_factor((300, 451)) == 1
    assert downsample_factor((384, 600)) == 2
    assert downsample_factor((640, 640)) == 3  # 2.5 rounds away from zero
    assert downsample_factor((872, 1000)) == 3


def test_box_downsample_matches_matlab_centering():
    x = np.arange(36, dtype=float).reshape(6, 6)
    # 3x3 mean, zero padded, centred; first sample sees the padded corner
    out = box_downsample(x, 3)
    assert out.shape == (2, 2)
    assert out[0, 0] == pytest.approx(x[:2, :2].sum() / 9)
    assert out[1, 1] == pytest.approx(x[2:5, 2:5].mean())
    # even factor: MATLAB's 'same' centring puts the window at [i, i+1]
    out2 = box_downsample(x, 2)
    assert out2[0, 0] == pytest.approx(x[:2, :2].mean())


def test_yiq_gray_has_no_chroma():
    y, i, q = rgb_to_yiq(np.full((2, 2, 3), 100.0))
    assert np.allclose(y, 100.0) and np.allclose(i, 0, atol=1e-12) and np.allclose(q, 0, atol=1e-12)


def test_corpus_bundle():
    paths = corpus_paths()
    assert len(paths) >= 10
    imgs = load_corpus()
    for img in imgs.values():
        h, w = img.shape[:2]
        assert max(h, w) <= 1920 and min(h, w) <= 1280
    assert sum(img.ndim == 3 for img in imgs.values()) >= 3
