"""Regenerate tests/data/fsim_golden.json and the regression pairs.

Needs ``torch`` and ``piq`` (not package dependencies).  piq is a port of
the reference MATLAB FSIM; it uses slightly different YIQ coefficients, so
scores are stored twice: raw piq, and piq with the MATLAB coefficients
patched in ("aligned").  Only pairs with a downsampling factor <= 2 are
used, where piq's average pooling coincides with the MATLAB box filter.

    python tools/make_fsim_golden.py
"""
import importlib
import json
from pathlib import Path

import numpy as np
import piq
import torch

from sigmadelta2d.corpus import corpus_dir
from sigmadelta2d.halftone import HalftoneConfig, halftone_image, read_image, write_image

# piq/__init__ re-exports the function under the module's name
piq_fsim = importlib.import_module("piq.fsim")

ROOT = Path(__file__).resolve().parents[1]
OUT = ROOT / "tests" / "data"

MATLAB_YIQ = torch.tensor([[0.299, 0.587, 0.114],
                           [0.596, -0.274, -0.322],
                           [0.211, -0.523, 0.312]], dtype=torch.float64)


def _matlab_rgb2yiq(x):
    w = MATLAB_YIQ.to(dtype=x.dtype).t()
    return torch.matmul(x.permute(0, 2, 3, 1), w).permute(0, 3, 1, 2)


def _tensor(img):
    t = torch.tensor(np.asarray(img, dtype=np.float64))
    return t.permute(2, 0, 1)[None] if t.ndim == 3 else t[None, None]


def _scores(ref, dist):
    x, y = _tensor(ref), _tensor(dist)
    out = {}
    for tag, fn in (("raw", piq.functional.rgb2yiq), ("aligned", _matlab_rgb2yiq)):
        piq_fsim.rgb2yiq = fn
        # with chromatic=False piq scores the YIQ luma, as the reference does
        out[f"fsim_{tag}"] = piq.fsim(x, y, data_range=255.0, chromatic=False).item()
        if x.shape[1] == 3:
            out[f"fsimc_{tag}"] = piq.fsim(x, y, data_range=255.0, chromatic=True).item()
    piq_fsim.rgb2yiq = piq.functional.rgb2yiq
    if x.shape[1] == 3:
        out["fsimc_reference"] = _fsimc_real_chroma(x, y)
    return out


def _fsimc_real_chroma(x, y):
    """FSIMc from piq's building blocks, pooled with the MATLAB ``real((SI.*SQ).^0.03)``.

    piq takes ``abs`` before the power, which differs wherever the chroma
    similarity is negative (common for saturated halftone pixels).
    """
    k = max(1, round(min(x.shape[-2:]) / 256))
    x = torch.nn.functional.avg_pool2d(x, k)
    y = torch.nn.functional.avg_pool2d(y, k)
    xy, yy = _matlab_rgb2yiq(x), _matlab_rgb2yiq(y)
    filters = piq_fsim._construct_filters(xy[:, :1])
    pc_x = piq_fsim._phase_congruency(xy[:, :1], filters=filters, scales=4, orientations=4, k=2.0)
    pc_y = piq_fsim._phase_congruency(yy[:, :1], filters=filters, scales=4, orientations=4, k=2.0)
    sch = piq.functional.scharr_filter(dtype=x.dtype)
    kernels = torch.stack([sch, sch.transpose(-1, -2)])
    g_x = piq.functional.gradient_map(xy[:, :1], kernels)
    g_y = piq.functional.gradient_map(yy[:, :1], kernels)
    sim = piq.functional.similarity_map
    pc_max = torch.maximum(pc_x, pc_y)
    chroma = sim(xy[:, 1:2], yy[:, 1:2], 200) * sim(xy[:, 2:], yy[:, 2:], 200)
    chroma = torch.real(chroma.to(torch.complex128) ** 0.03)
    score = sim(pc_x, pc_y, 0.85) * sim(g_x, g_y, 160) * chroma * pc_max
    return (score.sum() / pc_max.sum()).item()


def test_pattern(n=64):
    y, x = np.mgrid[0:n, 0:n]
    img = 40 + 2.0 * x
    img = np.where((x - 40) ** 2 + (y - 22) ** 2 < 120, 220.0, img)
    img = np.where((y > 44) & ((x // 6 + y // 6) % 2 == 0), 30.0, img)
    return np.clip(img, 0, 255).astype(np.uint8)


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    corpus = corpus_dir()
    rng = np.random.default_rng(2024)
    pairs = []

    specs = [("astronaut", "F-S"), ("chelsea", "2nd-SD"), ("camera", "1st-A")]
    for image, scheme in specs:
        ref = read_image(corpus / f"{image}.png")
        dist = halftone_image(ref, HalftoneConfig(scheme, seed=0)).image
        name = f"{image}_{scheme}.png"
        write_image(dist, OUT / name)
        pairs.append({"ref": f"corpus:{image}.png", "dist": name} | _scores(ref, dist))

    ref = read_image(corpus / "coffee.png")
    noisy = np.clip(ref + rng.normal(0, 15, ref.shape), 0, 255).round().astype(np.uint8)
    write_image(noisy, OUT / "coffee_noise15.png")
    pairs.append({"ref": "corpus:coffee.png", "dist": "coffee_noise15.png"} | _scores(ref, noisy))

    pat = test_pattern()
    write_image(pat, OUT / "pattern64.png")
    x = _tensor(pat)
    filters = piq_fsim._construct_filters(x)
    pc = piq_fsim._phase_congruency(x, filters=filters, scales=4, orientations=4, k=2.0)
    kernels = torch.stack([piq.functional.scharr_filter(dtype=x.dtype),
                           piq.functional.scharr_filter(dtype=x.dtype).transpose(-1, -2)])
    grad = piq.functional.gradient_map(x, kernels)
    np.savez_compressed(OUT / "pattern64_maps.npz", pc=pc[0, 0].numpy(), grad=grad[0, 0].numpy())

    meta = {"oracle": f"piq {piq.__version__}", "pairs": pairs,
            "maps": {"image": "pattern64.png", "arrays": "pattern64_maps.npz"}}
    (OUT / "fsim_golden.json").write_text(json.dumps(meta, indent=2) + "\n")
    for p in pairs:
        print(p)


if __name__ == "__main__":
    main()
