"""End-to-end acceptance checks.

Each test records a PASS/FAIL line in ``conftest.ACCEPTANCE`` (printed in
the terminal summary) and then asserts, so a failing criterion shows up both
in the summary and as a normal test failure.
"""
import json
import math
import os

import numpy as np
import pytest

import conftest
from oracles import brute_force_min, sigma_delta_1d
from sigmadelta2d.bandlimited import (
    DEFAULT_LAMBDAS,
    LatticeSpec,
    approximation_error,
    decay_experiment,
    quantization_error,
)
from sigmadelta2d.corpus import corpus_dir, grayscale_view, load_corpus
from sigmadelta2d.filters import (
    filter_constant,
    finite_difference_filter,
    first_order_filter,
    make_sparse_second_order,
    validate_moments,
)
from sigmadelta2d.halftone import SHIFT, HalftoneConfig, halftone_image, read_image, white_fraction
from sigmadelta2d.metrics import fsim, fsimc
from sigmadelta2d.optimize import design_matrix, first_order_directions, optimize_first_order
from sigmadelta2d.quantizer import InitPolicy, quantize_grid
from sigmadelta2d.schemes import (
    FIRST_ORDER_NAMES,
    SECOND_ORDER_NAMES,
    builtin_schemes,
    make_scheme,
    stability_margin,
    weight_constant,
)


def record(n, ok, detail):
    conftest.ACCEPTANCE[n] = (bool(ok), detail)
    print(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}")
    assert ok, detail


def test_criterion_01_sparse_filter_family():
    bad = []
    for k in (2, 3, 4, 550):
        h = make_sparse_second_order(k)
        if not validate_moments(h, 2) or abs(h.l1_norm - (1 + 2 / k)) > 1e-12:
            bad.append(k)
    record(1, not bad, f"kappa in 2,3,4,550; failing: {bad or 'none'}")


def test_criterion_02_finite_difference_constants():
    got = {r: filter_constant(finite_difference_filter(r), r) for r in range(1, 5)}
    ok = all(abs(v) == math.factorial(r) for r, v in got.items())
    record(2, ok, "|C| = " + ", ".join(f"{abs(v):g}" for v in got.values()))


def test_criterion_03_first_order_constants():
    s = builtin_schemes()
    expect = {"1st-RbR": 1.0, "F-S": math.sqrt(106) / 16, "S-Fan": math.sqrt(65) / 16,
              "1st-A": 1 / math.sqrt(2)}
    dev = {k: abs(weight_constant(s[k]) - v) for k, v in expect.items()}
    record(3, max(dev.values()) <= 1e-12, f"max deviation {max(dev.values()):.1e}")


def test_criterion_04_closed_form_vs_brute_force():
    # the grid optimum can only be >= the true one; the closed form must never
    # be worse than the grid, and the grid argmin must sit next to it
    gaps, two_sided, arg_dev = [], [], []
    for s in range(5):
        dirs = first_order_directions(1, s, 1)
        a = design_matrix(dirs, [1.0] * len(dirs), 1)
        best, w_grid = brute_force_min(a, step=1e-3)
        scheme, c = optimize_first_order(1, s, 1)
        w = {(e.direction.i, e.direction.j): e.weight for e in scheme.entries}
        w_cf = np.array([w.get((d.i, d.j), 0.0) for d in dirs])
        gaps.append(c * c - best)
        two_sided.append(abs(c * c - best))
        arg_dev.append(float(np.abs(a @ (w_grid - w_cf)).max()))
    s4, c4 = optimize_first_order(1, 4, 1)
    w4 = sorted(e.weight for e in s4.entries)
    exact = (abs(w4[0] - 5 / 26) < 1e-15 and abs(w4[1] - 21 / 26) < 1e-15
             and abs(c4 - 1 / math.sqrt(26)) < 1e-15)
    ok = max(gaps) <= 1e-6 and max(arg_dev) <= 2e-3 and exact
    record(4, ok, f"closed - grid <= {max(gaps):.1e}; |gap| <= {max(two_sided):.1e} "
                  f"(grid step); |A dw| <= {max(arg_dev):.1e}; s=4 exact: {exact}")


def _fuzz_grid(k, amp, shape=(256, 256)):
    rng = np.random.default_rng(k)
    kind = k % 4
    if kind == 0:
        return rng.uniform(-amp, amp, shape)
    if kind == 1:
        return amp * rng.choice([-1.0, 1.0], shape)
    if kind == 2:
        return np.full(shape, amp * (1 if k % 8 == 2 else -1))
    # mostly extreme values with uniform patches
    y = amp * rng.choice([-1.0, 1.0], shape)
    m = rng.random(shape) < 0.3
    y[m] = rng.uniform(-amp, amp, int(m.sum()))
    return y


def test_criterion_05_stability_fuzz():
    cases = [(name, stability_margin(s) - 1e-6) for name, s in builtin_schemes().items()]
    cases.append(("2nd-SD", 0.96))
    violations, worst = [], 0.0
    for name, amp in cases:
        for k in range(200):
            res = quantize_grid(_fuzz_grid(k, amp), name, InitPolicy.uniform(k))
            worst = max(worst, res.max_abs_state)
            if res.max_abs_state > 1.0:
                violations.append((name, round(amp, 6), k))
    record(5, not violations,
           f"{len(cases)} cases x 200 grids, max|v| = {worst:.8f}, violations {len(violations)}"
           + (f" first {violations[:3]}" if violations else ""))


def test_criterion_06_one_dimensional_reduction():
    s = make_scheme("rows", [(0, 1, 1.0, first_order_filter())])
    rng = np.random.default_rng(6)
    y = rng.uniform(-1, 1, (50, 300))
    bits = quantize_grid(y, s).bits
    mismatched = sum(list(bits[r]) != sigma_delta_1d(y[r]) for r in range(50))
    record(6, mismatched == 0, f"{mismatched} of 50 rows differ")


@pytest.mark.slow
def test_criterion_07_error_decay():
    names = FIRST_ORDER_NAMES + ("S-Fan-12",) + SECOND_ORDER_NAMES
    report = decay_experiment(names, DEFAULT_LAMBDAS, workers=os.cpu_count() or 1)
    slopes = report.slopes
    bad = []
    for n in names:
        lo, hi = (-2.6, -1.6) if n in SECOND_ORDER_NAMES else (-1.5, -0.7)
        if not lo <= slopes[n] <= hi:
            bad.append(f"{n} {slopes[n]:.3f} not in [{lo}, {hi}]")
    detail = " ".join(f"{n}={slopes[n]:.2f}" for n in names)
    record(7, not bad, detail + ("; out of band: " + "; ".join(bad) if bad else ""))


@pytest.mark.slow
def test_criterion_08_spot_values():
    spec = LatticeSpec(150)
    got = {"approx": approximation_error(spec)}
    for n in ("1st-RbR", "1st-A", "Opt-4"):
        got[n] = quantization_error(n, 150)
    ref = {"approx": 4.848e-3, "1st-RbR": 2.251e-2, "1st-A": 1.293e-2, "Opt-4": 4.663e-3}
    within = all(0.5 <= got[k] / ref[k] <= 2.0 for k in ref)
    order = got["Opt-4"] < got["1st-A"] < got["1st-RbR"]
    record(8, within and order, " ".join(f"{k}={got[k]:.3e}" for k in ref) + f" ordering {order}")


def test_criterion_09_gray_mean_preservation():
    worst, where = 0.0, None
    for g in (32, 64, 128, 192, 224):
        target = (min(1.0, max(-1.0, 2 * g / 255 - SHIFT)) + 1) / 2
        chart = np.full((512, 512), g, dtype=np.uint8)
        for n in FIRST_ORDER_NAMES:
            dev = abs(white_fraction(halftone_image(chart, HalftoneConfig(n)).image) - target)
            if dev > worst:
                worst, where = dev, (n, g)
    record(9, worst <= 5e-3, f"worst white-fraction deviation {worst:.2e} at {where}")


@pytest.fixture(scope="module")
def corpus():
    return load_corpus()


def test_criterion_10_second_order_sd_on_corpus(corpus):
    flagged, worst = [], 0.0
    for name, img in corpus.items():
        assert max(img.shape[:2]) <= 1920 and min(img.shape[:2]) <= 1280
        res = halftone_image(img, HalftoneConfig("2nd-SD", stability_constant=0.999))
        worst = max(worst, res.max_abs_state)
        if res.overflow:
            flagged.append(name)
    ok = len(corpus) >= 10 and not flagged
    record(10, ok, f"{len(corpus)} images, max|v| = {worst:.8f}, flagged {flagged or 'none'}")


def test_criterion_11_fsim_reference(data_dir, corpus):
    golden = json.loads((data_dir / "fsim_golden.json").read_text())
    img = corpus["astronaut"]
    dist = read_image(data_dir / "astronaut_F-S.png")
    ident = max(abs(fsim(img, img).score - 1), abs(fsimc(img, img).score - 1))
    sym = max(abs(fsim(img, dist).score - fsim(dist, img).score),
              abs(fsimc(img, dist).score - fsimc(dist, img).score))
    devs = []
    for p in golden["pairs"]:
        ref = corpus[p["ref"].split(":", 1)[1].rsplit(".", 1)[0]]
        d = read_image(data_dir / p["dist"])
        devs.append(abs(fsim(ref, d).score - p["fsim_aligned"]))
        if "fsimc_reference" in p:
            devs.append(abs(fsimc(ref, d).score - p["fsimc_reference"]))
    ok = ident <= 1e-9 and sym <= 1e-9 and max(devs) <= 5e-4 and len(golden["pairs"]) >= 3
    record(11, ok, f"identity {ident:.1e}, symmetry {sym:.1e}, "
                   f"{len(devs)} golden scores max dev {max(devs):.1e}")


ORDER = ("2nd-SD", "S-Fan-12", "1st-A", "F-S", "1st-RbR")


@pytest.mark.slow
def test_criterion_12_corpus_ordering(corpus):
    gray = {n: [] for n in ORDER}
    colour = {n: [] for n in ORDER}
    for img in corpus.values():
        g = grayscale_view(img)
        for n in ORDER:
            gray[n].append(fsim(g, halftone_image(g, HalftoneConfig(n)).image).score)
            if img.ndim == 3:
                colour[n].append(fsimc(img, halftone_image(img, HalftoneConfig(n)).image).score)
    mg = {n: float(np.mean(v)) for n, v in gray.items()}
    mc = {n: float(np.mean(v)) for n, v in colour.items()}
    ordered = lambda m: all(m[a] > m[b] for a, b in zip(ORDER, ORDER[1:]))
    wins = float(np.mean(np.array(gray["2nd-SD"]) > np.array(gray["1st-A"])))
    ok = ordered(mg) and ordered(mc) and wins >= 0.8
    fmt = lambda m: " ".join(f"{n}={m[n]:.4f}" for n in ORDER)
    record(12, ok, f"gray[{fmt(mg)}] ordered={ordered(mg)}; rgb[{fmt(mc)}] ordered={ordered(mc)}; "
                   f"2nd-SD beats 1st-A on {wins:.0%} of {len(gray['1st-A'])} images")
