"""FSIM and FSIMc image quality indices.

Follows the reference MATLAB release (``FeatureSIM.m`` with ``phasecong2``):
YIQ conversion, box-filter downsampling, log-Gabor phase congruency with
noise compensation and Scharr gradients.  Pixel values stay in 0..255.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import fft as sfft
from scipy.signal import convolve2d

MIN_PC_SIZE = 32

SCHARR_X = np.array([[3.0, 0.0, -3.0], [10.0, 0.0, -10.0], [3.0, 0.0, -3.0]]) / 16.0
SCHARR_Y = SCHARR_X.T.copy()


@dataclass(frozen=True)
class FsimConfig:
    scales: int = 4
    orientations: int = 4
    min_wavelength: float = 6.0
    mult: float = 2.0
    sigma_on_f: float = 0.55
    d_theta_on_sigma: float = 1.2
    noise_k: float = 2.0
    epsilon: float = 1e-4
    T1: float = 0.85
    T2: float = 160.0
    T3: float = 200.0
    T4: float = 200.0
    chroma_exponent: float = 0.03
    downsample: Optional[int] = None  # None picks max(1, round(min(H, W) / 256))

    def __post_init__(self):
        if self.scales < 1 or self.orientations < 1:
            raise ValueError("need at least one scale and one orientation")
        for name in ("min_wavelength", "mult", "sigma_on_f", "d_theta_on_sigma",
                     "T1", "T2", "T3", "T4", "chroma_exponent"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.downsample is not None and self.downsample < 1:
            raise ValueError("downsample factor must be >= 1")


DEFAULT_CONFIG = FsimConfig()


@dataclass
class QualityReport:
    score: float
    pc_ref: Optional[np.ndarray] = field(default=None, repr=False)
    pc_dist: Optional[np.ndarray] = field(default=None, repr=False)
    grad_ref: Optional[np.ndarray] = field(default=None, repr=False)
    grad_dist: Optional[np.ndarray] = field(default=None, repr=False)

    def __float__(self):
        return self.score


def _freq_axis(n: int) -> np.ndarray:
    # normalised to +-0.5, matching the reference's odd/even handling
    if n % 2:
        return np.arange(-(n - 1) / 2, (n - 1) / 2 + 1) / (n - 1)
    return np.arange(-n / 2, n / 2) / n


def _polar_grid(rows: int, cols: int):
    x, y = np.meshgrid(_freq_axis(cols), _freq_axis(rows))
    radius = np.fft.ifftshift(np.sqrt(x**2 + y**2))
    theta = np.fft.ifftshift(np.arctan2(-y, x))
    return radius, theta


def lowpass_filter(rows: int, cols: int, cutoff: float = 0.45, n: int = 15) -> np.ndarray:
    """Butterworth low-pass, zero frequency at the corner."""
    x, y = np.meshgrid(_freq_axis(cols), _freq_axis(rows))
    radius = np.sqrt(x**2 + y**2)
    return np.fft.ifftshift(1.0 / (1.0 + (radius / cutoff) ** (2 * n)))


def phase_congruency(img, cfg: FsimConfig = DEFAULT_CONFIG) -> np.ndarray:
    """Phase congruency map of a single-channel image (values in [0, 1])."""
    im = np.asarray(img, dtype=np.float64)
    if im.ndim != 2:
        raise ValueError(f"expected a single-channel image, got shape {im.shape}")
    rows, cols = im.shape
    if rows < MIN_PC_SIZE or cols < MIN_PC_SIZE:
        raise ValueError(f"image {rows}x{cols} too small for the filter bank "
                         f"(need >= {MIN_PC_SIZE}x{MIN_PC_SIZE})")

    nscale, norient = cfg.scales, cfg.orientations
    theta_sigma = np.pi / norient / cfg.d_theta_on_sigma
    imagefft = sfft.fft2(im)

    radius, theta = _polar_grid(rows, cols)
    radius[0, 0] = 1.0
    sintheta, costheta = np.sin(theta), np.cos(theta)

    lp = lowpass_filter(rows, cols, 0.45, 15)
    log_gabor = []
    for s in range(nscale):
        fo = 1.0 / (cfg.min_wavelength * cfg.mult**s)
        lg = np.exp(-(np.log(radius / fo)) ** 2 / (2 * np.log(cfg.sigma_on_f) ** 2)) * lp
        lg[0, 0] = 0.0
        log_gabor.append(lg)

    energy_all = np.zeros((rows, cols))
    an_all = np.zeros((rows, cols))
    for o in range(norient):
        angl = o * np.pi / norient
        ds = sintheta * np.cos(angl) - costheta * np.sin(angl)
        dc = costheta * np.cos(angl) + sintheta * np.sin(angl)
        spread = np.exp(-np.arctan2(ds, dc) ** 2 / (2 * theta_sigma**2))

        sum_e = np.zeros((rows, cols))
        sum_o = np.zeros((rows, cols))
        sum_an = np.zeros((rows, cols))
        eo_all, ifft_filters = [], []
        em_n = 0.0
        for s in range(nscale):
            filt = log_gabor[s] * spread
            ifft_filters.append(np.real(sfft.ifft2(filt)) * np.sqrt(rows * cols))
            eo = sfft.ifft2(imagefft * filt)
            eo_all.append(eo)
            sum_an += np.abs(eo)
            sum_e += eo.real
            sum_o += eo.imag
            if s == 0:
                em_n = float(np.sum(filt**2))

        x_energy = np.sqrt(sum_e**2 + sum_o**2) + cfg.epsilon
        mean_e = sum_e / x_energy
        mean_o = sum_o / x_energy
        energy = np.zeros((rows, cols))
        for eo in eo_all:
            e, od = eo.real, eo.imag
            energy += e * mean_e + od * mean_o - np.abs(e * mean_o - od * mean_e)

        # noise estimate from the smallest scale
        median_e2n = float(np.median(np.abs(eo_all[0]) ** 2))
        mean_e2n = -median_e2n / np.log(0.5)
        noise_power = mean_e2n / em_n if em_n > 0 else 0.0

        est_sum_an2 = sum(float(np.sum(f**2)) for f in ifft_filters)
        est_sum_aiaj = 0.0
        for si in range(nscale - 1):
            for sj in range(si + 1, nscale):
                est_sum_aiaj += float(np.sum(ifft_filters[si] * ifft_filters[sj]))
        est_noise_energy2 = 2 * noise_power * est_sum_an2 + 4 * noise_power * est_sum_aiaj
        tau = np.sqrt(max(est_noise_energy2, 0.0) / 2)
        thresh = tau * np.sqrt(np.pi / 2) + cfg.noise_k * np.sqrt((2 - np.pi / 2) * tau**2)
        thresh /= 1.7

        energy_all += np.maximum(energy - thresh, 0.0)
        an_all += sum_an

    # flat regions have no amplitude at all; report no congruency there
    return np.divide(energy_all, an_all, out=np.zeros_like(energy_all), where=an_all > 0)


def gradient_magnitude(img) -> np.ndarray:
    """Scharr gradient magnitude with zero padding."""
    im = np.asarray(img, dtype=np.float64)
    gx = convolve2d(im, SCHARR_X, mode="same")
    gy = convolve2d(im, SCHARR_Y, mode="same")
    return np.sqrt(gx**2 + gy**2)


def downsample_factor(shape, cfg: FsimConfig = DEFAULT_CONFIG) -> int:
    if cfg.downsample is not None:
        return cfg.downsample
    # MATLAB round() is half away from zero
    return max(1, int(np.floor(min(shape[:2]) / 256 + 0.5)))


def box_downsample(x, f: int) -> np.ndarray:
    """F x F mean filter (zero padded, MATLAB ``conv2(..., 'same')`` centring), then stride F."""
    x = np.asarray(x, dtype=np.float64)
    if f == 1:
        return x
    full = convolve2d(x, np.full((f, f), 1.0 / f**2), mode="full")
    h, w = x.shape
    o = f // 2
    return full[o:o + h, o:o + w][::f, ::f]


def rgb_to_yiq(img):
    img = np.asarray(img, dtype=np.float64)
    r, g, b = img[..., 0], img[..., 1], img[..., 2]
    y = 0.299 * r + 0.587 * g + 0.114 * b
    i = 0.596 * r - 0.274 * g - 0.322 * b
    q = 0.211 * r - 0.523 * g + 0.312 * b
    return y, i, q


def _similarity(a, b, t):
    # 2*(a*b) keeps the map bitwise symmetric and exactly 1 where a == b
    return (2.0 * (a * b) + t) / (a * a + b * b + t)


def _is_rgb(x) -> bool:
    return x.ndim == 3 and x.shape[2] == 3


def _check_pair(ref, dist):
    ref = np.asarray(ref, dtype=np.float64)
    dist = np.asarray(dist, dtype=np.float64)
    if ref.shape != dist.shape:
        raise ValueError(f"dimension mismatch: {ref.shape} vs {dist.shape}")
    if not (ref.ndim == 2 or _is_rgb(ref)):
        raise ValueError(f"expected (H, W) or (H, W, 3) images, got {ref.shape}")
    return ref, dist


def _pool(sim, pcm) -> float:
    denom = float(np.sum(pcm))
    if denom == 0.0:
        return float(np.mean(sim))
    return float(np.sum(sim * pcm) / denom)


def _luminance_terms(y1, y2, cfg):
    pc1, pc2 = phase_congruency(y1, cfg), phase_congruency(y2, cfg)
    g1, g2 = gradient_magnitude(y1), gradient_magnitude(y2)
    s = _similarity(pc1, pc2, cfg.T1) * _similarity(g1, g2, cfg.T2)
    return s, np.maximum(pc1, pc2), (pc1, pc2, g1, g2)


def fsim(ref, dist, cfg: FsimConfig = DEFAULT_CONFIG, keep_maps: bool = False) -> QualityReport:
    """Luminance-only FSIM.  RGB inputs are reduced to the YIQ luma first."""
    ref, dist = _check_pair(ref, dist)
    if ref.ndim == 3:
        ref, dist = rgb_to_yiq(ref)[0], rgb_to_yiq(dist)[0]
    f = downsample_factor(ref.shape, cfg)
    y1, y2 = box_downsample(ref, f), box_downsample(dist, f)
    s, pcm, maps = _luminance_terms(y1, y2, cfg)
    return QualityReport(_pool(s, pcm), *(maps if keep_maps else ()))


def fsimc(ref, dist, cfg: FsimConfig = DEFAULT_CONFIG, keep_maps: bool = False) -> QualityReport:
    """FSIM with the YIQ chrominance term."""
    ref, dist = _check_pair(ref, dist)
    if not _is_rgb(ref):
        raise ValueError("fsimc needs RGB inputs")
    f = downsample_factor(ref.shape, cfg)
    y1, i1, q1 = (box_downsample(c, f) for c in rgb_to_yiq(ref))
    y2, i2, q2 = (box_downsample(c, f) for c in rgb_to_yiq(dist))
    s, pcm, maps = _luminance_terms(y1, y2, cfg)
    chroma = _similarity(i1, i2, cfg.T3) * _similarity(q1, q2, cfg.T4)
    # chroma similarity can dip below zero; the reference keeps the real part
    chroma = np.real(np.power(chroma.astype(np.complex128), cfg.chroma_exponent))
    return QualityReport(_pool(s * chroma, pcm), *(maps if keep_maps else ()))
