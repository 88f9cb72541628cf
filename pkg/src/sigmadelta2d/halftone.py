"""Digital halftoning with weighted Sigma-Delta schemes."""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Union

import numpy as np
from PIL import Image

from .quantizer import InitPolicy, QuantizationResult, quantize_grid
from .schemes import SchemeSpec, get_scheme

SHIFT = 1.15
SD_STABILITY_CONSTANT = 0.999


class ImageFormatError(ValueError):
    pass


def read_image(path: Union[str, Path]) -> np.ndarray:
    """Load an 8-bit image as ``(H, W)`` for grayscale or ``(H, W, 3)`` for colour."""
    with Image.open(path) as im:
        if im.mode in ("L", "1", "P") and not _palette_is_colour(im):
            return np.asarray(im.convert("L"), dtype=np.uint8)
        if im.mode in ("I;16", "I", "F"):
            raise ImageFormatError(f"{path}: only 8-bit images are supported (mode {im.mode})")
        return np.asarray(im.convert("RGB"), dtype=np.uint8)


def _palette_is_colour(im) -> bool:
    if im.mode != "P":
        return False
    rgb = np.asarray(im.convert("RGB"))
    return not (np.array_equal(rgb[..., 0], rgb[..., 1]) and np.array_equal(rgb[..., 1], rgb[..., 2]))


def write_image(img: np.ndarray, path: Union[str, Path], fmt: Optional[str] = None) -> None:
    img = np.asarray(img)
    if img.dtype != np.uint8:
        raise ImageFormatError("expected uint8 samples")
    fmt = (fmt or Path(path).suffix.lstrip(".") or "png").upper()
    if fmt not in ("PNG", "BMP"):
        raise ImageFormatError(f"unsupported output format {fmt!r}")
    Image.fromarray(img).save(path, format=fmt)


def _channels(img: np.ndarray) -> List[np.ndarray]:
    if img.ndim == 2:
        return [img]
    if img.ndim == 3 and img.shape[2] == 3:
        return [img[..., c] for c in range(3)]
    raise ImageFormatError(f"expected (H, W) or (H, W, 3) image, got shape {img.shape}")


def to_signal(img, C: float = 1.0) -> List[np.ndarray]:
    """Per channel: ``clip(2 p/255 - 1.15, -1, 1) * C``."""
    img = np.asarray(img)
    if not 0 < C <= 1:
        raise ValueError(f"stability constant must lie in (0, 1], got {C}")
    if img.dtype != np.uint8:
        raise ImageFormatError("expected uint8 samples")
    return [np.clip(2.0 * (ch.astype(np.float64) / 255.0) - SHIFT, -1.0, 1.0) * C
            for ch in _channels(img)]


def default_stability_constant(scheme_name: str) -> float:
    return SD_STABILITY_CONSTANT if scheme_name == "2nd-SD" else 1.0


@dataclass
class HalftoneConfig:
    scheme: Union[str, SchemeSpec] = "2nd-SD"
    stability_constant: Optional[float] = None  # None picks the per-scheme default
    seed: int = 0
    init: str = "uniform"  # or "zero"
    workers: int = 1

    def resolved_constant(self) -> float:
        if self.stability_constant is not None:
            return float(self.stability_constant)
        return default_stability_constant(get_scheme(self.scheme).name)


@dataclass
class HalftoneResult:
    image: np.ndarray  # uint8, same shape as the input, values in {0, 255}
    reports: List[QuantizationResult] = field(default_factory=list)

    @property
    def overflow(self) -> bool:
        return any(r.overflow for r in self.reports)

    @property
    def max_abs_state(self) -> float:
        return max(r.max_abs_state for r in self.reports)


def halftone_image(img, cfg: Optional[HalftoneConfig] = None) -> HalftoneResult:
    """Quantize every channel independently; channel ``c`` uses seed ``cfg.seed + c``."""
    cfg = cfg or HalftoneConfig()
    scheme = get_scheme(cfg.scheme)
    img = np.asarray(img)
    if img.size == 0:
        raise ImageFormatError("zero-sized image")
    signals = to_signal(img, cfg.resolved_constant())

    def run(c):
        init = InitPolicy.uniform(cfg.seed + c) if cfg.init == "uniform" else InitPolicy.zero()
        return quantize_grid(signals[c], scheme, init)

    if cfg.workers > 1 and len(signals) > 1:
        with ThreadPoolExecutor(min(cfg.workers, len(signals))) as pool:
            reports = list(pool.map(run, range(len(signals))))
    else:
        reports = [run(c) for c in range(len(signals))]

    planes = [np.where(r.bits > 0, 255, 0).astype(np.uint8) for r in reports]
    out = planes[0] if img.ndim == 2 else np.stack(planes, axis=-1)
    return HalftoneResult(out, reports)


def white_fraction(img) -> float:
    return float(np.mean(np.asarray(img) == 255))
