"""Bundled natural test images (scikit-image sample data, see ``data/corpus/SOURCES.txt``)."""
from __future__ import annotations

from importlib import resources
from pathlib import Path
from typing import Dict, List

import numpy as np

from .halftone import read_image


def corpus_dir() -> Path:
    return Path(str(resources.files("sigmadelta2d") / "data" / "corpus"))


def corpus_paths() -> List[Path]:
    return sorted(corpus_dir().glob("*.png"))


def load_corpus() -> Dict[str, np.ndarray]:
    return {p.stem: read_image(p) for p in corpus_paths()}


def grayscale_view(img: np.ndarray) -> np.ndarray:
    """8-bit luma (YIQ ``Y``) for RGB images, unchanged for grayscale ones."""
    if img.ndim == 2:
        return img
    y = 0.299 * img[..., 0] + 0.587 * img[..., 1] + 0.114 * img[..., 2]
    return np.clip(np.rint(y), 0, 255).astype(np.uint8)
