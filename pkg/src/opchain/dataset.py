"""Image / ground-truth datasets on disk, and a synthetic dataset generator.

A dataset directory holds pairs ``<id>.pgm`` (the image) and
``<id>.gt.pgm`` (the ground-truth contour map, 255 = contour).
"""
from __future__ import annotations

from pathlib import Path

import numpy as np
from scipy import ndimage

from .errors import DatasetError, InvalidParameterError
from .evaluation import DatasetEntry
from .metrics import build_ground_truth
from .pgm import from_gray, read_pgm, to_gray, write_pgm

GT_SUFFIX = ".gt.pgm"

# Fixed contrast for every generated dataset, so images stay alike.
BACKGROUND = 0.0
SHAPE_LEVELS = (0.45, 0.65, 0.85)
_MARGIN = 4


def load_dataset(path) -> list[DatasetEntry]:
    """Load every image / ground-truth pair in ``path``, sorted by id."""
    root = Path(path)
    if not root.is_dir():
        raise DatasetError(f"{root}: not a directory")
    images, gts = {}, {}
    for f in root.iterdir():
        if f.name.endswith(GT_SUFFIX):
            gts[f.name[:-len(GT_SUFFIX)]] = f
        elif f.suffix == ".pgm" and not f.name.endswith(".result.pgm"):
            images[f.stem] = f
    for orphan in sorted(set(gts) - set(images)):
        raise DatasetError(f"{gts[orphan]}: ground truth without image {orphan}.pgm")
    for missing in sorted(set(images) - set(gts)):
        raise DatasetError(f"{images[missing]}: missing ground truth {missing}{GT_SUFFIX}")
    if not images:
        raise DatasetError(f"{root}: no <id>.pgm / <id>{GT_SUFFIX} pairs found")
    entries = []
    for key in sorted(images):
        img = read_pgm(images[key])
        gt = read_pgm(gts[key])
        if img.shape != gt.shape:
            raise DatasetError(
                f"{gts[key]}: ground truth is {gt.shape[1]}x{gt.shape[0]}, "
                f"image is {img.shape[1]}x{img.shape[0]}")
        entries.append(DatasetEntry(key, to_gray(img), build_ground_truth(gt > 127)))
    return entries


def _random_shape(rng: np.random.Generator, size: int) -> np.ndarray:
    yy, xx = np.mgrid[0:size, 0:size]
    lo, hi = _MARGIN, size - _MARGIN
    if rng.random() < 0.5:
        h, w = rng.integers(size // 6, size // 3 + 1, size=2)
        top = rng.integers(lo, hi - h + 1)
        left = rng.integers(lo, hi - w + 1)
        return (yy >= top) & (yy < top + h) & (xx >= left) & (xx < left + w)
    r = int(rng.integers(max(size // 10, 3), size // 5 + 1))
    cy, cx = rng.integers(lo + r, hi - r, size=2)
    return (yy - cy) ** 2 + (xx - cx) ** 2 <= r * r


def synthesize(rng: np.random.Generator, size: int = 64, shapes: int = 2,
               noise_sigma: float = 0.05) -> tuple[np.ndarray, np.ndarray]:
    """One (gray image, contour ground truth) pair.

    ``shapes`` non-overlapping filled rectangles or discs, each at its own
    gray level, on a black background with additive Gaussian noise.  The
    ground truth is the inner one-pixel boundary of every shape.
    """
    masks = []
    for _ in range(1000):
        if len(masks) == shapes:
            break
        m = _random_shape(rng, size)
        grown = ndimage.binary_dilation(m, iterations=_MARGIN)
        if not any((grown & other).any() for other in masks):
            masks.append(m)
    if len(masks) < shapes:
        raise InvalidParameterError(f"could not place {shapes} separated shapes in a {size}x{size} image")
    levels = rng.permutation(SHAPE_LEVELS)[:shapes]
    clean = np.full((size, size), BACKGROUND)
    gt = np.zeros((size, size), dtype=bool)
    four = ndimage.generate_binary_structure(2, 1)
    for m, level in zip(masks, levels):
        clean[m] = level
        gt |= m & ~ndimage.binary_erosion(m, structure=four)
    noisy = clean + rng.normal(0.0, noise_sigma, clean.shape) if noise_sigma > 0 else clean
    return np.clip(noisy, 0.0, 1.0), gt


def generate_synthetic_dataset(path, count: int = 10, size: int = 64, noise_sigma: float = 0.05,
                               seed: int = 0, shapes: int = 2) -> list[str]:
    """Write ``count`` image / ground-truth pairs to ``path``; returns their ids."""
    if count < 1:
        raise InvalidParameterError(f"count must be >= 1, got {count}")
    if size < 32:
        raise InvalidParameterError(f"size must be >= 32, got {size}")
    if not 1 <= shapes <= len(SHAPE_LEVELS):
        raise InvalidParameterError(f"shapes must be in 1..{len(SHAPE_LEVELS)}, got {shapes}")
    if noise_sigma < 0:
        raise InvalidParameterError(f"noise_sigma must be >= 0, got {noise_sigma}")
    root = Path(path)
    root.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    ids = []
    width = max(3, len(str(count - 1)))
    for i in range(count):
        key = f"img{i:0{width}d}"
        img, gt = synthesize(rng, size, shapes, noise_sigma)
        write_pgm(root / f"{key}.pgm", from_gray(img))
        write_pgm(root / f"{key}{GT_SUFFIX}", gt)
        ids.append(key)
    return ids
