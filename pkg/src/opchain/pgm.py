"""Binary (P5) PGM reading and writing, 8-bit only."""
from __future__ import annotations

import os

import numpy as np

from .errors import DatasetError


def _tokens(data: bytes, count: int) -> tuple[list[bytes], int]:
    # Header tokens are separated by whitespace; '#' starts a comment that
    # runs to end of line.  Exactly one whitespace byte precedes the raster.
    tokens, pos, n = [], 0, len(data)
    while len(tokens) < count:
        while pos < n and data[pos:pos + 1].isspace():
            pos += 1
        if pos < n and data[pos:pos + 1] == b"#":
            while pos < n and data[pos:pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < n and not data[pos:pos + 1].isspace() and data[pos:pos + 1] != b"#":
            pos += 1
        if start == pos:
            raise ValueError("truncated header")
        tokens.append(data[start:pos])
    if pos >= n or not data[pos:pos + 1].isspace():
        raise ValueError("missing whitespace after header")
    return tokens, pos + 1


def read_pgm(path) -> np.ndarray:
    """Read an 8-bit P5 PGM as a ``uint8`` array of shape (height, width)."""
    with open(path, "rb") as f:
        data = f.read()
    name = os.fspath(path)
    try:
        (magic, w, h, maxval), offset = _tokens(data, 4)
        if magic != b"P5":
            raise ValueError(f"not a binary PGM (magic {magic!r}, expected b'P5')")
        width, height, maxval = int(w), int(h), int(maxval)
    except ValueError as e:
        raise DatasetError(f"{name}: malformed PGM: {e}") from None
    if maxval != 255:
        raise DatasetError(f"{name}: unsupported maxval {maxval}, only 8-bit PGM (maxval 255) is accepted")
    if width < 1 or height < 1:
        raise DatasetError(f"{name}: invalid dimensions {width}x{height}")
    raster = data[offset:offset + width * height]
    if len(raster) != width * height:
        raise DatasetError(f"{name}: expected {width * height} pixel bytes, found {len(raster)}")
    return np.frombuffer(raster, dtype=np.uint8).reshape(height, width).copy()


def write_pgm(path, pixels) -> None:
    """Write a 2-D uint8 array (or bool array, as 0/255) as P5 PGM."""
    arr = np.asarray(pixels)
    if arr.dtype == bool:
        arr = arr.astype(np.uint8) * 255
    if arr.ndim != 2 or arr.dtype != np.uint8:
        raise ValueError(f"expected a 2-D uint8 or bool array, got {arr.dtype} {arr.shape}")
    h, w = arr.shape
    with open(path, "wb") as f:
        f.write(b"P5\n%d %d\n255\n" % (w, h))
        f.write(np.ascontiguousarray(arr).tobytes())


def to_gray(pixels: np.ndarray) -> np.ndarray:
    return np.asarray(pixels, dtype=float) / 255.0


def from_gray(img: np.ndarray) -> np.ndarray:
    return np.round(np.clip(img, 0.0, 1.0) * 255.0).astype(np.uint8)
