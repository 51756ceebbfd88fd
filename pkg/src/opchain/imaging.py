"""Pixel operators used to build segmentation chains.

Gray images are 2-D ``float64`` arrays with intensities in [0, 1]; binary
images are 2-D ``bool`` arrays (True = contour / white pixel).  Every
operator is a pure function and returns a new array of the input's shape.

Windowed filters (median, order statistic, Wiener) read out-of-bounds
window cells as 0.  Edge detection replicates the border instead, otherwise
the padding itself would produce a frame of edges around every image.
"""
from __future__ import annotations

import enum
import math
from typing import Callable, NamedTuple

import numpy as np
from scipy import ndimage

from .chains import ActionSpec, ChainSpec, check_arity
from .errors import ContractError, InvalidParameterError


class EdgeMethod(str, enum.Enum):
    SOBEL = "sobel"
    PREWITT = "prewitt"
    ZEROCROSS = "zerocross"
    LOG = "log"


class Connectivity(enum.IntEnum):
    FOUR = 4
    EIGHT = 8


LOG_SIGMA = 2.0
# Filter responses below this magnitude are treated as exact zeros so that
# round-off on flat regions cannot produce spurious edges.
_ZERO_EPS = 1e-10

_SOBEL_X = np.array([[-1, 0, 1], [-2, 0, 2], [-1, 0, 1]], dtype=float)
_PREWITT_X = np.array([[-1, 0, 1], [-1, 0, 1], [-1, 0, 1]], dtype=float)
_LAPLACIAN = np.array([[0, 1, 0], [1, -4, 1], [0, 1, 0]], dtype=float)

_STRUCTURES = {
    Connectivity.FOUR: ndimage.generate_binary_structure(2, 1),
    Connectivity.EIGHT: ndimage.generate_binary_structure(2, 2),
}


def as_gray(img) -> np.ndarray:
    """Validate and convert to a float gray image in [0, 1]."""
    arr = np.asarray(img, dtype=float)
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise InvalidParameterError(f"gray image must be 2-D and non-empty, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)) or arr.min() < 0.0 or arr.max() > 1.0:
        raise InvalidParameterError("gray intensities must lie in [0, 1]")
    return arr


def as_binary(img) -> np.ndarray:
    arr = np.asarray(img)
    if arr.ndim != 2:
        raise InvalidParameterError(f"binary image must be 2-D, got shape {arr.shape}")
    return arr.astype(bool)


def _check_size(size) -> int:
    if int(size) != size or size < 3 or size % 2 == 0:
        raise InvalidParameterError(f"window size must be an odd integer >= 3, got {size!r}")
    return int(size)


def median_filter(img, size: int) -> np.ndarray:
    """Median over a ``size`` x ``size`` zero-padded window."""
    size = _check_size(size)
    return ndimage.median_filter(as_gray(img), size=size, mode="constant", cval=0.0)


def order_statistic_filter(img, size: int, order: int) -> np.ndarray:
    """``order``-th smallest value (1-based) of each zero-padded window."""
    size = _check_size(size)
    if int(order) != order or not 1 <= order <= size * size:
        raise InvalidParameterError(f"order must be in 1..{size * size}, got {order!r}")
    return ndimage.rank_filter(as_gray(img), rank=int(order) - 1, size=size,
                               mode="constant", cval=0.0)


def wiener_filter(img, size: int) -> np.ndarray:
    """Adaptive local Wiener filter.

    The noise power is estimated as the mean of all local variances, and
    each pixel is pulled toward its local mean by the gain
    ``max(var - noise, 0) / max(var, noise)``.
    """
    size = _check_size(size)
    x = as_gray(img)
    mean = ndimage.uniform_filter(x, size=size, mode="constant", cval=0.0)
    sq = ndimage.uniform_filter(x * x, size=size, mode="constant", cval=0.0)
    var = np.maximum(sq - mean * mean, 0.0)
    noise = var.mean()
    denom = np.maximum(var, noise)
    gain = np.divide(np.maximum(var - noise, 0.0), denom,
                     out=np.zeros_like(var), where=denom > 0)
    return np.clip(mean + gain * (x - mean), 0.0, 1.0)


def gradient(img, method: EdgeMethod | str) -> tuple[np.ndarray, np.ndarray]:
    """Column and row derivatives with the Sobel or Prewitt 3x3 kernels."""
    method = EdgeMethod(method)
    kx = {EdgeMethod.SOBEL: _SOBEL_X, EdgeMethod.PREWITT: _PREWITT_X}[method]
    x = np.asarray(img, dtype=float)
    gx = ndimage.correlate(x, kx, mode="nearest")
    gy = ndimage.correlate(x, kx.T, mode="nearest")
    return gx, gy


def _non_max_suppression(mag, gx, gy) -> np.ndarray:
    # Keep a pixel when it is strictly above its neighbour against the
    # gradient and not below its neighbour along it; plateaus two pixels
    # wide (ideal steps) thin to the first pixel.
    h, w = mag.shape
    padded = np.pad(mag, 1, constant_values=0.0)
    angle = np.rad2deg(np.arctan2(gy, gx)) % 180.0
    sector = (np.floor((angle + 22.5) / 45.0).astype(int)) % 4
    # (drow, dcol) of the neighbour along the gradient, per sector
    steps = [(0, 1), (1, 1), (1, 0), (1, -1)]
    keep = np.zeros_like(mag, dtype=bool)
    for k, (dr, dc) in enumerate(steps):
        nxt = padded[1 + dr:1 + dr + h, 1 + dc:1 + dc + w]
        prv = padded[1 - dr:1 - dr + h, 1 - dc:1 - dc + w]
        sel = sector == k
        keep[sel] = (mag[sel] > prv[sel]) & (mag[sel] >= nxt[sel])
    return keep


def log_kernel(sigma: float = LOG_SIGMA) -> np.ndarray:
    """Zero-sum Laplacian-of-Gaussian kernel of side ``2*ceil(3*sigma)+1``."""
    half = math.ceil(3 * sigma)
    r = np.arange(-half, half + 1, dtype=float)
    xx, yy = np.meshgrid(r, r)
    rr = xx ** 2 + yy ** 2
    g = np.exp(-rr / (2 * sigma ** 2))
    k = g * (rr - 2 * sigma ** 2) / (sigma ** 4 * g.sum())
    return k - k.mean()


def _zero_crossings(resp: np.ndarray, threshold: float) -> np.ndarray:
    resp = np.where(np.abs(resp) < _ZERO_EPS, 0.0, resp)
    peak = np.abs(resp).max()
    out = np.zeros(resp.shape, dtype=bool)
    if peak == 0.0:
        return out
    cutoff = threshold * peak
    for axis in (0, 1):
        a = resp[:-1, :] if axis == 0 else resp[:, :-1]
        b = resp[1:, :] if axis == 0 else resp[:, 1:]
        hit = (a * b < 0) & (np.abs(a - b) >= cutoff)
        first = hit & (np.abs(a) <= np.abs(b))
        second = hit & ~first
        if axis == 0:
            out[:-1, :] |= first
            out[1:, :] |= second
        else:
            out[:, :-1] |= first
            out[:, 1:] |= second
    return out


def detect_edges(img, method: EdgeMethod | str, threshold: float) -> np.ndarray:
    """Binary edge map.

    Sobel / Prewitt: gradient magnitude normalized by its maximum,
    thresholded, then thinned by non-maximum suppression.  LoG / zerocross:
    zero crossings of the LoG (sigma 2) or 3x3 Laplacian response whose
    slope reaches ``threshold`` times the largest absolute response.
    """
    if threshold < 0:
        raise InvalidParameterError(f"threshold must be >= 0, got {threshold}")
    method = EdgeMethod(method)
    x = as_gray(img)
    if method in (EdgeMethod.SOBEL, EdgeMethod.PREWITT):
        gx, gy = gradient(x, method)
        mag = np.hypot(gx, gy)
        mag[mag < _ZERO_EPS] = 0.0
        peak = mag.max()
        if peak == 0.0:
            return np.zeros(x.shape, dtype=bool)
        strong = (mag > 0) & (mag / peak >= threshold)
        return strong & _non_max_suppression(mag, gx, gy)
    kernel = log_kernel() if method is EdgeMethod.LOG else _LAPLACIAN
    return _zero_crossings(ndimage.correlate(x, kernel, mode="nearest"), threshold)


class Components(NamedTuple):
    labels: np.ndarray      # 0 = background, 1..count
    count: int
    sizes: np.ndarray       # sizes[i] = pixel count of label i + 1


def connected_components(binary, conn: Connectivity | int = Connectivity.EIGHT) -> Components:
    b = as_binary(binary)
    labels, count = ndimage.label(b, structure=_STRUCTURES[Connectivity(conn)])
    sizes = np.bincount(labels.ravel(), minlength=count + 1)[1:]
    return Components(labels, int(count), sizes)


def remove_small_objects(binary, min_size: int, conn: Connectivity | int = Connectivity.EIGHT) -> np.ndarray:
    """Drop every connected component with fewer than ``min_size`` pixels."""
    if min_size < 0:
        raise InvalidParameterError(f"min_size must be >= 0, got {min_size}")
    b = as_binary(binary)
    if min_size == 0:
        return b.copy()
    comps = connected_components(b, conn)
    keep = np.concatenate(([False], comps.sizes >= min_size))
    return keep[comps.labels]


# Operator registry: id -> (phase kind, callable taking (image, *values), parameter names).
# Kinds: "pre" gray->gray, "process" gray->binary, "post" binary->binary.


def _ordfilt2(img, size):
    # only the window size is tuned; rank is fixed at size**2 (max filter)
    size = _check_size(size)
    return order_statistic_filter(img, size, size * size)


OPERATORS: dict[str, tuple[str, Callable, tuple[str, ...]]] = {
    "medfilt2": ("pre", median_filter, ("size",)),
    "ordfilt2": ("pre", _ordfilt2, ("size",)),
    "wiener2": ("pre", wiener_filter, ("size",)),
    "edge": ("process", detect_edges, ("method", "threshold")),
    "bwareaopen": ("post", remove_small_objects, ("min_size", "connectivity")),
}

_ACCEPTS = {"pre": "gray", "process": "gray", "post": "binary"}
_PRODUCES = {"pre": "gray", "process": "binary", "post": "binary"}


def operator_kind(op_id: str) -> str:
    try:
        return OPERATORS[op_id][0]
    except KeyError:
        raise InvalidParameterError(f"unknown operator {op_id!r}; known: {sorted(OPERATORS)}") from None


def apply_operator(op_id: str, img, values) -> np.ndarray:
    return OPERATORS[op_id][1](img, *values)


def check_chain(chain: ChainSpec) -> None:
    """Raise unless the chain's operators type-check gray -> ... -> binary."""
    kind = "gray"
    for op in chain.operators:
        op_kind = operator_kind(op.op_id)
        if _ACCEPTS[op_kind] != kind:
            raise ContractError(f"{op.op_id} expects a {_ACCEPTS[op_kind]} image, got {kind}")
        if op.param_names != OPERATORS[op.op_id][2]:
            raise ContractError(f"{op.op_id} takes parameters {OPERATORS[op.op_id][2]}, "
                                f"got {op.param_names}")
        kind = _PRODUCES[op_kind]
    if kind != "binary":
        raise ContractError(f"chain {chain.name} does not end in a binary image")


def apply_chain(img, chain: ChainSpec, action: ActionSpec) -> np.ndarray:
    """Run every operator of ``chain`` in order with the values in ``action``."""
    check_chain(chain)
    check_arity(chain, action)
    current = as_gray(img)
    for op, values in zip(chain.operators, action.values):
        current = apply_operator(op.op_id, current, values)
    return current
