"""Contour segmentation errors, the weighted return and the state features.

A "contour" is one 8-connected component of a binary edge map and its
length is the component's pixel count.  Distances are exact Euclidean
pixel distances to the nearest true pixel.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .errors import ContractError, InvalidParameterError
from .imaging import Connectivity, as_binary, connected_components

DEFAULT_TOL = 2.0
DEFAULT_WEIGHTS = (1 / 3, 1 / 3, 1 / 3)

N_BINS = 8
BIN_WIDTH = 0.25
START_STATE = N_BINS ** 3          # 512
N_STATES = START_STATE + 1


def diagonal(shape) -> float:
    return math.hypot(shape[0], shape[1])


def distance_map(binary) -> np.ndarray:
    """Euclidean distance from each pixel to the nearest true pixel.

    With no true pixel at all every entry is the image diagonal, which
    stands in for "infinitely far".
    """
    b = as_binary(binary)
    if not b.any():
        return np.full(b.shape, diagonal(b.shape))
    return ndimage.distance_transform_edt(~b)


def contour_stats(binary) -> tuple[int, int, int]:
    """(contour count, white pixel count, longest contour length)."""
    comps = connected_components(binary, Connectivity.EIGHT)
    longest = int(comps.sizes.max()) if comps.count else 0
    return comps.count, int(np.count_nonzero(comps.labels)), longest


@dataclass(frozen=True, eq=False)
class GroundTruth:
    edges: np.ndarray
    contour_count: int
    white_pixels: int
    longest_contour: int
    distance_map: np.ndarray

    @property
    def shape(self):
        return self.edges.shape


def build_ground_truth(edges) -> GroundTruth:
    edges = as_binary(edges)
    count, white, longest = contour_stats(edges)
    return GroundTruth(edges, count, white, longest, distance_map(edges))


@dataclass(frozen=True)
class StateFeatures:
    chi1: float     # contours found / reference contours
    chi2: float     # white pixels / reference white pixels
    chi3: float     # longest contour / reference longest contour

    def as_tuple(self):
        return (self.chi1, self.chi2, self.chi3)


@dataclass(frozen=True)
class EvalReport:
    d_over: float
    d_under: float
    d_loc: float
    weights: tuple[float, float, float]
    d_total: float
    reward: float
    features: StateFeatures


def _check_shape(result: np.ndarray, gt: GroundTruth) -> np.ndarray:
    result = as_binary(result)
    if result.shape != gt.shape:
        raise ContractError(f"result shape {result.shape} != ground truth shape {gt.shape}")
    return result


def over_detection_error(result, gt: GroundTruth, tol: float = DEFAULT_TOL) -> float:
    """Fraction of detected pixels farther than ``tol`` from any GT pixel."""
    result = _check_shape(result, gt)
    n = np.count_nonzero(result)
    if n == 0:
        return 0.0
    return np.count_nonzero(gt.distance_map[result] > tol) / n


def under_detection_error(result, gt: GroundTruth, tol: float = DEFAULT_TOL,
                          result_distance=None) -> float:
    """Fraction of GT pixels with no detected pixel within ``tol``."""
    result = _check_shape(result, gt)
    if gt.white_pixels == 0:
        return 0.0
    if not result.any():
        # the diagonal sentinel can sit inside tol on tiny images
        return 1.0
    if result_distance is None:
        result_distance = distance_map(result)
    return np.count_nonzero(result_distance[gt.edges] > tol) / gt.white_pixels


def localization_error(result, gt: GroundTruth) -> float:
    """Mean distance of detected pixels to the GT, as a fraction of the diagonal."""
    result = _check_shape(result, gt)
    if not result.any():
        return 1.0 if gt.white_pixels else 0.0
    diag = diagonal(gt.shape)
    # np.mean of n copies of diag can round above diag
    return min(float(np.mean(np.minimum(gt.distance_map[result], diag)) / diag), 1.0)


def _ratio(value: int, reference: int) -> float:
    # an empty reference counts as a denominator of one: 0/0 -> 1, k/0 -> k
    if reference == 0:
        return 1.0 if value == 0 else float(value)
    return value / reference


def state_features(result, gt: GroundTruth) -> StateFeatures:
    count, white, longest = contour_stats(_check_shape(result, gt))
    return StateFeatures(_ratio(count, gt.contour_count),
                         _ratio(white, gt.white_pixels),
                         _ratio(longest, gt.longest_contour))


def check_weights(weights) -> tuple[float, float, float]:
    w = tuple(float(x) for x in weights)
    if len(w) != 3 or any(not math.isfinite(x) or x < 0 for x in w) or abs(sum(w) - 1.0) > 1e-9:
        raise InvalidParameterError(f"weights must be 3 non-negative values summing to 1, got {weights}")
    return w


def evaluate(result, gt: GroundTruth, weights=DEFAULT_WEIGHTS, tol: float = DEFAULT_TOL) -> EvalReport:
    w = check_weights(weights)
    result = _check_shape(result, gt)
    d1 = over_detection_error(result, gt, tol)
    d2 = under_detection_error(result, gt, tol)
    d3 = localization_error(result, gt)
    total = min(max(w[0] * d1 + w[1] * d2 + w[2] * d3, 0.0), 1.0)
    return EvalReport(d1, d2, d3, w, total, 1.0 - total, state_features(result, gt))


def discretize_state(features: StateFeatures) -> int:
    """Map the three ratios to a state id in 0..511 (base-8 bin encoding)."""
    state = 0
    for chi in features.as_tuple():
        b = min(int(min(max(chi, 0.0), 2.0) / BIN_WIDTH), N_BINS - 1)
        state = state * N_BINS + b
    return state
