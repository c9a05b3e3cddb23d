"""Adaptive sliding-window activity segmentation.

The motion profile is the windowed mean of the summed windowed variances
of the two fused components. A threshold T = p * max(profile) selects the
activity run; p grows geometrically from p_init until the normalized run
length drops strictly inside (t1, t2), then one further growth step is
kept only if it stays inside with a smaller length.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import InvalidValue, NoActivity, SegmentationFailed
from .fusion import PrincipalComponents
from .validation import as_float_1d, as_float_2d

#: Relative floor under which the motion profile counts as "no activity".
_ACTIVITY_EPS = 1e-12


@dataclass(frozen=True)
class SegmentParams:
    var_window: int = 15
    mean_window: int = 8
    t1: float = 0.3
    t2: float = 0.5
    p_init: float = 0.1
    p_growth: float = 1.15
    max_iters: int = 64

    def __post_init__(self):
        if self.var_window < 2:
            raise InvalidValue("var_window must be >= 2")
        if self.mean_window < 1:
            raise InvalidValue("mean_window must be >= 1")
        if not 0.0 < self.t1 < self.t2 < 1.0:
            raise InvalidValue(f"need 0 < t1 < t2 < 1, got ({self.t1}, {self.t2})")
        if not 0.0 < self.p_init < 1.0:
            raise InvalidValue("p_init must be in (0, 1)")
        if self.p_growth <= 1.0:
            raise InvalidValue("p_growth must be > 1")
        if self.max_iters < 1:
            raise InvalidValue("max_iters must be >= 1")


@dataclass(frozen=True)
class Segment:
    """Detected activity interval [start, end) in sample indices."""

    start: int
    end: int
    normalized_length_t: float
    p_used: float
    threshold_T: float

    def __post_init__(self):
        if not 0 <= self.start < self.end:
            raise InvalidValue(f"need 0 <= start < end, got [{self.start}, {self.end})")

    @property
    def length(self) -> int:
        return self.end - self.start


def windowed_variance(x, w: int) -> np.ndarray:
    """Population variance over every length-w window (stride 1)."""
    x = as_float_1d(x, "series")
    if w < 2:
        raise InvalidValue(f"variance window must be >= 2, got {w}")
    if w > x.size:
        raise InvalidValue(f"window {w} exceeds series length {x.size}")
    return sliding_window_view(x, w).var(axis=1)


def windowed_mean(v, w: int) -> np.ndarray:
    """Mean over every length-w window (stride 1)."""
    v = as_float_1d(v, "series")
    if w < 1:
        raise InvalidValue(f"mean window must be >= 1, got {w}")
    if w > v.size:
        raise InvalidValue(f"window {w} exceeds series length {v.size}")
    return sliding_window_view(v, w).mean(axis=1)


def _longest_run(mask: np.ndarray) -> tuple[int, int]:
    """Bounds [start, end) of the longest contiguous True run (first on ties)."""
    if not np.any(mask):
        return 0, 0
    padded = np.concatenate([[0], mask.astype(np.int8), [0]])
    edges = np.diff(padded)
    starts = np.nonzero(edges == 1)[0]
    ends = np.nonzero(edges == -1)[0]
    best = int(np.argmax(ends - starts))
    return int(starts[best]), int(ends[best])


def motion_profile(series, params: SegmentParams) -> np.ndarray:
    """Windowed mean of the summed per-component windowed variances."""
    series = as_float_2d(series, "component series")
    if series.shape[0] < params.var_window + params.mean_window:
        raise InvalidValue(
            f"series length {series.shape[0]} is shorter than "
            f"var_window + mean_window = {params.var_window + params.mean_window}"
        )
    v = np.zeros(series.shape[0] - params.var_window + 1)
    for col in range(series.shape[1]):
        v += windowed_variance(series[:, col], params.var_window)
    return windowed_mean(v, params.mean_window)


def adaptive_segment(pcs, params: SegmentParams = SegmentParams()) -> Segment:
    """Locate the activity interval of a fused component series.

    Accepts a PrincipalComponents or a plain T x C array. Raises NoActivity
    when the motion profile is identically zero and SegmentationFailed
    (carrying the best attempt) when no threshold scale lands the
    normalized length inside (t1, t2).
    """
    series = pcs.series if isinstance(pcs, PrincipalComponents) else pcs
    series = as_float_2d(series, "component series")
    n_samples = series.shape[0]
    profile = motion_profile(series, params)
    peak = float(profile.max())
    data_scale = float(np.mean(series * series))
    if peak <= 0.0 or peak <= _ACTIVITY_EPS * data_scale:
        raise NoActivity("motion profile is zero: no dynamic component detected")

    offset = (params.var_window + params.mean_window) // 2

    def run_for(p: float) -> tuple[int, int, float, float]:
        threshold = p * peak
        run_start, run_end = _longest_run(profile >= threshold)
        start = run_start + offset
        end = min(run_end + offset, n_samples)
        t = (end - start) / n_samples
        return start, end, t, threshold

    p = params.p_init
    best_p, best_t, best_gap = p, 1.0, np.inf
    accepted = None
    for _ in range(params.max_iters):
        start, end, t, threshold = run_for(p)
        gap = max(params.t1 - t, t - params.t2, 0.0)
        if gap < best_gap:
            best_p, best_t, best_gap = p, t, gap
        if params.t1 < t < params.t2 and (accepted is None or t < accepted[2]):
            # The returned t is the smallest value achieved inside (t1, t2)
            # while the threshold scale keeps growing.
            accepted = (start, end, t, threshold, p)
        if t <= params.t1:
            break  # raising the threshold only shrinks the run further
        p *= params.p_growth
    if accepted is not None:
        start, end, t, threshold, p = accepted
        return Segment(
            start=start,
            end=end,
            normalized_length_t=t,
            p_used=p,
            threshold_T=threshold,
        )
    raise SegmentationFailed(
        f"no threshold scale reached a normalized length in "
        f"({params.t1}, {params.t2}); best p={best_p:.4f} gave t={best_t:.4f}",
        best_p=best_p,
        best_t=best_t,
    )
