"""Discrete wavelet transform via the two-filter recursion.

One analysis step convolves the input with the scaling and wavelet filters
and keeps every second output (dyadic decimation), using periodic boundary
extension so lengths halve exactly. The pyramid iterates the step on the
approximation branch; detail coefficients are produced (they carry the
energy bookkeeping) and dropped. The synthesis step inverts one analysis
step exactly for orthonormal filter pairs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidValue
from .validation import as_float_1d, as_float_2d


@dataclass(frozen=True)
class WaveletSpec:
    """Orthonormal scaling/wavelet filter pair."""

    name: str
    h_phi: np.ndarray
    h_psi: np.ndarray

    def __post_init__(self):
        h_phi = np.asarray(self.h_phi, dtype=np.float64)
        h_psi = np.asarray(self.h_psi, dtype=np.float64)
        if h_phi.ndim != 1 or h_phi.shape != h_psi.shape:
            raise InvalidValue("filters must be 1-D and equally long")
        if abs(h_phi.sum() - math.sqrt(2.0)) > 1e-10:
            raise InvalidValue("scaling filter must sum to sqrt(2)")
        if abs(np.linalg.norm(h_phi) - 1.0) > 1e-10:
            raise InvalidValue("scaling filter must have unit norm")
        mirror = _quadrature_mirror(h_phi)
        if np.max(np.abs(h_psi - mirror)) > 1e-10:
            raise InvalidValue("wavelet filter must be the quadrature mirror of the scaling filter")
        h_phi.setflags(write=False)
        h_psi.setflags(write=False)
        object.__setattr__(self, "h_phi", h_phi)
        object.__setattr__(self, "h_psi", h_psi)

    @classmethod
    def haar(cls) -> "WaveletSpec":
        h = np.array([1.0, 1.0]) / math.sqrt(2.0)
        return cls("haar", h, _quadrature_mirror(h))

    @classmethod
    def db2(cls) -> "WaveletSpec":
        s3 = math.sqrt(3.0)
        h = np.array([1.0 + s3, 3.0 + s3, 3.0 - s3, 1.0 - s3]) / (4.0 * math.sqrt(2.0))
        return cls("db2", h, _quadrature_mirror(h))

    @classmethod
    def by_name(cls, name: str) -> "WaveletSpec":
        if name == "haar":
            return cls.haar()
        if name == "db2":
            return cls.db2()
        raise InvalidValue(f"unknown wavelet family {name!r} (expected 'haar' or 'db2')")


def _quadrature_mirror(h_phi: np.ndarray) -> np.ndarray:
    """h_psi[n] = (-1)^n * h_phi[L-1-n]."""
    signs = np.where(np.arange(h_phi.size) % 2 == 0, 1.0, -1.0)
    return signs * h_phi[::-1]


@dataclass(frozen=True)
class WaveletPyramid:
    """Approximation coefficients of a J-level decomposition per channel."""

    levels: int
    approx: tuple[np.ndarray, ...]
    channels: int

    def __post_init__(self):
        if len(self.approx) != self.levels:
            raise InvalidValue("pyramid must hold one approximation per level")
        prev = None
        for level, coeffs in enumerate(self.approx, start=1):
            if coeffs.ndim != 2 or coeffs.shape[0] != self.channels:
                raise InvalidValue(f"level {level} must be channels x length")
            if prev is not None and coeffs.shape[1] * 2 != prev:
                raise InvalidValue("approximation lengths must halve per level")
            prev = coeffs.shape[1]
        object.__setattr__(self, "approx", tuple(self.approx))

    def level_length(self, level: int) -> int:
        return self.approx[level - 1].shape[1]


def dwt_step(x, spec: WaveletSpec) -> tuple[np.ndarray, np.ndarray]:
    """One analysis step: periodic convolution with both filters, then
    dyadic decimation. Input length must be even."""
    x = as_float_1d(x, "signal")
    length = x.size
    if length % 2 != 0:
        raise InvalidValue(f"signal length must be even, got {length}")
    if length < 2:
        raise InvalidValue("signal must have at least 2 samples")
    base = 2 * np.arange(length // 2)
    approx = np.zeros(length // 2)
    detail = np.zeros(length // 2)
    for tap in range(spec.h_phi.size):
        samples = x[(base + tap) % length]
        approx += spec.h_phi[tap] * samples
        detail += spec.h_psi[tap] * samples
    return approx, detail


def idwt_step(approx, detail, spec: WaveletSpec) -> np.ndarray:
    """Invert one analysis step (perfect reconstruction)."""
    approx = as_float_1d(approx, "approx")
    detail = as_float_1d(detail, "detail")
    if approx.size != detail.size:
        raise InvalidValue(
            f"approx/detail lengths differ: {approx.size} vs {detail.size}"
        )
    length = 2 * approx.size
    base = 2 * np.arange(approx.size)
    x = np.zeros(length)
    for tap in range(spec.h_phi.size):
        idx = (base + tap) % length
        np.add.at(x, idx, spec.h_phi[tap] * approx + spec.h_psi[tap] * detail)
    return x


def dwt_pyramid(series, levels: int, spec: WaveletSpec) -> WaveletPyramid:
    """J-level approximation pyramid of a channels x L matrix."""
    series = as_float_2d(series, "series")
    channels, length = series.shape
    if levels < 1:
        raise InvalidValue("levels must be >= 1")
    if length % (1 << levels) != 0:
        raise InvalidValue(
            f"length {length} is not divisible by 2^{levels}"
        )
    approx_levels = []
    current = series
    for _ in range(levels):
        level_out = np.empty((channels, current.shape[1] // 2))
        for ch in range(channels):
            approx, _detail = dwt_step(current[ch], spec)
            level_out[ch] = approx
        approx_levels.append(level_out)
        current = level_out
    return WaveletPyramid(levels=levels, approx=tuple(approx_levels), channels=channels)
