"""Savitzky-Golay smoothing from the least-squares impulse-fit design.

The window weights come from fitting a degree-N polynomial to a unit
impulse over the 2M+1 integer positions -M..M: the normal equations
(A^T A) a = A^T d are solved by Gaussian elimination with partial
pivoting, the fitted polynomial is evaluated back on the window grid, and
the impulse response is its index reversal. Applying the filter equals
evaluating a per-window least-squares polynomial fit at each window
center.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidValue, NumericalError
from .validation import as_float_1d

EDGE_MODES = ("mirror", "polyfit")


@dataclass(frozen=True)
class SgFilter:
    """Designed smoothing filter of half-width M and polynomial order N."""

    half_width_m: int
    poly_order_n: int
    coefficients: np.ndarray

    def __post_init__(self):
        coeffs = np.asarray(self.coefficients, dtype=np.float64)
        if coeffs.shape != (2 * self.half_width_m + 1,):
            raise InvalidValue(
                f"coefficient vector must have length {2 * self.half_width_m + 1}"
            )
        if abs(coeffs.sum() - 1.0) > 1e-10:
            raise InvalidValue("smoothing coefficients must sum to 1")
        if np.max(np.abs(coeffs - coeffs[::-1])) > 1e-10:
            raise InvalidValue("smoothing coefficients must be symmetric")
        coeffs.setflags(write=False)
        object.__setattr__(self, "coefficients", coeffs)

    @property
    def window_length(self) -> int:
        return 2 * self.half_width_m + 1


def _solve_linear(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Gaussian elimination with partial pivoting."""
    a = np.array(a, dtype=np.float64)
    b = np.array(b, dtype=np.float64)
    n = b.size
    pivot_floor = 1e-13 * max(1.0, float(np.max(np.abs(a))))
    for k in range(n):
        piv = k + int(np.argmax(np.abs(a[k:, k])))
        if abs(a[piv, k]) <= pivot_floor:
            raise NumericalError("normal equations are ill-conditioned")
        if piv != k:
            a[[k, piv]] = a[[piv, k]]
            b[[k, piv]] = b[[piv, k]]
        factors = a[k + 1:, k] / a[k, k]
        a[k + 1:, k:] -= np.outer(factors, a[k, k:])
        b[k + 1:] -= factors * b[k]
    x = np.zeros(n)
    for k in range(n - 1, -1, -1):
        x[k] = (b[k] - a[k, k + 1:] @ x[k + 1:]) / a[k, k]
    return x


def _vandermonde(positions: np.ndarray, order: int) -> np.ndarray:
    return np.vander(positions, order + 1, increasing=True)


def design_sg_filter(m: int, n: int) -> SgFilter:
    """Design the order-N smoothing filter over a window of length 2M+1."""
    if m < 1:
        raise InvalidValue(f"half width M must be >= 1, got {m}")
    if n < 0:
        raise InvalidValue(f"polynomial order N must be >= 0, got {n}")
    if n > 2 * m:
        raise InvalidValue(f"order N={n} exceeds 2M={2 * m}: design matrix is rank-deficient")
    positions = np.arange(-m, m + 1, dtype=np.float64)
    a = _vandermonde(positions, n)
    d = np.zeros(2 * m + 1)
    d[m] = 1.0
    coeffs_poly = _solve_linear(a.T @ a, a.T @ d)
    fitted = a @ coeffs_poly          # polynomial fit to the impulse on -M..M
    impulse_response = fitted[::-1]
    return SgFilter(half_width_m=m, poly_order_n=n, coefficients=impulse_response)


def _lstsq_poly(positions: np.ndarray, values: np.ndarray, order: int) -> np.ndarray:
    a = _vandermonde(positions, order)
    return _solve_linear(a.T @ a, a.T @ values)


def apply_sg(signal, sg_filter: SgFilter, edge_mode: str = "mirror") -> np.ndarray:
    """Smooth a series; output has the same length as the input.

    Interior points are the filter convolution. Edges are handled by mirror
    extension (default) or by evaluating a least-squares polynomial fitted
    to the first/last window at the uncovered positions.
    """
    x = as_float_1d(signal, "signal")
    m = sg_filter.half_width_m
    window = sg_filter.window_length
    if x.size < window:
        raise InvalidValue(f"signal length {x.size} is shorter than the window {window}")
    if edge_mode not in EDGE_MODES:
        raise InvalidValue(f"edge_mode must be one of {EDGE_MODES}, got {edge_mode!r}")

    if edge_mode == "mirror":
        padded = np.concatenate([x[m:0:-1], x, x[-2:-m - 2:-1]])
        return np.convolve(padded, sg_filter.coefficients, mode="valid")

    out = np.empty_like(x)
    out[m:-m] = np.convolve(x, sg_filter.coefficients, mode="valid")
    positions = np.arange(window, dtype=np.float64)
    head = _lstsq_poly(positions, x[:window], sg_filter.poly_order_n)
    tail = _lstsq_poly(positions, x[-window:], sg_filter.poly_order_n)
    out[:m] = _vandermonde(positions[:m], sg_filter.poly_order_n) @ head
    out[-m:] = _vandermonde(positions[-m:] , sg_filter.poly_order_n) @ tail
    return out
