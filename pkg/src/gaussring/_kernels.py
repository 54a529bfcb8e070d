"""Hot numeric kernels with numba acceleration and a pure-numpy fallback.

The fallback is selected by setting the environment variable
``GAUSSRING_NO_NUMBA=1`` (or automatically when numba is unavailable).
Both paths produce bitwise-comparable results at double precision;
``benchmarks/bench_kernels.py`` compares their throughput.
"""

from __future__ import annotations

import os

import numpy as np
from numpy.typing import NDArray

USE_NUMBA = os.environ.get("GAUSSRING_NO_NUMBA", "0") not in ("1", "true", "yes")

if USE_NUMBA:
    try:
        import numba
    except ImportError:  # pragma: no cover
        USE_NUMBA = False


def _convolve_full_np(a: NDArray[np.complex128], b: NDArray[np.complex128],
                      dk: float) -> NDArray[np.complex128]:
    return np.convolve(a, b) * dk


def _interp_complex_np(x0: float, dx: float, table: NDArray[np.complex128],
                       args: NDArray[np.float64]) -> NDArray[np.complex128]:
    xs = x0 + dx * np.arange(table.size)
    re = np.interp(args, xs, table.real, left=0.0, right=0.0)
    im = np.interp(args, xs, table.imag, left=0.0, right=0.0)
    return re + 1j * im


if USE_NUMBA:

    @numba.njit(cache=True)
    def _convolve_full_nb(a, b, dk):  # pragma: no cover - exercised via dispatch
        na, nb = a.size, b.size
        out = np.zeros(na + nb - 1, dtype=np.complex128)
        for i in range(na):
            ai = a[i]
            for j in range(nb):
                out[i + j] += ai * b[j]
        return out * dk

    @numba.njit(cache=True)
    def _interp_complex_nb(x0, dx, table, args):  # pragma: no cover
        n = table.size
        flat = args.ravel()
        out = np.zeros(flat.size, dtype=np.complex128)
        for i in range(flat.size):
            u = (flat[i] - x0) / dx
            if u < 0.0 or u > n - 1:
                continue
            lo = int(np.floor(u))
            if lo >= n - 1:
                out[i] = table[n - 1]
            else:
                w = u - lo
                out[i] = table[lo] * (1.0 - w) + table[lo + 1] * w
        return out.reshape(args.shape)


def convolve_full(a: NDArray[np.complex128], b: NDArray[np.complex128],
                  dk: float) -> NDArray[np.complex128]:
    """Discrete full convolution with rectangle-rule dk weight."""
    a = np.ascontiguousarray(a, dtype=complex)
    b = np.ascontiguousarray(b, dtype=complex)
    if USE_NUMBA:
        return _convolve_full_nb(a, b, dk)
    return _convolve_full_np(a, b, dk)


def interp_complex(x0: float, dx: float, table: NDArray[np.complex128],
                   args: NDArray[np.float64]) -> NDArray[np.complex128]:
    """Linear interpolation of a uniformly sampled complex table.

    Arguments outside the table's support evaluate to 0.
    """
    table = np.ascontiguousarray(table, dtype=complex)
    args = np.ascontiguousarray(args, dtype=float)
    if USE_NUMBA:
        return _interp_complex_nb(float(x0), float(dx), table, args)
    return _interp_complex_np(float(x0), float(dx), table, args)
