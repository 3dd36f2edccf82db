"""FFT entry points.

All transforms go through this module so the worker count can be set in one
place. pocketfft splits work across rows of the non-transform axis, so
results are bitwise identical for any worker count.
"""

import numpy as np
import scipy.fft as _sfft

_workers = 1


def set_workers(n: int) -> None:
    global _workers
    _workers = max(1, int(n))


def get_workers() -> int:
    return _workers


def fft(a: np.ndarray, axis: int) -> np.ndarray:
    return _sfft.fft(a, axis=axis, workers=_workers)


def ifft(a: np.ndarray, axis: int) -> np.ndarray:
    return _sfft.ifft(a, axis=axis, workers=_workers)
