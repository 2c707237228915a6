"""ctypes bridge to the compiled count-based partition dynamic program."""

from __future__ import annotations

import ctypes

import numpy as np
from numpy.ctypeslib import ndpointer

from mickit import _dpcore

INF = 1e300

_lib = ctypes.CDLL(_dpcore.__file__)
_dp = _lib.mickit_segment_dp
_i64 = ndpointer(np.int64, flags="C_CONTIGUOUS")
_f64 = ndpointer(np.float64, flags="C_CONTIGUOUS")
_dp.argtypes = [_i64, _i64, _i64, ctypes.c_int64, ctypes.c_int64, ctypes.c_int64, _f64, ctypes.c_int64, _f64]
_dp.restype = ctypes.c_int


def xlogx_table(n: int) -> np.ndarray:
    """``table[i] = i ln i`` for ``i = 0..n``."""
    i = np.arange(n + 1, dtype=float)
    out = np.zeros(n + 1)
    out[1:] = i[1:] * np.log(i[1:])
    return out


def segment_dp_counts(ptr, labels, counts, n_labels: int, kmax: int, tbl) -> np.ndarray:
    """Minimum summed segment cost of the master cells, per number of segments.

    Cell ``c`` holds ``counts[ptr[c]:ptr[c+1]]`` points with the matching
    ``labels``. A segment with label counts ``n_q`` and total ``N`` costs
    ``N ln N - sum n_q ln n_q``. Returns ``out`` with ``out[j]`` the minimum
    over partitions into exactly ``j`` contiguous non-empty segments
    (``INF`` when infeasible), for ``j = 0..kmax``.
    """
    ptr = np.ascontiguousarray(ptr, dtype=np.int64)
    labels = np.ascontiguousarray(labels, dtype=np.int64)
    counts = np.ascontiguousarray(counts, dtype=np.int64)
    tbl = np.ascontiguousarray(tbl, dtype=np.float64)
    n = tbl.size - 1
    if counts.sum() > n:
        raise ValueError("table too short for the cell counts")
    out = np.empty(kmax + 1)
    status = _dp(ptr, labels, counts, ptr.size - 1, int(n_labels), int(kmax), tbl, n, out)
    if status != 0:
        raise MemoryError("partition dynamic program could not allocate its tables")
    return out
