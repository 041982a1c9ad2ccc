"""Hot inner loops, each with a numba kernel and a pure-numpy twin.

The numba path is used when numba imports and ``NWBENCH_NUMBA`` is not
``0``. Both paths are always importable so the benchmark and the test
suite can compare them.

Subcube codes: a subcube of {0,1}^n is a word over {0,1,2} (2 = free),
encoded as ``sum(d_i * 3**i)``. Its two children along a free coordinate
``i`` are therefore at ``c - 2*3**i`` (fixed to 0) and ``c - 3**i`` (fixed
to 1), both strictly smaller than ``c``.
"""
import os

import numpy as np

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

INF_DEPTH = 255
MIXED = 2

USE_NUMBA = numba is not None and os.environ.get("NWBENCH_NUMBA", "1") != "0"


# ---------------------------------------------------------------- numpy twins

def _np_subcube_values(table, n):
    vals = np.full((3,) * n, MIXED, dtype=np.int8) if n else np.empty((), np.int8)
    if n == 0:
        return table.astype(np.int8).reshape(1)
    vals[(slice(0, 2),) * n] = table.reshape((2,) * n, order="F")
    # after step i every cube whose free axes are all <= i is final
    for i in range(n):
        lo = [slice(None)] * n
        hi = [slice(None)] * n
        st = [slice(None)] * n
        lo[i], hi[i], st[i] = 0, 1, 2
        a = vals[tuple(lo)]
        b = vals[tuple(hi)]
        vals[tuple(st)] = np.where(a == b, a, MIXED)
    return vals.reshape(-1, order="F")


def _np_tree_depths(good, n):
    if n == 0:
        return np.where(good, 0, INF_DEPTH).astype(np.uint8)
    good = good.reshape((3,) * n, order="F")
    depth = np.where(good, 0, INF_DEPTH).astype(np.int16)
    for _ in range(n + 1):
        best = np.full(depth.shape, INF_DEPTH, dtype=np.int16)
        for i in range(n):
            lo = [slice(None)] * n
            hi = [slice(None)] * n
            st = [slice(None)] * n
            lo[i], hi[i], st[i] = 0, 1, 2
            cand = np.maximum(depth[tuple(lo)], depth[tuple(hi)]) + 1
            best[tuple(st)] = np.minimum(best[tuple(st)], cand)
        new = np.where(good, 0, np.minimum(best, INF_DEPTH)).astype(np.int16)
        if np.array_equal(new, depth):
            break
        depth = new
    return depth.reshape(-1, order="F").astype(np.uint8)


def _np_nw_packed(lo, hi, blocks, table):
    seeds = np.arange(lo, hi, dtype=np.int64)
    out = np.zeros(seeds.shape[0], dtype=np.int64)
    for i in range(blocks.shape[0]):
        idx = np.zeros(seeds.shape[0], dtype=np.int64)
        for j in range(blocks.shape[1]):
            idx |= ((seeds >> blocks[i, j]) & 1) << j
        out |= table[idx].astype(np.int64) << i
    return out


def _np_nw_bits(lo, hi, blocks, table):
    seeds = np.arange(lo, hi, dtype=np.int64)
    out = np.empty((seeds.shape[0], blocks.shape[0]), dtype=np.uint8)
    for i in range(blocks.shape[0]):
        idx = np.zeros(seeds.shape[0], dtype=np.int64)
        for j in range(blocks.shape[1]):
            idx |= ((seeds >> blocks[i, j]) & 1) << j
        out[:, i] = table[idx]
    return out


def _np_weighted_term_sum(care, val, weights, n):
    x = np.arange(1 << n, dtype=np.int64)
    acc = np.zeros(1 << n, dtype=np.int64)
    for j in range(care.shape[0]):
        acc += weights[j] * ((x & care[j]) == val[j])
    return acc


# ---------------------------------------------------------------- numba kernels

def _py_subcube_values(table, n):
    total = 3 ** n
    pow3 = np.empty(n, np.int64)
    p = 1
    for i in range(n):
        pow3[i] = p
        p *= 3
    vals = np.empty(total, np.int8)
    digits = np.zeros(n, np.int64)
    for c in range(total):
        star = -1
        x = 0
        for i in range(n):
            d = digits[i]
            if d == 2:
                star = i
                break
            x |= d << i
        if star < 0:
            vals[c] = table[x]
        else:
            a = vals[c - 2 * pow3[star]]
            b = vals[c - pow3[star]]
            vals[c] = a if a == b else MIXED
        i = 0
        while i < n:
            digits[i] += 1
            if digits[i] < 3:
                break
            digits[i] = 0
            i += 1
    return vals


def _py_tree_depths(good, n):
    total = 3 ** n
    pow3 = np.empty(n, np.int64)
    p = 1
    for i in range(n):
        pow3[i] = p
        p *= 3
    depth = np.empty(total, np.uint8)
    digits = np.zeros(n, np.int64)
    for c in range(total):
        if good[c]:
            depth[c] = 0
        else:
            best = INF_DEPTH
            for i in range(n):
                if digits[i] == 2:
                    a = depth[c - 2 * pow3[i]]
                    b = depth[c - pow3[i]]
                    m = a if a > b else b
                    if m + 1 < best:
                        best = m + 1
            depth[c] = best
        i = 0
        while i < n:
            digits[i] += 1
            if digits[i] < 3:
                break
            digits[i] = 0
            i += 1
    return depth


def _py_nw_packed(lo, hi, blocks, table):
    out = np.zeros(hi - lo, np.int64)
    s, r = blocks.shape
    for z in range(lo, hi):
        word = 0
        for i in range(s):
            idx = 0
            for j in range(r):
                idx |= ((z >> blocks[i, j]) & 1) << j
            word |= np.int64(table[idx]) << i
        out[z - lo] = word
    return out


def _py_nw_bits(lo, hi, blocks, table):
    s, r = blocks.shape
    out = np.empty((hi - lo, s), np.uint8)
    for z in range(lo, hi):
        for i in range(s):
            idx = 0
            for j in range(r):
                idx |= ((z >> blocks[i, j]) & 1) << j
            out[z - lo, i] = table[idx]
    return out


def _py_weighted_term_sum(care, val, weights, n):
    size = 1 << n
    acc = np.zeros(size, np.int64)
    for x in range(size):
        total = 0
        for j in range(care.shape[0]):
            if (x & care[j]) == val[j]:
                total += weights[j]
        acc[x] = total
    return acc


NUMPY_KERNELS = {
    "subcube_values": _np_subcube_values,
    "tree_depths": _np_tree_depths,
    "nw_packed": _np_nw_packed,
    "nw_bits": _np_nw_bits,
    "weighted_term_sum": _np_weighted_term_sum,
}

if numba is not None:
    _jit = numba.njit(cache=True, nogil=True)
    NUMBA_KERNELS = {
        "subcube_values": _jit(_py_subcube_values),
        "tree_depths": _jit(_py_tree_depths),
        "nw_packed": _jit(_py_nw_packed),
        "nw_bits": _jit(_py_nw_bits),
        "weighted_term_sum": _jit(_py_weighted_term_sum),
    }
else:  # pragma: no cover
    NUMBA_KERNELS = dict(NUMPY_KERNELS)

KERNELS = NUMBA_KERNELS if USE_NUMBA else NUMPY_KERNELS


def backend():
    return "numba" if USE_NUMBA else "numpy"


def subcube_values(table, n):
    """Per-subcube value: 0 or 1 if constant there, ``MIXED`` otherwise."""
    return KERNELS["subcube_values"](np.ascontiguousarray(table, np.uint8), n)


def tree_depths(good, n):
    """Least depth of a restriction tree whose leaves all land in ``good``.

    Returned per subcube; ``INF_DEPTH`` marks cubes where no tree exists.
    """
    return KERNELS["tree_depths"](np.ascontiguousarray(good, np.bool_), n)


def nw_packed(lo, hi, blocks, table):
    return KERNELS["nw_packed"](int(lo), int(hi), np.ascontiguousarray(blocks, np.int64),
                                np.ascontiguousarray(table, np.uint8))


def nw_bits(lo, hi, blocks, table):
    return KERNELS["nw_bits"](int(lo), int(hi), np.ascontiguousarray(blocks, np.int64),
                              np.ascontiguousarray(table, np.uint8))


def weighted_term_sum(care, val, weights, n):
    """``sum_j weights[j] * [x & care[j] == val[j]]`` for every x in [0, 2^n)."""
    care = np.ascontiguousarray(care, np.int64)
    val = np.ascontiguousarray(val, np.int64)
    weights = np.ascontiguousarray(weights, np.int64)
    if care.shape[0] == 0:
        return np.zeros(1 << n, np.int64)
    return KERNELS["weighted_term_sum"](care, val, weights, n)
