"""Hot numeric kernels with a pure-numpy fallback.

Two inner loops dominate the toolkit's runtime: the exhaustive four-point
hyperbolicity scan (O(n^4) quadruples over a distance matrix) and all-pairs
shortest paths for dense graph distance matrices.  Both run on int64
matrices obtained by exact common-denominator scaling, so the fast path
loses no exactness.

The numba jit is used when importable unless BGKIT_PURE_NUMPY=1 is set in
the environment; benchmarks/bench_kernels.py compares the two backends.
"""

from __future__ import annotations

import math
import os
from fractions import Fraction

import numpy as np

INF = np.int64(2 ** 60)

_USE_NUMBA = os.environ.get("BGKIT_PURE_NUMPY", "") != "1"
if _USE_NUMBA:
    try:
        import numba
    except ImportError:          # pragma: no cover - environment dependent
        _USE_NUMBA = False


def backend() -> str:
    return "numba" if _USE_NUMBA else "numpy"


def _four_point_py(dist):
    n = dist.shape[0]
    best = np.int64(-1)
    wi = wj = wk = wl = 0
    for i in range(n):
        for j in range(i + 1, n):
            dij = dist[i, j]
            for k in range(j + 1, n):
                dik = dist[i, k]
                djk = dist[j, k]
                for l in range(k + 1, n):
                    s1 = dij + dist[k, l]
                    s2 = dik + dist[j, l]
                    s3 = dist[i, l] + djk
                    hi = max(s1, s2, s3)
                    lo = min(s1, s2, s3)
                    two_delta = 2 * hi + lo - (s1 + s2 + s3)
                    if two_delta > best:
                        best = two_delta
                        wi, wj, wk, wl = i, j, k, l
    return best, wi, wj, wk, wl


def _floyd_warshall_py(w):
    n = w.shape[0]
    dist = w.copy()
    for k in range(n):
        for i in range(n):
            dik = dist[i, k]
            if dik >= INF:
                continue
            for j in range(n):
                alt = dik + dist[k, j]
                if alt < dist[i, j]:
                    dist[i, j] = alt
    return dist


if _USE_NUMBA:
    _four_point_jit = numba.njit(cache=True)(_four_point_py)
    _floyd_warshall_jit = numba.njit(cache=True)(_floyd_warshall_py)


def _four_point_numpy(dist):
    n = dist.shape[0]
    if n < 4:
        return np.int64(-1), 0, 0, 0, 0
    kk, ll = np.triu_indices(n, k=1)
    dkl = dist[kk, ll]
    best = np.int64(-1)
    witness = (0, 0, 0, 0)
    for i in range(n):
        for j in range(i + 1, n):
            # pair-of-pairs form: value = s1 - max(s2, s3) over disjoint pairs
            s1 = dist[i, j] + dkl
            s2 = dist[i, kk] + dist[j, ll]
            s3 = dist[i, ll] + dist[j, kk]
            val = s1 - np.maximum(s2, s3)
            overlap = (kk == i) | (kk == j) | (ll == i) | (ll == j)
            val[overlap] = -1
            idx = int(np.argmax(val))
            if val[idx] > best:
                best = np.int64(val[idx])
                quad = sorted({i, j, int(kk[idx]), int(ll[idx])})
                witness = tuple(quad)
    return best, witness[0], witness[1], witness[2], witness[3]


def four_point_scan(dist: np.ndarray):
    """(2*delta, i, j, k, l) maximizing the four-point difference, int64 exact."""
    dist = np.ascontiguousarray(dist, dtype=np.int64)
    if _USE_NUMBA:
        return _four_point_jit(dist)
    return _four_point_numpy(dist)


def _floyd_warshall_numpy(w):
    dist = w.copy()
    n = dist.shape[0]
    for k in range(n):
        alt = dist[:, k, None] + dist[None, k, :]
        np.minimum(dist, alt, out=dist)
    np.minimum(dist, INF, out=dist)
    return dist


def floyd_warshall(weights: np.ndarray):
    """All-pairs shortest paths of an int64 weight matrix (INF = no edge)."""
    w = np.ascontiguousarray(weights, dtype=np.int64)
    if _USE_NUMBA:
        return _floyd_warshall_jit(w)
    return _floyd_warshall_numpy(w)


def scale_to_int(values):
    """Common-denominator scaling of a rational iterable -> (ints, scale).

    Exact; raises OverflowError when the scaled magnitudes could overflow
    the int64 arithmetic of the kernels.
    """
    fracs = [Fraction(v) for v in values]
    scale = 1
    for f in fracs:
        scale = scale * f.denominator // math.gcd(scale, f.denominator)
    ints = [int(f * scale) for f in fracs]
    if ints and max(abs(x) for x in ints) > 2 ** 40:
        raise OverflowError("scaled distances too large for the int64 kernels")
    return ints, scale
