"""Hot loops for the defect sweeps and the measure recursion.

Every kernel exists twice: a vectorised numpy version and a numba ``@njit``
loop version with identical signature. The numba path is used when numba
imports and ``INFOSTAB_NUMBA`` is not set to ``0``; set ``INFOSTAB_NUMBA=0``
to force the numpy fallback. Both paths are importable explicitly (``NUMPY``
and ``NUMBA`` namespaces) so tests and the benchmark can compare them.

All kernels take the closed-form function description ``(c, d, fa, theta)``
meaning ``c x**fa + d (1-x)**fa - d + sum_j theta[j-1] sin(j pi x)``.
"""
from __future__ import annotations

import math
import os
from types import SimpleNamespace

import numpy as np

try:  # pragma: no cover - exercised implicitly by whichever env runs the tests
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    HAVE_NUMBA = False


def _env_wants_numba() -> bool:
    return os.environ.get("INFOSTAB_NUMBA", "1").strip().lower() not in ("0", "false", "no", "off")


# -- numpy ------------------------------------------------------------------

def _np_fam(x, c, d, fa, theta):
    out = c * x**fa + d * (1.0 - x) ** fa - d
    for j in range(theta.shape[0]):
        if theta[j] != 0.0:
            out = out + theta[j] * np.sin((j + 1) * np.pi * x)
    return out


def _np_defect_terms(xs, ys, alpha, c, d, fa, theta):
    wx = (1.0 - xs) ** alpha
    wy = (1.0 - ys) ** alpha
    t1 = _np_fam(xs, c, d, fa, theta)
    t2 = wx * _np_fam(ys / (1.0 - xs), c, d, fa, theta)
    t3 = _np_fam(ys, c, d, fa, theta)
    t4 = wy * _np_fam(xs / (1.0 - ys), c, d, fa, theta)
    defect = np.abs((t1 - t3) + (t2 - t4))
    scale = np.maximum(np.maximum(np.abs(t1), np.abs(t2)), np.maximum(np.abs(t3), np.abs(t4)))
    return defect, scale


def _np_defect_sup(xs, ys, alpha, c, d, fa, theta):
    defect, _ = _np_defect_terms(xs, ys, alpha, c, d, fa, theta)
    return defect.max()


def _np_recursion(P, alpha, c, d, fa, theta):
    # I_n(p) = f(p_n) + sum_{k=2}^{n-1} S_k^alpha f(p_k / S_k), S_k = p_1 + ... + p_k
    n = P.shape[1]
    s = P[:, 0].copy()
    total = np.zeros(P.shape[0])
    for k in range(1, n - 1):
        s_new = s + P[:, k]
        total = total + s_new**alpha * _np_fam(P[:, k] / s_new, c, d, fa, theta)
        s = s_new
    # deepest level is (S_{n-1}, p_n): the kernel value f(p_n)
    return _np_fam(P[:, n - 1], c, d, fa, theta) + total


NUMPY = SimpleNamespace(
    name="numpy",
    fam=_np_fam,
    defect_terms=_np_defect_terms,
    defect_sup=_np_defect_sup,
    recursion=_np_recursion,
)


# -- numba ------------------------------------------------------------------

if HAVE_NUMBA:

    @njit(cache=True)
    def _nb_fam1(x, c, d, fa, theta):
        v = c * x**fa + d * (1.0 - x) ** fa - d
        if theta.shape[0] == 0:
            return v
        # sin((j+1)t) = 2 cos(t) sin(jt) - sin((j-1)t): two libm calls for the whole basis
        t = math.pi * x
        s_prev, s_cur = 0.0, math.sin(t)
        two_cos = 2.0 * math.cos(t)
        for j in range(theta.shape[0]):
            v += theta[j] * s_cur
            s_prev, s_cur = s_cur, two_cos * s_cur - s_prev
        return v

    @njit(cache=True)
    def _nb_fam(x, c, d, fa, theta):
        out = np.empty(x.shape[0])
        for i in range(x.shape[0]):
            out[i] = _nb_fam1(x[i], c, d, fa, theta)
        return out

    @njit(cache=True)
    def _nb_defect_terms(xs, ys, alpha, c, d, fa, theta):
        n = xs.shape[0]
        defect = np.empty(n)
        scale = np.empty(n)
        for i in range(n):
            x = xs[i]
            y = ys[i]
            t1 = _nb_fam1(x, c, d, fa, theta)
            t2 = (1.0 - x) ** alpha * _nb_fam1(y / (1.0 - x), c, d, fa, theta)
            t3 = _nb_fam1(y, c, d, fa, theta)
            t4 = (1.0 - y) ** alpha * _nb_fam1(x / (1.0 - y), c, d, fa, theta)
            defect[i] = abs((t1 - t3) + (t2 - t4))
            scale[i] = max(max(abs(t1), abs(t2)), max(abs(t3), abs(t4)))
        return defect, scale

    @njit(cache=True)
    def _nb_defect_sup(xs, ys, alpha, c, d, fa, theta):
        best = 0.0
        for i in range(xs.shape[0]):
            x = xs[i]
            y = ys[i]
            v = abs(
                (_nb_fam1(x, c, d, fa, theta) - _nb_fam1(y, c, d, fa, theta))
                + (
                    (1.0 - x) ** alpha * _nb_fam1(y / (1.0 - x), c, d, fa, theta)
                    - (1.0 - y) ** alpha * _nb_fam1(x / (1.0 - y), c, d, fa, theta)
                )
            )
            if v > best:
                best = v
        return best

    @njit(cache=True)
    def _nb_recursion(P, alpha, c, d, fa, theta):
        rows, n = P.shape
        out = np.empty(rows)
        for r in range(rows):
            s = P[r, 0]
            total = 0.0
            for k in range(1, n - 1):
                s_new = s + P[r, k]
                total += s_new**alpha * _nb_fam1(P[r, k] / s_new, c, d, fa, theta)
                s = s_new
            out[r] = _nb_fam1(P[r, n - 1], c, d, fa, theta) + total
        return out

    NUMBA = SimpleNamespace(
        name="numba",
        fam=_nb_fam,
        defect_terms=_nb_defect_terms,
        defect_sup=_nb_defect_sup,
        recursion=_nb_recursion,
    )
else:  # pragma: no cover
    NUMBA = None


def active():
    """The kernel namespace selected by the environment."""
    if NUMBA is not None and _env_wants_numba():
        return NUMBA
    return NUMPY


def backend_name() -> str:
    return active().name
