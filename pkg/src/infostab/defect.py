"""Defect functionals of the parametric fundamental equation and the
auxiliary G function used in the hyperstability argument.

Notation: for a test function ``f`` on (0, 1) and exponent ``alpha``

    defect(x, y) = |f(x) + (1-x)^a f(y/(1-x)) - f(y) - (1-y)^a f(x/(1-y))|
    G(x, y)      = f(x) + (1-x)^a f(y/(1-x)) - f(x+y)

Relative checks divide by a *local scale*: the largest magnitude among the
summed terms at that point. Near the boundary the terms grow like h**alpha,
so only relative tolerances are meaningful there.

Any ``alpha != 1`` is accepted so bounded-weight regimes (alpha >= 0) can be
contrasted with alpha < 0; the hyperstability conclusion needs alpha < 0.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Optional, Sequence

import numpy as np

from . import _kernels
from .domain import (
    ClosedD2Point,
    D2Point,
    D3Point,
    GridSpec,
    check_alpha,
    grid_d2_array,
)
from .errors import DomainViolation, SlopeUndefined
from .measures import BasisPerturbed, Family, SolutionParams, _real, eval_closed_family


def _parametric(f):
    get = getattr(f, "parametric", None)
    return get() if get is not None else None


def _as_pairs(pts) -> tuple[np.ndarray, np.ndarray]:
    arr = np.asarray(pts, dtype=float).reshape(-1, 2)
    xs = np.ascontiguousarray(arr[:, 0])
    ys = np.ascontiguousarray(arr[:, 1])
    if not np.all((xs > 0) & (ys > 0) & (xs + ys < 1)):
        raise DomainViolation("points must lie in the open triangle 0 < x, y, x + y < 1")
    return xs, ys


def fe_residual_many(f, alpha: float, pts) -> np.ndarray:
    """Signed left-minus-right side of the equation at each point (numpy path)."""
    a = check_alpha(alpha)
    xs, ys = _as_pairs(pts)
    # grouped so that swapping x and y flips the sign exactly
    return (np.asarray(f(xs)) - np.asarray(f(ys))) + (
        (1.0 - xs) ** a * np.asarray(f(ys / (1.0 - xs)))
        - (1.0 - ys) ** a * np.asarray(f(xs / (1.0 - ys)))
    )


def fe_defect_many(f, alpha: float, pts, kernels=None) -> tuple[np.ndarray, np.ndarray]:
    """Pointwise defect and local scale for an ``(N, 2)`` array of triangle points."""
    a = check_alpha(alpha)
    xs, ys = _as_pairs(pts)
    par = _parametric(f)
    if par is not None:
        k = kernels if kernels is not None else _kernels.active()
        c, d, fa, theta = par
        return k.defect_terms(xs, ys, a, float(c), float(d), float(fa), np.ascontiguousarray(theta, dtype=float))
    t1 = np.asarray(f(xs))
    t2 = (1.0 - xs) ** a * np.asarray(f(ys / (1.0 - xs)))
    t3 = np.asarray(f(ys))
    t4 = (1.0 - ys) ** a * np.asarray(f(xs / (1.0 - ys)))
    defect = np.abs((t1 - t3) + (t2 - t4))
    scale = np.max(np.abs(np.stack([t1, t2, t3, t4])), axis=0)
    return defect, scale


def fe_defect(f, alpha: float, p: D2Point) -> float:
    defect, _ = fe_defect_many(f, alpha, [(p.x, p.y)])
    return float(defect[0])


def fe_defect_sup_value(f, alpha: float, pts, kernels=None) -> float:
    """Just the sup of the defect over ``pts``; the cheap path used inside optimisers."""
    a = check_alpha(alpha)
    par = _parametric(f)
    if par is not None:
        xs, ys = _as_pairs(pts)
        k = kernels if kernels is not None else _kernels.active()
        c, d, fa, theta = par
        return float(k.defect_sup(xs, ys, a, float(c), float(d), float(fa), np.ascontiguousarray(theta, dtype=float)))
    return float(fe_defect_many(f, a, pts)[0].max())


@dataclass
class DefectReport:
    sup_defect: float
    mean_defect: float
    sup_relative: float
    argmax: D2Point
    grid: GridSpec
    n_points: int
    alpha: float
    extrapolated: bool = False
    per_point: Optional[dict] = field(default=None, repr=False)

    def to_dict(self) -> dict:
        out = {
            "sup_defect": self.sup_defect,
            "mean_defect": self.mean_defect,
            "sup_relative": self.sup_relative,
            "argmax": {"x": self.argmax.x, "y": self.argmax.y},
            "grid": {"m": self.grid.m, "h": self.grid.h},
            "n_points": self.n_points,
            "alpha": self.alpha,
            "extrapolated": self.extrapolated,
        }
        return out


def _lexicographic_argmax(values: np.ndarray, pts: np.ndarray) -> int:
    top = np.flatnonzero(values == values.max())
    if top.size == 1:
        return int(top[0])
    order = np.lexsort((pts[top, 1], pts[top, 0]))
    return int(top[order[0]])


def fe_defect_sup(f, alpha: float, spec: GridSpec, per_point: bool = False) -> DefectReport:
    pts = grid_d2_array(spec)
    defect, scale = fe_defect_many(f, alpha, pts)
    i = _lexicographic_argmax(defect, pts)
    with np.errstate(divide="ignore", invalid="ignore"):
        rel = np.where(scale > 0, defect / scale, defect)
    extrapolated = False
    if hasattr(f, "extrapolates"):
        xs, ys = pts[:, 0], pts[:, 1]
        extrapolated = any(
            f.extrapolates(v) for v in (xs, ys, ys / (1.0 - xs), xs / (1.0 - ys))
        )
    report = DefectReport(
        sup_defect=float(defect[i]),
        mean_defect=float(defect.mean()),
        sup_relative=float(rel.max()),
        argmax=D2Point(float(pts[i, 0]), float(pts[i, 1])),
        grid=spec,
        n_points=int(len(pts)),
        alpha=float(alpha),
        extrapolated=extrapolated,
    )
    if per_point:
        report.per_point = {"x": pts[:, 0], "y": pts[:, 1], "defect": defect, "scale": scale}
    return report


# -- the G function ------------------------------------------------------------

def g_terms(f, alpha: float, x, y) -> tuple[np.ndarray, np.ndarray]:
    """``G(x, y)`` and its local scale, vectorised over matching arrays ``x``, ``y``."""
    a = check_alpha(alpha)
    x = _real(x)
    y = _real(y)
    t1 = np.asarray(f(x))
    t2 = (1.0 - x) ** a * np.asarray(f(y / (1.0 - x)))
    t3 = np.asarray(f(x + y))
    scale = np.maximum(np.maximum(np.abs(t1), np.abs(t2)), np.abs(t3))
    return t1 + t2 - t3, scale


def g_value(f, alpha: float, p: D2Point) -> float:
    return float(g_terms(f, alpha, p.x, p.y)[0])


def g_symmetry_many(f, alpha: float, x, y) -> tuple[np.ndarray, np.ndarray]:
    gxy, sxy = g_terms(f, alpha, x, y)
    gyx, syx = g_terms(f, alpha, y, x)
    return np.abs(gxy - gyx), np.maximum(sxy, syx)


def g_symmetry_gap(f, alpha: float, p: D2Point) -> float:
    return float(g_symmetry_many(f, alpha, p.x, p.y)[0])


def _as_triples(qs, extended: bool):
    arr = np.asarray(qs, dtype=float).reshape(-1, 3)
    x, y, z = arr[:, 0], arr[:, 1], arr[:, 2]
    if not np.all((x > 0) & (y > 0) & (z > 0) & (x + y + z < 1)):
        raise DomainViolation("points must lie in the open 3-simplex interior")
    if extended:
        arr = arr.astype(np.longdouble)
        x, y, z = arr[:, 0], arr[:, 1], arr[:, 2]
    return x, y, z


def _f64(*arrays):
    return tuple(np.asarray(a, dtype=float) for a in arrays)


def cocycle_many(f, alpha: float, qs, extended: bool = True) -> tuple[np.ndarray, np.ndarray]:
    """Residual of G(x,y) + G(x+y,z) = G(x,y+z) + (1-x)^a G(y/(1-x), z/(1-x)).

    This holds for *every* f, so the residual measures only rounding. The
    two sides evaluate f at the same abscissa reached by different roundings
    (z / (1-x-y) directly vs. through the rescaled point); near a steep part
    of f that alone costs far more than an ulp in double precision, hence
    the long double default. Closed-form functions honour it; interpolants
    evaluate in double regardless.
    """
    a = check_alpha(alpha)
    x, y, z = _as_triples(qs, extended)
    w = (1.0 - x) ** a
    g1, s1 = g_terms(f, a, x, y)
    g2, s2 = g_terms(f, a, x + y, z)
    g3, s3 = g_terms(f, a, x, y + z)
    g4, s4 = g_terms(f, a, y / (1.0 - x), z / (1.0 - x))
    resid = np.abs(g1 + g2 - g3 - w * g4)
    scale = np.max(np.stack([s1, s2, s3, w * s4]), axis=0)
    return _f64(resid, scale)


def cocycle_residual(f, alpha: float, q: D3Point) -> float:
    return float(cocycle_many(f, alpha, [(q.x, q.y, q.z)])[0][0])


class HomogeneityGap(NamedTuple):
    gap: float
    certified_bound: float
    scale: float


def homogeneity_many(f, alpha: float, qs, extended: bool = True):
    """Gap |G(y,z) - (1-x)^a G(y/(1-x), z/(1-x))| and the bound obtained by
    expanding it into three symmetry gaps of G (two of them at weight 1, one
    weighted by (1-y)^a) and applying the triangle inequality.

    Returns ``(gap, bound, scale)`` arrays; precision as in :func:`cocycle_many`.
    """
    a = check_alpha(alpha)
    x, y, z = _as_triples(qs, extended)
    wx = (1.0 - x) ** a
    wy = (1.0 - y) ** a
    gyz, s1 = g_terms(f, a, y, z)
    gsc, s2 = g_terms(f, a, y / (1.0 - x), z / (1.0 - x))
    gap = np.abs(gyz - wx * gsc)
    b1, s3 = g_symmetry_many(f, a, x, y)
    b2, s4 = g_symmetry_many(f, a, x, y + z)
    b3, s5 = g_symmetry_many(f, a, x / (1.0 - y), z / (1.0 - y))
    bound = b1 + b2 + wy * b3
    scale = np.max(np.stack([s1, wx * s2, s3, s4, wy * s5]), axis=0)
    return _f64(gap, bound, scale)


def homogeneity_gap(f, alpha: float, q: D3Point) -> HomogeneityGap:
    gap, bound, scale = homogeneity_many(f, alpha, [(q.x, q.y, q.z)])
    return HomogeneityGap(float(gap[0]), float(bound[0]), float(scale[0]))


# -- closed domain -------------------------------------------------------------

def closed_fe_defect(params: SolutionParams, alpha: float, p: ClosedD2Point) -> tuple[float, float]:
    """Defect of the closed-domain extension at a point of the closed triangle.

    Returns ``(defect, scale)``. Boundary arguments 0 and 1 use the extension
    values 0 and c - d.
    """
    a = check_alpha(alpha)
    x, y = p.x, p.y

    def f(u):
        return float(eval_closed_family(params, a, min(max(u, 0.0), 1.0)))

    # x, y < 1 on the closed triangle so both weights are finite. On the edge
    # x + y = 1 both ratios are 1 by definition; computing them would land a
    # rounding error away from 1, where the extension is discontinuous.
    on_edge = x + y == 1.0
    t1 = f(x)
    t2 = (1.0 - x) ** a * f(1.0 if on_edge else y / (1.0 - x))
    t3 = f(y)
    t4 = (1.0 - y) ** a * f(1.0 if on_edge else x / (1.0 - y))
    return abs((t1 - t3) + (t2 - t4)), max(abs(t1), abs(t2), abs(t3), abs(t4))


# -- scaling probe ---------------------------------------------------------------

class _Shifted:
    """``base + delta * g`` for a non-parametric perturbation ``g``."""

    def __init__(self, base: Callable, g: Callable, delta: float):
        self.base, self.g, self.delta = base, g, delta

    def __call__(self, x):
        return np.asarray(self.base(x)) + self.delta * np.asarray(self.g(x))


def perturbed_member(f_base: SolutionParams, g, delta: float, alpha: float):
    base = Family(f_base, alpha)
    if isinstance(g, BasisPerturbed) and g.base.params == SolutionParams(0.0, 0.0):
        return BasisPerturbed(base, tuple(delta * t for t in g.theta))
    return _Shifted(base, g, delta)


def fit_loglog_slope(hs: Sequence[float], sups: Sequence[float], refit_tol: float = 0.05):
    """Least-squares slope of log(sup) against log(h).

    If the RMS log residual of the full fit exceeds ``refit_tol`` only the
    three smallest margins are used. Returns ``(slope, used_indices)``.
    """
    h = np.asarray(hs, dtype=float)
    s = np.asarray(sups, dtype=float)
    if h.size < 2:
        raise SlopeUndefined("need at least two margins")
    if not np.all(np.isfinite(s)) or np.any(s <= 0):
        raise SlopeUndefined("sup defect is zero or non-finite at some margin")
    lx, ly = np.log(h), np.log(s)
    slope, icpt = np.polyfit(lx, ly, 1)
    rms = float(np.sqrt(np.mean((ly - (slope * lx + icpt)) ** 2)))
    idx = np.arange(h.size)
    if rms > refit_tol and h.size > 3:
        idx = np.argsort(h)[:3]
        slope, _ = np.polyfit(lx[idx], ly[idx], 1)
        idx = np.sort(idx)
    return float(slope), idx


@dataclass
class ScalingResult:
    slope: float
    table: list
    fitted: list
    alpha: float
    delta: float
    m: int

    @property
    def max_sup(self) -> float:
        return max(s for _, s in self.table)

    def to_dict(self) -> dict:
        return {
            "slope": self.slope,
            "alpha": self.alpha,
            "delta": self.delta,
            "m": self.m,
            "table": [{"h": h, "sup_defect": s} for h, s in self.table],
            "fitted_margins": self.fitted,
        }


def scaling_exponent(
    f_base: SolutionParams,
    g,
    delta: float,
    alpha: float,
    margins: Sequence[float],
    m: int = 100,
) -> ScalingResult:
    """Sup defect of ``family(f_base) + delta * g`` at shrinking margins and its log-log slope.

    For alpha < 0 the slope tracks alpha (the defect is unbounded on the open
    triangle); for bounded weights it stays near 0.
    """
    a = check_alpha(alpha)
    hs = [float(h) for h in margins]
    if len(hs) < 2 or any(b >= a_ for a_, b in zip(hs, hs[1:])):
        raise DomainViolation("margins must be strictly decreasing with at least two entries")
    if not delta > 0:
        raise DomainViolation("delta must be positive")
    f = perturbed_member(f_base, g, float(delta), a)
    table = []
    for h in hs:
        pts = grid_d2_array(GridSpec(m, h))
        table.append((h, fe_defect_sup_value(f, a, pts)))
    slope, used = fit_loglog_slope([t[0] for t in table], [t[1] for t in table])
    return ScalingResult(slope, table, [hs[i] for i in used], a, float(delta), int(m))
