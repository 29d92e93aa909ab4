"""Validated points of the open/closed triangles, the 3-simplex interior and the
open probability simplex, plus deterministic lattices over them.

Point classes are immutable and validate on construction. The lattice
generators also have array-returning variants (``*_array``) used by the sweep
code, since materialising hundreds of thousands of point objects is wasteful.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DomainViolation, EmptyGrid

SIMPLEX_SUM_TOL = 1e-12


def check_alpha(alpha: float, *, negative: bool = False) -> float:
    """Return ``alpha`` as a float after checking alpha != 1 (and alpha < 0 if asked)."""
    a = float(alpha)
    if not math.isfinite(a):
        raise DomainViolation(f"alpha must be finite, got {alpha!r}")
    if a == 1.0:
        raise DomainViolation("alpha must differ from 1")
    if negative and not a < 0:
        raise DomainViolation(f"this operation requires alpha < 0, got {a}")
    return a


def _open_unit(name: str, v: float) -> float:
    v = float(v)
    if not (0.0 < v < 1.0):
        raise DomainViolation(f"{name} must lie in (0, 1), got {v!r}")
    return v


@dataclass(frozen=True)
class D2Point:
    x: float
    y: float

    def __post_init__(self):
        _open_unit("x", self.x)
        _open_unit("y", self.y)
        if not self.x + self.y < 1.0:
            raise DomainViolation(f"x + y must be < 1, got {self.x + self.y!r}")

    def swapped(self) -> "D2Point":
        return D2Point(self.y, self.x)


@dataclass(frozen=True)
class D3Point:
    x: float
    y: float
    z: float

    def __post_init__(self):
        _open_unit("x", self.x)
        _open_unit("y", self.y)
        _open_unit("z", self.z)
        if not self.x + self.y + self.z < 1.0:
            raise DomainViolation(
                f"x + y + z must be < 1, got {self.x + self.y + self.z!r}"
            )


@dataclass(frozen=True)
class ClosedD2Point:
    x: float
    y: float

    def __post_init__(self):
        for name, v in (("x", self.x), ("y", self.y)):
            if not (0.0 <= v < 1.0):
                raise DomainViolation(f"{name} must lie in [0, 1), got {v!r}")
        if not self.x + self.y <= 1.0:
            raise DomainViolation(f"x + y must be <= 1, got {self.x + self.y!r}")


@dataclass(frozen=True)
class SimplexPoint:
    """A point of the open probability simplex; renormalised on construction."""

    p: tuple

    def __post_init__(self):
        arr = np.asarray(self.p, dtype=float)
        if arr.ndim != 1 or arr.size < 2:
            raise DomainViolation("a simplex point needs at least 2 coordinates")
        if not np.all((arr > 0.0) & (arr < 1.0)):
            raise DomainViolation(f"every p_i must lie in (0, 1), got {arr.tolist()}")
        total = math.fsum(arr.tolist())
        if abs(total - 1.0) > SIMPLEX_SUM_TOL:
            raise DomainViolation(f"probabilities must sum to 1, got {total!r}")
        object.__setattr__(self, "p", tuple(float(v) for v in arr / total))

    @property
    def n(self) -> int:
        return len(self.p)

    def as_array(self) -> np.ndarray:
        return np.array(self.p)


def make_d2(x: float, y: float) -> D2Point:
    return D2Point(x, y)


def make_d3(x: float, y: float, z: float) -> D3Point:
    return D3Point(x, y, z)


def make_closed_d2(x: float, y: float) -> ClosedD2Point:
    return ClosedD2Point(x, y)


def make_simplex(p: Sequence[float]) -> SimplexPoint:
    return SimplexPoint(tuple(p))


@dataclass(frozen=True)
class GridSpec:
    """Resolution ``m`` and boundary standoff ``h`` for the triangle lattices.

    The lattice has ``m - 1`` nodes per edge, so at most ``m (m - 1) / 2``
    points on the triangle.
    """

    m: int
    h: float = 1e-3

    def __post_init__(self):
        if int(self.m) != self.m or self.m < 1:
            raise DomainViolation(f"resolution m must be a positive integer, got {self.m!r}")
        if not (0.0 < self.h < 0.5):
            raise DomainViolation(f"margin h must lie in (0, 0.5), got {self.h!r}")


def _bounded_indices(dim: int, total: int) -> np.ndarray:
    """Non-negative integer vectors of length ``dim`` with sum <= ``total``, lexicographic."""
    if dim == 1:
        return np.arange(total + 1).reshape(-1, 1)
    blocks = []
    for i in range(total + 1):
        rest = _bounded_indices(dim - 1, total - i)
        blocks.append(np.hstack([np.full((len(rest), 1), i), rest]))
    return np.vstack(blocks)


def _chained_rest(pts: np.ndarray) -> np.ndarray:
    """``((1 - p_1) - p_2) - ...``; rounds differently from ``1 - sum``."""
    rest = np.ones(len(pts))
    for j in range(pts.shape[1]):
        rest = rest - pts[:, j]
    return rest


def _lattice(dim: int, spec: GridSpec) -> np.ndarray:
    m, h = int(spec.m), float(spec.h)
    side = 1.0 - (dim + 1) * h
    if m < 2 or side < 0.0:
        raise EmptyGrid(f"no lattice point for m={m}, h={h} in dimension {dim}")
    steps = m - 2
    idx = _bounded_indices(dim, steps).astype(float)
    pts = h + side * idx / steps if steps > 0 else np.full((1, dim), h)
    # rounding can push the outer face past 1 - sum >= h; shave the largest
    # coordinate (it sits far above h) one ulp at a time
    for _ in range(64):
        bad = np.flatnonzero(np.minimum(1.0 - pts.sum(axis=1), _chained_rest(pts)) < h)
        if bad.size == 0:
            break
        col = pts[bad].argmax(axis=1)
        pts[bad, col] = np.nextafter(pts[bad, col], 0.0)
    return pts


def grid_d2_array(spec: GridSpec) -> np.ndarray:
    """Lattice over the margin-shrunk triangle as an ``(N, 2)`` array."""
    return _lattice(2, spec)


def grid_d3_array(spec: GridSpec) -> np.ndarray:
    return _lattice(3, spec)


def grid_d2(spec: GridSpec) -> list[D2Point]:
    return [D2Point(float(x), float(y)) for x, y in grid_d2_array(spec)]


def grid_d3(spec: GridSpec) -> list[D3Point]:
    return [D3Point(float(x), float(y), float(z)) for x, y, z in grid_d3_array(spec)]


def grid_line(spec: GridSpec) -> np.ndarray:
    """``m`` equispaced abscissae in ``[h, 1 - h]`` for sampling one-variable functions."""
    if spec.m < 2:
        raise EmptyGrid("a sampling line needs m >= 2")
    return np.linspace(spec.h, 1.0 - spec.h, int(spec.m))


def grid_simplex_array(n: int, m: int) -> np.ndarray:
    """All points ``k / m`` with positive integer parts ``k`` summing to ``m``."""
    if n < 2:
        raise DomainViolation(f"simplex dimension n must be >= 2, got {n}")
    if m < n:
        raise EmptyGrid(f"no positive composition of {m} into {n} parts")
    # stars and bars: choose n - 1 cut positions among 1..m-1
    cuts = np.array(list(itertools.combinations(range(1, m), n - 1)), dtype=np.int64)
    cuts = cuts.reshape(-1, n - 1)
    bounds = np.hstack(
        [np.zeros((len(cuts), 1), np.int64), cuts, np.full((len(cuts), 1), m, np.int64)]
    )
    return np.diff(bounds, axis=1) / m


def grid_simplex(n: int, m: int) -> list[SimplexPoint]:
    return [SimplexPoint(tuple(row)) for row in grid_simplex_array(n, m)]


def nested_coords(q: D3Point) -> tuple[float, float]:
    """Both sides of z / (1 - (x + y)) = (z / (1 - x)) / (1 - y / (1 - x)).

    Each side is evaluated on its own in extended precision and rounded to
    float64; in plain float64 the nested side loses digits to cancellation
    as x + y approaches 1.
    """
    (direct, nested), = nested_coords_many([(q.x, q.y, q.z)])
    return float(direct), float(nested)


def nested_coords_many(qs) -> np.ndarray:
    """Vectorised :func:`nested_coords`: an ``(N, 2)`` array of (direct, nested)."""
    L = np.asarray(qs, dtype=float).reshape(-1, 3).astype(np.longdouble)
    x, y, z = L[:, 0], L[:, 1], L[:, 2]
    one = np.longdouble(1)
    direct = z / (one - (x + y))
    nested = (z / (one - x)) / (one - y / (one - x))
    return np.column_stack([direct.astype(float), nested.astype(float)])


def _sample(rng: np.random.Generator, size: int, dim: int, margin: float) -> np.ndarray:
    if not 0.0 <= margin * (dim + 1) < 1.0:
        raise DomainViolation(f"margin {margin} leaves no room in dimension {dim}")
    out, have = [], 0
    while have < size:
        w = rng.dirichlet(np.ones(dim + 1), size=size)
        pts = w[:, :dim]
        rest = 1.0 - pts.sum(axis=1)
        ok = (pts > margin).all(axis=1) & (rest > margin) & (pts > 0).all(axis=1) & (rest > 0)
        out.append(pts[ok])
        have += int(ok.sum())
    return np.vstack(out)[:size]


def sample_d2(rng: np.random.Generator, size: int, margin: float = 0.0) -> np.ndarray:
    """Uniform random points of the open triangle, optionally kept ``margin`` off its edges."""
    return _sample(rng, size, 2, margin)


def sample_d3(rng: np.random.Generator, size: int, margin: float = 0.0) -> np.ndarray:
    return _sample(rng, size, 3, margin)
