"""Closed-form evaluators: the two-parameter solution family, its closed-domain
extension, the entropy of degree alpha and the (a, b) comparison measures.

Also the three kinds of one-variable test function consumed by the defect
and analysis code: ``Family``, ``BasisPerturbed`` and ``Sampled``.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Union

import numpy as np

from .domain import SimplexPoint, check_alpha
from .errors import DomainViolation


@dataclass(frozen=True)
class SolutionParams:
    c: float
    d: float

    def __post_init__(self):
        if not (math.isfinite(self.c) and math.isfinite(self.d)):
            raise DomainViolation("solution parameters must be finite")


@dataclass(frozen=True)
class JParams:
    a: float
    b: float

    def __post_init__(self):
        if not (math.isfinite(self.a) and math.isfinite(self.b)):
            raise DomainViolation("measure parameters must be finite")


def _real(x) -> np.ndarray:
    """float64 array, except that long double input keeps its precision."""
    arr = np.asarray(x)
    return arr if arr.dtype == np.longdouble else arr.astype(float)


def _check_open(x) -> np.ndarray:
    arr = _real(x)
    if not np.all((arr > 0.0) & (arr < 1.0)):
        raise DomainViolation("argument must lie in the open interval (0, 1)")
    return arr


def _scalar_or_array(arr: np.ndarray, like):
    if np.ndim(like) == 0 and np.asarray(like).dtype != np.longdouble:
        return float(arr)
    return arr


def _power(base, a: float):
    base = np.asarray(base, dtype=float)
    if np.any(base <= 0.0):
        raise DomainViolation("power of a non-positive base")
    return base**a


@dataclass(frozen=True)
class Family:
    """``x -> c x**alpha + d (1 - x)**alpha - d`` on (0, 1)."""

    params: SolutionParams
    alpha: float

    def __post_init__(self):
        object.__setattr__(self, "alpha", check_alpha(self.alpha))

    @classmethod
    def of(cls, c: float, d: float, alpha: float) -> "Family":
        return cls(SolutionParams(float(c), float(d)), alpha)

    def parametric(self):
        return self.params.c, self.params.d, self.alpha, np.zeros(0)

    def __call__(self, x):
        arr = _check_open(x)
        c, d, a = self.params.c, self.params.d, self.alpha
        return _scalar_or_array(c * arr**a + d * (1.0 - arr) ** a - d, x)


@dataclass(frozen=True)
class BasisPerturbed:
    """A family member plus ``sum_j theta_j sin(j pi x)``."""

    base: Family
    theta: tuple = field(default=())

    def __post_init__(self):
        theta = tuple(float(t) for t in np.atleast_1d(np.asarray(self.theta, dtype=float)))
        if not all(math.isfinite(t) for t in theta):
            raise DomainViolation("perturbation coefficients must be finite")
        object.__setattr__(self, "theta", theta)

    def parametric(self):
        c, d, a, _ = self.base.parametric()
        return c, d, a, np.array(self.theta, dtype=float)

    def perturbation(self, x):
        arr = _check_open(x)
        out = np.zeros_like(arr)
        for j, t in enumerate(self.theta, start=1):
            out = out + t * np.sin(j * np.pi * arr)
        return _scalar_or_array(out, x)

    def __call__(self, x):
        arr = _check_open(x)
        return _scalar_or_array(np.asarray(self.base(arr)) + self.perturbation(arr), x)


@dataclass(frozen=True)
class Sampled:
    """Piecewise-linear interpolant through ``(nodes, values)``.

    Outside ``[nodes[0], nodes[-1]]`` the end values are held constant;
    :meth:`extrapolates` tells whether a set of arguments needed that.
    """

    nodes: tuple
    values: tuple

    def __post_init__(self):
        xs = np.asarray(self.nodes, dtype=float)
        vs = np.asarray(self.values, dtype=float)
        if xs.ndim != 1 or xs.shape != vs.shape or xs.size < 2:
            raise DomainViolation("sampled function needs >= 2 nodes with matching values")
        if not np.all((xs > 0.0) & (xs < 1.0)):
            raise DomainViolation("sample nodes must lie in (0, 1)")
        if not np.all(np.diff(xs) > 0):
            raise DomainViolation("sample nodes must be strictly increasing")
        if not np.all(np.isfinite(vs)):
            raise DomainViolation("sample values must be finite")
        object.__setattr__(self, "nodes", tuple(xs.tolist()))
        object.__setattr__(self, "values", tuple(vs.tolist()))

    @classmethod
    def from_csv(cls, path: Union[str, Path]) -> "Sampled":
        """Read a two-column ``x,value`` CSV with a header row."""
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header is None or [h.strip().lower() for h in header[:2]] != ["x", "value"]:
                raise DomainViolation(f"{path}: expected header 'x,value'")
            rows = [r for r in reader if r and any(cell.strip() for cell in r)]
        try:
            xs = [float(r[0]) for r in rows]
            vs = [float(r[1]) for r in rows]
        except (ValueError, IndexError) as exc:
            raise DomainViolation(f"{path}: malformed row ({exc})") from None
        return cls(tuple(xs), tuple(vs))

    def parametric(self):
        return None

    def extrapolates(self, x) -> bool:
        arr = np.asarray(x, dtype=float)
        return bool(np.any((arr < self.nodes[0]) | (arr > self.nodes[-1])))

    def __call__(self, x):
        arr = _check_open(x)
        return _scalar_or_array(np.interp(arr, self.nodes, self.values), x)


EvaluableFunction = Union[Family, BasisPerturbed, Sampled]


def eval_family(params: SolutionParams, alpha: float, x: float) -> float:
    return Family(params, alpha)(x)


def eval_closed_family(params: SolutionParams, alpha: float, x):
    """Closed-domain extension: 0 at x = 0, c - d at x = 1, the family inside."""
    a = check_alpha(alpha)
    arr = np.asarray(x, dtype=float)
    if not np.all((arr >= 0.0) & (arr <= 1.0)):
        raise DomainViolation("argument must lie in [0, 1]")
    inner = (arr > 0.0) & (arr < 1.0)
    out = np.where(arr == 1.0, params.c - params.d, 0.0)
    if inner.any():
        xi = arr[inner] if arr.ndim else arr
        vals = params.c * xi**a + params.d * (1.0 - xi) ** a - params.d
        if arr.ndim:
            out[inner] = vals
        else:
            out = vals
    return _scalar_or_array(np.asarray(out, dtype=float), x)


def _rows(p) -> np.ndarray:
    if isinstance(p, SimplexPoint):
        return p.as_array()
    return np.asarray(p, dtype=float)


def entropy_alpha(alpha: float, p):
    """Entropy of degree alpha, ``(sum p_i**alpha - 1) / (2**(1-alpha) - 1)``.

    ``p`` is a :class:`SimplexPoint` or an ``(N, n)`` array of simplex rows
    (already validated by the caller).
    """
    a = check_alpha(alpha)
    P = _rows(p)
    s = _power(P, a).sum(axis=-1)
    out = (s - 1.0) / (2.0 ** (1.0 - a) - 1.0)
    return float(out) if np.ndim(out) == 0 else out


def eval_J(params: JParams, alpha: float, p):
    a = check_alpha(alpha)
    P = _rows(p)
    first = P[..., 0]
    out = params.a * np.asarray(entropy_alpha(a, P)) + params.b * (_power(first, a) - 1.0)
    return float(out) if np.ndim(out) == 0 else out


def eval_function(f: Callable, x):
    """Evaluate any test function on (0, 1), rejecting arguments outside it."""
    _check_open(x)
    return f(x)


def params_from_fit(c: float, d: float, alpha: float) -> JParams:
    """(a, b) of the comparison measures whose 2-point kernel is the (c, d) family member."""
    a = check_alpha(alpha)
    return JParams((2.0 ** (1.0 - a) - 1.0) * c, d - c)


def family_from_jparams(params: JParams, alpha: float) -> Family:
    """Inverse of :func:`params_from_fit`: the kernel ``x -> J_2(1 - x, x)``."""
    a = check_alpha(alpha)
    k = 2.0 ** (1.0 - a) - 1.0
    c = params.a / k
    return Family.of(c, c + params.b, a)
