"""Alpha-recursive measure sequences built from a two-point kernel, their
recursion and semi-symmetry defects, and a replay of the cumulative error
bound against the (a, b) comparison measures.

Kernel convention: the sequence stores ``f(x) = I_2(1 - x, x)``, so
``I_2(p_1, p_2) = f(p_2)``. Level ``n > 2`` is built by merging the first two
probabilities:

    I_n(p) = I_{n-1}(p_1 + p_2, p_3, ...) + (p_1 + p_2)^a f(p_2 / (p_1 + p_2)) + delta_n(p)

Budgets are indexed the same way as the stability statement: the level-n
perturbation is bounded by ``eps_{n-1}``; the semi-symmetry tolerance lives in
slot 1.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Optional

import numpy as np

from . import _kernels
from .domain import SimplexPoint, check_alpha, grid_simplex_array
from .errors import BudgetViolation, DomainViolation
from .measures import JParams, eval_J

BUDGET_RTOL = 1e-12


@dataclass(frozen=True)
class EpsilonBudget:
    """``levels = (eps_2, eps_3, ...)``; ``semisymmetry`` is the eps_1 slot."""

    levels: tuple = ()
    semisymmetry: float = 0.0

    def __post_init__(self):
        levels = tuple(float(e) for e in self.levels)
        if any(not (e >= 0 and math.isfinite(e)) for e in levels + (self.semisymmetry,)):
            raise DomainViolation("epsilon budgets must be finite and non-negative")
        object.__setattr__(self, "levels", levels)
        object.__setattr__(self, "semisymmetry", float(self.semisymmetry))

    @classmethod
    def uniform(cls, eps: float, n_max: int, semisymmetry: float = 0.0) -> "EpsilonBudget":
        return cls(tuple([eps] * max(n_max - 2, 0)), semisymmetry)

    def eps(self, k: int) -> float:
        if k == 1:
            return self.semisymmetry
        if k < 1:
            raise DomainViolation(f"budget index must be >= 1, got {k}")
        i = k - 2
        return self.levels[i] if i < len(self.levels) else 0.0

    def cumulative(self, n: int) -> float:
        """``sum_{k=2}^{n-1} eps_k`` (zero for n = 2)."""
        return math.fsum(self.eps(k) for k in range(2, n))


@dataclass(frozen=True)
class SimplexPerturbation:
    """``delta(p) = amplitude * sign * prod_i sin(pi p_i) / sin(pi/n)**n``.

    The product of sines over the simplex peaks at the uniform point (log sin
    is concave), so ``|delta| <= amplitude`` everywhere and the bound is
    attained at the centre.
    """

    n: int
    amplitude: float
    sign: float = 1.0

    def __call__(self, P) -> np.ndarray:
        P = np.atleast_2d(np.asarray(P, dtype=float))
        if P.shape[1] != self.n:
            raise DomainViolation(f"perturbation defined on level {self.n}, got {P.shape[1]} coordinates")
        peak = math.sin(math.pi / self.n) ** self.n
        return self.amplitude * math.copysign(1.0, self.sign) * np.prod(np.sin(np.pi * P), axis=1) / peak


@dataclass(frozen=True)
class MeasureSequence:
    kernel: Callable
    alpha: float
    perturbations: Mapping[int, Callable] = field(default_factory=dict)
    budget: EpsilonBudget = field(default_factory=EpsilonBudget)

    def __post_init__(self):
        object.__setattr__(self, "alpha", check_alpha(self.alpha))
        for n in self.perturbations:
            if n < 3:
                raise DomainViolation("perturbations apply to levels n >= 3")
        object.__setattr__(self, "perturbations", dict(self.perturbations))

    @classmethod
    def with_uniform_noise(cls, kernel, alpha: float, eps: float, n_max: int, sign: float = 1.0):
        """Sequence whose every level n in 3..n_max carries a perturbation of sup norm ``eps``."""
        budget = EpsilonBudget.uniform(eps, n_max)
        perts = {n: SimplexPerturbation(n, eps, sign) for n in range(3, n_max + 1)}
        return cls(kernel, alpha, perts, budget)

    def unperturbed(self) -> "MeasureSequence":
        return MeasureSequence(self.kernel, self.alpha)


def _rows(p) -> np.ndarray:
    if isinstance(p, SimplexPoint):
        return p.as_array()[None, :]
    P = np.atleast_2d(np.asarray(p, dtype=float))
    if P.shape[1] < 2:
        raise DomainViolation("measure arguments need at least 2 coordinates")
    if not np.all((P > 0) & (P < 1)):
        raise DomainViolation("probabilities must lie in (0, 1)")
    if not np.all(np.abs(P.sum(axis=1) - 1.0) <= 1e-12):
        raise DomainViolation("probabilities must sum to 1")
    return P


def _kernel_values(seq: MeasureSequence, x: np.ndarray) -> np.ndarray:
    return np.asarray(seq.kernel(x), dtype=float)


def _recursion(seq: MeasureSequence, P: np.ndarray, kernels=None) -> np.ndarray:
    par = getattr(seq.kernel, "parametric", lambda: None)()
    if par is not None:
        k = kernels if kernels is not None else _kernels.active()
        c, d, fa, theta = par
        return k.recursion(np.ascontiguousarray(P), seq.alpha, float(c), float(d), float(fa),
                           np.ascontiguousarray(theta, dtype=float))
    n = P.shape[1]
    s = P[:, 0].copy()
    total = np.zeros(P.shape[0])
    for k in range(1, n - 1):
        s_new = s + P[:, k]
        total = total + s_new**seq.alpha * _kernel_values(seq, P[:, k] / s_new)
        s = s_new
    return _kernel_values(seq, P[:, n - 1]) + total


def _perturbation(seq: MeasureSequence, m: int, V: np.ndarray) -> np.ndarray:
    delta = seq.perturbations.get(m)
    if delta is None:
        return np.zeros(V.shape[0])
    vals = np.asarray(delta(V), dtype=float).reshape(V.shape[0])
    cap = seq.budget.eps(m - 1)
    if np.any(np.abs(vals) > cap * (1.0 + BUDGET_RTOL) + 1e-300):
        raise BudgetViolation(f"level-{m} perturbation exceeds its budget {cap}")
    return vals


def eval_measure_rows(seq: MeasureSequence, P, kernels=None) -> np.ndarray:
    """``I_n`` for every row of an ``(N, n)`` array of simplex points."""
    P = _rows(P)
    out = _recursion(seq, P, kernels)
    if seq.perturbations:
        n = P.shape[1]
        # the level-m vector is (S_{n-m+1}, p_{n-m+2}, ..., p_n)
        for m in range(n, 2, -1):
            if m not in seq.perturbations:
                continue
            head = P[:, : n - m + 1].sum(axis=1) if n - m + 1 > 1 else P[:, 0]
            V = np.column_stack([head, P[:, n - m + 1 :]])
            out = out + _perturbation(seq, m, V)
    return out


def eval_measure(seq: MeasureSequence, p) -> float:
    return float(eval_measure_rows(seq, p)[0])


def _merge(P: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    s = P[:, 0] + P[:, 1]
    return np.column_stack([s, P[:, 2:]]), s


def recursivity_defect_rows(seq: MeasureSequence, P) -> tuple[np.ndarray, np.ndarray]:
    """|I_n(p) - I_{n-1}(p_1+p_2, p_3, ...) - (p_1+p_2)^a I_2(ratio)| and local scale."""
    P = _rows(P)
    if P.shape[1] < 3:
        raise DomainViolation("the recursion defect needs n >= 3")
    top = eval_measure_rows(seq, P)
    merged, s = _merge(P)
    lower = eval_measure_rows(seq, merged)
    pair = s**seq.alpha * _kernel_values(seq, P[:, 1] / s)
    resid = np.abs(top - lower - pair)
    scale = np.maximum(np.maximum(np.abs(top), np.abs(lower)), np.abs(pair))
    return resid, scale


def recursivity_defect(seq: MeasureSequence, p) -> float:
    return float(recursivity_defect_rows(seq, p)[0][0])


def semisymmetry_defect_rows(seq: MeasureSequence, P) -> tuple[np.ndarray, np.ndarray]:
    P = _rows(P)
    if P.shape[1] != 3:
        raise DomainViolation("semi-symmetry is a statement about n = 3")
    a = eval_measure_rows(seq, P)
    b = eval_measure_rows(seq, P[:, [0, 2, 1]])
    return np.abs(a - b), np.maximum(np.abs(a), np.abs(b))


def semisymmetry_defect(seq: MeasureSequence, p) -> float:
    return float(semisymmetry_defect_rows(seq, p)[0][0])


def kernel_stability_eps(eps: EpsilonBudget) -> float:
    """Equation-defect budget of the kernel: ``2 eps_2 + eps_1``."""
    return 2.0 * eps.eps(2) + eps.eps(1)


def kernel_from_sequence(seq: MeasureSequence):
    """The kernel ``x -> I_2(1 - x, x)``."""
    return seq.kernel


@dataclass
class LevelCheck:
    n: int
    max_gap: float
    max_relative_gap: float
    bound: float
    n_points: int
    ok: bool

    def to_dict(self) -> dict:
        return dict(self.__dict__)


CHECK_RTOL = 1e-10


def thm32_check(seq: MeasureSequence, params: JParams, n_max: int, m: int) -> list[LevelCheck]:
    """For n = 2..n_max compare I_n with J_n on ``grid_simplex(n, m)``.

    A level passes when every grid point satisfies
    ``|I_n - J_n| <= sum_{k=2}^{n-1} eps_k + 1e-10 * scale``.
    """
    if n_max < 2:
        raise DomainViolation("n_max must be >= 2")
    rows = []
    for n in range(2, n_max + 1):
        P = grid_simplex_array(n, m)
        I = eval_measure_rows(seq, P)
        J = eval_J(params, seq.alpha, P)
        gap = np.abs(I - J)
        scale = np.maximum(np.maximum(np.abs(I), np.abs(J)), 1.0)
        bound = seq.budget.cumulative(n)
        ok = bool(np.all(gap <= bound + CHECK_RTOL * scale))
        rows.append(LevelCheck(n, float(gap.max()), float((gap / scale).max()), bound, len(P), ok))
    return rows
