"""Parameter recovery for the solution family, distance of a function to the
family span, and a penalised search for functions that nearly satisfy the
equation while staying far from every exact solution.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import NamedTuple, Optional

import numpy as np
from scipy.optimize import minimize

from .defect import fe_residual_many
from .domain import GridSpec, check_alpha, grid_d2_array, grid_line
from .errors import DomainViolation, SingularDesign
from .measures import BasisPerturbed, Family, SolutionParams

RANK_RTOL = 1e-12


def family_design(xs, alpha: float) -> np.ndarray:
    """Columns ``x**alpha`` and ``(1-x)**alpha - 1``."""
    x = np.asarray(xs, dtype=float)
    return np.column_stack([x**alpha, (1.0 - x) ** alpha - 1.0])


@dataclass
class FitResult:
    params: SolutionParams
    residual_l2: float
    residual_sup: float
    condition: float
    n_samples: int


def fit_family(xs, ys, alpha: float) -> FitResult:
    """Least-squares ``(c, d)`` for ``y = c x**a + d ((1-x)**a - 1)``.

    Solved by QR on the column-equilibrated design. ``condition`` is the
    2-norm condition number of that equilibrated design.
    """
    a = check_alpha(alpha)
    x = np.asarray(xs, dtype=float).ravel()
    y = np.asarray(ys, dtype=float).ravel()
    if x.shape != y.shape:
        raise DomainViolation("xs and ys must have the same length")
    if not np.all((x > 0) & (x < 1)):
        raise DomainViolation("sample abscissae must lie in (0, 1)")
    if np.unique(x).size < 2:
        raise SingularDesign("need at least two distinct sample points")
    A = family_design(x, a)
    norms = np.linalg.norm(A, axis=0)
    if np.any(norms == 0):
        raise SingularDesign("a design column vanishes on the sample set")
    As = A / norms
    sv = np.linalg.svd(As, compute_uv=False)
    if sv[-1] <= RANK_RTOL * sv[0]:
        raise SingularDesign(f"design columns are numerically dependent (sigma ratio {sv[-1] / sv[0]:.3g})")
    q, r = np.linalg.qr(As)
    beta = np.linalg.solve(r, q.T @ y) / norms
    resid = y - A @ beta
    return FitResult(
        params=SolutionParams(float(beta[0]), float(beta[1])),
        residual_l2=float(np.linalg.norm(resid)),
        residual_sup=float(np.abs(resid).max()),
        condition=float(sv[0] / sv[-1]),
        n_samples=int(x.size),
    )


class Distance(NamedTuple):
    dist_sup: float
    dist_l2: float
    best: SolutionParams


def _span_projector(xs: np.ndarray, alpha: float) -> tuple[np.ndarray, np.ndarray]:
    """Orthonormal basis of the family span on ``xs`` and the coefficient map.

    Rank-tolerant: for alpha = 0 the second column vanishes and the span
    collapses to the constants.
    """
    A = family_design(xs, alpha)
    norms = np.linalg.norm(A, axis=0)
    keep = norms > 0
    As = A[:, keep] / norms[keep]
    u, s, vt = np.linalg.svd(As, full_matrices=False)
    r = int(np.sum(s > RANK_RTOL * s[0])) if s.size else 0
    return u[:, :r], (vt[:r].T / s[:r]), keep, norms


def distance_to_family(f, alpha: float, spec: GridSpec) -> Distance:
    """Residual of ``f`` after least-squares projection onto the family span,
    sampled on ``m`` equispaced points of ``[h, 1 - h]``.

    ``dist_l2`` is the root-mean-square residual; ``dist_sup`` the largest.
    """
    a = check_alpha(alpha)
    xs = grid_line(spec)
    ys = np.asarray(f(xs), dtype=float)
    U, coef_map, keep, norms = _span_projector(xs, a)
    coeffs_scaled = coef_map @ (U.T @ ys)
    cd = np.zeros(2)
    cd[keep] = coeffs_scaled / norms[keep]
    resid = ys - U @ (U.T @ ys)
    return Distance(
        float(np.abs(resid).max()),
        float(np.sqrt(np.mean(resid**2))),
        SolutionParams(float(cd[0]), float(cd[1])),
    )


# -- counterexample search -------------------------------------------------------

OPTIMIZERS = ("nelder-mead", "coordinate")


@dataclass
class SearchConfig:
    alpha: float
    eps: float
    grid: GridSpec = field(default_factory=lambda: GridSpec(150, 1e-3))
    basis_size: int = 6
    optimizer: str = "nelder-mead"
    max_iters: int = 600
    seed: int = 0
    penalty_weight: float = 10.0
    restarts: int = 8

    def __post_init__(self):
        self.alpha = check_alpha(self.alpha)
        if not (self.eps >= 0 and math.isfinite(self.eps)):
            raise DomainViolation("eps must be finite and non-negative")
        if self.basis_size < 1:
            raise DomainViolation("basis_size must be >= 1")
        if self.optimizer not in OPTIMIZERS:
            raise DomainViolation(f"optimizer must be one of {OPTIMIZERS}")
        if self.max_iters < 1:
            raise DomainViolation("max_iters must be >= 1")
        if not self.penalty_weight > 0:
            raise DomainViolation("penalty_weight must be positive")
        if self.restarts < 1:
            raise DomainViolation("restarts must be >= 1")
        if self.seed < 0:
            raise DomainViolation("seed must be non-negative")

    @property
    def feasibility_tol(self) -> float:
        return self.eps * 1e-6 + 1e-12

    def to_dict(self) -> dict:
        d = asdict(self)
        d["grid"] = {"m": self.grid.m, "h": self.grid.h}
        return d


@dataclass
class SearchReport:
    best_distance: float
    best_defect: float
    best_coefficients: list
    iterations: int
    converged: bool
    history: list
    ratio: float = float("nan")

    def to_dict(self) -> dict:
        return {
            "best_distance": self.best_distance,
            "best_defect": self.best_defect,
            "best_coefficients": list(self.best_coefficients),
            "iterations": self.iterations,
            "converged": self.converged,
            "distance_over_eps": self.ratio,
            "history": [{"eval": i, "distance": d, "defect": e} for i, d, e in self.history],
        }


def _sine(j: int):
    return lambda x: np.sin(j * np.pi * np.asarray(x))


def search_function(theta, alpha: float) -> BasisPerturbed:
    """The candidate ``sum_j theta_j sin(j pi x)`` as an evaluable function."""
    return BasisPerturbed(Family(SolutionParams(0.0, 0.0), alpha), tuple(theta))


class _Objective:
    """Penalised objective with bookkeeping of the best feasible point seen."""

    def __init__(self, cfg: SearchConfig):
        self.cfg = cfg
        self.pts = grid_d2_array(cfg.grid)
        xs = grid_line(cfg.grid)
        U, _, _, _ = _span_projector(xs, cfg.alpha)
        phi = np.column_stack([np.sin(j * np.pi * xs) for j in range(1, cfg.basis_size + 1)])
        # residual of the sine basis after projecting out the family span
        self.resid_map = phi - U @ (U.T @ phi)
        # the equation residual is linear in f, so with a zero base the defect of
        # f_theta is |R theta| for the per-basis residual matrix R
        self.defect_map = np.column_stack(
            [
                fe_residual_many(_sine(j), cfg.alpha, self.pts)
                for j in range(1, cfg.basis_size + 1)
            ]
        )
        self.evals = 0
        self.best = (0.0, 0.0, np.zeros(cfg.basis_size))
        self.history = []

    def measure(self, theta: np.ndarray) -> tuple[float, float]:
        defect = float(np.abs(self.defect_map @ theta).max())
        dist = float(np.abs(self.resid_map @ theta).max())
        return dist, defect

    def __call__(self, theta) -> float:
        theta = np.asarray(theta, dtype=float)
        dist, defect = self.measure(theta)
        self.evals += 1
        cfg = self.cfg
        if defect <= cfg.eps + cfg.feasibility_tol and dist > self.best[0]:
            self.best = (dist, defect, theta.copy())
            self.history.append((self.evals, dist, defect))
        return -dist + cfg.penalty_weight * max(0.0, defect - cfg.eps)


def _coordinate_search(obj: _Objective, x0: np.ndarray, step: float, max_iters: int, tol: float):
    x = x0.copy()
    fx = obj(x)
    it = 0
    while it < max_iters and step > tol:
        it += 1
        improved = False
        for j in range(x.size):
            for sgn in (1.0, -1.0):
                trial = x.copy()
                trial[j] += sgn * step
                ft = obj(trial)
                if ft < fx:
                    x, fx, improved = trial, ft, True
                    break
        if not improved:
            step *= 0.5
    return it, step <= tol


def counterexample_search(cfg: SearchConfig) -> SearchReport:
    """Maximise the sup distance to the family over ``theta`` subject to
    ``sup defect <= eps``, via an exact penalty, from ``restarts`` seeded
    starting points. The first restart starts at theta = 0, which is always feasible.
    """
    obj = _Objective(cfg)
    rng = np.random.default_rng(cfg.seed)
    J = cfg.basis_size
    scale = cfg.eps if cfg.eps > 0 else 1e-6
    xtol = scale * 1e-7
    iterations = 0
    converged = False
    for r in range(cfg.restarts):
        start = np.zeros(J) if r == 0 else rng.normal(0.0, scale / 2, size=J)
        if cfg.optimizer == "nelder-mead":
            simplex = np.vstack([start, start + np.diag(rng.uniform(0.25, 1.0, size=J) * scale)])
            res = minimize(
                obj,
                start,
                method="Nelder-Mead",
                options={
                    "maxiter": cfg.max_iters,
                    "initial_simplex": simplex,
                    "xatol": xtol,
                    "fatol": scale * 1e-9,
                },
            )
            iterations += int(res.nit)
            converged = converged or bool(res.success)
        else:
            it, ok = _coordinate_search(obj, start, scale / 2, cfg.max_iters, xtol)
            iterations += it
            converged = converged or ok
    dist, defect, theta = obj.best
    ratio = dist / cfg.eps if cfg.eps > 0 else float("inf") if dist > 0 else 0.0
    return SearchReport(
        best_distance=float(dist),
        best_defect=float(defect),
        best_coefficients=[float(t) for t in theta],
        iterations=iterations,
        converged=converged,
        history=obj.history,
        ratio=float(ratio),
    )
