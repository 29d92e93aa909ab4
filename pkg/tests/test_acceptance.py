"""Acceptance criteria, one test each, at their stated tolerances and time limits.

Each test records a single PASS/FAIL line; ``conftest.py`` prints them in the
terminal summary. Run this file directly to get the same lines without pytest.
"""
import time

import numpy as np
import pytest

from infostab.analysis import SearchConfig, counterexample_search, distance_to_family, fit_family
from infostab.defect import (
    closed_fe_defect,
    cocycle_many,
    fe_defect_many,
    fe_defect_sup,
    g_symmetry_many,
    homogeneity_many,
    scaling_exponent,
)
from infostab.domain import ClosedD2Point, GridSpec, grid_line, nested_coords_many, sample_d2, sample_d3
from infostab.measures import BasisPerturbed, Family, SolutionParams, eval_closed_family, params_from_fit
from infostab.recursive import MeasureSequence, thm32_check

SEED = 20261019
NEGATIVE = (-3.0, -1.0, -0.5)


def _random_function(rng):
    fa = rng.uniform(-3, 3)
    theta = tuple(rng.normal(size=rng.integers(1, 7)))
    return BasisPerturbed(Family.of(*rng.normal(size=2), fa), theta)


def criterion_1():
    rng = np.random.default_rng(SEED)
    worst = 0.0
    for alpha in NEGATIVE:
        for _ in range(20):
            c, d = rng.normal(scale=3, size=2)
            worst = max(worst, fe_defect_sup(Family.of(c, d, alpha), alpha, GridSpec(200, 1e-3)).sup_relative)
    return worst <= 1e-10, f"max relative defect {worst:.3g} (limit 1e-10)"


def criterion_2():
    rng = np.random.default_rng(SEED + 2)
    qs = sample_d3(rng, 10_000)
    cocycle = 0.0
    for _ in range(10):
        r, s = cocycle_many(_random_function(rng), rng.uniform(-3, -0.1), qs)
        cocycle = max(cocycle, float(np.max(r / s)))
    pts = sample_d2(rng, 10_000)
    sym = 0.0
    for _ in range(10):
        f, alpha = _random_function(rng), rng.uniform(-3, -0.1)
        gap, scale = g_symmetry_many(f, alpha, pts[:, 0], pts[:, 1])
        d, _ = fe_defect_many(f, alpha, pts)
        sym = max(sym, float(np.max(np.abs(gap - d) / scale)))
    sides = nested_coords_many(qs)
    nested = float(np.max(np.abs(sides[:, 0] - sides[:, 1]) / np.maximum(1.0, np.abs(sides[:, 0]))))
    ok = cocycle <= 1e-12 and sym <= 1e-12 and nested <= 1e-14
    return ok, f"cocycle {cocycle:.3g}, symmetry gap vs defect {sym:.3g}, nested coords {nested:.3g}"


def criterion_3():
    rng = np.random.default_rng(SEED + 3)
    violations = pairs = 0
    for _ in range(100):
        qs = sample_d3(rng, 100)
        gap, bound, scale = homogeneity_many(_random_function(rng), rng.uniform(-3, -0.1), qs)
        violations += int(np.sum(gap > bound + 1e-12 * scale))
        pairs += len(qs)
    return violations == 0, f"{violations} violations in {pairs} pairs"


def criterion_4():
    sine = BasisPerturbed(Family.of(0, 0, -1), (1.0,))
    margins = (1e-2, 1e-3, 1e-4, 1e-5)
    ok, parts = True, []
    for alpha in (-2.0, -1.0, -0.5, 0.0, 0.5, 2.0):
        res = scaling_exponent(SolutionParams(1.0, 0.5), sine, 1e-3, alpha, margins)
        if alpha < 0:
            ok &= abs(res.slope - alpha) <= 0.15
        else:
            ok &= abs(res.slope) <= 0.1 and res.max_sup <= 4e-3
        parts.append(f"{alpha:g}:{res.slope:+.3f}")
    return ok, "slopes " + " ".join(parts)


def criterion_5():
    hyper = counterexample_search(SearchConfig(-1.0, 1e-3, grid=GridSpec(150, 1e-3), basis_size=6, restarts=8))
    stable = counterexample_search(SearchConfig(0.0, 1e-3, grid=GridSpec(150, 1e-3), basis_size=6, restarts=8))
    ok = hyper.ratio <= 0.05 and stable.ratio >= 0.125
    return ok, f"distance/eps {hyper.ratio:.4f} at alpha=-1, {stable.ratio:.4f} at alpha=0"


def criterion_6():
    rng = np.random.default_rng(SEED + 6)
    worst_rel, violations = 0.0, 0
    for alpha in NEGATIVE:
        c, d = rng.normal(scale=2, size=2)
        jp = params_from_fit(c, d, alpha)
        plain = MeasureSequence(Family.of(c, d, alpha), alpha)
        worst_rel = max(worst_rel, max(r.max_relative_gap for r in thm32_check(plain, jp, 8, 24)))
        for sign in (1.0, -1.0):
            noisy = MeasureSequence.with_uniform_noise(Family.of(c, d, alpha), alpha, 1e-3, 8, sign)
            violations += sum(not r.ok for r in thm32_check(noisy, jp, 8, 24))
    ok = worst_rel <= 1e-9 and violations == 0
    return ok, f"unperturbed relative gap {worst_rel:.3g}, {violations} perturbed violations"


def criterion_7():
    rng = np.random.default_rng(SEED + 7)
    exact, worst = True, 0.0
    # both boundary families y = 0 and y = 1 - x, plus the corner (0, 0)
    pairs = [(x, y) for x in np.linspace(0.0, 1.0, 101)[1:-1] for y in (0.0, 1.0 - x)] + [(0.0, 0.0)]
    for alpha in NEGATIVE:
        c, d = rng.normal(scale=3, size=2)
        p = SolutionParams(c, d)
        exact &= eval_closed_family(p, alpha, 0.0) == 0.0 and eval_closed_family(p, alpha, 1.0) == c - d
        for x, y in pairs:
            dft, s = closed_fe_defect(p, alpha, ClosedD2Point(x, y))
            worst = max(worst, dft / s if s > 0 else dft)
    return exact and worst <= 1e-10, f"endpoints exact: {exact}, boundary relative defect {worst:.3g}"


def criterion_8():
    rng = np.random.default_rng(SEED + 8)
    fit_err, dist_rel = 0.0, 0.0
    spec = GridSpec(200, 1e-3)
    for alpha in NEGATIVE:
        for _ in range(10):
            c, d = rng.normal(scale=3, size=2)
            f = Family.of(c, d, alpha)
            xs = np.linspace(0.01, 0.99, 50)
            res = fit_family(xs, f(xs), alpha)
            fit_err = max(fit_err, abs(res.params.c - c), abs(res.params.d - d))
            scale = float(np.abs(f(grid_line(spec))).max())
            dist_rel = max(dist_rel, distance_to_family(f, alpha, spec).dist_sup / scale)
    ok = fit_err <= 1e-8 and dist_rel <= 1e-10
    return ok, f"parameter error {fit_err:.3g}, distance/scale {dist_rel:.3g}"


CRITERIA = [
    (1, "family exactness", criterion_1, 5.0),
    (2, "algebraic identities", criterion_2, 10.0),
    (3, "homogeneity inequality", criterion_3, 10.0),
    (4, "trichotomy scaling", criterion_4, 30.0),
    (5, "counterexample search contrast", criterion_5, 120.0),
    (6, "cumulative bound on I_n - J_n", criterion_6, 30.0),
    (7, "closed-domain extension", criterion_7, 1.0),
    (8, "fit round trip", criterion_8, 1.0),
]


def run_criterion(fn, limit):
    t0 = time.perf_counter()
    ok, detail = fn()
    elapsed = time.perf_counter() - t0
    ok = bool(ok) and elapsed < limit
    return ok, f"{detail}; {elapsed:.2f}s (limit {limit:g}s)"


def _line(num, name, ok, detail):
    return f"[{'PASS' if ok else 'FAIL'}] criterion {num} {name}: {detail}"


@pytest.mark.parametrize("num,name,fn,limit", CRITERIA, ids=[f"c{c[0]}" for c in CRITERIA])
def test_acceptance(num, name, fn, limit, acceptance_log):
    ok, detail = run_criterion(fn, limit)
    line = _line(num, name, ok, detail)
    acceptance_log.append(line)
    print(line)
    assert ok, line


if __name__ == "__main__":
    for num, name, fn, limit in CRITERIA:
        print(_line(num, name, *run_criterion(fn, limit)), flush=True)
