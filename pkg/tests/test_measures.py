import math
from fractions import Fraction

import numpy as np
import pytest

from infostab.domain import SimplexPoint, sample_d2
from infostab.errors import DomainViolation
from infostab.measures import (
    BasisPerturbed,
    Family,
    JParams,
    Sampled,
    SolutionParams,
    entropy_alpha,
    eval_closed_family,
    eval_family,
    eval_function,
    eval_J,
    family_from_jparams,
    params_from_fit,
)


@pytest.mark.parametrize(
    "c,d,alpha,x,expected",
    [
        (1, 0, -1, 0.5, 2.0),
        (0, 1, -1, 0.5, 1.0),
        (2, 3, -1, 0.25, 9.0),  # 2*4 + 3*(4/3) - 3
    ],
)
def test_eval_family_examples(c, d, alpha, x, expected):
    assert eval_family(SolutionParams(c, d), alpha, x) == pytest.approx(expected, rel=1e-15)


def test_eval_family_domain():
    with pytest.raises(DomainViolation):
        eval_family(SolutionParams(1, 0), -1, 1.0)
    with pytest.raises(DomainViolation):
        Family.of(1, 0, 1.0)


def test_closed_family_endpoints_and_interior():
    p = SolutionParams(5, 2)
    assert eval_closed_family(p, -2, 0.0) == 0.0
    assert eval_closed_family(p, -2, 1.0) == 3.0
    assert eval_closed_family(SolutionParams(1, 0), -1, 0.5) == 2.0
    xs = np.linspace(0.01, 0.99, 57)
    np.testing.assert_array_equal(eval_closed_family(p, -2, xs), Family(p, -2)(xs))
    with pytest.raises(DomainViolation):
        eval_closed_family(p, -2, 1.5)


def _entropy_fraction(alpha: int, p):
    # exact rational oracle for integer alpha
    s = sum(Fraction(q) ** alpha for q in p)
    return (s - 1) / (Fraction(2) ** (1 - alpha) - 1)


@pytest.mark.parametrize(
    "p,expected",
    [((0.5, 0.5), 1.0), ((0.5, 0.25, 0.25), 3.0)],
)
def test_entropy_examples(p, expected):
    assert entropy_alpha(-1, SimplexPoint(p)) == pytest.approx(expected, rel=1e-15)
    assert float(_entropy_fraction(-1, [Fraction(str(v)) for v in p])) == expected


@pytest.mark.parametrize("alpha", [-3.0, -1.0, -0.5, 0.0, 0.5, 2.0])
@pytest.mark.parametrize("n", [2, 3, 5, 10, 40])
def test_entropy_uniform_closed_form(alpha, n):
    got = entropy_alpha(alpha, SimplexPoint(tuple([1.0 / n] * n)))
    closed = (n ** (1 - alpha) - 1) / (2 ** (1 - alpha) - 1)
    direct = (math.fsum([(1.0 / n) ** alpha] * n) - 1) / (2 ** (1 - alpha) - 1)
    assert got == pytest.approx(closed, rel=1e-12)
    assert direct == pytest.approx(closed, rel=1e-12)
    if alpha == -1.0:
        assert got == pytest.approx((n * n - 1) / 3, rel=1e-12)


@pytest.mark.parametrize(
    "a,b,p,expected",
    [
        (1, 0, (0.5, 0.5), 1.0),
        (0, 1, (0.25, 0.75), 3.0),
        (2, 1, (0.5, 0.25, 0.25), 7.0),
    ],
)
def test_eval_J_examples(a, b, p, expected):
    assert eval_J(JParams(a, b), -1, SimplexPoint(p)) == pytest.approx(expected, rel=1e-15)


def test_eval_function_variants():
    assert eval_function(Family.of(1, 0, -1), 0.25) == pytest.approx(4.0)
    bp = BasisPerturbed(Family.of(0, 0, -1), (1e-3,))
    assert eval_function(bp, 0.5) == pytest.approx(1e-3, rel=1e-15)
    s = Sampled((0.25, 0.75), (1.0, 3.0))
    assert eval_function(s, 0.5) == 2.0
    with pytest.raises(DomainViolation):
        eval_function(s, 0.0)


def test_sampled_clamps_and_flags_extrapolation():
    s = Sampled((0.25, 0.75), (1.0, 3.0))
    assert s(0.1) == 1.0 and s(0.9) == 3.0
    assert s.extrapolates([0.1, 0.5]) and not s.extrapolates([0.3, 0.7])


def test_sampled_validation(tmp_path):
    with pytest.raises(DomainViolation):
        Sampled((0.5, 0.25), (1.0, 2.0))
    path = tmp_path / "f.csv"
    path.write_text("x,value\n0.1,1.0\n0.5,2.0\n0.9,4.0\n")
    s = Sampled.from_csv(path)
    assert s(0.3) == pytest.approx(1.5)
    bad = tmp_path / "g.csv"
    bad.write_text("a,b\n0.1,1\n")
    with pytest.raises(DomainViolation):
        Sampled.from_csv(bad)


@pytest.mark.parametrize(
    "c,d,alpha,a,b",
    [(1, 1, -1, 3, 0), (0, 0, -0.7, 0, 0), (1, 4, -2, 7, 3)],
)
def test_params_from_fit_examples(c, d, alpha, a, b):
    jp = params_from_fit(c, d, alpha)
    assert jp.a == pytest.approx(a, rel=1e-15, abs=0)
    assert jp.b == pytest.approx(b, rel=1e-15, abs=0)


def test_family_from_jparams_inverts(rng):
    for _ in range(20):
        c, d = rng.normal(size=2)
        alpha = -rng.uniform(0.1, 3)
        f = family_from_jparams(params_from_fit(c, d, alpha), alpha)
        assert f.params.c == pytest.approx(c, rel=1e-12, abs=1e-14)
        assert f.params.d == pytest.approx(d, rel=1e-12, abs=1e-14)


@pytest.mark.parametrize("alpha", [-3.0, -1.0, -0.5])
def test_family_satisfies_equation_randomly(alpha, rng):
    pts = sample_d2(rng, 10_000, margin=1e-3)
    x, y = pts.T
    c, d = 1.7, -0.6
    f = Family.of(c, d, alpha)
    t = np.stack([f(x), (1 - x) ** alpha * f(y / (1 - x)), f(y), (1 - y) ** alpha * f(x / (1 - y))])
    resid = np.abs(t[0] + t[1] - t[2] - t[3])
    assert (resid <= 1e-10 * np.abs(t).max(axis=0)).all()
