import math
import random
from fractions import Fraction

import numpy as np
import pytest
import scipy.sparse.linalg
from hypothesis import given
from hypothesis import strategies as st

from isoprofile.ball import build_ball
from isoprofile.errors import NumericalError, UsageError
from isoprofile.groups import ALL_SPECS
from isoprofile.isoperimetry import (
    FunctionOnBall,
    ProfileCurve,
    ProfilePoint,
    dirichlet_operator,
    gradient,
    grad_norms,
    inverse_iteration,
    j1_candidate,
    j2_spectral,
    jinf_inradius,
    parse_p,
    profile_in_balls,
    sobolev_check,
    translation_diff_pow,
)


@pytest.fixture(scope="module")
def z():
    return build_ball("zd:d=1", 12)


@pytest.fixture(scope="module")
def z2():
    return build_ball("zd:d=2", 10)


@pytest.fixture(scope="module")
def lamp():
    return build_ball("lamplighter:p=2", 6)


def as_dict(f):
    d = {f.index.elements[i]: f.values[i] for i in f.support()}
    d.update({g: v for g, v in f.outside.items() if v})
    return d


# gradient --------------------------------------------------------------------------


def test_gradient_of_interval_indicator(z):
    f = FunctionOnBall.indicator(z, [(k,) for k in range(4)])
    g = gradient(z, f)
    assert as_dict(g) == {(-1,): 1, (0,): 1, (3,): 1, (4,): 1}
    assert gradient(z, f, side="left").values.tolist() == g.values.tolist()


def test_gradient_of_tent_on_z2(z2):
    f = FunctionOnBall.from_mapping(
        z2, {g: 3 - abs(g[0]) - abs(g[1]) for g in z2.elements if abs(g[0]) + abs(g[1]) <= 3}
    )
    g = as_dict(gradient(z2, f))
    collar = {x for x in z2.elements if abs(x[0]) + abs(x[1]) <= 3}
    assert set(g) == collar
    assert set(g.values()) == {1}


def test_gradient_constant_interior_vanishes_off_collar(z2):
    ids = z2.ball_ids(5)
    f = FunctionOnBall.zeros(z2)
    f.values[ids] = Fraction(7)
    g = gradient(z2, f)
    assert set(z2.sphere[g.support()]) == {5, 6}


def test_gradient_reports_points_beyond_the_ball():
    ball = build_ball("zd:d=1", 3)
    f = FunctionOnBall.indicator(ball, [(3,)])
    g = gradient(ball, f)
    assert g.truncated and g.outside == {(4,): 1}


def test_gradient_scale_two(z):
    f = FunctionOnBall.indicator(z, [(0,)])
    g = as_dict(gradient(z, f, h=2))
    assert g == {(k,): 1 for k in range(-2, 3)}
    with pytest.raises(UsageError):
        gradient(z, f, h=0)


@given(seed=st.integers(0, 10**6))
def test_gradient_scale_one_paths_agree(seed):
    ball = build_ball("heis", 5)
    rng = random.Random(seed)
    f = FunctionOnBall.zeros(ball)
    for i in rng.sample(range(ball.growth[3]), 12):
        f.values[i] = Fraction(rng.randint(-5, 5), rng.randint(1, 4))
    fast = gradient(ball, f, 1)
    from isoprofile.isoperimetry import _gradient_scale

    slow = _gradient_scale(ball, f, 1, "right")
    assert as_dict(fast) == as_dict(slow)


# gradient norms --------------------------------------------------------------------


def test_delta_norms_on_z(z):
    f = FunctionOnBall.indicator(z, [(0,)])
    n = grad_norms(z, f, 1)
    assert n.pointwise_pow == 3
    assert n.max_pow == 2
    inf = grad_norms(z, f, math.inf)
    assert inf.max_form == inf.avg_form == inf.pointwise_form == 1


def random_function(index, rng, k=15):
    f = FunctionOnBall.zeros(index)
    for i in rng.sample(range(index.growth[index.radius - 1]), k):
        f.values[i] = Fraction(rng.randint(-9, 9), rng.randint(1, 5))
    return f


@pytest.mark.parametrize("p", [1, 2, 3, math.inf])
def test_sandwich_inequalities(lamp, p):
    rng = random.Random(7)
    n_gens = len(lamp.group.gens)
    for _ in range(100):
        f = random_function(lamp, rng)
        assert grad_norms(lamp, f, p).sandwich_ok(n_gens)


@pytest.mark.parametrize("spec", ["heis", "bs:m=2"])
def test_sandwich_left_side(spec):
    ball = build_ball(spec, 4)
    rng = random.Random(3)
    for _ in range(20):
        f = random_function(ball, rng, 8)
        assert grad_norms(ball, f, 2, side="left").sandwich_ok(len(ball.group.gens))


def test_translation_differences_brute_force():
    ball = build_ball("bs:m=2", 4)
    G = ball.group
    rng = random.Random(11)
    f = random_function(ball, rng, 10)
    vals = as_dict(f)
    for i, s in enumerate(G.gens):
        pts = set(vals) | {G.mul(x, G.inv(s)) for x in vals}
        expect = sum(abs(vals.get(x, 0) - vals.get(G.mul(x, s), 0)) ** 2 for x in pts)
        assert translation_diff_pow(ball, f, 2)[i] == expect


# J2 ------------------------------------------------------------------------------


def test_j2_small_examples(z):
    res = j2_spectral(z, [(-1,), (0,), (1,)])
    assert res.lambda_min == pytest.approx(1 - math.sqrt(2) / 2, abs=1e-12)
    assert res.j2avg == pytest.approx(1.847759, abs=1e-6)
    single = j2_spectral(z, [(0,)])
    assert single.lambda_min == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("r", [1, 2, 5, 12])
def test_j2_closed_form_on_z(z, r):
    res = j2_spectral(z, z.ball_ids(r))
    assert res.lambda_min == pytest.approx(1 - math.cos(math.pi / (2 * r + 2)), abs=1e-12)


@pytest.mark.parametrize("spec", ALL_SPECS)
def test_j2_against_independent_matrix(spec):
    # oracle: operator assembled from group multiplication, eigenvalues by numpy
    ball = build_ball(spec, 3)
    G = ball.group
    A = ball.elements[: ball.growth[2]]
    pos = {g: i for i, g in enumerate(A)}
    M = np.eye(len(A))
    for g, i in pos.items():
        for s in G.gens:
            j = pos.get(G.mul(g, s))
            if j is not None:
                M[i, j] -= 1 / len(G.gens)
    lam = np.linalg.eigvalsh(M)[0]
    res = j2_spectral(ball, A)
    assert res.lambda_min == pytest.approx(lam, abs=1e-12)


def test_j2_witness_rayleigh_quotient(lamp):
    res = j2_spectral(lamp, lamp.ball_ids(4))
    f = FunctionOnBall.zeros(lamp, exact=False)
    f.values[res.ids] = res.witness
    n = grad_norms(lamp, f, 2)
    # avg_form^2 = 2 <f, (I - P) f> for a symmetric generating set
    ratio = f.norm(2) / n.avg_form
    assert ratio == pytest.approx(res.avg_ratio, rel=1e-10)
    assert res.residual < 1e-10
    # the rationalised witness has the same Rayleigh quotient to high accuracy
    q = f.as_exact()
    exact = grad_norms(lamp, q, 2)
    assert float(exact.avg_pow / q.norm_pow(2)) / 2 == pytest.approx(res.lambda_min, abs=1e-10)


def test_dirichlet_monotone_in_the_domain(lamp):
    lams = [j2_spectral(lamp, lamp.ball_ids(r)).lambda_min for r in range(6)]
    assert all(a >= b for a, b in zip(lams, lams[1:]))


def test_inverse_iteration_matches_eigsh():
    ball = build_ball("zd:d=2", 40)
    ids = ball.ball_ids(36)
    assert len(ids) > 2000
    res = j2_spectral(ball, ids)
    assert res.method == "inverse-iteration" and res.residual < 1e-10
    M = dirichlet_operator(ball, ids)
    ref = scipy.sparse.linalg.eigsh(M, k=1, sigma=0, which="LM", return_eigenvectors=False)[0]
    assert res.lambda_min == pytest.approx(ref, abs=1e-10)


def test_inverse_iteration_cap_raises():
    M = dirichlet_operator(build_ball("zd:d=1", 30), np.arange(61))
    with pytest.raises(NumericalError) as info:
        inverse_iteration(M, max_iter=1, tol=1e-300)
    assert info.value.residual > 0


# J_inf and J_1 ---------------------------------------------------------------------


@pytest.mark.parametrize("spec", ALL_SPECS)
def test_inradius_of_balls(spec):
    ball = build_ball(spec, 5)
    for r in range(5):
        assert jinf_inradius(ball, ball.ball_ids(r)) == r + 1


def test_inradius_examples(z2):
    square = [(a, b) for a in range(5) for b in range(5)]
    assert jinf_inradius(z2, square) == 3
    assert jinf_inradius(z2, [(0, 0)]) == 1
    with pytest.raises(UsageError):
        jinf_inradius(z2, z2.ball_ids(10))


def test_inradius_equals_ratio_of_distance_function(z2):
    square = [(a, b) for a in range(5) for b in range(5)]
    d = {g: min(abs(g[0] - x) + abs(g[1] - y) for x in range(-1, 6) for y in range(-1, 6)
                if not (0 <= x < 5 and 0 <= y < 5)) for g in square}
    f = FunctionOnBall.from_mapping(z2, d)
    assert gradient(z2, f).norm(math.inf) == 1
    assert f.norm(math.inf) == jinf_inradius(z2, square)


@pytest.mark.parametrize("n", [1, 4, 9])
def test_j1_interval(z, n):
    assert j1_candidate(z, [(k,) for k in range(n + 1)]) == Fraction(n + 1, 4)


def test_j1_single_point(z):
    # one inner point, two outer points
    assert j1_candidate(z, [(0,)]) == Fraction(1, 3)


def test_j1_square(z2):
    assert j1_candidate(z2, [(0, 0), (0, 1), (1, 0), (1, 1)]) == Fraction(1, 3)


# curves ------------------------------------------------------------------------------


def test_profile_inradius_linear_on_z():
    curve = profile_in_balls("zd:d=1", "inf", 8, "inradius")
    assert curve.values() == [r + 1 for r in range(9)]
    assert curve.exact_nondecreasing()


def test_profile_spectral_on_z():
    curve = profile_in_balls("zd:d=1", 2, 10, "spectral")
    for pt in curve.points:
        r = pt.argument
        assert pt.value == pytest.approx((1 - math.cos(math.pi / (2 * r + 2))) ** -0.5, rel=1e-10)


def test_profile_candidates_lower_bounds():
    curve = profile_in_balls("zd:d=1", 1, 6, "candidates")
    assert curve.values() == [Fraction(1, 3)] + [Fraction(2 * r + 1, 4) for r in range(1, 7)]
    assert all(pt.bound_kind == "lower" for pt in curve.points)


def test_profile_method_mismatch():
    with pytest.raises(UsageError):
        profile_in_balls("zd:d=1", 1, 3, "spectral")
    with pytest.raises(UsageError):
        profile_in_balls("zd:d=1", 2, 3, "bogus")


def test_curve_roundtrips():
    curve = ProfileCurve("heis", math.inf, "pointwise", "radius", [
        ProfilePoint(0, 1, "inradius", "exact", 1),
        ProfilePoint(1, Fraction(7, 3), "candidates", "lower", 5),
        ProfilePoint(2, 0.1 + 0.2, "spectral", "exact", None),
    ])
    assert ProfileCurve.from_json(curve.to_json()) == curve
    assert ProfileCurve.from_csv(curve.to_csv({"seed": 0})) == curve


def test_parse_p():
    assert parse_p("inf") == math.inf and parse_p("3") == 3
    for bad in ("0", "x", "-1"):
        with pytest.raises(UsageError):
            parse_p(bad)


def test_sobolev_linear_on_z():
    curve = profile_in_balls("zd:d=1", "inf", 10, "inradius")
    rep = sobolev_check(curve, "linear", offset=1)
    assert rep.C == pytest.approx(1.0) and rep.max_violation <= 1e-12
    fixed = sobolev_check(curve, "linear", C=0.5, Cp=1, offset=1)
    assert fixed.max_violation == pytest.approx(5.0)


def test_sobolev_constant_for_free_group():
    curve = profile_in_balls("f2", 2, 5, "spectral")
    rep = sobolev_check(curve, "constant")
    # lambda_min stays above 1 - sqrt(3)/2, so J2 stays below its inverse square root
    assert rep.C <= (1 - math.sqrt(3) / 2) ** -0.5
    assert rep.max_violation <= 1e-12


def test_sobolev_log_fit_excludes_nonpositive_points():
    pts = [ProfilePoint(v, math.log(v) + 1 if v > 1 else 1, "x", "lower") for v in (1, 2, 8, 64)]
    rep = sobolev_check(pts, "log")
    assert rep.max_violation <= 1e-9
    with pytest.raises(UsageError):
        sobolev_check(pts, "cubic")


@given(seed=st.integers(0, 10**6))
def test_dirichlet_energy_matches_quadratic_form(seed):
    from isoprofile.isoperimetry import dirichlet_energy

    ball = build_ball("bs:m=2", 5)
    rng = np.random.default_rng(seed)
    ids = ball.ball_ids(3)
    vec = rng.standard_normal(len(ids))
    M = dirichlet_operator(ball, ids)
    assert dirichlet_energy(ball, ids, vec) == pytest.approx(float(vec @ (M @ vec)), rel=1e-12)
