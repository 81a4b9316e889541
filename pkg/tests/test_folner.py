import math
from fractions import Fraction

import pytest

import isoprofile.folner as fol
from isoprofile.ball import build_ball, neighborhood
from isoprofile.errors import UsageError
from isoprofile.groups import as_group
from isoprofile.isoperimetry import FunctionOnBall, gradient


def test_window_sizes():
    assert (len(fol.construct("zd:d=2", None, 2).F), len(fol.construct("zd:d=2", None, 2).Fp)) == (25, 81)
    lamp = fol.construct("lamplighter:p=2", None, 2)
    assert (len(lamp.F), len(lamp.Fp)) == (2560, 4608)
    bs = fol.construct("bs:m=2", None, 2)
    assert (len(bs.F), len(bs.Fp)) == (5120, 27648)


@pytest.mark.parametrize("spec,n", [("lamplighter:p=2", 1), ("lamplighter:p=3", 1), ("bs:m=2", 1),
                                    ("bs:m=3", 1), ("heis", 2), ("zd:d=3", 2)])
def test_windows_enumerate_their_members(spec, n):
    pair = fol.construct(spec, None, n)
    for W in (pair.F, pair.Fp):
        elems = list(W)
        assert len(elems) == len(set(elems)) == len(W)
        assert all(x in W for x in elems)
        assert all(pair.group.contains(x) for x in elems)


@pytest.mark.parametrize("spec,n", [("lamplighter:p=2", 1), ("bs:m=2", 1), ("heis", 2), ("zd:d=2", 3)])
def test_closure_matches_neighborhood(spec, n):
    pair = fol.construct(spec, None, n)
    cl = fol.closure(pair, mode="exhaustive")
    assert cl.contained
    assert set(cl.layers) == neighborhood(spec, list(pair.F), n, "left")


@pytest.mark.parametrize("p,n", [(2, 1), (2, 2), (3, 1)])
def test_reduced_mode_agrees_with_exhaustive(p, n):
    pair = fol.construct(f"lamplighter:p={p}", None, n)
    ex = fol.check(f"lamplighter:p={p}", pair, mode="exhaustive", other_side=False)
    red = fol.check(f"lamplighter:p={p}", pair, mode="reduced", other_side=False)
    assert red.mode == "reduced" and ex.mode == "exhaustive"
    assert ex.neighborhood_ok and red.neighborhood_ok
    assert ex.layer_sizes == red.layer_sizes
    assert ex.test_ratios == red.test_ratios
    assert ex.indicator_ratio == red.indicator_ratio


def test_lamp_window_is_union_of_cosets():
    G = as_group("lamplighter:p=2")
    W = fol.LampWindow(G, 1, 1)
    sub = [(0, f) for (_, f) in fol.LampWindow(G, 0, 1)]
    reps = list(W.representatives())
    assert {G.mul(x, w) for x in reps for w in sub} == set(W)


@pytest.mark.parametrize("spec,nmax", [("zd:d=1", 6), ("zd:d=2", 4), ("zd:d=3", 3), ("heis", 3),
                                       ("lamplighter:p=2", 2), ("bs:m=2", 2)])
def test_builtin_families_pass(spec, nmax):
    for n in range(1, nmax + 1):
        rep = fol.check(spec, fol.construct(spec, None, n))
        assert rep.ok, rep.to_dict()
        assert rep.measured_c <= rep.claimed_c


@pytest.mark.parametrize("n", [1, 2])
def test_lamplighter_ratio_formula(n):
    rep = fol.check("lamplighter:p=2", fol.construct("lamplighter:p=2", None, n))
    assert rep.measured_c == Fraction(4 * n + 1, 2 * n + 1)


def test_bs_example_report():
    rep = fol.check("bs:m=2", fol.construct("bs:m=2", None, 2)).to_dict()
    assert rep["measuredC"] == "27/5"
    assert rep["neighborhoodOk"] and rep["diameterOk"]


def test_lamplighter_right_side_is_not_controlled():
    # the windows are built for left multiplication; right neighborhoods move the cursor frame
    rep = fol.check("lamplighter:p=2", fol.construct("lamplighter:p=2", None, 1))
    assert rep.other_side_ok is False


@pytest.mark.parametrize("spec,n", [("zd:d=1", 3), ("zd:d=2", 2), ("heis", 2), ("lamplighter:p=2", 1), ("bs:m=2", 1)])
@pytest.mark.parametrize("p", [1, 2, 3])
def test_test_function_ratio_lower_bound(spec, n, p):
    pair = fol.construct(spec, None, n)
    tf = fol.test_function(pair)
    assert tf.ratio_pow(p) >= Fraction(n**p) / pair.C


def test_zd_test_function_sup_ratio():
    tf = fol.test_function(fol.construct("zd:d=1", None, 3))
    assert tf.exact_ratio(math.inf) == 3


@pytest.mark.parametrize("spec,n", [("zd:d=1", 4), ("zd:d=2", 2), ("heis", 1)])
def test_test_function_against_ball_gradient(spec, n):
    # oracle: the same function evaluated on an enumerated ball with the generic gradient
    pair = fol.construct(spec, None, n)
    tf = fol.test_function(pair)
    G = pair.group
    R = max(len(G.word(x)) for x in pair.Fp) + 2
    ball = build_ball(G, R)
    f = FunctionOnBall.from_mapping(ball, {x: tf.value(x) for x in tf.closure.layers if tf.value(x)})
    g = gradient(ball, f, side="left")
    assert not g.truncated
    assert g.norm_pow(1) == tf.grad_count
    for p in (1, 2):
        assert Fraction(f.norm_pow(p), g.norm_pow(p)) == tf.ratio_pow(p)


def test_generic_pair_detects_failure():
    F = [(0,)]
    good = fol.generic_pair("zd:d=1", 2, F, [(k,) for k in range(-2, 3)], C=5, K=1)
    rep = fol.check("zd:d=1", good)
    assert rep.ok and rep.measured_c == 5
    bad = fol.generic_pair("zd:d=1", 2, F, [(k,) for k in range(-1, 2)], C=5, K=1)
    rep = fol.check("zd:d=1", bad)
    assert not rep.neighborhood_ok and not rep.ok
    assert rep.witness in {(-2,), (2,)}
    with pytest.raises(UsageError):
        fol.test_function(bad)
    tight = fol.generic_pair("zd:d=1", 2, F, [(k,) for k in range(-2, 3)], C=4, K=1)
    assert not fol.check("zd:d=1", tight).ratio_ok


def test_construct_errors():
    with pytest.raises(UsageError):
        fol.construct("f2", None, 1)
    with pytest.raises(UsageError):
        fol.construct("heis", "bs_windows", 1)
    with pytest.raises(UsageError):
        fol.construct("heis", None, 0)
    with pytest.raises(UsageError):
        fol.construct("heis", "bogus", 1)


def test_analytic_length_bounds_dominate_enumeration():
    for spec, n in [("lamplighter:p=2", 1), ("lamplighter:p=3", 1), ("bs:m=2", 1), ("heis", 2)]:
        pair = fol.construct(spec, None, n)
        G = pair.group
        exact = max(len(G.word(x)) for x in pair.Fp)
        assert pair.Fp.length_bound() >= exact


def test_normal_form_lengths_are_upper_bounds():
    pair = fol.construct("bs:m=2", None, 1)
    ball = build_ball("bs:m=2", 12)
    for x in pair.Fp:
        if x in ball.lookup:
            assert int(ball.sphere[ball.lookup[x]]) <= len(pair.group.word(x))


def test_cs_upper_formula():
    V = [1, 3, 5, 7, 9, 11]
    assert fol.volume_radius(V, 6) == 3
    assert fol.cs_upper(V, 3, 1) == 4 * 3
    assert fol.cs_upper(V, 2, 2) == 2 * 4
    assert fol.cs_upper(V, 100, 1) is None


def test_folner_profile_bound_lamplighter():
    res = fol.folner_profile_bound("lamplighter:p=2", None, 2, 1)
    assert all(r.ok for r in res.reports)
    for rep, pt in zip(res.reports, res.in_balls.points):
        assert pt.value >= Fraction(rep.n) / rep.claimed_c
        assert pt.argument <= rep.claimed_k * rep.n
    assert res.overlay_ok and res.bound_ok
    assert res.lower_c > 0
