import random

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from isoprofile.ball import (
    build_ball,
    classify_growth,
    dump_ball,
    iter_spheres,
    load_ball,
    neighborhood,
    parse_ball,
    word_length,
)
from isoprofile.errors import ResourceBudgetError, UsageError
from isoprofile.groups import ALL_SPECS
from isoprofile.madic import MAdic

from oracles import brute_force_lengths


@pytest.mark.parametrize("spec", ALL_SPECS + ("zd:d=1", "lamplighter:p=3", "heis:gen=center"))
def test_bfs_matches_word_enumeration(spec):
    ball = build_ball(spec, 5)
    oracle = brute_force_lengths(spec, 5)
    assert set(ball.elements) == set(oracle)
    assert all(word_length(ball, g) == n for g, n in oracle.items())


def test_growth_examples():
    assert build_ball("zd:d=1", 3).growth == [1, 3, 5, 7]
    assert build_ball("zd:d=2", 2).growth[2] == 13
    ball = build_ball("lamplighter:p=2", 1)
    assert ball.growth[1] == 4
    assert set(ball.elements) == {(0, ()), (1, ()), (-1, ()), (0, ((0, 1),))}


def test_lamplighter_growth_regression():
    # frozen from this BFS, cross-checked against word enumeration for r <= 5
    assert build_ball("lamplighter:p=2", 10).growth == [1, 4, 10, 22, 44, 84, 155, 278, 490, 850, 1457]


def test_word_length_examples():
    assert word_length(build_ball("zd:d=1", 6), (5,)) == 5
    assert word_length(build_ball("bs:m=2", 5), (0, MAdic(4, 0, 2))) == 4
    assert word_length(build_ball("heis", 4), (0, 0, 1)) == 4
    assert word_length(build_ball("zd:d=1", 3), (5,)) is None


@pytest.mark.parametrize("spec", ALL_SPECS)
def test_ball_invariants(spec):
    ball = build_ball(spec, 4)
    G = ball.group
    n = len(ball)
    # ids in BFS order; lookup is the inverse of elements
    assert all(ball.lookup[g] == i for i, g in enumerate(ball.elements))
    assert np.all(np.diff(ball.sphere) >= 0)
    assert ball.growth[-1] == n
    # symmetry |g| = |g^-1|
    for g in ball.elements:
        assert word_length(ball, G.inv(g)) == word_length(ball, g)
    # adjacency involutive across inverse generators
    inv = G.inverse_index()
    for i, row in enumerate(ball.adjacency):
        src = np.nonzero(row >= 0)[0]
        assert np.array_equal(ball.adjacency[inv[i], row[src]], src)
        for x in src[:50]:
            assert ball.elements[row[x]] == G.mul(ball.elements[x], G.gens[i])
    assert ball.adjacency.shape == (len(G.gens), n)


@pytest.mark.parametrize("spec", ["heis", "bs:m=2", "lamplighter:p=2", "f2"])
@given(seed=st.integers(0, 10**6))
def test_word_length_subadditive(spec, seed):
    ball = build_ball(spec, 6)
    G = ball.group
    rng = random.Random(seed)
    a = ball.elements[rng.randrange(ball.growth[3])]
    b = ball.elements[rng.randrange(ball.growth[3])]
    assert word_length(ball, G.mul(a, b)) <= word_length(ball, a) + word_length(ball, b)


def test_left_translation_table():
    ball = build_ball("heis", 3)
    G = ball.group
    table = ball.translation("left")
    for i, s in enumerate(G.gens):
        for x, g in enumerate(ball.elements):
            y = table[i, x]
            h = G.mul(G.inv(s), g)
            assert (y == -1) == (h not in ball.lookup)
            if y >= 0:
                assert ball.elements[y] == h
    with pytest.raises(UsageError):
        ball.translation("up")


def test_build_is_deterministic():
    a, b = build_ball("bs:m=2", 5), build_ball("bs:m=2", 5)
    assert a.elements == b.elements
    assert np.array_equal(a.adjacency, b.adjacency)


def test_iter_spheres_agrees_with_ball():
    ball = build_ball("hall:q=2", 4)
    sizes = []
    for r, layer in iter_spheres("hall:q=2"):
        sizes.append(len(layer))
        if r == 4:
            break
    assert np.cumsum(sizes).tolist() == ball.growth


def test_growth_classes():
    z3 = build_ball("zd:d=3", 12).growth
    c = classify_growth(z3)
    assert c.kind == "polynomial" and c.degree == 3
    lamp = classify_growth(build_ball("lamplighter:p=2", 12).growth)
    assert lamp.kind == "exponential" and 0.3 <= lamp.rate <= 1.2
    assert classify_growth(build_ball("bs:m=2", 12).growth).kind == "exponential"
    with pytest.raises(UsageError):
        classify_growth([1, 3, 5])


def test_neighborhood_examples():
    for side in ("left", "right"):
        assert neighborhood("zd:d=1", [(0,)], 2, side) == {(k,) for k in range(-2, 3)}
    square = [(0, 0), (0, 1), (1, 0), (1, 1)]
    assert len(neighborhood("zd:d=2", square, 1)) == 12
    with pytest.raises(UsageError):
        neighborhood("zd:d=1", [(0,)], -1)


def test_neighborhood_sides_differ_in_nonabelian_groups():
    A = [(0, 0, 0), (1, 0, 0)]
    right = neighborhood("heis", A, 1, "right")
    left = neighborhood("heis", A, 1, "left")
    assert right != left and len(right) == len(left)


def test_cache_roundtrip(tmp_path):
    ball = build_ball("bs:m=2", 4)
    again = parse_ball(dump_ball(ball))
    assert again.elements == ball.elements and again.growth == ball.growth
    assert np.array_equal(again.adjacency, ball.adjacency)
    cached = build_ball("bs:m=2", 4, cache_dir=tmp_path)
    files = list(tmp_path.glob("*.ball"))
    assert len(files) == 1
    assert load_ball(files[0]).elements == cached.elements == ball.elements
    assert build_ball("bs:m=2", 4, cache_dir=tmp_path).elements == ball.elements
    with pytest.raises(UsageError):
        parse_ball(b"garbage")


def test_budget_error_reports_attained_radius():
    with pytest.raises(ResourceBudgetError) as info:
        build_ball("f2", 12, budget=200_000)
    assert 0 <= info.value.attained < 12
    with pytest.raises(ResourceBudgetError) as info:
        for _ in iter_spheres("f2", max_elements=100):
            pass
    assert info.value.attained == 3


def test_negative_radius():
    with pytest.raises(UsageError):
        build_ball("zd:d=1", -1)
