"""Independent reference computations used by several test modules."""

import itertools
from fractions import Fraction

from isoprofile.groups import as_group


def brute_force_lengths(spec, r):
    """Word length of every element of B(e, r), by evaluating all words of length <= r."""
    G = as_group(spec)
    labels = G.labels
    best = {}
    for n in range(r + 1):
        for word in itertools.product(labels, repeat=n):
            g = G.evaluate(word)
            if g not in best:
                best[g] = n
    return best


def step_distribution(mu, n):
    """mu^{*n} as a dict, by repeated explicit convolution with Fractions."""
    G = as_group(mu.group)
    dist = {G.identity: Fraction(1)}
    for _ in range(n):
        new = {}
        for g, p in dist.items():
            for s, w in mu.weights().items():
                h = G.mul(g, s)
                new[h] = new.get(h, 0) + p * w
        dist = new
    return dist
