"""Exact transfer mechanisms between a group and its quotients or subgroups.

* ``push_down``: the fiberwise L^p norm ``Psi f(q) = (sum_{g -> q} |f(g)|^p)^(1/p)``
  along a quotient map, an isometry that contracts translation differences;
* ``restrict_to_cosets``: the decomposition of a function along the left
  cosets ``gH`` of a subgroup, with the leafwise gradient dominated by the
  ambient one;
* ``compression``: how far the embedding of ``H = Z`` distorts lengths.

Everything is checked on p-th powers in rational arithmetic.  The one place
where p-th roots cannot be avoided (differences of fiber norms) uses
certified integer-root intervals.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .ball import BallIndex, build_ball, iter_spheres
from .errors import NumericalError, ResourceBudgetError, UsageError
from .groups import as_group, coset_key, inclusion_map, quotient_map
from .isoperimetry import FunctionOnBall, gradient

# ---------------------------------------------------------------------------
# certified p-th roots
# ---------------------------------------------------------------------------


def iroot(n: int, p: int) -> int:
    """``floor(n ** (1/p))`` for integers ``n >= 0``, ``p >= 1``."""
    if n < 0:
        raise ValueError("negative radicand")
    if p == 1 or n < 2:
        return n
    if p == 2:
        return math.isqrt(n)
    x = 1 << -(-n.bit_length() // p)  # >= true root
    while True:
        y = ((p - 1) * x + n // x ** (p - 1)) // p
        if y >= x:
            break
        x = y
    while x**p > n:
        x -= 1
    while (x + 1) ** p <= n:
        x += 1
    return x


def root_interval(a: Fraction, p: int, bits: int) -> tuple[Fraction, Fraction]:
    """Interval of width ``2^-bits`` containing ``a ** (1/p)`` for rational ``a >= 0``."""
    scale = 1 << bits
    L = iroot((a.numerator << (bits * p)) // a.denominator, p)
    lo = Fraction(L, scale)
    hi = lo if lo**p == a else Fraction(L + 1, scale)
    return lo, hi


# ---------------------------------------------------------------------------
# Push-down along quotients
# ---------------------------------------------------------------------------


@dataclass
class PushDown:
    """``Psi f`` stored through its p-th powers ``(Psi f)^p`` (exact rationals)."""

    G: object
    Q: object
    p: int
    powers: dict  # quotient element -> sum over the fiber of |f|^p

    def norm_pow(self) -> Fraction:
        return sum(self.powers.values(), Fraction(0))

    def support(self) -> set:
        return {q for q, v in self.powers.items() if v != 0}

    def value(self, q) -> float:
        return float(self.powers.get(q, 0)) ** (1.0 / self.p)

    def on_ball(self, index: BallIndex) -> FunctionOnBall:
        """``(Psi f)^p`` as an exact function on a quotient ball."""
        missing = [q for q in self.powers if q not in index.lookup]
        if missing:
            raise UsageError(f"{len(missing)} quotient points lie outside the ball of radius {index.radius}")
        return FunctionOnBall.from_mapping(index, self.powers)


def _check_p(p) -> int:
    if not isinstance(p, int) or p < 1:
        raise UsageError(f"transfer identities need an integer p >= 1, got {p!r}")
    return p


def _as_mapping(f) -> dict:
    """Nonzero values of ``f`` keyed by element (accepts FunctionOnBall or dict)."""
    if isinstance(f, FunctionOnBall):
        if not f.exact:
            raise UsageError("push-down needs exact values")
        els = f.index.elements
        out = {els[i]: f.values[i] for i in f.support()}
        out.update({g: v for g, v in f.outside.items() if v != 0})
        return out
    return {g: Fraction(v) for g, v in f.items() if v != 0}


def push_down(G, Q, f, p: int) -> PushDown:
    p = _check_p(p)
    Gg, Qg = as_group(G), as_group(Q)
    proj = quotient_map(Gg, Qg)
    powers: dict = {}
    for g, v in _as_mapping(f).items():
        q = proj(g)
        powers[q] = powers.get(q, Fraction(0)) + abs(v) ** p
    return PushDown(Gg, Qg, p, powers)


@dataclass
class ContractionCheck:
    generator: str
    lhs_exact: Fraction  # contribution of fibers where the bound is an equality
    lhs_interval: tuple  # certified enclosure of the remaining fibers
    rhs: Fraction  # ||lambda(s) f - f||_p^p
    holds: bool
    bits: int


def _fibers(proj, mapping: dict) -> dict:
    out: dict = {}
    for g, v in mapping.items():
        out.setdefault(proj(g), {})[g] = v
    return out


def _proportional(u: dict, v: dict) -> bool:
    """``u = c v`` with ``c >= 0`` (or one of them zero) on a common index set."""
    if not u or not v:
        return True
    if u.keys() != v.keys():
        return False
    g0 = next(iter(v))
    c = u[g0] / v[g0]
    return c > 0 and all(u[g] == c * v[g] for g in v)


def contraction_check(G, Q, f, p: int, label: str, max_bits: int = 4096) -> ContractionCheck:
    """``||lambda(t) Psi f - Psi f||_p^p <= ||lambda(s) f - f||_p^p`` for ``s = gen(label)``.

    Fiberwise the bound is the reverse triangle inequality for the L^p norm
    on a fiber; it is an equality exactly when the two fiber vectors are
    nonnegatively proportional, and those fibers are summed exactly.  The
    others are enclosed in intervals refined until the comparison is decided.
    """
    p = _check_p(p)
    Gg, Qg = as_group(G), as_group(Q)
    proj = quotient_map(Gg, Qg)
    s = Gg.gen(label)
    base = _as_mapping(f)
    moved = {Gg.mul(s, g): v for g, v in base.items()}  # (lambda(s) f)(x) = f(s^-1 x)
    fb, fm = _fibers(proj, base), _fibers(proj, moved)
    rhs = Fraction(0)
    for g in set(base) | set(moved):
        rhs += abs(moved.get(g, 0) - base.get(g, 0)) ** p
    exact = Fraction(0)
    pending = []
    for q in set(fb) | set(fm):
        u, v = fm.get(q, {}), fb.get(q, {})
        if _proportional(u, v):
            # equality in the reverse triangle inequality: |‖u‖ - ‖v‖|^p = ‖u - v‖^p
            exact += sum((abs(u.get(g, 0) - v.get(g, 0)) ** p for g in set(u) | set(v)), Fraction(0))
        else:
            pending.append((sum((abs(x) ** p for x in u.values()), Fraction(0)),
                            sum((abs(x) ** p for x in v.values()), Fraction(0))))
    if p == 1:
        lhs = exact + sum((abs(a - b) for a, b in pending), Fraction(0))
        return ContractionCheck(label, lhs, (Fraction(0), Fraction(0)), rhs, lhs <= rhs, 0)
    bits = 32
    while True:
        lo_sum = hi_sum = Fraction(0)
        for a, b in pending:
            a1, a2 = root_interval(a, p, bits)
            b1, b2 = root_interval(b, p, bits)
            lo = max(Fraction(0), a1 - b2, b1 - a2)
            hi = max(abs(a1 - b2), abs(a2 - b1))
            lo_sum += lo**p
            hi_sum += hi**p
        if exact + hi_sum <= rhs:
            return ContractionCheck(label, exact, (lo_sum, hi_sum), rhs, True, bits)
        if exact + lo_sum > rhs:
            return ContractionCheck(label, exact, (lo_sum, hi_sum), rhs, False, bits)
        if bits >= max_bits:
            raise NumericalError("contraction comparison undecided", residual=float(hi_sum - lo_sum))
        bits *= 2


@dataclass
class PsiReport:
    G: str
    Q: str
    p: int
    trials: int
    isometry_ok: int  # number of trials with exact norm equality
    support_ok: int
    contraction_ok: int
    failures: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.isometry_ok == self.support_ok == self.contraction_ok == self.trials


def random_function(index: BallIndex, rng: random.Random, radius: int | None = None,
                    density: float = 0.3, scale: int = 5) -> FunctionOnBall:
    """Exact random function on ``B(e, radius)`` with small rational values of both signs.

    Values are occasionally repeated across points so that equality cases
    of the inequalities are exercised as well.
    """
    radius = index.radius if radius is None else radius
    n = index.growth[radius]
    f = FunctionOnBall.zeros(index, exact=True)
    pool = [Fraction(rng.randint(-scale, scale), rng.randint(1, 3)) for _ in range(4)]
    for i in range(n):
        if rng.random() < density:
            f.values[i] = rng.choice(pool) if rng.random() < 0.3 else Fraction(rng.randint(-scale, scale), rng.randint(1, 4))
    return f


def psi_trials(G, Q, p: int, trials: int, radius: int = 4, seed: int = 0) -> PsiReport:
    Gg, Qg = as_group(G), as_group(Q)
    proj = quotient_map(Gg, Qg)
    index = build_ball(Gg, radius)
    rng = random.Random(seed)
    rep = PsiReport(str(Gg.spec), str(Qg.spec), p, trials, 0, 0, 0)
    for trial in range(trials):
        f = random_function(index, rng)
        psi = push_down(Gg, Qg, f, p)
        if psi.norm_pow() == f.norm_pow(p):
            rep.isometry_ok += 1
        else:
            rep.failures.append((trial, "isometry"))
        supp = {proj(index.elements[i]) for i in f.support()}
        if psi.support() == supp:
            rep.support_ok += 1
        else:
            rep.failures.append((trial, "support"))
        checks = [contraction_check(Gg, Qg, f, p, lab) for lab in Gg.labels]
        if all(c.holds for c in checks):
            rep.contraction_ok += 1
        else:
            rep.failures.append((trial, "contraction"))
    return rep


# ---------------------------------------------------------------------------
# Coset decomposition
# ---------------------------------------------------------------------------


@dataclass
class CosetDecomposition:
    index: BallIndex
    H: object
    kind: str | None
    leaves: dict  # coset label -> ids (ascending)
    subgens: list  # images of H's generators in G
    adjacency: dict  # coset label -> (|S_H|, |leaf|) array of ids, -1 outside the ball

    def leaf_of(self) -> np.ndarray:
        """Leaf number of each ball element (in the order of ``leaves``)."""
        out = np.full(len(self.index), -1, dtype=np.int64)
        for j, ids in enumerate(self.leaves.values()):
            out[ids] = j
        return out


def coset_decomposition(index: BallIndex, H, kind: str | None = None) -> CosetDecomposition:
    G = index.group
    Hg = as_group(H)
    key = coset_key(Hg, G, kind)
    emb = inclusion_map(Hg, G, kind)
    subgens = [emb(s) for s in Hg.gens]
    groups: dict = {}
    for i, g in enumerate(index.elements):
        groups.setdefault(key(g), []).append(i)
    leaves = {k: np.array(v, dtype=np.int64) for k, v in groups.items()}
    adjacency = {}
    for k, ids in leaves.items():
        tab = np.empty((len(subgens), len(ids)), dtype=np.int64)
        for j, s in enumerate(subgens):
            tab[j] = [index.lookup.get(G.mul(index.elements[i], s), -1) for i in ids]
        adjacency[k] = tab
    return CosetDecomposition(index, Hg, kind, leaves, subgens, adjacency)


def leaf_scale(G, H, kind: str | None = None) -> int:
    """``h' = max_s |embed(s)|_G`` over generators of ``H``: leaf steps are ambient ``h'``-steps."""
    Gg, Hg = as_group(G), as_group(H)
    emb = inclusion_map(Hg, Gg, kind)
    targets = {emb(s) for s in Hg.gens}
    found = {}
    for r, sphere in iter_spheres(Gg, max_elements=2_000_000):
        for g in sphere:
            if g in targets:
                found[g] = r
        if len(found) == len(targets):
            return max(found.values())
    raise ResourceBudgetError("subgroup generators not reached")  # pragma: no cover


@dataclass
class CosetReport:
    p: int
    norm_pow: Fraction
    leaf_norm_pows: dict  # leaf label -> ||f_z||_p^p
    identity_ok: bool
    h: int  # ambient gradient scale
    gradient_ok: bool  # |grad f_z|(x) <= |grad f|_h(x) everywhere
    strict_points: int  # points where the leaf gradient is strictly smaller

    @property
    def ok(self) -> bool:
        return self.identity_ok and self.gradient_ok


def restrict_to_cosets(G, H, f: FunctionOnBall, p: int = 2, kind: str | None = None,
                       decomposition: CosetDecomposition | None = None) -> CosetReport:
    p = _check_p(p)
    index = f.index
    Gg = index.group
    if as_group(G).spec != Gg.spec:
        raise UsageError("f does not live on a ball of G")
    if not f.exact:
        raise UsageError("coset decomposition checks need exact values")
    dec = decomposition or coset_decomposition(index, H, kind)
    leaf_pows = {}
    for k, ids in dec.leaves.items():
        leaf_pows[k] = sum((abs(v) ** p for v in f.values[ids] if v != 0), Fraction(0))
    total = f.norm_pow(p)
    identity_ok = sum(leaf_pows.values(), Fraction(0)) == total

    # leaf gradient: within-coset neighbors x * embed(s); ambient gradient at scale h'
    h = leaf_scale(Gg, dec.H, dec.kind)
    amb = gradient(index, f, h, "right")
    mapping = {index.elements[i]: f.values[i] for i in f.support()}
    dom = set(mapping)
    inv_sub = [Gg.inv(s) for s in dec.subgens]
    for y in list(mapping):
        dom.update(Gg.mul(y, s) for s in inv_sub)
    ok, strict = True, 0
    for x in dom:
        fx = mapping.get(x, 0)
        leaf = max(abs(mapping.get(Gg.mul(x, s), 0) - fx) for s in dec.subgens)
        i = index.lookup.get(x)
        ag = amb.values[i] if i is not None else amb.outside.get(x, 0)
        if leaf > ag:
            ok = False
        elif leaf < ag:
            strict += 1
    return CosetReport(p, total, leaf_pows, identity_ok, h, ok, strict)


# ---------------------------------------------------------------------------
# Compression
# ---------------------------------------------------------------------------


@dataclass
class CompressionPoint:
    t: int
    lower: int
    upper: int
    kind: str  # "exact" when lower == upper, else "bounds"
    witness: int | None = None  # an h = n realizing the upper bound


@dataclass
class CompressionCurve:
    H: str
    G: str
    kind: str | None
    rmax: int
    g_radius: int  # radius up to which ambient lengths are exact
    lipschitz: int  # max |embed(s)|_G over generators of H
    truncated: bool  # some lengths only bounded (ambient ball budget)
    points: list = field(default_factory=list)

    def values(self) -> list:
        return [pt.upper for pt in self.points]


def _h_length(H, h) -> int:
    """Word length in ``H = Z`` (standard generators)."""
    return abs(h[0])


def compression(H, G, rmax: int, kind: str | None = None, max_elements: int = 1_500_000,
                g_radius: int | None = None) -> CompressionCurve:
    """``rho(t) = min { |embed(h)|_G : t <= |h|_H <= rmax }`` for ``t = 1..rmax``.

    Ambient lengths are exact for elements found by breadth-first search
    (radius auto-chosen as the longest normal-form witness, capped by
    ``max_elements``); beyond it they are bracketed between the search
    radius + 1 and the witness length.
    """
    Hg, Gg = as_group(H), as_group(G)
    if not (Hg.spec.kind == "zd" and Hg.d == 1):
        raise UsageError("compression is implemented for H = Z")
    emb = inclusion_map(Hg, Gg, kind)
    hs = range(-rmax, rmax + 1)
    images = {n: emb((n,)) for n in hs}
    witness = {n: len(Gg.word(images[n])) for n in hs}
    target_radius = max(witness.values()) if g_radius is None else g_radius
    exact: dict = {}
    lookup = {g: n for n, g in images.items()}
    reached = -1
    try:
        for r, sphere in iter_spheres(Gg, max_elements=max_elements):
            for g in sphere:
                n = lookup.get(g)
                if n is not None:
                    exact[n] = r
            reached = r
            if r >= target_radius or len(exact) == len(images):
                break
    except ResourceBudgetError as err:
        reached = err.attained
    lip = max(witness_len_exact(Gg, emb((s[0],))) for s in Hg.gens)
    lo = {n: exact.get(n, reached + 1) for n in hs}
    up = {n: exact.get(n, witness[n]) for n in hs}
    curve = CompressionCurve(str(Hg.spec), str(Gg.spec), kind, rmax, reached, lip,
                             len(exact) < len(images))
    # suffix minima over |h| >= t
    best_lo = best_up = None
    wit = None
    pts = []
    for t in range(rmax, 0, -1):
        for n in (t, -t):
            if best_lo is None or lo[n] < best_lo:
                best_lo = lo[n]
            if best_up is None or up[n] < best_up:
                best_up, wit = up[n], n
        pts.append(CompressionPoint(t, best_lo, best_up, "exact" if best_lo == best_up else "bounds", wit))
    curve.points = pts[::-1]
    return curve


def witness_len_exact(G, g) -> int:
    """Exact word length of a single (short) element by breadth-first search."""
    for r, sphere in iter_spheres(G, max_elements=2_000_000):
        if g in sphere:
            return r
    raise ResourceBudgetError("element not reached")  # pragma: no cover


def monotone(values: list) -> bool:
    return all(a <= b for a, b in zip(values, values[1:]))
