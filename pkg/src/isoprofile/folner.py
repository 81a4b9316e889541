"""Controlled Følner pairs: construction, mechanical verification, test functions.

A controlled Følner pair at scale ``n`` is a pair of finite sets ``F ⊆ F'``
with the ``n``-step neighborhood of ``F`` (on a declared side) inside ``F'``,
``|F'| <= C |F|`` and ``F' ⊆ B(e, K n)``.  The layered function
``f = max(0, n - layer)`` then has ``||f||_p / || |grad f|_1 ||_p >= n / C^(1/p)``.

Windows are described by membership predicates with exact sizes, so large
windows never need to be materialized just to be measured.  Some windows are
unions of right cosets ``x W`` of a finite subgroup ``W``; left
multiplication commutes with right multiplication by ``W``, so for those the
left-side closure can be run on canonical coset representatives (the
``reduced`` mode), with each representative standing for ``|W|`` elements.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator

from .errors import ResourceBudgetError, UsageError
from .groups import Group, MAdic, _balanced_digits, as_group
from .isoperimetry import ProfileCurve, ProfilePoint, parse_p

EXHAUSTIVE_LIMIT = 400_000
ENUMERATE_LENGTH_LIMIT = 200_000


# ---------------------------------------------------------------------------
# Windows
# ---------------------------------------------------------------------------


class Window:
    """A finite element set given by a predicate, an enumerator and its size."""

    group: Group
    #: key identifying the right-stabilizing finite subgroup, if any
    stable_key = None
    stable_order = 1

    def __contains__(self, x) -> bool:
        raise NotImplementedError

    def __iter__(self) -> Iterator:
        raise NotImplementedError

    def __len__(self) -> int:
        raise NotImplementedError

    def coset_rep(self, x):
        """Canonical representative of ``x W``."""
        return x

    def representatives(self) -> Iterator:
        """Canonical representatives of the ``W``-cosets making up the window."""
        return iter(self)

    def length_bound(self) -> int | None:
        """Documented upper bound on word length over the window (standard generators)."""
        return None

    def length_is_exact(self) -> bool:
        """Whether ``group.word`` is a geodesic, so enumerated lengths are exact."""
        return False


class ZdCube(Window):
    def __init__(self, group: Group, R: int):
        self.group, self.R = group, R

    def __contains__(self, x):
        return all(abs(c) <= self.R for c in x)

    def __iter__(self):
        rng = range(-self.R, self.R + 1)
        return iter(itertools.product(rng, repeat=self.group.d))

    def __len__(self):
        return (2 * self.R + 1) ** self.group.d

    def length_bound(self):
        return self.group.d * self.R if self.group.spec.gen == "std" else self.R

    def length_is_exact(self):
        return self.group.spec.gen == "std"


class LampWindow(Window):
    """``{(k, f) : |k| <= K, supp f ⊆ [-L, L]}`` with lamps in the cursor frame.

    Right multiplication by ``(0, g)`` with ``supp g ⊆ [-L, L]`` adds ``g`` to
    the lamps, so the window is a union of right cosets of that subgroup.
    """

    def __init__(self, group: Group, K: int, L: int):
        self.group, self.K, self.L = group, K, L
        self.stable_key = ("lamp", L)
        self.stable_order = group.p ** (2 * L + 1)

    def __contains__(self, x):
        k, f = x
        return abs(k) <= self.K and all(abs(pos) <= self.L for pos, _ in f)

    def __iter__(self):
        p, L = self.group.p, self.L
        positions = range(-L, L + 1)
        for k in range(-self.K, self.K + 1):
            for vals in itertools.product(range(p), repeat=2 * L + 1):
                yield (k, tuple((pos, v) for pos, v in zip(positions, vals) if v))

    def __len__(self):
        return (2 * self.K + 1) * self.stable_order

    def coset_rep(self, x):
        k, f = x
        return (k, tuple(item for item in f if abs(item[0]) > self.L))

    def representatives(self):
        return ((k, ()) for k in range(-self.K, self.K + 1))

    def length_bound(self):
        # word length is lamp cost plus sweep length, both monotone in the
        # lamp support, so the fully lit windows are the longest elements
        G = self.group
        if G.spec.gen != "std":
            return None
        v = G.p // 2
        full = tuple((pos, v) for pos in range(-self.L, self.L + 1))
        return max(len(G.word((k, full))) for k in range(-self.K, self.K + 1))

    def length_is_exact(self):
        return self.group.spec.gen == "std"


class BSWindow(Window):
    """``{(k, P) : |k| <= K, val(P) >= -E, lo <= P < hi}`` in BS(1, m)."""

    def __init__(self, group: Group, K: int, E: int, lo: int, hi: int):
        self.group, self.K, self.E, self.lo, self.hi = group, K, E, lo, hi
        self.scale = group.m**E

    def __contains__(self, x):
        k, P = x
        if abs(k) > self.K or P.exp > self.E:
            return False
        N = P.num * P.base ** (self.E - P.exp)
        return self.lo * self.scale <= N < self.hi * self.scale

    def __iter__(self):
        m, E = self.group.m, self.E
        for k in range(-self.K, self.K + 1):
            for N in range(self.lo * self.scale, self.hi * self.scale):
                yield (k, MAdic(N, E, m))

    def __len__(self):
        return (2 * self.K + 1) * (self.hi - self.lo) * self.scale

    def length_bound(self):
        # normal form t^(k-e) x_word(N) t^e with N in balanced base-m digits
        G = self.group
        if G.spec.gen != "std":
            return None
        m = G.m
        B = max(abs(self.lo), abs(self.hi)) * self.scale
        D = len(_balanced_digits(B, m)) + 1
        return (self.K + self.E) + self.E + (m // 2) * D + 2 * (D - 1)


class HeisBox(Window):
    """``{(a, b, c) : |a|, |b| <= A, |c| <= Cz}``."""

    def __init__(self, group: Group, A: int, Cz: int):
        self.group, self.A, self.Cz = group, A, Cz

    def __contains__(self, x):
        a, b, c = x
        return abs(a) <= self.A and abs(b) <= self.A and abs(c) <= self.Cz

    def __iter__(self):
        r = range(-self.A, self.A + 1)
        rc = range(-self.Cz, self.Cz + 1)
        return iter(itertools.product(r, r, rc))

    def __len__(self):
        return (2 * self.A + 1) ** 2 * (2 * self.Cz + 1)

    def length_bound(self):
        G = self.group
        if G.spec.gen != "std":
            return None
        worst = max(len(G.central_word(c)) for c in range(-(self.Cz + self.A**2), self.Cz + self.A**2 + 1))
        return 2 * self.A + worst


class ExplicitWindow(Window):
    def __init__(self, group: Group, elements: Iterable):
        self.group = group
        self.elements = frozenset(elements)

    def __contains__(self, x):
        return x in self.elements

    def __iter__(self):
        return iter(sorted(self.elements, key=self.group.serialize))

    def __len__(self):
        return len(self.elements)


# ---------------------------------------------------------------------------
# Pairs and families
# ---------------------------------------------------------------------------


@dataclass
class FolnerPair:
    n: int
    F: Window
    Fp: Window
    name: str
    C: Fraction  # claimed bound on |F'| / |F|
    K: int | None  # claimed diameter factor: F' ⊆ B(e, K n)
    side: str = "left"

    @property
    def group(self) -> Group:
        return self.F.group


FAMILIES = {
    "zd_cubes": "zd",
    "lamplighter_windows": "lamplighter",
    "bs_windows": "bs",
    "heisenberg_boxes": "heis",
}


def default_family(spec) -> str:
    kind = as_group(spec).spec.kind
    for fam, k in FAMILIES.items():
        if k == kind:
            return fam
    raise UsageError(f"no built-in Følner family for {kind}; use generic_pair with explicit windows")


def construct(spec, family: str | None, n: int, side: str | None = None) -> FolnerPair:
    """Built-in controlled Følner pair of the given family at scale ``n``."""
    G = as_group(spec)
    family = family or default_family(G)
    if family not in FAMILIES:
        raise UsageError(f"unknown family {family!r}; choose from {sorted(FAMILIES)} or use generic_pair")
    if FAMILIES[family] != G.spec.kind:
        raise UsageError(f"family {family} does not apply to {G.spec}")
    if n < 1:
        raise UsageError("n must be >= 1")
    if family == "zd_cubes":
        d = G.d
        return FolnerPair(n, ZdCube(G, n), ZdCube(G, 2 * n), family, Fraction(2**d), 2 * d, side or "left")
    if side not in (None, "left"):
        raise UsageError(f"{family} is constructed for the left side")
    if family == "lamplighter_windows":
        K = 8 + 5 * (G.p // 2)
        return FolnerPair(n, LampWindow(G, n, 2 * n), LampWindow(G, 2 * n, 2 * n), family, Fraction(2), K)
    if family == "bs_windows":
        m = G.m
        w = m ** (3 * n)
        F = BSWindow(G, n, 2 * n, 0, w)
        Fp = BSWindow(G, 2 * n, 2 * n, -w, 2 * w)
        return FolnerPair(n, F, Fp, family, Fraction(15, 2), 6 + 8 * (m // 2 + 2))
    # heisenberg_boxes
    return FolnerPair(n, HeisBox(G, n, n * n), HeisBox(G, 2 * n, 5 * n * n), family, Fraction(20), 24)


def generic_pair(spec, n: int, F: Iterable, Fp: Iterable, C, K=None, side: str = "left",
                 name: str = "generic") -> FolnerPair:
    """A user-supplied candidate pair from explicit element lists (checked, never trusted)."""
    G = as_group(spec)
    if side not in ("left", "right"):
        raise UsageError("side must be left or right")
    return FolnerPair(n, ExplicitWindow(G, F), ExplicitWindow(G, Fp), name, Fraction(C), K, side)


# ---------------------------------------------------------------------------
# Closure and test functions
# ---------------------------------------------------------------------------


@dataclass
class Closure:
    """Layers of the ``n``-step neighborhood of ``F`` (keys are coset reps in reduced mode)."""

    layers: dict
    weight: int
    n: int
    contained: bool  # every layer stays in F'
    witness: object = None  # first element found outside F'

    def layer_sizes(self) -> list[int]:
        sizes = [0] * (self.n + 1)
        for j in self.layers.values():
            sizes[j] += self.weight
        return sizes


def _step(G: Group, side: str):
    gens = G.gens
    if side == "left":
        return lambda x: (G.mul(s, x) for s in gens)
    return lambda x: (G.mul(x, s) for s in gens)


def _use_reduced(pair: FolnerPair, side: str, mode: str) -> bool:
    F, Fp = pair.F, pair.Fp
    possible = side == "left" and F.stable_key is not None and F.stable_key == Fp.stable_key
    if mode == "reduced":
        if not possible:
            raise UsageError("reduced mode needs a left-side pair of windows sharing a stabilizing subgroup")
        return True
    if mode == "exhaustive":
        return False
    return possible and len(Fp) > EXHAUSTIVE_LIMIT


def closure(pair: FolnerPair, side: str | None = None, mode: str = "auto",
            max_elements: int = 5_000_000, stop_on_exit: bool = True) -> Closure:
    """Breadth-first ``n``-step closure of ``F`` on ``side``, checking membership in ``F'``."""
    side = side or pair.side
    G = pair.group
    reduced = _use_reduced(pair, side, mode)
    canon = pair.Fp.coset_rep if reduced else (lambda x: x)
    seeds = pair.F.representatives() if reduced else iter(pair.F)
    weight = pair.F.stable_order if reduced else 1
    if not reduced and len(pair.F) > max_elements:
        raise ResourceBudgetError(f"|F| = {len(pair.F)} exceeds {max_elements}", attained=0)
    layers = {x: 0 for x in seeds}
    frontier = list(layers)
    nbrs = _step(G, side)
    contained, witness = True, None
    for x in frontier:
        if x not in pair.Fp:
            contained, witness = False, x
            break
    if not contained and stop_on_exit:
        return Closure(layers, weight, pair.n, False, witness)
    for j in range(1, pair.n + 1):
        nxt = []
        for x in frontier:
            for y in nbrs(x):
                y = canon(y)
                if y not in layers:
                    layers[y] = j
                    nxt.append(y)
                    if contained and y not in pair.Fp:
                        contained, witness = False, y
                        if stop_on_exit:
                            return Closure(layers, weight, pair.n, False, y)
        if len(layers) > max_elements:
            raise ResourceBudgetError(f"closure exceeded {max_elements} elements", attained=j)
        frontier = nxt
    return Closure(layers, weight, pair.n, contained, witness)


@dataclass
class TestFunction:
    """``f(x) = max(0, n - layer(x))``: equals ``n`` on ``F``, supported in layers ``< n``."""

    closure: Closure
    side: str
    grad_count: int  # number of points (with multiplicity) where |grad f|_1 = 1

    @property
    def n(self) -> int:
        return self.closure.n

    def value(self, x) -> int:
        j = self.closure.layers.get(x)
        return 0 if j is None else max(0, self.n - j)

    def norm_pow(self, p: int) -> int:
        n = self.n
        return sum((n - j) ** p for j in self.closure.layers.values() if j < n) * self.closure.weight

    def ratio_pow(self, p: int) -> Fraction:
        """``(||f||_p / || |grad f|_1 ||_p)^p`` exactly (all gradients are 0 or 1)."""
        return Fraction(self.norm_pow(p), self.grad_count)

    def ratio(self, p) -> float:
        if p == math.inf:
            return float(self.n)
        return float(self.ratio_pow(p)) ** (1.0 / p)

    def exact_ratio(self, p):
        """Exact ratio where it is rational (p = 1, inf), else the float value."""
        if p == 1:
            return self.ratio_pow(1)
        if p == math.inf:
            return self.n
        return self.ratio(p)


def test_function(pair: FolnerPair, cl: Closure | None = None, mode: str = "auto") -> TestFunction:
    cl = cl or closure(pair, pair.side, mode)
    if not cl.contained:
        raise UsageError("the pair fails the neighborhood check; no certified test function")
    G = pair.group
    nbrs = _step(G, pair.side)
    canon = pair.Fp.coset_rep if cl.weight > 1 else (lambda x: x)
    n = cl.n
    count = 0
    for x, j in cl.layers.items():
        fx = max(0, n - j)
        for y in nbrs(x):
            jy = cl.layers.get(canon(y))
            fy = 0 if jy is None else max(0, n - jy)
            if abs(fy - fx) >= 1:
                count += 1
                break
    return TestFunction(cl, pair.side, count * cl.weight)


# ---------------------------------------------------------------------------
# Checker
# ---------------------------------------------------------------------------


@dataclass
class CheckReport:
    n: int
    family: str
    side: str
    mode: str
    size_f: int
    size_fp: int
    subset_ok: bool
    measured_c: Fraction
    claimed_c: Fraction
    ratio_ok: bool
    neighborhood_ok: bool
    witness: object
    measured_k: Fraction | None
    claimed_k: int | None
    k_method: str
    diameter_ok: bool
    max_length: int | None
    other_side_ok: bool | None
    layer_sizes: list = field(default_factory=list)
    indicator_ratio: Fraction | None = None  # |F| / (inner + outer boundary)
    test_ratios: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.subset_ok and self.ratio_ok and self.neighborhood_ok and self.diameter_ok

    def to_dict(self) -> dict:
        from .isoperimetry import format_value

        fmt = lambda v: None if v is None else format_value(v)  # noqa: E731
        return {
            "n": self.n,
            "family": self.family,
            "side": self.side,
            "mode": self.mode,
            "sizeF": self.size_f,
            "sizeFp": self.size_fp,
            "subsetOk": self.subset_ok,
            "measuredC": fmt(self.measured_c),
            "claimedC": fmt(self.claimed_c),
            "ratioOk": self.ratio_ok,
            "neighborhoodOk": self.neighborhood_ok,
            "witness": None if self.witness is None else str(self.witness),
            "diameterOk": self.diameter_ok,
            "measuredK": fmt(self.measured_k),
            "claimedK": self.claimed_k,
            "kMethod": self.k_method,
            "maxLength": self.max_length,
            "otherSideOk": self.other_side_ok,
            "layerSizes": self.layer_sizes,
            "indicatorRatio": fmt(self.indicator_ratio),
            "testFunctionRatios": {k: fmt(v) for k, v in self.test_ratios.items()},
        }


def max_word_length(pair: FolnerPair) -> tuple[int | None, str]:
    """Upper bound on word length over ``F'`` and how it was obtained."""
    Fp = pair.Fp
    G = pair.group
    if len(Fp) <= ENUMERATE_LENGTH_LIMIT and (isinstance(Fp, ExplicitWindow) or G.spec.gen == "std"):
        tag = "enumerated-geodesic" if Fp.length_is_exact() else "enumerated-normal-form"
        return max(len(G.word(x)) for x in Fp), tag
    bound = Fp.length_bound()
    if bound is None:
        return None, "unavailable"
    return bound, "analytic"


def _subset(pair: FolnerPair, reduced: bool) -> bool:
    elems = pair.F.representatives() if reduced else iter(pair.F)
    return all(x in pair.Fp for x in elems)


def _indicator_ratio(pair: FolnerPair, cl: Closure) -> Fraction:
    """``|F| / (inner + outer boundary)`` on the declared side."""
    G = pair.group
    nbrs = _step(G, pair.side)
    canon = pair.Fp.coset_rep if cl.weight > 1 else (lambda x: x)
    inner = sum(1 for x, j in cl.layers.items() if j == 0 and any(cl.layers.get(canon(y)) != 0 for y in nbrs(x)))
    outer = sum(1 for j in cl.layers.values() if j == 1)
    return Fraction(len(pair.F), (inner + outer) * cl.weight)


def check(spec, pair: FolnerPair, mode: str = "auto", other_side: bool = True,
          ps=(1, 2, math.inf)) -> CheckReport:
    """Verify ``F ⊆ F'``, the neighborhood condition, the volume ratio and the diameter."""
    G = as_group(spec)
    if pair.group.spec != G.spec:
        raise UsageError(f"pair belongs to {pair.group.spec}, not {G.spec}")
    reduced = _use_reduced(pair, pair.side, mode)
    cl = closure(pair, pair.side, "reduced" if reduced else "exhaustive")
    size_f, size_fp = len(pair.F), len(pair.Fp)
    measured_c = Fraction(size_fp, size_f)
    max_len, k_method = max_word_length(pair)
    measured_k = None if max_len is None else Fraction(max_len, pair.n)
    diameter_ok = measured_k is not None and (pair.K is None or measured_k <= pair.K)
    other = None
    if other_side:
        alt = "right" if pair.side == "left" else "left"
        if not (len(pair.F) > EXHAUSTIVE_LIMIT):
            try:
                other = closure(pair, alt, "exhaustive", max_elements=EXHAUSTIVE_LIMIT).contained
            except ResourceBudgetError:
                other = None
    report = CheckReport(
        n=pair.n, family=pair.name, side=pair.side, mode="reduced" if reduced else "exhaustive",
        size_f=size_f, size_fp=size_fp, subset_ok=_subset(pair, reduced),
        measured_c=measured_c, claimed_c=pair.C, ratio_ok=measured_c <= pair.C,
        neighborhood_ok=cl.contained, witness=cl.witness,
        measured_k=measured_k, claimed_k=pair.K, k_method=k_method, diameter_ok=diameter_ok,
        max_length=max_len, other_side_ok=other,
    )
    if cl.contained:
        report.layer_sizes = cl.layer_sizes()
        report.indicator_ratio = _indicator_ratio(pair, cl)
        tf = test_function(pair, cl)
        report.test_ratios = {_p_key(p): tf.exact_ratio(p) for p in ps}
    return report


def _p_key(p) -> str:
    return "pinf" if p == math.inf else f"p{int(p)}"


# ---------------------------------------------------------------------------
# Profile bounds
# ---------------------------------------------------------------------------


@dataclass
class CSOverlay:
    """Upper overlay ``C log v`` fitted to the isoperimetric upper bound from volume growth.

    With ``r(w) = min{r : V(r) >= w}`` the bound is ``U(v) = 4 r(2v)`` for
    ``p = 1`` and ``U(v) = 2 r(2^(p/(p-1)) v)`` for ``p > 1``; ``C`` is the
    least constant with ``U(v) <= C log v`` on the evaluated window.
    """

    p: float
    C: float
    evaluated: list  # (v, U(v))
    growth: list


def volume_radius(growth: list, w) -> int | None:
    """Least ``r`` with ``V(r) >= w``, or None beyond the measured series."""
    for r, v in enumerate(growth):
        if v >= w:
            return r
    return None


def cs_upper(growth: list, v: int, p) -> int | None:
    if p == 1:
        r = volume_radius(growth, 2 * v)
        return None if r is None else 4 * r
    factor = 2 if p == math.inf else 2 ** (p / (p - 1))
    r = volume_radius(growth, factor * v)
    return None if r is None else 2 * r


def measured_growth(spec, max_elements: int = 300_000) -> list[int]:
    from .ball import iter_spheres

    V, total = [], 0
    try:
        for _, sphere in iter_spheres(spec, max_elements=max_elements):
            total += len(sphere)
            V.append(total)
    except ResourceBudgetError:
        pass
    return V


@dataclass
class FolnerBound:
    reports: list
    in_balls: ProfileCurve  # J^b lower bounds at the radius containing F'
    volume: ProfileCurve  # j lower bounds at v = |F'| (and V(R) when measured)
    overlay: CSOverlay
    lower_c: float  # largest c with c log v below every j-point
    overlay_ok: bool  # every j-point <= C log v
    bound_ok: bool  # every j-point <= U(v) where U is evaluated


def folner_profile_bound(spec, family: str | None, nmax: int, p, growth: list | None = None,
                         mode: str = "auto") -> FolnerBound:
    G = as_group(spec)
    p = parse_p(p)
    family = family or default_family(G)
    growth = growth if growth is not None else measured_growth(G)
    reports = []
    jb = ProfileCurve(str(G.spec), p, "pointwise", "radius")
    jv = ProfileCurve(str(G.spec), p, "pointwise", "volume")
    for n in range(1, nmax + 1):
        pair = construct(G, family, n)
        rep = check(G, pair, mode, other_side=False, ps=(p,))
        reports.append(rep)
        if not rep.neighborhood_ok:
            continue
        val = rep.test_ratios[_p_key(p)]
        R = rep.max_length
        vol = growth[R] if R is not None and R < len(growth) else None
        jb.points.append(ProfilePoint(R, val, f"folner-{family}", "lower", vol))
        jv.points.append(ProfilePoint(rep.size_fp, val, f"folner-{family}", "lower"))
        if vol is not None:
            jv.points.append(ProfilePoint(vol, val, f"folner-ball-{family}", "lower"))
    jv.points.sort(key=lambda pt: pt.argument)
    evaluated = []
    for pt in jv.points:
        u = cs_upper(growth, pt.argument, p)
        if u is not None:
            evaluated.append((pt.argument, u))
    C = max((u / math.log(v) for v, u in evaluated if v > 1), default=math.nan)
    overlay = CSOverlay(p, C, evaluated, list(growth))
    pts = [(pt.argument, float(pt.value)) for pt in jv.points if pt.argument > 1]
    lower_c = min((val / math.log(v) for v, val in pts), default=math.nan)
    overlay_ok = not math.isnan(C) and all(val <= C * math.log(v) for v, val in pts)
    ubound = dict(evaluated)
    bound_ok = all(float(pt.value) <= ubound[pt.argument] for pt in jv.points if pt.argument in ubound)
    return FolnerBound(reports, jb, jv, overlay, lower_c, overlay_ok, bound_ok)
