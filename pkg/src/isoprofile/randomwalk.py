"""Symmetric random walks on groups: exact convolution powers and decay fits.

``mu^n`` is stored as integer counts over the common denominator ``D^n``
(``D`` the denominator of the step weights), so every convolution step is
integer arithmetic and every identity is exact.  The return probability is
read off as ``p_2n(e) = ||mu^n||_2^2`` (valid because ``mu`` is symmetric).
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np
from scipy.stats import binomtest

from .errors import UsageError
from .groups import as_group, quotient_map
from .isoperimetry import ProfileCurve, format_value, sobolev_check

FLOAT_EPS = 2.0**-53


@dataclass
class WalkMeasure:
    """Finitely supported symmetric probability measure on a group.

    Conditions used by decay comparisons hold with support radius ``A`` and
    minimal weight ``c`` (the measure dominates ``c`` times the counting
    measure on the generators).
    """

    group: object
    support: list  # (element, Fraction weight), weights > 0
    theta: Fraction = Fraction(0)

    def __post_init__(self):
        self.group = as_group(self.group)
        merged: dict = {}
        for g, w in self.support:
            merged[g] = merged.get(g, Fraction(0)) + Fraction(w)
        key = self.group.serialize
        self.support = sorted(((g, w) for g, w in merged.items() if w != 0), key=lambda gw: key(gw[0]))
        if any(w < 0 for _, w in self.support):
            raise UsageError("weights must be positive")
        if sum(w for _, w in self.support) != 1:
            raise UsageError("weights must sum to 1")
        if not self.symmetric():
            raise UsageError("measure must be symmetric")

    def weights(self) -> dict:
        return dict(self.support)

    def symmetric(self) -> bool:
        w = self.weights()
        return all(w.get(self.group.inv(g)) == x for g, x in w.items())

    @property
    def denominator(self) -> int:
        return math.lcm(*(w.denominator for _, w in self.support))

    def counts(self) -> list:
        D = self.denominator
        return [(g, int(w * D)) for g, w in self.support]

    def min_weight(self) -> Fraction:
        return min(w for _, w in self.support)

    def generates(self, radius: int = 3, max_steps: int = 12) -> bool:
        """Whether powers of the support (with ``e``) reach the whole ``B(e, radius)``."""
        from .ball import build_ball

        target = set(build_ball(self.group, radius).elements)
        G = self.group
        steps = [g for g, _ in self.support]
        reached = {G.identity}
        frontier = {G.identity}
        for _ in range(max_steps):
            if target <= reached:
                return True
            nxt = {G.mul(x, s) for x in frontier for s in steps} - reached
            reached |= nxt
            frontier = nxt
        return target <= reached


def standard_measure(spec, theta=Fraction(1, 2)) -> WalkMeasure:
    """``theta delta_e + (1 - theta) / |S| sum_s delta_s``."""
    G = as_group(spec)
    theta = Fraction(theta)
    if not 0 <= theta < 1:
        raise UsageError("theta must lie in [0, 1)")
    gens = G.gens
    support = [(g, (1 - theta) / len(gens)) for g in gens]
    if theta:
        support.append((G.identity, theta))
    return WalkMeasure(G, support, theta)


def push_forward(mu: WalkMeasure, Q) -> WalkMeasure:
    """Image of ``mu`` under the quotient map ``G -> Q``."""
    Qg = as_group(Q)
    proj = quotient_map(mu.group, Qg)
    return WalkMeasure(Qg, [(proj(g), w) for g, w in mu.support], mu.theta)


# ---------------------------------------------------------------------------
# Convolution powers
# ---------------------------------------------------------------------------


@dataclass
class DecayEntry:
    n: int
    value: object  # Fraction (exact) or float
    exact: bool
    error: float = 0.0  # relative error bound for float entries
    support: int = 0  # |supp mu^n|


@dataclass
class DecaySequence:
    group: str
    theta: Fraction
    entries: list = field(default_factory=list)
    truncated: bool = False
    attained: int | None = None
    normalization_ok: bool = True  # sum mu^n = 1 exactly at every exact step
    symmetry_ok: bool = True  # mu^n(g) = mu^n(g^-1) exactly at every exact step

    def ns(self) -> list[int]:
        return [e.n for e in self.entries]

    def values(self) -> list:
        return [e.value for e in self.entries]

    def floats(self) -> np.ndarray:
        return np.array([float(v) for v in self.values()])

    def nonincreasing(self) -> bool:
        v = self.values()
        return all(b <= a for a, b in zip(v, v[1:]))

    def log_convex(self) -> bool:
        """``p_2(n+1) p_2(n-1) >= p_2n^2`` on consecutive entries."""
        e = self.entries
        for a, b, c in zip(e, e[1:], e[2:]):
            if not (a.n + 1 == b.n == c.n - 1):
                continue
            lhs, rhs = c.value * a.value, b.value * b.value
            if a.exact and b.exact and c.exact:
                if lhs < rhs:
                    return False
            elif lhs < rhs * (1 - 8 * max(a.error, b.error, c.error, FLOAT_EPS)):
                return False
        return True

    def to_csv(self, header: dict | None = None) -> str:
        lines = [f"# group={self.group}", f"# theta={format_value(self.theta)}"]
        lines += [f"# {k}={v}" for k, v in (header or {}).items()]
        lines.append("n,p2n_num,p2n_den,p2n_float,flag")
        for e in self.entries:
            if e.exact:
                lines.append(f"{e.n},{e.value.numerator},{e.value.denominator},{float(e.value):.17g},exact")
            else:
                lines.append(f"{e.n},,,{e.value:.17g},float:{e.error:.3g}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_csv(cls, text: str) -> "DecaySequence":
        meta, rows = {}, []
        for line in text.splitlines():
            if line.startswith("#"):
                k, _, v = line[1:].strip().partition("=")
                meta[k] = v
            elif line and not line.startswith("n,"):
                rows.append(line.split(","))
        seq = cls(meta["group"], Fraction(meta["theta"]))
        for n, num, den, fl, flag in rows:
            if flag == "exact":
                seq.entries.append(DecayEntry(int(n), Fraction(int(num), int(den)), True))
            else:
                seq.entries.append(DecayEntry(int(n), float(fl), False, float(flag.split(":")[1])))
        return seq


def convolve(counts: dict, steps: Sequence, mul) -> dict:
    """One step ``mu^n -> mu^(n+1)`` on integer (or float) counts: ``x -> x s``."""
    out: dict = {}
    get = out.get
    for g, c in counts.items():
        for s, w in steps:
            h = mul(g, s)
            out[h] = get(h, 0) + c * w
    return out


def return_probabilities(mu: WalkMeasure, nmax: int, max_support: int = 3_000_000,
                         max_bits: int = 200_000, check_invariants: bool = True) -> DecaySequence:
    """``p_2n(e)`` for ``n = 1..nmax`` by exact convolution.

    Counts switch to binary64 once their size exceeds ``max_bits`` bits
    (entries are then flagged with a relative error bound).  Exceeding
    ``max_support`` stops the sequence with ``truncated`` set.
    """
    if nmax < 1:
        raise UsageError("nmax must be >= 1")
    G = mu.group
    D = mu.denominator
    steps = mu.counts()
    counts = {G.identity: 1}
    seq = DecaySequence(str(G.spec), mu.theta)
    exact = True
    err = 0.0
    for n in range(1, nmax + 1):
        counts = convolve(counts, steps, G.mul)
        if len(counts) > max_support:
            seq.truncated, seq.attained = True, n - 1
            break
        if exact:
            Dn = D**n
            if check_invariants:
                seq.normalization_ok &= sum(counts.values()) == Dn
                seq.symmetry_ok &= all(counts.get(G.inv(g)) == c for g, c in counts.items())
            value = Fraction(sum(c * c for c in counts.values()), Dn * Dn)
            seq.entries.append(DecayEntry(n, value, True, 0.0, len(counts)))
            if Dn.bit_length() > max_bits:
                exact = False
                counts = {g: c / Dn for g, c in counts.items()}
                steps = [(s, w / D) for s, w in steps]
        else:
            err += (len(steps) + 2) * FLOAT_EPS
            value = math.fsum(c * c for c in counts.values())
            seq.entries.append(DecayEntry(n, value, False, 2 * err, len(counts)))
    return seq


def direct_return(mu: WalkMeasure, m: int) -> Fraction:
    """``mu^m(e)`` by ``m``-fold convolution (no symmetry shortcut)."""
    G = mu.group
    D = mu.denominator
    counts = {G.identity: 1}
    for _ in range(m):
        counts = convolve(counts, mu.counts(), G.mul)
    return Fraction(counts.get(G.identity, 0), D**m)


def binomial_return(n: int) -> Fraction:
    """``C(2n, n) / 4^n``: return probability of the simple walk on Z."""
    return Fraction(math.comb(2 * n, n), 4**n)


def closed_form_z(nmin: int, nmax: int) -> DecaySequence:
    seq = DecaySequence("zd:d=1", Fraction(0))
    seq.entries = [DecayEntry(n, binomial_return(n), True) for n in range(nmin, nmax + 1)]
    return seq


# ---------------------------------------------------------------------------
# Fits
# ---------------------------------------------------------------------------


@dataclass
class DecayFit:
    model: str
    params: dict
    residual: float  # RMS residual of the linear regression
    window: tuple  # (n_min, n_max) of the fitted points
    windows: list  # sliding-window parameter estimates: (n_min, n_max, value)


def _linfit(x: np.ndarray, y: np.ndarray):
    A = np.vstack([x, np.ones_like(x)]).T
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    res = y - A @ coef
    return coef, float(np.sqrt(np.mean(res**2)))


def _usable(seq: DecaySequence, nmin: int | None, nmax: int | None, model: str):
    pts = []
    for e in seq.entries:
        if (nmin is not None and e.n < nmin) or (nmax is not None and e.n > nmax):
            continue
        v = float(e.value)
        if v <= 0 or (model == "stretched" and v >= 1):
            continue
        pts.append((e.n, v))
    return pts


def fit_decay(seq: DecaySequence, model: str, nmin: int | None = None, nmax: int | None = None,
              window: int | None = None) -> DecayFit:
    """Regression of ``log p`` on ``log n`` (polynomial) or ``log(-log p)`` on ``log n`` (stretched).

    ``polynomial`` reports ``alpha`` in ``p ~ n^-alpha``; ``stretched``
    reports ``gamma`` and ``c`` in ``p ~ exp(-c n^gamma)``.  The window
    report refits on sliding sub-windows of ``window`` points (half of the
    points by default) so drift of the exponent is visible.
    """
    if model in ("poly", "polynomial"):
        model = "polynomial"
    elif model != "stretched":
        raise UsageError(f"unknown model {model!r}; use polynomial or stretched")
    pts = _usable(seq, nmin, nmax, model)
    if len(pts) < 8:
        raise UsageError(f"need at least 8 usable points, got {len(pts)}")
    n = np.array([p[0] for p in pts], float)
    v = np.array([p[1] for p in pts])
    x = np.log(n)
    y = np.log(v) if model == "polynomial" else np.log(-np.log(v))

    def estimate(xs, ys):
        coef, res = _linfit(xs, ys)
        if model == "polynomial":
            return {"alpha": -coef[0], "log_c": coef[1]}, res
        return {"gamma": coef[0], "c": math.exp(coef[1])}, res

    params, res = estimate(x, y)
    key = "alpha" if model == "polynomial" else "gamma"
    w = window or max(4, len(pts) // 2)
    windows = []
    for i in range(0, len(pts) - w + 1):
        pr, _ = estimate(x[i:i + w], y[i:i + w])
        windows.append((int(n[i]), int(n[i + w - 1]), float(pr[key])))
    return DecayFit(model, {k: float(val) for k, val in params.items()}, res,
                    (int(n[0]), int(n[-1])), windows)


@dataclass
class RootExponent:
    rho: float  # limit estimate of p_2n^(1/2n)
    raw: float  # p_2n^(1/2n) at the largest n
    n: int
    coefficients: tuple  # (a, b, c) in log p = a + b log n + c n


def root_exponent(seq: DecaySequence, nmin: int = 2) -> RootExponent:
    """Estimate ``lim p_2n^(1/2n)`` by regressing ``log p_2n`` on ``1, log n, n``.

    The raw root ``p_2n^(1/2n)`` approaches its limit only like
    ``n^(-3/(4n))``; the polynomial prefactor is absorbed by the ``log n``
    term, and ``rho = exp(c / 2)``.
    """
    pts = [(e.n, float(e.value)) for e in seq.entries if e.n >= nmin and float(e.value) > 0]
    if len(pts) < 4:
        raise UsageError("need at least 4 points")
    n = np.array([p[0] for p in pts], float)
    y = np.log([p[1] for p in pts])
    A = np.vstack([np.ones_like(n), np.log(n), n]).T
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    last_n, last_v = pts[-1]
    return RootExponent(math.exp(coef[2] / 2), last_v ** (1 / (2 * last_n)), int(last_n), tuple(map(float, coef)))


# ---------------------------------------------------------------------------
# Collision estimator (validation only)
# ---------------------------------------------------------------------------


@dataclass
class CollisionEstimate:
    n: int
    trials: int
    hits: int
    estimate: float
    ci_low: float
    ci_high: float
    confidence: float

    def covers(self, value) -> bool:
        return self.ci_low <= float(value) <= self.ci_high


def collision_estimate(mu: WalkMeasure, n: int, trials: int, seed: int = 0,
                       confidence: float = 0.99) -> CollisionEstimate:
    """Two independent ``n``-step walks end at the same point with probability ``p_2n(e)``."""
    rng = random.Random(seed)
    G = mu.group
    elems = [g for g, _ in mu.support]
    weights = [float(w) for _, w in mu.support]

    def endpoint():
        x = G.identity
        for s in rng.choices(elems, weights, k=n):
            x = G.mul(x, s)
        return x

    hits = sum(endpoint() == endpoint() for _ in range(trials))
    ci = binomtest(hits, trials).proportion_ci(confidence_level=confidence, method="wilson")
    return CollisionEstimate(n, trials, hits, hits / trials, float(ci.low), float(ci.high), confidence)


# ---------------------------------------------------------------------------
# Profile / decay diagnostic
# ---------------------------------------------------------------------------


@dataclass
class DiagnosticReport:
    group: str
    profile_type: str  # "power", "log" or "bounded"
    profile_exponent: float  # log-log slope of the profile against volume
    log_slope: float  # slope of the profile against log volume (upper half)
    log_fit: dict  # fitted C, C' for value <= C log(C' v)
    decay_type: str  # "polynomial", "stretched" or "exponential"
    alpha: float | None
    gamma: float | None
    rho: float | None
    verdict: str
    window: tuple
    notes: list = field(default_factory=list)


def _profile_points(curve: ProfileCurve):
    """(volume, value) pairs; radius curves use the recorded ``V(r)``."""
    if curve.variable == "volume":
        pts = [(pt.argument, float(pt.value)) for pt in curve.points]
    else:
        pts = [(pt.volume, float(pt.value)) for pt in curve.points if pt.volume]
    return [(v, val) for v, val in pts if v > 1 and val > 0]


def classify_profile(curve: ProfileCurve) -> tuple[str, float, float]:
    """Power-type, log-type or bounded, judged on the upper half of the volume range.

    * power:   log-log slope against volume at least 0.25;
    * bounded: value grows by less than 0.2 per unit of ``log v``;
    * log:     otherwise.
    """
    pts = _profile_points(curve)
    if len(pts) < 4:
        raise UsageError("profile curve needs at least 4 points with volumes")
    pts = pts[len(pts) // 2 - 1:]
    lv = np.log([p[0] for p in pts])
    val = np.array([p[1] for p in pts])
    beta = float(_linfit(lv, np.log(val))[0][0])
    slope = float(_linfit(lv, val)[0][0])
    if beta >= 0.25:
        kind = "power"
    elif slope < 0.2:
        kind = "bounded"
    else:
        kind = "log"
    return kind, beta, slope


def classify_decay(seq: DecaySequence) -> tuple[str, dict]:
    """Exponential if the root-exponent estimate is below 0.95, else the better of the two fits."""
    info: dict = {}
    rho = root_exponent(seq)
    info["rho"] = rho.rho
    poly = fit_decay(seq, "polynomial")
    info["alpha"] = poly.params["alpha"]
    try:
        st = fit_decay(seq, "stretched")
        info["gamma"] = st.params["gamma"]
    except UsageError:
        st = None
    if rho.rho < 0.95:
        return "exponential", info
    if st is not None and st.residual < poly.residual:
        return "stretched", info
    return "polynomial", info


_CONSISTENT = {("power", "polynomial"), ("log", "stretched"), ("bounded", "exponential")}


def profile_decay_diagnostic(spec, mu: WalkMeasure, curve: ProfileCurve, seq: DecaySequence) -> DiagnosticReport:
    """Joint, descriptive reading of a p=2 profile and a return-probability sequence.

    Power-type profiles pair with polynomial decay, log-type profiles with
    stretched-exponential decay and bounded profiles with exponential
    decay; the verdict says whether the two measured windows agree.
    """
    G = as_group(spec)
    if curve.p != 2:
        raise UsageError("the diagnostic compares a p=2 profile")
    if mu.group.spec != G.spec or seq.group != str(G.spec):
        raise UsageError("measure, sequence and group disagree")
    ptype, beta, slope = classify_profile(curve)
    rep = sobolev_check(curve.points if curve.variable == "volume" else
                        [type(pt)(pt.volume, pt.value, pt.method, pt.bound_kind) for pt in curve.points if pt.volume],
                        "log")
    dtype, info = classify_decay(seq)
    verdict = "consistent" if (ptype, dtype) in _CONSISTENT else "inconsistent"
    if verdict == "consistent" and ptype == "bounded":
        verdict = "consistent (non-amenable)"
    notes = [f"profile window: volumes {min(p[0] for p in _profile_points(curve))}"
             f"..{max(p[0] for p in _profile_points(curve))}",
             f"decay window: n = {seq.entries[0].n}..{seq.entries[-1].n}"]
    return DiagnosticReport(str(G.spec), ptype, beta, slope, {"C": rep.C, "Cp": rep.Cp}, dtype,
                            info.get("alpha"), info.get("gamma"), info.get("rho"), verdict,
                            (seq.entries[0].n, seq.entries[-1].n), notes)
