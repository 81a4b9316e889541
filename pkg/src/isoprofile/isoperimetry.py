"""Gradients, gradient norms and L^p isoperimetric quantities on balls.

Functions live on a :class:`~isoprofile.ball.BallIndex` and are extended by
zero outside it.  Exact computations use ``Fraction`` values (numpy object
arrays); estimates use float64.

Three ways of measuring the size of the gradient are provided, for a
generating set ``S`` and translations ``T_s f`` (``f(xs)`` on the right,
``f(s^-1 x)`` on the left):

* max form        ``sup_s ||f - T_s f||_p``
* averaged form   ``(|S|^-1 sum_s ||f - T_s f||_p^p)^(1/p)``
* pointwise form  ``|| |grad f|_1 ||_p`` with ``|grad f|_1(x) = max_s |f(T_s x) - f(x)|``

They satisfy ``avg <= max <= pointwise`` and ``max <= |S|^(1/p) avg``.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np
import scipy.linalg
import scipy.sparse
import scipy.sparse.linalg

from .ball import BallIndex, _bfs_depth, build_ball
from .errors import NumericalError, UsageError
from .groups import as_group

DENSE_LIMIT = 2000
EIG_TOL = 1e-10


# ---------------------------------------------------------------------------
# Functions on balls
# ---------------------------------------------------------------------------


@dataclass
class FunctionOnBall:
    index: BallIndex
    values: np.ndarray
    outside: dict = field(default_factory=dict)

    @property
    def exact(self) -> bool:
        return self.values.dtype == object

    @property
    def truncated(self) -> bool:
        """True when part of the function lives beyond the enumerated ball."""
        return bool(self.outside)

    @classmethod
    def zeros(cls, index: BallIndex, exact: bool = True) -> "FunctionOnBall":
        if exact:
            values = np.empty(len(index), dtype=object)
            values[:] = [Fraction(0)] * len(index)
        else:
            values = np.zeros(len(index))
        return cls(index, values)

    @classmethod
    def from_mapping(cls, index: BallIndex, mapping: dict, exact: bool = True) -> "FunctionOnBall":
        """Build from ``{element: value}``; elements must lie in the ball."""
        f = cls.zeros(index, exact)
        for g, v in mapping.items():
            f.values[index.lookup[g]] = Fraction(v) if exact else float(v)
        return f

    @classmethod
    def indicator(cls, index: BallIndex, elements: Iterable, exact: bool = True) -> "FunctionOnBall":
        return cls.from_mapping(index, {g: 1 for g in elements}, exact)

    def support(self) -> np.ndarray:
        return np.nonzero(self.values != 0)[0]

    def norm_pow(self, p: int):
        """``||f||_p^p`` (exact for Fraction values and integer p)."""
        vals = [abs(v) ** p for v in self.values if v != 0]
        vals += [abs(v) ** p for v in self.outside.values() if v != 0]
        return sum(vals, Fraction(0) if self.exact else 0.0)

    def norm(self, p) -> float:
        if p == math.inf:
            return float(max([abs(v) for v in self.values] + [abs(v) for v in self.outside.values()] + [0]))
        return float(self.norm_pow(p)) ** (1.0 / p)

    def as_float(self) -> "FunctionOnBall":
        return FunctionOnBall(
            self.index, self.values.astype(float), {g: float(v) for g, v in self.outside.items()}
        )

    def as_exact(self) -> "FunctionOnBall":
        """Exact copy; floats are converted to the rationals they represent."""
        values = np.empty(len(self.values), dtype=object)
        values[:] = [Fraction(v) for v in self.values]
        return FunctionOnBall(self.index, values, {g: Fraction(v) for g, v in self.outside.items()})


def _padded(values: np.ndarray) -> np.ndarray:
    """Values with a trailing zero so that id -1 reads as 0."""
    zero = Fraction(0) if values.dtype == object else 0.0
    out = np.empty(len(values) + 1, dtype=values.dtype)
    out[:-1] = values
    out[-1] = zero
    return out


def _check_side(side: str) -> None:
    if side not in ("left", "right"):
        raise UsageError(f"side must be 'left' or 'right', got {side!r}")


def _outside_points(index: BallIndex, f: FunctionOnBall, side: str) -> dict:
    """Points beyond the ball adjacent to ``supp f``, mapped to ``max |f|`` over their neighbors."""
    G = index.group
    table = index.translation(side)
    gens = G.gens
    supp = f.support()
    out: dict = {}
    for j in range(table.shape[0]):
        missing = supp[table[j, supp] < 0]
        s = gens[j]
        for y in missing:
            g = index.elements[y]
            # T_j(y) is y*s (right) or s^-1*y (left); that point is outside the ball
            z = G.mul(g, s) if side == "right" else G.mul(G.inv(s), g)
            v = abs(f.values[y])
            if z not in out or v > out[z]:
                out[z] = v
    return out


# ---------------------------------------------------------------------------
# Gradient
# ---------------------------------------------------------------------------


def gradient(index: BallIndex, f: FunctionOnBall, h: int = 1, side: str = "right") -> FunctionOnBall:
    """``|grad f|_h(x) = sup { |f(y) - f(x)| : d(x, y) <= h }``.

    ``side="right"`` uses neighbors ``x w`` (the left-invariant word metric),
    ``side="left"`` uses ``w x``, for ``|w| <= h``.  Gradient values at points
    beyond the ball are returned in ``outside``.
    """
    if h < 1:
        raise UsageError("h must be >= 1")
    _check_side(side)
    if h == 1:
        table = index.translation(side)
        vals = _padded(f.values)
        diffs = np.abs(vals[table] - f.values[None, :])
        grad = diffs.max(axis=0)
        if f.exact:
            grad = grad.astype(object)
        return FunctionOnBall(index, grad, _outside_points(index, f, side))
    return _gradient_scale(index, f, h, side)


def _gradient_scale(index: BallIndex, f: FunctionOnBall, h: int, side: str) -> FunctionOnBall:
    G = index.group
    mul = G.mul
    small = index if index.radius >= h else build_ball(G, h)
    W = small.elements[: small.growth[h]]
    lookup = index.lookup
    zero = Fraction(0) if f.exact else 0.0

    def value(g):
        i = lookup.get(g)
        return zero if i is None else f.values[i]

    def nbrs(x):
        return (mul(x, w) for w in W) if side == "right" else (mul(w, x) for w in W)

    domain = set()
    for y in f.support():
        domain.update(nbrs(index.elements[y]))
    out = FunctionOnBall.zeros(index, f.exact)
    for x in domain:
        fx = value(x)
        g = max(abs(value(y) - fx) for y in nbrs(x))
        i = lookup.get(x)
        if i is None:
            if g:
                out.outside[x] = g
        else:
            out.values[i] = g
    return out


# ---------------------------------------------------------------------------
# The three gradient norms
# ---------------------------------------------------------------------------


@dataclass
class GradNorms:
    p: float
    per_generator: list  # ||f - T_s f||_p^p (or sup norms when p = inf)
    max_form: float
    avg_form: float
    pointwise_form: float
    max_pow: object = None  # exact p-th powers when available
    avg_pow: object = None
    pointwise_pow: object = None

    def sandwich_ok(self, n_gens: int) -> bool:
        """``avg <= max <= pointwise`` and ``max <= |S|^(1/p) avg``, in p-th powers."""
        if self.p == math.inf:
            return self.avg_form <= self.max_form <= self.pointwise_form
        a, m, w = self.avg_pow, self.max_pow, self.pointwise_pow
        return a <= m <= w and m <= n_gens * a


def translation_diff_pow(index: BallIndex, f: FunctionOnBall, p, side: str = "right") -> list:
    """``||f - T_s f||_p^p`` for each generator (sup norm when ``p`` is inf)."""
    _check_side(side)
    table = index.translation(side)
    inv = index.group.inverse_index()
    vals = _padded(f.values)
    supp = f.support()
    out = []
    for i in range(table.shape[0]):
        d = np.abs(f.values - vals[table[i]])
        # points x outside the ball with T_s x in supp f
        edge = np.abs(f.values[supp[table[inv[i], supp] < 0]])
        if p == math.inf:
            out.append(max(list(d) + list(edge) + [0]))
        else:
            zero = Fraction(0) if f.exact else 0.0
            out.append(sum((v**p for v in d if v != 0), zero) + sum((v**p for v in edge), zero))
    return out


def grad_norms(index: BallIndex, f: FunctionOnBall, p, side: str = "right") -> GradNorms:
    per = translation_diff_pow(index, f, p, side)
    grad = gradient(index, f, 1, side)
    n = len(per)
    if p == math.inf:
        pw = grad.norm(math.inf)
        m = float(max(per))
        return GradNorms(p, per, m, m, pw)
    avg_pow = sum(per, Fraction(0) if f.exact else 0.0) / n
    max_pow = max(per)
    pw_pow = grad.norm_pow(p)
    root = lambda x: float(x) ** (1.0 / p)  # noqa: E731
    return GradNorms(p, per, root(max_pow), root(avg_pow), root(pw_pow), max_pow, avg_pow, pw_pow)


# ---------------------------------------------------------------------------
# p = 2: Dirichlet eigenvalue
# ---------------------------------------------------------------------------


@dataclass
class J2Result:
    lambda_min: float
    j2avg: float  # lambda_min ** -0.5
    witness: np.ndarray  # unit eigenvector on ``ids``
    ids: np.ndarray
    method: str
    iterations: int = 0
    residual: float = 0.0

    @property
    def avg_ratio(self) -> float:
        """``||f||_2 / avg_form`` for the witness: the Dirichlet form is half of avg_form^2."""
        return (2 * self.lambda_min) ** -0.5


def dirichlet_operator(index: BallIndex, ids: np.ndarray, side: str = "right") -> scipy.sparse.csr_matrix:
    """``I - |S|^-1 sum_s T_s`` compressed to the set ``ids`` (zero outside)."""
    table = index.translation(side)
    n = len(ids)
    pos = np.full(len(index) + 1, -1, dtype=np.int64)
    pos[ids] = np.arange(n)
    rows, cols = [], []
    for i in range(table.shape[0]):
        tgt = pos[table[i, ids]]
        keep = tgt >= 0
        rows.append(np.arange(n)[keep])
        cols.append(tgt[keep])
    rows = np.concatenate(rows)
    cols = np.concatenate(cols)
    k = table.shape[0]
    P = scipy.sparse.csr_matrix((np.full(len(rows), 1.0 / k), (rows, cols)), shape=(n, n))
    return (scipy.sparse.identity(n, format="csr") - P).tocsr()


def inverse_iteration(M, shift: float = 0.0, tol: float = EIG_TOL, max_iter: int = 20000, x0=None):
    """Smallest eigenpair of a symmetric positive definite sparse matrix.

    Shifted inverse power iteration with a single sparse LU factorization;
    stops when the residual ``||Mx - lambda x||`` drops below ``tol``.
    """
    n = M.shape[0]
    A = (M - shift * scipy.sparse.identity(n)).tocsc()
    lu = scipy.sparse.linalg.splu(A)
    x = np.ones(n) if x0 is None else np.asarray(x0, float)
    x /= np.linalg.norm(x)
    res = math.inf
    for it in range(1, max_iter + 1):
        y = lu.solve(x)
        x = y / np.linalg.norm(y)
        Mx = M @ x
        lam = float(x @ Mx)
        res = float(np.linalg.norm(Mx - lam * x))
        if res < tol:
            return lam, x, it, res
    raise NumericalError(f"inverse iteration did not converge in {max_iter} steps", residual=res)


def j2_spectral(index: BallIndex, A, side: str = "right") -> J2Result:
    """Smallest Dirichlet eigenvalue of the averaged Laplacian on ``A``.

    ``A`` is an iterable of elements or an integer id array.  Dense
    eigensolve up to ``DENSE_LIMIT`` points, inverse iteration above.
    """
    ids = _as_ids(index, A)
    M = dirichlet_operator(index, ids, side)
    if len(ids) <= DENSE_LIMIT:
        w, v = scipy.linalg.eigh(M.toarray(), subset_by_index=[0, 0])
        lam, vec, it, res = float(w[0]), v[:, 0], 0, float(np.linalg.norm(M @ v[:, 0] - w[0] * v[:, 0]))
        method = "dense"
    else:
        lam, vec, it, res = inverse_iteration(M)
        method = "inverse-iteration"
    if vec.sum() < 0:
        vec = -vec
    # the Dirichlet form is a sum of squares, so it keeps full relative
    # accuracy for small eigenvalues where x.Mx loses digits to cancellation
    lam = dirichlet_energy(index, ids, vec, side) / float(vec @ vec)
    return J2Result(lam, lam**-0.5, vec, ids, method, it, res)


def dirichlet_energy(index: BallIndex, ids: np.ndarray, vec: np.ndarray, side: str = "right") -> float:
    """``<f, (I - P) f> = (2|S|)^-1 sum_s ||f - T_s f||_2^2`` for ``f`` = ``vec`` on ``ids``, zero elsewhere."""
    table = index.translation(side)
    full = np.zeros(len(index) + 1)
    full[ids] = vec
    inside = np.zeros(len(index) + 1, dtype=bool)
    inside[ids] = True
    total = []
    for i in range(table.shape[0]):
        tgt = table[i, ids]
        d = vec - full[tgt]
        total.append(d * d)
    # edges from A to points outside A are counted once above; the reverse
    # edges (outside point -> A) contribute the same amount by symmetry
    edge = np.concatenate(total)
    inner = np.concatenate([inside[table[i, ids]] for i in range(table.shape[0])])
    return float((2 * math.fsum(edge[~inner]) + math.fsum(edge[inner])) / (2 * table.shape[0]))


def _as_ids(index: BallIndex, A) -> np.ndarray:
    if isinstance(A, np.ndarray) and A.dtype.kind in "iu":
        return np.sort(A.astype(np.int64))
    return np.sort(index.ids(A))


# ---------------------------------------------------------------------------
# p = inf and p = 1
# ---------------------------------------------------------------------------


def jinf_inradius(index: BallIndex, A) -> int:
    """``max_{x in A} d(x, complement of A)``, by BFS from the outer boundary.

    Equals ``sup_f ||f||_inf / || |grad f|_1 ||_inf`` over ``f`` supported in
    ``A``, attained by ``f(x) = d(x, A^c)``.
    """
    ids = _as_ids(index, A)
    table = index.adjacency
    if (table[:, ids] < 0).any():
        raise UsageError("A touches the boundary of the enumerated ball; enlarge the index")
    in_a = np.zeros(len(index), dtype=bool)
    in_a[ids] = True
    nb = table[:, ids]
    boundary = np.unique(nb[~in_a[nb]])
    # walk only into A: redirect edges whose target is outside A to -1
    sub = np.where(in_a[table], table, -1)
    depth = _bfs_depth(sub, boundary)
    return int(depth[ids].max())


def j1_candidate(index: BallIndex, omega) -> Fraction:
    """``|Omega| / || |grad 1_Omega|_1 ||_1``: inner plus outer boundary points.

    A certified lower bound for ``J_1`` (pointwise form) of any superset.
    """
    ids = _as_ids(index, omega)
    f = FunctionOnBall.zeros(index, exact=True)
    f.values[ids] = Fraction(1)
    grad = gradient(index, f, 1, "right")
    boundary = int((grad.values != 0).sum()) + len(grad.outside)
    return Fraction(len(ids), boundary)


# ---------------------------------------------------------------------------
# Profile curves
# ---------------------------------------------------------------------------


@dataclass
class ProfilePoint:
    argument: int
    value: object  # Fraction, int or float
    method: str
    bound_kind: str  # "exact", "lower" or "upper"
    volume: int | None = None  # V(argument) when the argument is a radius


@dataclass
class ProfileCurve:
    group: str
    p: float
    form: str  # gradient form: "avg", "pointwise"
    variable: str  # "radius" (J^b) or "volume" (j)
    points: list = field(default_factory=list)

    def values(self) -> list:
        return [pt.value for pt in self.points]

    def exact_nondecreasing(self) -> bool:
        ex = [float(pt.value) for pt in self.points if pt.bound_kind == "exact"]
        return all(a <= b for a, b in zip(ex, ex[1:]))

    # serialization ---------------------------------------------------------------
    def to_json(self) -> str:
        d = asdict(self)
        d["p"] = _fmt_p(self.p)
        for pt in d["points"]:
            pt["value"] = format_value(pt["value"])
        return json.dumps(d, indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "ProfileCurve":
        d = json.loads(text)
        pts = [ProfilePoint(**{**pt, "value": parse_value(pt["value"])}) for pt in d.pop("points")]
        d["p"] = _parse_p(d["p"])
        return cls(points=pts, **d)

    def to_csv(self, header: dict | None = None) -> str:
        buf = io.StringIO()
        meta = {"group": self.group, "p": _fmt_p(self.p), "form": self.form, "variable": self.variable}
        meta.update(header or {})
        for k, v in meta.items():
            buf.write(f"# {k}={v}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["r_or_v", "value", "bound_kind", "method", "volume"])
        for pt in self.points:
            w.writerow([pt.argument, format_value(pt.value), pt.bound_kind, pt.method,
                        "" if pt.volume is None else pt.volume])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "ProfileCurve":
        meta = {}
        lines = []
        for line in text.splitlines():
            if line.startswith("#"):
                k, _, v = line[1:].strip().partition("=")
                meta[k] = v
            elif line.strip():
                lines.append(line)
        rows = list(csv.DictReader(lines))
        pts = [
            ProfilePoint(int(r["r_or_v"]), parse_value(r["value"]), r["method"], r["bound_kind"],
                         int(r["volume"]) if r.get("volume") else None)
            for r in rows
        ]
        return cls(meta["group"], _parse_p(meta["p"]), meta["form"], meta["variable"], pts)


def format_value(v) -> str:
    """Rationals as ``num/den``, floats with 17 significant digits."""
    if isinstance(v, Fraction):
        return f"{v.numerator}/{v.denominator}"
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(int(v))
    return f"{float(v):.17g}"


def parse_value(s: str):
    if "/" in s:
        num, den = s.split("/")
        return Fraction(int(num), int(den))
    if s.lstrip("-").isdigit():
        return int(s)
    return float(s)


def _fmt_p(p) -> str:
    return "inf" if p == math.inf else str(int(p))


def _parse_p(s) -> float:
    if s in ("inf", math.inf):
        return math.inf
    return int(s)


def parse_p(s) -> float:
    """Parse ``1``, ``2``, ``3`` or ``inf``."""
    try:
        p = _parse_p(str(s))
    except ValueError:
        raise UsageError(f"p must be an integer >= 1 or 'inf', got {s!r}") from None
    if p != math.inf and p < 1:
        raise UsageError("p must be >= 1")
    return p


PROFILE_METHODS = {"spectral": 2, "inradius": math.inf, "candidates": 1, "folner": None}


def profile_in_balls(spec, p, rmax: int, method: str, family: str | None = None,
                     budget: int | None = None) -> ProfileCurve:
    """``J^b_{G,p}(r)`` for ``r <= rmax``: exact values or certified bounds.

    * ``spectral`` (p=2): exact averaged-form value ``lambda_min(B(r))^-1/2``;
    * ``inradius`` (p=inf): exact value ``r + 1``-type inradius;
    * ``candidates`` (p=1): lower bound from indicator functions of sub-balls;
    * ``folner`` (any p): lower bounds from controlled Følner pairs, argument
      is the radius containing ``F'_n``.
    """
    G = as_group(spec)
    p = parse_p(p)
    if method not in PROFILE_METHODS:
        raise UsageError(f"unknown method {method!r}; choose from {sorted(PROFILE_METHODS)}")
    want = PROFILE_METHODS[method]
    if want is not None and want != p:
        raise UsageError(f"method {method} computes p={_fmt_p(want)}, not p={_fmt_p(p)}")
    kw = {} if budget is None else {"budget": budget}
    if method == "folner":
        from .folner import folner_profile_bound

        return folner_profile_bound(G, family, rmax, p).in_balls
    if method == "spectral":
        index = build_ball(G, rmax, **kw)
        curve = ProfileCurve(str(G.spec), p, "avg", "radius")
        for r in range(rmax + 1):
            res = j2_spectral(index, index.ball_ids(r))
            curve.points.append(ProfilePoint(r, res.j2avg, f"spectral-{res.method}", "exact", index.growth[r]))
        return curve
    index = build_ball(G, rmax + 1, **kw)
    curve = ProfileCurve(str(G.spec), p, "pointwise", "radius")
    best = Fraction(0)
    for r in range(rmax + 1):
        if method == "inradius":
            curve.points.append(ProfilePoint(r, jinf_inradius(index, index.ball_ids(r)), "inradius", "exact",
                                             index.growth[r]))
        else:
            best = max(best, j1_candidate(index, index.ball_ids(r)))
            curve.points.append(ProfilePoint(r, best, "candidates", "lower", index.growth[r]))
    return curve


# ---------------------------------------------------------------------------
# Sobolev comparison
# ---------------------------------------------------------------------------


@dataclass
class SobolevReport:
    phi: str
    C: float
    Cp: float
    offset: float
    max_violation: float
    excluded: list  # arguments where phi(Cp * arg) <= 0


def _phi(name: str):
    if name == "log":
        return np.log
    if name == "linear":
        return lambda x: np.asarray(x, float)
    if name == "constant":
        return lambda x: np.ones_like(np.asarray(x, float))
    if name.startswith("power"):
        alpha = float(name.split(":", 1)[1]) if ":" in name else 1.0
        return lambda x: np.asarray(x, float) ** alpha
    raise UsageError(f"unknown profile {name!r}; use log, linear, constant or power:<alpha>")


def sobolev_check(curve: ProfileCurve | Sequence, phi: str, C: float | None = None,
                  Cp: float | None = None, offset: float = 0.0) -> SobolevReport:
    """Least ``C`` (and ``C'`` for ``log``) with ``value <= C phi(C' arg) + offset``.

    When ``C`` and ``Cp`` are given nothing is fitted and the report carries
    the largest violation of the given inequality over the measured points.
    """
    pts = curve.points if isinstance(curve, ProfileCurve) else curve
    if not pts:
        raise UsageError("empty curve")
    args = np.array([float(pt.argument) for pt in pts])
    vals = np.array([float(pt.value) for pt in pts]) - offset
    f = _phi(phi)
    if C is None:
        grid = np.geomspace(1.0, 1e6, 241) if phi == "log" else np.array([1.0])
        if Cp is not None:
            grid = np.array([Cp])
        best = None
        for cp in grid:
            ph = f(cp * args)
            ok = ph > 0
            if not ok.any():
                continue
            c = float(np.max(vals[ok] / ph[ok]))
            if best is None or c < best[0]:
                best = (c, cp)
        if best is None:
            raise UsageError(f"phi={phi} is nonpositive on every measured argument")
        C, Cp = best
    Cp = 1.0 if Cp is None else Cp
    ph = f(Cp * args)
    ok = ph > 0
    viol = float(np.max(vals[ok] - C * ph[ok])) if ok.any() else 0.0
    return SobolevReport(phi, float(C), float(Cp), offset, viol, [int(a) for a in args[~ok]])
