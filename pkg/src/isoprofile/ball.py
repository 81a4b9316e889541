"""Word-metric balls, growth series and one-sided neighborhoods."""

from __future__ import annotations

import io
import os
import struct
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

import numpy as np
from filelock import FileLock

from .errors import ResourceBudgetError, UsageError
from .groups import Group, GroupSpec, as_group

DEFAULT_BUDGET = 2 * 1024**3

CACHE_MAGIC = b"ISOBALL\0"
CACHE_VERSION = 1


@dataclass
class BallIndex:
    """The ball ``B(e, radius)`` with ids in BFS order.

    ``adjacency[i, x]`` is the id of ``x * S[i]`` or -1 when that product lies
    outside the ball.
    """

    group: Group
    radius: int
    elements: list
    lookup: dict
    sphere: np.ndarray
    adjacency: np.ndarray
    growth: list
    _left: np.ndarray | None = field(default=None, repr=False)

    @property
    def spec(self) -> GroupSpec:
        return self.group.spec

    def __len__(self) -> int:
        return len(self.elements)

    def id(self, g) -> int:
        return self.lookup[g]

    def ids(self, elements: Iterable) -> np.ndarray:
        return np.fromiter((self.lookup[g] for g in elements), dtype=np.int64)

    def ball_ids(self, r: int) -> np.ndarray:
        """Ids of ``B(e, r)`` (a prefix of the id range)."""
        return np.arange(self.growth[min(r, self.radius)])

    def translation(self, side: str = "right") -> np.ndarray:
        """Per-generator id maps ``x -> x s`` (right) or ``x -> s^-1 x`` (left).

        With this table the translate of a function is ``f[table[i]]``:
        ``rho(s) f (x) = f(x s)`` and ``lambda(s) f (x) = f(s^-1 x)``.
        """
        if side == "right":
            return self.adjacency
        if side != "left":
            raise UsageError(f"side must be 'left' or 'right', got {side!r}")
        if self._left is None:
            G = self.group
            inv_gens = [G.inv(s) for s in G.gens]
            table = np.full(self.adjacency.shape, -1, dtype=np.int64)
            get = self.lookup.get
            for i, s in enumerate(inv_gens):
                row = table[i]
                for x, g in enumerate(self.elements):
                    row[x] = get(G.mul(s, g), -1)
            self._left = table
        return self._left


def _deep_size(obj) -> int:
    size = sys.getsizeof(obj)
    if isinstance(obj, (tuple, list)):
        size += sum(_deep_size(o) for o in obj)
    elif hasattr(obj, "__slots__"):
        size += sum(_deep_size(getattr(obj, s)) for s in obj.__slots__ if not isinstance(getattr(obj, s), int))
    return size


def iter_spheres(spec, max_elements: int | None = None):
    """Yield BFS layers ``(r, layer)`` of the Cayley graph, layers sorted by serialization."""
    G = as_group(spec)
    gens = G.gens
    mul = G.mul
    key = G.serialize
    seen = {G.identity}
    layer = [G.identity]
    r = 0
    while True:
        yield r, layer
        new = set()
        for g in layer:
            for s in gens:
                h = mul(g, s)
                if h not in seen:
                    new.add(h)
        seen.update(new)
        if max_elements is not None and len(seen) > max_elements:
            raise ResourceBudgetError(
                f"ball of {G.spec} exceeds {max_elements} elements at radius {r + 1}", attained=r
            )
        layer = sorted(new, key=key)
        r += 1


def build_ball(spec, r: int, budget: int = DEFAULT_BUDGET, cache_dir: str | os.PathLike | None = None) -> BallIndex:
    """Enumerate ``B(e, r)`` by breadth-first search.

    Ids follow BFS order with ties inside a sphere broken by the serialized
    form, so two runs produce identical tables.  ``budget`` is an approximate
    memory budget in bytes; exceeding it raises :class:`ResourceBudgetError`
    carrying the last complete radius.
    """
    if r < 0:
        raise UsageError("radius must be >= 0")
    G = as_group(spec)
    if cache_dir is not None:
        path = cache_path(cache_dir, G.spec, r)
        with FileLock(str(path) + ".lock"):
            if path.exists():
                return load_ball(path)
            index = build_ball(G, r, budget)
            save_ball(index, path)
            return index

    gens = G.gens
    ngen = len(gens)
    mul = G.mul
    key = G.serialize
    lookup = {G.identity: 0}
    elements = [G.identity]
    growth = [1]
    adj_rows: list[list[int]] = []
    per_element = None
    layer = [G.identity]
    for k in range(1, r + 2):
        products = [[mul(g, s) for s in gens] for g in layer]
        if k <= r:
            new = {h for row in products for h in row if h not in lookup}
            layer_sorted = sorted(new, key=key)
            if per_element is None and layer_sorted:
                per_element = _deep_size(layer_sorted[0]) + 120 + 8 * ngen
            if per_element is not None and (len(elements) + len(layer_sorted)) * per_element > budget:
                raise ResourceBudgetError(
                    f"ball of {G.spec} at radius {k} exceeds the memory budget of {budget} bytes",
                    attained=k - 1,
                )
            for h in layer_sorted:
                lookup[h] = len(elements)
                elements.append(h)
            growth.append(len(elements))
        get = lookup.get
        adj_rows.extend([get(h, -1) for h in row] for row in products)
        if k <= r:
            layer = layer_sorted
    adjacency = np.array(adj_rows, dtype=np.int64).reshape(len(elements), ngen).T.copy()
    sphere = np.repeat(np.arange(r + 1), np.diff([0] + growth))
    return BallIndex(G, r, elements, lookup, sphere, adjacency, growth)


def word_length(index: BallIndex, g) -> int | None:
    """``|g|_S`` if ``g`` lies in the ball, else None."""
    i = index.lookup.get(g)
    return None if i is None else int(index.sphere[i])


# ---------------------------------------------------------------------------
# Cache files
# ---------------------------------------------------------------------------


def cache_path(cache_dir, spec, r: int) -> Path:
    name = str(spec).replace(":", "_").replace("=", "")
    Path(cache_dir).mkdir(parents=True, exist_ok=True)
    return Path(cache_dir) / f"{name}_r{r}.ball"


def _put_str(buf, s: str) -> None:
    b = s.encode()
    buf.write(struct.pack("<I", len(b)))
    buf.write(b)


def _get_str(buf) -> str:
    (n,) = struct.unpack("<I", buf.read(4))
    return buf.read(n).decode()


def dump_ball(index: BallIndex) -> bytes:
    buf = io.BytesIO()
    buf.write(CACHE_MAGIC)
    buf.write(struct.pack("<H", CACHE_VERSION))
    _put_str(buf, str(index.spec))
    buf.write(struct.pack("<IQ", index.radius, len(index)))
    ser = index.group.serialize
    for g in index.elements:
        _put_str(buf, ser(g))
    buf.write(struct.pack("<H", index.adjacency.shape[0]))
    for row in index.adjacency:
        src = np.nonzero(row >= 0)[0]
        pairs = np.stack([src, row[src]], axis=1).astype("<i8")
        buf.write(struct.pack("<Q", len(pairs)))
        buf.write(pairs.tobytes())
    return buf.getvalue()


def parse_ball(data: bytes) -> BallIndex:
    from .groups import parse_spec

    buf = io.BytesIO(data)
    if buf.read(len(CACHE_MAGIC)) != CACHE_MAGIC:
        raise UsageError("not a ball cache file")
    (version,) = struct.unpack("<H", buf.read(2))
    if version != CACHE_VERSION:
        raise UsageError(f"unsupported ball cache version {version}")
    G = parse_spec(_get_str(buf)).group
    radius, n = struct.unpack("<IQ", buf.read(12))
    elements = [G.parse(_get_str(buf)) for _ in range(n)]
    (ngen,) = struct.unpack("<H", buf.read(2))
    adjacency = np.full((ngen, n), -1, dtype=np.int64)
    for i in range(ngen):
        (count,) = struct.unpack("<Q", buf.read(8))
        pairs = np.frombuffer(buf.read(16 * count), dtype="<i8").reshape(count, 2)
        adjacency[i, pairs[:, 0]] = pairs[:, 1]
    lookup = {g: i for i, g in enumerate(elements)}
    sphere = _bfs_depth(adjacency, [0])
    growth = np.cumsum(np.bincount(sphere, minlength=radius + 1)).tolist()
    return BallIndex(G, radius, elements, lookup, sphere, adjacency, growth)


def save_ball(index: BallIndex, path) -> None:
    path = Path(path)
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_bytes(dump_ball(index))
    os.replace(tmp, path)


def load_ball(path) -> BallIndex:
    return parse_ball(Path(path).read_bytes())


def _bfs_depth(adjacency: np.ndarray, sources) -> np.ndarray:
    """Graph distance from ``sources`` along adjacency rows (-1 = unreached)."""
    n = adjacency.shape[1]
    depth = np.full(n, -1, dtype=np.int64)
    frontier = np.asarray(sources, dtype=np.int64)
    depth[frontier] = 0
    d = 0
    while frontier.size:
        d += 1
        nxt = adjacency[:, frontier].ravel()
        nxt = np.unique(nxt[nxt >= 0])
        nxt = nxt[depth[nxt] < 0]
        depth[nxt] = d
        frontier = nxt
    return depth


# ---------------------------------------------------------------------------
# Growth
# ---------------------------------------------------------------------------


@dataclass
class GrowthClass:
    kind: str  # "polynomial", "exponential" or "undetermined"
    degree: int | None
    slope: float  # log-log slope (polynomial model)
    rate: float  # nats per step (exponential model)
    rate_bracket: tuple
    residuals: dict
    window: tuple


def classify_growth(growth) -> GrowthClass:
    """Compare polynomial and exponential fits of a growth series ``V(0..r)``.

    Both models are fitted by least squares on the upper half of the radii,
    where preasymptotic effects are weakest.
    """
    V = np.asarray(growth, dtype=float)
    if len(V) < 8:
        raise UsageError(f"growth series too short ({len(V)} < 8)")
    rmax = len(V) - 1
    r = np.arange(max(1, rmax // 2), rmax + 1, dtype=float)
    y = np.log(V[r.astype(int)])

    def fit(x):
        A = np.c_[x, np.ones_like(x)]
        coef, *_ = np.linalg.lstsq(A, y, rcond=None)
        return coef, float(np.sum((A @ coef - y) ** 2))

    (slope, _), rss_poly = fit(np.log(r))
    (rate, _), rss_exp = fit(r)
    local = np.diff(y)
    bracket = (float(local.min()), float(local.max()))
    residuals = {"polynomial": rss_poly, "exponential": rss_exp}
    if abs(rss_poly - rss_exp) <= 0.1 * max(rss_poly, rss_exp):
        kind = "undetermined"
    elif rss_poly < rss_exp:
        kind = "polynomial"
    else:
        kind = "exponential"
    return GrowthClass(
        kind=kind,
        degree=int(round(slope)) if kind == "polynomial" else None,
        slope=float(slope),
        rate=float(rate),
        rate_bracket=bracket,
        residuals=residuals,
        window=(int(r[0]), rmax),
    )


# ---------------------------------------------------------------------------
# Neighborhoods
# ---------------------------------------------------------------------------


def closure_layers(spec, A: Iterable, k: int, side: str = "right", max_elements: int | None = None) -> dict:
    """Map each element of ``N_k(A)`` to the first ``i`` with the element in ``N_i``.

    ``N_0 = A`` and ``N_{i+1} = N_i u S N_i`` (left) or ``N_i u N_i S`` (right).
    """
    G = as_group(spec)
    if side not in ("left", "right"):
        raise UsageError(f"side must be 'left' or 'right', got {side!r}")
    mul = G.mul
    gens = G.gens
    depth = {g: 0 for g in A}
    frontier = list(depth)
    for i in range(1, k + 1):
        new = []
        for g in frontier:
            for s in gens:
                h = mul(s, g) if side == "left" else mul(g, s)
                if h not in depth:
                    depth[h] = i
                    new.append(h)
        if max_elements is not None and len(depth) > max_elements:
            raise ResourceBudgetError(f"neighborhood exceeds {max_elements} elements", attained=i - 1)
        frontier = new
    return depth


def neighborhood(spec, A: Iterable, k: int, side: str = "right", max_elements: int | None = None) -> frozenset:
    """The iterated one-step closure ``N_k(A)`` on the given side."""
    if k < 0:
        raise UsageError("k must be >= 0")
    return frozenset(closure_layers(spec, A, k, side, max_elements))
