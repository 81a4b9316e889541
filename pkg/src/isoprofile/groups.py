"""Finitely generated groups with exact canonical normal forms.

Elements are plain hashable values (tuples, strings, :class:`MAdic`), so they
can be used directly as dictionary keys.  Each supported group is a
:class:`Group` subclass that knows its law, its generating set and how to
(de)serialize elements.  Group specs use the grammar::

    zd:d=2   heis   lamplighter:p=2   bs:m=2   hall:q=2   hallq:q=2   f2

optionally followed by ``:gen=<id>`` to pick an alternative generating set.

Conventions
-----------
* Heisenberg ``(a, b, c)`` is the unipotent matrix with superdiagonal ``a, b``
  and corner ``c``; ``(a,b,c)(a',b',c') = (a+a', b+b', c+c'+ab')``.
* Lamplighter ``(k, f)`` is ``t^k`` followed by the lamp configuration ``f``
  written in the cursor frame; ``(k,f)(k',f') = (k+k', shift_{-k'} f + f')``
  where ``(shift_j f)(x) = f(x - j)``.  This is the ``(t,u)(s,v) = (ts, u^s v)``
  law of a semidirect product ``T x U``.
* BS(1,m) ``(k, P)`` is ``t^k x_P`` with ``t x_P t^-1 = x_{mP}``, so
  ``(k,P)(k',P') = (k+k', m^{-k'} P + P')``.
* Hall(q) ``(n, x, y, z)`` is the 4x4 matrix with diagonal
  ``(1, q^n, q^-n, 1)``, ``x`` at (1,2), ``y`` at (2,4) and ``z`` at (1,4):
  ``(n,x,y,z)(n',x',y',z') = (n+n', x q^{n'} + x', y + q^n y', z + z' + x y')``.
  The center is ``{(0,0,0,z)}``; ``hallq`` reduces ``z`` modulo 1.
* F2 elements are freely reduced strings over ``a, A, b, B`` (capital = inverse).
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from functools import lru_cache
from typing import Any, Hashable, Iterable, Sequence

from .errors import UsageError
from .madic import MAdic

Element = Hashable
LampConfig = tuple  # tuple[tuple[int, int], ...], sorted positions, nonzero values


# ---------------------------------------------------------------------------
# Specs
# ---------------------------------------------------------------------------

_KINDS = {
    "zd": ("d",),
    "heis": (),
    "lamplighter": ("p",),
    "bs": ("m",),
    "hall": ("q",),
    "hallq": ("q",),
    "f2": (),
}


@dataclass(frozen=True)
class GroupSpec:
    kind: str
    params: tuple = ()
    gen: str = "std"

    def param(self, name: str) -> int:
        return dict(self.params)[name]

    def __str__(self) -> str:
        parts = [self.kind] + [f"{k}={v}" for k, v in self.params]
        if self.gen != "std":
            parts.append(f"gen={self.gen}")
        return ":".join(parts)

    @property
    def group(self) -> "Group":
        return _build_group(self)


def parse_spec(spec: "str | GroupSpec") -> GroupSpec:
    """Parse a group spec string such as ``"lamplighter:p=2:gen=std"``."""
    if isinstance(spec, GroupSpec):
        return spec
    fields = [f for f in spec.strip().split(":") if f]
    if not fields or fields[0] not in _KINDS:
        raise UsageError(f"unknown group spec {spec!r}; kinds: {', '.join(_KINDS)}")
    kind = fields[0]
    values: dict[str, str] = {}
    for f in fields[1:]:
        if "=" not in f:
            raise UsageError(f"malformed field {f!r} in {spec!r}")
        k, v = f.split("=", 1)
        values[k] = v
    gen = values.pop("gen", "std")
    params = []
    for name in _KINDS[kind]:
        if name not in values:
            raise UsageError(f"{kind} needs parameter {name}")
        try:
            params.append((name, int(values.pop(name))))
        except ValueError:
            raise UsageError(f"parameter {name} must be an integer") from None
    if values:
        raise UsageError(f"unexpected parameters {sorted(values)} for {kind}")
    out = GroupSpec(kind, tuple(params), gen)
    out.group  # validates parameters and generating-set id
    return out


def as_group(spec: "str | GroupSpec | Group") -> "Group":
    if isinstance(spec, Group):
        return spec
    return parse_spec(spec).group


# ---------------------------------------------------------------------------
# Base class
# ---------------------------------------------------------------------------


class Group:
    """A finitely generated group with canonical normal forms.

    Subclasses set ``identity`` and ``generators`` (a tuple of
    ``(label, element)`` pairs forming a symmetric set without the identity).
    """

    identity: Element
    generators: tuple
    gen_ids: tuple = ("std",)

    def __init__(self, spec: GroupSpec):
        self.spec = spec
        if spec.gen not in self.gen_ids:
            raise UsageError(
                f"unknown generating set {spec.gen!r} for {spec.kind}; choose from {self.gen_ids}"
            )

    def __repr__(self) -> str:
        return f"<{type(self).__name__} {self.spec}>"

    # law -------------------------------------------------------------------
    def mul(self, a: Element, b: Element) -> Element:
        raise NotImplementedError

    def inv(self, a: Element) -> Element:
        raise NotImplementedError

    def contains(self, a: Any) -> bool:
        """True if ``a`` is a canonical element of this group."""
        raise NotImplementedError

    # generating set ------------------------------------------------------------
    @property
    def gens(self) -> list:
        return [g for _, g in self.generators]

    @property
    def labels(self) -> list[str]:
        return [lab for lab, _ in self.generators]

    def gen(self, label: str) -> Element:
        return dict(self.generators)[label]

    def inverse_index(self) -> list[int]:
        """For each generator index i, the index j with S[j] = S[i]^-1."""
        gens = self.gens
        lookup = {g: j for j, g in enumerate(gens)}
        return [lookup[self.inv(g)] for g in gens]

    # words ---------------------------------------------------------------------
    def evaluate(self, word: Iterable[str]) -> Element:
        table = dict(self.generators)
        table.update(self._extra_letters())
        g = self.identity
        for letter in word:
            g = self.mul(g, table[letter])
        return g

    def _extra_letters(self) -> dict:
        return {}

    def word(self, a: Element) -> list[str]:
        """A word in the standard generators evaluating to ``a``.

        Its length is an upper bound for the standard word length.  Only
        available for the standard generating set.
        """
        raise NotImplementedError(f"no normal-form word for {self.spec}")

    def random_word(self, rng: random.Random, length: int) -> list[str]:
        labels = self.labels
        return [rng.choice(labels) for _ in range(length)]

    def random_element(self, rng: random.Random, length: int = 10) -> Element:
        return self.evaluate(self.random_word(rng, length))

    # serialization -------------------------------------------------------------
    def serialize(self, a: Element) -> str:
        raise NotImplementedError

    def parse(self, s: str) -> Element:
        raise NotImplementedError


def _free_reduce(word: Sequence[str]) -> list[str]:
    """Cancel adjacent ``xX`` pairs of a label word (labels invert by swapcase)."""
    out: list[str] = []
    for letter in word:
        if out and out[-1] == letter.swapcase() and out[-1] != letter:
            out.pop()
        else:
            out.append(letter)
    return out


def _power(letter: str, n: int) -> list[str]:
    return [letter] * n if n >= 0 else [letter.swapcase()] * (-n)


# ---------------------------------------------------------------------------
# Z^d
# ---------------------------------------------------------------------------


class Zd(Group):
    gen_ids = ("std", "king")

    def __init__(self, spec: GroupSpec):
        super().__init__(spec)
        d = spec.param("d")
        if d < 1:
            raise UsageError("zd needs d >= 1")
        self.d = d
        self.identity = (0,) * d
        gens = []
        if spec.gen == "std":
            for i in range(d):
                e = [0] * d
                e[i] = 1
                gens.append((f"e{i + 1}", tuple(e)))
                e[i] = -1
                gens.append((f"E{i + 1}", tuple(e)))
        else:
            import itertools

            for v in itertools.product((-1, 0, 1), repeat=d):
                if any(v):
                    gens.append(("k" + "".join("+0-"[1 - x] for x in v), v))
        self.generators = tuple(gens)

    def mul(self, a, b):
        return tuple(x + y for x, y in zip(a, b))

    def inv(self, a):
        return tuple(-x for x in a)

    def contains(self, a):
        return isinstance(a, tuple) and len(a) == self.d and all(type(x) is int for x in a)

    def word(self, a):
        if self.spec.gen != "std":
            return super().word(a)
        w: list[str] = []
        for i, x in enumerate(a):
            w += _power(f"e{i + 1}", x)
        return w

    def serialize(self, a):
        return ",".join(map(str, a))

    def parse(self, s):
        return tuple(int(x) for x in s.split(","))


# ---------------------------------------------------------------------------
# Heisenberg
# ---------------------------------------------------------------------------


class Heisenberg(Group):
    gen_ids = ("std", "center")
    identity = (0, 0, 0)

    def __init__(self, spec: GroupSpec):
        super().__init__(spec)
        gens = [("x", (1, 0, 0)), ("X", (-1, 0, 0)), ("y", (0, 1, 0)), ("Y", (0, -1, 0))]
        if spec.gen == "center":
            gens += [("z", (0, 0, 1)), ("Z", (0, 0, -1))]
        self.generators = tuple(gens)

    def mul(self, a, b):
        return (a[0] + b[0], a[1] + b[1], a[2] + b[2] + a[0] * b[1])

    def inv(self, a):
        return (-a[0], -a[1], a[0] * a[1] - a[2])

    def contains(self, a):
        return isinstance(a, tuple) and len(a) == 3 and all(type(x) is int for x in a)

    @staticmethod
    def central_word(n: int) -> list[str]:
        """A short word for the central element ``(0, 0, n)`` built from commutators."""
        if n == 0:
            return []
        big, small = ("x", "y") if n > 0 else ("y", "x")
        m = abs(n)
        u = math.isqrt(m)
        if u * u < m:
            u += 1
        v, w = divmod(m, u)
        # [big^u, small^v] contributes +-u*v, [big, small^w] contributes +-w
        word = _power(big, u) + _power(small, v) + _power(big, -u) + _power(small, -v)
        if w:
            word += [big] + _power(small, w) + [big.swapcase()] + _power(small, -w)
        return word

    def word(self, a):
        if self.spec.gen != "std":
            return super().word(a)
        x, y, c = a
        return _power("x", x) + _power("y", y) + self.central_word(c - x * y)

    def serialize(self, a):
        return ",".join(map(str, a))

    def parse(self, s):
        a, b, c = (int(x) for x in s.split(","))
        return (a, b, c)


# ---------------------------------------------------------------------------
# Lamplighter F_p wr Z
# ---------------------------------------------------------------------------


def lamp_shift(f: LampConfig, j: int) -> LampConfig:
    """``(shift_j f)(x) = f(x - j)``."""
    if not j or not f:
        return f
    return tuple((pos + j, val) for pos, val in f)


def lamp_add(f: LampConfig, g: LampConfig, p: int) -> LampConfig:
    if not f:
        return g
    if not g:
        return f
    acc = dict(f)
    for pos, val in g:
        v = (acc.get(pos, 0) + val) % p
        if v:
            acc[pos] = v
        else:
            acc.pop(pos, None)
    return tuple(sorted(acc.items()))


def lamp_neg(f: LampConfig, p: int) -> LampConfig:
    return tuple((pos, (-val) % p) for pos, val in f)


def _is_prime(n: int) -> bool:
    return n >= 2 and all(n % k for k in range(2, math.isqrt(n) + 1))


class Lamplighter(Group):
    gen_ids = ("std", "switch")
    identity = (0, ())

    def __init__(self, spec: GroupSpec):
        super().__init__(spec)
        p = spec.param("p")
        if not _is_prime(p):
            raise UsageError(f"lamplighter needs a prime p, got {p}")
        self.p = p
        t, a = (1, ()), (0, ((0, 1),))
        if spec.gen == "std":
            gens = [("t", t), ("T", (-1, ())), ("a", a)]
            if p > 2:
                gens.append(("A", (0, ((0, p - 1),))))
        else:
            # t and t*a with inverses
            ta = self.mul(t, a)
            gens = [("t", t), ("T", (-1, ())), ("s", ta), ("S", self.inv(ta))]
        self.generators = tuple(gens)

    def _extra_letters(self):
        return {"A": (0, ((0, self.p - 1),))}

    def mul(self, a, b):
        k, f = a
        k2, g = b
        return (k + k2, lamp_add(lamp_shift(f, -k2), g, self.p))

    def inv(self, a):
        k, f = a
        return (-k, lamp_neg(lamp_shift(f, k), self.p))

    def contains(self, a):
        if not (isinstance(a, tuple) and len(a) == 2 and type(a[0]) is int and isinstance(a[1], tuple)):
            return False
        last = None
        for item in a[1]:
            if len(item) != 2:
                return False
            pos, val = item
            if not (0 < val < self.p) or (last is not None and pos <= last):
                return False
            last = pos
        return True

    @staticmethod
    def absolute(a) -> tuple:
        """Lamp configuration in the fixed frame (the cursor sits at ``k``)."""
        k, f = a
        return lamp_shift(f, k)

    def word_length(self, a) -> int:
        """Exact length for the standard generating set."""
        return len(self.word(a))

    def word(self, a):
        if self.spec.gen != "std":
            return super().word(a)
        k = a[0]
        lamps = dict(self.absolute(a))
        lo = min([0, k] + list(lamps))
        hi = max([0, k] + list(lamps))
        left_first = -lo + (hi - lo) + (hi - k)
        right_first = hi + (hi - lo) + (k - lo)
        stops = [lo, hi, k] if left_first <= right_first else [hi, lo, k]
        word: list[str] = []
        pos = 0
        done: set[int] = set()

        def light(x):
            if x in lamps and x not in done:
                v = lamps[x]
                word.extend(["a"] * v if v <= self.p - v else ["A"] * (self.p - v))
                done.add(x)

        light(0)
        for target in stops:
            step = 1 if target > pos else -1
            while pos != target:
                pos += step
                word.append("t" if step > 0 else "T")
                light(pos)
        return word

    def serialize(self, a):
        k, f = a
        return f"{k}|" + ",".join(f"{pos}:{val}" for pos, val in f)

    def parse(self, s):
        k, rest = s.split("|")
        f = tuple((int(x), int(y)) for x, y in (item.split(":") for item in rest.split(",") if item))
        return (int(k), f)


# ---------------------------------------------------------------------------
# BS(1, m)
# ---------------------------------------------------------------------------


def _balanced_digits(n: int, m: int) -> list[int]:
    digits = []
    while n:
        d = n % m
        if d > m // 2 or (2 * d == m and n < 0):
            d -= m
        digits.append(d)
        n = (n - d) // m
    return digits


class BaumslagSolitar(Group):
    gen_ids = ("std", "tx")

    def __init__(self, spec: GroupSpec):
        super().__init__(spec)
        m = spec.param("m")
        if m < 2:
            raise UsageError("bs needs m >= 2")
        self.m = m
        self.identity = (0, MAdic(0, 0, m))
        t, x = (1, MAdic(0, 0, m)), (0, MAdic(1, 0, m))
        gens = [("t", t), ("T", self.inv(t)), ("x", x), ("X", self.inv(x))]
        if spec.gen == "tx":
            tx = self.mul(t, x)
            gens += [("u", tx), ("U", self.inv(tx))]
        self.generators = tuple(gens)

    def mul(self, a, b):
        return (a[0] + b[0], a[1].scale(-b[0]) + b[1])

    def inv(self, a):
        k, P = a
        return (-k, -P.scale(k))

    def contains(self, a):
        return (
            isinstance(a, tuple)
            and len(a) == 2
            and type(a[0]) is int
            and isinstance(a[1], MAdic)
            and a[1].base == self.m
        )

    def x_word(self, n: int) -> list[str]:
        """Word for ``x_n`` (n an integer) from balanced base-m digits."""
        digits = _balanced_digits(n, self.m)
        w: list[str] = []
        for i, d in enumerate(digits):
            if i:
                w.append("t")
            w += _power("x", d)
        w += _power("t", -(len(digits) - 1)) if digits else []
        return w

    def word(self, a):
        if self.spec.gen != "std":
            return super().word(a)
        k, P = a
        e = P.exp
        return _free_reduce(_power("t", k - e) + self.x_word(P.num) + _power("t", e))

    def serialize(self, a):
        return f"{a[0]}|{a[1]}"

    def parse(self, s):
        k, P = s.split("|")
        return (int(k), MAdic.parse(P, self.m))


# ---------------------------------------------------------------------------
# Hall's group and its central quotient
# ---------------------------------------------------------------------------


class Hall(Group):
    quotient = False

    def __init__(self, spec: GroupSpec):
        super().__init__(spec)
        q = spec.param("q")
        if not _is_prime(q):
            raise UsageError(f"hall needs a prime q, got {q}")
        self.q = q
        zero = MAdic(0, 0, q)
        one = MAdic(1, 0, q)
        self.identity = (0, zero, zero, zero)
        gens = [
            ("t", (1, zero, zero, zero)),
            ("x", (0, one, zero, zero)),
            ("y", (0, zero, one, zero)),
        ]
        if not self.quotient:
            # in the quotient z = 1 is trivial
            gens.append(("z", (0, zero, zero, one)))
        full = []
        for lab, g in gens:
            full += [(lab, g), (lab.upper(), self.inv(g))]
        self.generators = tuple(full)

    def _reduce(self, z: MAdic) -> MAdic:
        return z.mod1() if self.quotient else z

    def mul(self, a, b):
        n, x, y, z = a
        n2, x2, y2, z2 = b
        return (n + n2, x.scale(n2) + x2, y + y2.scale(n), self._reduce(z + z2 + x * y2))

    def inv(self, a):
        n, x, y, z = a
        y_inv = -y.scale(-n)
        return (-n, -x.scale(-n), y_inv, self._reduce(-z - x * y_inv))

    def contains(self, a):
        if not (isinstance(a, tuple) and len(a) == 4 and type(a[0]) is int):
            return False
        if not all(isinstance(c, MAdic) and c.base == self.q for c in a[1:]):
            return False
        return not self.quotient or (0 <= a[3] < 1)

    def _coord_word(self, letter: str, value: MAdic) -> list[str]:
        # t^-1 x_a t = x_{qa};  t y_a t^-1 = y_{qa}
        up = "T" if letter == "x" else "t"
        digits = _balanced_digits(value.num, self.q)
        w: list[str] = []
        for i, d in enumerate(digits):
            if i:
                w.append(up)
            w += _power(letter, d)
        w += _power(up, -(len(digits) - 1)) if digits else []
        e = value.exp
        return _power(up, -e) + w + _power(up, e)

    def word(self, a):
        n, x, y, z = a
        q = self.q
        # (n, x, y, z) = t^n x_x y_{q^-n y} z_{z - x q^-n y}
        y0 = y.scale(-n)
        c = z - x * y0
        w = _power("t", n) + self._coord_word("x", x) + self._coord_word("y", y0)
        frac = c.mod1()
        whole = (c - frac).num
        if not self.quotient and whole:
            w += _power("z", whole)
        if not frac.is_zero():
            # z_{N q^-e} = [x_{q^-e}, y_N]
            xa = self._coord_word("x", MAdic(1, frac.exp, q))
            yb = self._coord_word("y", MAdic(frac.num, 0, q))
            w += xa + yb + _invert_word(xa) + _invert_word(yb)
        return _free_reduce(w)

    def serialize(self, a):
        return "|".join([str(a[0])] + [str(c) for c in a[1:]])

    def parse(self, s):
        n, x, y, z = s.split("|")
        q = self.q
        return (int(n), MAdic.parse(x, q), MAdic.parse(y, q), self._reduce(MAdic.parse(z, q)))


class HallQuotient(Hall):
    quotient = True


def _invert_word(w: Sequence[str]) -> list[str]:
    return [letter.swapcase() for letter in reversed(w)]


# ---------------------------------------------------------------------------
# Free group
# ---------------------------------------------------------------------------


class FreeGroup(Group):
    identity = ""
    generators = (("a", "a"), ("A", "A"), ("b", "b"), ("B", "B"))

    def mul(self, a, b):
        i = 0
        n = min(len(a), len(b))
        while i < n and a[-1 - i] == b[i].swapcase():
            i += 1
        return a[: len(a) - i] + b[i:]

    def inv(self, a):
        return a[::-1].swapcase()

    def contains(self, a):
        return (
            isinstance(a, str)
            and set(a) <= set("aAbB")
            and all(a[i] != a[i + 1].swapcase() for i in range(len(a) - 1))
        )

    def word(self, a):
        return list(a)

    def serialize(self, a):
        return a or "e"

    def parse(self, s):
        return "" if s == "e" else s


_CLASSES = {
    "zd": Zd,
    "heis": Heisenberg,
    "lamplighter": Lamplighter,
    "bs": BaumslagSolitar,
    "hall": Hall,
    "hallq": HallQuotient,
    "f2": FreeGroup,
}


@lru_cache(maxsize=None)
def _build_group(spec: GroupSpec) -> Group:
    return _CLASSES[spec.kind](spec)


# ---------------------------------------------------------------------------
# Checked public operations
# ---------------------------------------------------------------------------


def _check(group: Group, *elements) -> None:
    for e in elements:
        if not group.contains(e):
            raise UsageError(f"{e!r} is not a canonical element of {group.spec}")


def multiply(spec, a, b):
    group = as_group(spec)
    _check(group, a, b)
    return group.mul(a, b)


def inverse(spec, a):
    group = as_group(spec)
    _check(group, a)
    return group.inv(a)


def identity(spec):
    return as_group(spec).identity


# quotient maps ---------------------------------------------------------------


def _proj_bs(a):
    return (a[0],)


def _proj_heis(a):
    return (a[0], a[1])


def _proj_lamp(a):
    return (a[0],)


def _proj_hall(a):
    n, x, y, z = a
    return (n, x, y, z.mod1())


def quotient_map(G, Q):
    """The projection ``G -> Q`` as a plain function on elements."""
    g, q = as_group(G), as_group(Q)
    key = (g.spec.kind, q.spec.kind)
    if key == ("bs", "zd") and q.d == 1:
        return _proj_bs
    if key == ("heis", "zd") and q.d == 2:
        return _proj_heis
    if key == ("lamplighter", "zd") and q.d == 1:
        return _proj_lamp
    if key == ("hall", "hallq") and g.q == q.q:
        return _proj_hall
    raise UsageError(f"no quotient map {g.spec} -> {q.spec}")


def project(spec, quotient_spec, a):
    g = as_group(spec)
    _check(g, a)
    return quotient_map(g, quotient_spec)(a)


QUOTIENT_PAIRS = (
    ("bs:m=2", "zd:d=1"),
    ("heis", "zd:d=2"),
    ("lamplighter:p=2", "zd:d=1"),
    ("hall:q=2", "hallq:q=2"),
)


# subgroup inclusions -------------------------------------------------------------


def inclusion_map(H, G, kind: str | None = None):
    """The inclusion ``H -> G`` for the supported subgroup pairs.

    ``H`` is always ``Z`` (``zd:d=1``).  ``kind`` disambiguates
    ``Z -> Z`` (``"index2"``: n -> 2n); the other pairs have a single choice:
    Z^2 first axis, Heisenberg center, BS x-axis, lamplighter cursor.
    """
    h, g = as_group(H), as_group(G)
    if not (h.spec.kind == "zd" and h.d == 1):
        raise UsageError(f"unsupported subgroup {h.spec}")
    kind_g = g.spec.kind
    if kind_g == "zd" and g.d == 1 and kind == "index2":
        return lambda a: (2 * a[0],)
    if kind is not None and kind != "index2":
        raise UsageError(f"unknown embedding kind {kind!r}")
    if kind_g == "zd" and g.d >= 2:
        pad = (0,) * (g.d - 1)
        return lambda a: (a[0],) + pad
    if kind_g == "heis":
        return lambda a: (0, 0, a[0])
    if kind_g == "bs":
        m = g.m
        return lambda a: (0, MAdic(a[0], 0, m))
    if kind_g == "lamplighter":
        return lambda a: (a[0], ())
    raise UsageError(f"no embedding {h.spec} -> {g.spec}")


def embed(sub_spec, spec, a, kind: str | None = None):
    h = as_group(sub_spec)
    _check(h, a)
    return inclusion_map(h, spec, kind)(a)


def coset_key(H, G, kind: str | None = None):
    """Function sending ``g`` to a canonical label of its left coset ``gH``."""
    g = as_group(G)
    inclusion_map(H, g, kind)  # validates the pair
    kind_g = g.spec.kind
    if kind_g == "zd" and g.d == 1:
        return lambda a: a[0] % 2
    if kind_g == "zd":
        return lambda a: a[1:]
    if kind_g == "heis":
        return lambda a: (a[0], a[1])
    if kind_g == "bs":
        return lambda a: (a[0], a[1].mod1())
    if kind_g == "lamplighter":
        return Lamplighter.absolute
    raise UsageError(f"no coset labels for {g.spec}")


EMBED_PAIRS = (
    ("zd:d=1", "zd:d=2", None),
    ("zd:d=1", "heis", None),
    ("zd:d=1", "bs:m=2", None),
    ("zd:d=1", "lamplighter:p=2", None),
    ("zd:d=1", "zd:d=1", "index2"),
)

ALL_SPECS = ("zd:d=2", "heis", "lamplighter:p=2", "bs:m=2", "hall:q=2", "hallq:q=2", "f2")
