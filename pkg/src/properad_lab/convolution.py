"""Genus-graded convolution algebra of symmetric multilinear maps.

An element is a family of :class:`MultiMap` components indexed by
``(m, n, g)``: m outputs, n inputs, genus g, weight ``m + n + 2g - 2``.
Products and level actions sum over connected two-level graphs whose
leaves are labelled and whose internal edges are not.  Graphs with
automorphisms (several identical input-free vertices) are weighted by
``1/|Aut|``.

Structures carry their differential as the ``(1, 1, 0)`` component, so the
Maurer-Cartan residual of ``delta + nu`` is ``alpha * alpha``; an explicit
differential may still be supplied.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial

from .graded_linear import (
    GradedModule,
    MultiMap,
    distinct_arrangements,
    extend_differential,
    merge_words,
    sort_with_sign,
    splits,
    symmetric_basis,
)

__all__ = [
    "DEFAULT_WEIGHT_BOUND",
    "UNIT_KEY",
    "weight",
    "ConvElement",
    "star",
    "star_components",
    "bracket",
    "differential",
    "level_below",
    "level_above",
    "mc_residual",
    "check_infinity_isotopy",
]

DEFAULT_WEIGHT_BOUND = 6
UNIT_KEY = (1, 1, 0)


def weight(key) -> int:
    m, n, g = key
    return m + n + 2 * g - 2


@dataclass(frozen=True)
class ConvElement:
    """Truncated element of the convolution algebra.

    ``components`` never contains the identity: with ``unit`` set the
    element stands for ``1 + components``.
    """

    module: GradedModule
    components: dict = field(default_factory=dict)
    weight_bound: int = DEFAULT_WEIGHT_BOUND
    unit: bool = False

    def __post_init__(self):
        clean = {}
        for key, f in self.components.items():
            key = tuple(key)
            m, n, g = key
            if m < 1 or n < 0 or g < 0:
                raise ValueError(f"invalid component key {key}")
            if (f.m, f.n) != (m, n):
                raise ValueError(f"component {key} has arity ({f.m},{f.n})")
            if f.module != self.module:
                raise ValueError("component over a different module")
            if weight(key) <= self.weight_bound and not f.is_zero():
                clean[key] = f
        object.__setattr__(self, "components", clean)
        degrees = {f.degree for f in clean.values()}
        if len(degrees) > 1:
            raise ValueError(f"mixed degrees {sorted(degrees)}")
        if self.unit and degrees - {0}:
            raise ValueError("a unit element must have degree 0")

    # -- construction --------------------------------------------------------
    @classmethod
    def zero(cls, module, weight_bound=DEFAULT_WEIGHT_BOUND):
        return cls(module, {}, weight_bound)

    @classmethod
    def one(cls, module, weight_bound=DEFAULT_WEIGHT_BOUND):
        return cls(module, {}, weight_bound, unit=True)

    @classmethod
    def single(cls, key, f, weight_bound=DEFAULT_WEIGHT_BOUND):
        return cls(f.module, {tuple(key): f}, weight_bound)

    @property
    def degree(self):
        for f in self.components.values():
            return f.degree
        return 0

    def get(self, key) -> MultiMap:
        key = tuple(key)
        if key in self.components:
            return self.components[key]
        m, n, _ = key
        return MultiMap.zero(self.module, n, m, self.degree)

    def effective(self) -> dict:
        """Components with the identity added at ``(1, 1, 0)`` when unital."""
        comps = dict(self.components)
        if self.unit:
            ident = MultiMap.identity(self.module)
            comps[UNIT_KEY] = comps[UNIT_KEY] + ident if UNIT_KEY in comps else ident
        return comps

    def truncated(self, weight_bound) -> "ConvElement":
        return ConvElement(self.module, self.components, weight_bound, self.unit)

    def without_unit(self) -> "ConvElement":
        return ConvElement(self.module, self.components, self.weight_bound, False)

    def with_unit(self) -> "ConvElement":
        return ConvElement(self.module, self.components, self.weight_bound, True)

    def map_coefficients(self, fn) -> "ConvElement":
        return ConvElement(self.module, {k: f.map_coefficients(fn) for k, f in self.components.items()},
                           self.weight_bound, self.unit)

    # -- linear structure --------------------------------------------------------
    def __add__(self, other):
        if isinstance(other, int) and other == 0:
            return self
        self._check_module(other)
        comps = dict(self.components)
        for key, f in other.components.items():
            comps[key] = comps[key] + f if key in comps else f
        if self.unit and other.unit:
            raise ValueError("adding two unital elements")
        return ConvElement(self.module, comps, min(self.weight_bound, other.weight_bound),
                           self.unit or other.unit)

    __radd__ = __add__

    def __neg__(self):
        if self.unit:
            raise ValueError("cannot negate a unital element")
        return self.scale(-1)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c):
        return ConvElement(self.module, {k: f.scale(c) for k, f in self.components.items()},
                           self.weight_bound, self.unit)

    def is_zero(self):
        return not self.components and not self.unit

    def __eq__(self, other):
        if isinstance(other, int) and other == 0:
            return self.is_zero()
        if not isinstance(other, ConvElement):
            return NotImplemented
        if self.module != other.module or self.unit != other.unit:
            return False
        keys = set(self.components) | set(other.components)
        return all(self.get(k) == other.get(k) for k in keys)

    def _check_module(self, other):
        if self.module != other.module:
            raise ValueError("elements over different ground modules")

    def nonzero_keys(self):
        return sorted(self.components)

    def __repr__(self):
        unit = "1 + " if self.unit else ""
        return f"ConvElement({unit}{self.nonzero_keys()}, W={self.weight_bound})"

    # -- serialization -------------------------------------------------------------
    def to_json(self) -> str:
        names = self.module.names
        payload = {
            "module": {"names": list(names), "degrees": list(self.module.degrees)},
            "weight_bound": self.weight_bound,
            "unit": self.unit,
            "degree": self.degree,
            "components": {
                f"{m},{n},{g}": [
                    [[names[i] for i in x], [names[i] for i in u], str(c)]
                    for x, u, c in sorted(f.items())
                ]
                for (m, n, g), f in sorted(self.components.items())
            },
        }
        return json.dumps(payload, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "ConvElement":
        data = json.loads(text)
        module = GradedModule(data["module"]["names"], data["module"]["degrees"])
        degree = data.get("degree", 0)
        comps = {}
        for key, entries in data["components"].items():
            m, n, g = (int(v) for v in key.split(","))
            comps[(m, n, g)] = MultiMap.from_entries(
                module, n, m, degree,
                [(module.word_from_names(x), module.word_from_names(u), Fraction(c)) for x, u, c in entries])
        return cls(module, comps, data["weight_bound"], data.get("unit", False))


def _parity_sign(a, b):
    return -1 if (a % 2 and b % 2) else 1


def _accumulate(acc, x, u, c):
    if not c:
        return
    row = acc.setdefault(x, {})
    row[u] = row.get(u, 0) + c


def star_components(f2: MultiMap, f1: MultiMap, k: int) -> MultiMap:
    """All graphs with f1 on top joined to f2 below by k edges."""
    module = f1.module
    if module != f2.module:
        raise ValueError("maps over different ground modules")
    if not 1 <= k <= min(f1.m, f2.n):
        raise ValueError("edge count out of range")
    deg = module.word_degree
    n = f1.n + f2.n - k
    acc = {}
    for x in symmetric_basis(module, n):
        for (x1, x2), s1, pos, _ in splits(x, (f1.n, f2.n - k), module):
            for u, c in f1.value(x1).items():
                for (q, p), s2, _, _ in splits(u, (f1.m - k, k), module):
                    # free outputs are placed by merge_words; only p is reordered
                    arr = distinct_arrangements(p)
                    s3 = _parity_sign(f2.degree, deg(q))
                    inp, s4 = sort_with_sign(p + x2, module)
                    if not s4:
                        continue
                    coef = s1 * s2 * s3 * s4 * pos * arr * c
                    for w, c2 in f2.value(inp).items():
                        out, fac = merge_words((q, w), module)
                        _accumulate(acc, x, out, coef * c2 * fac)
    return MultiMap(module, n, f1.m + f2.m - k, f1.degree + f2.degree, acc)


def star(f2: ConvElement, f1: ConvElement) -> ConvElement:
    """``f2 * f1``: f1 on top, f2 below, summed over connecting edge counts."""
    f2._check_module(f1)
    bound = min(f1.weight_bound, f2.weight_bound)
    comps1, comps2 = f1.effective(), f2.effective()
    out = {}
    for (m1, n1, g1), a in comps1.items():
        for (m2, n2, g2), b in comps2.items():
            for k in range(1, min(m1, n2) + 1):
                key = (m1 + m2 - k, n1 + n2 - k, g1 + g2 + k - 1)
                if weight(key) > bound:
                    continue
                term = star_components(b, a, k)
                out[key] = out[key] + term if key in out else term
    return ConvElement(f1.module, out, bound)


def bracket(x: ConvElement, y: ConvElement) -> ConvElement:
    """Graded commutator ``x*y - (-1)^{|x||y|} y*x``."""
    return star(x, y) - star(y, x).scale(_parity_sign(x.degree, y.degree))


def differential(f: ConvElement, d: MultiMap) -> ConvElement:
    """``d o f - (-1)^{|f|} f o d`` with d extended as a derivation."""
    if f.unit:
        f = f.without_unit()
    out = {}
    sign = -1 if f.degree % 2 else 1
    for (m, n, g), comp in f.components.items():
        term = comp.then(extend_differential(d, m))
        if n > 0:
            term = term - extend_differential(d, n).then(comp).scale(sign)
        out[(m, n, g)] = term
    return ConvElement(f.module, out, f.weight_bound)


def _vertex_types(comps, edge_side, total, budget):
    """Multisets of ``(key, edges)`` with the edges summing to ``total``.

    ``edge_side`` picks the arity that receives the edges (``"n"`` for a
    level below, ``"m"`` for a level above).  Multisets whose summed
    component weight exceeds ``budget`` are skipped.  Yields the canonical
    ordering together with the automorphism weight ``1/prod(count!)``.
    """
    types = []
    for key in sorted(comps):
        m, n, _ = key
        cap = n if edge_side == "n" else m
        for e in range(1, cap + 1):
            types.append((key, e, weight(key)))
    # suffix minimum of weight per edge bounds what the remaining edges can add
    floor = [0.0] * (len(types) + 1)
    floor[-1] = float("inf")
    for i in range(len(types) - 1, -1, -1):
        floor[i] = min(floor[i + 1], types[i][2] / types[i][1])

    def rec(i, left, wsum):
        if left == 0:
            if wsum <= budget:
                yield ()
            return
        if i == len(types) or wsum + left * floor[i] > budget:
            return
        key, e, w = types[i]
        for count in range(left // e + 1):
            for tail in rec(i + 1, left - count * e, wsum + count * w):
                yield ((key, e, count),) + tail if count else tail

    for chosen in rec(0, total, 0):
        seq, denominator = [], 1
        for key, e, count in chosen:
            seq.extend([(key, e)] * count)
            denominator *= factorial(count)
        yield seq, Fraction(1, denominator)


def _product_of_values(values):
    """Iterate over all choices of one output word per vertex."""
    items = [list(v.items()) for v in values]
    for combo in itertools.product(*items):
        coef = 1
        for _, c in combo:
            coef = coef * c
        yield tuple(w for w, _ in combo), coef


def level_below(X: ConvElement, y: ConvElement) -> ConvElement:
    """``X |> y``: one component of y on top, a level of X-vertices below
    receiving every output of y, identity vertices allowed."""
    if not X.unit:
        raise ValueError("level action needs a unital gauge element")
    X._check_module(y)
    module = y.module
    deg = module.word_degree
    bound = min(X.weight_bound, y.weight_bound)
    xcomps = X.effective()
    out = {}
    for ykey, ymap in y.effective().items():
        my, ny, gy = ykey
        budget = bound - weight(ykey)
        for seq, wfac in _vertex_types(xcomps, "n", my, budget):
            maps = [xcomps[key] for key, _ in seq]
            edges = [e for _, e in seq]
            extra = [key[1] - e for key, e in seq]
            rkey = (sum(key[0] for key, _ in seq), ny + sum(extra),
                    gy + sum(key[2] for key, _ in seq) + sum(e - 1 for e in edges))
            if weight(rkey) > bound:
                continue
            acc = {}
            for x in symmetric_basis(module, rkey[1]):
                for parts, s1, pos, _ in splits(x, (ny,) + tuple(extra), module):
                    xy, xs = parts[0], parts[1:]
                    for u, c in ymap.value(xy).items():
                        for pieces, s2, _, arr in splits(u, tuple(edges), module):
                            sign = s1 * s2
                            for r in range(len(seq)):
                                for s in range(r + 1, len(seq)):
                                    sign *= _parity_sign(deg(xs[r]), deg(pieces[s]))
                            values = []
                            before = 0
                            for r, f in enumerate(maps):
                                word, s3 = sort_with_sign(pieces[r] + xs[r], module)
                                sign *= s3 * _parity_sign(f.degree, before)
                                before += deg(word)
                                values.append(f.value(word) if s3 else {})
                            if not sign:
                                continue
                            coef = wfac * sign * pos * arr * c
                            for words, vc in _product_of_values(values):
                                res, fac = merge_words(words, module)
                                _accumulate(acc, x, res, coef * vc * fac)
            term = MultiMap(module, rkey[1], rkey[0], ymap.degree + sum(f.degree for f in maps), acc)
            out[rkey] = out[rkey] + term if rkey in out else term
    return ConvElement(module, out, bound)


def level_above(y: ConvElement, X: ConvElement) -> ConvElement:
    """``y <| X``: one component of y below, a level of X-vertices above
    feeding every input of y, identity vertices allowed."""
    if not X.unit:
        raise ValueError("level action needs a unital gauge element")
    X._check_module(y)
    module = y.module
    deg = module.word_degree
    bound = min(X.weight_bound, y.weight_bound)
    xcomps = X.effective()
    out = {}
    for ykey, ymap in y.effective().items():
        my, ny, gy = ykey
        budget = bound - weight(ykey)
        for seq, wfac in _vertex_types(xcomps, "m", ny, budget):
            maps = [xcomps[key] for key, _ in seq]
            edges = [e for _, e in seq]
            free = [key[0] - e for key, e in seq]
            ins = tuple(key[1] for key, _ in seq)
            rkey = (my + sum(free), sum(ins),
                    gy + sum(key[2] for key, _ in seq) + sum(e - 1 for e in edges))
            if weight(rkey) > bound:
                continue
            acc = {}
            for x in symmetric_basis(module, rkey[1]):
                for parts, s1, pos, _ in splits(x, ins, module):
                    sign0 = s1
                    before = 0
                    for r, f in enumerate(maps):
                        sign0 *= _parity_sign(f.degree, before)
                        before += deg(parts[r])
                    values = [f.value(p) for f, p in zip(maps, parts)]
                    for words, vc in _product_of_values(values):
                        for cut in itertools.product(*[
                                list(splits(v, (e, fr), module)) for v, e, fr in zip(words, edges, free)]):
                            sign = sign0
                            arr = 1
                            ps, qs = [], []
                            for (pq, s2, _, _) in cut:
                                sign *= s2
                                arr *= distinct_arrangements(pq[0])
                                ps.append(pq[0])
                                qs.append(pq[1])
                            for r in range(len(seq)):
                                for s in range(r + 1, len(seq)):
                                    sign *= _parity_sign(deg(qs[r]), deg(ps[s]))
                            inp, s4 = sort_with_sign(tuple(itertools.chain.from_iterable(ps)), module)
                            if not s4:
                                continue
                            coef = wfac * sign * s4 * pos * arr * vc
                            for w, c in ymap.value(inp).items():
                                res, fac = merge_words((w,) + tuple(qs), module)
                                _accumulate(acc, x, res, coef * c * fac)
            term = MultiMap(module, rkey[1], rkey[0], ymap.degree + sum(f.degree for f in maps), acc)
            out[rkey] = out[rkey] + term if rkey in out else term
    return ConvElement(module, out, bound)


def mc_residual(alpha: ConvElement, d: MultiMap | None = None) -> ConvElement:
    """``alpha * alpha``, plus ``d(alpha)`` when an external differential is given."""
    if alpha.unit or alpha.components and alpha.degree != -1:
        raise ValueError("a structure must be a degree -1 element without unit")
    res = star(alpha, alpha)
    if d is not None:
        res = res + differential(alpha, d)
    return res


def check_infinity_isotopy(alpha: ConvElement, beta: ConvElement, f: ConvElement,
                           d: MultiMap | None = None) -> ConvElement:
    """``beta <| (1+f) - (1+f) |> alpha + d(1+f)``; zero iff ``1+f`` is an
    infinity-isotopy from alpha to beta at this truncation."""
    for s in (alpha, beta):
        if s.components and s.degree != -1:
            raise ValueError("structures must have degree -1")
    if f.components and f.degree != 0:
        raise ValueError("the gauge part must have degree 0")
    gauge = f.with_unit()
    res = level_above(beta, gauge) - level_below(gauge, alpha)
    if d is not None:
        res = res + differential(f.without_unit(), d)
    return res
