"""Twisting structures by filtered elements and by filtered families.

Completeness is realized t-adically: scalars live in ``Q[t]/(t^N)`` and every
twisting element is divisible by t, so every infinite sum is finite.

A twist places one gauge vertex per input it fills.  A twisted component of
weight w only receives terms from components of weight at most
``w + N - 1``, hence the result is exact up to weight ``W - (N - 1)``
(:func:`exact_weight`).
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial

from .convolution import ConvElement, level_above, weight
from .graded_linear import GradedModule, MultiMap, distinct_arrangements, sort_with_sign

__all__ = [
    "DEFAULT_ORDER",
    "TruncPoly",
    "TwistData",
    "exact_weight",
    "lift_scalars",
    "mc_equations_residual",
    "twist",
    "generalized_twist",
    "kernel_components",
    "is_curved",
    "structure_to_json",
    "structure_from_json",
]

DEFAULT_ORDER = 4


class TruncPoly:
    """Polynomial in t with rational coefficients, truncated at ``t^order``.

    >>> t = TruncPoly.t(3)
    >>> str(t * t + 2), str(t * t * t)
    ('2 + 1 * t^2', '0')
    """

    __slots__ = ("coeffs", "order")

    def __init__(self, coeffs, order: int = DEFAULT_ORDER):
        if order < 1:
            raise ValueError("truncation order must be positive")
        coeffs = [Fraction(c) for c in coeffs][:order]
        coeffs += [Fraction(0)] * (order - len(coeffs))
        self.coeffs = tuple(coeffs)
        self.order = order

    @classmethod
    def t(cls, order: int = DEFAULT_ORDER, power: int = 1, coeff=1):
        out = [0] * order
        if power < order:
            out[power] = coeff
        return cls(out, order)

    @classmethod
    def const(cls, c, order: int = DEFAULT_ORDER):
        return cls([c], order)

    def valuation(self):
        """Lowest power of t with non-zero coefficient; ``order`` for zero."""
        for i, c in enumerate(self.coeffs):
            if c:
                return i
        return self.order

    def _coerce(self, other):
        if isinstance(other, TruncPoly):
            if other.order != self.order:
                raise ValueError("truncation orders differ")
            return other
        if isinstance(other, (int, Fraction)):
            return TruncPoly.const(other, self.order)
        return None

    def __add__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return TruncPoly([a + b for a, b in zip(self.coeffs, other.coeffs)], self.order)

    __radd__ = __add__

    def __neg__(self):
        return TruncPoly([-a for a in self.coeffs], self.order)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        out = [Fraction(0)] * self.order
        for i, a in enumerate(self.coeffs):
            if a:
                for j in range(self.order - i):
                    if other.coeffs[j]:
                        out[i + j] += a * other.coeffs[j]
        return TruncPoly(out, self.order)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            return TruncPoly([a / other for a in self.coeffs], self.order)
        return NotImplemented

    def __bool__(self):
        return any(self.coeffs)

    def __eq__(self, other):
        if isinstance(other, TruncPoly) and other.order != self.order:
            return False
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return self.coeffs == other.coeffs

    def __hash__(self):
        return hash((self.coeffs, self.order))

    def __repr__(self):
        return f"TruncPoly({[str(c) for c in self.coeffs]}, order={self.order})"

    def terms(self):
        """``(power, coefficient)`` pairs with non-zero coefficient."""
        return [(i, c) for i, c in enumerate(self.coeffs) if c]

    def __str__(self):
        parts = []
        for i, c in self.terms():
            parts.append(str(c) if i == 0 else f"{c} * t^{i}")
        return " + ".join(parts) if parts else "0"

    @classmethod
    def parse(cls, text: str, order: int = DEFAULT_ORDER) -> "TruncPoly":
        """Inverse of ``str``: a sum of ``"p/q"`` and ``"p/q * t^j"`` terms."""
        out = cls.const(0, order)
        for term in text.split(" + "):
            m = re.fullmatch(r"\s*(-?\d+(?:/\d+)?)\s*(?:\*\s*t\^(\d+))?\s*", term)
            if not m:
                raise ValueError(f"cannot parse scalar term {term!r}")
            out = out + cls.t(order, int(m.group(2) or 0), Fraction(m.group(1)))
        return out


def lift_scalars(alpha: ConvElement, order: int) -> ConvElement:
    """Rational coefficients promoted to ``Q[t]/(t^order)``."""
    return alpha.map_coefficients(lambda c: c if isinstance(c, TruncPoly) else TruncPoly.const(c, order))


def exact_weight(weight_bound: int, order: int) -> int:
    return weight_bound - (order - 1)


@dataclass(frozen=True)
class TwistData:
    """A filtered degree-0 family ``{a^g_m}``; a single element is the
    family concentrated at ``(m, g) = (1, 0)``.

    ``entries[(m, g)]`` maps a sorted word to the coefficient carried by each
    of its orderings in the symmetric tensor.
    """

    module: GradedModule
    order: int = DEFAULT_ORDER
    entries: dict = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        for (m, g), vec in self.entries.items():
            if m < 1 or g < 0:
                raise ValueError(f"invalid family index {(m, g)}")
            row = {}
            for word, c in vec.items():
                word, sign = sort_with_sign(tuple(word), self.module)
                if len(word) != m:
                    raise ValueError(f"word {word} does not have {m} letters")
                if self.module.word_degree(word) != 0:
                    raise ValueError("twisting entries must have degree 0")
                c = c if isinstance(c, TruncPoly) else TruncPoly.const(c, self.order)
                if c.order != self.order:
                    raise ValueError("truncation orders differ")
                if c and c.valuation() < 1:
                    raise ValueError("twisting entries must be divisible by t")
                if sign:
                    row[word] = row.get(word, 0) + sign * c
            row = {w: c for w, c in row.items() if c}
            if row:
                clean[(m, g)] = row
        object.__setattr__(self, "entries", clean)

    @classmethod
    def element(cls, module, vector, order: int = DEFAULT_ORDER) -> "TwistData":
        """Single element from ``{basis name: coefficient}``."""
        return cls(module, order, {(1, 0): {(module.index(k),): c for k, c in vector.items()}})

    @property
    def is_element(self):
        return set(self.entries) <= {(1, 0)}

    def vector(self) -> dict:
        """Letter index to coefficient for a single element."""
        if not self.is_element:
            raise ValueError("not a single element")
        return {w[0]: c for w, c in self.entries.get((1, 0), {}).items()}

    def __add__(self, other):
        if (self.module, self.order) != (other.module, other.order):
            raise ValueError("incompatible twisting data")
        entries = {k: dict(v) for k, v in self.entries.items()}
        for k, vec in other.entries.items():
            row = entries.setdefault(k, {})
            for w, c in vec.items():
                row[w] = row.get(w, 0) + c
        return TwistData(self.module, self.order, entries)

    def __neg__(self):
        return TwistData(self.module, self.order, {k: {w: -c for w, c in v.items()} for k, v in self.entries.items()})

    def gauge(self, weight_bound: int) -> ConvElement:
        """``1 + sum a^g_m`` with each entry as an ``(m, 0, g)`` component."""
        comps = {(m, 0, g): MultiMap(self.module, 0, m, 0, {(): dict(vec)}) for (m, g), vec in self.entries.items()}
        return ConvElement(self.module, comps, weight_bound, unit=True)

    def to_json(self) -> str:
        names = self.module.names
        rows = []
        for (m, g), vec in sorted(self.entries.items()):
            for word, c in sorted(vec.items()):
                for power, coeff in c.terms():
                    rows.append({"m": m, "g": g, "word": [names[i] for i in word],
                                 "coeff": f"{coeff} * t^{power}"})
        return json.dumps({"order_N": self.order, "module": _module_json(self.module), "entries": rows}, indent=2)

    @classmethod
    def from_json(cls, text: str, module: GradedModule | None = None) -> "TwistData":
        data = json.loads(text)
        if module is None:
            module = _module_from_json(data["module"])
        order = data["order_N"]
        entries = {}
        for row in data["entries"]:
            vec = entries.setdefault((row["m"], row["g"]), {})
            word = module.word_from_names(row["word"])
            vec[word] = vec.get(word, 0) + TruncPoly.parse(row["coeff"], order)
        return cls(module, order, entries)


def _module_json(module):
    return {"names": list(module.names), "degrees": list(module.degrees)}


def _module_from_json(data):
    return GradedModule(data["names"], data["degrees"])


def mc_equations_residual(nu: ConvElement, a: TwistData) -> dict:
    """``sum_n (1/n!) nu^g_{m,n}(a, ..., a)`` for every ``(m, g)`` whose
    terms are all known below the weight bound of ``nu``.

    ``nu`` is the full structure, differential component included.  Values
    are dictionaries from sorted output words to scalars; zero entries are
    dropped, and so are vanishing ``(m, g)``.
    """
    if not a.is_element:
        raise ValueError("the equations are stated for a single element")
    vec = a.vector()
    N, W = a.order, nu.weight_bound
    residuals = {}
    for (m, n, g), f in sorted(nu.components.items()):
        # (1/n!) nu(a^n) vanishes for n >= N; all n < N must be known
        if n == 0 or n >= N or weight((m, N - 1, g)) > W:
            continue
        total = residuals.setdefault((m, g), {})
        for x, row in f.coeffs.items():
            scalar = TruncPoly.const(Fraction(distinct_arrangements(x), factorial(n)), N)
            for letter in x:
                scalar = scalar * vec.get(letter, 0)
            if scalar:
                for u, c in row.items():
                    total[u] = total.get(u, 0) + scalar * c
    residuals = {k: {u: c for u, c in v.items() if c} for k, v in residuals.items()}
    return {k: v for k, v in residuals.items() if v}


def generalized_twist(alpha: ConvElement, family: TwistData, keep_incomplete: bool = False) -> ConvElement:
    """``alpha <| (1 + sum a^g_m)``: gauge vertices and identities fill the
    inputs of alpha in all ways.

    The result keeps its arity-zero (curvature) components.  Unless
    ``keep_incomplete`` is set it is truncated to :func:`exact_weight`.
    """
    if alpha.unit:
        raise ValueError("twist a structure, not a gauge element")
    lifted = lift_scalars(alpha, family.order)
    out = level_above(lifted, family.gauge(alpha.weight_bound))
    if not keep_incomplete:
        out = out.truncated(exact_weight(alpha.weight_bound, family.order))
    return out


def twist(nu: ConvElement, a: TwistData, keep_incomplete: bool = False) -> ConvElement:
    """Twist by a single filtered element; curved when ``a`` is not
    Maurer-Cartan (see :func:`is_curved`)."""
    if not a.is_element:
        raise ValueError("use generalized_twist for families")
    return generalized_twist(nu, a, keep_incomplete)


def kernel_components(alpha: ConvElement) -> dict:
    """Non-zero arity ``(m, 0)`` components as ``{(m, g): {word: scalar}}``."""
    out = {}
    for (m, n, g), f in sorted(alpha.components.items()):
        if n == 0 and not f.is_zero():
            out[(m, g)] = dict(f.value(()))
    return out


def is_curved(alpha: ConvElement) -> bool:
    return bool(kernel_components(alpha))


def structure_to_json(alpha: ConvElement, order: int | None = None) -> str:
    """Serialize a structure whose scalars may be truncated polynomials."""
    names = alpha.module.names
    comps = {}
    for (m, n, g), f in sorted(alpha.components.items()):
        comps[f"{m},{n},{g}"] = [[[names[i] for i in x], [names[i] for i in u], str(c)]
                                 for x, u, c in sorted(f.items(), key=lambda e: (e[0], e[1]))]
    return json.dumps({
        "module": _module_json(alpha.module),
        "weight_bound": alpha.weight_bound,
        "degree": alpha.degree,
        "order_N": order,
        "curved": is_curved(alpha),
        "components": comps,
    }, indent=2)


def structure_from_json(text: str) -> ConvElement:
    """Read either plain rational structures or truncated-polynomial ones."""
    data = json.loads(text)
    module = _module_from_json(data["module"])
    order = data.get("order_N")
    degree = data.get("degree", -1)
    comps = {}
    for key, entries in data["components"].items():
        m, n, g = (int(v) for v in key.split(","))
        rows = []
        for x, u, c in entries:
            value = TruncPoly.parse(c, order) if order else Fraction(c)
            rows.append((module.word_from_names(x), module.word_from_names(u), value))
        comps[(m, n, g)] = MultiMap.from_entries(module, n, m, degree, rows)
    return ConvElement(module, comps, data["weight_bound"], data.get("unit", False))

