"""Frobenius bialgebra instances and the hierarchy they induce.

Given a chain complex ``(A, d)`` whose underlying module carries a Frobenius
bialgebra ``(mu, Delta)``, the gauge element ``Theta = sum mu^g_{m,n}``
determines a unique degree -1 element ``nu`` with
``d(Theta) = Theta |> nu``.  Two independent routes compute ``nu``:

* :func:`hierarchy_closed` assembles three families of explicit composites
  weighted by the coefficients A and C;
* :func:`hierarchy_solve` peels ``nu`` off the gauge equation weight by weight.

Their agreement on concrete instances is the central consistency check.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from fractions import Fraction
from math import factorial

from .coefficients import CoeffTable, a_recursive, c_recursive, genus0_a
from .combinatorics import shuffles
from .convolution import (
    DEFAULT_WEIGHT_BOUND,
    UNIT_KEY,
    ConvElement,
    differential,
    level_below,
    weight,
)
from .graded_linear import (
    GradedModule,
    MultiMap,
    TensorMap,
    act_on_inputs,
    act_on_outputs,
    compose_subset,
    sort_with_sign,
    tensor,
)

__all__ = [
    "FrobInstance",
    "HierarchyError",
    "check_axioms",
    "mu_gmn",
    "build_theta",
    "structure",
    "hierarchy_closed",
    "hierarchy_solve",
    "genus0_structure",
    "ell_n",
    "c_m",
    "e2_instance",
    "coalgebra_instance",
    "idempotent_instance",
    "exterior_instance",
    "shifted_dual_instance",
    "odd_pair_instance",
    "INSTANCES",
    "instance_search",
]


class HierarchyError(ArithmeticError):
    """The gauge equation could not be solved consistently."""


@dataclass(frozen=True)
class FrobInstance:
    """Structure maps stored on ordered words, so that asymmetric
    perturbations stay visible to :func:`check_axioms`."""

    name: str
    module: GradedModule
    d: TensorMap
    mu: TensorMap
    delta: TensorMap

    @classmethod
    def from_entries(cls, name, module, d, mu, delta, complete=True):
        """Build from ``(input names, output names, coefficient)`` triples.

        With ``complete`` every entry is propagated to all reorderings of its
        input and output words by the Koszul rule; otherwise the entries are
        taken literally.
        """
        return cls(name, module,
                   _tensor_from_entries(module, 1, 1, -1, d, complete),
                   _tensor_from_entries(module, 2, 1, 0, mu, complete),
                   _tensor_from_entries(module, 1, 2, 0, delta, complete))

    def to_json(self) -> str:
        names = self.module.names

        def dump(f):
            return [{"in": [names[i] for i in x], "out": [names[i] for i in u], "coeff": str(c)}
                    for x, u, c in sorted(f.items())]

        return json.dumps({
            "name": self.name,
            "basis": [{"name": n, "degree": d} for n, d in zip(names, self.module.degrees)],
            "d": dump(self.d), "mu": dump(self.mu), "delta": dump(self.delta),
        }, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "FrobInstance":
        data = json.loads(text)
        module = GradedModule([b["name"] for b in data["basis"]], [b["degree"] for b in data["basis"]])

        def load(key):
            return [(e["in"], e["out"], Fraction(e["coeff"])) for e in data.get(key, [])]

        return cls.from_entries(data.get("name", "instance"), module, load("d"), load("mu"),
                                load("delta"), complete=False)


def _tensor_from_entries(module, n, m, degree, entries, complete):
    coeffs = {}
    for ins, outs, c in entries:
        x = module.word_from_names(ins)
        u = module.word_from_names(outs)
        c = Fraction(c)
        variants = [(x, u, c)]
        if complete:
            variants = []
            for px in set(itertools.permutations(range(n))):
                xx = tuple(x[i] for i in px)
                _, sx = sort_with_sign(xx, module)
                _, s0 = sort_with_sign(x, module)
                for pu in set(itertools.permutations(range(m))):
                    uu = tuple(u[i] for i in pu)
                    _, su = sort_with_sign(uu, module)
                    _, s1 = sort_with_sign(u, module)
                    variants.append((xx, uu, c * sx * s0 * su * s1))
            variants = list({(a, b): (a, b, v) for a, b, v in variants}.values())
        for a, b, v in variants:
            if module.word_degree(b) - module.word_degree(a) != degree:
                raise ValueError(f"entry {ins}->{outs} has the wrong degree")
            row = coeffs.setdefault(a, {})
            row[b] = row.get(b, 0) + v
    return TensorMap(module, n, m, degree, coeffs)


# -- axioms ---------------------------------------------------------------------

def _first_difference(f: TensorMap, g: TensorMap):
    diff = f - g
    for x in sorted(diff.coeffs):
        return x
    return None


def _swap(module, n_first, n_second):
    """The symmetry isomorphism exchanging two tensor blocks."""
    perm = tuple(range(n_first, n_first + n_second)) + tuple(range(n_first))
    return act_on_inputs(TensorMap.identity(module, n_first + n_second), perm)


def check_axioms(F: FrobInstance) -> dict:
    """Map each axiom name to ``(holds, first failing input word or None)``."""
    A = F.module
    ident = TensorMap.identity(A)
    sw = _swap(A, 1, 1)
    zero11 = TensorMap(A, 1, 1, -2)
    checks = {
        "d squared": (F.d.then(F.d), zero11),
        "mu commutative": (sw.then(F.mu), F.mu),
        "mu associative": (tensor(F.mu, ident).then(F.mu), tensor(ident, F.mu).then(F.mu)),
        "delta cocommutative": (F.delta.then(sw), F.delta),
        "delta coassociative": (F.delta.then(tensor(F.delta, ident)), F.delta.then(tensor(ident, F.delta))),
        "frobenius left": (F.mu.then(F.delta), tensor(ident, F.delta).then(tensor(F.mu, ident))),
        "frobenius right": (F.mu.then(F.delta), tensor(F.delta, ident).then(tensor(ident, F.mu))),
    }
    report = {}
    for name, (lhs, rhs) in checks.items():
        witness = _first_difference(lhs, rhs)
        report[name] = (witness is None, None if witness is None else A.word_names(witness))
    return report


def _require_axioms(F):
    failed = {k: w for k, (ok, w) in check_axioms(F).items() if not ok}
    if failed:
        raise ValueError(f"instance {F.name!r} fails {failed}")


# -- Theta ------------------------------------------------------------------------

def _product_power(F, n):
    """``mu^{n-1}: A^(x)n -> A`` (identity for n = 1)."""
    out = TensorMap.identity(F.module)
    for _ in range(2, n + 1):
        out = tensor(out, TensorMap.identity(F.module)).then(F.mu)
    return out


def _coproduct_power(F, m):
    """``Delta^{m-1}: A -> A^(x)m`` (identity for m = 1)."""
    out = TensorMap.identity(F.module)
    for _ in range(2, m + 1):
        out = out.then(tensor(TensorMap.identity(F.module, out.m - 1), F.delta))
    return out


def _mu_gmn_tensor(F, m, n, g):
    handle = F.delta.then(F.mu)
    middle = TensorMap.identity(F.module)
    for _ in range(g):
        middle = middle.then(handle)
    return _product_power(F, n).then(middle).then(_coproduct_power(F, m))


def mu_gmn(F: FrobInstance, m: int, n: int, g: int) -> MultiMap:
    """``Delta^{m-1} o (mu Delta)^g o mu^{n-1}`` as a symmetric map."""
    if m < 1 or n < 1 or g < 0:
        raise ValueError("need m, n >= 1 and g >= 0")
    return _mu_gmn_tensor(F, m, n, g).to_multimap()


def build_theta(F: FrobInstance, W: int = DEFAULT_WEIGHT_BOUND) -> ConvElement:
    """``1 + sum mu^g_{m,n}`` over all non-identity components of weight <= W."""
    comps = {}
    for key in _keys(W):
        if key == UNIT_KEY:
            continue
        comps[key] = mu_gmn(F, *key)
    return ConvElement(F.module, comps, W, unit=True)


def _keys(W, min_weight=0):
    for w in range(min_weight, W + 1):
        for g in range(w // 2 + 2):
            for m in range(1, w + 3):
                n = w + 2 - 2 * g - m
                if n >= 1:
                    yield (m, n, g)


def _delta_element(F, W):
    return ConvElement(F.module, {UNIT_KEY: F.d.to_multimap()}, W)


def structure(F: FrobInstance, nu: ConvElement) -> ConvElement:
    """``delta + nu``: the structure with the differential as its (1,1,0) part."""
    return _delta_element(F, nu.weight_bound) + nu


# -- closed formula --------------------------------------------------------------

def _d_in_first_slot(F, lower):
    """``lower o_1 d``: the differential feeds the first input of ``lower``."""
    return compose_subset(F.d, [0], lower, [0])


def _type_a(F, m, k, l, g1, g2, flipped):
    upper = _mu_gmn_tensor(F, 1, k, g1)
    lower = _d_in_first_slot(F, _mu_gmn_tensor(F, m, l + 1, g2))
    core = compose_subset(upper, [0], lower, [0])
    return sum((act_on_inputs(core, s, flipped) for s in shuffles(k, l)), TensorMap(F.module, k + l, m, -1))


def _type_b(F, m, k, l, g, flipped):
    upper = _mu_gmn_tensor(F, 2, k, 0)
    lower = _d_in_first_slot(F, _mu_gmn_tensor(F, m - 1, l + 1, g))
    core = compose_subset(upper, [1], lower, [0])
    total = TensorMap(F.module, k + l, m, -1)
    for s in shuffles(k, l):
        moved = act_on_inputs(core, s, flipped)
        for t in shuffles(1, m - 1):
            total = total + act_on_outputs(moved, t, flipped)
    return total


def _type_c(F, m, n, g):
    """The g+1 parallel edges carry d on each edge in turn."""
    upper = _mu_gmn_tensor(F, g + 1, n, 0)
    lower = _mu_gmn_tensor(F, m, g + 1, 0)
    ident = TensorMap.identity(F.module)
    edges = list(range(g + 1))
    total = TensorMap(F.module, n, m, -1)
    for j in edges:
        marked = tensor(*[F.d if i == j else ident for i in edges]).then(lower)
        total = total + compose_subset(upper, edges, marked, edges)
    return total


def _closed_component(F, m, n, g, a_coeff, c_coeff, b_coeff, flipped):
    total = TensorMap(F.module, n, m, -1)
    for k in range(1, n + 1):
        l = n - k
        for g1 in range(g + 1):
            coef = a_coeff(m, l, g - g1)
            if coef:
                total = total + _type_a(F, m, k, l, g1, g - g1, flipped).scale(coef)
        if m >= 2:
            coef = b_coeff(m, k, l, g)
            if coef:
                total = total + _type_b(F, m, k, l, g, flipped).scale(coef)
    if g >= 1:
        coef = c_coeff(m, n, g)
        if coef:
            total = total + _type_c(F, m, n, g).scale(coef)
    return total.to_multimap()


def hierarchy_closed(F: FrobInstance, A_table: CoeffTable | None = None, C_table: CoeffTable | None = None,
                     W: int = DEFAULT_WEIGHT_BOUND, flipped: bool = False) -> ConvElement:
    """Assemble ``nu`` from the three families of composites.

    ``flipped`` swaps the reading of the input and output shuffle actions.
    Missing table entries raise :class:`~properad_lab.coefficients.MissingEntry`.
    """
    A_table = A_table if A_table is not None else a_recursive(W)
    C_table = C_table if C_table is not None else c_recursive(W)

    def a_coeff(m, l, g):
        return A_table[(m, l, g)]

    def b_coeff(m, k, l, g):
        return (-1) ** (k - 1) * A_table[(m - 1, l, g)]

    def c_coeff(m, n, g):
        return C_table[(m, n, g)]

    comps = {key: _closed_component(F, *key, a_coeff, c_coeff, b_coeff, flipped)
             for key in _keys(W, min_weight=1)}
    return ConvElement(F.module, comps, W)


def genus0_structure(F: FrobInstance, W: int = DEFAULT_WEIGHT_BOUND) -> ConvElement:
    """Genus-zero slice assembled from the explicit factorial coefficients."""

    def a_coeff(m, l, g):
        return genus0_a(m, l)

    def b_coeff(m, k, l, g):
        n = k + l
        return Fraction((-1) ** (m + n - 1) * factorial(m - 1)) * Fraction(m - 1) ** (l - 1)

    comps = {key: _closed_component(F, *key, a_coeff, lambda *a: 0, b_coeff, False)
             for key in _keys(W, min_weight=1) if key[2] == 0}
    return ConvElement(F.module, comps, W)


def ell_n(F: FrobInstance, n: int) -> MultiMap:
    """``sum_{k+l=n} (-1)^l ((mu^l o_1 d) o_1 mu^{k-1}) . sigma``."""
    total = TensorMap(F.module, n, 1, -1)
    for k in range(1, n + 1):
        l = n - k
        total = total + _type_a(F, 1, k, l, 0, 0, False).scale((-1) ** l)
    return total.symmetrized()


def c_m(F: FrobInstance, m: int) -> MultiMap:
    """``(-1)^{m-1}(m-1)! Delta^{m-1} o d`` plus the shuffled one-leg terms."""
    tower = F.d.then(_coproduct_power(F, m)).scale((-1) ** (m - 1) * factorial(m - 1))
    if m >= 2:
        tower = tower + _type_b(F, m, 1, 0, 0, False).scale((-1) ** m * factorial(m - 2))
    return tower.symmetrized()


# -- gauge equation ----------------------------------------------------------------

def hierarchy_solve(F: FrobInstance, W: int = DEFAULT_WEIGHT_BOUND) -> ConvElement:
    """Solve ``d(Theta) = Theta |> nu`` weight by weight.

    The weight-w component of ``nu`` enters ``Theta |> nu`` only through the
    all-identity level, with coefficient one; every other term involves
    components of lower weight.
    """
    theta = build_theta(F, W)
    d_theta = differential(theta, F.d.to_multimap())
    nu = ConvElement(F.module, {}, W)
    for w in range(1, W + 1):
        known = level_below(theta.truncated(w), nu.truncated(w))
        new = {}
        for key in _keys(W, min_weight=w):
            if weight(key) != w:
                continue
            comp = d_theta.get(key) - known.get(key)
            if not comp.is_zero():
                if comp.degree != -1:
                    raise HierarchyError(f"component {key} has degree {comp.degree}")
                new[key] = comp
        nu = nu + ConvElement(F.module, new, W)
    residual = differential(theta, F.d.to_multimap()) - level_below(theta, nu)
    if not residual.is_zero():
        raise HierarchyError(f"gauge equation fails at {residual.nonzero_keys()}")
    return nu


# -- instances ---------------------------------------------------------------------

def _module01():
    return GradedModule(["e0", "e1"], [0, 1])


def e2_instance() -> FrobInstance:
    """Dual numbers on an odd generator: ``e0`` unit, ``e1^2 = 0``, no coproduct."""
    return FrobInstance.from_entries(
        "E2", _module01(),
        d=[(["e1"], ["e0"], 1)],
        mu=[(["e0", "e0"], ["e0"], 1), (["e0", "e1"], ["e1"], 1)],
        delta=[])


def coalgebra_instance() -> FrobInstance:
    """The coalgebra dual to :func:`e2_instance`, with zero product."""
    return FrobInstance.from_entries(
        "coalgebra", _module01(),
        d=[(["e1"], ["e0"], 1)],
        mu=[],
        delta=[(["e0"], ["e0", "e0"], 1), (["e1"], ["e0", "e1"], 1)])


def idempotent_instance() -> FrobInstance:
    """An idempotent group-like ``e0`` beside an inert odd ``e1`` with
    ``d(e1) = e0``.  Product, coproduct and differential are all non-zero,
    so the hierarchy is non-zero in every arity and genus."""
    return FrobInstance.from_entries(
        "idempotent", _module01(),
        d=[(["e1"], ["e0"], 1)],
        mu=[(["e0", "e0"], ["e0"], 1)],
        delta=[(["e0"], ["e0", "e0"], 1)])


def exterior_instance() -> FrobInstance:
    """Exterior algebra on two odd generators with ``d(e) = 1`` only, which is
    not a derivation, so the binary bracket is already non-zero."""
    module = GradedModule(["one", "e", "f", "ef"], [0, 1, 1, 2])
    return FrobInstance.from_entries(
        "exterior", module,
        d=[(["e"], ["one"], 1)],
        mu=[(["one", "one"], ["one"], 1), (["one", "e"], ["e"], 1), (["one", "f"], ["f"], 1),
            (["one", "ef"], ["ef"], 1), (["e", "f"], ["ef"], 1)],
        delta=[])


def shifted_dual_instance() -> FrobInstance:
    """Dual numbers on an odd generator of degree -1 with ``d(one) = q``.
    The differential is not a derivation, and degree-0 twists are curved."""
    module = GradedModule(["one", "q"], [0, -1])
    return FrobInstance.from_entries(
        "shifted-dual", module,
        d=[(["one"], ["q"], 1)],
        mu=[(["one", "one"], ["one"], 1), (["one", "q"], ["q"], 1)],
        delta=[])


def odd_pair_instance() -> FrobInstance:
    """Exterior algebra on ``u`` (degree 1) and ``v`` (degree -1) with
    ``w = uv`` and the coproduct dual to the trace on ``w``, so that
    ``mu o Delta = 0``.  With ``d(u) = 1`` two hierarchy components can
    meet along several edges."""
    module = GradedModule(["one", "u", "v", "w"], [0, 1, -1, 0])
    return FrobInstance.from_entries(
        "odd-pair", module,
        d=[(["u"], ["one"], 1)],
        mu=[(["one", "one"], ["one"], 1), (["one", "u"], ["u"], 1), (["one", "v"], ["v"], 1),
            (["one", "w"], ["w"], 1), (["u", "v"], ["w"], 1)],
        delta=[(["one"], ["one", "w"], 1), (["one"], ["u", "v"], -1), (["u"], ["u", "w"], 1),
               (["v"], ["v", "w"], 1), (["w"], ["w", "w"], 1)])


INSTANCES = {
    "E2": e2_instance,
    "coalgebra": coalgebra_instance,
    "idempotent": idempotent_instance,
    "exterior": exterior_instance,
    "shifted-dual": shifted_dual_instance,
    "odd-pair": odd_pair_instance,
}


@dataclass(frozen=True)
class SearchResult:
    examined: int
    found: list
    exhausted: bool


def instance_search(degree_patterns=((0, 1),), values=(-1, 0, 1), limit: int | None = 200_000,
                    want: int = 1) -> SearchResult:
    """Enumerate structure constants for small modules, keeping instances that
    pass every axiom and have non-zero product, coproduct and differential.

    Only degree-compatible coefficients on canonical words are varied; the
    remaining orderings follow by the Koszul rule.
    """
    found, examined = [], 0
    for degrees in degree_patterns:
        names = [f"e{i}" for i in range(len(degrees))]
        module = GradedModule(names, degrees)
        slots = {"d": _slots(module, 1, 1, -1), "mu": _slots(module, 2, 1, 0),
                 "delta": _slots(module, 1, 2, 0)}
        sizes = [len(slots[k]) for k in ("d", "mu", "delta")]
        for choice in itertools.product(values, repeat=sum(sizes)):
            examined += 1
            if limit is not None and examined > limit:
                return SearchResult(examined - 1, found, False)
            parts = (choice[:sizes[0]], choice[sizes[0]:sizes[0] + sizes[1]], choice[sizes[0] + sizes[1]:])
            if not all(any(p) for p in parts):
                continue
            entries = [[(module.word_names(x), module.word_names(u), c) for (x, u), c in zip(slots[k], p) if c]
                       for k, p in zip(("d", "mu", "delta"), parts)]
            F = FrobInstance.from_entries(f"found{len(found)}", module, *entries)
            if all(ok for ok, _ in check_axioms(F).values()):
                found.append(F)
                if len(found) >= want:
                    return SearchResult(examined, found, False)
    return SearchResult(examined, found, True)


def _slots(module, n, m, degree):
    from .graded_linear import symmetric_basis
    return [(x, u) for x in symmetric_basis(module, n) for u in symmetric_basis(module, m)
            if module.word_degree(u) - module.word_degree(x) == degree]
