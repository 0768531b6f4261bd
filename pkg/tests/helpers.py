"""Strategies and independent reference routes shared by the test modules."""

from __future__ import annotations

from fractions import Fraction

from hypothesis import strategies as st

from properad_lab.combinatorics import shuffles
from properad_lab.convolution import ConvElement, weight
from properad_lab.graded_linear import (
    GradedModule,
    LinearMap,
    MultiMap,
    act_on_inputs,
    act_on_outputs,
    compose_subset,
    symmetric_basis,
)

EVEN_ODD = GradedModule(["a", "b"], [0, 1])
# d(b) = a squares to zero
EVEN_ODD_D = LinearMap.from_names(EVEN_ODD, EVEN_ODD, -1, [("b", "a", 1)]).to_multimap()
THREE = GradedModule(["a", "b", "c"], [0, 1, 1])

SMALL_KEYS = [(1, 1, 0), (1, 2, 0), (2, 1, 0), (2, 2, 0), (1, 3, 0), (3, 1, 0), (1, 1, 1)]


@st.composite
def multimaps(draw, module, n, m, degree, coefficients=st.integers(-2, 2)):
    coeffs = {}
    for x in symmetric_basis(module, n):
        for u in symmetric_basis(module, m):
            if module.word_degree(u) - module.word_degree(x) == degree:
                c = draw(coefficients)
                if c:
                    coeffs.setdefault(x, {})[u] = Fraction(c)
    return MultiMap(module, n, m, degree, coeffs)


@st.composite
def elements(draw, module=EVEN_ODD, degree=None, keys=SMALL_KEYS, max_components=2, weight_bound=5):
    if degree is None:
        degree = draw(st.sampled_from([-1, 0]))
    chosen = draw(st.lists(st.sampled_from(keys), min_size=1, max_size=max_components, unique=True))
    comps = {k: draw(multimaps(module, k[1], k[0], degree)) for k in chosen if weight(k) <= weight_bound}
    return ConvElement(module, comps, weight_bound)


def star_by_subsets(f2: MultiMap, f1: MultiMap, k: int):
    """``f1`` on top of ``f2`` along k edges, summed over explicit slot
    relabelings of one fixed plugging."""
    comp = compose_subset(f1, list(range(f1.m - k, f1.m)), f2, list(range(k)))
    total = 0
    for s in shuffles(f1.n, f2.n - k):
        for t in shuffles(f1.m - k, f2.m):
            total = total + act_on_outputs(act_on_inputs(comp, s), t)
    return total
