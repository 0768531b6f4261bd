import itertools
from fractions import Fraction
from math import comb

import pytest
from hypothesis import given
from hypothesis import strategies as st

from helpers import EVEN_ODD, EVEN_ODD_D, THREE, multimaps
from properad_lab.graded_linear import (
    Contraction,
    ContractionError,
    GradedModule,
    LinearMap,
    MultiMap,
    TensorMap,
    act_on_inputs,
    act_on_outputs,
    acyclic_contraction,
    compose_subset,
    distinct_arrangements,
    extend_differential,
    koszul_sign,
    merge_words,
    restrict_to_symmetric,
    sort_with_sign,
    symmetric_basis,
    symmetric_homotopy,
    tensor,
    tensor_power,
)


@st.composite
def tensor_maps(draw, module, n, m, degree):
    coeffs = {}
    for x in itertools.product(range(module.dim), repeat=n):
        for u in itertools.product(range(module.dim), repeat=m):
            if module.word_degree(u) - module.word_degree(x) == degree:
                c = draw(st.integers(-2, 2))
                if c:
                    coeffs.setdefault(x, {})[u] = Fraction(c)
    return TensorMap(module, n, m, degree, coeffs)


def test_symmetric_basis_sizes():
    even = GradedModule(["a", "b"], [0, 0])
    odd = GradedModule(["a", "b", "c"], [1, 1, 1])
    assert len(symmetric_basis(even, 3)) == comb(4, 3)
    assert len(symmetric_basis(odd, 2)) == comb(3, 2)
    assert symmetric_basis(odd, 4) == []
    assert symmetric_basis(THREE, 0) == [()]
    with pytest.raises(ValueError):
        symmetric_basis(THREE, -1)


def test_sort_with_sign_examples():
    # word (c, b) with b, c odd
    assert sort_with_sign((2, 1), THREE) == ((1, 2), -1)
    assert sort_with_sign((1, 0, 2), THREE) == ((0, 1, 2), 1)
    assert sort_with_sign((1, 1), THREE)[1] == 0


@given(st.permutations(range(4)), st.lists(st.integers(0, 3), min_size=4, max_size=4))
def test_koszul_sign_is_a_homomorphism(perm, degrees):
    # applying perm and then its inverse restores the order with sign +1
    inv = [0] * 4
    for i, p in enumerate(perm):
        inv[p] = i
    reordered = [degrees[p] for p in perm]
    assert koszul_sign(perm, degrees) * koszul_sign(inv, reordered) == 1


@given(st.lists(st.integers(0, 2), min_size=0, max_size=4))
def test_sort_with_sign_matches_koszul_sign(word):
    target, sign = sort_with_sign(tuple(word), THREE)
    assert list(target) == sorted(word)
    if sign:
        perm = sorted(range(len(word)), key=lambda i: (word[i], i))
        assert sign == koszul_sign(perm, [THREE.degrees[w] for w in word])


def test_merge_words_counts_placements():
    even = GradedModule(["a"], [0])
    assert merge_words([(0,), (0,)], even) == ((0, 0), 2)
    assert merge_words([(1,), (1,)], THREE)[1] == 0
    assert merge_words([(2,), (1,)], THREE) == ((1, 2), -1)


def test_identity_multimap_lifts_to_symmetrizer():
    ident = MultiMap.identity(EVEN_ODD, 2)
    assert ident.value((0, 0)) == {(0, 0): 1}
    assert ident.value((0, 1)) == {(0, 1): Fraction(1, 2)}
    assert ident.then(ident) == ident
    assert ident.to_tensor_map().value((1, 0)) == {(0, 1): Fraction(1, 2), (1, 0): Fraction(1, 2)}
    assert distinct_arrangements((0, 0, 1)) == 3


@given(tensor_maps(EVEN_ODD, 1, 1, 1), tensor_maps(EVEN_ODD, 1, 1, -1))
def test_compose_subset_single_edge_is_composition(f, g):
    assert compose_subset(f, [0], g, [0]) == f.then(g)


@given(tensor_maps(EVEN_ODD, 1, 2, 1), tensor_maps(EVEN_ODD, 2, 1, 0), tensor_maps(EVEN_ODD, 1, 2, 1))
def test_compose_subset_associative(f1, f2, f3):
    left = compose_subset(compose_subset(f1, [1], f2, [0]), [1], f3, [0])
    right = compose_subset(f1, [1], compose_subset(f2, [0], f3, [0]), [0])
    assert left == right


@given(tensor_maps(EVEN_ODD, 1, 2, 1), tensor_maps(EVEN_ODD, 2, 1, 1))
def test_compose_subset_degree_and_arity(f1, f2):
    out = compose_subset(f1, [0, 1], f2, [0, 1])
    assert (out.n, out.m, out.degree) == (1, 1, 2)
    assert out == f1.then(f2)


def test_compose_subset_rejects_bad_interfaces():
    f = TensorMap.identity(EVEN_ODD, 2)
    with pytest.raises(ValueError):
        compose_subset(f, [0], f, [0, 1])
    with pytest.raises(ValueError):
        compose_subset(f, [], f, [])
    with pytest.raises(ValueError):
        compose_subset(f, [2], f, [0])


def test_compose_subset_with_unit_is_neutral():
    f = MultiMap.from_entries(EVEN_ODD, 2, 1, 1, [((0, 0), (1,), 1)]).to_tensor_map()
    unit = TensorMap.identity(EVEN_ODD)
    assert compose_subset(unit, [0], f, [1]) == f
    assert compose_subset(f, [0], unit, [0]) == f


@given(tensor_maps(EVEN_ODD, 3, 1, 1), st.permutations(range(3)))
def test_act_on_inputs_inverse(f, sigma):
    inv = [0] * 3
    for i, p in enumerate(sigma):
        inv[p] = i
    assert act_on_inputs(act_on_inputs(f, sigma), inv) == f
    assert act_on_inputs(f, (0, 1, 2)) == f
    assert act_on_inputs(f, sigma, flipped=True) == act_on_inputs(f, inv)


@given(tensor_maps(EVEN_ODD, 1, 3, 1), st.permutations(range(3)))
def test_act_on_outputs_inverse(f, tau):
    inv = [0] * 3
    for i, p in enumerate(tau):
        inv[p] = i
    assert act_on_outputs(act_on_outputs(f, tau), inv) == f
    assert act_on_outputs(f, tau, flipped=True) == act_on_outputs(f, inv)


@given(multimaps(THREE, 2, 2, 0))
def test_actions_fix_symmetric_maps(f):
    t = f.to_tensor_map()
    for sigma in itertools.permutations(range(2)):
        assert act_on_inputs(t, sigma) == t
        assert act_on_outputs(t, sigma) == t
    assert t.is_symmetric()
    assert t.to_multimap() == f


@given(tensor_maps(EVEN_ODD, 2, 2, 0))
def test_symmetrizer_is_idempotent(f):
    once = f.symmetrized()
    assert once.to_tensor_map().symmetrized() == once


def test_non_symmetric_tensor_map_is_rejected():
    t = TensorMap(EVEN_ODD, 2, 1, 0, {(0, 0): {(0,): 1}, (0, 1): {(1,): 1}})
    with pytest.raises(ValueError, match="not symmetric"):
        t.to_multimap()


@pytest.mark.parametrize("n", range(1, 5))
def test_extend_differential(n):
    dn = extend_differential(EVEN_ODD_D, n)
    assert dn.degree == -1 and dn.n == dn.m == n
    assert dn.then(dn).is_zero()
    if n == 1:
        assert dn == EVEN_ODD_D


def test_extend_differential_on_square():
    # d(b b) vanishes since b b = 0; d(a b) = a a
    d2 = extend_differential(EVEN_ODD_D, 2)
    assert d2.value((0, 1)) == {(0, 0): 1}


def test_tensor_power_signs():
    d = EVEN_ODD_D.to_tensor_map()
    sq = tensor_power(d, 2)
    # (d x d)(b x b) = -d(b) x d(b)
    assert sq.value((1, 1)) == {(0, 0): -1}
    assert tensor(d, TensorMap.identity(EVEN_ODD)).value((1, 1)) == {(0, 1): 1}
    with pytest.raises(ValueError):
        tensor_power(TensorMap.identity(EVEN_ODD, 2), 2)


def test_restrict_rejects_non_equivariant():
    # the image of a.b is b(x)a alone, which is not a symmetric tensor
    t = TensorMap(EVEN_ODD, 2, 2, 0, {(0, 1): {(1, 0): 1}})
    with pytest.raises(ValueError):
        restrict_to_symmetric(t)


def _retract_with_kept_class():
    big = GradedModule(["a", "x", "dx"], [0, 1, 0])
    small = GradedModule(["a"], [0])
    d = LinearMap.from_names(big, big, -1, [("x", "dx", 1)])
    h = LinearMap.from_names(big, big, 1, [("dx", "x", -1)])
    i = LinearMap.from_names(small, big, 0, [("a", "a", 1)])
    p = LinearMap.from_names(big, small, 0, [("a", "a", 1)])
    return Contraction(big, d, small, LinearMap(small, small, -1), i, p, h)


def test_contraction_side_conditions():
    for c in (acyclic_contraction(), _retract_with_kept_class()):
        assert all(c.side_conditions().values())
        c.check()


def test_contraction_failure_is_named():
    c = _retract_with_kept_class()
    c.h = c.h.scale(2)
    with pytest.raises(ContractionError, match="ip - id = dh \\+ hd"):
        c.check()


@pytest.mark.parametrize("n", range(1, 5))
@pytest.mark.parametrize("make", [acyclic_contraction, _retract_with_kept_class])
def test_symmetric_homotopy_identity(make, n):
    c = make()
    d = extend_differential(c.d_big.to_multimap(), n)
    h = symmetric_homotopy(c, n)
    pi_n = restrict_to_symmetric(tensor_power(c.projector(), n))
    assert h.degree == 1
    assert h.then(d) + d.then(h) == pi_n - MultiMap.identity(c.big, n)
