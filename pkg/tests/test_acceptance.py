"""The ten acceptance criteria, one pass/fail line each in the terminal summary.

Criteria 7 and 9 each contain one identity that does not hold in this
implementation; those parts are strict xfails and print FAIL with the reason.
"""

import random
import time
from fractions import Fraction
from math import factorial

import pytest

from helpers import EVEN_ODD, EVEN_ODD_D
from properad_lab import coefficients as co
from properad_lab import hierarchy as hi
from properad_lab.combinatorics import stirling2
from properad_lab.convolution import (
    ConvElement,
    bracket,
    check_infinity_isotopy,
    differential,
    mc_residual,
    star,
    weight,
)
from properad_lab.graded_linear import (
    MultiMap,
    acyclic_contraction,
    extend_differential,
    restrict_to_symmetric,
    symmetric_basis,
    symmetric_homotopy,
    tensor_power,
)
from properad_lab.twisting import (
    TruncPoly,
    TwistData,
    exact_weight,
    kernel_components,
    lift_scalars,
    mc_equations_residual,
    twist,
)

RESULTS = {}


def record(number, ok, detail):
    previous = RESULTS.get(number)
    if previous is not None and not previous[0]:
        return
    RESULTS[number] = (ok, detail)


def timed(limit):
    start = time.perf_counter()
    return lambda: time.perf_counter() - start <= limit


# -- 1 ---------------------------------------------------------------------------------

def test_criterion_1_seed_values():
    in_time = timed(1)
    A, C = co.a_recursive(1), co.c_recursive(2)
    ok = (A[(1, 0, 0)], A[(1, 1, 0)], A[(2, 0, 0)], C[(1, 1, 1)]) == (1, -1, -1, -1)
    record(1, ok and in_time(), "A(1,0,0)=1, A(1,1,0)=-1, A(2,0,0)=-1, C(1,1,1)=-1")
    assert ok and in_time()


# -- 2 ---------------------------------------------------------------------------------

def test_criterion_2_a_closed_and_recursion():
    in_time = timed(120)
    A = co.a_recursive(8)
    residual_free = not any(co.a_recursion_residuals(A).values())
    bad = [k for k in co.keys_up_to(8) if co.weight(*k) >= 0 and co.a_closed(*k) != A[k]]
    ok = residual_free and not bad and in_time()
    record(2, ok, f"{len(list(co.keys_up_to(8)))} keys up to weight 8, mismatches {bad[:3]}")
    assert ok


# -- 3 ---------------------------------------------------------------------------------

def test_criterion_3_c_closed_and_type_v_balance():
    in_time = timed(300)
    C = co.c_recursive(12)
    A = co.a_recursive(14)
    residual_free = not any(co.c_recursion_residuals(C).values())
    bad = [k for k in co.keys_up_to(8, min_n=1, min_g=1) if co.c_closed(*k) != C[k]]
    unbalanced = [(m, n, g) for m in range(1, 5) for n in range(1, 5) for g in range(1, 4)
                  if co.q_value(m, n, g, A) + co.c_equation_lhs(m, n, g, C) != 0]
    ok = residual_free and not bad and not unbalanced and in_time()
    record(3, ok, f"C closed mismatches {bad[:3]}, Q + C-sum non-zero at {unbalanced[:3]}")
    assert ok


# -- 4 ---------------------------------------------------------------------------------

def test_criterion_4_genus_zero():
    in_time = timed(10)
    A = co.a_recursive(10)
    bad = [(m, l) for m in range(1, 7) for l in range(7)
           if A[(m, l, 0)] != Fraction((-1) ** (l + m - 1) * factorial(m)) * Fraction(m) ** (l - 1)]
    stirling = [m for m in range(1, 9)
                if sum((-1) ** (p - 1) * factorial(p - 1) * stirling2(m, p) * p for p in range(1, m + 1))
                != (-1) ** (m - 1)]
    ok = not bad and not stirling and in_time()
    record(4, ok, f"closed form mismatches {bad[:3]}, Stirling sum mismatches {stirling}")
    assert ok


# -- 5 ---------------------------------------------------------------------------------

def test_criterion_5_d_and_q():
    in_time = timed(60)
    A = co.a_recursive(14)
    bad = []
    for m in range(1, 6):
        for n in range(5):
            for g in range(4):
                if co.d_value(m, n, g, A) != ((-1) ** (m - 1) if (n, g) == (0, 0) else 0):
                    bad.append(("D", m, n, g))
                if n >= 1 and g >= 1 and co.q_value(m, n, g, A) != ((-1) ** (m + n) if g == 1 else 0):
                    bad.append(("Q", m, n, g))
    ok = not bad and in_time()
    record(5, ok, f"mismatches {bad[:3]}")
    assert ok


# -- 6 ---------------------------------------------------------------------------------

def test_criterion_6_graph_oracle():
    in_time = timed(600)
    A = co.a_recursive(5)
    bad, skipped = [], []
    for key in co.keys_up_to(5):
        try:
            if co.leveled_graph_oracle_a(*key) != A[key]:
                bad.append(key)
        except co.NodeBudgetExceeded:
            skipped.append(key)
    ok = not bad and in_time()
    record(6, ok, f"mismatches {bad[:3]}, beyond node budget {skipped}")
    assert ok


# -- 7 ---------------------------------------------------------------------------------

@pytest.fixture(scope="module")
def named_instances():
    out = {}
    for F in (hi.e2_instance(), hi.coalgebra_instance()):
        out[F.name] = (F, hi.hierarchy_solve(F, 6))
    return out


def test_criterion_7_instance_agreement(named_instances):
    in_time = timed(120)
    failures = []
    for name, (F, nu) in named_instances.items():
        if hi.hierarchy_closed(F, co.a_recursive(6), co.c_recursive(6), 6) != nu:
            failures.append(f"{name}: closed vs solve")
        if not mc_residual(hi.structure(F, nu)).is_zero():
            failures.append(f"{name}: MC residual")
        delta = ConvElement(F.module, {(1, 1, 0): F.d.to_multimap()}, 6)
        # gauge equation read as an isotopy from delta + nu to delta
        if not check_infinity_isotopy(hi.structure(F, nu), delta, hi.build_theta(F, 6).without_unit()).is_zero():
            failures.append(f"{name}: isotopy")
    e2, nu_e2 = named_instances["E2"]
    failures += [f"l_{n}" for n in range(2, 6) if nu_e2.get((1, n, 0)) != hi.ell_n(e2, n)]
    coalg, nu_co = named_instances["coalgebra"]
    failures += [f"c_{m}" for m in range(2, 6) if nu_co.get((m, 1, 0)) != hi.c_m(coalg, m)]
    ok = not failures and in_time()
    record(7, ok, f"failures {failures}")
    assert ok


@pytest.mark.xfail(strict=True, reason="the stated argument order reads the gauge equation backwards")
def test_criterion_7_isotopy_in_stated_order(named_instances):
    bad = []
    for name, (F, nu) in named_instances.items():
        delta = ConvElement(F.module, {(1, 1, 0): F.d.to_multimap()}, 6)
        if not check_infinity_isotopy(delta, hi.structure(F, nu), hi.build_theta(F, 6).without_unit()).is_zero():
            bad.append(name)
    record(7, not bad, "check_infinity_isotopy(delta, delta+nu, Theta-1) is non-zero on "
           f"{bad}; the reversed order (delta+nu, delta, Theta-1) vanishes")
    assert not bad


# -- 8 ---------------------------------------------------------------------------------

def test_criterion_8_twisting():
    in_time = timed(60)
    N, W = 4, 5
    top = exact_weight(W, N)
    failures = []
    for name, letter in (("E2", "e0"), ("shifted-dual", "one")):
        F = hi.INSTANCES[name]()
        alpha = hi.structure(F, hi.hierarchy_solve(F, W))
        rng = random.Random(8)
        for _ in range(5):
            s, r = (sum((TruncPoly.t(N, p, rng.randint(-3, 3)) for p in range(1, N)), TruncPoly.const(0, N))
                    for _ in range(2))
            a = TwistData.element(F.module, {letter: s}, N)
            b = TwistData.element(F.module, {letter: r}, N)
            if twist(twist(alpha, a, keep_incomplete=True), b) != twist(alpha, a + b):
                failures.append(f"{name}: additivity")
            twisted = twist(alpha, a, keep_incomplete=True)
            if not mc_residual(twisted.truncated(top)).is_zero():
                failures.append(f"{name}: twisted MC")
            iso = check_infinity_isotopy(lift_scalars(alpha, N), twisted, (-a).gauge(W).without_unit())
            if [k for k in iso.nonzero_keys() if weight(k) <= top]:
                failures.append(f"{name}: isotopy")
            if kernel_components(twisted.truncated(top)) != mc_equations_residual(alpha, a):
                failures.append(f"{name}: curvature vs MC residual")
    ok = not failures and in_time()
    record(8, ok, f"order 4, failures {sorted(set(failures))}")
    assert ok


# -- 9 ---------------------------------------------------------------------------------

def _sign(a, b):
    return -1 if a % 2 and b % 2 else 1


def _random_elements(count, seed=9, W=5):
    rng = random.Random(seed)
    # low-weight components so that triple brackets reach genus 2 below the bound
    keys = [k for k in co.keys_up_to(2, min_n=1) if weight(k) >= 1]
    out = []
    for _ in range(count):
        degree = rng.choice([-1, 0])
        comps = {}
        for m, n, g in rng.sample(keys, 3):
            comps[(m, n, g)] = _random_multimap(rng, n, m, degree)
        out.append(ConvElement(EVEN_ODD, comps, W))
    return out


def _random_multimap(rng, n, m, degree):
    entries = [(x, u, Fraction(rng.randint(-2, 2)))
               for x in symmetric_basis(EVEN_ODD, n) for u in symmetric_basis(EVEN_ODD, m)
               if EVEN_ODD.word_degree(u) - EVEN_ODD.word_degree(x) == degree]
    return MultiMap.from_entries(EVEN_ODD, n, m, degree, entries)


@pytest.fixture(scope="module")
def law_elements():
    return _random_elements(102)


def _jacobiator(x, y, z):
    a, b, c = x.degree, y.degree, z.degree
    return (bracket(x, bracket(y, z)).scale(_sign(a, c))
            + bracket(y, bracket(z, x)).scale(_sign(b, a))
            + bracket(z, bracket(x, y)).scale(_sign(c, b)))


def test_criterion_9_laws(law_elements):
    in_time = timed(120)
    failures = []
    xs = law_elements
    for i, x in enumerate(xs):
        y = xs[(i + 1) % len(xs)]
        if not differential(differential(x, EVEN_ODD_D), EVEN_ODD_D).is_zero():
            failures.append("d^2")
        lhs = differential(star(x, y), EVEN_ODD_D)
        rhs = star(differential(x, EVEN_ODD_D), y) + star(x, differential(y, EVEN_ODD_D)).scale(_sign(x.degree, 1))
        if lhs != rhs:
            failures.append("derivation")
        sums = {weight(a) + weight(b) for a in x.components for b in y.components}
        if any(weight(k) not in sums for k in star(x, y).nonzero_keys()):
            failures.append("weight additivity")
    ok = not failures and in_time()
    record(9, ok, f"{len(xs)} elements up to weight 5, failures {sorted(set(failures))}")
    assert ok


@pytest.mark.xfail(strict=True, reason="the star product counts one composite per labelled graph, "
                                        "which leaves a Jacobi defect on genus >= 2 outputs")
def test_criterion_9_jacobi(law_elements):
    xs = law_elements
    bad, low = [], []
    for i in range(0, len(xs) - 2, 3):
        jac = _jacobiator(xs[i], xs[i + 1], xs[i + 2])
        bad += jac.nonzero_keys()
        low += [k for k in jac.nonzero_keys() if k[2] <= 1]
    record(9, not bad, f"Jacobi fails at keys {sorted(set(bad))[:4]} (all of genus >= 2: {not low}); "
           "derivation, d^2 and weight additivity hold")
    assert not bad


# -- 10 --------------------------------------------------------------------------------

def test_criterion_10_homotopy_identity():
    in_time = timed(5)
    c = acyclic_contraction()
    bad = []
    for n in range(1, 5):
        d = extend_differential(c.d_big.to_multimap(), n)
        h = symmetric_homotopy(c, n)
        if h.then(d) + d.then(h) != restrict_to_symmetric(tensor_power(c.projector(), n)) - MultiMap.identity(c.big, n):
            bad.append(n)
    ok = not bad and c.big.dim == 2 and in_time()
    record(10, ok, f"2-dimensional acyclic contraction, n = 1..4, failures {bad}")
    assert ok
