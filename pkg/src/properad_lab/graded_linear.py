"""Graded linear algebra with Koszul signs on symmetric powers.

Words are tuples of basis indices.  A :class:`MultiMap` ``A^(.)n -> A^(.)m``
is stored through its invariant tensor lift ``F: A^(x)n -> A^(x)m``: ``F`` is
invariant under permuting its inputs (with Koszul signs) and takes values
in symmetric tensors.  ``coeffs[x][u]`` is the coefficient of the tensor
word ``u`` in ``F(x)``, for sorted words x and u.  The coefficient of any
rearrangement of u is then fixed by the Koszul sign, so nothing else needs
storing.

Non-symmetric intermediate composites (a differential in a chosen slot, a
fixed plugging of outputs into inputs) live in :class:`TensorMap`, which
stores ordered words and has no symmetry constraint.

Coefficients may come from any commutative ring that mixes with
``Fraction`` (the twisting module uses truncated polynomials).
"""

from __future__ import annotations

import itertools
from collections import Counter
from fractions import Fraction
from math import factorial

__all__ = [
    "GradedModule",
    "koszul_sign",
    "sort_with_sign",
    "symmetric_basis",
    "distinct_arrangements",
    "splits",
    "merge_words",
    "MultiMap",
    "TensorMap",
    "compose_subset",
    "act_on_inputs",
    "act_on_outputs",
    "extend_differential",
    "restrict_to_symmetric",
    "tensor_power",
    "tensor",
    "LinearMap",
    "Contraction",
    "ContractionError",
    "acyclic_contraction",
    "symmetric_homotopy",
]


class GradedModule:
    """A finite basis of named generators with integer degrees."""

    def __init__(self, names, degrees):
        names = list(names)
        degrees = [int(d) for d in degrees]
        if len(set(names)) != len(names):
            raise ValueError("basis names must be unique")
        if len(names) != len(degrees):
            raise ValueError("one degree per basis element")
        self.names = tuple(names)
        self.degrees = tuple(degrees)
        self._index = {name: i for i, name in enumerate(names)}

    @classmethod
    def from_pairs(cls, pairs):
        pairs = list(pairs)
        return cls([p[0] for p in pairs], [p[1] for p in pairs])

    def __repr__(self):
        body = ", ".join(f"{n}:{d}" for n, d in zip(self.names, self.degrees))
        return f"GradedModule({body})"

    def __eq__(self, other):
        return isinstance(other, GradedModule) and (self.names, self.degrees) == (other.names, other.degrees)

    def __hash__(self):
        return hash((self.names, self.degrees))

    @property
    def dim(self):
        return len(self.names)

    def index(self, name):
        return self._index[name]

    def odd(self, i):
        return self.degrees[i] % 2 == 1

    def word_degree(self, word):
        return sum(self.degrees[i] for i in word)

    def word_names(self, word):
        return [self.names[i] for i in word]

    def word_from_names(self, names):
        return tuple(self._index[n] for n in names)


def koszul_sign(permutation, degrees) -> int:
    """Sign of reordering graded factors.

    ``permutation`` is in one-line notation: the new sequence is
    ``[items[permutation[0]], items[permutation[1]], ...]`` and
    ``degrees[i]`` is the degree of ``items[i]``.

    >>> koszul_sign([0, 1], [1, 1]), koszul_sign([1, 0], [1, 1]), koszul_sign([1, 0], [1, 0])
    (1, -1, 1)
    """
    sign = 1
    n = len(permutation)
    for a in range(n):
        for b in range(a + 1, n):
            pa, pb = permutation[a], permutation[b]
            if pa > pb and degrees[pa] % 2 and degrees[pb] % 2:
                sign = -sign
    return sign


def sort_with_sign(word, module: GradedModule):
    """Return ``(sorted word, sign)``; the sign is 0 when an odd generator
    repeats, since such a word vanishes in the graded symmetric power."""
    sign = 1
    for i in range(len(word)):
        if module.odd(word[i]):
            for j in range(i + 1, len(word)):
                if word[j] < word[i] and module.odd(word[j]):
                    sign = -sign
    counts = Counter(word)
    for letter, c in counts.items():
        if c > 1 and module.odd(letter):
            return tuple(sorted(word)), 0
    return tuple(sorted(word)), sign


def symmetric_basis(module: GradedModule, n: int) -> list[tuple[int, ...]]:
    """Canonical sorted words of length n, odd generators at most once.

    >>> A = GradedModule(["e0", "e1"], [0, 1])
    >>> symmetric_basis(A, 2)
    [(0, 0), (0, 1)]
    """
    if n < 0:
        raise ValueError("n must be non-negative")
    return [w for w in itertools.combinations_with_replacement(range(module.dim), n)
            if all(c == 1 or not module.odd(l) for l, c in Counter(w).items())]


def distinct_arrangements(word) -> int:
    """Number of distinct orderings of the letters of ``word``."""
    out = factorial(len(word))
    for c in Counter(word).values():
        out //= factorial(c)
    return out


def splits(word, sizes, module: GradedModule):
    """Split a sorted word into consecutive parts of the given sizes.

    Yields ``(parts, sign, positions, arrangements)`` where the parts are
    sorted sub-multisets, ``sign`` is the Koszul sign of reordering ``word``
    into the concatenated parts, ``positions`` counts the assignments of the
    word's positions producing these parts and ``arrangements`` is the
    product of the parts' distinct orderings.
    """
    groups = list(Counter(word).items())
    groups.sort()
    k = len(sizes)

    def rec(g, left):
        if g == len(groups):
            if all(x == 0 for x in left):
                yield ()
            return
        letter, mult = groups[g]
        for dist in _distributions(mult, left):
            rest = tuple(l - d for l, d in zip(left, dist))
            for tail in rec(g + 1, rest):
                yield (dist,) + tail

    for dists in rec(0, tuple(sizes)):
        parts = []
        positions = 1
        for r in range(k):
            part = []
            for (letter, _), dist in zip(groups, dists):
                part.extend([letter] * dist[r])
            parts.append(tuple(part))
        for (_, mult), dist in zip(groups, dists):
            positions *= _multinomial(mult, dist)
        concat = tuple(itertools.chain.from_iterable(parts))
        _, sign = sort_with_sign(concat, module)
        if sign == 0:
            continue
        arrangements = 1
        for part in parts:
            arrangements *= distinct_arrangements(part)
        yield tuple(parts), sign, positions, arrangements


def _distributions(mult, capacities):
    """Ways to place ``mult`` identical letters into slots with capacities."""
    if not capacities:
        if mult == 0:
            yield ()
        return
    first, rest = capacities[0], capacities[1:]
    for d in range(min(mult, first) + 1):
        for tail in _distributions(mult - d, rest):
            yield (d,) + tail


def _multinomial(n, parts):
    out = factorial(n)
    for p in parts:
        out //= factorial(p)
    return out


def merge_words(words, module: GradedModule):
    """Symmetrize a concatenation of sorted words over all leaf placements.

    Returns ``(sorted word, factor)``: the placements of the blocks into
    the positions of the sorted result that reproduce it, each counted with
    its Koszul sign.  The factor is 0 if an odd generator repeats.
    """
    concat = tuple(itertools.chain.from_iterable(words))
    target, sign = sort_with_sign(concat, module)
    if sign == 0:
        return target, 0
    factor = sign
    total = Counter(target)
    for letter, mult in total.items():
        factor *= _multinomial(mult, [Counter(w)[letter] for w in words])
    return target, factor


def _clean(inner):
    return {u: c for u, c in inner.items() if c}


class MultiMap:
    """Degree-homogeneous symmetric map ``A^(.)n -> A^(.)m``."""

    __slots__ = ("module", "n", "m", "degree", "coeffs")

    def __init__(self, module: GradedModule, n: int, m: int, degree: int, coeffs=None):
        if n < 0 or m < 0:
            raise ValueError("arities must be non-negative")
        self.module, self.n, self.m, self.degree = module, n, m, degree
        self.coeffs = {}
        for x, row in (coeffs or {}).items():
            row = _clean(row)
            if row:
                self.coeffs[tuple(x)] = row

    # -- construction ------------------------------------------------------
    @classmethod
    def zero(cls, module, n, m, degree):
        return cls(module, n, m, degree)

    @classmethod
    def identity(cls, module, n=1):
        """Identity of ``A^(.)n``; its tensor lift is the symmetrizer, hence
        the coefficient ``1/#orderings`` on each word."""
        return cls(module, n, n, 0, {x: {x: Fraction(1, distinct_arrangements(x))}
                                     for x in symmetric_basis(module, n)})

    @classmethod
    def from_entries(cls, module, n, m, degree, entries):
        """Build from ``(input word, output word, coefficient)`` triples on
        arbitrary orderings; entries are sorted into canonical form."""
        coeffs = {}
        for x, u, c in entries:
            sx, s1 = sort_with_sign(tuple(x), module)
            su, s2 = sort_with_sign(tuple(u), module)
            if s1 == 0 or s2 == 0:
                continue
            row = coeffs.setdefault(sx, {})
            row[su] = row.get(su, 0) + s1 * s2 * c
        out = cls(module, n, m, degree, coeffs)
        out.check_degree()
        return out

    # -- queries -------------------------------------------------------------
    def value(self, x) -> dict:
        """``F(x)`` on a sorted input word, as sorted-word coefficients."""
        return self.coeffs.get(x, {})

    def apply(self, word) -> dict:
        """``F`` on an arbitrary input ordering, with the Koszul sign."""
        sx, sign = sort_with_sign(tuple(word), self.module)
        if sign == 0:
            return {}
        return {u: sign * c for u, c in self.value(sx).items()}

    def items(self):
        for x, row in self.coeffs.items():
            for u, c in row.items():
                yield x, u, c

    def is_zero(self):
        return not self.coeffs

    def check_degree(self):
        deg = self.module.word_degree
        for x, u, _ in self.items():
            if deg(u) - deg(x) != self.degree:
                raise ValueError(f"entry {x}->{u} breaks degree {self.degree}")

    def _compatible(self, other):
        if (self.module, self.n, self.m) != (other.module, other.n, other.m):
            raise ValueError("maps live on different arities or modules")

    # -- linear structure ----------------------------------------------------
    def __add__(self, other):
        if other == 0:
            return self
        self._compatible(other)
        if other.is_zero():
            return self
        if self.is_zero():
            return other
        if self.degree != other.degree:
            raise ValueError("cannot add maps of different degrees")
        coeffs = {x: dict(row) for x, row in self.coeffs.items()}
        for x, u, c in other.items():
            row = coeffs.setdefault(x, {})
            row[u] = row.get(u, 0) + c
        return MultiMap(self.module, self.n, self.m, self.degree, coeffs)

    __radd__ = __add__

    def __neg__(self):
        return self.scale(-1)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c):
        return MultiMap(self.module, self.n, self.m, self.degree,
                        {x: {u: c * v for u, v in row.items()} for x, row in self.coeffs.items()})

    def map_coefficients(self, fn):
        return MultiMap(self.module, self.n, self.m, self.degree,
                        {x: {u: fn(v) for u, v in row.items()} for x, row in self.coeffs.items()})

    def __eq__(self, other):
        if isinstance(other, int) and other == 0:
            return self.is_zero()
        if not isinstance(other, MultiMap):
            return NotImplemented
        if (self.module, self.n, self.m) != (other.module, other.n, other.m):
            return False
        return (self - other).is_zero() if not (self.is_zero() and other.is_zero()) else True

    def __repr__(self):
        return f"MultiMap({self.n}->{self.m}, deg {self.degree}, {sum(len(r) for r in self.coeffs.values())} terms)"

    # -- composition -----------------------------------------------------------
    def then(self, other: "MultiMap") -> "MultiMap":
        """Full composite ``other o self`` (all outputs into all inputs)."""
        if self.m != other.n or self.module != other.module:
            raise ValueError("arity mismatch in composition")
        coeffs = {}
        for x, row in self.coeffs.items():
            out = {}
            for u, c in row.items():
                mult = distinct_arrangements(u)
                for w, c2 in other.value(u).items():
                    out[w] = out.get(w, 0) + c * mult * c2
            coeffs[x] = out
        return MultiMap(self.module, self.n, other.m, self.degree + other.degree, coeffs)

    def to_tensor_map(self) -> "TensorMap":
        """The invariant tensor lift on every ordered input word."""
        coeffs = {}
        dim = self.module.dim
        for x in itertools.product(range(dim), repeat=self.n):
            val = self.apply(x)
            if not val:
                continue
            coeffs[x] = _expand_symmetric(val, self.module)
        return TensorMap(self.module, self.n, self.m, self.degree, coeffs)

    def symmetric_tensor(self, x):
        """``F(x)`` as a full tensor (all orderings of each output word)."""
        return _expand_symmetric(self.apply(x), self.module)


def _expand_symmetric(value, module):
    out = {}
    for u, c in value.items():
        for perm in set(itertools.permutations(range(len(u)))):
            a = tuple(u[i] for i in perm)
            if a in out:
                continue
            _, sign = sort_with_sign(a, module)
            if sign:
                out[a] = sign * c
    return out


class TensorMap:
    """Multilinear map ``A^(x)n -> A^(x)m`` on ordered words, no symmetry."""

    __slots__ = ("module", "n", "m", "degree", "coeffs")

    def __init__(self, module, n, m, degree, coeffs=None):
        self.module, self.n, self.m, self.degree = module, n, m, degree
        self.coeffs = {}
        for x, row in (coeffs or {}).items():
            row = _clean(row)
            if row:
                self.coeffs[tuple(x)] = row

    @classmethod
    def identity(cls, module, n=1):
        return cls(module, n, n, 0, {x: {x: Fraction(1)} for x in itertools.product(range(module.dim), repeat=n)})

    @classmethod
    def from_multimap(cls, f: MultiMap):
        return f.to_tensor_map()

    def value(self, x):
        return self.coeffs.get(tuple(x), {})

    def items(self):
        for x, row in self.coeffs.items():
            for u, c in row.items():
                yield x, u, c

    def is_zero(self):
        return not self.coeffs

    def __add__(self, other):
        if other == 0:
            return self
        if (self.module, self.n, self.m) != (other.module, other.n, other.m):
            raise ValueError("tensor maps of different shapes")
        coeffs = {x: dict(row) for x, row in self.coeffs.items()}
        for x, u, c in other.items():
            row = coeffs.setdefault(x, {})
            row[u] = row.get(u, 0) + c
        degree = self.degree if not self.is_zero() else other.degree
        return TensorMap(self.module, self.n, self.m, degree, coeffs)

    __radd__ = __add__

    def scale(self, c):
        return TensorMap(self.module, self.n, self.m, self.degree,
                         {x: {u: c * v for u, v in row.items()} for x, row in self.coeffs.items()})

    def __neg__(self):
        return self.scale(-1)

    def __sub__(self, other):
        return self + (-other)

    def __eq__(self, other):
        if isinstance(other, int) and other == 0:
            return self.is_zero()
        if not isinstance(other, TensorMap):
            return NotImplemented
        return (self.module, self.n, self.m) == (other.module, other.n, other.m) and (self - other).is_zero()

    def then(self, other: "TensorMap") -> "TensorMap":
        """Full composite ``other o self``."""
        if self.m != other.n:
            raise ValueError("arity mismatch in composition")
        coeffs = {}
        for x, row in self.coeffs.items():
            out = {}
            for u, c in row.items():
                for w, c2 in other.value(u).items():
                    out[w] = out.get(w, 0) + c * c2
            coeffs[x] = out
        return TensorMap(self.module, self.n, other.m, self.degree + other.degree, coeffs)

    def is_symmetric(self) -> bool:
        """Input-invariant with values in symmetric tensors."""
        return self.to_multimap(check=False).to_tensor_map() == self

    def to_multimap(self, check=True) -> MultiMap:
        """Read off the sorted-word coefficients; with ``check`` the map must
        already be symmetric."""
        coeffs = {}
        for x in symmetric_basis(self.module, self.n):
            row = {u: c for u, c in self.value(x).items() if tuple(sorted(u)) == u}
            if row:
                coeffs[x] = row
        out = MultiMap(self.module, self.n, self.m, self.degree, coeffs)
        if check and out.to_tensor_map() != self:
            raise ValueError("tensor map is not symmetric")
        return out

    def symmetrized(self) -> MultiMap:
        """Average over input and output permutations (an idempotent projector)."""
        n, m = self.n, self.m
        total = TensorMap(self.module, n, m, self.degree)
        for sigma in itertools.permutations(range(n)):
            total = total + act_on_inputs(self, sigma)
        avg_in = total.scale(Fraction(1, factorial(n)))
        total = TensorMap(self.module, n, m, self.degree)
        for tau in itertools.permutations(range(m)):
            total = total + act_on_outputs(avg_in, tau)
        return total.scale(Fraction(1, factorial(m))).to_multimap(check=False)


def _as_tensor(f):
    return f.to_tensor_map() if isinstance(f, MultiMap) else f


def _apply_in_slot(g, word, slot, module):
    """Apply the map g to ``word[slot:slot+g.n]`` inside a tensor word."""
    before = word[:slot]
    sign = -1 if (g.degree % 2 and module.word_degree(before) % 2) else 1
    out = {}
    for u, c in g.value(word[slot:slot + g.n]).items():
        key = before + u + word[slot + g.n:]
        out[key] = out.get(key, 0) + sign * c
    return out


def compose_subset(f1, I, f2, J) -> TensorMap:
    """Plug the outputs ``I`` of f1 into the inputs ``J`` of f2 (0-based).

    Inputs of the result are (inputs of f1, remaining inputs of f2) and its
    outputs are (remaining outputs of f1, outputs of f2).  Outputs in ``I``
    meet inputs in ``J`` in increasing order.
    """
    I, J = sorted(I), sorted(J)
    if len(I) != len(J) or not I:
        raise ValueError("|I| and |J| must agree and be positive")
    f1, f2 = _as_tensor(f1), _as_tensor(f2)
    if not (set(I) <= set(range(f1.m)) and set(J) <= set(range(f2.n))):
        raise ValueError("interface indices out of range")
    module = f1.module
    k = len(I)
    rest_out = [i for i in range(f1.m) if i not in I]
    rest_in = [j for j in range(f2.n) if j not in J]
    n_res = f1.n + f2.n - k
    coeffs = {}
    for x in itertools.product(range(module.dim), repeat=n_res):
        x1, x2 = x[:f1.n], x[f1.n:]
        out = {}
        for y, c in f1.value(x1).items():
            order = rest_out + I
            s1 = koszul_sign(order, [module.degrees[y[i]] for i in range(f1.m)])
            y_rest = tuple(y[i] for i in rest_out)
            y_in = tuple(y[i] for i in I)
            # interleave y_in (slots J) with x2 (remaining slots)
            slots = [None] * f2.n
            src = list(y_in) + list(x2)
            for pos, j in enumerate(J):
                slots[j] = pos
            for pos, j in enumerate(rest_in):
                slots[j] = k + pos
            s2 = koszul_sign(slots, [module.degrees[a] for a in src])
            f2_in = tuple(src[p] for p in slots)
            s3 = -1 if (f2.degree % 2 and module.word_degree(y_rest) % 2) else 1
            for w, c2 in f2.value(f2_in).items():
                key = y_rest + w
                out[key] = out.get(key, 0) + s1 * s2 * s3 * c * c2
        if out:
            coeffs[x] = out
    return TensorMap(module, n_res, f1.m + f2.m - k, f1.degree + f2.degree, coeffs)


def act_on_inputs(f, sigma, flipped=False):
    """Right action on inputs: ``(f . sigma)(x) = +-f(x[sigma[0]], ...)``.

    With ``flipped`` the inverse permutation is used instead.  On a
    :class:`MultiMap` the action is trivial and the map is returned.
    """
    if isinstance(f, MultiMap):
        return f
    sigma = tuple(sigma)
    if flipped:
        sigma = _inverse(sigma)
    module = f.module
    coeffs = {}
    for x in itertools.product(range(module.dim), repeat=f.n):
        src = tuple(x[s] for s in sigma)
        sign = koszul_sign(sigma, [module.degrees[a] for a in x])
        row = f.value(src)
        if row:
            coeffs[x] = {u: sign * c for u, c in row.items()}
    return TensorMap(module, f.n, f.m, f.degree, coeffs)


def act_on_outputs(f, tau, flipped=False):
    """Relabel outputs: output slot j of f lands at position ``tau[j]``.

    This realizes ``tau^{-1} . f``; ``flipped`` uses the other reading.
    On a :class:`MultiMap` the action is trivial.
    """
    if isinstance(f, MultiMap):
        return f
    tau = tuple(tau)
    if flipped:
        tau = _inverse(tau)
    inv = _inverse(tau)
    module = f.module
    coeffs = {}
    for x, row in f.coeffs.items():
        out = {}
        for u, c in row.items():
            new = tuple(u[inv[p]] for p in range(len(u)))
            sign = koszul_sign(inv, [module.degrees[a] for a in u])
            out[new] = out.get(new, 0) + sign * c
        coeffs[x] = out
    return TensorMap(module, f.n, f.m, f.degree, coeffs)


def _inverse(perm):
    inv = [0] * len(perm)
    for i, p in enumerate(perm):
        inv[p] = i
    return tuple(inv)


def tensor_power(f, n) -> TensorMap:
    """``f^(x)n`` for a (1,1) map, with Koszul signs."""
    f = _as_tensor(f)
    if f.n != 1 or f.m != 1:
        raise ValueError("tensor_power needs a (1,1) map")
    return tensor(*[f] * n)


def extend_differential(d, n: int) -> MultiMap:
    """Leibniz extension of a (1,1) map to ``A^(.)n``."""
    d = _as_tensor(d)
    if d.n != 1 or d.m != 1:
        raise ValueError("extend_differential needs a (1,1) map")
    module = d.module
    coeffs = {}
    for x in itertools.product(range(module.dim), repeat=n):
        out = {}
        for slot in range(n):
            for key, c in _apply_in_slot(d, x, slot, module).items():
                out[key] = out.get(key, 0) + c
        coeffs[x] = out
    return restrict_to_symmetric(TensorMap(module, n, n, d.degree, coeffs))


def restrict_to_symmetric(full: TensorMap) -> MultiMap:
    """The action of an equivariant tensor map on symmetric tensors.

    Raises ``ValueError`` if symmetric tensors are not preserved.
    """
    module = full.module
    coeffs = {}
    for x in symmetric_basis(module, full.n):
        sym = {}
        for a in set(itertools.permutations(x)):
            _, sign = sort_with_sign(a, module)
            for u, c in full.value(a).items():
                sym[u] = sym.get(u, 0) + sign * c
        sym = _clean(sym)
        mult = distinct_arrangements(x)
        row = {u: Fraction(1, mult) * c for u, c in sym.items() if tuple(sorted(u)) == u}
        for u, c in sym.items():
            su, sign = sort_with_sign(u, module)
            if sign == 0 or row.get(su, 0) * mult != sign * c:
                raise ValueError("map does not preserve symmetric tensors")
        if row:
            coeffs[x] = row
    return MultiMap(module, full.n, full.m, full.degree, coeffs)


class LinearMap:
    """Degree-homogeneous linear map between two graded modules, on basis
    indices: ``coeffs[i][j]`` is the coefficient of target j in the image of
    source i."""

    __slots__ = ("source", "target", "degree", "coeffs")

    def __init__(self, source, target, degree, coeffs=None):
        self.source, self.target, self.degree = source, target, degree
        self.coeffs = {}
        for i, row in (coeffs or {}).items():
            row = _clean(row)
            for j in row:
                if target.degrees[j] - source.degrees[i] != degree:
                    raise ValueError("linear map is not homogeneous")
            if row:
                self.coeffs[i] = row

    @classmethod
    def from_names(cls, source, target, degree, entries):
        """From ``(source name, target name, coefficient)`` triples."""
        coeffs = {}
        for a, b, c in entries:
            row = coeffs.setdefault(source.index(a), {})
            j = target.index(b)
            row[j] = row.get(j, 0) + Fraction(c)
        return cls(source, target, degree, coeffs)

    @classmethod
    def identity(cls, module):
        return cls(module, module, 0, {i: {i: Fraction(1)} for i in range(module.dim)})

    @classmethod
    def from_multimap(cls, f: MultiMap):
        if (f.n, f.m) != (1, 1):
            raise ValueError("need a (1,1) map")
        return cls(f.module, f.module, f.degree, {x[0]: {u[0]: c for u, c in row.items()}
                                                 for x, row in f.coeffs.items()})

    def to_multimap(self) -> MultiMap:
        if self.source != self.target:
            raise ValueError("only endomorphisms are multilinear maps")
        return MultiMap(self.source, 1, 1, self.degree,
                        {(i,): {(j,): c for j, c in row.items()} for i, row in self.coeffs.items()})

    def then(self, other: "LinearMap") -> "LinearMap":
        """``other o self``."""
        if self.target != other.source:
            raise ValueError("modules do not match")
        coeffs = {}
        for i, row in self.coeffs.items():
            out = {}
            for j, c in row.items():
                for k, c2 in other.coeffs.get(j, {}).items():
                    out[k] = out.get(k, 0) + c * c2
            coeffs[i] = out
        return LinearMap(self.source, other.target, self.degree + other.degree, coeffs)

    def __add__(self, other):
        coeffs = {i: dict(row) for i, row in self.coeffs.items()}
        for i, row in other.coeffs.items():
            acc = coeffs.setdefault(i, {})
            for j, c in row.items():
                acc[j] = acc.get(j, 0) + c
        return LinearMap(self.source, self.target, self.degree if self.coeffs else other.degree, coeffs)

    def scale(self, c):
        return LinearMap(self.source, self.target, self.degree,
                         {i: {j: c * v for j, v in row.items()} for i, row in self.coeffs.items()})

    def __sub__(self, other):
        return self + other.scale(-1)

    def is_zero(self):
        return not self.coeffs

    def __eq__(self, other):
        if not isinstance(other, LinearMap):
            return NotImplemented
        return (self.source, self.target) == (other.source, other.target) and (self - other).is_zero()


class ContractionError(ValueError):
    """A contraction fails one of its side conditions."""


class Contraction:
    """Deformation retract of ``(big, d_big)`` onto ``(small, d_small)``.

    ``i: small -> big`` and ``p: big -> small`` are :class:`LinearMap`;
    ``d_big``, ``d_small`` and ``h`` are endomorphisms given either way.
    """

    def __init__(self, big, d_big, small, d_small, i, p, h):
        self.big, self.small = big, small
        self.d_big, self.d_small, self.h = (_as_linear(f) for f in (d_big, d_small, h))
        self.i, self.p = i, p

    def side_conditions(self) -> dict:
        """Each side condition mapped to whether it holds exactly."""
        d, h = self.d_big, self.h
        return {
            "pi = id": self.i.then(self.p) == LinearMap.identity(self.small),
            "ip - id = dh + hd": self.projector_linear() - LinearMap.identity(self.big) == h.then(d) + d.then(h),
            "hi = 0": self.i.then(h).is_zero(),
            "ph = 0": h.then(self.p).is_zero(),
            "hh = 0": h.then(h).is_zero(),
            "i, p are chain maps": (self.d_small.then(self.i) == self.i.then(d)
                                    and d.then(self.p) == self.p.then(self.d_small)),
        }

    def check(self):
        failed = [name for name, ok in self.side_conditions().items() if not ok]
        if failed:
            raise ContractionError(f"contraction fails: {', '.join(failed)}")

    def projector_linear(self) -> LinearMap:
        return self.p.then(self.i)

    def projector(self) -> MultiMap:
        """``ip`` as a map on the big module."""
        return self.projector_linear().to_multimap()


def _as_linear(f):
    return f if isinstance(f, LinearMap) else LinearMap.from_multimap(f)


def acyclic_contraction() -> Contraction:
    """``span{x, dx}`` with ``d(x) = dx``, contracted onto zero by
    ``h(dx) = -x``."""
    big = GradedModule(["x", "dx"], [1, 0])
    small = GradedModule([], [])
    d = LinearMap.from_names(big, big, -1, [("x", "dx", 1)])
    h = LinearMap.from_names(big, big, 1, [("dx", "x", -1)])
    return Contraction(big, d, small, LinearMap(small, small, -1), LinearMap(small, big, 0),
                       LinearMap(big, small, 0), h)


def symmetric_homotopy(c: Contraction, n: int) -> MultiMap:
    """``h_n = (1/n!) sum_sigma sum_k (id^(k-1) (x) h (x) pi^(n-k))^sigma``
    with ``pi = ip``, as a map on ``A^(.)n``."""
    if n < 1:
        raise ValueError("n must be positive")
    c.check()
    module = c.big
    h = c.h.to_multimap().to_tensor_map()
    pi = c.projector().to_tensor_map()
    ident = TensorMap.identity(module)
    total = TensorMap(module, n, n, 1)
    for k in range(1, n + 1):
        factors = [ident] * (k - 1) + [h] + [pi] * (n - k)
        total = total + tensor(*factors)
    conj = TensorMap(module, n, n, 1)
    for sigma in itertools.permutations(range(n)):
        conj = conj + act_on_outputs(act_on_inputs(total, sigma), _inverse(sigma))
    return restrict_to_symmetric(conj.scale(Fraction(1, factorial(n))))


def tensor(*factors) -> TensorMap:
    """``f_1 (x) ... (x) f_r`` with the Koszul rule
    ``(f (x) g)(x (x) y) = (-1)^{|g||x|} f(x) (x) g(y)``."""
    factors = [_as_tensor(f) for f in factors]
    module = factors[0].module
    n = sum(f.n for f in factors)
    coeffs = {}
    for x in itertools.product(range(module.dim), repeat=n):
        vec = {(): 1}
        start = 0
        for f in factors:
            chunk = x[start:start + f.n]
            sign = -1 if (f.degree % 2 and module.word_degree(x[:start]) % 2) else 1
            start += f.n
            val = f.value(chunk)
            new = {}
            for prefix, c in vec.items():
                for y, c2 in val.items():
                    key = prefix + y
                    new[key] = new.get(key, 0) + sign * c * c2
            vec = new
            if not vec:
                break
        if vec:
            coeffs[x] = vec
    return TensorMap(module, n, sum(f.m for f in factors), sum(f.degree for f in factors), coeffs)
