"""Exact integer combinatorics for the coefficient formulas.

Everything here is a pure function on Python integers.  The grafting count
``grafting_count`` has an independent brute-force twin,
``grafting_count_bruteforce``, which enumerates the underlying objects one
by one; the two are compared in the test-suite.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from math import comb, factorial

__all__ = [
    "XiIndex",
    "binomial",
    "multinomial",
    "stirling2",
    "set_partitions",
    "compositions",
    "weak_compositions",
    "shuffles",
    "grafting_count",
    "grafting_count_bruteforce",
    "xi_profiles",
    "enumerate_xi",
]


def binomial(n: int, k: int) -> int:
    """Binomial coefficient, zero outside ``0 <= k <= n``.

    >>> binomial(4, 2), binomial(5, 0), binomial(3, 5), binomial(3, -1)
    (6, 1, 0, 0)
    """
    if k < 0 or n < 0 or k > n:
        return 0
    return comb(n, k)


def multinomial(n: int, parts) -> int:
    """``n! / prod(p!)``; zero unless the parts are non-negative and sum to n."""
    parts = tuple(parts)
    if any(p < 0 for p in parts) or sum(parts) != n:
        return 0
    out = factorial(n)
    for p in parts:
        out //= factorial(p)
    return out


@lru_cache(maxsize=None)
def stirling2(m: int, k: int) -> int:
    """Stirling number of the second kind.

    >>> stirling2(3, 2), stirling2(4, 4), stirling2(5, 1), stirling2(2, 3)
    (3, 1, 1, 0)
    """
    if m < 0 or k < 0:
        return 0
    if m == 0 or k == 0:
        return 1 if m == k else 0
    return k * stirling2(m - 1, k) + stirling2(m - 1, k - 1)


def set_partitions(elements):
    """Yield the set partitions of ``elements`` as lists of blocks.

    Blocks are listed by their smallest element, each block in input order.
    """
    elements = list(elements)
    if not elements:
        yield []
        return
    first, rest = elements[0], elements[1:]
    for part in set_partitions(rest):
        yield [[first]] + part
        for i in range(len(part)):
            yield part[:i] + [[first] + part[i]] + part[i + 1:]


def compositions(total: int, parts: int):
    """Ordered tuples of ``parts`` positive integers summing to ``total``."""
    if parts <= 0:
        if total == 0:
            yield ()
        return
    for cut in itertools.combinations(range(1, total), parts - 1):
        bounds = (0,) + cut + (total,)
        yield tuple(bounds[i + 1] - bounds[i] for i in range(parts))


def weak_compositions(total: int, parts: int):
    """Ordered tuples of ``parts`` non-negative integers summing to ``total``."""
    if total < 0:
        return
    for c in compositions(total + parts, parts):
        yield tuple(x - 1 for x in c)


def shuffles(k: int, l: int) -> list[tuple[int, ...]]:
    """All (k,l)-shuffles of ``range(k + l)`` in one-line notation.

    A shuffle sigma keeps ``sigma[0] < ... < sigma[k-1]`` and
    ``sigma[k] < ... < sigma[k+l-1]``; it is determined by the image of the
    first k positions.

    >>> shuffles(1, 1)
    [(0, 1), (1, 0)]
    >>> len(shuffles(2, 1))
    3
    """
    n = k + l
    out = []
    for first in itertools.combinations(range(n), k):
        rest = tuple(i for i in range(n) if i not in first)
        out.append(first + rest)
    return out


@lru_cache(maxsize=None)
def grafting_count(m: int, i: int, g: int, p: int) -> int:
    """Number of ways to graft p upper outputs onto a level of Frobenius
    vertices with m outputs in total, i extra inputs and g extra genus.

    >>> grafting_count(3, 0, 0, 3), grafting_count(2, 1, 0, 2)
    (1, 2)
    """
    if m < 1 or i < 0 or g < 0 or p < 1:
        raise ValueError(f"grafting_count domain: {(m, i, g, p)}")
    return sum(
        stirling2(m, k) * k**i * binomial(p - 1, k - 1) * binomial(g - p + 2 * k - 1, k - 1)
        for k in range(max(1, p - g), p + 1)
    )


def grafting_count_bruteforce(m: int, i: int, g: int, p: int) -> int:
    """Direct enumeration of the graftings counted by :func:`grafting_count`.

    A grafting is a level of k vertices: a set partition of the m outputs
    (k blocks), an assignment of each of the i inputs to a vertex, the number
    of upper edges landing on each vertex (positive, summing to p) and the
    genus of each vertex (non-negative, so that vertex genera plus the
    cycles created by multiple edges add up to g).
    """
    count = 0
    for blocks in set_partitions(range(m)):
        k = len(blocks)
        for _ in itertools.product(range(k), repeat=i):
            for edges in compositions(p, k):
                created = sum(e - 1 for e in edges)
                for _ in weak_compositions(g - created, k):
                    count += 1
    return count


@dataclass(frozen=True)
class XiIndex:
    """One summation index of the closed coefficient formulas.

    ``block_partition`` holds k disjoint, possibly empty blocks covering the
    input labels ``1..n_set_size``; ``genus_split`` the genera g_1..g_k and
    ``p_chain`` the intermediate output counts p_1..p_{k-1}.
    """

    block_partition: tuple[tuple[int, ...], ...]
    genus_split: tuple[int, ...]
    p_chain: tuple[int, ...]

    def full_chain(self, m: int) -> tuple[int, ...]:
        """``(p_0, ..., p_k)`` with the boundary values p_0 = 1, p_k = m."""
        return (1,) + self.p_chain + (m,)


def xi_profiles(m: int, n_set_size: int, g: int, k: int):
    """Yield ``(sizes, genus_split, p_chain)`` for the sets enumerated by
    :func:`enumerate_xi`, forgetting which labels sit in which block.

    Each profile stands for ``multinomial(n_set_size, sizes)`` indices.
    Every step j raises the weight by ``p_j - p_{j-1} + |I_j| + 2 g_j >= 1``
    and the increments add up to ``m + n_set_size + 2g - 1``; that bound
    drives the pruning.
    """
    if m < 1 or g < 0 or k < 1 or n_set_size < 0:
        return
    total = m - 1 + n_set_size + 2 * g

    def rec(j, prev_p, sizes, genera, chain, left_n, left_g, left_w):
        steps_left = k - j + 1
        if left_w < steps_left:
            return
        if j == k:
            size, gen = left_n, left_g
            if prev_p > m + gen or m - prev_p + size + 2 * gen != left_w:
                return
            yield sizes + (size,), genera + (gen,), chain
            return
        for gen in range(left_g + 1):
            for size in range(left_n + 1):
                lo = max(1, prev_p - gen)
                for p in itertools.count(lo):
                    step = p - prev_p + size + 2 * gen
                    if left_w - step < steps_left - 1:
                        break
                    if step < 1:
                        continue
                    yield from rec(j + 1, p, sizes + (size,), genera + (gen,),
                                   chain + (p,), left_n - size, left_g - gen, left_w - step)

    yield from rec(1, 1, (), (), (), n_set_size, g, total)


def _label_blocks(labels, sizes):
    if not sizes:
        if not labels:
            yield ()
        return
    first, rest = sizes[0], sizes[1:]
    for chosen in itertools.combinations(labels, first):
        remaining = tuple(x for x in labels if x not in chosen)
        for tail in _label_blocks(remaining, rest):
            yield (chosen,) + tail


def enumerate_xi(m: int, n_set_size: int, g: int, k: int) -> list[XiIndex]:
    """All summation indices with k blocks over the labels ``1..n_set_size``.

    Sorted lexicographically on blocks, then genus split, then p-chain.

    >>> enumerate_xi(2, 0, 0, 1)
    [XiIndex(block_partition=((),), genus_split=(0,), p_chain=())]
    >>> enumerate_xi(1, 0, 0, 1)
    []
    """
    labels = tuple(range(1, n_set_size + 1))
    out = [
        XiIndex(blocks, genera, chain)
        for sizes, genera, chain in xi_profiles(m, n_set_size, g, k)
        for blocks in _label_blocks(labels, sizes)
    ]
    out.sort(key=lambda x: (x.block_partition, x.genus_split, x.p_chain))
    return out
