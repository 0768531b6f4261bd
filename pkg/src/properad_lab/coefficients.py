"""Universal coefficient families of the Frobenius Koszul hierarchy.

The recursion solvers ``a_recursive`` and ``c_recursive`` are canonical.
``a_closed`` and ``c_closed`` evaluate the alternating chain sums and the
leveled-graph oracle counts level decompositions directly; both only
validate the recursion tables.
"""

from __future__ import annotations

import csv
import io
import json
import os
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
import itertools
from math import factorial
from pathlib import Path

from .combinatorics import (
    binomial,
    compositions,
    grafting_count,
    multinomial,
    set_partitions,
    weak_compositions,
    xi_profiles,
)

__all__ = [
    "CoeffTable",
    "MissingEntry",
    "weight",
    "keys_up_to",
    "a_recursive",
    "a_recursion_residuals",
    "a_closed",
    "c_recursive",
    "c_recursion_residuals",
    "c_closed",
    "c_closed_printed",
    "c_equation_lhs",
    "d_value",
    "q_value",
    "q_value_via_d",
    "genus0_a",
    "leveled_graph_oracle_a",
    "NodeBudgetExceeded",
    "cache_dir",
    "cached_table",
]

INDEX_SET_CONVENTION = "n"


def weight(m: int, n: int, g: int) -> int:
    return m + n + 2 * g - 2


def keys_up_to(weight_bound: int, min_m=1, min_n=0, min_g=0):
    """All (m, n, g) with the given lower bounds and weight <= bound,
    ordered by weight, then m, n, g."""
    out = []
    for w in range(-1, weight_bound + 1):
        for g in range(min_g, (w + 2) // 2 + 1):
            for m in range(min_m, w + 3 - 2 * g):
                n = w + 2 - m - 2 * g
                if n >= min_n:
                    out.append((m, n, g))
    return sorted(out, key=lambda k: (weight(*k), k))


class MissingEntry(KeyError):
    """A table lookup fell outside the computed range."""


@dataclass
class CoeffTable:
    kind: str
    weight_bound: int
    entries: dict = field(default_factory=dict)
    index_set_convention: str = INDEX_SET_CONVENTION

    def __post_init__(self):
        if self.kind not in {"A", "C", "T", "D", "Q"}:
            raise ValueError(f"unknown table kind {self.kind!r}")

    def __getitem__(self, key):
        m, n, g = key
        if weight(m, n, g) > self.weight_bound:
            raise MissingEntry(f"{self.kind}{key} beyond weight bound {self.weight_bound}")
        return self.entries.get(key, Fraction(0))

    def __contains__(self, key):
        return key in self.entries

    def get(self, m, n, g):
        return self[(m, n, g)]

    def check_invariants(self):
        for (m, n, g) in self.entries:
            if m < 1 or n < 0 or g < 0 or weight(m, n, g) > self.weight_bound:
                raise ValueError(f"bad key {(m, n, g)} in {self.kind} table")
        if self.kind == "A" and self.entries.get((1, 0, 0)) != 1:
            raise ValueError("A table lacks the unit seed at (1,0,0)")
        if self.kind == "C" and any(g == 0 and v for (_, _, g), v in self.entries.items()):
            raise ValueError("C table has a genus-0 entry")

    def rows(self):
        return [(m, n, g, self.entries[(m, n, g)])
                for (m, n, g) in sorted(self.entries, key=lambda k: (weight(*k), k))]

    def to_json(self) -> str:
        return json.dumps({
            "kind": self.kind,
            "weight_bound": self.weight_bound,
            "index_set_convention": self.index_set_convention,
            "entries": [{"m": m, "n": n, "g": g, "value": str(v)} for m, n, g, v in self.rows()],
        }, indent=1)

    @classmethod
    def from_json(cls, text: str) -> "CoeffTable":
        raw = json.loads(text)
        entries = {(e["m"], e["n"], e["g"]): Fraction(e["value"]) for e in raw["entries"]}
        table = cls(raw["kind"], raw["weight_bound"], entries, raw["index_set_convention"])
        table.check_invariants()
        return table

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["m", "n", "g", "value"])
        for row in self.rows():
            writer.writerow([row[0], row[1], row[2], str(row[3])])
        return buf.getvalue()


# -- A ---------------------------------------------------------------------

def _a_equation_terms(m, n, g):
    """(coefficient, key) pairs of the A-recursion at (m, n, g)."""
    for l in range(n + 1):
        for g2 in range(g + 1):
            for p in range(1, m + g - g2 + 1):
                t = grafting_count(m, n - l, g - g2, p)
                if t:
                    yield binomial(n, l) * t, (p, l, g2)


def a_recursive(weight_bound: int) -> CoeffTable:
    """Solve the A-recursion by induction on weight, seeded by A(1,0,0) = 1."""
    if weight_bound < 0:
        raise ValueError("weight_bound must be >= 0")
    entries = {(1, 0, 0): Fraction(1)}
    for key in keys_up_to(weight_bound):
        if key == (1, 0, 0):
            continue
        lead, rest = 0, Fraction(0)
        for coeff, other in _a_equation_terms(*key):
            if other == key:
                lead += coeff
            else:
                rest += coeff * entries[other]
        if lead != 1:
            raise ArithmeticError(f"A-recursion at {key} has leading coefficient {lead}")
        entries[key] = -rest
    return CoeffTable("A", weight_bound, entries)


def a_recursion_residuals(table: CoeffTable) -> dict:
    """Left-hand side of every A-equation evaluated on ``table``."""
    return {key: sum((c * table[o] for c, o in _a_equation_terms(*key)), Fraction(0))
            for key in keys_up_to(table.weight_bound) if key != (1, 0, 0)}


def _chain_product(m, sizes, genera, chain):
    ps = (1,) + chain + (m,)
    out = 1
    for j in range(1, len(sizes)):
        out *= grafting_count(ps[j + 1], sizes[j], genera[j], ps[j])
        if not out:
            break
    return out


@lru_cache(maxsize=None)
def a_closed(m: int, n: int, g: int, index_set_size: int | None = None) -> Fraction:
    """Alternating sum over chains of blocks, genera and output counts.

    ``index_set_size`` is the number of input labels distributed among the
    blocks; it defaults to n, the value that reproduces the recursion.
    """
    if m < 1 or n < 0 or g < 0 or m + n + 2 * g < 2:
        raise ValueError(f"a_closed outside its domain: {(m, n, g)}")
    size = n if index_set_size is None else index_set_size
    total = 0
    for k in range(1, m + size + 2 * g):
        part = 0
        for sizes, genera, chain in xi_profiles(m, size, g, k):
            part += multinomial(size, sizes) * _chain_product(m, sizes, genera, chain)
        total += (-1) ** k * part
    return Fraction(total)


# -- C ---------------------------------------------------------------------

def _c_rhs(m, n, g):
    return (-1) ** (m + n + 1) if g == 1 else 0


def _c_equation_terms(m, n, g):
    for l in range(1, n + 1):
        for g2 in range(1, g + 1):
            for p in range(1, m + g - g2 + 1):
                t = grafting_count(m, n - l, g - g2, p)
                if t:
                    yield binomial(n, l) * t, (p, l, g2)


def c_equation_lhs(m: int, n: int, g: int, table: CoeffTable) -> Fraction:
    """The C-sum ``sum binom(n,l) C(p,l,g') T(m,n-l,g-g',p)`` at (m, n, g)."""
    return sum((c * table[o] for c, o in _c_equation_terms(m, n, g)), Fraction(0))


def c_recursive(weight_bound: int) -> CoeffTable:
    """Solve the C-recursion (right-hand side nonzero only in genus one)."""
    entries = {}
    for key in keys_up_to(weight_bound, min_n=1, min_g=1):
        lead, rest = 0, Fraction(0)
        for coeff, other in _c_equation_terms(*key):
            if other == key:
                lead += coeff
            else:
                rest += coeff * entries[other]
        if lead != 1:
            raise ArithmeticError(f"C-recursion at {key} has leading coefficient {lead}")
        value = _c_rhs(*key) - rest
        if value:
            entries[key] = value
    return CoeffTable("C", weight_bound, entries)


def c_recursion_residuals(table: CoeffTable) -> dict:
    return {key: c_equation_lhs(*key, table) - _c_rhs(*key)
            for key in keys_up_to(table.weight_bound, min_n=1, min_g=1)}


def _c_chain_sum(m, n, g, first_weight, restrict_first, k_max):
    total = 0
    for k in range(1, k_max + 1):
        part = 0
        for sizes, genera, chain in xi_profiles(m, n, g, k):
            if restrict_first and (sizes[0] == 0 or genera[0] != 1):
                continue
            p1 = chain[0] if chain else m
            part += (multinomial(n, sizes) * first_weight(n, p1, sizes[0])
                     * _chain_product(m, sizes, genera, chain))
        total += (-1) ** (k + 1) * part
    return Fraction(total)


@lru_cache(maxsize=None)
def c_closed(m: int, n: int, g: int) -> Fraction:
    """Alternating chain sum for C.

    The first link of every chain is a genus-one triple with a non-empty
    input block (the only triples where the C-recursion has a source term),
    and it carries the weight ``-(-1)^(p_1 + |I_1|)``.  That first link
    raises the weight by at least 3, so chains have at most
    ``m + n + 2g - 3`` links; (1, 1, 1) is the one-link chain.
    """
    if m < 1 or n < 1 or g < 1:
        raise ValueError(f"c_closed outside its domain: {(m, n, g)}")
    return _c_chain_sum(m, n, g, lambda n_, p1, i1: -(-1) ** (p1 + i1), True, m + n + 2 * g - 3)


@lru_cache(maxsize=None)
def c_closed_printed(m: int, n: int, g: int, restrict_first: bool = False) -> Fraction:
    """The chain sum with first-link weight ``n + (-1)^(p_1 + |I_1|)``.

    Kept to document that this weighting does not solve the C-recursion
    (e.g. it gives 0 at (1,1,1)); see ``c_closed`` for the one that does.
    """
    if m < 1 or n < 1 or g < 1:
        raise ValueError(f"c_closed outside its domain: {(m, n, g)}")
    if (m, n, g) == (1, 1, 1):
        return Fraction(-1)
    return _c_chain_sum(m, n, g, lambda n_, p1, i1: n_ + (-1) ** (p1 + i1), restrict_first,
                        m + n + 2 * g - 4)


# -- D, Q --------------------------------------------------------------------

def _lookup(table, key):
    try:
        return table[key]
    except MissingEntry:
        raise MissingEntry(f"A table lacks entry {key} (weight {weight(*key)})") from None


def d_value(m: int, n: int, g: int, a_table: CoeffTable) -> Fraction:
    """``sum binom(n,l) A(p,l,g2) T(m, n-l+1, g-g2, p)``."""
    if m < 1 or n < 0 or g < 0:
        raise ValueError(f"d_value outside its domain: {(m, n, g)}")
    total = Fraction(0)
    for l in range(n + 1):
        for g2 in range(g + 1):
            for p in range(1, m + g - g2 + 1):
                t = grafting_count(m, n - l + 1, g - g2, p)
                if t:
                    total += binomial(n, l) * _lookup(a_table, (p, l, g2)) * t
    return total


def q_value(m: int, n: int, g: int, a_table: CoeffTable) -> Fraction:
    """Coefficient of the type-(V) composites coming from type-B graphs."""
    if m < 1 or n < 1 or g < 1:
        raise ValueError(f"q_value outside its domain: {(m, n, g)}")
    total = Fraction(0)
    for n1 in range(1, n + 1):
        for l in range(n - n1 + 1):
            coeff = multinomial(n, (n1, l, n - n1 - l)) * (-1) ** (n1 - 1)
            for g2 in range(g):
                for p in range(1, m + g - g2):
                    t = grafting_count(m, n - n1 - l + 1, g - g2 - 1, p)
                    if t:
                        total += coeff * _lookup(a_table, (p, l, g2)) * t
    return total


def q_value_via_d(m: int, n: int, g: int, a_table: CoeffTable) -> Fraction:
    """``sum_{n'} (-1)^(n'-1) binom(n, n') D(m, n-n', g-1)``."""
    return sum((Fraction((-1) ** (n1 - 1) * binomial(n, n1)) * d_value(m, n - n1, g - 1, a_table)
                for n1 in range(1, n + 1)), Fraction(0))


def genus0_a(m: int, l: int) -> Fraction:
    """Genus-zero closed form ``(-1)^(l+m-1) m! m^(l-1)``."""
    return Fraction((-1) ** (l + m - 1) * factorial(m)) * Fraction(m) ** (l - 1)


# -- leveled graphs ----------------------------------------------------------

class NodeBudgetExceeded(RuntimeError):
    """The leveled-graph enumeration visited more graftings than allowed."""


def _level_graftings(p, m_new, labels, budget):
    """Yield (label set, added genus) for every level below p strands with
    m_new outputs, absorbing the given new input labels.

    A level is a list of Frobenius vertices: a set partition of the m_new
    outputs, a vertex for each new input, a positive number of upper
    strands per vertex (strands are interchangeable, so this is a
    composition of p) and a genus per vertex.  The genus of the result grows
    by the vertex genera plus the cycles closed by multiple strands.
    """
    labels = tuple(labels)
    for blocks in set_partitions(range(m_new)):
        k = len(blocks)
        if k > p:
            continue
        for _ in itertools.product(range(k), repeat=len(labels)):
            for _ in compositions(p, k):
                budget.tick()
                yield p - k, k


class _Budget:
    def __init__(self, limit):
        self.limit, self.used = limit, 0

    def tick(self):
        self.used += 1
        if self.limit is not None and self.used > self.limit:
            raise NodeBudgetExceeded(f"more than {self.limit} graftings enumerated")


def leveled_graph_oracle_a(m: int, n: int, g: int, node_budget: int | None = 2_000_000) -> Fraction:
    """Signed count of level decompositions of the connected (m, n, g) graph.

    The first input enters a single strand at the top; each of the k levels
    below it is a non-trivial layer of Frobenius vertices (identities
    allowed) absorbing some of the remaining n labelled inputs, and the
    last level carries all m outputs.  Each decomposition counts
    ``(-1)^k``.  The empty decomposition gives 1 at (1, 0, 0).
    """
    if m < 1 or n < 0 or g < 0:
        raise ValueError(f"oracle outside its domain: {(m, n, g)}")
    budget = _Budget(node_budget)
    target_w = weight(m, n, g)
    labels = frozenset(range(n))
    memo = {}

    def count_from(p, used, genus):
        # signed number of ways to finish from the current top graph
        key = (p, used, genus)
        if key in memo:
            return memo[key]
        total = 1 if (p, used, genus) == (m, labels, g) else 0
        here = weight(p, len(used), genus)
        remaining = sorted(labels - used)
        for r in range(len(remaining) + 1):
            for new in itertools.combinations(remaining, r):
                for m_new in range(1, target_w - here + p - r + 1):
                    for closed, k in _level_graftings(p, m_new, new, budget):
                        for extra in range(g - genus - closed + 1):
                            # vertex genera: weak compositions of `extra` into k parts
                            ways = _weak_composition_count(extra, k, budget)
                            g_new = genus + closed + extra
                            nxt = (m_new, used | frozenset(new), g_new)
                            if nxt == key or weight(m_new, len(nxt[1]), g_new) > target_w:
                                continue
                            total -= ways * count_from(*nxt)
        memo[key] = total
        return total

    return Fraction(count_from(1, frozenset(), 0))


def _weak_composition_count(total, parts, budget):
    count = 0
    for _ in weak_compositions(total, parts):
        budget.tick()
        count += 1
    return count


# -- persistence -------------------------------------------------------------

CACHE_ENV = "PROPERAD_LAB_CACHE"

_BUILDERS = {"A": a_recursive, "C": c_recursive}


def cache_dir() -> Path:
    """Table cache directory; the ``PROPERAD_LAB_CACHE`` variable overrides it."""
    override = os.environ.get(CACHE_ENV)
    if override:
        return Path(override)
    return Path.home() / ".cache" / "properad_lab"


def cached_table(kind: str, weight_bound: int, directory: Path | None = None) -> CoeffTable:
    """Load a recursion table from the cache, building and storing it if absent.

    Files are keyed by kind, weight bound and index-set convention, and are
    written atomically so concurrent readers never see a partial file.
    """
    directory = cache_dir() if directory is None else Path(directory)
    path = directory / f"{kind}_w{weight_bound}_{INDEX_SET_CONVENTION}.json"
    if path.exists():
        return CoeffTable.from_json(path.read_text())
    table = _BUILDERS[kind](weight_bound)
    directory.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(f".{os.getpid()}.tmp")
    tmp.write_text(table.to_json())
    os.replace(tmp, path)
    return table
