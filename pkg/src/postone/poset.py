"""Finite PO systems: a set with an antisymmetric transitive relation ``<``.

Reflexive pairs ``(p, p)`` are allowed and mark the non-discrete elements;
``P^d`` is the set of elements with ``p ≮ p``.  Elements are opaque string ids
kept in the order given at construction, which fixes every search order.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping, Sequence

from .errors import AntisymmetryViolation, PostoneError


class PoSystem:
    __slots__ = ("elements", "lt", "_index", "_succ", "_pred")

    def __init__(self, elements: Sequence[str], lt: Iterable[tuple[str, str]]):
        elements = tuple(elements)
        if len(set(elements)) != len(elements):
            raise PostoneError("duplicate element ids")
        index = {e: i for i, e in enumerate(elements)}
        lt = frozenset((p, q) for p, q in lt)
        succ = [set() for _ in elements]
        pred = [set() for _ in elements]
        for p, q in lt:
            if p not in index or q not in index:
                raise PostoneError(f"pair ({p}, {q}) mentions an unknown element")
            succ[index[p]].add(index[q])
            pred[index[q]].add(index[p])
        for i in range(len(elements)):
            for j in succ[i]:
                if j != i and i in succ[j]:
                    raise AntisymmetryViolation(elements[i], elements[j])
                if not succ[j] <= succ[i] and not (j == i):
                    raise PostoneError(
                        f"relation is not transitive at {elements[i]} < {elements[j]}"
                    )
        self.elements = elements
        self.lt = lt
        self._index = index
        self._succ = tuple(frozenset(s) for s in succ)
        self._pred = tuple(frozenset(s) for s in pred)

    # -- basic access -------------------------------------------------

    def __len__(self):
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def __contains__(self, p):
        return p in self._index

    def __eq__(self, other):
        if not isinstance(other, PoSystem):
            return NotImplemented
        return set(self.elements) == set(other.elements) and self.lt == other.lt

    def __hash__(self):
        return hash((frozenset(self.elements), self.lt))

    def __repr__(self):
        pairs = ", ".join(f"{p}<{q}" for p, q in self.sorted_pairs())
        return f"PoSystem({list(self.elements)}, [{pairs}])"

    def index(self, p: str) -> int:
        return self._index[p]

    def sorted_pairs(self) -> list[tuple[str, str]]:
        idx = self._index
        return sorted(self.lt, key=lambda pq: (idx[pq[0]], idx[pq[1]]))

    def is_lt(self, p, q) -> bool:
        return (p, q) in self.lt

    def is_le(self, p, q) -> bool:
        return p == q or (p, q) in self.lt

    def is_reflexive(self, p) -> bool:
        return (p, p) in self.lt

    @property
    def discrete(self) -> tuple[str, ...]:
        """``P^d``: elements with ``p ≮ p``."""
        return tuple(p for p in self.elements if (p, p) not in self.lt)

    @property
    def reflexive(self) -> tuple[str, ...]:
        return tuple(p for p in self.elements if (p, p) in self.lt)

    # -- index-level views used by the search code ----------------------

    def succ_idx(self, i: int) -> frozenset[int]:
        """Indices strictly above element ``i`` (contains ``i`` itself when reflexive)."""
        return self._succ[i]

    def pred_idx(self, i: int) -> frozenset[int]:
        return self._pred[i]

    # -- order-theoretic helpers ----------------------------------------

    def above(self, p) -> frozenset[str]:
        """``{r | r > p}``, including ``p`` when ``p < p``."""
        return frozenset(self.elements[j] for j in self._succ[self._index[p]])

    def below(self, p) -> frozenset[str]:
        return frozenset(self.elements[j] for j in self._pred[self._index[p]])

    def up(self, p) -> frozenset[str]:
        return self.above(p) | {p}

    def down(self, p) -> frozenset[str]:
        return self.below(p) | {p}

    def up_set(self, subset: Iterable[str]) -> frozenset[str]:
        out = set()
        for p in subset:
            out |= self.up(p)
        return frozenset(out)

    def down_set(self, subset: Iterable[str]) -> frozenset[str]:
        out = set()
        for p in subset:
            out |= self.down(p)
        return frozenset(out)

    def is_upper(self, subset: Iterable[str]) -> bool:
        subset = set(subset)
        return all(self.up(p) <= subset for p in subset)

    def is_lower(self, subset: Iterable[str]) -> bool:
        subset = set(subset)
        return all(self.down(p) <= subset for p in subset)

    def minimal(self, subset: Iterable[str] | None = None) -> tuple[str, ...]:
        """Minimal elements of ``subset`` (default: all of P) for ``≤``, in P order."""
        subset = set(self.elements if subset is None else subset)
        return tuple(
            p for p in self.elements
            if p in subset and not any(q != p and q in subset for q in self.below(p))
        )

    def maximal(self, subset: Iterable[str] | None = None) -> tuple[str, ...]:
        subset = set(self.elements if subset is None else subset)
        return tuple(
            p for p in self.elements
            if p in subset and not any(q != p and q in subset for q in self.above(p))
        )

    def ordered(self, subset: Iterable[str]) -> tuple[str, ...]:
        subset = set(subset)
        return tuple(p for p in self.elements if p in subset)

    # -- derived systems ------------------------------------------------

    def reverse(self) -> PoSystem:
        """The reversed PO system ``P̃``."""
        return PoSystem(self.elements, ((q, p) for p, q in self.lt))

    def sub(self, subset: Iterable[str]) -> PoSystem:
        """Sub-PO-system on ``subset`` with the induced relation."""
        keep = set(subset)
        missing = keep - set(self.elements)
        if missing:
            raise PostoneError(f"unknown elements {sorted(missing)}")
        return PoSystem(
            (p for p in self.elements if p in keep),
            ((p, q) for p, q in self.lt if p in keep and q in keep),
        )

    def upset_system(self, p) -> PoSystem:
        """``p↑`` as a PO system (the "diagram" generated by ``p``)."""
        return self.sub(self.up(p))

    def relabel(self, mapping: Mapping[str, str]) -> PoSystem:
        return PoSystem(
            (mapping[p] for p in self.elements),
            ((mapping[p], mapping[q]) for p, q in self.lt),
        )

    # -- serialization --------------------------------------------------

    def to_json(self) -> dict:
        return {"elements": list(self.elements), "lt": [list(pq) for pq in self.sorted_pairs()]}

    @classmethod
    def from_json(cls, data: Mapping) -> PoSystem:
        return build_posystem(data["elements"], [tuple(pq) for pq in data.get("lt", [])])


def build_posystem(elements: Sequence[str], generating_pairs: Iterable[tuple[str, str]]) -> PoSystem:
    """Transitive closure of ``generating_pairs`` (Warshall), then antisymmetry check."""
    elements = tuple(str(e) for e in elements)
    index = {e: i for i, e in enumerate(elements)}
    if len(index) != len(elements):
        raise PostoneError("duplicate element ids")
    n = len(elements)
    rel = [[False] * n for _ in range(n)]
    for p, q in generating_pairs:
        p, q = str(p), str(q)
        if p not in index or q not in index:
            raise PostoneError(f"pair ({p}, {q}) mentions an unknown element")
        rel[index[p]][index[q]] = True
    for k in range(n):
        row_k = rel[k]
        for i in range(n):
            if rel[i][k]:
                row_i = rel[i]
                for j in range(n):
                    if row_k[j]:
                        row_i[j] = True
    for i in range(n):
        for j in range(i + 1, n):
            if rel[i][j] and rel[j][i]:
                raise AntisymmetryViolation(elements[i], elements[j])
    return PoSystem(
        elements,
        ((elements[i], elements[j]) for i in range(n) for j in range(n) if rel[i][j]),
    )


def finite_foundation(P: PoSystem, Q: Iterable[str]) -> frozenset[str] | None:
    """A finite foundation of ``Q``: ``F ⊆ Q↓`` with ``Q↓ ⊆ F↑``.

    For finite P this always exists and is the set of minimal elements of ``Q↓``.
    """
    lower = P.down_set(Q)
    found = frozenset(P.minimal(lower))
    if not lower <= P.up_set(found):
        return None
    return found


# -- isomorphism search ---------------------------------------------------


def _signature(P: PoSystem, i: int) -> tuple:
    succ, pred = P.succ_idx(i), P.pred_idx(i)
    return (i in succ, len(succ), len(pred))


def isomorphisms(P: PoSystem, Q: PoSystem) -> Iterator[dict[str, str]]:
    """All isomorphisms ``P → Q`` (bijections preserving ``<`` both ways)."""
    n = len(P)
    if n != len(Q) or len(P.lt) != len(Q.lt):
        return
    sig_p = [_signature(P, i) for i in range(n)]
    sig_q = [_signature(Q, j) for j in range(n)]
    if sorted(sig_p) != sorted(sig_q):
        return
    # most constrained elements first: rarest signature, then most relations
    counts = {}
    for s in sig_p:
        counts[s] = counts.get(s, 0) + 1
    order = sorted(range(n), key=lambda i: (counts[sig_p[i]], -sig_p[i][1] - sig_p[i][2], i))
    candidates = [[j for j in range(n) if sig_q[j] == sig_p[i]] for i in range(n)]
    image = [-1] * n
    used = [False] * n

    def consistent(i, j):
        for k in range(n):
            jk = image[k]
            if jk < 0:
                continue
            if (k in P.succ_idx(i)) != (jk in Q.succ_idx(j)):
                return False
            if (i in P.succ_idx(k)) != (j in Q.succ_idx(jk)):
                return False
        return True

    def extend(pos):
        if pos == n:
            yield {P.elements[i]: Q.elements[image[i]] for i in range(n)}
            return
        i = order[pos]
        for j in candidates[i]:
            if used[j] or not consistent(i, j):
                continue
            image[i] = j
            used[j] = True
            yield from extend(pos + 1)
            image[i] = -1
            used[j] = False

    yield from extend(0)


def iso(P: PoSystem, Q: PoSystem) -> dict[str, str] | None:
    """An isomorphism ``P → Q``, or ``None``."""
    return next(isomorphisms(P, Q), None)


def automorphisms(P: PoSystem) -> list[dict[str, str]]:
    return list(isomorphisms(P, P))


# -- ideals -----------------------------------------------------------------


@dataclass(frozen=True)
class Ideal:
    carrier: frozenset
    generator: str | None = None

    @property
    def principal(self) -> bool:
        return self.generator is not None


def is_ideal(P: PoSystem, subset: Iterable[str]) -> bool:
    """Non-empty, lower and upward directed."""
    subset = frozenset(subset)
    if not subset or not P.is_lower(subset):
        return False
    for x in subset:
        for y in subset:
            if not any(P.is_le(x, z) and P.is_le(y, z) for z in subset):
                return False
    return True


def ideals_finite(P: PoSystem) -> list[Ideal]:
    """The ideals of a finite P: exactly the principal ideals ``p↓``."""
    return [Ideal(P.down(p), p) for p in P.elements]


def ideal_completion_finite(P: PoSystem) -> PoSystem:
    """``id(P)`` for finite P, ordered by inclusion; ``p↓ < p↓`` iff ``p < p``.

    Each ideal is named after its generator, so the result is order-isomorphic
    to P via the identity on names.
    """
    ideals = ideals_finite(P)
    pairs = []
    for J in ideals:
        for K in ideals:
            if J.carrier < K.carrier:
                pairs.append((J.generator, K.generator))
            elif J.carrier == K.carrier and P.is_reflexive(J.generator):
                pairs.append((J.generator, K.generator))
    return PoSystem([J.generator for J in ideals], pairs)
