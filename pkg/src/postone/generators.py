"""Enumerators and seeded random samplers for PO systems, morphisms, models and compact opens."""

from __future__ import annotations

import itertools
import os
import random
from typing import Iterator

from .cellspace import CellModel, CompactOpen, Tail, build_model
from .congruence import Morphism, congruences, quotient
from .extended import ExtendedPoSystem
from .poset import PoSystem, automorphisms

DEFAULT_SEED = 20240611


def seed_from_env(default: int = DEFAULT_SEED) -> int:
    return int(os.environ.get("POSTONE_SEED", default))


def _names(n: int) -> list[str]:
    return [f"x{i}" for i in range(n)]


def _canonical(n: int, rel: frozenset) -> tuple:
    best = None
    for perm in itertools.permutations(range(n)):
        key = tuple(sorted((perm[i], perm[j]) for i, j in rel))
        if best is None or key < best:
            best = key
    return best


def all_posets(n: int) -> list[frozenset]:
    """Strict partial orders on ``range(n)`` up to isomorphism (naturally labelled)."""
    slots = [(i, j) for i in range(n) for j in range(i + 1, n)]
    seen, out = set(), []
    for bits in range(1 << len(slots)):
        rel = frozenset(slots[k] for k in range(len(slots)) if bits >> k & 1)
        if any((j, k) in rel and (i, k) not in rel for i, j in rel for k in range(n)):
            continue
        key = _canonical(n, rel)
        if key not in seen:
            seen.add(key)
            out.append(rel)
    return out


def all_po_systems(max_size: int = 5) -> Iterator[PoSystem]:
    """Every PO system with ``1..max_size`` elements, one per isomorphism class."""
    for n in range(1, max_size + 1):
        names = _names(n)
        for rel in all_posets(n):
            base = PoSystem(names, [(names[i], names[j]) for i, j in rel])
            autos = automorphisms(base)
            seen = set()
            for bits in range(1 << n):
                refl = frozenset(i for i in range(n) if bits >> i & 1)
                key = min(tuple(sorted(base.index(a[names[i]]) for i in refl)) for a in autos)
                if key in seen:
                    continue
                seen.add(key)
                yield PoSystem(names, [(names[i], names[j]) for i, j in rel] +
                               [(names[i], names[i]) for i in refl])


def random_po_system(rng: random.Random, n: int, density: float | None = None,
                     reflexive: float | None = None) -> PoSystem:
    density = rng.uniform(0.1, 0.6) if density is None else density
    reflexive = rng.uniform(0.0, 0.7) if reflexive is None else reflexive
    names = _names(n)
    rel = [[False] * n for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            rel[i][j] = rng.random() < density
    for k in range(n):
        for i in range(n):
            if rel[i][k]:
                for j in range(n):
                    if rel[k][j]:
                        rel[i][j] = True
    perm = names[:]
    rng.shuffle(perm)
    pairs = [(perm[i], perm[j]) for i in range(n) for j in range(n) if rel[i][j]]
    pairs += [(perm[i], perm[i]) for i in range(n) if rng.random() < reflexive]
    return PoSystem(names, pairs)


def random_eps(rng: random.Random, P: PoSystem, max_f: int = 3) -> ExtendedPoSystem:
    picks = [p for p in P.elements if rng.random() < 0.5]
    L = P.down_set(picks)
    f = {p: rng.randint(1, max_f) for p in P.minimal(L) if not P.is_reflexive(p)}
    return ExtendedPoSystem(P, L, f)


def random_model(rng: random.Random, max_size: int = 6) -> CellModel:
    P = random_po_system(rng, rng.randint(1, max_size))
    return build_model(random_eps(rng, P))


def random_surjection(rng: random.Random, P: PoSystem, prefix: str = "y") -> Morphism:
    """A random quotient projection ``P → P/∼``, with the target relabelled."""
    congs = list(congruences(P))
    c = rng.choice(congs)
    Q, proj = quotient(P, c)
    order = list(Q.elements)
    rng.shuffle(order)
    names = {q: f"{prefix}{k}" for k, q in enumerate(order)}
    target = Q.relabel(names)
    return Morphism(P, target, {p: names[proj.mapping[p]] for p in P.elements})


def duplicate_upset(P: PoSystem, p: str, tag: str = "'") -> Morphism:
    """``Q = P ⊔ p↑`` with the copy folded back onto ``p↑``."""
    up = P.ordered(P.up(p))
    copy = {x: x + tag for x in up}
    while any(c in P for c in copy.values()):
        tag += "'"
        copy = {x: x + tag for x in up}
    elements = list(P.elements) + [copy[x] for x in up]
    pairs = list(P.lt) + [(copy[a], copy[b]) for a, b in P.lt if a in copy and b in copy]
    Q = PoSystem(elements, pairs)
    mapping = {x: x for x in P.elements}
    mapping.update({copy[x]: x for x in up})
    return Morphism(Q, P, mapping)


def random_refinement(rng: random.Random, P: PoSystem, steps: int | None = None, tag: str = "'") -> Morphism:
    """A surjective morphism ``Q → P`` built from a few up-set duplications."""
    steps = rng.randint(0, 2) if steps is None else steps
    alpha = Morphism(P, P, {p: p for p in P.elements})
    for k in range(steps):
        Q = alpha.source
        beta = duplicate_upset(Q, rng.choice(Q.elements), tag * (k + 1))
        alpha = beta.then(alpha)
    return alpha


def random_tail(rng: random.Random, model: CellModel, max_depth: int = 3, max_index: int = 4,
                horizon: int | None = None) -> Tail:
    n_roots = len(model.l_roots) + 2 * len(model.u_cycle)
    if horizon is not None:
        n_roots = min(n_roots, horizon) if model.u_cycle else len(model.l_roots)
    addr = [rng.randint(1, max(n_roots, 1))]
    for _ in range(rng.randint(0, max_depth)):
        if model.is_atom_type(model.ctype(tuple(addr))):
            break
        addr.append(rng.randint(1, max_index))
    return model.tail(tuple(addr), rng.randint(1, max_index))


def random_compact_open(rng: random.Random, model: CellModel, max_tails: int = 4) -> CompactOpen:
    tails = [random_tail(rng, model) for _ in range(rng.randint(1, max_tails))]
    out = CompactOpen(())
    for t in tails:
        out = model.union(out, CompactOpen((t,)))
    return out
