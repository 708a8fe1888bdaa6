from __future__ import annotations

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from postone.congruence import (
    Morphism,
    check_surjective_morphism,
    congruences,
    factor_to_simple,
    identity,
    is_congruence,
    is_morphism,
    is_simple,
    max_congruence,
    merge_isomorphic_upsets,
    quotient,
    set_partitions,
    simple_image,
    simplicity_criterion,
    surjective_morphisms,
)
from postone.errors import InvalidCongruence, NotAMorphism, NotSurjective, SizeLimit
from postone.generators import all_po_systems, random_po_system, random_surjection
from postone.poset import PoSystem, automorphisms, build_posystem, iso

CHAIN = build_posystem(["p", "q"], [("p", "q")])
ANTI = PoSystem(["p", "q"], [])
ANTI_REFL = PoSystem(["p", "q"], [("p", "p"), ("q", "q")])
SINGLE_REFL = PoSystem(["x"], [("x", "x")])


def lifting_law(P, classes):
    """Direct reading of the definition: q<r and q~s give t with r~t and s<t."""
    cls = {p: i for i, c in enumerate(classes) for p in c}
    for q, r in P.lt:
        for s in P.elements:
            if cls[s] != cls[q]:
                continue
            if not any(cls[t] == cls[r] and P.is_lt(s, t) for t in P.elements):
                return False
    return True


@st.composite
def po_systems(draw, lo=1, hi=6):
    seed = draw(st.integers(0, 10**9))
    return random_po_system(random.Random(seed), draw(st.integers(lo, hi)))


class TestMorphism:
    def test_identity(self):
        assert is_morphism(identity(CHAIN))

    def test_chain_onto_reflexive_point(self):
        # at q nothing lies above, while x < x: the law fails
        assert not is_morphism(Morphism(CHAIN, SINGLE_REFL, {"p": "x", "q": "x"}))
        top_refl = build_posystem(["p", "q"], [("p", "q"), ("q", "q")])
        assert is_morphism(Morphism(top_refl, SINGLE_REFL, {"p": "x", "q": "x"}))

    def test_chain_onto_discrete_point(self):
        assert not is_morphism(Morphism(CHAIN, PoSystem(["x"], []), {"p": "x", "q": "x"}))

    def test_checked_errors(self):
        with pytest.raises(NotAMorphism):
            check_surjective_morphism(Morphism(CHAIN, PoSystem(["x"], []), {"p": "x", "q": "x"}))
        two = PoSystem(["x", "y"], [])
        with pytest.raises(NotSurjective):
            check_surjective_morphism(Morphism(PoSystem(["p"], []), two, {"p": "x"}))

    @given(po_systems(hi=5), st.integers(0, 10**6))
    @settings(max_examples=40, deadline=None)
    def test_composition(self, P, seed):
        rng = random.Random(seed)
        a = random_surjection(rng, P, "y")
        b = random_surjection(rng, a.target, "z")
        assert is_morphism(a) and is_morphism(b)
        assert is_morphism(a.then(b))


class TestCongruence:
    def test_identity_partition(self):
        assert is_congruence(CHAIN, [["p"], ["q"]])

    def test_antichain_merge(self):
        assert is_congruence(ANTI, [["p", "q"]])

    def test_chain_merge_fails(self):
        assert not is_congruence(CHAIN, [["p", "q"]])

    def test_not_a_partition(self):
        assert not is_congruence(CHAIN, [["p"]])

    def test_quotients(self):
        assert quotient(CHAIN, [["p"], ["q"]])[0] == CHAIN
        Q, proj = quotient(ANTI, [["p", "q"]])
        assert Q == PoSystem(["p"], [])
        Q, _ = quotient(ANTI_REFL, [["p", "q"]])
        assert Q == PoSystem(["p"], [("p", "p")])
        with pytest.raises(InvalidCongruence):
            quotient(CHAIN, [["p", "q"]])

    def test_filter_matches_definition(self):
        for P in all_po_systems(4):
            n = len(P)
            for label in set_partitions(n):
                groups = {}
                for i, c in enumerate(label):
                    groups.setdefault(c, []).append(P.elements[i])
                assert is_congruence(P, groups.values()) == lifting_law(P, list(groups.values()))

    @given(po_systems(hi=5))
    @settings(max_examples=40, deadline=None)
    def test_every_quotient_projection_is_a_morphism(self, P):
        for c in congruences(P):
            assert is_morphism(quotient(P, c)[1])

    def test_partition_counts(self):
        assert [sum(1 for _ in set_partitions(n)) for n in range(6)] == [1, 1, 2, 5, 15, 52]

    def test_size_limit(self):
        P = PoSystem([f"x{i}" for i in range(10)], [])
        with pytest.raises(SizeLimit):
            max_congruence(P, "exhaustive")


class TestMaxCongruenceAndSimpleImage:
    def test_examples(self):
        assert max_congruence(CHAIN, "exhaustive").is_identity
        assert len(max_congruence(ANTI, "exhaustive").classes) == 1
        assert max_congruence(PoSystem(["p"], []), "exhaustive").is_identity

    def test_simple_images(self):
        S, proj = simple_image(CHAIN)
        assert S == CHAIN and proj.mapping == {"p": "p", "q": "q"}
        S, _ = simple_image(ANTI)
        assert S == PoSystem(["p"], [])
        two_chains = build_posystem(["a", "b", "c", "d"], [("a", "b"), ("c", "d")])
        S, _ = simple_image(two_chains)
        assert iso(S, CHAIN) is not None

    def test_is_simple(self):
        assert is_simple(CHAIN)
        assert not is_simple(ANTI)

    def test_upset_merging_is_incomplete(self):
        # both elements reflexive, y < x: the whole set is one class
        P = PoSystem(["y", "x"], [("y", "x"), ("y", "y"), ("x", "x")])
        assert len(max_congruence(P, "exhaustive").classes) == 1
        merged, _ = merge_isomorphic_upsets(P)
        assert len(merged) == 2
        assert simple_image(P)[0] == PoSystem(["y"], [("y", "y")])

    def test_upset_merging_is_sound(self):
        for P in all_po_systems(4):
            M, proj = merge_isomorphic_upsets(P)
            assert is_morphism(proj)
            S, _ = simple_image(P)
            assert len(S) <= len(M)

    def test_simplicity_criterion_agrees(self):
        for P in all_po_systems(4):
            assert is_simple(P) == simplicity_criterion(P)

    def test_rejects_unknown_method(self):
        with pytest.raises(ValueError):
            max_congruence(CHAIN, "guess")


class TestFactor:
    def test_identity(self):
        S, alpha = simple_image(ANTI)
        gamma = factor_to_simple(identity(ANTI))
        assert gamma.mapping == alpha.mapping

    def test_canonical_projection(self):
        S, alpha = simple_image(ANTI)
        gamma = factor_to_simple(alpha)
        assert gamma.mapping == {s: s for s in S.elements}

    def test_two_chains_merged(self):
        P = build_posystem(["a", "b", "c", "d"], [("a", "b"), ("c", "d")])
        beta = Morphism(P, CHAIN, {"a": "p", "b": "q", "c": "p", "d": "q"})
        gamma = factor_to_simple(beta)
        S, alpha = simple_image(P)
        assert len(set(gamma.mapping.values())) == len(S) == 2
        assert beta.then(gamma).mapping == alpha.mapping


def test_surjective_morphism_search_matches_brute_force():
    import itertools

    rng = random.Random(5)
    for _ in range(30):
        Q = random_po_system(rng, rng.randint(1, 4))
        P = random_surjection(rng, Q).target
        brute = set()
        for images in itertools.product(P.elements, repeat=len(Q)):
            m = Morphism(Q, P, dict(zip(Q.elements, images)))
            if m.is_surjective and is_morphism(m):
                brute.add(tuple(images))
        found = {tuple(m.mapping[q] for q in Q.elements) for m in surjective_morphisms(Q, P)}
        assert found == brute


@given(po_systems(hi=6))
@settings(max_examples=60, deadline=None)
def test_simple_image_is_rigid(P):
    S, _ = simple_image(P)
    assert is_simple(S)
    assert automorphisms(S) == [{s: s for s in S.elements}]
