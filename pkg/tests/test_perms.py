"""Permutation arithmetic and the stabilizer chain against brute force."""

import itertools
import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stabcover.errors import CapExceededError, DomainError
from stabcover.perms import (
    PermutationGroup,
    as_perm,
    conj,
    core_bounded,
    identity_perm,
    normalizer_bounded,
    perm_order,
    pinv,
    pmul,
)


def test_as_perm_validation():
    assert as_perm([1, 0, 2]) == bytes([1, 0, 2])
    with pytest.raises(DomainError):
        as_perm([0, 0, 1])
    with pytest.raises(DomainError):
        as_perm([0, 1], degree=3)


def test_composition_convention():
    # pmul(p, q) applies p first
    p = as_perm([1, 2, 0])
    q = as_perm([0, 2, 1])
    pq = pmul(p, q)
    assert all(pq[x] == q[p[x]] for x in range(3))


@settings(max_examples=50, deadline=None)
@given(st.permutations(list(range(7))), st.permutations(list(range(7))))
def test_group_identities_random(a, b):
    p, q = as_perm(a), as_perm(b)
    ident = identity_perm(7)
    assert pmul(p, pinv(p)) == ident
    assert pinv(pmul(p, q)) == pmul(pinv(q), pinv(p))
    assert conj(p, q) == pmul(pmul(pinv(q), p), q)


def test_perm_order():
    assert perm_order(identity_perm(5)) == 1
    assert perm_order(as_perm([1, 2, 3, 4, 0])) == 5
    assert perm_order(as_perm([1, 0, 3, 4, 2])) == 6


def _brute_closure(degree, gens):
    ident = identity_perm(degree)
    seen = {ident}
    frontier = [ident]
    while frontier:
        nxt = []
        for x in frontier:
            for g in gens:
                y = pmul(x, g)
                if y not in seen:
                    seen.add(y)
                    nxt.append(y)
        frontier = nxt
    return seen


def test_order_against_brute_closure_random():
    rng = random.Random(1234)
    for _ in range(40):
        degree = rng.randint(2, 7)
        gens = [
            as_perm(rng.sample(range(degree), degree)) for _ in range(rng.randint(1, 3))
        ]
        G = PermutationGroup(degree, gens)
        brute = _brute_closure(degree, gens)
        assert G.order == len(brute)
        assert sorted(G.elements(10_000)) == sorted(brute)
        for p in itertools.permutations(range(degree)):
            assert G.contains(as_perm(p)) == (as_perm(p) in brute)


def test_symmetric_and_cyclic_orders():
    n = 8
    cyc = as_perm(list(range(1, n)) + [0])
    swap = as_perm([1, 0] + list(range(2, n)))
    assert PermutationGroup(n, [cyc]).order == n
    assert PermutationGroup(n, [cyc, swap]).order == math.factorial(n)


def test_elements_cap():
    n = 8
    cyc = as_perm(list(range(1, n)) + [0])
    swap = as_perm([1, 0] + list(range(2, n)))
    G = PermutationGroup(n, [cyc, swap])
    with pytest.raises(CapExceededError):
        G.elements(100)


def test_elements_deterministic():
    n = 6
    cyc = as_perm(list(range(1, n)) + [0])
    swap = as_perm([1, 0] + list(range(2, n)))
    a = PermutationGroup(n, [cyc, swap]).elements()
    b = PermutationGroup(n, [cyc, swap]).elements()
    assert a == b


def test_normalizer_bounded():
    # normalizer of <(0 1 2 3)> in Sym(4) is the dihedral group of order 8
    n = 4
    cyc = as_perm([1, 2, 3, 0])
    swap = as_perm([1, 0, 2, 3])
    S4 = PermutationGroup(n, [cyc, swap])
    C4 = PermutationGroup(n, [cyc])
    N = normalizer_bounded(S4, C4)
    assert N.order == 8
    brute = [
        x
        for x in S4.elements()
        if all(C4.contains(pmul(pmul(pinv(x), h), x)) for h in C4.elements())
    ]
    assert N.order == len(brute)


def test_core_bounded():
    # the core of a point stabilizer in a transitive group is trivial
    n = 4
    cyc = as_perm([1, 2, 3, 0])
    swap = as_perm([1, 0, 2, 3])
    S4 = PermutationGroup(n, [cyc, swap])
    stab = PermutationGroup(n, [g for g in S4.elements() if g[0] == 0])
    assert core_bounded(S4, stab).order == 1
    # the core of a normal subgroup is itself
    V = PermutationGroup(n, [as_perm([1, 0, 3, 2]), as_perm([2, 3, 0, 1])])
    assert core_bounded(S4, V).order == 4
