"""Automorphism search and canonical forms against factorial brute force."""

import itertools
import math
import random

import pytest

from stabcover.autgrp import (
    DEFAULT_VERTEX_CAP,
    automorphism_group,
    canonical_form,
    setwise_stabilizer_of_block,
)
from stabcover.errors import CapExceededError, DomainError
from stabcover.graphs import LabeledGraph
from stabcover.perms import PermutationGroup, as_perm


def _random_graph(rng, n, p=0.5, loops=False):
    rows = [0] * n
    for u in range(n):
        if loops and rng.random() < 0.3:
            rows[u] |= 1 << u
        for v in range(u + 1, n):
            if rng.random() < p:
                rows[u] |= 1 << v
                rows[v] |= 1 << u
    return LabeledGraph(n, tuple(rows))


def _brute_automorphisms(g):
    out = []
    for images in itertools.permutations(range(g.n)):
        if all(
            g.has_edge(u, v) == g.has_edge(images[u], images[v])
            for u in range(g.n)
            for v in range(u, g.n)
        ):
            out.append(as_perm(images))
    return out


def test_all_graphs_up_to_four_vertices():
    for n in range(5):
        pair_count = n * (n - 1) // 2
        for code in range(1 << pair_count):
            rows = [0] * n
            k = 0
            for u in range(n):
                for v in range(u + 1, n):
                    if code >> k & 1:
                        rows[u] |= 1 << v
                        rows[v] |= 1 << u
                    k += 1
            g = LabeledGraph(n, tuple(rows))
            A = automorphism_group(g)
            assert A.order == len(_brute_automorphisms(g))


def test_random_graphs_with_loops():
    rng = random.Random(31)
    for _ in range(25):
        n = rng.randint(1, 7)
        g = _random_graph(rng, n, rng.choice([0.2, 0.5, 0.8]), loops=True)
        A = automorphism_group(g)
        brute = _brute_automorphisms(g)
        assert A.order == len(brute)
        assert all(A.contains(p) for p in brute)


def test_known_orders():
    n = 7
    cyc = LabeledGraph(
        n, tuple((1 << ((v + 1) % n)) | (1 << ((v - 1) % n)) for v in range(n))
    )
    assert automorphism_group(cyc).order == 2 * n
    full = (1 << n) - 1
    kn = LabeledGraph(n, tuple(full & ~(1 << v) for v in range(n)))
    assert automorphism_group(kn).order == math.factorial(n)


def test_petersen_graph():
    # outer 5-cycle, inner 5-star, spokes
    edges = [(v, (v + 1) % 5) for v in range(5)]
    edges += [(5 + v, 5 + (v + 2) % 5) for v in range(5)]
    edges += [(v, v + 5) for v in range(5)]
    rows = [0] * 10
    for u, v in edges:
        rows[u] |= 1 << v
        rows[v] |= 1 << u
    g = LabeledGraph(10, tuple(rows))
    assert automorphism_group(g).order == 120


def test_fixed_blocks_stabilizer():
    rng = random.Random(47)
    for _ in range(15):
        n = rng.randint(2, 6)
        g = _random_graph(rng, n)
        block = list(range(rng.randint(1, n)))
        A = automorphism_group(g, fixed_blocks=[block])
        brute = [
            p for p in _brute_automorphisms(g) if {p[v] for v in block} == set(block)
        ]
        assert A.order == len(brute)


def test_fixed_blocks_overlap_rejected():
    g = LabeledGraph(3, (0, 0, 0))
    with pytest.raises(DomainError):
        automorphism_group(g, fixed_blocks=[[0, 1], [1, 2]])


def test_known_automorphism_seeds():
    n = 6
    cyc = LabeledGraph(
        n, tuple((1 << ((v + 1) % n)) | (1 << ((v - 1) % n)) for v in range(n))
    )
    rot = as_perm([(v + 1) % n for v in range(n)])
    assert automorphism_group(cyc, known_automorphisms=[rot]).order == 2 * n
    with pytest.raises(DomainError):
        automorphism_group(cyc, known_automorphisms=[as_perm([1, 0, 2, 3, 4, 5])])


def test_canonical_form_invariance():
    rng = random.Random(91)
    for _ in range(25):
        n = rng.randint(1, 7)
        g = _random_graph(rng, n, 0.5, loops=True)
        base = canonical_form(g).bytes
        for _ in range(3):
            perm = as_perm(rng.sample(range(n), n))
            assert canonical_form(g.relabel(perm)).bytes == base


def _brute_isomorphic(g, h):
    if g.n != h.n:
        return False
    return any(
        all(
            g.has_edge(u, v) == h.has_edge(p[u], p[v])
            for u in range(g.n)
            for v in range(u, g.n)
        )
        for p in itertools.permutations(range(g.n))
    )


def test_canonical_form_separates():
    rng = random.Random(13)
    graphs = [_random_graph(rng, 5, p, loops=True) for p in (0.2, 0.4, 0.6, 0.8)]
    for a in graphs:
        for b in graphs:
            assert (canonical_form(a).bytes == canonical_form(b).bytes) == (
                _brute_isomorphic(a, b)
            )


def test_canonical_relabeling_witness():
    rng = random.Random(3)
    for _ in range(10):
        g = _random_graph(rng, rng.randint(1, 6), 0.5)
        cf = canonical_form(g)
        relabeled = g.relabel(cf.relabeling)
        width = (g.n + 7) // 8
        blob = g.n.to_bytes(4, "big") + b"".join(
            row.to_bytes(width, "little") for row in relabeled.rows
        )
        assert blob == cf.bytes


def test_vertex_cap():
    n = DEFAULT_VERTEX_CAP + 1
    g = LabeledGraph(n, tuple([0] * n))
    with pytest.raises(CapExceededError):
        automorphism_group(g)


def test_setwise_stabilizer_of_block():
    # dihedral group on an 8-cycle; block = one side of the bipartition
    n = 4
    cyc8 = LabeledGraph(
        8, tuple((1 << ((v + 1) % 8)) | (1 << ((v - 1) % 8)) for v in range(8))
    )
    A = automorphism_group(cyc8)
    # relabel so the even vertices come first
    order = [0, 2, 4, 6, 1, 3, 5, 7]
    pos = as_perm([order.index(v) for v in range(8)])
    A2 = PermutationGroup(8, [bytes(pos[g[order[v]]] for v in range(8)) for g in A.generators])
    stab = setwise_stabilizer_of_block(A2, n)
    brute = [g for g in A2.elements() if {g[v] for v in range(n)} == set(range(n))]
    assert stab.order == len(brute)
