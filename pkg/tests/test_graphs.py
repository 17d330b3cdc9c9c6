"""Graph construction, predicates, and the bi-coset model on small cases."""

import random

import pytest

from stabcover.errors import DomainError
from stabcover.graphs import (
    ConnectionSet,
    LabeledGraph,
    bicoset_graph,
    cayley_graph,
    connection_set,
    double_cover,
    is_bipartite,
    is_connected,
    is_twin_free,
    make_bicoset_spec,
    to_adjacency_text,
    to_graph6,
    twin_classes,
    verify_bicoset_isomorphism,
)
from stabcover.groups import make_group
from stabcover.perms import as_perm
from stabcover.stability import b_group


def _random_graph(rng, n, p=0.5):
    rows = [0] * n
    for u in range(n):
        for v in range(u + 1, n):
            if rng.random() < p:
                rows[u] |= 1 << v
                rows[v] |= 1 << u
    return LabeledGraph(n, tuple(rows))


def test_labeled_graph_validation():
    with pytest.raises(DomainError):
        LabeledGraph(2, (0b10, 0b00))  # asymmetric
    with pytest.raises(DomainError):
        LabeledGraph(2, (0b100, 0b00))  # bit outside range
    g = LabeledGraph(2, (0b11, 0b01))
    assert g.has_loop(0) and not g.has_loop(1)
    assert g.degree(0) == 2


def test_relabel_is_isomorphism():
    rng = random.Random(5)
    for _ in range(20):
        n = rng.randint(1, 8)
        g = _random_graph(rng, n)
        perm = as_perm(rng.sample(range(n), n))
        h = g.relabel(perm)
        for u in range(n):
            for v in range(n):
                assert g.has_edge(u, v) == h.has_edge(perm[u], perm[v])


def test_connection_set_validation():
    C5 = make_group([5])
    with pytest.raises(DomainError):
        ConnectionSet(C5, 0b00010)  # {1} misses -1
    assert connection_set(C5, [1], symmetrize=True).mask == 0b10010
    with pytest.raises(DomainError):
        connection_set(C5, [7])


def test_cayley_graph_small():
    C5 = make_group([5])
    g = cayley_graph(C5, ConnectionSet(C5, 0b10010))
    # the pentagon
    assert g.rows == (0b10010, 0b00101, 0b01010, 0b10100, 0b01001)
    assert is_connected(g) and not is_bipartite(g) and is_twin_free(g)


def test_cayley_graph_loops_and_components():
    C6 = make_group([6])
    # {2, 4} generates the even subgroup: two disjoint triangles
    g = cayley_graph(C6, ConnectionSet(C6, 0b010100))
    assert not is_connected(g)
    # the identity in S puts a loop at every vertex
    g = cayley_graph(C6, ConnectionSet(C6, 0b000001))
    assert all(g.has_loop(v) for v in range(6))
    # {1, 5} on C6 is an even cycle
    g = cayley_graph(C6, ConnectionSet(C6, 0b100010))
    assert is_bipartite(g)


def _oracle_connected(g):
    if g.n == 0:
        return True
    seen = {0}
    stack = [0]
    while stack:
        v = stack.pop()
        for u in g.neighbors(v):
            if u not in seen:
                seen.add(u)
                stack.append(u)
    return len(seen) == g.n


def _oracle_bipartite(g):
    color = {}
    for s in range(g.n):
        if s in color:
            continue
        color[s] = 0
        queue = [s]
        while queue:
            v = queue.pop()
            if g.has_edge(v, v):
                return False
            for u in g.neighbors(v):
                if u not in color:
                    color[u] = 1 - color[v]
                    queue.append(u)
                elif color[u] == color[v]:
                    return False
    return True


def test_predicates_against_oracles():
    rng = random.Random(77)
    for _ in range(60):
        n = rng.randint(1, 9)
        g = _random_graph(rng, n, rng.choice([0.15, 0.3, 0.6]))
        assert is_connected(g) == _oracle_connected(g)
        assert is_bipartite(g) == _oracle_bipartite(g)


def test_twin_classes():
    C4 = make_group([4])
    g = cayley_graph(C4, ConnectionSet(C4, 0b1010))  # the 4-cycle
    assert twin_classes(g) == [[0, 2], [1, 3]]
    assert not is_twin_free(g)
    # the empty and the all-loops graphs
    assert not is_twin_free(cayley_graph(C4, ConnectionSet(C4, 0)))
    assert is_twin_free(cayley_graph(C4, ConnectionSet(C4, 0b0001)))


def test_double_cover_shapes():
    C5 = make_group([5])
    cover = double_cover(cayley_graph(C5, ConnectionSet(C5, 0b10010)))
    # the cover of an odd cycle is the double-length cycle
    assert cover.n == 10
    assert is_connected(cover) and is_bipartite(cover)
    assert all(cover.degree(v) == 2 for v in range(10))
    C4 = make_group([4])
    cover = double_cover(cayley_graph(C4, ConnectionSet(C4, 0b1010)))
    # the cover of a bipartite graph splits into two copies
    assert not is_connected(cover)
    # a loop becomes a cover edge between the two sheets
    C2 = make_group([2])
    cover = double_cover(cayley_graph(C2, ConnectionSet(C2, 0b01)))
    assert cover.has_edge(0, 2) and not cover.has_loop(0)


def test_bicoset_graph_by_hand():
    # X = Sym(3) on 3 points, H = K = <(0 1)>, D = H: the coset graph is
    # a perfect matching between equal cosets
    gens = [as_perm([1, 0, 2]), as_perm([1, 2, 0])]
    from stabcover.perms import PermutationGroup

    X = PermutationGroup(3, gens)
    elems = X.elements()
    H = frozenset([as_perm([0, 1, 2]), as_perm([1, 0, 2])])
    spec = make_bicoset_spec(elems, H, H, H)
    g = bicoset_graph(spec)
    assert g.n == 6
    assert all(g.degree(v) == 1 for v in range(6))


def test_bicoset_spec_rejects_partial_double_coset():
    from stabcover.perms import PermutationGroup

    gens = [as_perm([1, 0, 2]), as_perm([1, 2, 0])]
    X = PermutationGroup(3, gens)
    elems = X.elements()
    H = frozenset([as_perm([0, 1, 2]), as_perm([1, 0, 2])])
    with pytest.raises(DomainError):
        make_bicoset_spec(elems, H, H, frozenset([as_perm([1, 0, 2])]))


def test_verify_bicoset_isomorphism_pentagon():
    C5 = make_group([5])
    S = ConnectionSet(C5, 0b10010)
    assert verify_bicoset_isomorphism(C5, S, b_group(C5, S))


def test_to_adjacency_text():
    g = LabeledGraph(3, (0b010, 0b101, 0b010))
    assert to_adjacency_text(g) == "0: 1\n1: 0 2\n2: 1\n"


def _oracle_graph6(g):
    # independent re-implementation of the format for n <= 62
    out = [chr(g.n + 63)]
    bits = [g.has_edge(i, j) for j in range(g.n) for i in range(j)]
    while len(bits) % 6:
        bits.append(False)
    for k in range(0, len(bits), 6):
        val = 0
        for b in bits[k : k + 6]:
            val = val * 2 + int(b)
        out.append(chr(val + 63))
    return "".join(out)


def test_graph6_known_and_random():
    k3 = LabeledGraph(3, (0b110, 0b101, 0b011))
    assert to_graph6(k3) == "Bw"
    rng = random.Random(9)
    for _ in range(30):
        g = _random_graph(rng, rng.randint(0, 12))
        assert to_graph6(g) == _oracle_graph6(g)


def test_graph6_refuses_loops():
    g = LabeledGraph(1, (0b1,))
    with pytest.raises(DomainError):
        to_graph6(g)
