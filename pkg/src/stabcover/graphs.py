"""Loop-permitting undirected graphs on indexed vertices.

Adjacency is stored as one bit-vector per vertex; a loop is the diagonal
bit. Includes Cayley graph construction, the standard double cover
(direct product with a single edge), structural predicates, bi-coset
graphs, and text/graph6 export.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import CapExceededError, DomainError
from .groups import AbelianGroup, is_inverse_closed
from .perms import DEFAULT_ENUM_CAP, PermutationGroup, identity_perm, pinv, pmul


@dataclass(frozen=True)
class LabeledGraph:
    """Undirected graph with loops permitted (diagonal bit of a row)."""

    n: int
    rows: tuple[int, ...]

    def __post_init__(self):
        if len(self.rows) != self.n:
            raise DomainError("row count does not match vertex count")
        mask = (1 << self.n) - 1
        for v, row in enumerate(self.rows):
            if row & ~mask:
                raise DomainError(f"row {v} has bits outside the vertex range")
        for v in range(self.n):
            for u in _bits(self.rows[v]):
                if not (self.rows[u] >> v) & 1:
                    raise DomainError(f"adjacency not symmetric at ({v}, {u})")

    def has_edge(self, u: int, v: int) -> bool:
        return bool((self.rows[u] >> v) & 1)

    def has_loop(self, v: int) -> bool:
        return bool((self.rows[v] >> v) & 1)

    def degree(self, v: int) -> int:
        """Neighbour count; a loop contributes once."""
        return self.rows[v].bit_count()

    def neighbors(self, v: int) -> list[int]:
        return _bits(self.rows[v])

    def relabel(self, perm) -> "LabeledGraph":
        """Graph with vertex v renamed to perm[v]."""
        new_rows = [0] * self.n
        for v, row in enumerate(self.rows):
            img = 0
            for u in _bits(row):
                img |= 1 << perm[u]
            new_rows[perm[v]] = img
        return LabeledGraph(self.n, tuple(new_rows))


def _bits(mask: int) -> list[int]:
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return out


@dataclass(frozen=True)
class ConnectionSet:
    """An inverse-closed subset of an abelian group, as a bit-vector.

    The identity is allowed as a member; it produces loops.
    """

    group: AbelianGroup
    mask: int

    def __post_init__(self):
        if self.mask < 0 or self.mask >> self.group.order:
            raise DomainError("connection set bits outside the group")
        if not is_inverse_closed(self.group, self.mask):
            raise DomainError("connection set is not inverse-closed")

    def members(self) -> list[int]:
        return _bits(self.mask)

    def __len__(self) -> int:
        return self.mask.bit_count()


def connection_set(G: AbelianGroup, elements, symmetrize: bool = False) -> ConnectionSet:
    """Build a connection set from element indices.

    With symmetrize=True the negatives of the given elements are added;
    otherwise the set must already be inverse-closed.
    """
    mask = 0
    for e in elements:
        if not 0 <= e < G.order:
            raise DomainError(f"element index {e} outside the group")
        mask |= 1 << e
    if symmetrize:
        mask |= G.neg_mask(mask)
    return ConnectionSet(G, mask)


def cayley_graph(G: AbelianGroup, S: ConnectionSet) -> LabeledGraph:
    """Vertices are group elements; i ~ j iff element(j) - element(i) is in S."""
    if S.group is not G and S.group != G:
        raise DomainError("connection set belongs to a different group")
    rows = tuple(G.translate_mask(S.mask, i) for i in range(G.order))
    return LabeledGraph(G.order, rows)


def double_cover(g: LabeledGraph) -> LabeledGraph:
    """Direct product with a single edge: vertices v+ (index v) and v- (index n+v).

    u+ ~ v- iff u ~ v in the base graph; no edges inside a block. A loop at v
    becomes the edge v+ ~ v-.
    """
    n = g.n
    rows = [g.rows[v] << n for v in range(n)] + [g.rows[v] for v in range(n)]
    return LabeledGraph(2 * n, tuple(rows))


def is_connected(g: LabeledGraph) -> bool:
    if g.n == 0:
        return True
    seen = 1
    frontier = 1
    while frontier:
        nxt = 0
        for v in _bits(frontier):
            nxt |= g.rows[v]
        frontier = nxt & ~seen
        seen |= frontier
    return seen == (1 << g.n) - 1


def is_bipartite(g: LabeledGraph) -> bool:
    """Two-colorability; any loop is an odd closed walk, so loops refuse."""
    if any(g.has_loop(v) for v in range(g.n)):
        return False
    color = [-1] * g.n
    for start in range(g.n):
        if color[start] != -1:
            continue
        color[start] = 0
        stack = [start]
        while stack:
            v = stack.pop()
            for u in _bits(g.rows[v]):
                if color[u] == -1:
                    color[u] = 1 - color[v]
                    stack.append(u)
                elif color[u] == color[v]:
                    return False
    return True


def twin_classes(g: LabeledGraph) -> list[list[int]]:
    """Classes of vertices with identical adjacency rows (loop included)."""
    by_row: dict[int, list[int]] = {}
    for v in range(g.n):
        by_row.setdefault(g.rows[v], []).append(v)
    return sorted(by_row.values())


def is_twin_free(g: LabeledGraph) -> bool:
    return all(len(c) == 1 for c in twin_classes(g))


# -- bi-coset graphs ---------------------------------------------------------


@dataclass(frozen=True)
class BiCosetSpec:
    """A finite permutation group X with subgroups H, K and a subset D of X.

    All four are given as explicit element collections (image arrays).
    D must be a union of (K, H) double cosets: KdH = D for every d in D.
    """

    elements: tuple
    h_elements: frozenset
    k_elements: frozenset
    d_elements: frozenset

    def __post_init__(self):
        elems = set(self.elements)
        if not (self.h_elements <= elems and self.k_elements <= elems):
            raise DomainError("H or K is not contained in X")
        if not self.d_elements <= elems:
            raise DomainError("D is not contained in X")
        # closure of D under left K and right H generators gives K D H = D:
        # generator multiplication permutes the finite set D, so closure
        # under a generating set is closure under the whole subgroup
        k_gens = _small_generators(self.k_elements)
        h_gens = _small_generators(self.h_elements)
        for d in self.d_elements:
            for k in k_gens:
                if pmul(k, d) not in self.d_elements:
                    raise DomainError("D is not a union of (K, H) double cosets")
            for h in h_gens:
                if pmul(d, h) not in self.d_elements:
                    raise DomainError("D is not a union of (K, H) double cosets")


def _small_generators(sub: frozenset) -> list:
    """A generating set of logarithmic size for a subgroup given as a set."""
    gens: list = []
    closure: set = set()
    for x in sub:
        if not closure:
            closure = {identity_perm(len(x))}
        if x in closure:
            continue
        gens.append(x)
        frontier = list(closure)
        while frontier:
            nxt = []
            for y in frontier:
                for g in gens:
                    z = pmul(y, g)
                    if z not in closure:
                        closure.add(z)
                        nxt.append(z)
            frontier = nxt
    return gens


def make_bicoset_spec(x_elements, h_elements, k_elements, d_elements) -> BiCosetSpec:
    return BiCosetSpec(
        tuple(x_elements),
        frozenset(h_elements),
        frozenset(k_elements),
        frozenset(d_elements),
    )


def _right_cosets(elements, sub: frozenset) -> list[list]:
    """Right cosets {subgroup * x}, ordered by smallest member index in `elements`."""
    index = {x: i for i, x in enumerate(elements)}
    seen = set()
    cosets = []
    for x in elements:
        if x in seen:
            continue
        coset = sorted((pmul(h, x) for h in sub), key=index.__getitem__)
        seen.update(coset)
        cosets.append(coset)
    cosets.sort(key=lambda c: index[c[0]])
    return cosets


def bicoset_graph(spec: BiCosetSpec) -> LabeledGraph:
    """Bipartite graph on right H-cosets then right K-cosets.

    Hx is adjacent to Ky iff y x^(-1) is in D.
    """
    h_cosets = _right_cosets(spec.elements, spec.h_elements)
    k_cosets = _right_cosets(spec.elements, spec.k_elements)
    nh, nk = len(h_cosets), len(k_cosets)
    n = nh + nk
    rows = [0] * n
    for a, hc in enumerate(h_cosets):
        x = hc[0]
        xi = pinv(x)
        for b, kc in enumerate(k_cosets):
            if pmul(kc[0], xi) in spec.d_elements:
                rows[a] |= 1 << (nh + b)
                rows[nh + b] |= 1 << a
    return LabeledGraph(n, tuple(rows))


def verify_bicoset_isomorphism(
    G: AbelianGroup,
    S: ConnectionSet,
    X: PermutationGroup,
    cap: int = DEFAULT_ENUM_CAP,
) -> bool:
    """Check the explicit bi-coset model of a double cover.

    X must act on the 2n cover vertices with orbits exactly the + and -
    blocks. With H and K the stabilizers of 0+ and 0-, and Y the set of
    x in X sending 0- into the neighbourhood of 0+, the map sending
    (0+)^x to Hx and (0-)^x to Kx must be a graph isomorphism from the
    cover onto the bi-coset graph of (X, H, K, Y). Also checks the
    inversion symmetry: K R(g) H inside Y iff K R(-g) H inside Y.
    """
    n = G.order
    if X.degree != 2 * n:
        raise DomainError("X does not act on the cover vertex set")
    cover = double_cover(cayley_graph(G, S))
    elems = X.elements(cap)
    plus = frozenset(range(n))
    if {x[0] for x in elems} != plus or {x[n] for x in elems} != frozenset(
        range(n, 2 * n)
    ):
        raise DomainError("X orbits are not the two cover blocks")
    h_sub = frozenset(x for x in elems if x[0] == 0)
    k_sub = frozenset(x for x in elems if x[n] == n)
    nbhd0 = cover.rows[0]
    y_sub = frozenset(x for x in elems if (nbhd0 >> x[n]) & 1)
    spec = make_bicoset_spec(elems, h_sub, k_sub, y_sub)
    model = bicoset_graph(spec)
    if model.n != 2 * n:
        return False

    index = {x: i for i, x in enumerate(elems)}
    h_cosets = _right_cosets(elems, h_sub)
    k_cosets = _right_cosets(elems, k_sub)
    h_coset_of = {x: a for a, c in enumerate(h_cosets) for x in c}
    k_coset_of = {x: b for b, c in enumerate(k_cosets) for x in c}
    phi = [-1] * (2 * n)
    for x in elems:
        phi[x[0]] = h_coset_of[x]
        phi[x[n]] = len(h_cosets) + k_coset_of[x]
    if sorted(phi) != list(range(2 * n)):
        return False
    for u in range(2 * n):
        for v in range(2 * n):
            if cover.has_edge(u, v) != model.has_edge(phi[u], phi[v]):
                return False

    # inversion symmetry of Y on translation double cosets
    for g in range(n):
        if _translation_double_coset_in(G, g, k_sub, h_sub, y_sub) != (
            _translation_double_coset_in(G, G.neg(g), k_sub, h_sub, y_sub)
        ):
            return False
    return True


def _translation_double_coset_in(G, g, k_sub, h_sub, y_sub) -> bool:
    """Whether the double coset K R(g) H lies inside Y.

    Y is only passed here after the spec validated it as a union of
    (K, H) double cosets, so one representative decides membership.
    """
    n = G.order
    r = tuple(G.add(v, g) for v in range(n))
    rg = bytes(r + tuple(n + v for v in r)) if 2 * n <= 256 else r + tuple(
        n + v for v in r
    )
    return rg in y_sub


# -- export ------------------------------------------------------------------


def to_adjacency_text(g: LabeledGraph) -> str:
    """One line per vertex: `v: n1 n2 ...`."""
    lines = []
    for v in range(g.n):
        lines.append(f"{v}: " + " ".join(str(u) for u in _bits(g.rows[v])))
    return "\n".join(lines) + "\n"


def to_graph6(g: LabeledGraph) -> str:
    """Standard graph6 encoding. Loops are outside the format and refuse."""
    if any(g.has_loop(v) for v in range(g.n)):
        raise DomainError("graph6 cannot encode loops")
    n = g.n
    if n <= 62:
        head = chr(n + 63)
    elif n <= 258047:
        head = chr(126) + "".join(chr(((n >> s) & 63) + 63) for s in (12, 6, 0))
    else:
        raise CapExceededError("graph6 vertex count", n, 258047)
    bits = []
    for j in range(n):
        for i in range(j):
            bits.append((g.rows[i] >> j) & 1)
    while len(bits) % 6:
        bits.append(0)
    body = "".join(
        chr(63 + (bits[k] << 5 | bits[k + 1] << 4 | bits[k + 2] << 3
                  | bits[k + 3] << 2 | bits[k + 4] << 1 | bits[k + 5]))
        for k in range(0, len(bits), 6)
    )
    return head + body
