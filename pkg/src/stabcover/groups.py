"""Finite abelian groups in invariant-factor form.

Groups are additive. Elements are identified with indices 0..r-1,
lexicographic on coordinate tuples, so index 0 is the identity. Subsets of
the group are passed around as integer bitmasks over element indices.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from functools import reduce

from .errors import CapExceededError, DomainError

DEFAULT_GROUP_CAP = 512


def _prime_factorization(n: int) -> dict[int, int]:
    out: dict[int, int] = {}
    d = 2
    while d * d <= n:
        while n % d == 0:
            out[d] = out.get(d, 0) + 1
            n //= d
        d += 1
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def normalize_invariant_factors(factors: list[int] | tuple[int, ...]) -> tuple[int, ...]:
    """Reduce an arbitrary list of cyclic factors to the invariant-factor chain.

    Elementary-divisor merging: split every factor into prime powers, then
    recombine taking the largest power of each prime into the last invariant
    factor, the second largest into the one before, and so on.
    """
    for d in factors:
        if d <= 0:
            raise DomainError(f"cyclic factor must be positive, got {d}")
    by_prime: dict[int, list[int]] = {}
    for d in factors:
        if d == 1:
            continue
        for p, e in _prime_factorization(d).items():
            by_prime.setdefault(p, []).append(e)
    if not by_prime:
        return ()
    for exps in by_prime.values():
        exps.sort(reverse=True)
    depth = max(len(v) for v in by_prime.values())
    chain = []
    for i in range(depth):
        d = 1
        for p, exps in by_prime.items():
            if i < len(exps):
                d *= p ** exps[i]
        chain.append(d)
    chain.reverse()
    return tuple(chain)


@dataclass(frozen=True)
class AbelianGroup:
    """An abelian group ``C_{d1} x ... x C_{dk}`` with ``d_i | d_{i+1}``.

    Instances are immutable; all lookup tables are built on construction.
    Use :func:`make_group` rather than the constructor so arbitrary factor
    lists get normalized first.
    """

    invariant_factors: tuple[int, ...]
    _coords: tuple[tuple[int, ...], ...] = field(repr=False, compare=False, default=())
    _neg: tuple[int, ...] = field(repr=False, compare=False, default=())
    _sum: list | None = field(repr=False, compare=False, default=None)

    def __post_init__(self):
        facs = self.invariant_factors
        for a, b in zip(facs, facs[1:]):
            if b % a != 0:
                raise DomainError(f"not a divisibility chain: {facs}")
        coords = tuple(itertools.product(*[range(d) for d in facs])) if facs else ((),)
        object.__setattr__(self, "_coords", coords)
        neg = tuple(self.index(tuple((-c) % d for c, d in zip(t, facs))) for t in coords)
        object.__setattr__(self, "_neg", neg)

    @property
    def order(self) -> int:
        return len(self._coords)

    @property
    def exponent(self) -> int:
        return self.invariant_factors[-1] if self.invariant_factors else 1

    @property
    def rank(self) -> int:
        return len(self.invariant_factors)

    def coords(self, i: int) -> tuple[int, ...]:
        return self._coords[i]

    def index(self, coords: tuple[int, ...]) -> int:
        idx = 0
        for c, d in zip(coords, self.invariant_factors):
            idx = idx * d + (c % d)
        return idx

    def add(self, i: int, j: int) -> int:
        tab = self._sum
        if tab is None:
            if self.order > 1024:
                a, b = self._coords[i], self._coords[j]
                return self.index(tuple(x + y for x, y in zip(a, b)))
            # small groups get a lazily built full addition table
            idx, coords = self.index, self._coords
            tab = [
                [idx(tuple(x + y for x, y in zip(a, b))) for b in coords]
                for a in coords
            ]
            object.__setattr__(self, "_sum", tab)
        return tab[i][j]

    def neg(self, i: int) -> int:
        return self._neg[i]

    def sub(self, i: int, j: int) -> int:
        return self.add(i, self._neg[j])

    def scalar_mul(self, k: int, i: int) -> int:
        return self.index(tuple(k * c for c in self._coords[i]))

    def element_order(self, i: int) -> int:
        if i == 0:
            return 1
        order = 1
        x = i
        while x != 0:
            x = self.add(x, i)
            order += 1
        return order

    def generators(self) -> tuple[int, ...]:
        """One canonical generator per invariant factor (the unit vectors)."""
        k = self.rank
        gens = []
        for pos in range(k):
            t = tuple(1 if j == pos else 0 for j in range(k))
            gens.append(self.index(t))
        return tuple(gens)

    def elements(self) -> range:
        return range(self.order)

    def translate_mask(self, mask: int, t: int) -> int:
        """Image of a subset under x -> x + t."""
        out = 0
        m = mask
        while m:
            low = m & -m
            out |= 1 << self.add(low.bit_length() - 1, t)
            m ^= low
        return out

    def neg_mask(self, mask: int) -> int:
        out = 0
        m = mask
        while m:
            low = m & -m
            out |= 1 << self._neg[low.bit_length() - 1]
            m ^= low
        return out

    def spec(self) -> str:
        if not self.invariant_factors:
            return "C1"
        return "x".join(f"C{d}" for d in self.invariant_factors)

    def __str__(self) -> str:
        return self.spec()


def make_group(invariant_factors: list[int] | tuple[int, ...]) -> AbelianGroup:
    """Build an abelian group from any list of cyclic factors."""
    return AbelianGroup(normalize_invariant_factors(invariant_factors))


_SPEC_RE = re.compile(r"^c(\d+)$", re.IGNORECASE)


def parse_group_spec(spec: str) -> AbelianGroup:
    """Parse the ``C<n>`` / ``C<n>xC<m>`` grammar (case-insensitive)."""
    parts = spec.strip().split("x")
    factors = []
    for part in parts:
        m = _SPEC_RE.match(part.strip())
        if not m:
            raise DomainError(f"bad group spec {spec!r}: cannot parse {part!r}")
        factors.append(int(m.group(1)))
    return make_group(factors)


def _partitions(n: int, largest: int | None = None):
    """All descending partitions of n."""
    if n == 0:
        yield ()
        return
    top = n if largest is None else min(n, largest)
    for k in range(top, 0, -1):
        for rest in _partitions(n - k, k):
            yield (k,) + rest


def all_abelian_groups(max_order: int) -> list[AbelianGroup]:
    """One group per isomorphism type, every order from 1 to max_order.

    For each prime power p^e in the order, an abelian group picks a
    partition of e; the groups of order n are all combinations of such
    picks across the primes dividing n.
    """
    if max_order < 1:
        raise DomainError("max_order must be at least 1")
    out = []
    for n in range(1, max_order + 1):
        choices = [
            [tuple(p**part for part in parts) for parts in _partitions(e)]
            for p, e in sorted(_prime_factorization(n).items())
        ]
        for combo in itertools.product(*choices):
            out.append(make_group([q for block in combo for q in block]))
    return out


def involution_set(G: AbelianGroup) -> int:
    """Bitmask of all x with 2x = 0, identity included."""
    mask = 0
    for i in G.elements():
        if G.add(i, i) == 0:
            mask |= 1 << i
    return mask


def is_inverse_closed(G: AbelianGroup, mask: int) -> bool:
    return G.neg_mask(mask) == mask


def c_value(G: AbelianGroup, mask: int) -> int:
    """(|T| + |I(T)|) / 2 for an inverse-closed subset T."""
    if not is_inverse_closed(G, mask):
        raise DomainError("subset is not inverse-closed")
    inv = involution_set(G) & mask
    total = mask.bit_count() + inv.bit_count()
    return total // 2


def count_inverse_closed(G: AbelianGroup) -> int:
    """2^{c(G)}, the number of inverse-closed subsets of G."""
    full = (1 << G.order) - 1
    return 1 << c_value(G, full)


def negation_orbits(G: AbelianGroup) -> list[tuple[int, ...]]:
    """Orbits of x -> -x on G: singletons for involutions (and 0), else pairs.

    Ordered by smallest member; their count is c(G).
    """
    orbits = []
    seen = 0
    for x in G.elements():
        if seen >> x & 1:
            continue
        y = G.neg(x)
        orbits.append((x,) if y == x else (x, y))
        seen |= (1 << x) | (1 << y)
    return orbits


def inverse_closed_masks(G: AbelianGroup, cap: int = 1 << 30):
    """All inverse-closed subsets as bitmasks, exactly once, in a fixed order.

    Subsets correspond to independent binary choices over negation orbits;
    bit k of the counter selects the k-th orbit.
    """
    orbits = negation_orbits(G)
    total = 1 << len(orbits)
    if total > cap:
        raise CapExceededError("inverse-closed enumeration", total, cap)
    orbit_masks = [sum(1 << x for x in orb) for orb in orbits]
    for idx in range(total):
        mask = 0
        bits = idx
        while bits:
            low = bits & -bits
            mask |= orbit_masks[low.bit_length() - 1]
            bits ^= low
        yield mask


@dataclass(frozen=True)
class Subgroup:
    parent: AbelianGroup
    mask: int
    generators: tuple[int, ...]

    @property
    def order(self) -> int:
        return self.mask.bit_count()

    def members(self) -> list[int]:
        return _mask_to_list(self.mask)

    def contains(self, i: int) -> bool:
        return bool(self.mask >> i & 1)


def _mask_to_list(mask: int) -> list[int]:
    out = []
    m = mask
    while m:
        low = m & -m
        out.append(low.bit_length() - 1)
        m ^= low
    return out


def close_subgroup(G: AbelianGroup, gens: list[int] | tuple[int, ...]) -> int:
    """Bitmask of the subgroup generated by the given elements."""
    mask = 1
    frontier = [0]
    while frontier:
        nxt = []
        for x in frontier:
            for g in gens:
                y = G.add(x, g)
                if not (mask >> y & 1):
                    mask |= 1 << y
                    nxt.append(y)
        frontier = nxt
    return mask


def subgroups(G: AbelianGroup, cap: int = DEFAULT_GROUP_CAP) -> list[Subgroup]:
    """All subgroups of G, each exactly once.

    Closure-adjoin BFS: repeatedly extend known subgroups by one element.
    """
    if G.order > cap:
        raise CapExceededError("subgroup enumeration", G.order, cap)
    seen: dict[int, tuple[int, ...]] = {1: ()}
    frontier = [(1, ())]
    while frontier:
        nxt = []
        for mask, gens in frontier:
            for x in G.elements():
                if mask >> x & 1:
                    continue
                new_gens = gens + (x,)
                new_mask = close_subgroup(G, new_gens)
                if new_mask not in seen:
                    seen[new_mask] = new_gens
                    nxt.append((new_mask, new_gens))
        frontier = nxt
    out = [Subgroup(G, m, g) for m, g in seen.items()]
    out.sort(key=lambda s: (s.order, s.mask))
    return out


@dataclass(frozen=True)
class GroupAutomorphism:
    """An automorphism of G, stored as images of the canonical generators."""

    parent: AbelianGroup
    images: tuple[int, ...]
    perm: tuple[int, ...] = field(compare=False, repr=False, default=())

    def __post_init__(self):
        G = self.parent
        perm = tuple(self.apply_raw(i) for i in G.elements())
        if len(set(perm)) != G.order:
            raise DomainError("generator images do not define a bijection")
        object.__setattr__(self, "perm", perm)

    def apply_raw(self, i: int) -> int:
        G = self.parent
        out = 0
        for c, img in zip(G.coords(i), self.images):
            out = G.add(out, G.scalar_mul(c, img))
        return out

    def apply(self, i: int) -> int:
        return self.perm[i]

    def is_identity(self) -> bool:
        return self.images == self.parent.generators()

    def compose(self, other: "GroupAutomorphism") -> "GroupAutomorphism":
        """Automorphism applying self first, then other."""
        return GroupAutomorphism(self.parent, tuple(other.perm[i] for i in self.images))

    def inverse(self) -> "GroupAutomorphism":
        inv = [0] * self.parent.order
        for i, j in enumerate(self.perm):
            inv[j] = i
        return GroupAutomorphism(self.parent, tuple(inv[g] for g in self.parent.generators()))

    def apply_mask(self, mask: int) -> int:
        out = 0
        m = mask
        while m:
            low = m & -m
            out |= 1 << self.perm[low.bit_length() - 1]
            m ^= low
        return out


def automorphism_group_of_G(G: AbelianGroup, cap: int = DEFAULT_GROUP_CAP) -> list[GroupAutomorphism]:
    """All automorphisms of G, by brute force over candidate generator images.

    The image of the i-th canonical generator must have order dividing d_i;
    every such tuple of candidates is tested for bijectivity.
    """
    if G.order > cap:
        raise CapExceededError("automorphism enumeration", G.order, cap)
    if G.rank == 0:
        return [GroupAutomorphism(G, ())]
    candidates = []
    for d in G.invariant_factors:
        candidates.append([x for x in G.elements() if G.scalar_mul(d, x) == 0])
    out = []
    for images in itertools.product(*candidates):
        try:
            out.append(GroupAutomorphism(G, images))
        except DomainError:
            continue
    return out


@dataclass(frozen=True)
class HolomorphElement:
    """An element R(g)*tau of Hol(G), acting as x -> tau(x + g)."""

    parent: AbelianGroup
    translation: int
    twist: GroupAutomorphism

    def apply(self, x: int) -> int:
        G = self.parent
        return self.twist.perm[G.add(x, self.translation)]

    def perm(self) -> tuple[int, ...]:
        return tuple(self.apply(x) for x in self.parent.elements())

    def apply_mask(self, mask: int) -> int:
        out = 0
        m = mask
        while m:
            low = m & -m
            out |= 1 << self.apply(low.bit_length() - 1)
            m ^= low
        return out

    def is_identity(self) -> bool:
        return self.translation == 0 and self.twist.is_identity()

    def is_inversion(self) -> bool:
        return self.translation == 0 and all(
            self.twist.perm[x] == self.parent.neg(x) for x in self.parent.elements()
        )

    def compose(self, other: "HolomorphElement") -> "HolomorphElement":
        """Holomorph element applying self first, then other.

        other(self(x)) = t2(t1(x + g1) + g2) = (t2 t1)(x + g1 + t1^{-1}(g2)),
        so the normalized pair is (g1 + t1^{-1}(g2), t2 o t1).
        """
        G = self.parent
        t1_inv = self.twist.inverse()
        g = G.add(self.translation, t1_inv.perm[other.translation])
        return HolomorphElement(G, g, self.twist.compose(other.twist))


def inversion_automorphism(G: AbelianGroup) -> GroupAutomorphism:
    """The map x -> -x as a GroupAutomorphism."""
    return GroupAutomorphism(G, tuple(G.neg(g) for g in G.generators()))


def holomorph(G: AbelianGroup, cap: int = DEFAULT_GROUP_CAP * 64) -> list[HolomorphElement]:
    """All elements of Hol(G) = R(G) x| Aut(G), as (translation, twist) pairs."""
    auts = automorphism_group_of_G(G)
    size = G.order * len(auts)
    if size > cap:
        raise CapExceededError("holomorph enumeration", size, cap)
    return [HolomorphElement(G, g, tau) for tau in auts for g in G.elements()]


def fixed_points(G: AbelianGroup, alpha: HolomorphElement) -> int:
    """Bitmask of {x : alpha(x) = x}."""
    mask = 0
    for x in G.elements():
        if alpha.apply(x) == x:
            mask |= 1 << x
    return mask
