"""Permutations on indexed points and permutation groups.

Permutations are stored as image arrays. For degree <= 255 the internal
representation is `bytes`, so products compile down to `bytes.translate`;
the public API accepts and returns tuples as well.

Groups carry a lazily-built base-and-strong-generating-set (Schreier-Sims)
giving order, membership, and bounded element enumeration. Base points are
picked deterministically (smallest moved point), so enumeration order is
reproducible for a fixed generator list.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import CapExceededError, DomainError

DEFAULT_ENUM_CAP = 20_000

Perm = bytes  # degree <= 256; tuples are used transparently above that


def as_perm(images, degree: int | None = None):
    """Validate and pack an image array."""
    n = len(images)
    if degree is not None and n != degree:
        raise DomainError(f"degree mismatch: got {n}, expected {degree}")
    if set(images) != set(range(n)):
        raise DomainError("images are not a bijection")
    if n <= 256:
        return bytes(images)
    return tuple(images)


_ID_CACHE: dict[int, Perm] = {}


def identity_perm(n: int):
    p = _ID_CACHE.get(n)
    if p is None:
        p = bytes(range(n)) if n <= 256 else tuple(range(n))
        _ID_CACHE[n] = p
    return p


_IDENT256 = bytes(range(256))
_TAILS = {256: b""}


def pad_table(q: bytes) -> bytes:
    """Full 256-entry translate table acting as q on its own points."""
    tail = _TAILS.get(len(q))
    if tail is None:
        tail = _TAILS.setdefault(len(q), _IDENT256[len(q):])
    return q + tail


def pmul(p, q):
    """Apply p first, then q: (x^(pq)) = (x^p)^q."""
    if isinstance(p, bytes):
        return p.translate(pad_table(q))
    return tuple(q[i] for i in p)


def pinv(p):
    out = [0] * len(p)
    for i, j in enumerate(p):
        out[j] = i
    return bytes(out) if isinstance(p, bytes) else tuple(out)


def conj(p, x):
    """p^x = x^-1 p x."""
    return pmul(pmul(pinv(x), p), x)


def perm_order(p: Perm) -> int:
    n = len(p)
    seen = [False] * n
    order = 1
    for i in range(n):
        if seen[i]:
            continue
        length = 0
        j = i
        while not seen[j]:
            seen[j] = True
            j = p[j]
            length += 1
        if length > 1:
            a, b = order, length
            while b:
                a, b = b, a % b
            order = order * length // a
    return order


@dataclass
class _Level:
    point: int
    gens: list[Perm]
    gen_tabs: list  # padded translate tables parallel to gens (bytes degree)
    orbit: dict[int, Perm]  # image -> transversal u with point^u = image
    orbit_inv: dict[int, Perm]  # image -> u^-1, cached for sifting
    orbit_inv_tab: dict  # image -> padded table of u^-1 (bytes degree)


class PermutationGroup:
    """Permutation group with a Schreier-Sims stabilizer chain."""

    def __init__(self, degree: int, generators):
        self.degree = degree
        self.generators: list[Perm] = []
        for g in generators:
            g = as_perm(g, degree)
            if g != identity_perm(degree) and g not in self.generators:
                self.generators.append(g)
        self._chain: list[_Level] | None = None
        self._order: int | None = None
        self._small = degree <= 256

    # -- chain construction -------------------------------------------------

    def _build(self) -> list[_Level]:
        if self._chain is None:
            self._chain = []
            for g in self.generators:
                self._incorporate(g, 0)
            order = 1
            for lvl in self._chain:
                order *= len(lvl.orbit)
            self._order = order
        return self._chain

    def _sift(self, g: Perm, start: int = 0) -> tuple[Perm, int]:
        chain = self._chain
        assert chain is not None
        if self._small:
            for i in range(start, len(chain)):
                lvl = chain[i]
                img = g[lvl.point]
                if img == lvl.point:
                    continue
                t = lvl.orbit_inv_tab.get(img)
                if t is None:
                    return g, i
                g = g.translate(t)
            return g, len(chain)
        for i in range(start, len(chain)):
            lvl = chain[i]
            img = g[lvl.point]
            if img == lvl.point:
                continue
            if img not in lvl.orbit:
                return g, i
            g = pmul(g, lvl.orbit_inv[img])
        return g, len(chain)

    def _incorporate(self, g: Perm, level: int) -> None:
        """Add g, known to fix the base points above `level`, as a strong generator.

        The residue after sifting fixes the base prefix up to its rest level j,
        so it qualifies as a strong generator for every level in [level, j];
        those levels are then re-closed deepest first.
        """
        h, j = self._sift(g, level)
        ident = identity_perm(self.degree)
        if h == ident:
            return
        chain = self._chain
        assert chain is not None
        if j == len(chain):
            point = min(p for p in range(self.degree) if h[p] != p)
            ident_tab = pad_table(ident) if self._small else ident
            chain.append(
                _Level(point, [], [], {point: ident}, {point: ident}, {point: ident_tab})
            )
        h_tab = pad_table(h) if self._small else h
        for m in range(level, j + 1):
            chain[m].gens.append(h)
            chain[m].gen_tabs.append(h_tab)
        for m in range(j, level - 1, -1):
            self._close_level(m)

    def _close_level(self, m: int) -> None:
        """Close the fundamental orbit at level m and sift its Schreier generators."""
        chain = self._chain
        assert chain is not None
        lvl = chain[m]
        small = self._small
        ident = identity_perm(self.degree)
        pts = list(lvl.orbit)
        i = 0
        while i < len(pts):
            pt = pts[i]
            i += 1
            u = lvl.orbit[pt]
            for s, st in zip(lvl.gens, lvl.gen_tabs):
                img = s[pt]
                v = u.translate(st) if small else pmul(u, s)
                if img not in lvl.orbit:
                    lvl.orbit[img] = v
                    vi = pinv(v)
                    lvl.orbit_inv[img] = vi
                    lvl.orbit_inv_tab[img] = pad_table(vi) if small else vi
                    pts.append(img)
                else:
                    schreier = (
                        v.translate(lvl.orbit_inv_tab[img])
                        if small
                        else pmul(v, lvl.orbit_inv[img])
                    )
                    if schreier != ident:
                        self._incorporate(schreier, m + 1)

    # -- queries ------------------------------------------------------------

    @property
    def order(self) -> int:
        self._build()
        assert self._order is not None
        return self._order

    def contains(self, p) -> bool:
        p = as_perm(p, self.degree)
        self._build()
        h, _ = self._sift(p)
        return h == identity_perm(self.degree)

    def is_subgroup(self, other: "PermutationGroup") -> bool:
        """True if other <= self."""
        return all(self.contains(g) for g in other.generators)

    def elements(self, cap: int = DEFAULT_ENUM_CAP) -> list[Perm]:
        """All elements via transversal products, each exactly once."""
        if self.order > cap:
            raise CapExceededError("group enumeration", self.order, cap)
        chain = self._build()
        out = [identity_perm(self.degree)]
        for lvl in reversed(chain):
            transversal = [lvl.orbit[pt] for pt in sorted(lvl.orbit)]
            out = [pmul(s, t) for t in transversal for s in out]
        return out

    def __len__(self) -> int:
        return self.order


def membership(Gp: PermutationGroup, p) -> bool:
    return Gp.contains(p)


def enumerate_elements(Gp: PermutationGroup, cap: int = DEFAULT_ENUM_CAP) -> list[Perm]:
    return Gp.elements(cap)


def normalizer_bounded(
    Gp: PermutationGroup, H: PermutationGroup, cap: int = DEFAULT_ENUM_CAP
) -> PermutationGroup:
    """{x in Gp : H^x = H}, by element filtering with generator-conjugation tests."""
    if Gp.degree != H.degree:
        raise DomainError("degree mismatch")
    if not Gp.is_subgroup(H):
        raise DomainError("H is not a subgroup of Gp")
    found = []
    for x in Gp.elements(cap):
        xi = pinv(x)
        if all(H.contains(pmul(pmul(xi, h), x)) for h in H.generators):
            found.append(x)
    return PermutationGroup(Gp.degree, found)


def core_bounded(
    Gp: PermutationGroup, H: PermutationGroup, cap: int = DEFAULT_ENUM_CAP
) -> PermutationGroup:
    """Largest normal subgroup of Gp contained in H.

    An element lies in the core iff its whole conjugation closure under the
    generators of Gp stays inside H; per-element BFS over that closure.
    """
    if Gp.degree != H.degree:
        raise DomainError("degree mismatch")
    if not Gp.is_subgroup(H):
        raise DomainError("H is not a subgroup of Gp")
    gen_pairs = [(pinv(g), g) for g in Gp.generators]
    core = []
    for h in H.elements(cap):
        seen = {h}
        frontier = [h]
        inside = True
        while frontier and inside:
            nxt = []
            for e in frontier:
                for gi, g in gen_pairs:
                    c = pmul(pmul(gi, e), g)
                    if c in seen:
                        continue
                    if not H.contains(c):
                        inside = False
                        break
                    seen.add(c)
                    nxt.append(c)
                if not inside:
                    break
            frontier = nxt
        if inside:
            core.append(h)
    return PermutationGroup(Gp.degree, core)


@dataclass(frozen=True)
class ActionTriple:
    """(domain, big group X, distinguished subgroup T) with T <= X."""

    domain_size: int
    big: PermutationGroup
    distinguished: PermutationGroup

    def __post_init__(self):
        if self.big.degree != self.domain_size or self.distinguished.degree != self.domain_size:
            raise DomainError("degree mismatch in triple")
        if not self.big.is_subgroup(self.distinguished):
            raise DomainError("distinguished subgroup is not contained in the big group")


def triples_equivalent(a: ActionTriple, b: ActionTriple, cap: int = 1_000_000) -> bool:
    """True iff some bijection conjugates (X1, T1) onto (X2, T2) simultaneously."""
    if a.domain_size != b.domain_size:
        return False
    if a.big.order != b.big.order or a.distinguished.order != b.distinguished.order:
        return False
    n = a.domain_size
    total = 1
    for k in range(2, n + 1):
        total *= k
    if total > cap:
        raise CapExceededError("triple equivalence search", total, cap)
    import itertools

    x1_gens = a.big.generators or [identity_perm(n)]
    t1_gens = a.distinguished.generators or [identity_perm(n)]
    for images in itertools.permutations(range(n)):
        phi = as_perm(images)
        phi_i = pinv(phi)
        if not all(b.big.contains(pmul(pmul(phi_i, g), phi)) for g in x1_gens):
            continue
        if not all(
            b.distinguished.contains(pmul(pmul(phi_i, g), phi)) for g in t1_gens
        ):
            continue
        return True
    return False


def build_group(degree: int, generators) -> PermutationGroup:
    return PermutationGroup(degree, generators)
