"""Stability classification of connection sets.

For an inverse-closed S in an abelian group G, the double cover of
Cay(G, S) always admits the translations, the inversion, and the
block swap. B(S) is the subgroup of the cover's automorphism group
stabilizing the + block; the classification hierarchy is:

  S1: Cay(G, S) connected, non-bipartite, twin-free;
  S2: S1 with B(S) exactly the translations extended by inversion;
  S3: S1 with the B(S)-normalizer of the translations strictly larger;
  S3': S fixed setwise by some holomorph element besides 1 and inversion;
  S4: some X <= B(S) has the translations maximal and self-normalizing;
  S5: some X <= B(S) whose translation-normalizer is the unique
      subgroup strictly between the translations and X.

Also implements the sigma statistics on cosets of a subgroup with
cyclic quotient, and the Psi coincidence census.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from functools import lru_cache

import math

from .autgrp import automorphism_group
from .errors import CapExceededError, DomainError
from .graphs import (
    ConnectionSet,
    LabeledGraph,
    cayley_graph,
    double_cover,
    is_bipartite,
    is_connected,
    is_twin_free,
)
from .groups import (
    AbelianGroup,
    HolomorphElement,
    Subgroup,
    c_value,
    close_subgroup,
    holomorph,
    inverse_closed_masks,
)
from .perms import DEFAULT_ENUM_CAP, PermutationGroup, as_perm, pad_table, pinv, pmul

DEFAULT_WORK_BUDGET = 5_000_000


class TriState(Enum):
    YES = "yes"
    NO = "no"
    INDETERMINATE = "indeterminate"

    def __bool__(self):  # guard against accidental truthiness
        raise TypeError("TriState is not a boolean; compare explicitly")


def _tri(flag: bool) -> TriState:
    return TriState.YES if flag else TriState.NO


# -- permutations realizing the always-present cover symmetries --------------


def base_translation_perm(G: AbelianGroup, g: int):
    return as_perm([G.add(v, g) for v in range(G.order)])


def base_inversion_perm(G: AbelianGroup):
    return as_perm([G.neg(v) for v in range(G.order)])


def cover_lift(perm):
    """Diagonal action on the 2n cover vertices of a permutation of n."""
    n = len(perm)
    return as_perm(list(perm) + [n + perm[v] for v in range(n)])


def cover_swap(n: int):
    return as_perm(list(range(n, 2 * n)) + list(range(n)))


@lru_cache(maxsize=64)
def _base_seeds_cached(G: AbelianGroup) -> tuple:
    gens = tuple(base_translation_perm(G, g) for g in G.generators())
    return gens + (base_inversion_perm(G),)


def base_seeds(G: AbelianGroup) -> list:
    return list(_base_seeds_cached(G))


@lru_cache(maxsize=64)
def _block_cover_seeds_cached(G: AbelianGroup) -> tuple:
    return tuple(cover_lift(p) for p in _base_seeds_cached(G))


def block_cover_seeds(G: AbelianGroup) -> list:
    return list(_block_cover_seeds_cached(G))


def full_cover_seeds(G: AbelianGroup) -> list:
    return block_cover_seeds(G) + [cover_swap(G.order)]


@lru_cache(maxsize=64)
def _cover_translations(G: AbelianGroup) -> tuple:
    """(generator lifts, all translation lifts, their frozenset, inversion lift)."""
    r_gens = tuple(cover_lift(base_translation_perm(G, g)) for g in G.generators())
    r_list = tuple(cover_lift(base_translation_perm(G, g)) for g in range(G.order))
    return r_gens, r_list, frozenset(r_list), cover_lift(base_inversion_perm(G))


def r_cover_elements(G: AbelianGroup) -> list:
    return list(_cover_translations(G)[1])


# -- B(S) --------------------------------------------------------------------


def b_group(G: AbelianGroup, S: ConnectionSet) -> PermutationGroup:
    """Setwise stabilizer of the + block in the cover's automorphism group.

    Computed as the color-respecting automorphism group of the cover with
    the two blocks colored apart: stabilizing the + block setwise forces
    the complement - block setwise, so this is exactly B(S).
    """
    n = G.order
    cover = double_cover(cayley_graph(G, S))
    B = automorphism_group(
        cover,
        fixed_blocks=[list(range(n))],
        known_automorphisms=block_cover_seeds(G),
    )
    for p in block_cover_seeds(G):
        if not B.contains(p):
            raise DomainError("translations or inversion missing from the block stabilizer")
    return B


# -- records -----------------------------------------------------------------


@dataclass(frozen=True)
class StabilityRecord:
    """Full classification verdict for one connection set."""

    set: ConnectionSet
    aut_order: int
    cover_aut_order: int
    b_order: int
    connected: bool
    bipartite: bool
    twin_free: bool
    stable: bool
    in_s1: bool
    in_s2: bool
    in_s3: TriState
    in_s3prime: bool
    in_s4: TriState
    in_s5: TriState
    exponent_two: bool
    trivial_instability_reasons: tuple[str, ...]

    CSV_COLUMNS = (
        "group",
        "set",
        "aut_order",
        "cover_aut_order",
        "b_order",
        "connected",
        "bipartite",
        "twin_free",
        "stable",
        "in_s1",
        "in_s2",
        "in_s3prime",
        "exponent_two",
        "reasons",
        "in_s3",
        "in_s4",
        "in_s5",
    )

    @property
    def group(self) -> str:
        return self.set.group.spec()

    @property
    def trivially_unstable(self) -> bool:
        return bool(self.trivial_instability_reasons)

    @property
    def nontrivially_unstable(self) -> bool:
        return not self.stable and not self.trivially_unstable

    def to_json_dict(self) -> dict:
        return {
            "group": self.group,
            "set": f"0x{self.set.mask:x}",
            "set_size": len(self.set),
            "aut_order": self.aut_order,
            "cover_aut_order": self.cover_aut_order,
            "b_order": self.b_order,
            "connected": self.connected,
            "bipartite": self.bipartite,
            "twin_free": self.twin_free,
            "stable": self.stable,
            "in_s1": self.in_s1,
            "in_s2": self.in_s2,
            "in_s3prime": self.in_s3prime,
            "exponent_two": self.exponent_two,
            "reasons": list(self.trivial_instability_reasons),
            "in_s3": self.in_s3.value,
            "in_s4": self.in_s4.value,
            "in_s5": self.in_s5.value,
        }

    def to_csv_row(self) -> list[str]:
        def b(x: bool) -> str:
            return "true" if x else "false"

        return [
            self.group,
            f"0x{self.set.mask:x}",
            str(self.aut_order),
            str(self.cover_aut_order),
            str(self.b_order),
            b(self.connected),
            b(self.bipartite),
            b(self.twin_free),
            b(self.stable),
            b(self.in_s1),
            b(self.in_s2),
            b(self.in_s3prime),
            b(self.exponent_two),
            ";".join(self.trivial_instability_reasons),
            self.in_s3.value,
            self.in_s4.value,
            self.in_s5.value,
        ]


# -- the classification pipeline ---------------------------------------------


def classify(
    G: AbelianGroup,
    S: ConnectionSet,
    enum_cap: int = DEFAULT_ENUM_CAP,
    work_budget: int = DEFAULT_WORK_BUDGET,
    hol_elements: list[HolomorphElement] | None = None,
) -> StabilityRecord:
    """Classify one connection set; caps yield indeterminate fields, not errors."""
    n = G.order
    gam = cayley_graph(G, S)
    connected = is_connected(gam)
    bipartite = is_bipartite(gam)
    twin_free = is_twin_free(gam)
    exponent_two = G.exponent <= 2
    target = n if exponent_two else 2 * n

    if connected and not bipartite:
        B = b_group(G, S)
        b_order = B.order
        # the cover is connected, its full group splits off the block swap
        cover_aut_order = 2 * b_order
        try:
            b_elems = B.elements(enum_cap)
        except CapExceededError:
            b_elems = None
        if b_elems is None:
            aut_order = automorphism_group(gam, known_automorphisms=base_seeds(G)).order
        else:
            # base automorphisms are exactly the diagonal elements of B
            aut_order = _diagonal_count(b_elems, n)
    else:
        # disconnected or bipartite graphs factor through one component
        B = None
        b_elems = None
        aut_order, cover_aut_order, b_order = factored_orders(G, S, gam)
    stable = cover_aut_order == 2 * aut_order

    reasons = []
    if not connected:
        reasons.append("disconnected")
    if bipartite and aut_order > 1:
        reasons.append("bipartite-with-nontrivial-aut")
    if not twin_free:
        reasons.append("twins")

    in_s1 = connected and not bipartite and twin_free
    in_s2 = in_s1 and b_order == target

    if not in_s1 or b_order == target:
        in_s3 = TriState.NO
    elif b_elems is None:
        in_s3 = TriState.INDETERMINATE
    else:
        r_gens, r_list, r_set, _ = _cover_translations(G)
        in_s3 = _tri(_r_normalizer_count(b_elems, r_gens, r_set, r_list) > target)

    in_s3prime = s3prime_membership(G, S, hol_elements)

    if B is None or not in_s1:
        in_s4, in_s5 = TriState.NO, TriState.NO
    else:
        in_s4, in_s5 = s4_s5_membership(G, S, B, enum_cap, work_budget, elems=b_elems)

    return StabilityRecord(
        set=S,
        aut_order=aut_order,
        cover_aut_order=cover_aut_order,
        b_order=b_order,
        connected=connected,
        bipartite=bipartite,
        twin_free=twin_free,
        stable=stable,
        in_s1=in_s1,
        in_s2=in_s2,
        in_s3=in_s3,
        in_s3prime=in_s3prime,
        in_s4=in_s4,
        in_s5=in_s5,
        exponent_two=exponent_two,
        trivial_instability_reasons=tuple(reasons),
    )


def factored_orders(G: AbelianGroup, S: ConnectionSet, gam: LabeledGraph) -> tuple[int, int, int]:
    """(|Aut|, |Aut of cover|, |B|) for a disconnected or bipartite Cayley graph.

    The components of Cay(G, S) are the cosets of H = <S>, all isomorphic
    to the component Gamma_H at the identity, so every order factors
    through Gamma_H:

      Gamma_H non-bipartite: the cover splits into m connected covers,
        one per coset, giving (2 b_H)^m m! cover automorphisms, of which
        b_H^m m! preserve the + block (each component map must send +
        part to + part).
      Gamma_H bipartite with parts Q0, Q1: each component's cover is two
        fresh copies of Gamma_H, one meeting the + block in Q0, the other
        in Q1. With a part-swapping automorphism all 2m copies mix and
        each copy map has a_H/2 choices; without one, the two families of
        m copies stay separate.
    """
    n = G.order
    h_mask = close_subgroup(G, S.members())
    members = []
    mm = h_mask
    while mm:
        low = mm & -mm
        members.append(low.bit_length() - 1)
        mm ^= low
    k = len(members)
    m = n // k
    pos = {g: i for i, g in enumerate(members)}
    rows = []
    for g in members:
        row = 0
        full = gam.rows[g]
        for h in members:
            if full >> h & 1:
                row |= 1 << pos[h]
        rows.append(row)
    comp = LabeledGraph(k, rows)
    seeds = [as_perm([pos[G.add(g, t)] for g in members]) for t in members]
    seeds.append(as_perm([pos[G.neg(g)] for g in members]))
    a_h = automorphism_group(comp, known_automorphisms=seeds).order
    fm = math.factorial(m)
    if not is_bipartite(comp):
        comp_cover = double_cover(comp)
        cover_seeds = [cover_lift(s) for s in seeds]
        b_h = automorphism_group(
            comp_cover,
            fixed_blocks=[list(range(k))],
            known_automorphisms=cover_seeds,
        ).order
        return a_h**m * fm, (2 * b_h) ** m * fm, b_h**m * fm
    q0 = _part_of_zero(comp, pos[0])
    part_seeds = [s for s in seeds if {s[v] for v in q0} == set(q0)]
    a_plus = automorphism_group(
        comp, fixed_blocks=[q0], known_automorphisms=part_seeds
    ).order
    aut_order = a_h**m * fm
    cover_aut_order = a_h ** (2 * m) * math.factorial(2 * m)
    if a_plus < a_h:
        b_order = a_plus ** (2 * m) * math.factorial(2 * m)
    else:
        b_order = a_h ** (2 * m) * fm**2
    return aut_order, cover_aut_order, b_order


def _part_of_zero(comp: LabeledGraph, v0: int) -> list[int]:
    """The bipartition class of v0 in a connected loop-free bipartite graph."""
    color = [-1] * comp.n
    color[v0] = 0
    stack = [v0]
    while stack:
        v = stack.pop()
        for u in comp.neighbors(v):
            if color[u] == -1:
                color[u] = 1 - color[v]
                stack.append(u)
    return [v for v in range(comp.n) if color[v] == 0]


_HOL_PREP_CACHE: tuple = (None, None)


def _prepared_hol(hol_elements) -> list[tuple]:
    """(twist table, translation) pairs, skipping identity and inversion.

    Keyed on the list object itself: census runs pass one holomorph list
    to every classify call, so the identity/inversion scan happens once.
    """
    global _HOL_PREP_CACHE
    if _HOL_PREP_CACHE[0] is not hol_elements:
        prep = [
            (a.twist.perm, a.translation)
            for a in hol_elements
            if not (a.is_identity() or a.is_inversion())
        ]
        _HOL_PREP_CACHE = (hol_elements, prep)
    return _HOL_PREP_CACHE[1]


def s3prime_membership(
    G: AbelianGroup,
    S: ConnectionSet | int,
    hol_elements: list[HolomorphElement] | None = None,
) -> bool:
    """True iff some holomorph element besides 1 and inversion fixes S setwise."""
    mask = S.mask if isinstance(S, ConnectionSet) else S
    if hol_elements is None:
        hol_elements = holomorph(G)
    members = []
    m = mask
    while m:
        low = m & -m
        members.append(low.bit_length() - 1)
        m ^= low
    add = G.add
    for tp, g in _prepared_hol(hol_elements):
        for s in members:
            if not mask >> tp[add(s, g)] & 1:
                break
        else:
            return True
    return False


# -- S4 / S5 -----------------------------------------------------------------


class _Budget:
    def __init__(self, limit: int):
        self.left = limit

    def spend(self, k: int) -> bool:
        self.left -= k
        return self.left >= 0


def _closure(gens, degree: int, budget: _Budget) -> frozenset | None:
    """Elements of the group generated, or None if the budget ran out."""
    ident = as_perm(range(degree))
    seen = {ident}
    frontier = [ident]
    cost = len(gens)
    if isinstance(ident, bytes):
        tabs = [pad_table(g) for g in gens]
        while frontier:
            nxt = []
            for x in frontier:
                if not budget.spend(cost):
                    return None
                for t in tabs:
                    y = x.translate(t)
                    if y not in seen:
                        seen.add(y)
                        nxt.append(y)
            frontier = nxt
        return frozenset(seen)
    while frontier:
        nxt = []
        for x in frontier:
            if not budget.spend(cost):
                return None
            for g in gens:
                y = pmul(x, g)
                if y not in seen:
                    seen.add(y)
                    nxt.append(y)
        frontier = nxt
    return frozenset(seen)


def _diagonal_count(elems, n: int) -> int:
    """Elements acting identically on both cover blocks."""
    cnt = 0
    if elems and isinstance(elems[0], bytes):
        # p is diagonal iff shifting its + half by n reproduces its - half
        shift = bytes(min(i + n, 255) for i in range(256))
        for p in elems:
            if p[:n].translate(shift) == p[n:]:
                cnt += 1
        return cnt
    for p in elems:
        for v in range(n):
            if p[n + v] != p[v] + n:
                break
        else:
            cnt += 1
    return cnt


def _r_normalizer_count(elems, r_gens, r_set: frozenset, r_list) -> int:
    """Size of the translation-normalizer within an enumerated group.

    Conjugation by a*d with a in the abelian translation group R equals
    conjugation by d on R, so the verdict is tested once per coset R d.
    """
    cnt = 0
    decided: set = set()
    bytes_mode = bool(r_list) and isinstance(r_list[0], bytes)
    if bytes_mode:
        t_tabs = [pad_table(t) for t in r_gens]
        r_tabs = [pad_table(a) for a in r_list]
    for d in elems:
        if d in decided:
            continue
        di = pinv(d)
        if bytes_mode:
            d_tab = pad_table(d)
            ok = all(di.translate(t).translate(d_tab) in r_set for t in t_tabs)
            decided.update(d.translate(at) for at in r_tabs)
        else:
            ok = all(pmul(pmul(di, t), d) in r_set for t in r_gens)
            decided.update(pmul(d, a) for a in r_list)
        if ok:
            cnt += len(r_list)
    return cnt


def s4_s5_membership(
    G: AbelianGroup,
    S: ConnectionSet,
    B: PermutationGroup,
    enum_cap: int = DEFAULT_ENUM_CAP,
    work_budget: int = DEFAULT_WORK_BUDGET,
    elems=None,
) -> tuple[TriState, TriState]:
    """Scan subgroups between the translations and B(S) for S4/S5 witnesses.

    Every witness X is generated over the translations R by a single
    element: for S4, R is maximal in X, so adjoining any element of X - R
    gives X; for S5, the unique-intermediate property forces the same.
    Hence adjoining each element of B (up to R-double-coset equivalence,
    which preserves both the generated subgroup and its verdict) covers
    all candidates, making the scan exact when it completes.
    """
    n = G.order
    degree = 2 * n
    if B.order == (n if G.exponent <= 2 else 2 * n):
        # B is the translations extended by inversion; the only candidate
        # X is B itself, whose translation-normalizer is all of X
        return TriState.NO, TriState.NO
    if elems is None:
        try:
            elems = B.elements(enum_cap)
        except CapExceededError:
            return TriState.INDETERMINATE, TriState.INDETERMINATE
    budget = _Budget(work_budget)
    r_gens, r_list, r_set, iota_p = _cover_translations(G)
    nor_set = frozenset(list(r_set) + [pmul(t, iota_p) for t in r_list])
    # one closure per R-double-coset of B - R; every candidate X is one
    # of these closures, and the classes meeting X are exactly those
    # whose representative lies in X
    incomplete = False
    seen = set(r_set)
    classes: list[tuple] = []
    bytes_mode = isinstance(iota_p, bytes)
    if bytes_mode:
        r_tabs = [pad_table(b2) for b2 in r_list]
        t_tabs = [pad_table(t) for t in r_gens]
    for c in elems:
        if c in seen:
            continue
        ci = pinv(c)
        # normalizing R is a class invariant: conjugating t by a*c*b with
        # a, b in the abelian R gives b^-1 (c^-1 t c) b, in R iff c^-1 t c is
        if bytes_mode:
            c_tab = pad_table(c)
            normalizes = all(ci.translate(t).translate(c_tab) in r_set for t in t_tabs)
            for a in r_list:
                ac = a.translate(c_tab)
                seen.update(ac.translate(bt) for bt in r_tabs)
        else:
            normalizes = all(pmul(pmul(ci, t), c) in r_set for t in r_gens)
            for a in r_list:
                ac = pmul(a, c)
                seen.update(pmul(ac, b2) for b2 in r_list)
        X = _closure(list(r_gens) + [c], degree, budget)
        if X is None:
            incomplete = True
            break
        classes.append((c, X, normalizes))
    found4 = found5 = False
    if not incomplete:
        for X in dict.fromkeys(cl for _, cl, _ in classes):
            if not budget.spend(len(classes)):
                incomplete = True
                break
            reps_in = [(cl, nm) for rep, cl, nm in classes if rep in X]
            # the normalizer of R in X is R plus the double cosets of the
            # normalizing class representatives lying in X
            nor_is_r = all(not nm for _, nm in reps_in)
            nor_is_nor = iota_p in X and all(
                cl == nor_set for cl, nm in reps_in if nm
            )
            all_x = all(cl == X for cl, _ in reps_in)
            all_in = all(cl == X or cl == nor_set for cl, _ in reps_in)
            found4 = found4 or (all_x and nor_is_r)
            # unique intermediate subgroup: any Y with R < Y < X is a
            # union of one-element closures, all of which must then equal
            # the normalizer, which itself has none strictly above R
            found5 = found5 or (
                nor_is_nor
                and nor_set != r_set
                and len(X) > len(nor_set)
                and all_in
            )
            if found4 and found5:
                break
    s4 = TriState.YES if found4 else (TriState.INDETERMINATE if incomplete else TriState.NO)
    s5 = TriState.YES if found5 else (TriState.INDETERMINATE if incomplete else TriState.NO)
    return s4, s5


# -- sigma statistics ---------------------------------------------------------


@dataclass(frozen=True)
class SigmaContext:
    """Cosets of a subgroup N with cyclic quotient of order b >= 2.

    gamma[i] is the least-index representative of the i-th power coset,
    so gamma[i] + gamma[j] always lies in the (i+j mod b)-th coset.
    """

    G: AbelianGroup
    N: Subgroup
    b: int
    gammas: tuple[int, ...]
    orbit_masks: tuple[int, ...]


def make_sigma_context(G: AbelianGroup, N: Subgroup) -> SigmaContext:
    if N.parent != G:
        raise DomainError("subgroup belongs to a different group")
    b = G.order // N.order
    if b < 2:
        raise DomainError("quotient must have order at least 2")
    gen = None
    for g in G.elements():
        k = 1
        x = g
        while not N.contains(x):
            x = G.add(x, g)
            k += 1
        if k == b:
            gen = g
            break
    if gen is None:
        raise DomainError("quotient is not cyclic")
    gammas = []
    masks = []
    cur = 0
    for _ in range(b):
        coset = G.translate_mask(N.mask, cur)
        gammas.append((coset & -coset).bit_length() - 1)
        masks.append(coset)
        cur = G.add(cur, gen)
    return SigmaContext(G, N, b, tuple(gammas), tuple(masks))


def coset_index(ctx: SigmaContext, x: int) -> int:
    for j, mask in enumerate(ctx.orbit_masks):
        if mask >> x & 1:
            return j
    raise DomainError("element outside the group")


def sigma(ctx: SigmaContext, S: ConnectionSet | int, u: int, j: int) -> int:
    """Bitmask of S intersected with S+u and the j-th coset."""
    if not 0 <= j < ctx.b:
        raise DomainError(f"coset index {j} out of range")
    mask = S.mask if isinstance(S, ConnectionSet) else S
    return mask & ctx.G.translate_mask(mask, u) & ctx.orbit_masks[j]


def psi_census(
    ctx: SigmaContext, i: int, u: int, v: int, cap: int = 1 << 22
) -> tuple[int, float]:
    """Count inverse-closed S whose sigma sizes at u and v agree off {0, i}.

    Returns (count, bound) with bound = 2^(c(G) - 2b/25 + 1); the bound can
    exceed the total number of sets at small b, in which case it is vacuous.
    """
    G = ctx.G
    if i % ctx.b == 0:
        raise DomainError("i must be nonzero mod b")
    if u == v:
        raise DomainError("u and v must be distinct")
    oi = ctx.orbit_masks[i % ctx.b]
    if not (oi >> u & 1 and oi >> v & 1):
        raise DomainError("u and v must lie in the i-th coset")
    js = [j for j in range(ctx.b) if j != 0 and j != i % ctx.b]
    count = 0
    for mask in inverse_closed_masks(G, cap):
        su = G.translate_mask(mask, u)
        sv = G.translate_mask(mask, v)
        for j in js:
            oj = ctx.orbit_masks[j]
            if (mask & su & oj).bit_count() != (mask & sv & oj).bit_count():
                break
        else:
            count += 1
    full = (1 << G.order) - 1
    bound = 2.0 ** (c_value(G, full) - 2 * ctx.b / 25 + 1)
    return count, bound
