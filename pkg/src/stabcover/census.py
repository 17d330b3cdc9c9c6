"""Exhaustive and Monte-Carlo censuses over inverse-closed connection sets.

A census classifies every (or a sampled family of) inverse-closed subset
of a group and tallies the classification buckets. Sharding is over a
fixed number of index ranges, so merged results are identical for any
worker count.
"""

from __future__ import annotations

import math
import random
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

from .autgrp import canonical_form
from .errors import CapExceededError, DomainError, StabcoverError
from .graphs import ConnectionSet, cayley_graph
from .groups import (
    AbelianGroup,
    automorphism_group_of_G,
    count_inverse_closed,
    holomorph,
    inverse_closed_masks,
    involution_set,
    make_group,
    negation_orbits,
)
from .perms import DEFAULT_ENUM_CAP
from .stability import DEFAULT_WORK_BUDGET, StabilityRecord, TriState, classify

FIXED_SHARD_COUNT = 32
DEFAULT_SET_CAP = 1 << 30

BUCKETS = (
    "disconnected",
    "connected-bipartite",
    "not-twin-free",
    "s1",
    "s2",
    "s3",
    "s3prime",
    "s4",
    "s5",
    "stable",
    "trivially-unstable",
    "nontrivially-unstable",
    "indeterminate",
)


def iterate_inverse_closed(G: AbelianGroup, cap: int = DEFAULT_SET_CAP):
    """Every inverse-closed connection set of G exactly once, fixed order."""
    for mask in inverse_closed_masks(G, cap):
        yield ConnectionSet(G, mask)


def stabilized_count(G: AbelianGroup, z: int) -> tuple[int, int | float]:
    """Subsets of G invariant under both translation by z and negation.

    Returns (exact count, 2^(r/4 + |I(G)|/2)): the invariant subsets are
    the unions of orbits of the group generated by x -> x + z and x -> -x.
    The two agree exactly when z is a square in G; otherwise the second
    value is only an upper bound (and can be a non-integer power of 2),
    because no subset orbit pairs x with xz = -x.
    """
    if z == 0 or G.add(z, z) != 0:
        raise DomainError("z must be an involution")
    n = G.order
    # invariant subsets are exactly the unions of orbits of <x+z, -x>
    seen = 0
    orbits = 0
    for x in G.elements():
        if seen >> x & 1:
            continue
        orbits += 1
        frontier = [x]
        seen |= 1 << x
        while frontier:
            y = frontier.pop()
            for w in (G.add(y, z), G.neg(y)):
                if not seen >> w & 1:
                    seen |= 1 << w
                    frontier.append(w)
    count = 1 << orbits
    quarters = n + 2 * involution_set(G).bit_count()
    if quarters % 4 == 0:
        return count, 1 << (quarters // 4)
    return count, 2.0 ** (quarters / 4)


@dataclass(frozen=True)
class CensusReport:
    """Bucket tallies for one census run.

    A record is determinate when none of its tri-state fields is
    indeterminate; only determinate records are tallied as stable or
    unstable, so the four outcome buckets always add up to `examined`.
    """

    group: str
    total: int
    examined: int
    counts: dict[str, int]
    mode: str
    samples: int | None
    seed: int | None
    ci_half_width: float | None
    elapsed: float

    def proportion(self, bucket: str) -> float:
        if self.examined == 0:
            return 0.0
        return self.counts[bucket] / self.examined

    def signature(self) -> tuple:
        """Everything except the elapsed time, for determinism comparisons."""
        return (
            self.group,
            self.total,
            self.examined,
            tuple(self.counts[k] for k in BUCKETS),
            self.mode,
            self.samples,
            self.seed,
            self.ci_half_width,
        )

    def check(self) -> None:
        c = self.counts
        if set(c) != set(BUCKETS):
            raise StabcoverError("census bucket keys are wrong")
        if c["s2"] > c["s1"] or c["s1"] > self.examined:
            raise StabcoverError("bucket counts violate s2 <= s1 <= examined")
        outcome = (
            c["stable"]
            + c["trivially-unstable"]
            + c["nontrivially-unstable"]
            + c["indeterminate"]
        )
        if outcome != self.examined:
            raise StabcoverError("outcome buckets do not add up to examined")
        for k in BUCKETS:
            if c[k] < 0 or c[k] > self.examined:
                raise StabcoverError(f"bucket {k} out of range")

    def to_json_dict(self) -> dict:
        return {
            "group": self.group,
            "total": self.total,
            "examined": self.examined,
            "counts": dict(self.counts),
            "proportions": {k: self.proportion(k) for k in BUCKETS},
            "mode": self.mode,
            "samples": self.samples,
            "seed": self.seed,
            "ci_half_width": self.ci_half_width,
            "elapsed": self.elapsed,
        }

    CSV_HEADER = ("group", "bucket", "count", "proportion")

    def to_csv_rows(self) -> list[list[str]]:
        rows = []
        for k in BUCKETS:
            rows.append([self.group, k, str(self.counts[k]), repr(self.proportion(k))])
        return rows


def _empty_counts() -> dict[str, int]:
    return {k: 0 for k in BUCKETS}


def _tally(counts: dict[str, int], rec: StabilityRecord) -> None:
    if not rec.connected:
        counts["disconnected"] += 1
    if rec.connected and rec.bipartite:
        counts["connected-bipartite"] += 1
    if not rec.twin_free:
        counts["not-twin-free"] += 1
    if rec.in_s1:
        counts["s1"] += 1
    if rec.in_s2:
        counts["s2"] += 1
    if rec.in_s3 == TriState.YES:
        counts["s3"] += 1
    if rec.in_s3prime:
        counts["s3prime"] += 1
    if rec.in_s4 == TriState.YES:
        counts["s4"] += 1
    if rec.in_s5 == TriState.YES:
        counts["s5"] += 1
    if TriState.INDETERMINATE in (rec.in_s3, rec.in_s4, rec.in_s5):
        counts["indeterminate"] += 1
    elif rec.stable:
        counts["stable"] += 1
    elif rec.trivially_unstable:
        counts["trivially-unstable"] += 1
    else:
        counts["nontrivially-unstable"] += 1


def check_record(rec: StabilityRecord) -> None:
    """Structural cross-checks every classification record must satisfy."""
    target = rec.set.group.order if rec.exponent_two else 2 * rec.set.group.order
    checks = [
        (rec.in_s1 == (rec.connected and not rec.bipartite and rec.twin_free),
         "s1 must match its defining properties"),
        (not rec.in_s2 or rec.in_s1, "s2 is contained in s1"),
        (not rec.in_s2 or rec.stable, "s2 members are stable"),
        (not rec.in_s2 or rec.cover_aut_order == 2 * target,
         "s2 members have the minimal cover group"),
        (rec.aut_order % target == 0, "translations and inversion act on the base"),
        (rec.b_order % target == 0, "translations and inversion sit inside B"),
        (rec.b_order % rec.aut_order == 0, "base automorphisms embed in B"),
        (not (rec.connected and not rec.bipartite)
         or rec.cover_aut_order == 2 * rec.b_order,
         "connected non-bipartite cover group is twice B"),
        (rec.in_s3 != TriState.YES or rec.in_s1, "s3 is contained in s1"),
        (rec.in_s4 != TriState.YES or rec.in_s1, "s4 is contained in s1"),
        (rec.in_s5 != TriState.YES or rec.in_s1, "s5 is contained in s1"),
        (rec.in_s3 != TriState.YES or not rec.in_s2, "s3 excludes s2"),
    ]
    if not rec.exponent_two:
        checks.append(
            (rec.in_s3 != TriState.YES or rec.in_s3prime,
             "s3 members carry a holomorph symmetry")
        )
        determinate = TriState.INDETERMINATE not in (rec.in_s3, rec.in_s4, rec.in_s5)
        if determinate and rec.in_s1 and not rec.in_s2 and rec.in_s3 == TriState.NO:
            checks.append(
                (rec.in_s4 == TriState.YES or rec.in_s5 == TriState.YES,
                 "s1 minus s2 minus s3 lies in s4 or s5")
            )
    for ok, msg in checks:
        if not ok:
            raise StabcoverError(
                f"record for {rec.group} set 0x{rec.set.mask:x} violates: {msg}"
            )


def _classify_range(
    G: AbelianGroup,
    lo: int,
    hi: int,
    enum_cap: int,
    work_budget: int,
    hol_elements,
    record_sink=None,
) -> dict[str, int]:
    orbits = negation_orbits(G)
    orbit_masks = [sum(1 << x for x in orb) for orb in orbits]
    counts = _empty_counts()
    for idx in range(lo, hi):
        mask = _mask_at(orbit_masks, idx)
        rec = classify(
            G,
            ConnectionSet(G, mask),
            enum_cap=enum_cap,
            work_budget=work_budget,
            hol_elements=hol_elements,
        )
        check_record(rec)
        _tally(counts, rec)
        if record_sink is not None:
            record_sink(rec)
    return counts


def _mask_at(orbit_masks: list[int], idx: int) -> int:
    mask = 0
    bits = idx
    while bits:
        low = bits & -bits
        mask |= orbit_masks[low.bit_length() - 1]
        bits ^= low
    return mask


def _exhaustive_shard(args) -> dict[str, int]:
    factors, lo, hi, enum_cap, work_budget = args
    G = make_group(factors)
    return _classify_range(G, lo, hi, enum_cap, work_budget, holomorph(G))


def _shard_ranges(total: int) -> list[tuple[int, int]]:
    ranges = []
    for s in range(FIXED_SHARD_COUNT):
        lo = total * s // FIXED_SHARD_COUNT
        hi = total * (s + 1) // FIXED_SHARD_COUNT
        ranges.append((lo, hi))
    return ranges


def _merge(parts: list[dict[str, int]]) -> dict[str, int]:
    counts = _empty_counts()
    for part in parts:
        for k in BUCKETS:
            counts[k] += part[k]
    return counts


def exhaustive_census(
    G: AbelianGroup,
    enum_cap: int = DEFAULT_ENUM_CAP,
    work_budget: int = DEFAULT_WORK_BUDGET,
    workers: int = 1,
    set_cap: int = DEFAULT_SET_CAP,
    record_sink=None,
) -> CensusReport:
    """Classify every inverse-closed subset of G and tally the buckets."""
    start = time.monotonic()
    total = count_inverse_closed(G)
    if total > set_cap:
        raise CapExceededError("census set count", total, set_cap)
    if workers < 1:
        raise DomainError("worker count must be at least 1")
    if workers == 1:
        counts = _classify_range(
            G, 0, total, enum_cap, work_budget, holomorph(G), record_sink
        )
    else:
        if record_sink is not None:
            raise DomainError("per-set record sinks require a single worker")
        jobs = [
            (G.invariant_factors, lo, hi, enum_cap, work_budget)
            for lo, hi in _shard_ranges(total)
        ]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            counts = _merge(list(pool.map(_exhaustive_shard, jobs)))
    report = CensusReport(
        group=G.spec(),
        total=total,
        examined=total,
        counts=counts,
        mode="exhaustive",
        samples=None,
        seed=None,
        ci_half_width=None,
        elapsed=time.monotonic() - start,
    )
    report.check()
    return report


def _sample_shard(args) -> dict[str, int]:
    factors, shard, lo, hi, seed, enum_cap, work_budget = args
    G = make_group(factors)
    hol = holomorph(G)
    orbits = negation_orbits(G)
    orbit_masks = [sum(1 << x for x in orb) for orb in orbits]
    width = len(orbits)
    rng = random.Random(seed ^ shard)
    counts = _empty_counts()
    for _ in range(lo, hi):
        mask = _mask_at(orbit_masks, rng.getrandbits(width))
        rec = classify(
            G,
            ConnectionSet(G, mask),
            enum_cap=enum_cap,
            work_budget=work_budget,
            hol_elements=hol,
        )
        check_record(rec)
        _tally(counts, rec)
    return counts


def monte_carlo_census(
    G: AbelianGroup,
    samples: int,
    seed: int,
    enum_cap: int = DEFAULT_ENUM_CAP,
    work_budget: int = DEFAULT_WORK_BUDGET,
    workers: int = 1,
) -> CensusReport:
    """Classify uniform samples over inverse-closed subsets.

    One fair bit per negation orbit gives the exact uniform distribution.
    Each of the fixed shards draws from its own substream (master seed
    xor shard index), so the report does not depend on the worker count.
    """
    start = time.monotonic()
    if samples < 0:
        raise DomainError("sample count must be non-negative")
    if workers < 1:
        raise DomainError("worker count must be at least 1")
    jobs = [
        (G.invariant_factors, shard, lo, hi, seed, enum_cap, work_budget)
        for shard, (lo, hi) in enumerate(_shard_ranges(samples))
    ]
    if workers == 1:
        counts = _merge([_sample_shard(job) for job in jobs])
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            counts = _merge(list(pool.map(_sample_shard, jobs)))
    if samples > 0:
        p = counts["stable"] / samples
        half_width = 1.96 * math.sqrt(p * (1.0 - p) / samples)
    else:
        half_width = None
    report = CensusReport(
        group=G.spec(),
        total=count_inverse_closed(G),
        examined=samples,
        counts=counts,
        mode="monte-carlo",
        samples=samples,
        seed=seed,
        ci_half_width=half_width,
        elapsed=time.monotonic() - start,
    )
    report.check()
    return report


# -- unlabeled census ---------------------------------------------------------


@dataclass(frozen=True)
class UnlabeledReport:
    """Canonical-form classes of Cayley graphs versus holomorph orbits.

    A set is good when its cover automorphism group is as small as
    possible (twice the translations extended by inversion); good graphs
    determine their connection set up to holomorph conjugacy.
    """

    group: str
    total: int
    hol_order: int
    unlabeled_count: int
    good_set_count: int
    good_class_count: int
    hol_orbit_count: int
    good_hol_orbit_count: int
    lower_bound_holds: bool
    good_classes_are_hol_orbits: bool

    def to_json_dict(self) -> dict:
        return {
            "group": self.group,
            "total": self.total,
            "hol_order": self.hol_order,
            "unlabeled_count": self.unlabeled_count,
            "good_set_count": self.good_set_count,
            "good_class_count": self.good_class_count,
            "hol_orbit_count": self.hol_orbit_count,
            "good_hol_orbit_count": self.good_hol_orbit_count,
            "lower_bound_holds": self.lower_bound_holds,
            "good_classes_are_hol_orbits": self.good_classes_are_hol_orbits,
        }


def hol_orbits(G: AbelianGroup, set_cap: int = DEFAULT_SET_CAP) -> list[list[int]]:
    """Conjugacy classes of connection sets under the holomorph, as mask lists.

    A holomorph element conjugates the set of translations {R(s)} by
    acting with its automorphism part only (translations centralize each
    other), so the classes are the group-automorphism orbits; closure
    under inversion is preserved.
    """
    auts = automorphism_group_of_G(G)
    orbits = []
    seen: set[int] = set()
    for mask in inverse_closed_masks(G, set_cap):
        if mask in seen:
            continue
        orbit = sorted({tau.apply_mask(mask) for tau in auts})
        seen.update(orbit)
        orbits.append(orbit)
    return orbits


def unlabeled_census(
    G: AbelianGroup,
    enum_cap: int = DEFAULT_ENUM_CAP,
    work_budget: int = DEFAULT_WORK_BUDGET,
    set_cap: int = DEFAULT_SET_CAP,
) -> UnlabeledReport:
    """Group Cayley graphs by canonical form and compare with holomorph orbits."""
    total = count_inverse_closed(G)
    if total > set_cap:
        raise CapExceededError("unlabeled census set count", total, set_cap)
    target = G.order if G.exponent <= 2 else 2 * G.order
    hol = holomorph(G)
    classes: dict[bytes, list[int]] = {}
    good_masks: set[int] = set()
    for mask in inverse_closed_masks(G, set_cap):
        S = ConnectionSet(G, mask)
        rec = classify(
            G, S, enum_cap=enum_cap, work_budget=work_budget, hol_elements=hol
        )
        key = canonical_form(cayley_graph(G, S)).bytes
        classes.setdefault(key, []).append(mask)
        if rec.cover_aut_order == 2 * target:
            good_masks.add(mask)
    orbits = hol_orbits(G, set_cap)
    good_classes = [ms for ms in classes.values() if set(ms) <= good_masks]
    good_class_masks = {frozenset(ms) for ms in classes.values() if set(ms) & good_masks}
    good_orbit_masks = {
        frozenset(orb) for orb in orbits if set(orb) & good_masks
    }
    good_orbit_count = len(good_orbit_masks)
    report = UnlabeledReport(
        group=G.spec(),
        total=total,
        hol_order=len(hol),
        unlabeled_count=len(classes),
        good_set_count=len(good_masks),
        good_class_count=len(good_class_masks),
        hol_orbit_count=len(orbits),
        good_hol_orbit_count=good_orbit_count,
        lower_bound_holds=len(good_class_masks) * len(hol) >= len(good_masks),
        good_classes_are_hol_orbits=good_class_masks == good_orbit_masks,
    )
    if len(good_classes) != len(good_class_masks):
        raise StabcoverError("a canonical class mixes good and non-good sets")
    return report
