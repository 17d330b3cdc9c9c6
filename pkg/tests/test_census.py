"""Census tallies, sampling determinism, and unlabeled counting."""

import dataclasses
import math

import pytest

from stabcover.census import (
    BUCKETS,
    CensusReport,
    check_record,
    exhaustive_census,
    hol_orbits,
    iterate_inverse_closed,
    monte_carlo_census,
    stabilized_count,
    unlabeled_census,
)
from stabcover.errors import DomainError, StabcoverError
from stabcover.graphs import ConnectionSet
from stabcover.groups import count_inverse_closed, make_group
from stabcover.stability import classify

# tallies confirmed by the per-set classifications tested against the
# subgroup-lattice and automorphism brute-force oracles
C5_COUNTS = {
    "disconnected": 2,
    "connected-bipartite": 0,
    "not-twin-free": 2,
    "s1": 5,
    "s2": 4,
    "s3": 1,
    "s3prime": 4,
    "s4": 0,
    "s5": 1,
    "stable": 5,
    "trivially-unstable": 3,
    "nontrivially-unstable": 0,
    "indeterminate": 0,
}
C7_COUNTS = {
    "disconnected": 2,
    "connected-bipartite": 0,
    "not-twin-free": 2,
    "s1": 13,
    "s2": 12,
    "s3": 1,
    "s3prime": 4,
    "s4": 0,
    "s5": 0,
    "stable": 13,
    "trivially-unstable": 3,
    "nontrivially-unstable": 0,
    "indeterminate": 0,
}


def test_iterate_inverse_closed():
    G = make_group([7])
    sets = list(iterate_inverse_closed(G))
    assert len(sets) == count_inverse_closed(G) == 16
    assert all(isinstance(s, ConnectionSet) for s in sets)
    assert len({s.mask for s in sets}) == 16


def _brute_stabilized(G, z):
    count = 0
    for m in range(1 << G.order):
        if G.translate_mask(m, z) == m and G.neg_mask(m) == m:
            count += 1
    return count


def test_stabilized_count_values():
    cases = [
        ((4,), 2, 4, 4),
        ((2, 2), 1, 4, 8),
        ((8,), 4, 8, 8),
    ]
    for facs, z, want_brute, want_formula in cases:
        G = make_group(facs)
        brute, formula = stabilized_count(G, z)
        assert brute == want_brute and formula == want_formula
        assert brute == _brute_stabilized(G, z)
    # non-integer formula exponent: strict bound, no equality possible
    C6 = make_group([6])
    brute, formula = stabilized_count(C6, 3)
    assert brute == 4 == _brute_stabilized(C6, 3)
    assert formula == 2.0 ** 2.5


def test_stabilized_count_validation():
    G = make_group([6])
    with pytest.raises(DomainError):
        stabilized_count(G, 0)
    with pytest.raises(DomainError):
        stabilized_count(G, 1)


def test_exhaustive_census_c5_c7():
    r5 = exhaustive_census(make_group([5]))
    assert r5.total == r5.examined == 8
    assert r5.counts == C5_COUNTS
    r7 = exhaustive_census(make_group([7]))
    assert r7.counts == C7_COUNTS
    assert r7.proportion("stable") == 13 / 16


def test_exhaustive_census_worker_independence():
    G = make_group([7])
    sigs = {exhaustive_census(G, workers=w).signature() for w in (1, 2, 3)}
    assert len(sigs) == 1


def test_exhaustive_census_record_sink():
    G = make_group([5])
    records = []
    exhaustive_census(G, record_sink=records.append)
    assert len(records) == 8
    with pytest.raises(DomainError):
        exhaustive_census(G, workers=2, record_sink=records.append)


def test_monte_carlo_determinism_and_worker_independence():
    G = make_group([7])
    a = monte_carlo_census(G, samples=64, seed=42, workers=1)
    b = monte_carlo_census(G, samples=64, seed=42, workers=4)
    assert a.signature() == b.signature()
    c = monte_carlo_census(G, samples=64, seed=43, workers=1)
    assert c.signature() != a.signature()
    assert a.mode == "monte-carlo" and a.examined == 64
    p = a.counts["stable"] / 64
    assert a.ci_half_width == pytest.approx(1.96 * math.sqrt(p * (1 - p) / 64))


def test_monte_carlo_is_unbiased():
    # mean stable frequency over many seeds close to the exhaustive value;
    # seeds are spaced past the shard count so the xor substreams never
    # collide between runs and the draws stay independent
    G = make_group([5])
    truth = 5 / 8
    samples, seeds = 32, 50
    hits = sum(
        monte_carlo_census(G, samples=samples, seed=1000 + 64 * s).counts["stable"]
        for s in range(seeds)
    )
    n = samples * seeds
    se = math.sqrt(truth * (1 - truth) / n)
    assert abs(hits / n - truth) < 3 * se


def test_census_report_check_rejects_tampering():
    rep = exhaustive_census(make_group([5]))
    bad = dict(rep.counts)
    bad["stable"] += 1
    broken = dataclasses.replace(rep, counts=bad)
    with pytest.raises(StabcoverError):
        broken.check()


def test_census_report_serialization():
    rep = exhaustive_census(make_group([5]))
    d = rep.to_json_dict()
    assert d["group"] == "C5"
    assert set(d["counts"]) == set(BUCKETS)
    rows = rep.to_csv_rows()
    assert len(rows) == len(BUCKETS)
    assert all(len(r) == len(CensusReport.CSV_HEADER) for r in rows)


def test_check_record_rejects_inconsistency():
    G = make_group([5])
    rec = classify(G, ConnectionSet(G, 0b10010))
    check_record(rec)
    broken = dataclasses.replace(rec, in_s2=True, in_s1=False)
    with pytest.raises(StabcoverError):
        check_record(broken)


def test_hol_orbit_counts():
    assert len(hol_orbits(make_group([1]))) == 2
    assert len(hol_orbits(make_group([3]))) == 4
    assert len(hol_orbits(make_group([5]))) == 6
    # orbits partition the inverse-closed sets
    orbs = hol_orbits(make_group([8]))
    flat = [m for orb in orbs for m in orb]
    assert len(flat) == len(set(flat)) == count_inverse_closed(make_group([8]))


def test_unlabeled_census_c5():
    rep = unlabeled_census(make_group([5]))
    assert rep.total == 8
    assert rep.hol_order == 20
    assert rep.unlabeled_count == 6
    assert rep.good_set_count == 4
    assert rep.good_class_count == 2
    assert rep.hol_orbit_count == 6
    assert rep.good_hol_orbit_count == 2
    assert rep.lower_bound_holds
    assert rep.good_classes_are_hol_orbits
    d = rep.to_json_dict()
    assert d["unlabeled_count"] == 6


def test_unlabeled_census_exponent_two_group():
    # no good sets at exponent two, the comparisons still hold vacuously
    rep = unlabeled_census(make_group([2, 2]))
    assert rep.good_set_count == 0
    assert rep.lower_bound_holds
    assert rep.good_classes_are_hol_orbits
