import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from braidquot import catalog, grouptheory as gt
from braidquot.braid import verify_tuple
from braidquot.pcgroup import OrderCapExceeded, cyclic_group, direct_product
from braidquot.search import (InvariantViolation, SearchOptions, check_orbit_identity, count_via_lifting,
                              enumerate_prestructures, enumerate_structures, extension_obstruction,
                              format_tuple, parse_tuple, reduce_mod_aut, screen_group)

import oracles
from conftest import group, report


def test_prestructures_order32():
    rep = report("G(32,49)", "prestructures")
    assert rep.orbit_count == 4480
    assert rep.n_values_seen == [2]
    assert rep.z_always_central and rep.k_centralizer_always_center
    assert rep.orbit_stabilizer_histogram == {1: 4480}
    assert report("G(32,50)", "prestructures").orbit_count == 2688


def test_cct_group_has_no_prestructures():
    rep = enumerate_prestructures(group("Q8"))
    assert rep.total_count == 0 and rep.orbit_count == 0


def test_prestructures_g96_202():
    assert report("G(96,202)", "prestructures").orbit_count == 26880


def test_structures_examples():
    rep = report("G(32,49)", "structures")
    assert (rep.orbit_count, rep.total_count) == (1920, 2211840)
    assert report("G(64,134)", "prestructures").orbit_count == 40320
    assert report("G(64,134)", "structures").orbit_count == 0
    rep = report("G(64,249)", "structures")
    assert (rep.orbit_count, rep.total_count) == (368640, 566231040)
    assert report("G(96,204)", "structures").orbit_count == 0


def test_naive_count_matches_factorized_total_g3250():
    G = group("G(32,50)")
    assert oracles.naive_prestructure_total(G.mul) == report("G(32,50)", "prestructures").total_count


def test_unreduced_total_matches():
    G = group("G(32,50)")
    rep = enumerate_prestructures(G, SearchOptions(reduce=False))
    assert rep.orbit_count is None
    assert rep.total_count == report("G(32,50)", "prestructures").total_count


def test_structure_representatives_are_prestructures():
    G = group("G(32,50)")
    rep = report("G(32,50)", "structures", True)
    assert len(rep.representatives) == rep.orbit_count == 1152
    for t in rep.representatives:
        assert verify_tuple(G, t, require="prestructure").passed
        assert verify_tuple(G, t, require="structure").passed


def test_representatives_are_orbit_minima_and_distinct():
    G = group("G(32,49)")
    perms = gt.automorphism_group(G).elements.astype(np.int64)
    reps = report("G(32,49)", "structures", True).representatives
    prefix = [8, 4, 5, 6, 7]  # z, r21, t21, r22, t22 decide the orbit-minimal prefix
    seen = set()
    for t in reps[::37]:
        orbit = oracles.tuple_orbit(perms, t)
        assert len(orbit) == 1152
        assert min(tuple(u[i] for i in prefix) for u in orbit) == tuple(t[i] for i in prefix)
        assert not orbit & seen
        seen |= orbit


def test_reduce_mod_aut_on_expanded_orbits():
    G = group("G(32,49)")
    aut = gt.automorphism_group(G)
    perms = aut.elements.astype(np.int64)
    reps = report("G(32,49)", "structures", True).representatives[:15]
    tuples = [u for t in reps for u in oracles.tuple_orbit(perms, t)]
    rng = np.random.default_rng(1)
    rng.shuffle(tuples)
    out = reduce_mod_aut(G, tuples, aut)
    assert len(out["orbits"]) == 15
    assert out["histogram"] == {1: 15}
    assert all(size == 1152 for _, _, size in out["orbits"])


def test_reduce_mod_aut_singleton_and_stabilizer_two():
    # the trivial lift of a G(32,49) prestructure: in each coset of <x6> take
    # the element of 2-power order
    G, H = group("G(96,224)"), group("G(32,49)")
    q = gt.quotient(G, catalog.word_subgroup(G, ["x6"]))
    iso = gt.is_isomorphic(H, q.target)
    orders = G.element_orders

    def lift(a):
        fiber = np.nonzero(q.proj == iso[a])[0]
        return int(next(b for b in fiber if 32 % orders[b] == 0))

    base = report("G(32,49)", "prestructures", True).representatives[0]
    t = [lift(a) for a in base]
    assert verify_tuple(G, t, require="prestructure").passed
    out = reduce_mod_aut(G, [t])
    assert len(out["orbits"]) == 1
    assert out["orbits"][0][1] == 2
    assert report("G(96,224)", "prestructures").orbit_stabilizer_histogram == {1: 14694400, 2: 4480}


@pytest.mark.parametrize("label, k_orders", [("G(32,49)", {32}), ("G(64,264)", {32})])
def test_extension_obstruction(label, k_orders):
    G = group(label)
    seen = set()
    for t in report(label, "prestructures", True).representatives[::7]:
        ob = extension_obstruction(G, t)
        assert ob.obstructs and ob.centralizer_order == ob.center_order
        seen.add(ob.k_order)
    assert seen == k_orders


def test_k_orders_g96_224():
    rep = report("G(96,224)", "prestructures")
    assert rep.k_orders_seen == [32, 96]
    assert rep.k_centralizer_always_center


def test_n_filter():
    G = group("G(32,49)")
    rep2 = enumerate_structures(G, SearchOptions(kind="structures", n_filter=2))
    assert rep2.total_count == 2211840
    rep4 = enumerate_structures(G, SearchOptions(kind="structures", n_filter=4))
    assert rep4.total_count == 0 and rep4.notes


def test_worker_count_does_not_change_report():
    G = group("G(32,50)")
    a = enumerate_structures(G, SearchOptions(kind="structures", emit_representatives=True))
    b = enumerate_structures(G, SearchOptions(kind="structures", emit_representatives=True, worker_count=3))
    assert a.to_dict(G) == b.to_dict(G)


def test_exact_search_cap():
    big = direct_product(group("G(32,49)"), cyclic_group(5))
    with pytest.raises(OrderCapExceeded):
        enumerate_prestructures(big)


def test_options_validation():
    with pytest.raises(ValueError):
        SearchOptions(kind="tuples")
    with pytest.raises(ValueError):
        SearchOptions(mode="guess")
    with pytest.raises(ValueError):
        SearchOptions(worker_count=0)


def test_orbit_identity_detects_tampering():
    rep = report("G(32,49)", "prestructures")
    check_orbit_identity(rep)
    import copy

    bad = copy.copy(rep)
    bad.total_count += 1
    with pytest.raises(InvariantViolation):
        check_orbit_identity(bad)


def test_tuple_text_roundtrip():
    G = group("G(64,266)")
    t = report("G(64,266)", "structures", True).representatives[0]
    text = format_tuple(G, t)
    assert text.count(";") == 8
    assert parse_tuple(G, text) == list(t)


def test_lifting_g96_224_structures():
    G = group("G(96,224)")
    N = catalog.word_subgroup(G, ["x6"])
    base = report("G(32,49)", "structures", True)
    lr = count_via_lifting(G, N, base, group("G(32,49)"), sample_bases=1, sample_lifts=500)
    assert lr.lift_multiplicity == 6561
    assert set(lr.generating_lift_counts) == {6560}
    assert lr.orbit_count == 1920 * 1152 * 6560 // 2304 == 6297600
    assert lr.total_count == 14509670400


def test_lifting_preconditions():
    G = group("G(96,211)")
    N = catalog.word_subgroup(G, ["x6"])
    with pytest.raises(ValueError, match="central"):
        count_via_lifting(G, N, report("G(32,49)", "structures", True), group("G(32,49)"))
    H = group("G(96,224)")
    with pytest.raises(ValueError, match="representatives"):
        count_via_lifting(H, catalog.word_subgroup(H, ["x6"]), report("G(32,49)", "structures"),
                          group("G(32,49)"))


def test_screen_negative_cases():
    assert screen_group(cyclic_group(6)).admits_prestructures is False
    assert screen_group(group("Q8")).reason == "CCT"
    assert screen_group(direct_product(group("Q8"), cyclic_group(9))).reason == "CCT"
    G = direct_product(group("S4"), cyclic_group(3))
    assert G.order == 72
    v = screen_group(G)
    assert v.admits_prestructures is False
    assert sorted(q["quotient_order"] for q in v.quotients) == [18, 24]


def test_screen_g96_211_points_to_extraspecial_quotient():
    known = [("G(32,49)", group("G(32,49)")), ("G(32,50)", group("G(32,50)"))]
    v = screen_group(group("G(96,211)"), known=known)
    assert v.admits_prestructures is None
    admitting = [q for q in v.quotients if q["admits"]]
    assert [q["isomorphic_to"] for q in admitting] == ["G(32,49)"]


def test_screen_monolithic_requires_search():
    v = screen_group(group("G(96,201)"))
    assert v.admits_prestructures is None and "monolith" in v.reason


REPORT_KEYS = [(lbl, kind) for lbl in ("G(32,49)", "G(32,50)", "G(64,134)", "G(64,249)", "G(64,266)",
                                       "G(96,202)", "G(96,224)")
               for kind in ("prestructures", "structures")]


@settings(max_examples=20, deadline=None)
@given(st.sampled_from(REPORT_KEYS))
def test_orbit_identity_on_reports(key):
    rep = report(*key)
    s = sum(n * (rep.aut_order // stab) for stab, n in rep.orbit_stabilizer_histogram.items())
    assert s == rep.total_count
    assert sum(rep.orbit_stabilizer_histogram.values()) == rep.orbit_count
    if rep.orbit_count:
        assert rep.n_values_seen == [2] and rep.z_always_central
