import numpy as np
import pytest

from braidquot import catalog, grouptheory as gt
from braidquot.pcgroup import FiniteGroup, cyclic_group, direct_product
from braidquot.predicates import (NON_NILPOTENT, NOT_APPLICABLE, is_cct, is_extraspecial, is_monolithic,
                                  is_p_group, lower_central_series, nilpotency_class, profile)

from conftest import catalog_labels, group


def _check_witness(G, w):
    x, y, z = w
    Z = gt.center(G)
    assert G.commutator(x, y) == 0 and G.commutator(y, z) == 0
    assert G.commutator(x, z) != 0
    assert x not in Z and y not in Z and z not in Z


def test_cct_examples():
    assert is_cct(group("Q8")).value is True
    r = is_cct(group("G(32,49)"))
    assert r.value is False
    _check_witness(group("G(32,49)"), r.witness)
    assert is_cct(cyclic_group(4)).value == NOT_APPLICABLE


def test_abelian_normal_subgroup_of_prime_index_gives_cct():
    # D8 has a cyclic subgroup of order 4 and index 2
    assert is_cct(group("D8")).value is True
    s4 = group("S4")
    r = is_cct(s4)
    assert r.value is False
    _check_witness(s4, r.witness)


def test_cct_agrees_with_centralizer_criterion():
    for label in ["Q8", "D8", "S4", "G(32,50)", "G(96,202)"]:
        G = group(label)
        Z = gt.center(G)
        abelian_centralizers = True
        for a in range(G.order):
            if a in Z:
                continue
            C = gt.centralizer(G, a).array()
            sub = G.mul[C[:, None], C[None, :]]
            if not (sub == sub.T).all():
                abelian_centralizers = False
        assert bool(is_cct(G)) == abelian_centralizers


def test_monolithic_examples():
    assert is_monolithic(group("G(64,249)"))
    assert not is_monolithic(group("G(64,264)"))
    assert not is_monolithic(direct_product(group("Q8"), cyclic_group(3)))


def test_extraspecial_examples():
    assert is_extraspecial(group("G(32,49)"))
    assert not is_extraspecial(group("G(64,199)"))
    assert not is_extraspecial(direct_product(cyclic_group(2), cyclic_group(4)))


def test_p_group():
    assert is_p_group(group("G(64,199)")) == 2
    assert is_p_group(group("G(96,202)")) is None
    assert is_p_group(cyclic_group(1)) is None


def test_nilpotency_examples():
    assert nilpotency_class(group("G(32,49)")) == 2
    assert nilpotency_class(group("G(64,134)")) == 3
    assert nilpotency_class(group("G(96,201)")) == NON_NILPOTENT
    assert nilpotency_class(cyclic_group(6)) == 1
    series = lower_central_series(group("G(64,134)"))
    assert [len(s) for s in series][-1] == 1


@pytest.mark.parametrize("label", catalog_labels() + ["Q8", "D8", "S4", "Z2"])
def test_profile_matches_expected(label):
    G = group(label)
    exp = catalog.get_entry(label).expected
    prof = profile(G, with_aut=False)
    assert prof.is_monolithic == exp.is_monolithic
    assert prof.is_cct == exp.is_cct
    assert prof.is_extraspecial == exp.is_extraspecial
    assert prof.nilpotency_class == exp.nilpotency
    assert prof.center_order == exp.center["order"]
    assert prof.derived_order == exp.derived["order"]
    if prof.is_cct is True:
        assert not prof.is_abelian
    if prof.is_extraspecial:
        c = prof.center_order
        assert all(c % d for d in range(2, c)) and prof.monolith_order == c


def _omega(n):
    k, d = 0, 2
    while n > 1:
        while n % d == 0:
            n //= d
            k += 1
        d += 1
    return k


@pytest.mark.parametrize("entry", catalog.builtin_catalog(), ids=lambda e: e.label)
def test_small_orders_are_cct_or_abelian(entry):
    n = entry.order
    p = is_p_group(entry.build())
    if _omega(n) <= 3 or (p is not None and n == p ** 4):
        assert is_cct(entry.build()).value in (True, NOT_APPLICABLE)


@pytest.mark.parametrize("label", catalog_labels())
def test_groups_with_prestructures_are_not_cct(label):
    # every catalog group carries prestructures
    assert catalog.get_entry(label).expected.prestructure_orbits > 0
    assert is_cct(group(label)).value is False


@pytest.mark.parametrize("label", ["G(32,49)", "G(32,50)"])
def test_extraspecial_structure_subgroups_coincide(label):
    G = group(label)
    Z, D, M = gt.center(G), gt.derived_subgroup(G), gt.monolith(G)
    assert Z == D == M and len(Z) == 2


def test_profile_serializes_witness_as_vectors():
    prof = profile(group("G(32,49)"), with_aut=True)
    d = prof.to_dict()
    assert d["aut_order"] == 1152
    assert len(d["cct_witness"]) == 3 and all(len(v) == 5 for v in d["cct_witness"])
    table_group = FiniteGroup(group("S4").mul, label="plain")
    d = profile(table_group, with_aut=False).to_dict()
    assert all(len(v) == 1 for v in d["cct_witness"])
    assert np.isscalar(d["center_order"])
