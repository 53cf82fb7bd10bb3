import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from braidquot import grouptheory as gt
from braidquot.braid import (PRESTRUCTURE_LABELS, central_twist_invariant, evaluate, exponent_sums,
                             genus2_table, noncentrality_check, parse_symbolic, relation_schema,
                             tuple_names, verify_tuple)
from braidquot.pcgroup import cyclic_group

from conftest import group, report


def test_genus2_schema_labels():
    s = relation_schema(2)
    assert len(s) == 22
    assert [r.label for r in s.relations][:2] == ["S1", "S2"]
    assert sorted(r.label for r in s.relations) == sorted(["S1", "S2"] + list(PRESTRUCTURE_LABELS))


def test_r4_value():
    r4 = relation_schema(2).by_label("R4")
    assert r4.lhs == parse_symbolic("[r11, t21]")
    assert r4.rhs == (("z", -1),)


def test_genus3_relation_count():
    b = 3
    assert len(relation_schema(b)) == 2 + 2 * b * (2 * b + 1) == 44
    assert len(tuple_names(b)) == 13


def test_genus_below_two_rejected():
    with pytest.raises(ValueError):
        relation_schema(1)


def test_schema_matches_literal_table_textually():
    table = genus2_table()
    schema = relation_schema(2)
    assert len(table) == len(schema)
    for rel in table.relations:
        other = schema.by_label(rel.label)
        assert (rel.lhs, rel.rhs) == (other.lhs, other.rhs), rel.label


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(["G(64,264)", "G(96,216)", "S4"]), st.data())
def test_schema_matches_literal_table_under_evaluation(label, data):
    G = group(label)
    values = {n: data.draw(st.integers(0, G.order - 1)) for n in tuple_names(2)}
    schema = relation_schema(2)
    for rel in genus2_table().relations:
        other = schema.by_label(rel.label)
        assert evaluate(G, rel.lhs, values) == evaluate(G, other.lhs, values)
        assert evaluate(G, rel.rhs, values) == evaluate(G, other.rhs, values)


def test_parse_symbolic():
    assert parse_symbolic("1") == ()
    assert parse_symbolic("z^-1 t21") == (("z", -1), ("t21", 1))
    assert parse_symbolic("[r12^-1, t12^-1]") == (("r12", -1), ("t12", -1), ("r12", 1), ("t12", 1))
    with pytest.raises(ValueError):
        parse_symbolic("q7")


def test_structure_representatives_pass():
    G = group("G(32,49)")
    rep = report("G(32,49)", "structures", True)
    assert len(rep.representatives) == 1920
    for t in rep.representatives:
        v = verify_tuple(G, t, require="structure", n=2)
        assert v.passed, v.failures()
        assert v.z_order == 2


def test_identity_z_fails():
    G = group("G(32,49)")
    t = list(report("G(32,49)", "structures", True).representatives[0])
    t[-1] = 0
    v = verify_tuple(G, t)
    assert not v.passed
    assert "o(z) >= 2" in v.failures()


def test_abelian_group_fails_r4():
    G = cyclic_group(6)
    v = verify_tuple(G, [1, 2, 3, 4, 5, 1, 2, 3, 3])
    assert "R4" in v.failures()


def test_malformed_tuples():
    G = group("G(32,49)")
    with pytest.raises(ValueError, match="needs 9 entries"):
        verify_tuple(G, [1] * 8)
    with pytest.raises(ValueError, match="out of range"):
        verify_tuple(G, [1] * 8 + [40])
    with pytest.raises(ValueError, match="genus 2 only"):
        verify_tuple(G, [1] * 13, b=3, require="prestructure")


def test_replacing_an_entry_by_identity_fails():
    G = group("G(32,49)")
    t = list(report("G(32,49)", "structures", True).representatives[5])
    for i in range(8):
        s = t.copy()
        s[i] = 0
        assert not verify_tuple(G, s).passed


def test_verify_report_lines():
    G = group("G(32,49)")
    t = report("G(32,49)", "structures", True).representatives[0]
    v = verify_tuple(G, t)
    lines = v.lines()
    assert len(lines) == 1 + 22 + 1
    assert all(line.startswith("ok") for line in lines)


def test_no_genus3_structures_in_order32():
    G = group("G(32,49)")
    rng = np.random.default_rng(3)
    schema = relation_schema(3)
    for _ in range(300):
        t = rng.integers(0, G.order, 13).tolist()
        assert not verify_tuple(G, t, b=3, schema=schema).passed


def test_genus3_tuples_built_from_genus2_structures_fail():
    # pad a genus-2 structure with a third handle of central or repeated entries
    G = group("G(32,49)")
    t = list(report("G(32,49)", "structures", True).representatives[0])
    r11, t11, r12, t12, r21, t21, r22, t22, z = t
    for extra in ([0, 0, 0, 0], [r11, t11, r21, t21], [r12, t12, r22, t22]):
        tt = [r11, t11, r12, t12, extra[0], extra[1], r21, t21, r22, t22, extra[2], extra[3], z]
        assert not verify_tuple(G, tt, b=3).passed


@settings(max_examples=60, deadline=None)
@given(st.data())
def test_automorphism_equivariance(data):
    G = group("G(32,50)")
    aut = gt.automorphism_group(G)
    reps = report("G(32,50)", "structures", True).representatives
    t = reps[data.draw(st.integers(0, len(reps) - 1))]
    perm = aut.elements[data.draw(st.integers(0, len(aut) - 1))]
    image = gt.apply_automorphism(perm, t)
    assert verify_tuple(G, image).passed


@pytest.mark.parametrize("label", ["G(32,49)", "G(96,202)"])
def test_prestructures_have_noncentral_entries(label):
    G = group(label)
    for t in report(label, "prestructures", True).representatives:
        assert noncentrality_check(G, t)


def test_prestructure_mode_ignores_surface_relations():
    G = group("G(32,49)")
    pre = report("G(32,49)", "prestructures", True).representatives
    structures = set(report("G(32,49)", "structures", True).representatives)
    failing = next(t for t in pre if t not in structures and not verify_tuple(G, t).passed)
    assert verify_tuple(G, failing, require="prestructure").passed


def test_central_twists():
    assert central_twist_invariant(relation_schema(2))
    assert central_twist_invariant(relation_schema(3))
    assert exponent_sums(relation_schema(2).by_label("R4")) == {"z": 1}
