"""Relations of the pure braid group on two strands of a closed surface,
and a literal verifier for candidate generator tuples in a finite group.

Abstract generators are named ``r1j``, ``t1j``, ``r2j``, ``t2j`` (j = 1..b)
and ``z`` (the image of the braid generator A12).  Tuples are ordered
``(r11, t11, ..., r1b, t1b, r21, t21, ..., r2b, t2b, z)``.

Two encodings exist on purpose: ``relation_schema`` builds the relators for
any genus from the case table, while ``GENUS2_TABLE`` is the genus-2 list
written out by hand.  Tests compare them under evaluation.
"""

from __future__ import annotations

import re
from functools import lru_cache
from dataclasses import dataclass, field
from typing import Sequence

from .pcgroup import FiniteGroup

Letter = tuple[str, int]
SymWord = tuple[Letter, ...]


def _inv(w: SymWord) -> SymWord:
    return tuple((g, -e) for g, e in reversed(w))


def _comm(x: SymWord, y: SymWord) -> SymWord:
    return x + y + _inv(x) + _inv(y)


def _g(name: str, e: int = 1) -> SymWord:
    return ((name, e),)


@dataclass(frozen=True)
class Relation:
    label: str
    lhs: SymWord
    rhs: SymWord

    def __str__(self) -> str:
        return f"{self.label}: {format_word(self.lhs)} = {format_word(self.rhs)}"


def format_word(w: SymWord) -> str:
    if not w:
        return "1"
    return " ".join(g if e == 1 else f"{g}^{e}" for g, e in w)


@dataclass
class RelationSchema:
    b: int
    relations: list[Relation]

    @property
    def generators(self) -> list[str]:
        return tuple_names(self.b)

    def __len__(self) -> int:
        return len(self.relations)

    def by_label(self, label: str) -> Relation:
        for r in self.relations:
            if r.label == label:
                return r
        raise KeyError(label)


def tuple_names(b: int) -> list[str]:
    names = []
    for row in (1, 2):
        for j in range(1, b + 1):
            names += [f"r{row}{j}", f"t{row}{j}"]
    return names + ["z"]


def relation_schema(b: int) -> RelationSchema:
    """All relators of the genus-``b`` presentation, generated from the case table."""
    if b < 2:
        raise ValueError("genus must be at least 2")
    return RelationSchema(b, list(_schema_relations(b)))


@lru_cache(maxsize=None)
def _schema_relations(b: int) -> tuple[Relation, ...]:
    if b < 2:
        raise ValueError("genus must be at least 2")
    z, zi = _g("z"), _g("z", -1)
    r1 = lambda j: _g(f"r1{j}")
    t1 = lambda j: _g(f"t1{j}")
    r2 = lambda j, e=1: _g(f"r2{j}", e)
    t2 = lambda j, e=1: _g(f"t2{j}", e)

    rels: list[Relation] = []
    s1: SymWord = ()
    for j in range(b, 0, -1):
        s1 += _comm(_g(f"r1{j}", -1), _g(f"t1{j}", -1)) + _g(f"t1{j}", -1)
    for j in range(1, b + 1):
        s1 += t1(j)
    rels.append(Relation("S1", s1, z))
    s2: SymWord = ()
    for j in range(1, b + 1):
        s2 += _comm(r2(j, -1), t2(j)) + t2(j)
    for j in range(b, 0, -1):
        s2 += t2(j, -1)
    rels.append(Relation("S2", s2, zi))

    # per block the targets run r2k (k = b..1), t2k (k = b..1), z; for genus 2
    # this is the R1-R5 / T1-T5 order r22, r21, t22, t21, z
    short = b == 2
    for j in range(1, b + 1):
        rho: list[tuple[str, SymWord, SymWord]] = []
        tau: list[tuple[str, SymWord, SymWord]] = []
        for k in range(b, 0, -1):
            if j <= k:
                rhs: SymWord = ()
            else:
                rhs = zi + r2(k) + r2(j, -1) + z + r2(j) + r2(k, -1)
            rho.append((f"[r1{j},r2{k}]", _comm(r1(j), r2(k)), rhs))
            if j < k:
                rr: SymWord = ()
            elif j == k:
                rr = t2(j, -1) + z + t2(j)
            else:
                rr = _comm(t2(j, -1), z)
            tau.append((f"[t1{j},r2{k}]", _comm(t1(j), r2(k)), rr))
        for k in range(b, 0, -1):
            if j < k:
                rhs = ()
            elif j == k:
                rhs = zi
            else:
                rhs = _comm(zi, t2(k))
            rho.append((f"[r1{j},t2{k}]", _comm(r1(j), t2(k)), rhs))
            if j < k:
                rt: SymWord = ()
            elif j == k:
                rt = _comm(t2(j, -1), z)
            else:
                rt = (t2(j, -1) + z + t2(j) + zi + t2(k) + z + t2(j, -1) + zi
                      + t2(j) + t2(k, -1))
            tau.append((f"[t1{j},t2{k}]", _comm(t1(j), t2(k)), rt))
        rho.append((f"[r1{j},z]", _comm(r1(j), z), _comm(r2(j, -1), z)))
        tau.append((f"[t1{j},z]", _comm(t1(j), z), _comm(t2(j, -1), z)))
        for prefix, block in (("R", rho), ("T", tau)):
            for pos, (name, lhs, rhs) in enumerate(block):
                label = f"{prefix}{(j - 1) * (2 * b + 1) + pos + 1}" if short else name
                rels.append(Relation(label, lhs, rhs))
    return tuple(rels)


# -- the genus-2 table written out literally -----------------------------------

GENUS2_TABLE = """
S1: [r12^-1, t12^-1] t12^-1 [r11^-1, t11^-1] t11^-1 t11 t12 = z
S2: [r21^-1, t21] t21 [r22^-1, t22] t22 t22^-1 t21^-1 = z^-1
R1: [r11, r22] = 1
R2: [r11, r21] = 1
R3: [r11, t22] = 1
R4: [r11, t21] = z^-1
R5: [r11, z] = [r21^-1, z]
R6: [r12, r22] = 1
R7: [r12, r21] = z^-1 r21 r22^-1 z r22 r21^-1
R8: [r12, t22] = z^-1
R9: [r12, t21] = [z^-1, t21]
R10: [r12, z] = [r22^-1, z]
T1: [t11, r22] = 1
T2: [t11, r21] = t21^-1 z t21
T3: [t11, t22] = 1
T4: [t11, t21] = [t21^-1, z]
T5: [t11, z] = [t21^-1, z]
T6: [t12, r22] = t22^-1 z t22
T7: [t12, r21] = [t22^-1, z]
T8: [t12, t22] = [t22^-1, z]
T9: [t12, t21] = t22^-1 z t22 z^-1 t21 z t22^-1 z^-1 t22 t21^-1
T10: [t12, z] = [t22^-1, z]
"""

_TOKEN = re.compile(r"\[([^\]]+)\]|([rtz][0-9]*)(?:\^(-?\d+))?|(1)")


def parse_symbolic(text: str) -> SymWord:
    """Parse a word such as ``[r11^-1, t11] t11 z^-1``; ``1`` is the empty word."""
    out: SymWord = ()
    pos = 0
    text = text.strip()
    while pos < len(text):
        if text[pos].isspace():
            pos += 1
            continue
        m = _TOKEN.match(text, pos)
        if not m:
            raise ValueError(f"cannot parse word at {text[pos:]!r}")
        if m.group(1):
            a, c = m.group(1).split(",")
            out += _comm(parse_symbolic(a), parse_symbolic(c))
        elif m.group(2):
            out += ((m.group(2), int(m.group(3) or 1)),)
        pos = m.end()
    return out


def genus2_table() -> RelationSchema:
    rels = []
    for line in GENUS2_TABLE.strip().splitlines():
        label, body = line.split(":", 1)
        lhs, rhs = body.split("=")
        rels.append(Relation(label.strip(), parse_symbolic(lhs), parse_symbolic(rhs)))
    return RelationSchema(2, rels)


PRESTRUCTURE_LABELS = tuple([f"R{i}" for i in range(1, 11)] + [f"T{i}" for i in range(1, 11)])


# -- evaluation ---------------------------------------------------------------

def evaluate(G: FiniteGroup, word: SymWord, values: dict[str, int]) -> int:
    r = 0
    mul, inv = G.mul, G.inv
    for g, e in word:
        x = values[g]
        if e < 0:
            x, e = int(inv[x]), -e
        for _ in range(e):
            r = int(mul[r, x])
    return r


@dataclass
class Check:
    name: str
    passed: bool
    detail: str = ""


@dataclass
class VerifyReport:
    b: int
    require: str
    checks: list[Check] = field(default_factory=list)
    z_order: int = 0

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self) -> list[str]:
        return [c.name for c in self.checks if not c.passed]

    def lines(self) -> list[str]:
        return [f"{'ok  ' if c.passed else 'FAIL'} {c.name} {c.detail}".rstrip() for c in self.checks]


def verify_tuple(G: FiniteGroup, entries: Sequence[int], b: int = 2,
                 require: str = "structure", n: int | None = None,
                 schema: RelationSchema | None = None) -> VerifyReport:
    """Check a tuple relation by relation.

    ``require="prestructure"`` (genus 2 only) checks R1-R10, T1-T10 and
    o(z) >= 2.  ``require="structure"`` checks every relation, o(z) (equal to
    ``n`` if given, else >= 2) and that the entries generate G.
    """
    from .grouptheory import closure_mask

    if require not in ("structure", "prestructure"):
        raise ValueError(f"unknown requirement {require!r}")
    if len(entries) != 4 * b + 1:
        raise ValueError(f"tuple for genus {b} needs {4 * b + 1} entries, got {len(entries)}")
    if require == "prestructure" and b != 2:
        raise ValueError("prestructures are defined for genus 2 only")
    for a in entries:
        if not 0 <= int(a) < G.order:
            raise ValueError(f"element index {a} out of range")
    schema = schema or relation_schema(b)
    values = dict(zip(tuple_names(b), (int(a) for a in entries)))
    rep = VerifyReport(b, require)
    zo = G.order_of(values["z"])
    rep.z_order = zo
    if n is None:
        rep.checks.append(Check("o(z) >= 2", zo >= 2, f"o(z)={zo}"))
    else:
        rep.checks.append(Check(f"o(z) = {n}", zo == n and n >= 2, f"o(z)={zo}"))
    for rel in schema.relations:
        if require == "prestructure" and rel.label.startswith("S"):
            continue
        lv, rv = evaluate(G, rel.lhs, values), evaluate(G, rel.rhs, values)
        rep.checks.append(Check(rel.label, lv == rv, f"lhs={lv} rhs={rv}" if lv != rv else ""))
    if require == "structure":
        gen = closure_mask(G, [int(a) for a in entries]) == (1 << G.order) - 1
        rep.checks.append(Check("generates G", gen))
    return rep


def noncentrality_check(G: FiniteGroup, entries: Sequence[int]) -> bool:
    """True iff every entry except the last (z) is non-central."""
    from .grouptheory import center

    Z = center(G)
    return all(int(a) not in Z for a in entries[:-1])


def exponent_sums(rel: Relation) -> dict[str, int]:
    """Exponent sum of each generator in ``lhs * rhs^-1``."""
    sums: dict[str, int] = {}
    for g, e in rel.lhs + _inv(rel.rhs):
        sums[g] = sums.get(g, 0) + e
    return {g: s for g, s in sums.items() if s}


def central_twist_invariant(schema: RelationSchema) -> bool:
    """Every relator has zero exponent sum in each generator other than z.

    Then multiplying the non-z entries of a solution by central elements
    yields another solution.
    """
    return all(set(exponent_sums(r)) <= {"z"} for r in schema.relations)
