"""Screening predicates: CCT, monolithic, extra-special, nilpotency class."""

from __future__ import annotations

from dataclasses import asdict, dataclass

from . import grouptheory as gt
from .pcgroup import FiniteGroup

NOT_APPLICABLE = "n/a"
NON_NILPOTENT = "non-nilpotent"


@dataclass
class CctResult:
    value: bool | str  # True, False or NOT_APPLICABLE for abelian groups
    witness: tuple[int, int, int] | None = None

    def __bool__(self) -> bool:
        return self.value is True


def is_cct(G: FiniteGroup) -> CctResult:
    """Commutativity is transitive on non-central elements.

    Equivalent to: every non-central element has an abelian centralizer.
    On failure the witness (x, y, z) has [x,y] = [y,z] = 1 and [x,z] != 1,
    all three non-central.
    """
    if G.is_abelian:
        return CctResult(NOT_APPLICABLE)
    Z = gt.center(G).bits
    cm = gt.centralizer_masks(G)
    for y in range(G.order):
        if Z >> y & 1:
            continue
        others = [a for a in gt.bits_of(cm[y] & ~Z)]
        for x in others:
            bad = cm[y] & ~Z & ~cm[x]
            if bad:
                z = (bad & -bad).bit_length() - 1
                return CctResult(False, (x, y, z))
    return CctResult(True)


def is_monolithic(G: FiniteGroup) -> bool:
    return gt.monolith(G).bits != 1


def is_p_group(G: FiniteGroup) -> int | None:
    """The prime p if |G| is a power of p (and |G| > 1), else None."""
    n = G.order
    if n < 2:
        return None
    p = next(q for q in range(2, n + 1) if n % q == 0)
    while n % p == 0:
        n //= p
    return p if n == 1 else None


def is_extraspecial(G: FiniteGroup) -> bool:
    p = is_p_group(G)
    if p is None or G.is_abelian:
        return False
    Z = gt.center(G)
    if len(Z) != p:
        return False
    # G/Z elementary abelian: derived subgroup and p-th powers lie in Z
    if not gt.derived_subgroup(G) <= Z:
        return False
    return all(G.pow(a, p) in Z for a in range(G.order))


def lower_central_series(G: FiniteGroup) -> list[gt.ElementSet]:
    series = [gt.ElementSet((1 << G.order) - 1, G.order, is_subgroup=True, is_normal=True)]
    while True:
        cur = series[-1].array()
        comms = G.comm_table[cur].ravel()
        nxt = gt.ElementSet(gt.closure_mask(G, set(comms.tolist())), G.order,
                            is_subgroup=True, is_normal=True)
        if nxt == series[-1]:
            return series
        series.append(nxt)


def nilpotency_class(G: FiniteGroup) -> int | str:
    series = lower_central_series(G)
    if series[-1].bits != 1:
        return NON_NILPOTENT
    return len(series) - 1


@dataclass
class GroupProfile:
    order: int
    is_abelian: bool
    is_cct: bool | str
    is_monolithic: bool
    monolith_order: int
    is_extraspecial: bool
    nilpotency_class: int | str
    center_order: int
    derived_order: int
    aut_order: int | None = None
    cct_witness: list[list[int]] | None = None

    def to_dict(self) -> dict:
        return asdict(self)


def profile(G: FiniteGroup, with_aut: bool = True) -> GroupProfile:
    cct = is_cct(G)
    witness = None
    if cct.witness is not None and G.normal_forms is not None:
        witness = [list(G.normal_forms[a]) for a in cct.witness]
    elif cct.witness is not None:
        witness = [[a] for a in cct.witness]
    mon = gt.monolith(G)
    prof = GroupProfile(
        order=G.order,
        is_abelian=G.is_abelian,
        is_cct=cct.value,
        is_monolithic=mon.bits != 1,
        monolith_order=len(mon) if mon.bits != 1 else 1,
        is_extraspecial=is_extraspecial(G),
        nilpotency_class=nilpotency_class(G),
        center_order=len(gt.center(G)),
        derived_order=len(gt.derived_subgroup(G)),
        aut_order=len(gt.automorphism_group(G)) if with_aut else None,
        cct_witness=witness,
    )
    if prof.is_cct is True and prof.is_abelian:
        raise AssertionError("CCT flagged on an abelian group")
    if prof.is_extraspecial and not (prof.monolith_order == prof.center_order):
        raise AssertionError("extra-special group with monolith different from center")
    return prof
