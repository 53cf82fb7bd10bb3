"""Subgroups, normal structure, quotients, isomorphisms and automorphisms.

Element subsets are bitmasks over the element indices of one group
(bit ``a`` set means element ``a`` is a member).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Iterator, Sequence

import numpy as np

from .pcgroup import FiniteGroup, OrderCapExceeded

AUT_ORDER_CAP = 128


def mask_of(elements: Iterable[int]) -> int:
    m = 0
    for a in elements:
        m |= 1 << int(a)
    return m


def mask_from_bool(row: np.ndarray) -> int:
    return int.from_bytes(np.packbits(np.asarray(row, dtype=bool), bitorder="little").tobytes(), "little")


def bits_of(mask: int) -> list[int]:
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return out


def popcount(mask: int) -> int:
    return bin(mask).count("1")


class ElementSet:
    """A subset of a group's elements, optionally flagged as a (normal) subgroup."""

    __slots__ = ("bits", "n", "is_subgroup", "is_normal")

    def __init__(self, bits: int, n: int, *, is_subgroup: bool = False, is_normal: bool = False):
        self.bits = bits
        self.n = n
        self.is_subgroup = is_subgroup
        self.is_normal = is_normal

    @classmethod
    def of(cls, G: FiniteGroup, elements: Iterable[int], **flags) -> "ElementSet":
        return cls(mask_of(elements), G.order, **flags)

    def __contains__(self, a: int) -> bool:
        return bool(self.bits >> a & 1)

    def __iter__(self) -> Iterator[int]:
        return iter(bits_of(self.bits))

    def __len__(self) -> int:
        return popcount(self.bits)

    def __eq__(self, other) -> bool:
        if isinstance(other, ElementSet):
            return self.bits == other.bits
        return NotImplemented

    def __hash__(self) -> int:
        return hash(self.bits)

    def __le__(self, other: "ElementSet") -> bool:
        return self.bits & ~other.bits == 0

    def __and__(self, other: "ElementSet") -> "ElementSet":
        return ElementSet(self.bits & other.bits, self.n)

    def elements(self) -> list[int]:
        return bits_of(self.bits)

    def array(self) -> np.ndarray:
        return np.array(bits_of(self.bits), dtype=np.int64)

    def __repr__(self) -> str:
        return f"ElementSet(size={len(self)}, subgroup={self.is_subgroup}, normal={self.is_normal})"


# -- elementwise helpers, cached per group -----------------------------------

def _cache(G: FiniteGroup) -> dict:
    c = G.__dict__.get("_gt_cache")
    if c is None:
        c = G.__dict__["_gt_cache"] = {}
    return c


def centralizer_masks(G: FiniteGroup) -> list[int]:
    """``masks[x]`` is the centralizer of ``x`` as a bitmask."""
    c = _cache(G)
    if "cent" not in c:
        c["cent"] = [mask_from_bool(row == 0) for row in G.comm_table]
    return c["cent"]


def center(G: FiniteGroup) -> ElementSet:
    full = (1 << G.order) - 1
    z = mask_from_bool([m == full for m in centralizer_masks(G)])
    return ElementSet(z, G.order, is_subgroup=True, is_normal=True)


def centralizer(G: FiniteGroup, S) -> ElementSet:
    if isinstance(S, (int, np.integer)):
        S = [int(S)]
    elems = list(S)
    if not elems:
        raise ValueError("centralizer of an empty set is undefined here")
    cm = centralizer_masks(G)
    m = (1 << G.order) - 1
    for s in elems:
        m &= cm[s]
    return ElementSet(m, G.order, is_subgroup=True)


def closure_mask(G: FiniteGroup, gens: Iterable[int]) -> int:
    gens = np.unique(np.asarray(list(gens), dtype=np.int64))
    members = np.zeros(G.order, dtype=bool)
    members[0] = True
    if len(gens) == 0:
        return 1
    frontier = np.array([0])
    mul = G.mul
    while len(frontier):
        new = np.unique(mul[frontier][:, gens].ravel())
        new = new[~members[new]]
        members[new] = True
        frontier = new
    return mask_from_bool(members)


def subgroup_closure(G: FiniteGroup, gens: Iterable[int]) -> ElementSet:
    return ElementSet(closure_mask(G, gens), G.order, is_subgroup=True)


def derived_subgroup(G: FiniteGroup) -> ElementSet:
    c = _cache(G)
    if "derived" not in c:
        comms = np.unique(G.comm_table)
        c["derived"] = closure_mask(G, comms)
    return ElementSet(c["derived"], G.order, is_subgroup=True, is_normal=True)


def conjugacy_classes(G: FiniteGroup) -> list[list[int]]:
    c = _cache(G)
    if "classes" not in c:
        n = G.order
        mul, inv = G.mul.astype(np.int64), G.inv
        # conj[g, a] = g a g^-1
        conj = mul[mul, inv[:, None]]
        seen = np.zeros(n, dtype=bool)
        classes = []
        for a in range(n):
            if seen[a]:
                continue
            cls = np.unique(conj[:, a])
            seen[cls] = True
            classes.append(cls.tolist())
        c["classes"] = classes
    return c["classes"]


def is_subgroup_mask(G: FiniteGroup, mask: int) -> bool:
    els = np.array(bits_of(mask), dtype=np.int64)
    if not len(els) or els[0] != 0:
        return False
    inside = np.zeros(G.order, dtype=bool)
    inside[els] = True
    return bool(inside[G.mul[els][:, els]].all() and inside[G.inv[els]].all())


def is_normal_mask(G: FiniteGroup, mask: int) -> bool:
    els = np.array(bits_of(mask), dtype=np.int64)
    mul, inv = G.mul.astype(np.int64), G.inv
    conj = mul[mul[:, els], inv[:, None]]
    inside = np.zeros(G.order, dtype=bool)
    inside[els] = True
    return bool(inside[conj].all())


def _join_normal(G: FiniteGroup, a: int, b: int) -> int:
    A, B = np.array(bits_of(a)), np.array(bits_of(b))
    prods = np.unique(G.mul[A][:, B].ravel())
    return mask_of(prods.tolist())


def normal_subgroups(G: FiniteGroup) -> list[ElementSet]:
    c = _cache(G)
    if "normals" not in c:
        seeds = {closure_mask(G, cls) for cls in conjugacy_classes(G)}
        found = set(seeds)
        frontier = set(seeds)
        while frontier:
            new = set()
            for a in frontier:
                for b in seeds:
                    j = _join_normal(G, a, b)
                    if j not in found:
                        new.add(j)
            found |= new
            frontier = new
        c["normals"] = sorted(found, key=lambda m: (popcount(m), m))
    return [ElementSet(m, G.order, is_subgroup=True, is_normal=True) for m in c["normals"]]


def monolith(G: FiniteGroup) -> ElementSet:
    m = (1 << G.order) - 1
    for N in normal_subgroups(G):
        if N.bits != 1:
            m &= N.bits
    return ElementSet(m, G.order, is_subgroup=True, is_normal=True)


def minimal_normal_subgroups(G: FiniteGroup) -> list[ElementSet]:
    nontriv = [N for N in normal_subgroups(G) if N.bits != 1]
    return [N for N in nontriv if not any(M.bits != N.bits and M <= N for M in nontriv)]


@dataclass
class QuotientMap:
    source: FiniteGroup
    target: FiniteGroup
    proj: np.ndarray
    kernel: ElementSet

    def __call__(self, a: int) -> int:
        return int(self.proj[a])

    def lift(self, b: int) -> int:
        """Least element index in the coset over ``b``."""
        return int(np.nonzero(self.proj == b)[0][0])


def quotient(G: FiniteGroup, N: ElementSet, label: str | None = None) -> QuotientMap:
    if not is_subgroup_mask(G, N.bits):
        raise ValueError("N is not a subgroup")
    if not is_normal_mask(G, N.bits):
        raise ValueError("N is not normal")
    n = G.order
    ker = N.array()
    proj = -np.ones(n, dtype=np.int64)
    reps = []
    for a in range(n):
        if proj[a] < 0:
            proj[G.mul[a, ker]] = len(reps)
            reps.append(a)
    reps = np.array(reps)
    mul = proj[G.mul[reps[:, None], reps[None, :]]]
    H = FiniteGroup(mul, label=label or f"{G.label}/N")
    return QuotientMap(G, H, proj, N)


# -- homomorphism search -------------------------------------------------------

def element_signatures(G: FiniteGroup) -> list[tuple]:
    """Automorphism-invariant data per element, used to prune image candidates."""
    c = _cache(G)
    if "sig" not in c:
        cm = centralizer_masks(G)
        Z = center(G).bits
        D = derived_subgroup(G).bits
        orders = G.element_orders
        sq = np.bincount(G.mul[np.arange(G.order), np.arange(G.order)].astype(np.int64),
                         minlength=G.order)
        cls_size = {}
        for cls in conjugacy_classes(G):
            for a in cls:
                cls_size[a] = len(cls)
        c["sig"] = [(int(orders[a]), popcount(cm[a]), Z >> a & 1, D >> a & 1,
                     int(sq[a]), cls_size[a]) for a in range(G.order)]
    return c["sig"]


def group_invariants(G: FiniteGroup) -> tuple:
    sigs = element_signatures(G)
    return (G.order, tuple(sorted(sigs)), len(center(G)), len(derived_subgroup(G)))


def small_generating_set(G: FiniteGroup) -> list[int]:
    """Greedy generating set; prefers elements of large order."""
    order = sorted(range(1, G.order), key=lambda a: (-int(G.element_orders[a]), a))
    gens: list[int] = []
    current = 1
    full = (1 << G.order) - 1
    while current != full:
        best, best_mask = None, current
        for a in order:
            if current >> a & 1:
                continue
            m = closure_mask(G, gens + [a])
            if popcount(m) > popcount(best_mask):
                best, best_mask = a, m
        gens.append(best)
        current = best_mask
    return gens


def _extend_hom(G: FiniteGroup, H: FiniteGroup, gens: Sequence[int], images: Sequence[int],
                phi: np.ndarray) -> bool:
    """Extend partial map ``phi`` (-1 = undefined) over <gens> by BFS; False on conflict."""
    known = np.nonzero(phi >= 0)[0]
    frontier = list(known) if len(known) else [0]
    if phi[0] < 0:
        phi[0] = 0
    gmul, hmul = G.mul, H.mul
    while frontier:
        nxt = []
        for x in frontier:
            fx = phi[x]
            for g, h in zip(gens, images):
                y = gmul[x, g]
                fy = hmul[fx, h]
                if phi[y] < 0:
                    phi[y] = fy
                    nxt.append(y)
                elif phi[y] != fy:
                    return False
        frontier = nxt
    return True


def _hom_search(G: FiniteGroup, H: FiniteGroup, find_all: bool) -> list[np.ndarray]:
    gens = small_generating_set(G)
    gs, hs = element_signatures(G), element_signatures(H)
    cands = [[b for b in range(H.order) if hs[b] == gs[a]] for a in gens]
    results: list[np.ndarray] = []

    def rec(level: int, phi: np.ndarray, images: list[int]) -> bool:
        if level == len(gens):
            if len(np.unique(phi)) == H.order:
                results.append(phi.copy())
                return not find_all
            return False
        for b in cands[level]:
            trial = phi.copy()
            imgs = images + [b]
            if not _extend_hom(G, H, gens[:level + 1], imgs, trial):
                continue
            # injectivity on the subgroup generated so far
            defined = trial[trial >= 0]
            if len(np.unique(defined)) != len(defined):
                continue
            if rec(level + 1, trial, imgs):
                return True
        return False

    rec(0, -np.ones(G.order, dtype=np.int64), [])
    return results


def is_isomorphic(G: FiniteGroup, H: FiniteGroup) -> np.ndarray | None:
    """An isomorphism ``G -> H`` as an index map, or ``None``."""
    if G.order != H.order or group_invariants(G) != group_invariants(H):
        return None
    found = _hom_search(G, H, find_all=False)
    return found[0] if found else None


class AutGroup:
    """All automorphisms of a group as rows of a permutation array."""

    def __init__(self, G: FiniteGroup, perms: np.ndarray):
        order = np.lexsort(perms.T[::-1])
        self.group = G
        self.elements = perms[order]
        self.elements.setflags(write=False)

    def __len__(self) -> int:
        return len(self.elements)

    @property
    def order(self) -> int:
        return len(self.elements)

    @cached_property
    def index(self) -> dict[bytes, int]:
        return {row.tobytes(): i for i, row in enumerate(self.elements)}

    def contains(self, perm: np.ndarray) -> bool:
        return np.asarray(perm, dtype=self.elements.dtype).tobytes() in self.index

    @cached_property
    def generators(self) -> list[int]:
        """Indices (into ``elements``) of a generating sublist."""
        n = self.order
        if n == 1:
            return []
        gens: list[int] = []
        have = {self.elements[0].tobytes()}  # identity sorts first
        rng = np.random.default_rng(0)
        while len(have) < n:
            candidates = [i for i in rng.permutation(n) if self.elements[i].tobytes() not in have]
            g = int(candidates[0])
            gens.append(g)
            have = self._closure([self.elements[i] for i in gens])
        return sorted(gens)

    def _closure(self, gens: list[np.ndarray]) -> set[bytes]:
        ident = np.arange(self.group.order, dtype=self.elements.dtype)
        have = {ident.tobytes()}
        frontier = [ident]
        while frontier:
            nxt = []
            for p in frontier:
                for g in gens:
                    q = g[p]
                    key = q.tobytes()
                    if key not in have:
                        have.add(key)
                        nxt.append(q)
            frontier = nxt
        return have


def automorphism_group(G: FiniteGroup, max_order: int | None = None) -> AutGroup:
    cap = AUT_ORDER_CAP if max_order is None else max_order
    if G.order > cap:
        raise OrderCapExceeded(f"{G.label}: automorphism search capped at order {cap}")
    c = _cache(G)
    if "aut" not in c:
        if G.source is not None and G.normal_forms is not None:
            perms = _pc_automorphisms(G)
        else:
            perms = np.array(_hom_search(G, G, find_all=True), dtype=np.int64)
        dtype = np.int16 if G.order > 127 else np.int8
        c["aut"] = AutGroup(G, perms.astype(dtype))
    return c["aut"]


def _pc_automorphisms(G: FiniteGroup) -> np.ndarray:
    """Backtrack over images of x_k, ..., x_1, checking the defining relations.

    Relations for x_i only involve x_i and higher generators, so each level is
    checkable as soon as it is assigned.  A map satisfying every relation is a
    homomorphism; injectivity is kept level by level (x_i's image must lie
    outside the image of <x_{i+1},...,x_k>), so every leaf is an automorphism.
    """
    pres = G.source
    k, p = pres.k, pres.rel_orders
    gens = G.generator_elements
    sigs = element_signatures(G)
    cands = [[b for b in range(G.order) if sigs[b] == sigs[gens[i]]] for i in range(k)]
    mul = G.mul.astype(np.int64)
    N = G.order
    maxp = max(p)
    # powtab[a, e] = a^e
    powtab = np.zeros((N, max(maxp, int(G.element_orders.max())) + 1), dtype=np.int64)
    for e in range(1, powtab.shape[1]):
        powtab[:, e] = mul[powtab[:, e - 1], np.arange(N)]

    def ev(word, phi):
        r = 0
        for g, e in word.letters:
            r = int(mul[r, G.pow(phi[g - 1], e)])
        return r

    nf = np.array(G.normal_forms, dtype=np.int64)
    leaves: list[np.ndarray] = []
    phi = [0] * k

    def rec(i: int, image: np.ndarray):
        # i is 0-based generator being assigned; image = bool mask of phi(G_{i+1})
        if i < 0:
            perm = np.zeros(N, dtype=np.int64)
            for g in range(k):
                perm = mul[perm, powtab[phi[g], nf[:, g]]]
            leaves.append(perm)
            return
        pw = ev(pres.power_word(i + 1), phi)
        targets = [(j, ev(pres.comm_word(i + 1, j + 1), phi)) for j in range(i + 1, k)]
        for y in cands[i]:
            if image[y]:
                continue
            if powtab[y, p[i]] != pw:
                continue
            if any(G.commutator(y, phi[j]) != w for j, w in targets):
                continue
            phi[i] = y
            new = np.zeros(N, dtype=bool)
            cur = np.nonzero(image)[0]
            for e in range(p[i]):
                new[mul[powtab[y, e], cur]] = True
            rec(i - 1, new)

    start = np.zeros(N, dtype=bool)
    start[0] = True
    rec(k - 1, start)
    return np.array(leaves, dtype=np.int64)


def apply_automorphism(perm: np.ndarray, elements: Sequence[int]) -> list[int]:
    return [int(perm[a]) for a in elements]
