"""Counting prestructures and structures in a finite group.

Tuples are ordered (r11, t11, r12, t12, r21, t21, r22, t22, z).  Each of the
relations R1-R10, T1-T10 has a single first-row unknown on its left, so for
a fixed prefix (z, r21, t21, r22, t22) the admissible values of r11, t11,
r12, t12 form four independent candidate sets A, B, C, D, each an
intersection of sets {x : [x, y] = w}.  The engine walks prefixes level by
level, keeping one representative per orbit of the prefix stabilizer in
Aut(G), and weighs each complete prefix by orbit-stabilizer.
"""

from __future__ import annotations

import os
import random
import time
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import grouptheory as gt
from .braid import central_twist_invariant, genus2_table, relation_schema, verify_tuple
from .pcgroup import FiniteGroup, OrderCapExceeded, order_cap
from .predicates import is_cct, is_monolithic

KINDS = ("prestructures", "structures")
EXACT_ORDER_CAP = 128


class InvariantViolation(AssertionError):
    """An internal consistency check failed; results cannot be trusted."""


@dataclass
class SearchOptions:
    kind: str = "prestructures"
    n_filter: int | None = None
    mode: str = "exact"
    worker_count: int = 1
    emit_representatives: bool = False
    # without Aut reduction only totals are produced (cross-check path)
    reduce: bool = True

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}")
        if self.mode not in ("exact", "lift"):
            raise ValueError("mode must be 'exact' or 'lift'")
        if self.worker_count < 1:
            raise ValueError("worker_count must be positive")


@dataclass
class SearchReport:
    label: str
    kind: str
    total_count: int
    orbit_count: int | None
    orbit_stabilizer_histogram: dict[int, int]
    n_values_seen: list[int]
    z_always_central: bool
    k_centralizer_always_center: bool
    aut_order: int | None = None
    k_orders_seen: list[int] = field(default_factory=list)
    z_in_monolith: bool | None = None
    representatives: list[tuple[int, ...]] | None = None
    representative_stabilizers: list[int] | None = None
    mode: str = "exact"
    prefix_nodes: int = 0
    notes: list[str] = field(default_factory=list)
    elapsed: float = 0.0

    def to_dict(self, group: FiniteGroup | None = None) -> dict:
        d = {
            "kind": self.kind,
            "mode": self.mode,
            "total": self.total_count,
            "orbits": self.orbit_count,
            "stabilizer_histogram": {str(k): v for k, v in sorted(self.orbit_stabilizer_histogram.items())},
            "n_values": list(self.n_values_seen),
            "flags": {
                "z_always_central": self.z_always_central,
                "k_centralizer_always_center": self.k_centralizer_always_center,
                "z_in_monolith": self.z_in_monolith,
            },
            "k_orders": list(self.k_orders_seen),
            "aut_order": self.aut_order,
            "notes": list(self.notes),
        }
        if self.representatives is not None:
            if group is not None and group.normal_forms is not None:
                d["representatives"] = [format_tuple(group, t) for t in self.representatives]
            else:
                d["representatives"] = [list(t) for t in self.representatives]
        return d


def format_tuple(G: FiniteGroup, entries: Sequence[int]) -> str:
    """Semicolon-separated exponent vectors, the portable tuple format."""
    return ";".join(",".join(str(e) for e in G.normal_forms[a]) for a in entries)


def parse_tuple(G: FiniteGroup, text: str) -> list[int]:
    out = []
    for part in text.strip().split(";"):
        vec = tuple(int(v) for v in part.split(","))
        out.append(G.element_from_vector(vec))
    return out


# -- the staged engine ----------------------------------------------------------

class _Accumulator:
    def __init__(self):
        self.total = 0
        self.orbits = 0
        self.hist: Counter = Counter()
        self.n_values: set[int] = set()
        self.z_central = True
        self.z_in_mon = True
        self.k_center = True
        self.k_orders: set[int] = set()
        self.reps: list[tuple[tuple[int, ...], int]] = []
        self.nodes = 0

    def merge(self, other: "_Accumulator") -> None:
        self.total += other.total
        self.orbits += other.orbits
        self.hist.update(other.hist)
        self.n_values |= other.n_values
        self.z_central &= other.z_central
        self.z_in_mon &= other.z_in_mon
        self.k_center &= other.k_center
        self.k_orders |= other.k_orders
        self.reps.extend(other.reps)
        self.nodes += other.nodes


class Engine:
    """Prefix walker for one group.  ``perms`` is the full Aut(G) or None."""

    def __init__(self, G: FiniteGroup, perms: np.ndarray | None, kind: str,
                 n_filter: int | None = None, universe: int | None = None,
                 emit: bool = False):
        self.G = G
        self.kind = kind
        self.n_filter = n_filter
        self.emit = emit
        n = G.order
        self.N = n
        self.full = (1 << n) - 1
        self.U = self.full if universe is None else universe
        self.mul = G.mul.astype(np.int64).tolist()
        self.inv = [int(a) for a in G.inv]
        comm = G.comm_table
        self.comm = comm.tolist()
        self.cent = gt.centralizer_masks(G)
        self.Z = gt.center(G).bits
        self.mon = gt.monolith(G).bits
        self.orders = [int(o) for o in G.element_orders]
        # mcol[y][w] = {x : [x, y] = w}
        self.mcol: list[dict[int, int]] = []
        for y in range(n):
            col = comm[:, y]
            d: dict[int, int] = {}
            for w in np.unique(col):
                d[int(w)] = gt.mask_from_bool(col == w)
            self.mcol.append(d)
        self.perms = perms
        self.aut_order = None if perms is None else len(perms)
        self.noncentral = self.U & ~self.Z
        self._join_cache: dict[tuple[int, int], int] = {}
        self._subgroup_cache: dict[tuple, int] = {}
        self._pair_cache: dict[tuple[int, int], int] = {}
        self._k_seen: dict[int, bool] = {}

    # small helpers on Python lists
    def m(self, a: int, b: int) -> int:
        return self.mul[a][b]

    def M(self, y: int, w: int) -> int:
        return self.mcol[y].get(w, 0)

    def c(self, a: int, b: int) -> int:
        return self.comm[a][b]

    def reps(self, cands: list[int], S: np.ndarray | None) -> list[int]:
        if S is None or len(S) == 1 or not cands:
            return cands
        X = np.array(cands, dtype=np.int64)
        imgs = self.perms[np.ix_(S, X)]
        keep = imgs.min(axis=0) == X
        return X[keep].tolist()

    def stab(self, S: np.ndarray | None, x: int) -> np.ndarray | None:
        if S is None or len(S) == 1:
            return S
        return S[self.perms[S, x] == x]

    # -- levels ------------------------------------------------------------
    def z_candidates(self) -> list[int]:
        D = gt.derived_subgroup(self.G).bits & self.U
        out = []
        for z in gt.bits_of(D):
            o = self.orders[z]
            if o < 2 or (self.n_filter is not None and o != self.n_filter):
                continue
            out.append(z)
        return out

    def level1(self, z: int, S0) -> list[tuple[int, int]]:
        """(r21, partial A) pairs with nonempty partial candidate set for r11."""
        inv, out = self.inv, []
        for r21 in gt.bits_of(self.noncentral):
            A1 = self.cent[r21] & self.M(z, self.c(inv[r21], z)) & self.U
            if A1:
                out.append((r21, A1))
        keep = set(self.reps([r for r, _ in out], S0))
        return [(r, a) for r, a in out if r in keep]

    def run_prefix(self, z: int, r21: int, A1: int, S1, acc: _Accumulator) -> None:
        inv, M, c, m = self.inv, self.M, self.c, self.m
        zi = inv[z]
        r21i = inv[r21]
        found = []
        for t21 in gt.bits_of(self.noncentral):
            A2 = A1 & M(t21, zi)
            if not A2:
                continue
            t21i = inv[t21]
            w = c(t21i, z)
            B2 = M(r21, m(m(t21i, z), t21)) & M(t21, w) & M(z, w) & self.U
            if B2:
                found.append((t21, A2, B2))
        keep = set(self.reps([t for t, _, _ in found], S1))
        for t21, A2, B2 in found:
            if t21 not in keep:
                continue
            S2 = self.stab(S1, t21)
            t21i = inv[t21]
            level3 = []
            for r22 in gt.bits_of(self.noncentral):
                cr = self.cent[r22]
                A3, B3 = A2 & cr, B2 & cr
                if not (A3 and B3):
                    continue
                r22i = inv[r22]
                w7 = m(m(m(m(m(zi, r21), r22i), z), r22), r21i)
                C3 = cr & M(r21, w7) & M(t21, c(zi, t21)) & M(z, c(r22i, z)) & self.U
                if C3:
                    level3.append((r22, A3, B3, C3))
            keep3 = set(self.reps([r for r, *_ in level3], S2))
            for r22, A3, B3, C3 in level3:
                if r22 not in keep3:
                    continue
                S3 = self.stab(S2, r22)
                r22i = inv[r22]
                level4 = []
                for t22 in gt.bits_of(self.noncentral):
                    ct = self.cent[t22]
                    A, B = A3 & ct, B3 & ct
                    if not (A and B):
                        continue
                    C = C3 & M(t22, zi)
                    if not C:
                        continue
                    t22i = inv[t22]
                    w = c(t22i, z)
                    t9 = t22i
                    for g in (z, t22, zi, t21, z, t22i, zi, t22, t21i):
                        t9 = m(t9, g)
                    D = (M(r22, m(m(t22i, z), t22)) & M(r21, w) & M(t22, w)
                         & M(t21, t9) & M(z, w) & self.U)
                    if not D:
                        continue
                    if self.kind == "structures":
                        # [r21^-1, t21] t21 [r22^-1, t22] t21^-1 = z^-1
                        s2 = m(m(m(c(r21i, t21), t21), c(r22i, t22)), t21i)
                        if s2 != zi:
                            continue
                    level4.append((t22, A, B, C, D))
                keep4 = set(self.reps([t for t, *_ in level4], S3))
                for t22, A, B, C, D in level4:
                    if t22 not in keep4:
                        continue
                    S4 = self.stab(S3, t22)
                    acc.nodes += 1
                    prefix = (z, r21, t21, r22, t22)
                    before = acc.total
                    if self.kind == "prestructures":
                        self.leaf_pre(prefix, (A, B, C, D), S4, acc)
                    else:
                        self.leaf_struct(prefix, (A, B, C, D), S4, acc)
                    if acc.total != before:
                        self.note_flags(z, (A, B, C, D), acc)

    def note_flags(self, z: int, sets, acc: _Accumulator) -> None:
        acc.n_values.add(self.orders[z])
        if not self.Z >> z & 1:
            acc.z_central = False
        if not self.mon >> z & 1:
            acc.z_in_mon = False
        # K = <r11, t11, r12, t12> over every tuple at this prefix
        A, B, C, D = (gt.bits_of(x) for x in sets)
        ab = {self.pair_subgroup(a, b) for a in A for b in B}
        cd = {self.pair_subgroup(x, y) for x in C for y in D}
        for h in ab:
            for k in cd:
                K = self.join(h, k)
                if K not in self._k_seen:
                    self._k_seen[K] = self.centralizer_of(K) == self.Z
                acc.k_orders.add(gt.popcount(K))
                if not self._k_seen[K]:
                    acc.k_center = False

    def pair_subgroup(self, a: int, b: int) -> int:
        key = (a, b) if a < b else (b, a)
        got = self._pair_cache.get(key)
        if got is None:
            got = self._pair_cache[key] = gt.closure_mask(self.G, key)
        return got

    def centralizer_of(self, K: int) -> int:
        c = self.full
        for x in gt.bits_of(K):
            c &= self.cent[x]
        return c

    def _weight(self, S) -> int:
        if S is None:
            return 1
        q, r = divmod(self.aut_order, len(S))
        if r:
            raise InvariantViolation("stabilizer order does not divide |Aut(G)|")
        return q

    def leaf_pre(self, prefix, sets, S, acc: _Accumulator) -> None:
        sizes = [gt.popcount(s) for s in sets]
        prod = sizes[0] * sizes[1] * sizes[2] * sizes[3]
        acc.total += prod * self._weight(S)
        if S is None:
            return
        arrs = [np.array(gt.bits_of(s), dtype=np.int64) for s in sets]
        msize = len(S)
        if msize == 1:
            acc.orbits += prod
            acc.hist[1] += prod
            if self.emit:
                for t in _product(arrs):
                    acc.reps.append((tuple(t) + _reorder(prefix), 1))
            return
        fixed = [(self.perms[np.ix_(S, a)] == a).T for a in arrs]  # (|X|, |S|)
        ab = (fixed[0][:, None, :] & fixed[1][None, :, :]).reshape(-1, msize).astype(np.int32)
        cd = (fixed[2][:, None, :] & fixed[3][None, :, :]).reshape(-1, msize).astype(np.int32)
        st = ab @ cd.T  # number of automorphisms in S fixing each tuple
        counts = np.bincount(st.ravel(), minlength=msize + 1)
        for s in np.nonzero(counts)[0]:
            n_orbits, r = divmod(int(counts[s]) * int(s), msize)
            if r:
                raise InvariantViolation("orbit count is not an integer")
            acc.hist[int(s)] += n_orbits
            acc.orbits += n_orbits
        if self.emit:
            tuples = np.array(list(_product(arrs)), dtype=np.int64)
            stabs = st.ravel()
            for t, s in zip(tuples[self._lexmin_mask(tuples, S)], stabs[self._lexmin_mask(tuples, S)]):
                acc.reps.append((tuple(int(v) for v in t) + _reorder(prefix), int(s)))

    def _lexmin_mask(self, tuples: np.ndarray, S: np.ndarray) -> np.ndarray:
        """Tuples that are lexicographically least in their S-orbit."""
        imgs = self.perms[S][:, tuples]  # (|S|, n, 4)
        n = len(tuples)
        keep = np.ones(n, dtype=bool)
        less = np.zeros((len(S), n), dtype=bool)
        eq = np.ones((len(S), n), dtype=bool)
        for col in range(tuples.shape[1]):
            less |= eq & (imgs[:, :, col] < tuples[None, :, col])
            eq &= imgs[:, :, col] == tuples[None, :, col]
        keep &= ~less.any(axis=0)
        return keep

    def subgroup(self, gens: tuple) -> int:
        key = gens
        got = self._subgroup_cache.get(key)
        if got is None:
            got = self._subgroup_cache[key] = gt.closure_mask(self.G, gens)
        return got

    def join(self, h: int, k: int) -> int:
        if h | k == h:
            return h
        if h | k == k:
            return k
        key = (h, k) if h < k else (k, h)
        got = self._join_cache.get(key)
        if got is None:
            got = self._join_cache[key] = gt.closure_mask(self.G, gt.bits_of(h | k))
        return got

    def join_elt(self, h: int, x: int) -> int:
        if h >> x & 1:
            return h
        key = (h, -1 - x)
        got = self._join_cache.get(key)
        if got is None:
            got = self._join_cache[key] = gt.closure_mask(self.G, gt.bits_of(h) + [x])
        return got

    def leaf_struct(self, prefix, sets, S, acc: _Accumulator) -> None:
        z = prefix[0]
        inv, c, m = self.inv, self.c, self.m
        A, B, C, D = (gt.bits_of(s) for s in sets)
        H0 = self.subgroup(tuple(sorted(set(prefix))))
        left: dict[tuple[int, int], list] = {}
        for a in A:
            Ha = self.join_elt(H0, a)
            for b in B:
                key = (c(inv[a], inv[b]), self.join_elt(Ha, b))
                left.setdefault(key, []).append((a, b))
        right: dict[tuple[int, int], list] = {}
        for x in C:
            Hx = self.join_elt(H0, x)
            for y in D:
                q = c(inv[x], inv[y])
                target = m(m(m(y, inv[q]), z), inv[y])
                key = (target, self.join_elt(Hx, y))
                right.setdefault(key, []).append((x, y))
        by_p: dict[int, list] = {}
        for (p, h), pairs in right.items():
            by_p.setdefault(p, []).append((h, pairs))
        count = 0
        matched = []
        for (p, h1), lpairs in left.items():
            for h2, rpairs in by_p.get(p, ()):
                if self.join(h1, h2) == self.full:
                    count += len(lpairs) * len(rpairs)
                    if self.emit:
                        matched.append((lpairs, rpairs))
        if not count:
            return
        acc.total += count * self._weight(S)
        if S is None:
            return
        n_orbits, r = divmod(count, len(S))
        if r:
            raise InvariantViolation("generating tuples with nontrivial stabilizer")
        acc.orbits += n_orbits
        acc.hist[1] += n_orbits
        if self.emit:
            tuples = np.array([(a, b, x, y) for lp, rp in matched for a, b in lp for x, y in rp],
                              dtype=np.int64)
            if len(S) > 1:
                tuples = tuples[self._lexmin_mask(tuples, S)]
            if len(tuples) != n_orbits:
                raise InvariantViolation("representative count differs from orbit count")
            for t in tuples:
                acc.reps.append((tuple(int(v) for v in t) + _reorder(prefix), 1))


def _reorder(prefix: tuple) -> tuple:
    z, r21, t21, r22, t22 = prefix
    return (r21, t21, r22, t22, z)


def _product(arrs: list[np.ndarray]) -> Iterable[tuple]:
    import itertools
    return itertools.product(*(a.tolist() for a in arrs))


# -- worker plumbing ---------------------------------------------------------

_WORKER_ENGINE: Engine | None = None


def _worker_init(mul, perms, kind, n_filter, universe, emit, label):
    global _WORKER_ENGINE
    G = FiniteGroup(mul, label=label, validate=False)
    _WORKER_ENGINE = Engine(G, perms, kind, n_filter, universe, emit)


def _worker_task(task):
    z, r21, A1, S1 = task
    acc = _Accumulator()
    _WORKER_ENGINE.run_prefix(z, r21, A1, S1, acc)
    return acc


def _run_engine(engine: Engine, workers: int) -> _Accumulator:
    tasks = []
    S_all = None if engine.perms is None else np.arange(len(engine.perms))
    for z in engine.reps(engine.z_candidates(), S_all):
        S0 = engine.stab(S_all, z)
        for r21, A1 in engine.level1(z, S0):
            tasks.append((z, r21, A1, engine.stab(S0, r21)))
    acc = _Accumulator()
    if workers <= 1 or len(tasks) < 2:
        for z, r21, A1, S1 in tasks:
            engine.run_prefix(z, r21, A1, S1, acc)
        return acc
    G = engine.G
    with ProcessPoolExecutor(max_workers=workers, initializer=_worker_init,
                             initargs=(G.mul, engine.perms, engine.kind, engine.n_filter,
                                       engine.U, engine.emit, G.label)) as ex:
        # results come back in task order, so the merge is deterministic
        for part in ex.map(_worker_task, tasks, chunksize=max(1, len(tasks) // (8 * workers))):
            acc.merge(part)
    return acc


def _check_cap(G: FiniteGroup) -> None:
    cap = min(EXACT_ORDER_CAP, order_cap())
    if G.order > cap:
        raise OrderCapExceeded(f"{G.label}: order {G.order} exceeds the exact-search cap {cap}")


def _search(G: FiniteGroup, opts: SearchOptions) -> SearchReport:
    _check_cap(G)
    t0 = time.perf_counter()
    perms = None
    aut_order = None
    if opts.reduce:
        aut = gt.automorphism_group(G, max_order=EXACT_ORDER_CAP)
        perms = aut.elements.astype(np.int64)
        aut_order = len(aut)
    notes: list[str] = []
    D = gt.derived_subgroup(G)
    if len(D) == 1 or (opts.n_filter is not None and len(D) % opts.n_filter):
        notes.append("short-circuit: no admissible order for z in the derived subgroup")
        return SearchReport(G.label, opts.kind, 0, 0 if opts.reduce else None, {}, [], True, True,
                            aut_order, None, [] if opts.emit_representatives else None,
                            [] if opts.emit_representatives else None,
                            prefix_nodes=0, notes=notes, elapsed=time.perf_counter() - t0)
    engine = Engine(G, perms, opts.kind, opts.n_filter, emit=opts.emit_representatives and opts.reduce)
    acc = _run_engine(engine, opts.worker_count)
    report = SearchReport(
        label=G.label, kind=opts.kind, total_count=acc.total,
        orbit_count=acc.orbits if opts.reduce else None,
        orbit_stabilizer_histogram=dict(sorted(acc.hist.items())),
        n_values_seen=sorted(acc.n_values),
        z_always_central=acc.z_central,
        k_centralizer_always_center=acc.k_center,
        aut_order=aut_order,
        k_orders_seen=sorted(acc.k_orders),
        z_in_monolith=acc.z_in_mon if is_monolithic(G) else None,
        prefix_nodes=acc.nodes, notes=notes,
    )
    if opts.emit_representatives and opts.reduce:
        reps = sorted(acc.reps)
        report.representatives = [t for t, _ in reps]
        report.representative_stabilizers = [s for _, s in reps]
    if opts.reduce:
        check_orbit_identity(report)
    if report.z_in_monolith is False:
        raise InvariantViolation(f"{G.label}: z outside the monolith of a monolithic group")
    for n in report.n_values_seen:
        if len(D) % n:
            raise InvariantViolation(f"{G.label}: o(z) = {n} does not divide |[G,G]|")
    report.elapsed = time.perf_counter() - t0
    return report


def check_orbit_identity(report: SearchReport) -> None:
    """sum over orbits of |Aut|/|stab| must equal the total, exactly."""
    s = 0
    for stab, n in report.orbit_stabilizer_histogram.items():
        q, r = divmod(report.aut_order, stab)
        if r:
            raise InvariantViolation("stabilizer order does not divide |Aut(G)|")
        s += n * q
    if s != report.total_count:
        raise InvariantViolation(
            f"{report.label}: orbit-weighted total {s} != factorized total {report.total_count}")
    if report.orbit_count != sum(report.orbit_stabilizer_histogram.values()):
        raise InvariantViolation("histogram does not sum to the orbit count")


def enumerate_prestructures(G: FiniteGroup, opts: SearchOptions | None = None) -> SearchReport:
    opts = opts or SearchOptions()
    opts = SearchOptions(**{**opts.__dict__, "kind": "prestructures"})
    return _search(G, opts)


def enumerate_structures(G: FiniteGroup, opts: SearchOptions | None = None) -> SearchReport:
    opts = opts or SearchOptions(kind="structures")
    opts = SearchOptions(**{**opts.__dict__, "kind": "structures"})
    return _search(G, opts)


def count_in_subgroup(G: FiniteGroup, universe: int, kind: str = "prestructures",
                      n_filter: int | None = None) -> int:
    """Number of tuples with every entry inside ``universe`` (no Aut reduction)."""
    engine = Engine(G, None, kind, n_filter, universe=universe)
    return _run_engine(engine, 1).total


def burnside_orbit_count(G: FiniteGroup, kind: str = "prestructures",
                         n_filter: int | None = None) -> int:
    """Orbits as (1/|Aut|) * sum over automorphisms of fixed tuple counts.

    A tuple is fixed by an automorphism iff all its entries lie in the
    automorphism's fixed-point subgroup, so automorphisms are grouped by
    that subgroup and each distinct subgroup is counted once.
    """
    aut = gt.automorphism_group(G)
    perms = aut.elements.astype(np.int64)
    ident = np.arange(G.order)
    by_fixed: Counter = Counter(gt.mask_from_bool(row == ident) for row in perms)
    s = 0
    for mask, mult in by_fixed.items():
        s += mult * count_in_subgroup(G, mask, kind, n_filter)
    q, r = divmod(s, len(aut))
    if r:
        raise InvariantViolation("Burnside sum not divisible by |Aut(G)|")
    return q


def reduce_mod_aut(G: FiniteGroup, tuples: Sequence[Sequence[int]],
                   aut: gt.AutGroup | None = None) -> dict:
    """Partition explicit tuples into Aut(G)-orbits.

    Returns ``{"orbits": [(representative, stabilizer_order, size), ...],
    "histogram": {stab: count}}``.  The representative is the
    lexicographically least member of the orbit found in the input.
    """
    aut = aut or gt.automorphism_group(G)
    if aut.group is not G and aut.group.order != G.order:
        raise ValueError("automorphism group of a different group")
    perms = aut.elements.astype(np.int64)
    seen: dict[tuple, int] = {}
    orbits = []
    for t in sorted(tuple(int(a) for a in t) for t in tuples):
        if t in seen:
            continue
        arr = np.array(t, dtype=np.int64)
        imgs = perms[:, arr]
        stab = int((imgs == arr).all(axis=1).sum())
        members = {tuple(row) for row in imgs.tolist()}
        for mbr in members:
            seen[mbr] = len(orbits)
        orbits.append((t, stab, len(members)))
    hist = Counter(s for _, s, _ in orbits)
    return {"orbits": orbits, "histogram": dict(sorted(hist.items()))}


# -- obstruction and screening -----------------------------------------------

@dataclass
class ObstructionResult:
    obstructs: bool
    k_order: int
    centralizer_order: int
    center_order: int


def extension_obstruction(G: FiniteGroup, entries: Sequence[int]) -> ObstructionResult:
    """K = <r11, t11, r12, t12>; C_G(K) = Z(G) rules out extensions to higher genus."""
    K = gt.subgroup_closure(G, [int(a) for a in entries[:4]])
    C = gt.centralizer(G, K.elements())
    Z = gt.center(G)
    return ObstructionResult(C == Z, len(K), len(C), len(Z))


@dataclass
class ScreenVerdict:
    admits_prestructures: bool | None  # None: a search is required
    reason: str
    quotients: list[dict] = field(default_factory=list)


def screen_group(G: FiniteGroup, search_quotients: bool = True,
                 known: Sequence[tuple[str, FiniteGroup]] = ()) -> ScreenVerdict:
    """Decide cheaply whether G can carry prestructures.

    Abelian and CCT groups cannot.  A non-monolithic group carrying a
    prestructure has a minimal normal subgroup avoiding z, hence a proper
    quotient carrying one; if no such quotient does, G does not either.
    """
    if G.is_abelian:
        return ScreenVerdict(False, "abelian")
    if bool(is_cct(G)):
        return ScreenVerdict(False, "CCT")
    if is_monolithic(G):
        return ScreenVerdict(None, "monolithic: search required, z must lie in the monolith")
    quotients = []
    any_admits = False
    for N in gt.minimal_normal_subgroups(G):
        q = gt.quotient(G, N)
        H = q.target
        match = next((lbl for lbl, K in known if K.order == H.order and gt.is_isomorphic(H, K) is not None), None)
        sub = screen_group(H, search_quotients, known)
        admits = sub.admits_prestructures
        if admits is None and search_quotients:
            admits = enumerate_prestructures(H).total_count > 0
        gens = sorted({tuple(G.normal_forms[a]) for a in N.elements()}) if G.normal_forms else None
        quotients.append({"kernel_order": len(N), "quotient_order": H.order,
                          "isomorphic_to": match, "admits": admits,
                          "kernel_elements": [list(v) for v in gens] if gens else None})
        any_admits |= admits is not False
    if not any_admits:
        return ScreenVerdict(False, "non-monolithic and no quotient by a minimal normal subgroup admits prestructures", quotients)
    targets = sorted({q["isomorphic_to"] or f"order {q['quotient_order']}" for q in quotients if q["admits"] is not False})
    return ScreenVerdict(None, "non-monolithic: search required; admissible quotients " + ", ".join(targets), quotients)


# -- lifting along a central subgroup -----------------------------------------

@dataclass
class LiftReport:
    label: str
    base_label: str
    kind: str
    kernel_order: int
    lift_multiplicity: int
    generating_lift_counts: list[int]
    nongenerating_stabilizers: list[int]
    trivial_lift_stabilizer_order: int | None
    complements: int
    orbit_count: int
    total_count: int
    aut_order: int
    sampled_base_tuples: int = 0
    sampled_lifts_checked: int = 0
    notes: list[str] = field(default_factory=list)
    elapsed: float = 0.0

    def to_dict(self) -> dict:
        gen = Counter(self.generating_lift_counts)
        return {
            "kind": self.kind, "mode": "lift", "base": self.base_label,
            "total": self.total_count, "orbits": self.orbit_count,
            "kernel_order": self.kernel_order, "lift_multiplicity": self.lift_multiplicity,
            "generating_lifts_per_base": {str(k): v for k, v in sorted(gen.items())},
            "trivial_lift_stabilizer_order": self.trivial_lift_stabilizer_order,
            "complements": self.complements, "aut_order": self.aut_order,
            "sampled_base_tuples": self.sampled_base_tuples,
            "sampled_lifts_checked": self.sampled_lifts_checked,
            "notes": list(self.notes),
        }


def count_via_lifting(G: FiniteGroup, N: gt.ElementSet, base_report: SearchReport,
                      base_group: FiniteGroup, sample_bases: int = 3,
                      sample_lifts: int = 10_000, seed: int = 0) -> LiftReport:
    """Counts for G from orbit representatives of G/N, N central.

    Every relator has zero exponent sum in the non-z generators, so
    multiplying the eight non-z entries of a solution by elements of N gives
    another solution, and z is determined by the other entries.  Each base
    tuple therefore has |N|^8 lifts.  A lift whose image generates G/N fails
    to generate G exactly when it lies in a complement of N; such a lift has
    stabilizer equal to the pointwise stabilizer of that complement.
    """
    t0 = time.perf_counter()
    if base_report.representatives is None or base_report.representative_stabilizers is None:
        raise ValueError("base report lacks representatives")
    Z = gt.center(G)
    if not N <= Z:
        raise ValueError("lifting requires a central subgroup")
    D = gt.derived_subgroup(G)
    if (D & N).bits != 1:
        raise ValueError("the derived subgroup meets N, so z could collapse in the quotient")
    if not central_twist_invariant(genus2_table()):
        raise InvariantViolation("relators are not invariant under central twists")
    kind = base_report.kind
    q = gt.quotient(G, N)
    H = q.target
    iso = gt.is_isomorphic(base_group, H)
    if iso is None:
        raise ValueError(f"G/N is not isomorphic to {base_group.label}")
    aut = gt.automorphism_group(G)
    perms = aut.elements.astype(np.int64)
    aut_h = base_report.aut_order
    n_ker = len(N)
    nel = N.elements()
    fibers: dict[int, list[int]] = {}
    for a in range(G.order):
        fibers.setdefault(int(q.proj[a]), []).append(a)
    full = (1 << G.order) - 1
    complements = [C for C in gt.normal_subgroups(G)
                   if len(C) * n_ker == G.order and (C & N).bits == 1]
    comp_masks = [C.bits for C in complements]
    comp_stabs = []
    for C in complements:
        arr = C.array()
        comp_stabs.append(int((perms[:, arr] == arr).all(axis=1).sum()))
    require = "structure" if kind == "structures" else "prestructure"

    def base_lift(t: Sequence[int]) -> list[int]:
        entries = [fibers[int(iso[a])][0] for a in t[:8]]
        for zc in fibers[int(iso[t[8]])]:
            if verify_tuple(G, entries + [zc], require="prestructure").passed:
                return entries + [zc]
        raise InvariantViolation("no preimage of z satisfies the relations")

    weighted = 0
    total = 0
    gen_counts = []
    nongen_stabs: list[int] = []
    multiplicity = n_ker ** 8
    for t, stab_h in zip(base_report.representatives, base_report.representative_stabilizers):
        orbit_h, r = divmod(aut_h, stab_h)
        if r:
            raise InvariantViolation("base stabilizer does not divide |Aut|")
        lift = base_lift(t)
        image_generates = gt.closure_mask(H, [int(iso[a]) for a in t]) == (1 << H.order) - 1
        if image_generates:
            gen = multiplicity - len(complements)
            extra = sum(comp_stabs)
            nongen_stabs.extend(comp_stabs)
        else:
            gen, extra = 0, 0
            for tw in _all_twists(G, lift, nel):
                if gt.closure_mask(G, tw) == full:
                    gen += 1
                else:
                    arr = np.array(tw[:8], dtype=np.int64)
                    s = int((perms[:, arr] == arr).all(axis=1).sum())
                    extra += s
                    nongen_stabs.append(s)
        gen_counts.append(gen)
        if kind == "structures":
            weighted += orbit_h * gen
            total += orbit_h * gen
        else:
            weighted += orbit_h * (gen + extra)
            total += orbit_h * multiplicity
    orbits, r = divmod(weighted, len(aut))
    if r:
        raise InvariantViolation("lifted orbit count is not an integer")
    report = LiftReport(
        label=G.label, base_label=base_report.label, kind=kind, kernel_order=n_ker,
        lift_multiplicity=multiplicity, generating_lift_counts=gen_counts,
        nongenerating_stabilizers=sorted(set(nongen_stabs)),
        trivial_lift_stabilizer_order=comp_stabs[0] if len(comp_stabs) == 1 else None,
        complements=len(complements), orbit_count=orbits, total_count=total,
        aut_order=len(aut),
    )
    _verify_lifting_samples(G, H, iso, q, base_report, base_lift, comp_masks, comp_stabs,
                            perms, nel, require, report, sample_bases, sample_lifts, seed)
    report.elapsed = time.perf_counter() - t0
    return report


def _all_twists(G: FiniteGroup, lift: list[int], nel: list[int]) -> Iterable[list[int]]:
    import itertools
    choices = [[int(G.mul[a, n]) for n in nel] for a in lift[:8]]
    return (list(combo) + [lift[8]] for combo in itertools.product(*choices))


def _verify_lifting_samples(G, H, iso, q, base_report, base_lift, comp_masks, comp_stabs,
                            perms, nel, require, report, sample_bases, sample_lifts, seed):
    """Brute-force the lifting arithmetic on a few base tuples and random lifts."""
    import itertools

    rng = random.Random(seed)
    reps = base_report.representatives
    full = (1 << G.order) - 1
    idx = sorted(rng.sample(range(len(reps)), min(sample_bases, len(reps))))
    checked = 0
    for i in idx:
        t = reps[i]
        lift = base_lift(t)
        fib_z = [a for a in range(G.order) if q.proj[a] == q.proj[lift[8]]]
        passing = 0
        gen = 0
        nongen_stabs = []
        for combo in itertools.product(*[[int(G.mul[a, n]) for n in nel] for a in lift[:8]]):
            ok_z = [zc for zc in fib_z
                    if verify_tuple(G, list(combo) + [zc], require="prestructure").passed]
            if len(ok_z) != 1:
                raise InvariantViolation("a lift does not have exactly one admissible z")
            passing += 1
            tw = list(combo) + ok_z
            if gt.closure_mask(G, tw) == full:
                gen += 1
            else:
                arr = np.array(tw[:8], dtype=np.int64)
                nongen_stabs.append(int((perms[:, arr] == arr).all(axis=1).sum()))
        checked += passing
        expected_gen = report.generating_lift_counts[i]
        if passing != report.lift_multiplicity or gen != expected_gen:
            raise InvariantViolation(
                f"lift count mismatch on base tuple {i}: {passing} lifts, {gen} generating")
        if sorted(nongen_stabs) != sorted(comp_stabs) and gen == report.lift_multiplicity - len(comp_stabs):
            raise InvariantViolation("stabilizers of non-generating lifts differ from the complement data")
    report.sampled_base_tuples = len(idx)
    for _ in range(sample_lifts):
        t = reps[rng.randrange(len(reps))]
        lift = base_lift(t)
        tw = [int(G.mul[a, rng.choice(nel)]) for a in lift[:8]] + [lift[8]]
        rep = verify_tuple(G, tw, require=require)
        if require == "structure":
            # a structure lift outside every complement must pass fully
            in_comp = any(all(C >> a & 1 for a in tw) for C in comp_masks)
            if rep.passed == in_comp:
                raise InvariantViolation("random lift verdict disagrees with the complement criterion")
        elif not rep.passed:
            raise InvariantViolation("a random lift fails the prestructure relations")
        checked += 1
    report.sampled_lifts_checked = checked
