"""Independent reference computations used by the tests.

Nothing here calls the search engine or the subgroup machinery; the oracles
work from the raw multiplication table and the literal genus-2 relation text.
"""

from __future__ import annotations

import itertools

import numpy as np

from braidquot.braid import genus2_table

FIRST_ROW = ("r11", "t11", "r12", "t12")
SECOND_ROW = ("r21", "t21", "r22", "t22")


def brute_subgroups(mul: np.ndarray) -> list[frozenset[int]]:
    """All subgroups of a tiny group by testing every subset containing 0."""
    n = mul.shape[0]
    out = []
    for bits in range(1 << (n - 1)):
        s = {0} | {i + 1 for i in range(n - 1) if bits >> i & 1}
        if all(int(mul[a, b]) in s for a in s for b in s):
            out.append(frozenset(s))
    return out


def is_normal_brute(mul: np.ndarray, s: frozenset[int]) -> bool:
    n = mul.shape[0]
    inv = [int(np.nonzero(mul[a] == 0)[0][0]) for a in range(n)]
    return all(int(mul[mul[g, h], inv[g]]) in s for g in range(n) for h in s)


def class_sizes_brute(mul: np.ndarray) -> list[int]:
    n = mul.shape[0]
    inv = [int(np.nonzero(mul[a] == 0)[0][0]) for a in range(n)]
    seen, sizes = set(), []
    for a in range(n):
        if a in seen:
            continue
        cls = {int(mul[mul[g, a], inv[g]]) for g in range(n)}
        seen |= cls
        sizes.append(len(cls))
    return sorted(sizes)


def order_profile(mul: np.ndarray) -> dict[int, int]:
    n = mul.shape[0]
    prof: dict[int, int] = {}
    for a in range(n):
        x, k = a, 1
        while x != 0:
            x, k = int(mul[x, a]), k + 1
        prof[k] = prof.get(k, 0) + 1
    return prof


def _eval_grid(mul: np.ndarray, inv: np.ndarray, word, values: dict) -> np.ndarray:
    r = np.zeros((), dtype=np.int64)
    for g, e in word:
        x = values[g]
        if e < 0:
            x, e = inv[x], -e
        for _ in range(e):
            r = mul[r, x]
    return r


def naive_prestructure_total(mul: np.ndarray) -> int:
    """Number of 9-tuples satisfying R1-R10, T1-T10 with z != 1.

    Each relation is read from the literal genus-2 table and evaluated on a
    numpy grid over the second-row entries and one first-row entry.  The
    code checks from the relation text that every relation mentions exactly
    one first-row entry; the count then multiplies over the four of them.
    """
    mul = np.asarray(mul, dtype=np.int64)
    n = mul.shape[0]
    inv = np.array([int(np.nonzero(mul[a] == 0)[0][0]) for a in range(n)])
    rels = [r for r in genus2_table().relations if r.label[0] in "RT"]
    by_unknown: dict[str, list] = {u: [] for u in FIRST_ROW}
    for r in rels:
        names = {g for g, _ in r.lhs + r.rhs}
        first = names & set(FIRST_ROW)
        assert len(first) == 1, f"{r.label} mentions {sorted(first)}"
        by_unknown[first.pop()].append(r)

    def axis(i: int) -> np.ndarray:
        shape = [1] * 5
        shape[i] = n
        return np.arange(n).reshape(shape)

    total = 0
    for z in range(1, n):
        counts = []
        for u, urels in by_unknown.items():
            values = {name: axis(i) for i, name in enumerate(SECOND_ROW)}
            values[u] = axis(4)
            values["z"] = np.int64(z)
            ok = np.ones((1, 1, 1, 1, 1), dtype=bool)
            for r in urels:
                ok = ok & (_eval_grid(mul, inv, r.lhs, values) == _eval_grid(mul, inv, r.rhs, values))
                if not ok.any():
                    break
            if not ok.any():
                counts = None
                break
            counts.append(np.broadcast_to(ok, (n,) * 5).sum(axis=4, dtype=np.int64))
        if counts is None:
            continue
        total += int((counts[0] * counts[1] * counts[2] * counts[3]).sum())
    return total


def tuple_orbit(perms: np.ndarray, t) -> set[tuple[int, ...]]:
    arr = np.asarray(t, dtype=np.int64)
    return {tuple(row) for row in perms[:, arr].tolist()}


def is_automorphism(mul: np.ndarray, perm) -> bool:
    perm = np.asarray(perm)
    n = mul.shape[0]
    if sorted(perm.tolist()) != list(range(n)):
        return False
    return bool((perm[mul] == mul[np.ix_(perm, perm)]).all())


def all_pairs(n: int):
    return itertools.product(range(n), repeat=2)
