"""Power-commutator presentations and their materialization as finite groups.

A presentation lists generators ``x1..xk`` with relative orders ``p_i``,
power relations ``x_i^{p_i} = w`` and commutator relations
``[x_i, x_j] = w`` for ``i < j``, with ``[x, y] = x y x^-1 y^-1``.
Right-hand sides may only mention generators of index greater than ``i``.

Groups are built bottom-up along the series ``G_i = <x_i, ..., x_k>``:
each step adjoins ``x_i`` acting on ``G_{i+1}`` by conjugation.  The
finished table is then checked exhaustively (associativity, identity,
inverses and every defining relation), so no collection theory is trusted.
"""

from __future__ import annotations

import os
import re
from dataclasses import dataclass, field
from functools import cached_property
from math import prod
from typing import Iterable, Sequence

import numpy as np

DEFAULT_ORDER_CAP = 512
ORDER_CAP_ENV = "BRAIDQUOT_ORDER_CAP"


class PresentationError(ValueError):
    """Malformed presentation text or structurally invalid presentation."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class InconsistentPresentation(ValueError):
    """The relations do not define a group of order prod(p_i)."""


class OrderCapExceeded(ValueError):
    pass


def order_cap() -> int:
    return int(os.environ.get(ORDER_CAP_ENV, DEFAULT_ORDER_CAP))


@dataclass(frozen=True)
class Word:
    """A word in the generators: ``((g, e), ...)`` with 1-based ``g`` and ``e != 0``."""

    letters: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        for g, e in self.letters:
            if e == 0:
                raise PresentationError(f"zero exponent on x{g}")

    @classmethod
    def parse(cls, text: str) -> "Word":
        text = text.strip()
        if text == "1" or text == "":
            return cls()
        letters = []
        for tok in text.split():
            m = _TOKEN.fullmatch(tok)
            if not m:
                raise PresentationError(f"bad word token {tok!r}")
            e = int(m.group(2)) if m.group(2) is not None else 1
            if e == 0:
                raise PresentationError(f"zero exponent in {tok!r}")
            letters.append((int(m.group(1)), e))
        return cls(tuple(letters))

    def generators(self) -> set[int]:
        return {g for g, _ in self.letters}

    def __str__(self) -> str:
        if not self.letters:
            return "1"
        return " ".join(f"x{g}" if e == 1 else f"x{g}^{e}" for g, e in self.letters)

    def __bool__(self) -> bool:
        return bool(self.letters)


_TOKEN = re.compile(r"x(\d+)(?:\^([+-]?\d+))?")


@dataclass
class PcPresentation:
    name: str
    k: int
    rel_orders: list[int]
    power_words: dict[int, Word] = field(default_factory=dict)
    comm_words: dict[tuple[int, int], Word] = field(default_factory=dict)

    def validate(self) -> None:
        if self.k < 1 or len(self.rel_orders) != self.k:
            raise PresentationError("generator count does not match relative orders")
        for i, p in enumerate(self.rel_orders, 1):
            if p < 2:
                raise PresentationError(f"relative order of x{i} must be >= 2")
        for i, w in self.power_words.items():
            self._check_rhs(i, w, f"pow {i}")
        for (i, j), w in self.comm_words.items():
            if not 1 <= i < j <= self.k:
                raise PresentationError(f"commutator key ({i},{j}) must satisfy i < j within 1..{self.k}")
            self._check_rhs(i, w, f"comm {i} {j}")

    def _check_rhs(self, i: int, w: Word, what: str) -> None:
        if not 1 <= i <= self.k:
            raise PresentationError(f"{what}: generator index out of range")
        for g in w.generators():
            if not 1 <= g <= self.k:
                raise PresentationError(f"{what}: x{g} out of range 1..{self.k}")
            if g <= i:
                raise PresentationError(f"{what}: right-hand side may only use generators above x{i}")

    @property
    def order(self) -> int:
        return prod(self.rel_orders)

    def power_word(self, i: int) -> Word:
        return self.power_words.get(i, Word())

    def comm_word(self, i: int, j: int) -> Word:
        return self.comm_words.get((i, j), Word())


def parse_presentation(text: str) -> PcPresentation:
    name = None
    k = None
    orders: dict[int, int] = {}
    powers: dict[int, Word] = {}
    comms: dict[tuple[int, int], Word] = {}
    ended = False

    def gen_index(tok: str, lineno: int) -> int:
        try:
            g = int(tok)
        except ValueError:
            raise PresentationError(f"expected a generator index, got {tok!r}", lineno) from None
        if k is None:
            raise PresentationError("'gens' must come before relations", lineno)
        if not 1 <= g <= k:
            raise PresentationError(f"generator index {g} out of range 1..{k}", lineno)
        return g

    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if ended:
            raise PresentationError("content after 'end'", lineno)
        head, _, rest = line.partition(" ")
        rest = rest.strip()
        if head == "group":
            m = re.fullmatch(r'"([^"]*)"', rest)
            if not m:
                raise PresentationError("group label must be quoted", lineno)
            name = m.group(1)
        elif head == "gens":
            try:
                k = int(rest)
            except ValueError:
                raise PresentationError(f"bad generator count {rest!r}", lineno) from None
            if k < 1:
                raise PresentationError("generator count must be positive", lineno)
        elif head == "order":
            parts = rest.split()
            if len(parts) != 2:
                raise PresentationError("expected 'order <i> <p>'", lineno)
            g = gen_index(parts[0], lineno)
            if g in orders:
                raise PresentationError(f"duplicate order for x{g}", lineno)
            try:
                orders[g] = int(parts[1])
            except ValueError:
                raise PresentationError(f"bad relative order {parts[1]!r}", lineno) from None
        elif head in ("pow", "comm"):
            lhs, eq, rhs = rest.partition("=")
            if not eq:
                raise PresentationError(f"expected '=' in {head} line", lineno)
            idx = lhs.split()
            try:
                word = Word.parse(rhs)
            except PresentationError as exc:
                raise PresentationError(str(exc), lineno) from None
            for g in word.generators():
                gen_index(str(g), lineno)
            if head == "pow":
                if len(idx) != 1:
                    raise PresentationError("expected 'pow <i> = <word>'", lineno)
                g = gen_index(idx[0], lineno)
                if g in powers:
                    raise PresentationError(f"duplicate power relation for x{g}", lineno)
                powers[g] = word
            else:
                if len(idx) != 2:
                    raise PresentationError("expected 'comm <i> <j> = <word>'", lineno)
                i, j = gen_index(idx[0], lineno), gen_index(idx[1], lineno)
                if not i < j:
                    raise PresentationError("commutator key must satisfy i < j", lineno)
                if (i, j) in comms:
                    raise PresentationError(f"duplicate commutator relation ({i},{j})", lineno)
                comms[(i, j)] = word
        elif head == "end":
            ended = True
        else:
            raise PresentationError(f"unknown directive {head!r}", lineno)

    if k is None:
        raise PresentationError("missing 'gens' line")
    missing = [g for g in range(1, k + 1) if g not in orders]
    if missing:
        raise PresentationError(f"missing relative order for x{missing[0]}")
    pres = PcPresentation(
        name=name if name is not None else "unnamed",
        k=k,
        rel_orders=[orders[g] for g in range(1, k + 1)],
        power_words=powers,
        comm_words=comms,
    )
    pres.validate()
    return pres


def emit_presentation(pres: PcPresentation) -> str:
    lines = [f'group "{pres.name}"', f"gens {pres.k}"]
    lines += [f"order {i} {p}" for i, p in enumerate(pres.rel_orders, 1)]
    lines += [f"pow {i} = {pres.power_words[i]}" for i in sorted(pres.power_words) if pres.power_words[i]]
    lines += [f"comm {i} {j} = {pres.comm_words[i, j]}" for i, j in sorted(pres.comm_words) if pres.comm_words[i, j]]
    lines.append("end")
    return "\n".join(lines) + "\n"


class FiniteGroup:
    """A finite group stored as a full multiplication table.

    Element ``0`` is the identity.  Indices follow the lexicographic order of
    the exponent vectors in ``normal_forms`` when the group comes from a
    presentation; ingested tables keep their own numbering.
    """

    def __init__(self, mul: np.ndarray, label: str = "G",
                 normal_forms: Sequence[tuple[int, ...]] | None = None,
                 source: PcPresentation | None = None,
                 validate: bool = True):
        mul = np.asarray(mul)
        n = mul.shape[0]
        if mul.shape != (n, n):
            raise ValueError("multiplication table must be square")
        self.mul = mul.astype(np.int32 if n > 32000 else np.int16 if n > 127 else np.int8)
        self.mul.setflags(write=False)
        self.order = n
        self.label = label
        self.source = source
        self.normal_forms = [tuple(v) for v in normal_forms] if normal_forms is not None else None
        self.identity = 0
        if validate:
            validate_table(self.mul)
        inv = np.empty(n, dtype=np.int64)
        rows, cols = np.nonzero(self.mul == 0)
        inv[rows] = cols
        self.inv = inv
        self.inv.setflags(write=False)

    def __repr__(self) -> str:
        return f"FiniteGroup({self.label!r}, order={self.order})"

    def __len__(self) -> int:
        return self.order

    # -- element arithmetic ------------------------------------------------

    def _check(self, *xs: int) -> None:
        for x in xs:
            if not 0 <= x < self.order:
                raise IndexError(f"element index {x} out of range 0..{self.order - 1}")

    def mul_(self, a: int, b: int) -> int:
        self._check(a, b)
        return int(self.mul[a, b])

    def inverse(self, a: int) -> int:
        self._check(a)
        return int(self.inv[a])

    def pow(self, a: int, e: int) -> int:
        self._check(a)
        if e < 0:
            a, e = int(self.inv[a]), -e
        r, base = 0, a
        while e:
            if e & 1:
                r = int(self.mul[r, base])
            base = int(self.mul[base, base])
            e >>= 1
        return r

    def order_of(self, a: int) -> int:
        self._check(a)
        return int(self.element_orders[a])

    def commutator(self, a: int, b: int) -> int:
        self._check(a, b)
        m, inv = self.mul, self.inv
        return int(m[m[a, b], m[inv[a], inv[b]]])

    def conjugate(self, a: int, b: int) -> int:
        """``a b a^-1``."""
        self._check(a, b)
        return int(self.mul[self.mul[a, b], self.inv[a]])

    def product(self, xs: Iterable[int]) -> int:
        r = 0
        for x in xs:
            r = int(self.mul[r, x])
        return r

    def eval_word(self, word: Word, assignment: Sequence[int]) -> int:
        """Substitute ``assignment[g-1]`` for ``x_g`` and multiply out."""
        r = 0
        for g, e in word.letters:
            r = int(self.mul[r, self.pow(assignment[g - 1], e)])
        return r

    # -- cached tables -----------------------------------------------------

    @cached_property
    def element_orders(self) -> np.ndarray:
        n = self.order
        orders = np.zeros(n, dtype=np.int64)
        cur = np.arange(n)
        for m in range(1, n + 1):
            hit = (cur == 0) & (orders == 0)
            orders[hit] = m
            if orders.all():
                break
            cur = self.mul[cur, np.arange(n)]
        return orders

    @cached_property
    def comm_table(self) -> np.ndarray:
        """``comm_table[a, b] = [a, b]``."""
        m, inv = self.mul.astype(np.int64), self.inv
        ab = m
        ainv_binv = m[inv[:, None], inv[None, :]]
        t = m[ab, ainv_binv]
        t.setflags(write=False)
        return t

    @cached_property
    def generator_elements(self) -> list[int]:
        """Indices of the presentation generators ``x1..xk``."""
        if self.normal_forms is None:
            raise ValueError("group has no presentation generators")
        k = len(self.normal_forms[0])
        lookup = {v: i for i, v in enumerate(self.normal_forms)}
        return [lookup[tuple(1 if j == g else 0 for j in range(k))] for g in range(k)]

    def element_from_vector(self, vec: Sequence[int]) -> int:
        if self.normal_forms is None:
            raise ValueError("group has no normal forms")
        lookup = getattr(self, "_nf_lookup", None)
        if lookup is None:
            lookup = self._nf_lookup = {v: i for i, v in enumerate(self.normal_forms)}
        try:
            return lookup[tuple(vec)]
        except KeyError:
            raise ValueError(f"{tuple(vec)} is not a normal form of {self.label}") from None

    @cached_property
    def is_abelian(self) -> bool:
        return bool((self.mul == self.mul.T).all())


def validate_table(mul: np.ndarray) -> None:
    """Exhaustive group-axiom check; raises ``InconsistentPresentation`` with a witness."""
    n = mul.shape[0]
    m = mul.astype(np.int64)
    if (m < 0).any() or (m >= n).any():
        raise InconsistentPresentation("table entries out of range")
    ar = np.arange(n)
    if not ((m[0] == ar).all() and (m[:, 0] == ar).all()):
        raise InconsistentPresentation("element 0 is not a two-sided identity")
    for row in m:
        if len(np.unique(row)) != n:
            raise InconsistentPresentation("table rows are not permutations (no inverses)")
    for a in range(n):
        left = m[m[a]]          # (a b) c indexed [b, c]
        right = m[a][m]         # a (b c) indexed [b, c]
        bad = np.argwhere(left != right)
        if len(bad):
            b, c = map(int, bad[0])
            raise InconsistentPresentation(f"associativity fails for ({a}, {b}, {c})")


def build_group(pres: PcPresentation, max_order: int | None = None) -> FiniteGroup:
    pres.validate()
    cap = order_cap() if max_order is None else max_order
    if pres.order > cap:
        raise OrderCapExceeded(f"{pres.name}: order {pres.order} exceeds cap {cap}")
    k, p = pres.k, pres.rel_orders

    # start with the trivial group on no generators
    mul = np.zeros((1, 1), dtype=np.int64)
    nfs: list[tuple[int, ...]] = [()]
    for i in range(k, 0, -1):
        mul, nfs = _adjoin(pres, i, mul, nfs)

    G = FiniteGroup(mul, label=pres.name, normal_forms=nfs, source=pres)
    _check_relations(G, pres)
    return G


def _adjoin(pres: PcPresentation, i: int, sub: np.ndarray, nfs: list[tuple[int, ...]]):
    """Adjoin x_i to G_{i+1} (table ``sub``, normal forms over x_{i+1}..x_k)."""
    k, p = pres.k, pres.rel_orders[i - 1]
    M = sub.shape[0]
    lookup = {v: n for n, v in enumerate(nfs)}
    offset = i + 1  # generator index of the first coordinate of nfs

    def gen(g: int) -> int:
        return lookup[tuple(1 if j == g - offset else 0 for j in range(k - i))]

    def pow_sub(a: int, e: int) -> int:
        if e < 0:
            a = int(np.nonzero(sub[a] == 0)[0][0])
            e = -e
        r = 0
        for _ in range(e):
            r = int(sub[r, a])
        return r

    def ev(word: Word) -> int:
        r = 0
        for g, e in word.letters:
            r = int(sub[r, pow_sub(gen(g), e)])
        return r

    # conjugation by x_i on generators: x_i x_j x_i^-1 = [x_i, x_j] x_j
    images = [int(sub[ev(pres.comm_word(i, j)), gen(j)]) for j in range(i + 1, k + 1)]
    sigma = np.empty(M, dtype=np.int64)
    for h, vec in enumerate(nfs):
        r = 0
        for img, e in zip(images, vec):
            r = int(sub[r, pow_sub(img, e)])
        sigma[h] = r
    if len(np.unique(sigma)) != M:
        raise InconsistentPresentation(
            f"{pres.name}: conjugation by x{i} is not a bijection of <x{i + 1},...>")
    if M > 1 and not (sigma[sub] == sub[sigma[:, None], sigma[None, :]]).all():
        raise InconsistentPresentation(
            f"{pres.name}: conjugation by x{i} is not an automorphism of <x{i + 1},...>")
    u = ev(pres.power_word(i))
    if sigma[u] != u:
        raise InconsistentPresentation(f"{pres.name}: x{i} does not commute with x{i}^{p}")
    # sigma^p must equal conjugation by u
    sp = np.arange(M)
    for _ in range(p):
        sp = sigma[sp]
    uinv = int(np.nonzero(sub[u] == 0)[0][0])
    conj_u = sub[sub[u], uinv]
    if not (sp == conj_u).all():
        raise InconsistentPresentation(
            f"{pres.name}: x{i}^{p} = {pres.power_word(i)} is incompatible with the action of x{i}")

    sig_inv = np.argsort(sigma)
    inv_pows = [np.arange(M)]
    for _ in range(1, p):
        inv_pows.append(sig_inv[inv_pows[-1]])

    N = p * M
    mul = np.empty((N, N), dtype=np.int64)
    for a in range(p):
        for b in range(p):
            hh = inv_pows[b]
            c = a + b
            if c >= p:
                c -= p
                hh = sub[u][hh]
            mul[a * M:(a + 1) * M, b * M:(b + 1) * M] = c * M + sub[hh]
    new_nfs = [(a,) + v for a in range(p) for v in nfs]
    return mul, new_nfs


def _check_relations(G: FiniteGroup, pres: PcPresentation) -> None:
    gens = G.generator_elements
    for i in range(1, pres.k + 1):
        lhs = G.pow(gens[i - 1], pres.rel_orders[i - 1])
        if lhs != G.eval_word(pres.power_word(i), gens):
            raise InconsistentPresentation(f"{pres.name}: relation x{i}^{pres.rel_orders[i - 1]} fails")
        for j in range(i + 1, pres.k + 1):
            lhs = G.commutator(gens[i - 1], gens[j - 1])
            if lhs != G.eval_word(pres.comm_word(i, j), gens):
                raise InconsistentPresentation(f"{pres.name}: relation [x{i}, x{j}] fails")


def direct_product(G: FiniteGroup, H: FiniteGroup, label: str | None = None) -> FiniteGroup:
    n, m = G.order, H.order
    a = np.arange(n * m)
    g, h = a // m, a % m
    mul = G.mul.astype(np.int64)[g[:, None], g[None, :]] * m + H.mul.astype(np.int64)[h[:, None], h[None, :]]
    return FiniteGroup(mul, label=label or f"{G.label} x {H.label}")


def cyclic_group(n: int) -> FiniteGroup:
    a = np.arange(n)
    return FiniteGroup((a[:, None] + a[None, :]) % n, label=f"Z{n}",
                       normal_forms=[(i,) for i in range(n)])
