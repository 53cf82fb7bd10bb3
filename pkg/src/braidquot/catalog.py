"""Built-in group catalog, expected metrics, table ingestion and reports."""

from __future__ import annotations

import csv
import io
import json
import re
import time
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Any

import numpy as np

from . import grouptheory as gt
from .pcgroup import (FiniteGroup, InconsistentPresentation, PcPresentation, Word,
                      build_group, emit_presentation, parse_presentation)
from .predicates import profile
from .search import (LiftReport, SearchOptions, SearchReport, count_via_lifting,
                     enumerate_prestructures, enumerate_structures, screen_group)


class TableFormatError(ValueError):
    pass


@dataclass
class ExpectedMetrics:
    aut_order: int
    is_monolithic: bool
    is_cct: bool | str
    is_extraspecial: bool
    nilpotency: int | str
    center: dict
    derived: dict
    monolith: dict
    prestructure_orbits: int
    structure_orbits: int
    structure_total: int
    quotient_targets: list[list[str]]
    k_centralizer_always_center: bool | None
    k_orders: list[int] | None
    mode: str = "exact"
    lift: dict | None = None
    lift_expectations: dict | None = None
    notes: list[str] = field(default_factory=list)


@dataclass
class CatalogEntry:
    label: str
    presentation: PcPresentation
    expected: ExpectedMetrics | None
    auxiliary: bool = False

    @property
    def order(self) -> int:
        return self.presentation.order

    def build(self) -> FiniteGroup:
        return _build_cached(self.label)


def _data_text(*parts: str) -> str:
    return resources.files("braidquot").joinpath("data", *parts).read_text()


@lru_cache(maxsize=None)
def _expected_doc() -> dict:
    return json.loads(_data_text("expected.json"))


@lru_cache(maxsize=None)
def builtin_catalog() -> tuple[CatalogEntry, ...]:
    entries = []
    for label, d in _expected_doc()["entries"].items():
        pres = parse_presentation(_data_text("presentations", d["file"]))
        fields = {k: v for k, v in d.items() if k not in ("file", "auxiliary")}
        entries.append(CatalogEntry(label, pres, ExpectedMetrics(**fields), d["auxiliary"]))
    entries.sort(key=lambda e: (e.auxiliary, e.order, _label_key(e.label)))
    return tuple(entries)


def _label_key(label: str) -> tuple:
    m = re.fullmatch(r"G\((\d+),(\d+)\)", label)
    return (int(m.group(1)), int(m.group(2))) if m else (0, 0, label)


def normalize_label(text: str) -> str:
    """Accept ``G(32,49)``, ``32,49``, ``G32_49`` or ``(32, 49)``."""
    t = text.strip().replace(" ", "")
    m = re.fullmatch(r"G?\(?(\d+)[,_](\d+)\)?", t)
    if m:
        return f"G({int(m.group(1))},{int(m.group(2))})"
    return t


def get_entry(label: str) -> CatalogEntry:
    want = normalize_label(label)
    for e in builtin_catalog():
        if e.label == want:
            return e
    raise KeyError(f"no catalog entry {label!r}")


@lru_cache(maxsize=None)
def _build_cached(label: str) -> FiniteGroup:
    entry = get_entry(label)
    G = build_group(entry.presentation)
    if G.order != entry.order:
        raise InconsistentPresentation(f"{label} built to order {G.order}")
    return G


def select(order: int | None = None, label: str | None = None,
           include_auxiliary: bool = True) -> list[CatalogEntry]:
    out = []
    for e in builtin_catalog():
        if label is not None and e.label != normalize_label(label):
            continue
        if order is not None and e.order != order:
            continue
        if label is None and not include_auxiliary and e.auxiliary:
            continue
        out.append(e)
    return out


# -- external tables ------------------------------------------------------------

def ingest_table(source: str | Path, label: str | None = None) -> FiniteGroup:
    """Read ``order N`` then N rows of N indices (row a lists a*b); optional
    ``names`` block with one name per element.  The identity is renumbered to 0.
    """
    path = Path(source) if not isinstance(source, str) or "\n" not in source else None
    text = path.read_text() if path is not None else source
    lines = [ln.split("#", 1)[0].strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln]
    if not lines or not re.fullmatch(r"order\s+\d+", lines[0]):
        raise TableFormatError("first line must be 'order N'")
    n = int(lines[0].split()[1])
    if n < 1:
        raise TableFormatError("order must be positive")
    if len(lines) < n + 1:
        raise TableFormatError(f"expected {n} table rows, found {len(lines) - 1}")
    rows = []
    for i, ln in enumerate(lines[1:n + 1], start=2):
        try:
            row = [int(v) for v in ln.split()]
        except ValueError:
            raise TableFormatError(f"row {i}: non-integer entry") from None
        if len(row) != n:
            raise TableFormatError(f"row {i}: expected {n} entries, found {len(row)}")
        rows.append(row)
    names = None
    rest = lines[n + 1:]
    if rest:
        if rest[0] != "names":
            raise TableFormatError(f"unexpected content after the table: {rest[0]!r}")
        names = [tok for ln in rest[1:] for tok in ln.split()]
        if len(names) != n:
            raise TableFormatError(f"names block lists {len(names)} names for {n} elements")
    mul = np.array(rows, dtype=np.int64)
    if (mul < 0).any() or (mul >= n).any():
        raise TableFormatError("table entries out of range")
    ident = [a for a in range(n) if (mul[a] == np.arange(n)).all() and (mul[:, a] == np.arange(n)).all()]
    if not ident:
        raise InconsistentPresentation("no two-sided identity element")
    e = ident[0]
    order = [e] + [a for a in range(n) if a != e]
    pos = np.empty(n, dtype=np.int64)
    pos[order] = np.arange(n)
    renum = pos[mul[np.ix_(order, order)]]
    try:
        G = FiniteGroup(renum, label=label or (path.stem if path is not None else "table"))
    except InconsistentPresentation as exc:
        # report the triple in the file's own numbering
        m = re.search(r"\((\d+), (\d+), (\d+)\)", str(exc))
        if m:
            a, b, c = (order[int(v)] for v in m.groups())
            raise InconsistentPresentation(f"associativity fails for ({a}, {b}, {c})") from None
        raise
    G.original_index = order
    G.names = [names[i] for i in order] if names else None
    return G


# -- catalog runs -------------------------------------------------------------

def word_subgroup(G: FiniteGroup, words: list[str]) -> gt.ElementSet:
    """Subgroup generated by elements written as words in x1..xk."""
    gens = [G.eval_word(Word.parse(w), G.generator_elements) for w in words]
    return gt.subgroup_closure(G, gens)


@dataclass
class EntryResult:
    label: str
    order: int
    report: dict
    diffs: list[dict]
    error: str | None = None
    invariant_violation: bool = False

    @property
    def ok(self) -> bool:
        return self.error is None and not self.diffs


@dataclass
class RunArtifact:
    results: list[EntryResult]
    started: str
    elapsed: float

    @property
    def ok(self) -> bool:
        return all(r.ok for r in self.results)

    @property
    def invariant_violation(self) -> bool:
        return any(r.invariant_violation for r in self.results)

    def summary_rows(self) -> list[dict]:
        rows = []
        for r in self.results:
            rep = r.report
            pre = rep.get("search", {}).get("prestructures", {})
            st = rep.get("search", {}).get("structures", {})
            prof = rep.get("profile", {})
            rows.append({
                "label": r.label, "order": r.order,
                "monolithic": prof.get("is_monolithic"),
                "aut_order": prof.get("aut_order"),
                "prestructure_orbits": pre.get("orbits"),
                "structure_orbits": st.get("orbits"),
                "structure_total": st.get("total"),
                "mode": st.get("mode"),
                "status": "ok" if r.ok else ("error" if r.error else "mismatch"),
            })
        return rows

    def csv_text(self) -> str:
        buf = io.StringIO()
        rows = self.summary_rows()
        w = csv.DictWriter(buf, fieldnames=list(rows[0]) if rows else ["label"], lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
        return buf.getvalue()

    def write(self, out_dir: str | Path) -> list[Path]:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        paths = []
        for r in self.results:
            p = out / f"{_file_stem(r.label)}.json"
            p.write_text(json.dumps(r.report, indent=1, sort_keys=True) + "\n")
            paths.append(p)
        p = out / "summary.csv"
        p.write_text(self.csv_text())
        paths.append(p)
        p = out / "run_info.json"
        p.write_text(json.dumps({"started": self.started, "elapsed_seconds": round(self.elapsed, 3)},
                                indent=1) + "\n")
        paths.append(p)
        return paths


def _file_stem(label: str) -> str:
    return re.sub(r"[^A-Za-z0-9]+", "_", label).strip("_")


def _compare(diffs: list, metric: str, expected: Any, actual: Any) -> None:
    if expected != actual:
        diffs.append({"metric": metric, "expected": expected, "actual": actual})


def _known_targets() -> list[tuple[str, FiniteGroup]]:
    return [(lbl, _build_cached(lbl)) for lbl in ("G(32,49)", "G(32,50)")]


@lru_cache(maxsize=None)
def _base_reports(label: str) -> tuple[SearchReport, SearchReport]:
    H = _build_cached(label)
    pre = enumerate_prestructures(H, SearchOptions(emit_representatives=True))
    st = enumerate_structures(H, SearchOptions(kind="structures", emit_representatives=True))
    return pre, st


def run_entry(entry: CatalogEntry, workers: int = 1, with_aut: bool = True,
              cross_check: bool = True, lift_samples: int = 10_000) -> EntryResult:
    from .search import InvariantViolation

    diffs: list[dict] = []
    try:
        G = entry.build()
        prof = profile(G, with_aut=with_aut)
        report: dict = {"label": entry.label, "order": G.order, "auxiliary": entry.auxiliary,
                        "profile": prof.to_dict()}
        verdict = screen_group(G, known=_known_targets())
        report["screen"] = {"admits_prestructures": verdict.admits_prestructures,
                            "reason": verdict.reason, "quotients": verdict.quotients}
        exp = entry.expected
        opts = SearchOptions(worker_count=workers)
        searches: dict[str, dict] = {}
        if exp is not None and exp.mode == "lift":
            searches.update(_lift_searches(G, exp, lift_samples, report))
            if cross_check:
                pre = enumerate_prestructures(G, opts)
                st = enumerate_structures(G, SearchOptions(kind="structures", worker_count=workers))
                report["exact_cross_check"] = {"prestructures": pre.to_dict(G), "structures": st.to_dict(G)}
                for kind, rep in (("prestructures", pre), ("structures", st)):
                    _compare(diffs, f"{kind}.exact_vs_lift.orbits", searches[kind]["orbits"], rep.orbit_count)
                    _compare(diffs, f"{kind}.exact_vs_lift.total", searches[kind]["total"], rep.total_count)
                searches["prestructures"]["flags"] = pre.to_dict()["flags"]
                searches["prestructures"]["n_values"] = pre.n_values_seen
                searches["prestructures"]["k_orders"] = pre.k_orders_seen
        else:
            pre = enumerate_prestructures(G, opts)
            st = enumerate_structures(G, SearchOptions(kind="structures", worker_count=workers))
            searches["prestructures"] = pre.to_dict(G)
            searches["structures"] = st.to_dict(G)
        if exp is not None and exp.notes:
            searches["prestructures"].setdefault("notes", []).extend(exp.notes)
        report["search"] = searches
        if verdict.admits_prestructures is False and searches["prestructures"]["orbits"]:
            diffs.append({"metric": "screen", "expected": "no prestructures",
                          "actual": searches["prestructures"]["orbits"]})
        if exp is not None:
            _compare_expected(G, exp, prof, searches, diffs, with_aut)
        report["expected_diff"] = diffs
        return EntryResult(entry.label, G.order, report, diffs)
    except InvariantViolation as exc:
        return EntryResult(entry.label, entry.order, {"label": entry.label, "error": str(exc)},
                           diffs, error=f"invariant violation: {exc}", invariant_violation=True)
    except Exception as exc:  # recorded per entry, the run continues
        return EntryResult(entry.label, entry.order, {"label": entry.label, "error": repr(exc)},
                           diffs, error=repr(exc))


def _lift_searches(G: FiniteGroup, exp: ExpectedMetrics, lift_samples: int, report: dict) -> dict:
    N = word_subgroup(G, exp.lift["kernel"])
    base = exp.lift["base"]
    H = _build_cached(base)
    out = {}
    lifts = {}
    for kind, base_rep in zip(("prestructures", "structures"), _base_reports(base)):
        lr: LiftReport = count_via_lifting(G, N, base_rep, H, sample_lifts=lift_samples)
        lifts[kind] = lr
        d = lr.to_dict()
        out[kind] = {"kind": kind, "mode": "lift", "total": lr.total_count, "orbits": lr.orbit_count,
                     "stabilizer_histogram": None, "n_values": base_rep.n_values_seen,
                     "flags": {"z_always_central": base_rep.z_always_central}, "lift": d}
    report["lift"] = {k: v.to_dict() for k, v in lifts.items()}
    return out


def _compare_expected(G, exp: ExpectedMetrics, prof, searches, diffs, with_aut) -> None:
    if with_aut:
        _compare(diffs, "aut_order", exp.aut_order, prof.aut_order)
    _compare(diffs, "is_monolithic", exp.is_monolithic, prof.is_monolithic)
    _compare(diffs, "is_cct", exp.is_cct, prof.is_cct)
    _compare(diffs, "is_extraspecial", exp.is_extraspecial, prof.is_extraspecial)
    _compare(diffs, "nilpotency", exp.nilpotency, prof.nilpotency_class)
    for name, actual in (("center", gt.center(G)), ("derived", gt.derived_subgroup(G)),
                         ("monolith", gt.monolith(G) if prof.is_monolithic else
                          gt.ElementSet(1, G.order))):
        want = getattr(exp, name)
        _compare(diffs, f"{name}.order", want["order"], len(actual))
        stated = word_subgroup(G, want["generators"])
        if stated != actual:
            diffs.append({"metric": f"{name}.generators", "expected": want["generators"],
                          "actual": "different subgroup"})
    pre, st = searches["prestructures"], searches["structures"]
    _compare(diffs, "prestructure_orbits", exp.prestructure_orbits, pre["orbits"])
    _compare(diffs, "structure_orbits", exp.structure_orbits, st["orbits"])
    _compare(diffs, "structure_total", exp.structure_total, st["total"])
    if exp.prestructure_orbits:
        _compare(diffs, "n_values", [2], list(pre["n_values"]))
        flags = pre.get("flags", {})
        _compare(diffs, "z_always_central", True, flags.get("z_always_central"))
        if "k_centralizer_always_center" in flags:
            _compare(diffs, "k_centralizer_always_center", exp.k_centralizer_always_center,
                     flags.get("k_centralizer_always_center"))
        if exp.k_orders is not None and "k_orders" in pre:
            _compare(diffs, "k_orders", exp.k_orders, list(pre["k_orders"]))
    if exp.lift_expectations:
        for kind in ("prestructures", "structures"):
            lift = searches[kind].get("lift")
            if lift is None:
                continue
            le = exp.lift_expectations
            _compare(diffs, f"{kind}.lift_multiplicity", le["lift_multiplicity"], lift["lift_multiplicity"])
            _compare(diffs, f"{kind}.generating_lifts", [str(le["generating_lifts"])],
                     list(lift["generating_lifts_per_base"]))
            _compare(diffs, f"{kind}.trivial_lift_stabilizer_order", le["trivial_lift_stabilizer_order"],
                     lift["trivial_lift_stabilizer_order"])
    for word, target in exp.quotient_targets:
        N = word_subgroup(G, [word])
        q = gt.quotient(G, gt.ElementSet(N.bits, G.order, is_subgroup=True, is_normal=True))
        if gt.is_isomorphic(q.target, _build_cached(target)) is None:
            diffs.append({"metric": f"quotient <{word}>", "expected": target, "actual": "not isomorphic"})


def run_catalog(order: int | None = None, label: str | None = None, workers: int = 1,
                with_aut: bool = True, cross_check: bool = True,
                lift_samples: int = 10_000) -> RunArtifact:
    started = time.strftime("%Y-%m-%dT%H:%M:%S%z")
    t0 = time.perf_counter()
    entries = select(order=order, label=label)
    if label is not None and not entries:
        raise KeyError(f"no catalog entry {label!r}")
    results = [run_entry(e, workers, with_aut, cross_check, lift_samples) for e in entries]
    return RunArtifact(results, started, time.perf_counter() - t0)


def roundtrip_presentation(entry: CatalogEntry) -> bool:
    """build -> emit -> parse -> build gives the identical table."""
    G = entry.build()
    again = build_group(parse_presentation(emit_presentation(entry.presentation)))
    return bool((G.mul == again.mul).all()) and G.normal_forms == again.normal_forms
