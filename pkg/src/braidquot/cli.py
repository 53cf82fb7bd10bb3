"""Command-line interface.

Exit status: 0 success, 1 expectation mismatch or failed verification,
2 usage error, 3 internal invariant violation.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import catalog
from .braid import verify_tuple
from .pcgroup import (FiniteGroup, InconsistentPresentation, OrderCapExceeded, PresentationError,
                      build_group, emit_presentation, parse_presentation)
from .predicates import profile
from .search import (InvariantViolation, SearchOptions, count_via_lifting, enumerate_prestructures,
                     enumerate_structures)

EXIT_OK, EXIT_MISMATCH, EXIT_USAGE, EXIT_INVARIANT = 0, 1, 2, 3


class UsageError(Exception):
    pass


def resolve_group(selector: str) -> tuple[FiniteGroup, catalog.CatalogEntry | None]:
    """A catalog label, a presentation file, or an external multiplication table."""
    path = Path(selector)
    if path.is_file():
        text = path.read_text()
        first = next((ln.strip() for ln in text.splitlines() if ln.strip() and not ln.strip().startswith("#")), "")
        if first.startswith("order"):
            return catalog.ingest_table(path), None
        return build_group(parse_presentation(text)), None
    try:
        entry = catalog.get_entry(selector)
    except KeyError:
        raise UsageError(f"{selector!r} is neither a file nor a catalog label") from None
    return entry.build(), entry


def parse_tuple_arg(G: FiniteGroup, text: str) -> list[int]:
    parts = [p.strip() for p in text.strip().split(";") if p.strip()]
    out = []
    for p in parts:
        if "," in p or (G.normal_forms is not None and len(G.normal_forms[0]) == 1):
            if G.normal_forms is None:
                raise UsageError("this group has no generator basis; give element indices")
            vec = tuple(int(v) for v in p.split(","))
            try:
                out.append(G.element_from_vector(vec))
            except ValueError as exc:
                raise UsageError(str(exc)) from None
        else:
            a = int(p)
            if not 0 <= a < G.order:
                raise UsageError(f"element index {a} out of range")
            out.append(a)
    return out


def _dump(obj, output: str | None) -> None:
    text = json.dumps(obj, indent=1, sort_keys=True)
    if output:
        Path(output).write_text(text + "\n")
    else:
        print(text)


# -- subcommands --------------------------------------------------------------

def cmd_analyze(args) -> int:
    G, entry = resolve_group(args.group)
    prof = profile(G, with_aut=not args.no_aut)
    yn = lambda v: "yes" if v is True else "no" if v is False else str(v)
    print(f"group: {G.label}")
    print(f"order: {G.order}")
    print(f"abelian: {yn(prof.is_abelian)}")
    print(f"center order: {prof.center_order}")
    print(f"derived subgroup order: {prof.derived_order}")
    print(f"CCT: {yn(prof.is_cct)}")
    mono = f"yes (monolith order {prof.monolith_order})" if prof.is_monolithic else "no"
    print(f"monolithic: {mono}")
    print(f"extra-special: {yn(prof.is_extraspecial)}")
    print(f"nilpotency class: {prof.nilpotency_class}")
    if prof.aut_order is not None:
        print(f"|Aut|: {prof.aut_order}")
    if args.json:
        _dump({"label": G.label, "order": G.order, "profile": prof.to_dict()}, args.json)
    if entry is not None and entry.expected is not None and prof.aut_order is not None:
        if entry.expected.aut_order != prof.aut_order:
            print(f"MISMATCH: expected |Aut| {entry.expected.aut_order}")
            return EXIT_MISMATCH
    return EXIT_OK


def cmd_search(args) -> int:
    G, entry = resolve_group(args.group)
    kind = args.kind
    if args.mode == "lift":
        if entry is None or entry.expected is None or entry.expected.lift is None:
            raise UsageError("lift mode needs a catalog entry with quotient data")
        exp = entry.expected
        N = catalog.word_subgroup(G, exp.lift["kernel"])
        base = catalog.get_entry(exp.lift["base"])
        pre, st = catalog._base_reports(base.label)
        lr = count_via_lifting(G, N, pre if kind == "prestructures" else st, base.build(),
                               sample_lifts=args.lift_samples)
        print(f"{G.label} {kind} (lift from {base.label}): orbits: {lr.orbit_count}, total: {lr.total_count}")
        orbits, total, doc = lr.orbit_count, lr.total_count, lr.to_dict()
        if kind == "prestructures" and exp.notes:
            doc["notes"] = doc["notes"] + list(exp.notes)
        for note in doc["notes"]:
            print(f"note: {note}")
    else:
        if G.order > 128 or G.order > _env_cap():
            raise UsageError(f"order {G.order} exceeds the exact-search cap; use --mode lift")
        opts = SearchOptions(kind=kind, n_filter=args.n, worker_count=args.workers,
                             emit_representatives=args.emit_representatives)
        rep = (enumerate_prestructures if kind == "prestructures" else enumerate_structures)(G, opts)
        print(f"{G.label} {kind}: orbits: {rep.orbit_count}, total: {rep.total_count}")
        print(f"stabilizer histogram: {rep.orbit_stabilizer_histogram}")
        print(f"n values: {rep.n_values_seen}; z always central: {rep.z_always_central}; "
              f"C_G(K) = Z(G) always: {rep.k_centralizer_always_center}")
        if args.verbose:
            print(f"elapsed: {rep.elapsed:.2f} s, prefix nodes: {rep.prefix_nodes}")
        orbits, total, doc = rep.orbit_count, rep.total_count, rep.to_dict(G)
    if args.output:
        _dump({"label": G.label, "order": G.order, "search": doc}, args.output)
    if entry is not None and entry.expected is not None and args.n is None:
        exp = entry.expected
        want = exp.prestructure_orbits if kind == "prestructures" else exp.structure_orbits
        if orbits != want or (kind == "structures" and total != exp.structure_total):
            print(f"MISMATCH: expected orbits {want}")
            return EXIT_MISMATCH
    return EXIT_OK


def _env_cap() -> int:
    from .pcgroup import order_cap
    return order_cap()


def cmd_verify(args) -> int:
    G, _ = resolve_group(args.group)
    entries = parse_tuple_arg(G, args.tuple)
    if len(entries) != 4 * args.b + 1:
        raise UsageError(f"genus {args.b} needs {4 * args.b + 1} entries, got {len(entries)}")
    if args.require == "prestructure" and args.b != 2:
        raise UsageError("prestructures are defined for genus 2 only")
    rep = verify_tuple(G, entries, b=args.b, require=args.require, n=args.n)
    for line in rep.lines():
        print(line)
    verdict = "pass" if rep.passed else "FAIL"
    print(f"{verdict}: type ({args.b}, {rep.z_order})")
    return EXIT_OK if rep.passed else EXIT_MISMATCH


def cmd_catalog(args) -> int:
    try:
        art = catalog.run_catalog(order=args.order, label=args.label, workers=args.workers,
                                  cross_check=not args.no_cross_check, lift_samples=args.lift_samples)
    except KeyError as exc:
        raise UsageError(str(exc)) from None
    rows = art.summary_rows()
    cols = ["label", "order", "monolithic", "aut_order", "prestructure_orbits",
            "structure_orbits", "structure_total", "mode", "status"]
    widths = {c: max(len(c), *(len(str(r[c])) for r in rows)) if rows else len(c) for c in cols}
    print("  ".join(c.ljust(widths[c]) for c in cols))
    for r in rows:
        print("  ".join(str(r[c]).ljust(widths[c]) for c in cols))
    for res in art.results:
        for d in res.diffs:
            print(f"{res.label}: {d['metric']} expected {d['expected']} got {d['actual']}")
        if res.error:
            print(f"{res.label}: {res.error}")
    withs = sum(1 for r in rows if r["structure_orbits"] and r["order"] <= 127)
    print(f"groups of order at most 127 with structures: {withs}")
    if args.out:
        for p in art.write(args.out):
            print(f"wrote {p}")
    if art.invariant_violation:
        return EXIT_INVARIANT
    return EXIT_OK if art.ok else EXIT_MISMATCH


def cmd_emit(args) -> int:
    path = Path(args.group)
    if path.is_file():
        text = path.read_text()
        if text.lstrip().startswith("order"):
            raise UsageError("external tables carry no presentation")
        pres = parse_presentation(text)
    else:
        try:
            pres = catalog.get_entry(args.group).presentation
        except KeyError:
            raise UsageError(f"{args.group!r} is neither a file nor a catalog label") from None
    text = emit_presentation(pres)
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="braidquot",
                                description="Finite quotients of surface pure braid groups.")
    p.add_argument("-v", "--verbose", action="store_true", help="print timing information")
    sub = p.add_subparsers(dest="command", required=True)
    workers_default = os.cpu_count() or 1

    a = sub.add_parser("analyze", help="print the group profile")
    a.add_argument("group", help="catalog label, presentation file or table file")
    a.add_argument("--no-aut", action="store_true", help="skip the automorphism group")
    a.add_argument("--json", metavar="PATH", help="also write the profile as JSON")
    a.set_defaults(func=cmd_analyze)

    s = sub.add_parser("search", help="count prestructures or structures")
    s.add_argument("group")
    s.add_argument("--kind", choices=["prestructures", "structures"], default="prestructures")
    s.add_argument("--mode", choices=["exact", "lift"], default="exact")
    s.add_argument("--n", type=int, help="only count tuples with o(z) = N")
    s.add_argument("--workers", type=int, default=workers_default)
    s.add_argument("--emit-representatives", action="store_true")
    s.add_argument("--lift-samples", type=int, default=10_000)
    s.add_argument("--output", "-o", metavar="PATH", help="write the report as JSON")
    s.set_defaults(func=cmd_search)

    v = sub.add_parser("verify", help="check a tuple relation by relation")
    v.add_argument("group")
    v.add_argument("--b", type=int, default=2, help="genus (default 2)")
    v.add_argument("--tuple", required=True,
                   help="entries r11;t11;...;z as exponent vectors (e.g. 1,0,0,0,0;...) or indices")
    v.add_argument("--require", choices=["structure", "prestructure"], default="structure")
    v.add_argument("--n", type=int, help="required order of z")
    v.set_defaults(func=cmd_verify)

    c = sub.add_parser("catalog", help="reproduce the catalog tables")
    c.add_argument("--order", type=int)
    c.add_argument("--label")
    c.add_argument("--workers", type=int, default=workers_default)
    c.add_argument("--out", metavar="DIR", help="write JSON reports and summary.csv here")
    c.add_argument("--no-cross-check", action="store_true",
                   help="skip the exact recount of lift-mode entries")
    c.add_argument("--lift-samples", type=int, default=10_000)
    c.set_defaults(func=cmd_catalog)

    e = sub.add_parser("emit-presentation", help="print a presentation file")
    e.add_argument("group")
    e.add_argument("--output", "-o", metavar="PATH")
    e.set_defaults(func=cmd_emit)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "workers", 1) is not None and getattr(args, "workers", 1) < 1:
        parser.error("--workers must be positive")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (PresentationError, InconsistentPresentation, OrderCapExceeded,
            catalog.TableFormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InvariantViolation as exc:
        print(f"internal invariant violated: {exc}", file=sys.stderr)
        return EXIT_INVARIANT


if __name__ == "__main__":
    sys.exit(main())
