from __future__ import annotations

from functools import lru_cache

from braidquot import catalog
from braidquot.search import SearchOptions, enumerate_prestructures, enumerate_structures


@lru_cache(maxsize=None)
def group(label: str):
    return catalog.get_entry(label).build()


@lru_cache(maxsize=None)
def report(label: str, kind: str, reps: bool = False):
    """Search reports are shared between test modules; the big ones take seconds."""
    G = group(label)
    opts = SearchOptions(kind=kind, emit_representatives=reps)
    fn = enumerate_prestructures if kind == "prestructures" else enumerate_structures
    return fn(G, opts)


def catalog_labels() -> list[str]:
    return [e.label for e in catalog.builtin_catalog() if not e.auxiliary]


def pytest_terminal_summary(terminalreporter):
    lines = []
    for outcome in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(outcome, []):
            nodeid = getattr(rep, "nodeid", "")
            if "test_acceptance.py::test_criterion_" not in nodeid or rep.when != "call":
                continue
            detail = dict(rep.user_properties).get("detail", "")
            num = int(nodeid.split("test_criterion_")[1].split("_")[0])
            lines.append((num, f"{'PASS' if outcome == 'passed' else 'FAIL'} criterion {num}: {detail}"))
    if lines:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(lines):
            terminalreporter.write_line(line)
