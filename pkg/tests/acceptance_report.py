"""Collects per-criterion outcomes so the session summary can print one line each."""
from collections import OrderedDict

import pytest

TITLES = OrderedDict([
    (1, "surface tension constant"),
    (2, "profile law"),
    (3, "conservation suite"),
    (4, "jump conditions, C1 planar sweep"),
    (5, "Laplace law"),
    (6, "C2 phase-transition law"),
    (7, "zeroth-order oracle residuals"),
    (8, "bulk limit"),
    (9, "numerics hygiene"),
])

RESULTS = {k: [] for k in TITLES}


def check(criterion, name, ok, detail, known_gap=None):
    """Record one sub-check. Known gaps become xfail; anything else must pass."""
    ok = bool(ok)
    RESULTS[criterion].append((name, ok, detail))
    print(f"[criterion {criterion}] {'PASS' if ok else 'FAIL'} {name}: {detail}")
    if not ok:
        if known_gap:
            pytest.xfail(known_gap)
        raise AssertionError(f"criterion {criterion} / {name}: {detail}")


def summary_lines():
    lines = []
    for k, title in TITLES.items():
        subs = RESULTS[k]
        if not subs:
            lines.append(f"criterion {k} NOT RUN  {title}")
            continue
        failed = [f"{n} ({d})" for n, ok, d in subs if not ok]
        status = "PASS" if not failed else "FAIL"
        tail = f"{len(subs)} checks" if not failed else "; ".join(failed)
        lines.append(f"criterion {k} {status}  {title}: {tail}")
    return lines
