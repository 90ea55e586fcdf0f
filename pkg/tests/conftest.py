import itertools

import numpy as np
import pytest

from fwgap import AtomSet, Box, L1Ball, Simplex


def brute_vertices(domain):
    """Extreme points listed independently of the library, in tie-break order."""
    d = domain.dim
    if isinstance(domain, Simplex):
        return [np.eye(d)[i] for i in range(d)]
    if isinstance(domain, Box):
        return [np.array(c, dtype=float) for c in itertools.product(*zip(domain.lo, domain.hi))]
    if isinstance(domain, L1Ball):
        out = []
        for i in range(d):
            for sign in (1.0, -1.0):
                v = np.zeros(d)
                v[i] = sign * domain.radius
                out.append(v)
        return out
    return [np.array(v) for v in domain.points]


def brute_argmin(vertices, c):
    best, best_val = None, np.inf
    for v in vertices:
        val = float(np.dot(v, c))
        if val < best_val:
            best, best_val = v, val
    return best, best_val


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def sample_domains():
    r = np.random.default_rng(7)
    return [
        Simplex(3),
        Simplex(6),
        Box([-1.0, -2.0, 0.5], [1.0, 0.0, 2.0]),
        L1Ball(1.5, 4),
        AtomSet(r.standard_normal((6, 2))),
        AtomSet(r.standard_normal((7, 3))),
    ]


DOMAINS = sample_domains()
DOMAIN_IDS = ["simplex3", "simplex6", "box3", "l1ball4", "atoms2d", "atoms3d"]


def pytest_terminal_summary(terminalreporter):
    """One pass/fail line per acceptance criterion, with the measured figures."""
    rows = {}
    for outcome in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(outcome, []):
            nodeid = getattr(rep, "nodeid", "")
            if "test_acceptance.py::test_criterion_" not in nodeid:
                continue
            if rep.when != "call" and outcome == "passed":
                continue
            name = nodeid.split("::", 1)[1]
            detail = dict(rep.user_properties).get("detail", "")
            ok = outcome == "passed" and rows.get(name, ("PASS",))[0] == "PASS"
            rows[name] = ("PASS" if ok else "FAIL", detail)
    if not rows:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(rows):
        status, detail = rows[name]
        label = name.removeprefix("test_criterion_")
        terminalreporter.write_line(f"{status}  criterion {label}" + (f"  -- {detail}" if detail else ""))
