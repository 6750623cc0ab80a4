import numpy as np
import pytest

from twkc.circuit import (Circuit, gen_grid_cnf, gen_lineage_qp, gen_sdisj, gen_sint,
                          random_circuit, random_monotone_formula)


@pytest.fixture
def c1():
    """x1 AND x2: var-gates 0 and 1, output and-gate 2."""
    return Circuit(("var", "var", "and"), ((), (), (0, 1)), 2)


def circuit_corpus(seed, count, max_vars=12, max_gates=30, window=3):
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        n_vars = int(rng.integers(1, max_vars + 1))
        n_gates = int(rng.integers(n_vars + 1, max(max_gates, n_vars + 1) + 1))
        out.append(random_circuit(rng, n_vars, n_gates, window=window))
    return out


def formula_corpus(seed, count=24, max_vars=10):
    """Monotone formulas for the bounds machinery: fixed families plus random ones."""
    fixed = [gen_sint(1), gen_sint(2), gen_sint(3), gen_sdisj(2), gen_sdisj(3),
             gen_grid_cnf(2, 2), gen_grid_cnf(2, 3), gen_grid_cnf(2, 4), gen_grid_cnf(3, 3),
             gen_lineage_qp([("a", "b"), ("b", "c")]),
             gen_lineage_qp([("a", "b"), ("b", "c"), ("c", "d"), ("d", "a")]),
             gen_lineage_qp([("a", "b"), ("a", "c"), ("a", "d"), ("b", "c")])]
    rng = np.random.default_rng(seed)
    rand = []
    while len(rand) < count:
        kind = "dnf" if len(rand) % 2 == 0 else "cnf"
        n = int(rng.integers(3, max_vars + 1))
        m = int(rng.integers(1, 2 * n))
        rand.append(random_monotone_formula(rng, kind, n, m, max_arity=3, max_degree=3))
    return [f for f in fixed + rand if f.n_vars <= max_vars]


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def criterion(request):
    """Record one pass/fail line per acceptance criterion.

    Usage: ``criterion(n, ok, detail)``; the line is printed in the
    terminal summary whether or not the test passes.
    """
    def record(number, ok, detail):
        ACCEPTANCE_LINES.append(f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}")
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
