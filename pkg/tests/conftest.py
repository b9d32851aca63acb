import numpy as np
import pytest

from circlepatterns.bquad import derive_views
from circlepatterns.lattice import (gen_grid_projection, gen_hexagonal,
                                    gen_square_grid, penrose_plane)

PENROSE_OFFSET = (0.1, 0.23, 0.37, 0.05, 0.61)


def square_faces(nx, ny):
    """CCW quadruples of an ``nx`` by ``ny`` block of unit squares.

    Corners are lattice points ``(i, j)``; white ones have even ``i + j``.
    """
    out = []
    for j in range(ny):
        for i in range(nx):
            c = [(i, j), (i + 1, j), (i + 1, j + 1), (i, j + 1)]
            if (i + j) % 2:
                c = c[1:] + c[:1]
            out.append(tuple(c))
    return out


@pytest.fixture(scope="session")
def square_emb():
    return gen_square_grid((1.0, 0.0, 2.0, 1.0), 1 / 16)


@pytest.fixture(scope="session")
def hex_emb():
    return gen_hexagonal((1.0, 0.0, 2.0, 1.0), 1 / 16)


@pytest.fixture(scope="session")
def penrose_emb():
    return gen_grid_projection(penrose_plane(), PENROSE_OFFSET,
                               (1.0, 0.0, 2.0, 1.0), 1 / 12)


@pytest.fixture(scope="session")
def lattices(square_emb, hex_emb, penrose_emb):
    return {"square": square_emb, "hex": hex_emb, "projection": penrose_emb}


@pytest.fixture(scope="session")
def unit_square_grid():
    """Square grid with unit edges centred at the origin, about 90 x 90."""
    return gen_square_grid((-45.0, -45.0, 45.0, 45.0), 1.0)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def view_of(emb):
    return derive_views(emb.bq)


_CRITERIA = {}


@pytest.fixture
def record_criterion():
    """Record a pass/fail line for an acceptance criterion, then assert it."""
    def record(n, checks, elapsed, limit, detail=""):
        checks = dict(checks)
        checks[f"runtime {elapsed:.2f}s < {limit:g}s"] = elapsed < limit
        failed = [k for k, ok in checks.items() if not ok]
        status = "FAIL" if failed else "PASS"
        line = f"criterion {n}: {status} ({elapsed:.2f}s) {detail}".rstrip()
        if failed:
            line += " | failed: " + "; ".join(failed)
        _CRITERIA[n] = line
        print(line)
        assert not failed, line
    return record


def pytest_terminal_summary(terminalreporter):
    if _CRITERIA:
        terminalreporter.section("acceptance criteria")
        for n in sorted(_CRITERIA):
            terminalreporter.write_line(_CRITERIA[n])
