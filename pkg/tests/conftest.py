import random
from pathlib import Path

import numpy as np
import pandas as pd
import pytest
from hypothesis import strategies as st

from regrank.metapath import Concat, Join, MetaPathError, Repeat, Select, Seq, adjacent, all_sequences
from regrank.preferences import build_tpg, preference_frame

ROOT = Path(__file__).resolve().parents[1]
ML100K = ROOT / "data" / "ml-100k" / "u.data"

needs_ml100k = pytest.mark.skipif(not ML100K.exists(), reason="ML100K not present; run scripts/fetch_ml100k.py")


@pytest.fixture(scope="session")
def ml100k():
    if not ML100K.exists():
        pytest.skip("ML100K not present; run scripts/fetch_ml100k.py")
    from regrank.io import DatasetDescriptor, ingest

    return ingest(DatasetDescriptor("movielens-100k", ML100K))


# -- random rating tables / graphs -------------------------------------------


def random_ratings(rng: np.random.Generator, n_users=6, n_items=6, density=0.5, levels=5) -> pd.DataFrame:
    rows = []
    for u in range(n_users):
        for i in range(n_items):
            if rng.random() < density:
                rows.append((f"u{u}", f"i{i}", float(rng.integers(1, levels + 1))))
    return pd.DataFrame(rows, columns=["user", "item", "rating"])


def random_tpg(seed: int, n_users=6, n_items=6, density=0.5, levels=5):
    """A small TPG, or ``None`` when the draw yields no preference at all."""
    rng = np.random.default_rng(seed)
    prefs = preference_frame(random_ratings(rng, n_users, n_items, density, levels))
    return build_tpg(prefs) if len(prefs) else None


@st.composite
def rating_tables(draw, max_users=5, max_items=5):
    n_users = draw(st.integers(1, max_users))
    n_items = draw(st.integers(2, max_items))
    cells = draw(
        st.lists(
            st.tuples(st.integers(0, n_users - 1), st.integers(0, n_items - 1), st.integers(1, 5)),
            min_size=2,
            max_size=n_users * n_items,
            unique_by=lambda t: (t[0], t[1]),
        )
    )
    return pd.DataFrame(
        [(f"u{u}", f"i{i}", float(r)) for u, i, r in cells], columns=["user", "item", "rating"]
    )


@st.composite
def tpgs(draw, max_users=5, max_items=5):
    prefs = preference_frame(draw(rating_tables(max_users, max_items)))
    if len(prefs) == 0:
        from hypothesis import assume

        assume(False)
    return build_tpg(prefs)


# -- random well-typed meta-path expressions ----------------------------------

_PATHS = [p for p in all_sequences(4)]


def random_expr(rng: random.Random, ops: int) -> object:
    """A well-typed expression with at most ``ops`` operators, built from raw nodes.

    Raw ``Join``/``Concat`` nodes are used on purpose so that nothing is
    pre-simplified by the smart constructors.
    """
    for _ in range(200):
        try:
            return _attempt(rng, ops)
        except MetaPathError:
            continue
    return Seq(rng.choice(_PATHS))


def _attempt(rng, ops):
    if ops == 0 or rng.random() < 0.25:
        return Seq(rng.choice(_PATHS))
    kind = rng.choice(["join", "concat", "select", "repeat"])
    if kind == "repeat":
        body = _attempt(rng, ops - 1)
        if body.first != body.last:
            body = Seq(rng.choice([p for p in _PATHS if p[0] == p[-1] and len(p) > 1]))
        return Repeat(body)
    left_ops = rng.randint(0, ops - 1)
    a = _attempt(rng, left_ops)
    b = _attempt(rng, ops - 1 - left_ops)
    if kind == "join":
        if a.last != b.first:
            b = Concat((Seq(a.last), b)) if adjacent(a.last, b.first) else Seq(a.last + rng.choice("UPR"))
        return Join((a, b))
    if kind == "concat":
        return Concat((a, b))
    return Select((a, b))


# -- acceptance summary ---------------------------------------------------------

ACCEPTANCE_LINES: list[str] = []


def record_criterion(label: str, ok: bool, detail: str) -> bool:
    line = f"[{'PASS' if ok else 'FAIL'}] {label}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
