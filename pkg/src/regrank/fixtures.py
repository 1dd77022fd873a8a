"""Tiny rating tables for the illustrative scenarios (preferences, similarity types, unreliable paths).

Ratings are chosen so that the strict-inequality rule yields exactly the
intended preferences; equal ratings contribute nothing.
"""

from __future__ import annotations

import pandas as pd

FIXTURES: dict[str, list[tuple[str, str, float]]] = {
    # Lee prefers B over A, Martin prefers B over C: both touch B but share no preference.
    "fig2": [
        ("Lee", "A", 1), ("Lee", "B", 5),
        ("Martin", "B", 5), ("Martin", "C", 1),
    ],
    # Jack and John agree on B over A and D over A.
    "fig3a": [
        ("Jack", "A", 1), ("Jack", "B", 5), ("Jack", "D", 5),
        ("John", "A", 1), ("John", "B", 5), ("John", "D", 5),
    ],
    # Jack: B over A; John: C over A; Lee: A over D.
    "fig3b": [
        ("Jack", "A", 1), ("Jack", "B", 5),
        ("John", "A", 1), ("John", "C", 5),
        ("Lee", "A", 5), ("Lee", "D", 1),
    ],
    # Jack: B over A, C over A; John: B over C; Lee: A over C.
    # Contains the walk Jack, A<B, B_d, C<B, C_u, C<A, A_d (types UPRPRPR).
    "fig6": [
        ("Jack", "A", 1), ("Jack", "B", 5), ("Jack", "C", 5),
        ("John", "B", 5), ("John", "C", 1),
        ("Lee", "A", 5), ("Lee", "C", 1),
    ],
    # Mike and Martin share A over B and D over B; Jack alone prefers A over C.
    "fig7": [
        ("Mike", "A", 5), ("Mike", "B", 1), ("Mike", "D", 5),
        ("Martin", "A", 5), ("Martin", "B", 1), ("Martin", "D", 5),
        ("Jack", "A", 5), ("Jack", "C", 1),
    ],
}


def fixture(name: str) -> pd.DataFrame:
    try:
        rows = FIXTURES[name]
    except KeyError:
        raise KeyError(f"unknown fixture {name!r}; available: {', '.join(FIXTURES)}") from None
    frame = pd.DataFrame(rows, columns=["user", "item", "rating"])
    frame["rating"] = frame["rating"].astype(float)
    return frame.sort_values(["user", "item"], kind="stable").reset_index(drop=True)
