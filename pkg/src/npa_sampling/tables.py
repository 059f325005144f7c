"""Reference counts of distinct level-3 moment-matrix entries.

Each row is ``(X, Y, A, B, algebraic, rank1)``: two parties with X and Y
settings of A and B outcomes.  The algebraic count equals the rank-2 sampled
count; ``rank1`` is the published rank-1 sampled count.
"""
from __future__ import annotations

from typing import Tuple

from npa_sampling.algebra import Scenario

TABLE1: Tuple[Tuple[int, int, int, int, int, int], ...] = (
    (2, 2, 2, 2, 61, 61),
    (2, 2, 2, 3, 422, 410),
    (2, 2, 3, 3, 1449, 1412),
    (2, 3, 2, 2, 319, 292),
    (2, 3, 2, 3, 7048, 6495),
    (2, 3, 3, 2, 1122, 1077),
    (2, 3, 3, 3, 12531, 11919),
    (3, 3, 2, 2, 868, 808),
    (3, 3, 3, 2, 10438, 9822),
    (3, 3, 3, 3, 38017, 36717),
)


def table1_scenarios():
    return [Scenario.bipartite(*row[:4]) for row in TABLE1]
