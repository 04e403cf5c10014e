import random
from fractions import Fraction

import pytest

from greenfield.errors import DimensionMismatch
from greenfield.linalg import (IncrementalRank, bareiss_det, det_fraction,
                               solve_preferring_early_columns)


def naive_det(rows):
    n = len(rows)
    if n == 0:
        return Fraction(1)
    if n == 1:
        return Fraction(rows[0][0])
    total = Fraction(0)
    for j in range(n):
        if rows[0][j] == 0:
            continue
        minor = [r[:j] + r[j + 1:] for r in rows[1:]]
        total += (-1) ** j * Fraction(rows[0][j]) * naive_det(minor)
    return total


def test_bareiss_matches_cofactor_expansion():
    rng = random.Random(1)
    for _ in range(60):
        n = rng.randint(1, 5)
        m = [[rng.randint(-9, 9) for _ in range(n)] for _ in range(n)]
        assert bareiss_det(m) == naive_det(m)


def test_bareiss_singular_and_shapes():
    assert bareiss_det([[1, 2], [2, 4]]) == 0
    assert bareiss_det([]) == 1
    with pytest.raises(DimensionMismatch):
        bareiss_det([[1, 2], [3]])


def test_det_fraction_row_scaling():
    rng = random.Random(2)
    for _ in range(30):
        n = rng.randint(1, 4)
        m = [[Fraction(rng.randint(-9, 9), rng.randint(1, 9)) for _ in range(n)]
             for _ in range(n)]
        assert det_fraction(m) == naive_det(m)


def test_solver_prefers_early_columns():
    # x + y = 1 with columns (x, y): pivot on x, free y = 0
    sol = solve_preferring_early_columns([[1, 1]], [1])
    assert sol == [Fraction(1), Fraction(0)]


def test_solver_consistency_and_multi_rhs():
    a = [[1, 0, 1], [0, 1, 1]]
    sols = solve_preferring_early_columns(a, [[1, 2], [0, 1]])
    for sol, b in zip(sols, [[1, 2], [0, 1]]):
        got = [sum(a[i][j] * sol[j] for j in range(3)) for i in range(2)]
        assert got == [Fraction(x) for x in b]
    assert solve_preferring_early_columns([[1], [1]], [1, 2]) is None


def test_incremental_rank():
    tr = IncrementalRank(3)
    assert tr.add([1, 2, 3]) is not None
    assert tr.add([2, 4, 6]) is None
    assert tr.add([0, 1, 1]) is not None
    assert tr.add([1, 3, 4]) is None  # row1 + row3
    assert tr.add([0, 0, 5]) is not None
    assert tr.rank == 3
    assert tr.add([7, 8, 9]) is None
