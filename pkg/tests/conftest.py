import numpy as np
import pytest

from graphrerank.corpus_io import RankTable


def random_rank_table(rng, n):
    rows = np.empty((n, n - 1), dtype=np.int64)
    for i in range(n):
        others = np.array([j for j in range(n) if j != i])
        rows[i] = rng.permutation(others)
    return RankTable(rows)


@pytest.fixture
def weight_fixture_table():
    """8-image corpus exercising both edge-weight schemes on images 1, 2, 3.

    Stored positions: 2 and 1 are mutually at rank 2 (weight 1/4); 3 sits at
    rank 4 of 1's list and vice versa (weight 1/8 once k reaches 5). The
    size-3 retrieval neighborhoods of 1 and 2 coincide, the size-5 ones of 1
    and 3 coincide.
    """
    return RankTable(
        np.array(
            [
                [1, 2, 3, 4, 5, 6, 7],
                [4, 2, 5, 3, 0, 6, 7],
                [4, 1, 5, 6, 0, 3, 7],
                [4, 2, 5, 1, 0, 6, 7],
                [1, 2, 3, 5, 6, 7, 0],
                [1, 2, 3, 4, 6, 7, 0],
                [2, 1, 3, 4, 5, 7, 0],
                [0, 1, 2, 3, 4, 5, 6],
            ]
        )
    )


@pytest.fixture
def structure_fixture_table():
    """12-image corpus for the directed-vs-undirected structural contrast.

    With k=5 and query 1: images 1 and 2 are mutual top-5; 3 is in 2's top-5
    but 2 is far down 3's list, so only the directed construction can reach 3
    (via the one-way edge 2 -> 3). Filler images never list 1 or 2 early.
    """
    filler_set = [0, 4, 5, 6, 7, 8, 9, 10, 11]
    rows = {}
    rows[1] = [2, 4, 5, 6, 7, 3, 8, 9, 10, 11, 0]
    rows[2] = [1, 3, 8, 9, 10, 4, 5, 6, 7, 11, 0]
    rows[3] = [8, 9, 10, 11, 0, 4, 5, 6, 7, 2, 1]
    for f in filler_set:
        rows[f] = [x for x in filler_set if x != f] + [3, 1, 2]
    return RankTable(np.array([rows[i] for i in range(12)]))
