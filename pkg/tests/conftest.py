import random

import pytest

from secfan.problem import from_points, from_weights

EX1_POINTS = [(1, 0), (2, 0), (3, 0), (1, 1), (0, 1), (0, 2)]
EX2_POINTS = [(1, 0), (2, 0), (3, 1), (0, 2), (0, 3)]
EX3_WEIGHT_ROWS = [[1, 1, 0, 0, -1, 0, -1], [0, 0, 1, 1, 1, -1, -2]]
ATIYAH_ROWS = [[1, 1, -1, -1]]


def ex4_rows(n):
    return [
        [1, 1, 0, 0, -n, n - 2],
        [0, 0, 1, 0, 1, -2],
        [0, 0, 0, 1, 0, -1],
    ]


@pytest.fixture(scope="session")
def ex1():
    return from_points(EX1_POINTS)


@pytest.fixture(scope="session")
def ex2():
    return from_points(EX2_POINTS)


@pytest.fixture(scope="session")
def ex2_deleted():
    return from_points(EX2_POINTS[:4])


@pytest.fixture(scope="session")
def ex3():
    return from_weights(EX3_WEIGHT_ROWS)


@pytest.fixture(scope="session")
def atiyah():
    return from_weights(ATIYAH_ROWS)


def random_noncy_problems(seed, count, max_n=7):
    rng = random.Random(seed)
    out = []
    while len(out) < count:
        k = rng.randint(1, 3)
        n = rng.randint(k + 1, max_n)
        rows = [[rng.randint(-3, 3) for _ in range(n)] for _ in range(k)]
        try:
            p = from_weights(rows)
        except (ValueError, AssertionError):
            continue
        if p.is_calabi_yau():
            continue
        out.append(p)
    return out


def random_cy_problems(seed, count, max_n=7):
    rng = random.Random(seed)
    out = []
    while len(out) < count:
        k = rng.randint(1, 3)
        n = rng.randint(k + 1, max_n - 1)
        rows = [[rng.randint(-3, 3) for _ in range(n)] for _ in range(k)]
        full = [row + [-sum(row)] for row in rows]
        try:
            p = from_weights(full)
        except (ValueError, AssertionError):
            continue
        out.append(p)
    return out


def coarse_chamber(problem, fan, volume):
    """The chamber whose stacky volume matches, unique in our examples."""
    from secfan.stacky import stacky_fan_of_chamber, stacky_volume

    hits = [
        c
        for c in fan.chambers
        if stacky_volume(stacky_fan_of_chamber(fan, c)) == volume
    ]
    assert hits, f"no chamber with stacky volume {volume}"
    return hits[0]


def chamber_with_markers(problem, fan, marker_sets):
    """The chamber whose stacky fan has exactly these marker index sets."""
    from secfan.stacky import stacky_fan_of_chamber

    want = sorted(frozenset(m) for m in marker_sets)
    for c in fan.chambers:
        sf = stacky_fan_of_chamber(fan, c)
        got = sorted(frozenset(s.marker_indices) for s in sf.simplices)
        if got == want:
            return c
    raise AssertionError(f"no chamber with markers {marker_sets}")
