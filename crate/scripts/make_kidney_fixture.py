"""Regenerate crates/core/tests/data/kidney.csv.

The kidney-function table (157 volunteers, columns age and tot) is not
redistributable from this environment, so the fixture is a reconstruction that
matches reference sufficient statistics: the upper factor U of the Gram
matrix of (1 | age | age^2 | tot). Integer ages are searched so that sum(age),
sum(age^2) and sum(age^3) are exact and sum(age^4) is as close as possible; tot
is then built as a fitted quadratic plus a residual orthogonal to the design,
scaled to the reference residual sum of squares.

Deterministic: `python3 scripts/make_kidney_fixture.py > crates/core/tests/data/kidney.csv`
"""
import random

import numpy as np

N = 157
U = {
    "u12": 5714.0,
    "u13": 247514.0,
    "u22": 39553.516,
    "u23": 3668218.0,
    "u33": 9674572.0,
    "u24": -3108.943,
    "u34": -1473.118,
    "u44": 502.535,
}

S1 = 5714
S2 = 247514
S3 = round(U["u23"] + S1 * S2 / N)
_u23 = S3 - S1 * S2 / N
_s4 = U["u33"] + S2**2 / N + _u23**2 / U["u22"]
# a^4 - a^2 is divisible by 12, so S4 = S2 (mod 12)
S4 = round((_s4 - S2) / 12) * 12 + S2
LO, HI = 18, 88


def moments(ages):
    return [sum(a**k for a in ages) for k in (1, 2, 3, 4)]


def anneal(rng):
    ages = [min(HI, max(LO, int(LO + rng.gammavariate(1.6, 11.5)))) for _ in range(N)]
    while sum(ages) != S1:
        i = rng.randrange(N)
        step = 1 if sum(ages) < S1 else -1
        if LO <= ages[i] + step <= HI:
            ages[i] += step
    m = moments(ages)

    def cost(m):
        return abs(m[1] - S2) / S2 + abs(m[2] - S3) / S3 + abs(m[3] - S4) / S4

    best = cost(m)
    temp = 1e-3
    for _ in range(400_000):
        i, j = rng.randrange(N), rng.randrange(N)
        d = rng.choice((1, 2, 3))
        if i == j or not (LO <= ages[i] + d <= HI and LO <= ages[j] - d <= HI):
            continue
        a, b = ages[i], ages[j]
        m2 = [m[0]] + [m[k - 1] + (a + d) ** k - a**k + (b - d) ** k - b**k for k in (2, 3, 4)]
        c = cost(m2)
        if c <= best or rng.random() < np.exp((best - c) / temp):
            ages[i], ages[j] = a + d, b - d
            m, best = m2, c
        temp *= 0.99997
    return ages, m


def pair_moves(ages):
    """(a -> a+d, b -> b-d) over distinct present values; keyed by (dS2, dS3)."""
    vals = sorted(set(ages))
    moves = {}
    for a in vals:
        for b in vals:
            if a == b and ages.count(a) < 2:
                continue
            for d in range(1, 8):
                if not (LO <= a + d <= HI and LO <= b - d <= HI):
                    continue
                dm = tuple((a + d) ** k - a**k + (b - d) ** k - b**k for k in (2, 3, 4))
                moves.setdefault(dm[:2], []).append((dm[2], a, b, d))
    return moves


def apply_pair(ages, a, b, d):
    ages[ages.index(a)] = a + d
    ages[ages.index(b)] = b - d


def exact_low(ages, m):
    """Two pair moves that zero the S2 and S3 errors, keeping S4 as close as possible."""
    e2, e3 = S2 - m[1], S3 - m[2]
    moves = pair_moves(ages)
    best = None
    for (d2, d3), lst in moves.items():
        rest = moves.get((e2 - d2, e3 - d3))
        if not rest:
            continue
        for mv1 in lst:
            for mv2 in rest:
                err = abs(m[3] + mv1[0] + mv2[0] - S4)
                if best is None or err < best[0]:
                    best = (err, mv1, mv2)
    if best is None:
        return None
    trial = list(ages)
    _, (_, a1, b1, d1), (_, a2, b2, d2) = best
    apply_pair(trial, a1, b1, d1)
    if trial.count(a2) == 0 or trial.count(b2) == 0 or (a2 == b2 and trial.count(a2) < 2):
        return None
    apply_pair(trial, a2, b2, d2)
    return trial


def quad_swaps():
    """Pairs of 4-multisets in [LO, HI] sharing their first three power sums."""
    from itertools import combinations_with_replacement

    buckets = {}
    for q in combinations_with_replacement(range(LO, HI + 1), 4):
        key = tuple(sum(x**k for x in q) for k in (1, 2, 3))
        buckets.setdefault(key, []).append(q)
    return [qs for qs in buckets.values() if len(qs) > 1]


def tune_high(ages, m):
    """Greedy 4-for-4 swaps that keep S1..S3 fixed and pull S4 to its target."""
    from collections import Counter

    groups = quad_swaps()
    for _ in range(50):
        e4 = S4 - m[3]
        if e4 == 0:
            break
        have = Counter(ages)
        best = None
        for qs in groups:
            p4 = [sum(x**4 for x in q) for q in qs]
            for i, src in enumerate(qs):
                need = Counter(src)
                if any(have[v] < c for v, c in need.items()):
                    continue
                for j, dst in enumerate(qs):
                    if i == j:
                        continue
                    gain = abs(e4) - abs(e4 - (p4[j] - p4[i]))
                    if gain > 0 and (best is None or gain > best[0]):
                        best = (gain, src, dst, p4[j] - p4[i])
        if best is None:
            break
        _, src, dst, d4 = best
        for v in src:
            ages.remove(v)
        ages.extend(dst)
        m = [m[0], m[1], m[2], m[3] + d4]
    return ages, m


def search(seed=20240117):
    rng = random.Random(seed)
    for _ in range(100):
        ages, m = anneal(rng)
        ages2 = exact_low(ages, m)
        if ages2 is None:
            continue
        m2 = moments(ages2)
        if m2[:3] == [S1, S2, S3]:
            return tune_high(ages2, m2)
    raise RuntimeError("no exact solution found")


def main():
    ages, m = search()
    assert moments(ages) == m and m[:3] == [S1, S2, S3], m
    assert abs(m[3] - S4) <= 12 * 60, (m, S4)
    age = np.array(ages, dtype=float)
    X = np.column_stack([np.ones(N), age, age**2])
    # targets for X^T tot from the reference U (u14 = 0)
    s2tot = U["u34"] + U["u23"] * U["u24"] / U["u22"]
    rhs = np.array([0.0, U["u24"], s2tot])
    b = np.linalg.solve(X.T @ X, rhs)
    rng = np.random.default_rng(7)
    e = rng.standard_normal(N)
    e -= X @ np.linalg.lstsq(X, e, rcond=None)[0]
    e *= np.sqrt(U["u44"] / (e @ e))
    tot = X @ b + e
    order = rng.permutation(N)
    print("age,tot")
    for k in order:
        print(f"{ages[k]},{tot[k]:.6f}")


if __name__ == "__main__":
    main()
