"""Slow, independent reference implementations used as test oracles."""

import itertools
import math


def all_profiles(sizes):
    return list(itertools.product(*[range(k) for k in sizes]))


def brute_chi(points, sizes, i, dist=None):
    """Double loop straight from the definition over a {profile: value} dict."""
    dist = dist or (lambda x, y: abs(x - y))
    total = 0
    for a, va in points.items():
        for b in range(sizes[i]):
            sub = a[:i] + (b,) + a[i + 1:]
            if sub in points:
                total += dist(points[sub], va)
    return total


def brute_weighted(points, weights, sizes, i, cond=None):
    total = 0.0
    for a, va in points.items():
        for b in range(sizes[i]):
            sub = a[:i] + (b,) + a[i + 1:]
            if sub in points:
                c = weights[sub] if cond is None else cond(sub)
                total += weights[a] * c * abs(points[sub] - va)
    return total


def brute_zeta_raw(points, sizes, i, b):
    return sum(points[a[:i] + (b,) + a[i + 1:]] - v for a, v in points.items())


def brute_swings(n, value, i):
    """sum over S not containing i of |v(S + i) - v(S)|, coalitions as frozensets."""
    others = [j for j in range(n) if j != i]
    total = 0
    for r in range(len(others) + 1):
        for s in itertools.combinations(others, r):
            total += abs(value(frozenset(s) | {i}) - value(frozenset(s)))
    return total


def brute_shapley(n, value, i):
    total = 0.0
    for perm in itertools.permutations(range(n)):
        before = frozenset(perm[: perm.index(i)])
        total += value(before | {i}) - value(before)
    return total / math.factorial(n)
