"""Independent exhaustive oracle: exact rationals, reverse subset order, no numpy."""
import itertools
import math
from fractions import Fraction


def _power(x, z):
    return Fraction(x) ** int(z)


def reference_opt(dist, k, z):
    """Lexicographically smallest optimal k-subset and its exact objective (z-th power sum or max)."""
    n = len(dist)
    D = [[Fraction(float(dist[i][j])) for j in range(n)] for i in range(n)]
    best_key = None
    best = []
    for S in reversed(list(itertools.combinations(range(n), k))):
        near = [min(D[x][c] for c in S) for x in range(n)]
        if math.isinf(z):
            val = max(near)
        else:
            val = sum(_power(v, z) for v in near)
        if best_key is None or val < best_key:
            best_key, best = val, [S]
        elif val == best_key:
            best.append(S)
    return min(best), best_key
