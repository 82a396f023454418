"""Brute-force reference answers: score every string in Sigma^L.

Only for small L (4^8 = 65536 candidates); no pruning, no shared code with
the solver beyond the integer encoding.
"""

from functools import lru_cache
import itertools

import numpy as np


@lru_cache(maxsize=None)
def all_strings(length, sigma=4):
    grid = itertools.product(range(1, sigma + 1), repeat=length)
    return np.array(list(grid), dtype=np.int8).reshape(-1, length)


def radii(codes, sigma=4):
    """Max distance from every candidate string to the rows of ``codes``."""
    codes = np.asarray(codes)
    cands = all_strings(codes.shape[1], sigma)
    out = np.zeros(len(cands), dtype=np.int64)
    for row in codes:
        out = np.maximum(out, (cands != row).sum(axis=1))
    return out


def oracle_min(strings):
    return int(radii(strings.codes, len(strings.alphabet)).min())


def _decode(strings, rows):
    sym = strings.alphabet.symbols
    return {"".join(sym[c - 1] for c in r) for r in rows}


def oracle_solutions(strings, d, domains=None):
    """Every string within ``d`` of all inputs, optionally inside per-position domains."""
    sigma = len(strings.alphabet)
    cands = all_strings(strings.length, sigma)
    keep = radii(strings.codes, sigma) <= d
    if domains is not None:
        for j, dom in enumerate(domains):
            keep &= np.isin(cands[:, j], sorted(dom))
    return _decode(strings, cands[keep])


def oracle_diameter(strings):
    rows = [tuple(r) for r in strings.codes]
    return max((sum(a != b for a, b in zip(x, y)) for x in rows for y in rows), default=0)
