"""Multi-index algebra.

A multi-index is a plain tuple of non-negative ints, one entry per variable.
Enumeration is graded lexicographic: ascending total degree, and within a
degree the leading variables carry the higher powers first, e.g. for two
variables and degree two: (0,0), (1,0), (0,1), (2,0), (1,1), (0,2).
"""

import math
from functools import lru_cache

from .errors import ParameterError

# Factorials and Hermite/jet recursions are only exercised up to this order.
ORDER_CAP = 12

# Guard against accidentally materializing astronomically many indices.
COUNT_CAP = 2_000_000


def index_order(k) -> int:
    """Total degree |k|."""
    return int(sum(k))


def index_factorial(k) -> int:
    """k! = prod(k_i!). Guarded at |k| <= ORDER_CAP."""
    if index_order(k) > ORDER_CAP:
        raise ParameterError(f"multi-index order {index_order(k)} exceeds cap {ORDER_CAP}")
    out = 1
    for ki in k:
        out *= math.factorial(int(ki))
    return out


def monomial_eval(v, k) -> float:
    """prod v_i^{k_i}; the empty product is 1."""
    if len(v) != len(k):
        raise ParameterError(f"vector length {len(v)} != multi-index length {len(k)}")
    out = 1.0
    for vi, ki in zip(v, k):
        if ki:
            out *= float(vi) ** int(ki)
    return out


def _compositions(total, dim):
    # First variable takes the highest power first.
    if dim == 1:
        yield (total,)
        return
    for first in range(total, -1, -1):
        for rest in _compositions(total - first, dim - 1):
            yield (first,) + rest


@lru_cache(maxsize=256)
def enumerate_multiindices(dim: int, max_total_degree: int):
    """All k with |k| <= max_total_degree in graded-lex order, as a tuple."""
    if dim < 1:
        raise ParameterError("dimension must be >= 1")
    if max_total_degree < 0:
        raise ParameterError("max_total_degree must be >= 0")
    count = math.comb(dim + max_total_degree, dim)
    if count > COUNT_CAP:
        raise ParameterError(f"{count} multi-indices exceed cap {COUNT_CAP}")
    out = []
    for total in range(max_total_degree + 1):
        out.extend(_compositions(total, dim))
    return tuple(out)


@lru_cache(maxsize=256)
def multiindex_positions(dim: int, max_total_degree: int):
    """Map multi-index tuple -> position in enumerate_multiindices order."""
    return {k: i for i, k in enumerate(enumerate_multiindices(dim, max_total_degree))}


def multiindex_count(dim: int, max_total_degree: int) -> int:
    return math.comb(dim + max_total_degree, dim)
