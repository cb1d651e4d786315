"""Truncated multivariate Taylor (jet) arithmetic.

Coefficients follow the Taylor convention: the entry for multi-index k is
(d^k f)(a) / k!, so composition stays well scaled and the k-th derivative
is recovered by multiplying with k!. Coefficient vectors are laid out in
the graded-lex order of ``enumerate_multiindices``.
"""

from functools import lru_cache

import numpy as np
import scipy.sparse as sp

from .errors import ParameterError
from .gelu import gelu_taylor_coeffs
from .multiindex import (
    ORDER_CAP,
    enumerate_multiindices,
    index_factorial,
    multiindex_positions,
)


@lru_cache(maxsize=128)
def jet_mul_table(nvars: int, degree: int):
    """Sparse scatter operator for truncated jet products.

    Returns (ii, jj, scatter) where entrywise products A[..., ii]*B[..., jj]
    summed into their target indices via ``scatter`` (shape npairs x M)
    realize the degree-truncated product.
    """
    idx = enumerate_multiindices(nvars, degree)
    pos = multiindex_positions(nvars, degree)
    orders = [sum(k) for k in idx]
    ii, jj, tt = [], [], []
    for i, ki in enumerate(idx):
        for j, kj in enumerate(idx):
            if orders[i] + orders[j] > degree:
                continue
            kt = tuple(a + b for a, b in zip(ki, kj))
            ii.append(i)
            jj.append(j)
            tt.append(pos[kt])
    ii = np.asarray(ii, dtype=np.int64)
    jj = np.asarray(jj, dtype=np.int64)
    tt = np.asarray(tt, dtype=np.int64)
    scatter = sp.csr_matrix(
        (np.ones(len(tt)), (np.arange(len(tt)), tt)), shape=(len(tt), len(idx))
    )
    return ii, jj, scatter


def batch_mul(a, b, nvars: int, degree: int):
    """Truncated product of jet coefficient batches of shape (n, M)."""
    ii, jj, scatter = jet_mul_table(nvars, degree)
    vals = a[:, ii] * b[:, jj]
    return vals @ scatter


def batch_compose_outer(outer, inner, nvars: int, degree: int):
    """Compose outer Taylor tables with inner jets, batched.

    outer has shape (n, p+1): row q holds f^{(q)}(a_i)/q! at the inner
    constant terms a_i; inner has shape (n, M). Returns the jets of f(inner)
    truncated at ``degree`` via Horner in (inner - a).
    """
    n, m = inner.shape
    q_top = min(outer.shape[1] - 1, degree)
    g = inner.copy()
    g[:, 0] = 0.0
    res = np.zeros_like(inner)
    res[:, 0] = outer[:, q_top]
    for q in range(q_top - 1, -1, -1):
        res = batch_mul(res, g, nvars, degree)
        res[:, 0] += outer[:, q]
    return res


def batch_gelu(inner, nvars: int, degree: int):
    """Apply GELU to a batch of jets via composition with its Taylor table."""
    outer = gelu_taylor_coeffs(inner[:, 0], degree)
    return batch_compose_outer(outer, inner, nvars, degree)


class Jet:
    """A single truncated Taylor expansion in ``nvars`` active variables."""

    __slots__ = ("nvars", "degree", "coeffs")

    def __init__(self, nvars, degree, coeffs=None):
        if degree < 0 or degree > ORDER_CAP:
            raise ParameterError(f"jet degree {degree} outside [0, {ORDER_CAP}]")
        self.nvars = int(nvars)
        self.degree = int(degree)
        m = len(enumerate_multiindices(self.nvars, self.degree))
        if coeffs is None:
            self.coeffs = np.zeros(m)
        else:
            coeffs = np.asarray(coeffs, dtype=float)
            if coeffs.shape != (m,):
                raise ParameterError(f"expected {m} coefficients, got {coeffs.shape}")
            self.coeffs = coeffs

    @classmethod
    def constant(cls, value, nvars, degree):
        jet = cls(nvars, degree)
        jet.coeffs[0] = value
        return jet

    @classmethod
    def variable(cls, value, var, nvars, degree):
        """Jet of the coordinate function x_var expanded at ``value``."""
        jet = cls(nvars, degree)
        jet.coeffs[0] = value
        if degree >= 1:
            unit = tuple(1 if i == var else 0 for i in range(nvars))
            jet.coeffs[multiindex_positions(nvars, degree)[unit]] = 1.0
        return jet

    def _check_compatible(self, other):
        if self.nvars != other.nvars or self.degree != other.degree:
            raise ParameterError("jets have mismatched shape")

    def __add__(self, other):
        if isinstance(other, Jet):
            self._check_compatible(other)
            return Jet(self.nvars, self.degree, self.coeffs + other.coeffs)
        out = self.coeffs.copy()
        out[0] += float(other)
        return Jet(self.nvars, self.degree, out)

    __radd__ = __add__

    def __sub__(self, other):
        return self + (other * -1.0 if isinstance(other, Jet) else -float(other))

    def __mul__(self, other):
        if isinstance(other, Jet):
            self._check_compatible(other)
            prod = batch_mul(
                self.coeffs[None, :], other.coeffs[None, :], self.nvars, self.degree
            )[0]
            return Jet(self.nvars, self.degree, prod)
        return Jet(self.nvars, self.degree, self.coeffs * float(other))

    __rmul__ = __mul__

    @property
    def constant_term(self):
        return float(self.coeffs[0])

    def derivative(self, k):
        """Extract d^k f = coeff(k) * k!."""
        pos = multiindex_positions(self.nvars, self.degree)
        k = tuple(int(v) for v in k)
        if k not in pos:
            raise ParameterError(f"multi-index {k} outside jet range")
        return float(self.coeffs[pos[k]]) * index_factorial(k)


def jet_compose_univariate(outer_derivs, inner: Jet) -> Jet:
    """Jet of f(g) from derivatives of f at the inner constant term.

    ``outer_derivs`` lists f(a), f'(a), ..., f^(p)(a) with p >= inner.degree;
    exact for polynomial f of degree <= p since truncated powers of the
    zero-constant part vanish beyond the jet degree.
    """
    outer_derivs = np.asarray(outer_derivs, dtype=float)
    if outer_derivs.ndim != 1 or len(outer_derivs) < inner.degree + 1:
        raise ParameterError("outer derivative sequence shorter than jet degree + 1")
    fact = np.array([index_factorial((q,)) for q in range(len(outer_derivs))], dtype=float)
    table = (outer_derivs / fact)[None, :]
    out = batch_compose_outer(table, inner.coeffs[None, :], inner.nvars, inner.degree)[0]
    return Jet(inner.nvars, inner.degree, out)
