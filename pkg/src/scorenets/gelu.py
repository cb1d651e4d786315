"""GELU activation and its closed-form derivatives.

The standard normal cdf/pdf here are the single source of activation
semantics for the whole package: network evaluation, jet propagation and
all reference oracles call these exact same routines, so approximators and
the functions they are checked against share bit-identical arithmetic.
Phi is computed through scipy's erf, which is correctly rounded to well
below 1e-15 absolute error.
"""

import numpy as np
from scipy.special import erf

from .errors import NumericError, ParameterError
from .multiindex import ORDER_CAP

_INV_SQRT2 = 1.0 / np.sqrt(2.0)
_INV_SQRT2PI = 1.0 / np.sqrt(2.0 * np.pi)


def std_normal_cdf(x):
    return 0.5 * (1.0 + erf(np.asarray(x, dtype=float) * _INV_SQRT2))


def std_normal_pdf(x):
    x = np.asarray(x, dtype=float)
    return _INV_SQRT2PI * np.exp(-0.5 * x * x)


def gelu(x):
    x = np.asarray(x, dtype=float)
    return x * std_normal_cdf(x)


def _hermite_phi_derivative(x, j):
    """phi^{(j)}(x) = (-1)^j He_j(x) phi(x), He_j the probabilists' Hermite."""
    x = np.asarray(x, dtype=float)
    he_prev = np.ones_like(x)
    if j == 0:
        he = he_prev
    else:
        he = x.copy()
        for n in range(1, j):
            he, he_prev = x * he - n * he_prev, he
    return (-1.0) ** j * he * std_normal_pdf(x)


def gelu_derivative(x, n: int):
    """n-th derivative of GELU at x (vectorized).

    n=0 returns the value x*Phi(x); n=1 returns Phi(x) + x*phi(x); for
    n>=2 the closed form n*phi^{(n-2)}(x) + x*phi^{(n-1)}(x) is used, with
    phi derivatives from the Hermite recursion. n is capped at ORDER_CAP.
    """
    if n < 0 or n > ORDER_CAP:
        raise ParameterError(f"derivative order {n} outside [0, {ORDER_CAP}]")
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise NumericError("non-finite input to gelu_derivative")
    if n == 0:
        return x * std_normal_cdf(x)
    if n == 1:
        return std_normal_cdf(x) + x * std_normal_pdf(x)
    return n * _hermite_phi_derivative(x, n - 2) + x * _hermite_phi_derivative(x, n - 1)


def gelu_taylor_coeffs(x, degree: int):
    """Taylor coefficients of GELU at points x: column q is gelu^{(q)}(x)/q!.

    Returns an array of shape x.shape + (degree+1,), the form consumed by
    jet composition.
    """
    x = np.asarray(x, dtype=float)
    out = np.empty(x.shape + (degree + 1,))
    fact = 1.0
    for q in range(degree + 1):
        if q >= 2:
            fact *= q
        out[..., q] = gelu_derivative(x, q) / fact
    return out
