"""Sparse GELU feedforward networks: exact evaluation and jet derivatives.

A depth-L network with architecture (W_0, ..., W_L) computes

    x_j = GELU(A_j x_{j-1} - b_j)   for j = 1..L-1,
    f(x) = A_L x_{L-1} - b_L,

with A_j stored as coordinate triplets in deterministic row-major order and
b_j dense. Networks are immutable after construction; evaluation and
derivatives are pure.
"""

import json
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import NumericError, ParameterError
from .gelu import gelu
from .jets import batch_gelu
from .multiindex import (
    ORDER_CAP,
    enumerate_multiindices,
    index_factorial,
    multiindex_positions,
)


@dataclass(frozen=True)
class NetworkConfig:
    """Structural statistics of a network: depth, widths, sparsity, magnitude."""

    depth: int
    widths: tuple
    nonzero_count: int
    max_magnitude: float

    @property
    def max_width(self) -> int:
        return max(self.widths)

    def within(self, depth=None, max_width=None, nonzero_count=None, max_magnitude=None):
        """Membership test against class bounds; None bounds are ignored."""
        if depth is not None and self.depth > depth:
            return False
        if max_width is not None and self.max_width > max_width:
            return False
        if nonzero_count is not None and self.nonzero_count > nonzero_count:
            return False
        if max_magnitude is not None and self.max_magnitude > max_magnitude:
            return False
        return True


class Layer:
    """One affine map A x - b with sparse A."""

    __slots__ = ("out_width", "in_width", "rows", "cols", "vals", "bias", "_csr")

    def __init__(self, out_width, in_width, rows, cols, vals, bias):
        self.out_width = int(out_width)
        self.in_width = int(in_width)
        rows = np.asarray(rows, dtype=np.int64)
        cols = np.asarray(cols, dtype=np.int64)
        vals = np.asarray(vals, dtype=float)
        if rows.shape != cols.shape or rows.shape != vals.shape:
            raise ParameterError("triplet arrays must share a common length")
        if len(rows) and (rows.min() < 0 or rows.max() >= out_width):
            raise ParameterError("triplet row outside layer shape")
        if len(cols) and (cols.min() < 0 or cols.max() >= in_width):
            raise ParameterError("triplet col outside layer shape")
        order = np.lexsort((cols, rows))
        self.rows = rows[order]
        self.cols = cols[order]
        self.vals = vals[order]
        bias = np.asarray(bias, dtype=float)
        if bias.shape != (out_width,):
            raise ParameterError("bias length must equal layer output width")
        self.bias = bias
        self._csr = None

    @classmethod
    def from_matrix(cls, a, bias):
        a = sp.coo_matrix(a)
        return cls(a.shape[0], a.shape[1], a.row, a.col, a.data, bias)

    @property
    def csr(self):
        if self._csr is None:
            self._csr = sp.csr_matrix(
                (self.vals, (self.rows, self.cols)), shape=(self.out_width, self.in_width)
            )
        return self._csr

    def nonzero_count(self) -> int:
        return int(np.count_nonzero(self.vals) + np.count_nonzero(self.bias))

    def max_magnitude(self) -> float:
        mag = 0.0
        if len(self.vals):
            mag = float(np.abs(self.vals).max())
        if len(self.bias):
            mag = max(mag, float(np.abs(self.bias).max()))
        return mag


class GeluNetwork:
    """Immutable sparse GELU network."""

    def __init__(self, layers):
        if not layers:
            raise ParameterError("a network needs at least one affine layer")
        for prev, nxt in zip(layers, layers[1:]):
            if nxt.in_width != prev.out_width:
                raise ParameterError(
                    f"layer width mismatch: {prev.out_width} followed by input {nxt.in_width}"
                )
        self.layers = tuple(layers)

    @property
    def depth(self) -> int:
        return len(self.layers)

    @property
    def widths(self) -> tuple:
        return (self.layers[0].in_width,) + tuple(l.out_width for l in self.layers)

    @property
    def in_width(self) -> int:
        return self.layers[0].in_width

    @property
    def out_width(self) -> int:
        return self.layers[-1].out_width

    def evaluate_batch(self, x):
        """Evaluate at a batch of points, shape (n, W_0) -> (n, W_L)."""
        x = np.atleast_2d(np.asarray(x, dtype=float))
        if x.shape[1] != self.in_width:
            raise ParameterError(f"input width {x.shape[1]}, expected {self.in_width}")
        h = x.T
        last = len(self.layers) - 1
        for j, layer in enumerate(self.layers):
            h = layer.csr @ h - layer.bias[:, None]
            if j < last:
                h = gelu(h)
            if not np.all(np.isfinite(h)):
                raise NumericError(f"non-finite activation after layer {j + 1}")
        return h.T

    def evaluate(self, x):
        return self.evaluate_batch(np.asarray(x, dtype=float)[None, :])[0]

    def derivative_batch(self, x, k):
        """Partial derivative d^k f at each row of x, shape (n, W_L).

        Jets are restricted to the variables with k_i > 0 and truncated at
        degree |k|; affine layers act linearly on coefficients and GELU is
        applied through composition with its Taylor table.
        """
        x = np.atleast_2d(np.asarray(x, dtype=float))
        k = tuple(int(v) for v in k)
        if len(k) != self.in_width:
            raise ParameterError("multi-index length must equal input width")
        if any(v < 0 for v in k):
            raise ParameterError("multi-index entries must be non-negative")
        degree = sum(k)
        if degree > ORDER_CAP:
            raise ParameterError(f"derivative order {degree} exceeds cap {ORDER_CAP}")
        if degree == 0:
            return self.evaluate_batch(x)

        active = [i for i, v in enumerate(k) if v > 0]
        nvars = len(active)
        m = len(enumerate_multiindices(nvars, degree))
        pos = multiindex_positions(nvars, degree)
        n = x.shape[0]

        coeffs = np.zeros((self.in_width, m, n))
        coeffs[:, 0, :] = x.T
        for a, var in enumerate(active):
            unit = tuple(1 if i == a else 0 for i in range(nvars))
            coeffs[var, pos[unit], :] = 1.0

        last = len(self.layers) - 1
        for j, layer in enumerate(self.layers):
            flat = coeffs.reshape(coeffs.shape[0], m * n)
            out = (layer.csr @ flat).reshape(layer.out_width, m, n)
            out[:, 0, :] -= layer.bias[:, None]
            if j < last:
                stacked = out.transpose(0, 2, 1).reshape(layer.out_width * n, m)
                stacked = batch_gelu(stacked, nvars, degree)
                out = stacked.reshape(layer.out_width, n, m).transpose(0, 2, 1)
            if not np.all(np.isfinite(out)):
                raise NumericError(f"non-finite jet after layer {j + 1}")
            coeffs = out

        target = pos[tuple(k[var] for var in active)]
        scale = float(index_factorial(k))
        return coeffs[:, target, :].T * scale

    def derivative(self, x, k):
        return self.derivative_batch(np.asarray(x, dtype=float)[None, :], k)[0]

    def config_stats(self) -> NetworkConfig:
        s = sum(layer.nonzero_count() for layer in self.layers)
        b = max(layer.max_magnitude() for layer in self.layers)
        return NetworkConfig(self.depth, self.widths, s, b)

    # -- serialization ---------------------------------------------------

    def to_json_dict(self):
        return {
            "architecture": list(self.widths),
            "layers": [
                {
                    "triplets": [
                        [int(r), int(c), float(v)]
                        for r, c, v in zip(layer.rows, layer.cols, layer.vals)
                    ],
                    "bias": [float(b) for b in layer.bias],
                }
                for layer in self.layers
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict())

    @classmethod
    def from_json_dict(cls, payload):
        widths = payload["architecture"]
        layers = []
        for j, spec in enumerate(payload["layers"]):
            trip = spec["triplets"]
            rows = [t[0] for t in trip]
            cols = [t[1] for t in trip]
            vals = [t[2] for t in trip]
            layers.append(Layer(widths[j + 1], widths[j], rows, cols, vals, spec["bias"]))
        return cls(layers)

    @classmethod
    def from_json(cls, text: str):
        return cls.from_json_dict(json.loads(text))


def affine_network(a, b=None) -> GeluNetwork:
    """Depth-1 network computing A x - b (note the sign of b)."""
    a = np.atleast_2d(np.asarray(a, dtype=float))
    if b is None:
        b = np.zeros(a.shape[0])
    return GeluNetwork([Layer.from_matrix(a, b)])


def evaluate(net: GeluNetwork, x):
    return net.evaluate(x)


def derivative(net: GeluNetwork, x, k):
    return net.derivative(x, k)


def config_stats(net: GeluNetwork) -> NetworkConfig:
    return net.config_stats()


def random_sparse_network(rng, in_width=2, out_width=1, depth=3, width=6,
                          density=0.6, magnitude=1.0):
    """Random sparse network for derivative and composition tests."""
    widths = [in_width] + [int(width)] * (depth - 1) + [out_width]
    layers = []
    for j in range(depth):
        shape = (widths[j + 1], widths[j])
        mask = rng.random(shape) < density
        # keep at least one entry per row so no output is vacuously zero
        for r in range(shape[0]):
            if not mask[r].any():
                mask[r, rng.integers(shape[1])] = True
        a = np.where(mask, rng.uniform(-magnitude, magnitude, shape), 0.0)
        b = rng.uniform(-magnitude, magnitude, shape[0])
        layers.append(Layer.from_matrix(a, b))
    return GeluNetwork(layers)
