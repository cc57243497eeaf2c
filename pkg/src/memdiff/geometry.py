"""Dirichlet-Laplacian sine eigenbasis on boxes, composite Gauss-Legendre
quadrature, the projection onto the first N modes and norms on that space.

Points are always passed as arrays of shape ``(n, d)``; for intervals a flat
array of x-coordinates is accepted as well.
"""
from dataclasses import dataclass, field
from functools import cached_property
from typing import NamedTuple

import numpy as np

from memdiff.errors import ConfigError, NumericalError, Violation


@dataclass(frozen=True)
class DomainSpec:
    """An interval ``(0, L1)`` or a rectangle ``(0, L1) x (0, L2)``."""

    lengths: tuple

    def __post_init__(self):
        lengths = tuple(float(v) for v in np.atleast_1d(self.lengths))
        if len(lengths) not in (1, 2):
            raise ConfigError(Violation("domain.lengths", "dimension", "need 1 or 2 lengths"))
        for v in lengths:
            if not (np.isfinite(v) and v > 0):
                raise ConfigError(Violation("domain.lengths", "positivity", f"length {v}"))
        object.__setattr__(self, "lengths", lengths)

    @classmethod
    def interval(cls, length):
        return cls((length,))

    @classmethod
    def rectangle(cls, length_x, length_y):
        return cls((length_x, length_y))

    @property
    def kind(self):
        return "interval" if self.dim == 1 else "rectangle"

    @property
    def dim(self):
        return len(self.lengths)

    @property
    def measure(self):
        return float(np.prod(self.lengths))

    @property
    def first_eigenvalue(self):
        return float(sum((np.pi / L) ** 2 for L in self.lengths))

    def as_points(self, x):
        """Coerce ``x`` to an ``(n, d)`` float array."""
        x = np.asarray(x, dtype=float)
        if x.ndim == 0:
            x = x.reshape(1, 1)
        elif x.ndim == 1:
            x = x.reshape(-1, 1) if self.dim == 1 else x.reshape(1, -1)
        if x.shape[1] != self.dim:
            raise ValueError(f"points have dimension {x.shape[1]}, domain has {self.dim}")
        return x

    def contains(self, points, closed=True):
        p = self.as_points(points)
        L = np.asarray(self.lengths)
        if closed:
            return np.all((p >= 0) & (p <= L), axis=1)
        return np.all((p > 0) & (p < L), axis=1)


def _axis_modes(domain, n):
    """First ``n`` multi-indices ordered by eigenvalue, ties lexicographic."""
    if domain.dim == 1:
        return [(i,) for i in range(1, n + 1)]
    L1, L2 = domain.lengths
    cands = [
        ((i1 * np.pi / L1) ** 2 + (i2 * np.pi / L2) ** 2, i1, i2)
        for i1 in range(1, n + 1)
        for i2 in range(1, n + 1)
    ]
    cands.sort()
    return [(i1, i2) for _, i1, i2 in cands[:n]]


def _multi_eigenvalue(domain, idx):
    return float(sum((i * np.pi / L) ** 2 for i, L in zip(idx, domain.lengths)))


def _sine_factors(domain, idx, points):
    """Per-axis normalized sines and cosine derivatives at ``points``."""
    vals, ders = [], []
    for axis, (i, L) in enumerate(zip(idx, domain.lengths)):
        k = i * np.pi / L
        amp = np.sqrt(2.0 / L)
        x = points[:, axis]
        vals.append(amp * np.sin(k * x))
        ders.append(amp * k * np.cos(k * x))
    return vals, ders


@dataclass(frozen=True)
class Eigenpair:
    """Closed-form eigenpair ``-Δe = λe`` with ``e`` a product of sines."""

    domain: DomainSpec
    index: int
    multi_index: tuple
    eigenvalue: float

    def value(self, points):
        p = self.domain.as_points(points)
        vals, _ = _sine_factors(self.domain, self.multi_index, p)
        return np.prod(vals, axis=0)

    def gradient(self, points):
        p = self.domain.as_points(points)
        vals, ders = _sine_factors(self.domain, self.multi_index, p)
        grads = []
        for axis in range(self.domain.dim):
            g = ders[axis].copy()
            for other in range(self.domain.dim):
                if other != axis:
                    g *= vals[other]
            grads.append(g)
        return np.stack(grads, axis=1)


def eigenpair(domain, i):
    """The ``i``-th (1-based, flattened) eigenpair of the negative Dirichlet Laplacian."""
    if i < 1:
        raise ValueError(f"eigen index must be >= 1, got {i}")
    idx = _axis_modes(domain, i)[-1]
    return Eigenpair(domain, i, idx, _multi_eigenvalue(domain, idx))


@dataclass(frozen=True)
class QuadratureGrid:
    nodes: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)
    panels: tuple
    points_per_panel: int

    @property
    def size(self):
        return len(self.weights)

    def integrate(self, values):
        """Integrate nodal ``values`` (leading axis = nodes)."""
        return np.tensordot(self.weights, values, axes=(0, 0))


def _gl_1d(length, panels, points):
    x, w = np.polynomial.legendre.leggauss(points)
    h = length / panels
    left = h * np.arange(panels)
    nodes = (left[:, None] + 0.5 * h * (x[None, :] + 1.0)).ravel()
    weights = np.tile(0.5 * h * w, panels)
    return nodes, weights


def build_quadrature(domain, panels, points_per_panel=4):
    """Composite Gauss-Legendre rule; ``panels`` is an int or one count per axis."""
    panels = tuple(int(p) for p in np.broadcast_to(np.atleast_1d(panels), (domain.dim,)))
    if any(p < 1 for p in panels):
        raise ConfigError(Violation("quadrature.panels", "range", f"panels {panels} must be >= 1"))
    if not 2 <= int(points_per_panel) <= 10:
        raise ConfigError(
            Violation("quadrature.points", "range", f"{points_per_panel} not in 2..10")
        )
    rules = [_gl_1d(L, p, int(points_per_panel)) for L, p in zip(domain.lengths, panels)]
    if domain.dim == 1:
        nodes, weights = rules[0]
        nodes = nodes[:, None]
    else:
        (x, wx), (y, wy) = rules
        X, Y = np.meshgrid(x, y, indexing="ij")
        nodes = np.column_stack([X.ravel(), Y.ravel()])
        weights = np.outer(wx, wy).ravel()
    for arr in (nodes, weights):
        arr.setflags(write=False)
    return QuadratureGrid(nodes, weights, panels, int(points_per_panel))


def default_panels(domain, n_modes):
    """Panels per axis resolving products of the first ``n_modes`` sines."""
    top = max(max(idx) for idx in _axis_modes(domain, n_modes))
    return max(8, 2 * top)


class SineBasis:
    """The first ``N`` eigenfunctions, with cached tabulation on a grid."""

    def __init__(self, domain, N):
        if N < 1:
            raise ValueError(f"N must be >= 1, got {N}")
        self.domain = domain
        self.N = int(N)
        self.multi_indices = _axis_modes(domain, self.N)
        self.eigenvalues = np.array([_multi_eigenvalue(domain, i) for i in self.multi_indices])
        self.eigenvalues.setflags(write=False)

    @cached_property
    def max_axis_index(self):
        return max(max(idx) for idx in self.multi_indices)

    def values(self, points):
        """Matrix ``(n_points, N)`` of ``e_i(x)``."""
        p = self.domain.as_points(points)
        cols = []
        for idx in self.multi_indices:
            vals, _ = _sine_factors(self.domain, idx, p)
            cols.append(np.prod(vals, axis=0))
        return np.column_stack(cols)

    def gradients(self, points):
        """Array ``(n_points, d, N)`` of ``∇e_i(x)``."""
        p = self.domain.as_points(points)
        return np.stack(
            [eigenpair_from(self.domain, idx).gradient(p) for idx in self.multi_indices], axis=2
        )


def eigenpair_from(domain, multi_index):
    return Eigenpair(domain, 0, tuple(multi_index), _multi_eigenvalue(domain, multi_index))


def project(u, N, grid, domain):
    """Coefficients ``c_i = <u, e_i>`` of the L2 projection onto the first N modes.

    ``u`` is called as ``u(x)`` on intervals and ``u(x, y)`` on rectangles, with
    coordinate arrays of the grid nodes.
    """
    vals = np.asarray(u(*grid.nodes.T), dtype=float)
    vals = np.broadcast_to(vals, (grid.size,))
    if not np.all(np.isfinite(vals)):
        raise NumericalError("projected function is not finite at every quadrature node")
    E = SineBasis(domain, N).values(grid.nodes)
    return grid.integrate(vals[:, None] * E)


def evaluate_state(c, points, domain):
    c = np.asarray(c, dtype=float)
    return SineBasis(domain, len(c)).values(points) @ c


def evaluate_gradient(c, points, domain):
    c = np.asarray(c, dtype=float)
    return SineBasis(domain, len(c)).gradients(points) @ c


class Norms(NamedTuple):
    l2: float
    h1_semi: float
    hminus1: float


def norms(c, domain):
    """L2, H1_0-seminorm and spectral H^{-1} norm of ``sum c_i e_i``."""
    c = np.asarray(c, dtype=float)
    if c.size == 0:
        return Norms(0.0, 0.0, 0.0)
    lam = SineBasis(domain, len(c)).eigenvalues
    c2 = c * c
    return Norms(
        float(np.sqrt(c2.sum())),
        float(np.sqrt((lam * c2).sum())),
        float(np.sqrt((c2 / lam).sum())),
    )
