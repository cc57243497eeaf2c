"""Piecewise-constant random diffusion coefficients.

Cell values are i.i.d. uniform on ``[d_min, d_max]`` and drawn from a Philox
stream keyed by ``(seed, realization)``.  The value of flat cell ``j`` is the
``j``-th draw of that stream, so it does not depend on how many cells exist.
"""
from dataclasses import dataclass, field

import numpy as np

from memdiff.errors import DomainError, Violation

_U64 = (1 << 64) - 1


@dataclass(frozen=True)
class FieldSpec:
    d_min: float = 1.0
    d_max: float = 1.0
    cells: int = 1
    seed: int = 0


def validate_field(spec):
    out = []
    if not (np.isfinite(spec.d_min) and spec.d_min > 0):
        out.append(Violation("field.d_min", "positivity", f"d_min={spec.d_min} must be > 0"))
    if not np.isfinite(spec.d_max) or spec.d_min > spec.d_max:
        out.append(
            Violation("field.d_min", "bounds", f"d_min={spec.d_min} > d_max={spec.d_max}")
        )
    if spec.cells < 1:
        out.append(Violation("field.cells", "range", f"cells={spec.cells} must be >= 1"))
    if not 0 <= spec.seed <= _U64:
        out.append(Violation("field.seed", "range", "seed must be an unsigned 64-bit integer"))
    return out


@dataclass(frozen=True)
class RandomField:
    spec: FieldSpec
    domain: object
    values: np.ndarray = field(repr=False)
    realization: int = 0

    def __call__(self, points):
        return field_eval(self, points)


def sample_field(spec, domain, realization=0):
    n_cells = spec.cells**domain.dim
    key = np.array([spec.seed & _U64, realization & _U64], dtype=np.uint64)
    rng = np.random.Generator(np.random.Philox(key=key))
    u = rng.random(n_cells)
    vals = np.clip(spec.d_min + (spec.d_max - spec.d_min) * u, spec.d_min, spec.d_max)
    vals = vals.reshape((spec.cells,) * domain.dim)
    vals.setflags(write=False)
    return RandomField(spec, domain, vals, realization)


def field_eval(fld, points):
    """Cell lookup; points on a cell boundary belong to the left/lower cell."""
    dom = fld.domain
    p = dom.as_points(points)
    if not np.all(dom.contains(p)):
        raise DomainError("field evaluated outside the domain")
    M = fld.spec.cells
    idx = []
    for axis, L in enumerate(dom.lengths):
        j = np.ceil(p[:, axis] / L * M).astype(int) - 1
        idx.append(np.clip(j, 0, M - 1))
    return fld.values[tuple(idx)]


def field_sup(fld):
    return float(np.max(fld.values))
