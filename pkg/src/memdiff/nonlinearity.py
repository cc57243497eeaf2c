"""Built-in flux nonlinearities Φ and checks of the growth/monotonicity hypotheses.

Only closed forms are supported so the validators can reason about them:

* ``linear``:   Φ(ξ) = -a ξ
* ``power``:    Φ(ξ) = -a ξ |ξ|^(m-2)
* ``constant``: Φ(ξ) = b
"""
from dataclasses import dataclass

import numpy as np

from memdiff.errors import Violation

KINDS = ("linear", "power", "constant")


@dataclass(frozen=True)
class Nonlinearity:
    kind: str = "linear"
    a: float = 1.0
    b: float = 0.0
    m: float = 2.0
    L: float | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown nonlinearity {self.kind!r}; expected one of {KINDS}")
        if self.L is None:
            object.__setattr__(self, "L", self.default_growth_constant())

    def default_growth_constant(self):
        # (m-1)|ξ|^(m-2) <= (m-1)(1 + |ξ|^(m-1)) for m in [2, 3]
        if self.kind == "linear":
            return abs(self.a) if self.a else 1.0
        if self.kind == "power":
            return abs(self.a) * (self.m - 1) if self.a else 1.0
        return 1.0

    @property
    def is_linear(self):
        return self.kind == "linear" or (self.kind == "power" and self.m == 2)


def phi_eval(phi, xi):
    xi = np.asarray(xi, dtype=float)
    if phi.kind == "linear":
        out = -phi.a * xi
    elif phi.kind == "power":
        out = -phi.a * xi * np.abs(xi) ** (phi.m - 2)
    else:
        out = np.full_like(xi, phi.b)
    return out if out.ndim else float(out)


def phi_prime(phi, xi):
    xi = np.asarray(xi, dtype=float)
    if phi.kind == "linear":
        out = np.full_like(xi, -phi.a)
    elif phi.kind == "power":
        if phi.m == 2:
            out = np.full_like(xi, -phi.a)
        else:
            out = -phi.a * (phi.m - 1) * np.abs(xi) ** (phi.m - 2)
    else:
        out = np.zeros_like(xi)
    return out if out.ndim else float(out)


def exponent_upper_bound(dim):
    """``min{3, 2d/(d-2)}`` with the second bound read as +inf for d <= 2."""
    return 3.0 if dim <= 2 else min(3.0, 2 * dim / (dim - 2))


def validate_nonlinearity(phi, dim=1, probe_range=(-10.0, 10.0), probe_count=1001):
    """Probe Φ' <= 0 and |Φ'(ξ)| <= L (1 + |ξ|^(m-1)); check the exponent range.

    Returns a list of violations; each names the first failing probe point.
    """
    if probe_count < 100:
        raise ValueError("probe_count must be >= 100")
    out = []
    hi = exponent_upper_bound(dim)
    if not (np.isfinite(phi.m) and 2 <= phi.m <= hi):
        out.append(Violation("phi.m", "exponent range", f"m={phi.m} not in [2, {hi:g}]"))
        return out
    if not (np.isfinite(phi.L) and phi.L > 0):
        out.append(Violation("phi.L", "growth", f"L={phi.L} must be > 0"))
        return out
    xi = np.linspace(probe_range[0], probe_range[1], int(probe_count))
    d = phi_prime(phi, xi)
    bad = np.flatnonzero(d > 0)
    if bad.size:
        x = xi[bad[0]]
        out.append(Violation("phi.a", "monotonicity", f"phi'({x:g}) = {d[bad[0]]:g} > 0"))
    ratio = np.abs(d) / (1 + np.abs(xi) ** (phi.m - 1))
    bad = np.flatnonzero(ratio > phi.L)
    if bad.size:
        x = xi[bad[0]]
        out.append(Violation("phi.L", "growth", f"|phi'({x:g})| exceeds L(1+|xi|^(m-1))"))
    return out
