"""A-priori energy bound for Galerkin trajectories.

The bound curve is ``B(t) = E0 + C1 t + x0^p C2 t^(1-p)`` where ``x0`` is the
positive root of ``x = c1 + c2 x^p`` (Bainov's nonlinear Gronwall lemma) and
``E(t) = ||u^N(t)||^2``.  ``certify`` compares a computed trajectory against it.
"""
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from memdiff import geometry, kernels, media, solver

LAMBDA_FLOOR = 1e-3


def poincare_constant(domain):
    """Sharp Poincaré constant ``1/sqrt(λ1)`` on a box."""
    return 1.0 / np.sqrt(domain.first_eigenvalue)


def select_lambda(f_norm, D_sup, K_l1, C_omega, floor=LAMBDA_FLOOR):
    """Young-splitting parameter ``λ = 2 C_Ω ||f||_{H^-1} / (||D||_∞ ||K||_L1)``, floored."""
    if D_sup <= 0 or K_l1 <= 0:
        raise ValueError("D_sup and K_l1 must be positive")
    return max(2.0 * C_omega * f_norm / (D_sup * K_l1), floor)


@dataclass(frozen=True)
class EnergyConstants:
    C_omega: float
    lam: float
    C1: float
    C2: float
    p: float
    E0: float
    x0: float
    J: float
    T: float
    f_norm: float = 0.0
    D_sup: float = 0.0
    K_l1: float = 0.0
    L: float = 0.0

    @property
    def q(self):
        return 1.0 - self.p


def bainov_coefficients(E0, T, C1, C2, p):
    """``(c1, c2)`` of the fixed-point equation ``x = c1 + c2 x^p``."""
    return E0 * T + 0.5 * C1 * T * T, C2 * T ** (2 - p) / (1 - p)


def solve_fixed_point(c1, c2, p):
    """Unique positive root of ``x = c1 + c2 x^p`` for ``0 < p < 1``."""
    if not 0 < p < 1:
        raise ValueError(f"p={p} must lie in (0, 1)")
    if c1 < 0 or c2 < 0:
        raise ValueError("coefficients must be nonnegative")
    if c1 == 0 and c2 == 0:
        return 0.0
    if c2 == 0:
        return float(c1)
    if c1 == 0:
        return float(c2 ** (1 / (1 - p)))

    def h(x):
        return x - c1 - c2 * x**p

    hi = (c1 + c2) ** (1 / (1 - p)) + c1 + 1
    return optimize.bisect(h, 0.0, hi, xtol=1e-300, rtol=1e-15, maxiter=2000)


def bainov_root(E0, T, C1, C2, p):
    return solve_fixed_point(*bainov_coefficients(E0, T, C1, C2, p), p)


def energy_constants(E0, T, m, L, D_sup, K_l1, measure, C_omega, f_norm):
    lam = select_lambda(f_norm, D_sup, K_l1, C_omega)
    scale = D_sup * K_l1 * L / (2 * lam)
    C1 = scale * measure**0.5
    C2 = scale * measure ** ((3 - m) / 2)
    p = (m - 1) / 4
    x0 = bainov_root(E0, T, C1, C2, p)
    J = E0 + C1 * T + x0**p * C2 * max(1.0, T, T ** (1 - p))
    return EnergyConstants(C_omega, lam, C1, C2, p, E0, x0, J, T, f_norm, D_sup, K_l1, L)


def forcing_norm(config, times=None):
    """Sup over the step grid of the spectral H^-1 norm of ``f(t)``."""
    lam = geometry.SineBasis(config.domain, config.N).eigenvalues
    t = config.dt * np.arange(config.n_steps + 1) if times is None else times
    return float(np.max(config.forcing.hminus1_norm(t, lam), initial=0.0))


def compute_constants(config, fld=None, E0=None):
    if fld is None:
        fld = media.sample_field(config.field, config.domain, config.realization)
    if E0 is None:
        E0 = float(np.sum(solver.initial_coefficients(config) ** 2))
    return energy_constants(
        E0=E0,
        T=config.T,
        m=config.phi.m,
        L=config.phi.L,
        D_sup=media.field_sup(fld),
        K_l1=kernels.l1_norm(config.kernel),
        measure=config.domain.measure,
        C_omega=poincare_constant(config.domain),
        f_norm=forcing_norm(config),
    )


def bound_curve(constants, t):
    t = np.asarray(t, dtype=float)
    k = constants
    B = k.E0 + k.C1 * t + k.x0**k.p * k.C2 * t ** (1 - k.p)
    return B if B.ndim else float(B)


def energy_trace(traj):
    """``E(t_k) = sum_i c_i(t_k)^2``."""
    return np.sum(traj.coeffs**2, axis=1)


def trapezoid(y, t):
    if len(t) < 2:
        return 0.0
    return float(np.sum(0.5 * (y[1:] + y[:-1]) * np.diff(t)))


@dataclass(frozen=True)
class CertificateReport:
    times: np.ndarray = field(repr=False)
    energy: np.ndarray = field(repr=False)
    bound: np.ndarray = field(repr=False)
    constants: EnergyConstants
    passed: bool
    first_violation: int | None = None
    h1_norm: float = float("nan")
    dt_hminus1_norm: float = float("nan")
    aggregate_bound: float = float("nan")
    failure: str | None = None

    @property
    def margin(self):
        return self.bound - self.energy

    @property
    def verdict(self):
        return "pass" if self.passed else "fail"


def certify(traj, constants, domain=None):
    """Check ``E(t_k) <= B(t_k)`` at every stored step.

    A trajectory that stopped early (numerical failure) never passes.  The
    ``L2(0,T;H1_0)`` and ``L2(0,T;H^-1)`` norms against ``2 sqrt(T)(C1+C2+J^p T)``
    are informational only.
    """
    E = energy_trace(traj)
    B = bound_curve(constants, traj.times)
    bad = np.flatnonzero(~(E <= B))
    passed = bad.size == 0 and traj.ok
    first = int(bad[0]) if bad.size else (traj.failed_step if not traj.ok else None)
    h1 = dh = float("nan")
    if domain is not None and traj.coeffs.shape[1]:
        lam = geometry.SineBasis(domain, traj.coeffs.shape[1]).eigenvalues
        h1 = np.sqrt(trapezoid(np.sum(lam * traj.coeffs**2, axis=1), traj.times))
        if traj.ok:
            dh = np.sqrt(trapezoid(np.sum(traj.derivs**2 / lam, axis=1), traj.times))
    k = constants
    agg = 2 * np.sqrt(k.T) * (k.C1 + k.C2 + k.J**k.p * k.T)
    return CertificateReport(
        traj.times, E, np.broadcast_to(B, E.shape).copy(), constants, bool(passed), first,
        float(h1), float(dh), float(agg), traj.failure,
    )


def lipschitz_diagnostic(traj, config, fld=None):
    """Growth rate ``Λ`` for perturbations of the Galerkin system along ``traj``.

    ``Λ = sup D ||K||_L1 L (T |Ω| + 2 ∫_0^T ∫_Ω |u^N|^(m-2))``; the second term is
    absent for ``m = 2`` where Φ' is constant.
    """
    if fld is None:
        fld = media.sample_field(config.field, config.domain, config.realization)
    m = config.phi.m
    extra = 0.0
    if m > 2:
        grid = solver.build_grid(config)
        E = geometry.SineBasis(config.domain, config.N).values(grid.nodes)
        u = traj.coeffs @ E.T
        per_step = np.abs(u) ** (m - 2) @ grid.weights
        extra = 2.0 * trapezoid(per_step, traj.times)
    T = config.T
    return (
        media.field_sup(fld)
        * kernels.l1_norm(config.kernel)
        * config.phi.L
        * (T * config.domain.measure + extra)
    )
