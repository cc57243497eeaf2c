"""Closed-form oracle, refinement studies, weak-form residuals and seed sweeps."""
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm

from memdiff import analysis, geometry, kernels, media, nonlinearity, solver
from memdiff.errors import ConfigError, NumericalError, Violation


def oracle_benchmark(N=1, dt=1e-3, T=1.0, **changes):
    """Linear single-mode benchmark on ``(0, π)``: ``Φ(ξ) = -ξ``, ``K = e^-t``, ``D ≡ 1``."""
    cfg = solver.SolverConfig(
        domain=geometry.DomainSpec.interval(math.pi),
        N=N,
        T=T,
        dt=dt,
        kernel=kernels.MemoryKernel("exponential", kappa=1.0, rate=1.0),
        phi=nonlinearity.Nonlinearity("linear", a=1.0),
        field=media.FieldSpec(1.0, 1.0, 1, 0),
        u0=[1.0],
    )
    return cfg.replace(**changes) if changes else cfg


def energy_benchmark(m=2, realization=0, seed=0, N=8, T=0.5, dt=5e-4, **changes):
    """Random-media benchmark: ``Φ(ξ) = -ξ|ξ|^(m-2)``, ``D ~ U[0.5, 2]`` on 8 cells,
    ``f_1 = 1``, ``u0 = x(π - x)`` on ``(0, π)``."""
    cfg = solver.SolverConfig(
        domain=geometry.DomainSpec.interval(math.pi),
        N=N,
        T=T,
        dt=dt,
        kernel=kernels.MemoryKernel("exponential", kappa=1.0, rate=1.0),
        phi=nonlinearity.Nonlinearity("power", a=1.0, m=float(m)),
        field=media.FieldSpec(0.5, 2.0, 8, seed),
        forcing=solver.Forcing((solver.ForcingMode(1, a=1.0),)),
        u0=parabola,
        realization=realization,
    )
    return cfg.replace(**changes) if changes else cfg


def parabola(x):
    return x * (math.pi - x)


def oracle_violations(config):
    out = []
    phi = config.phi
    if not phi.is_linear:
        out.append(Violation("phi.kind", "oracle class", "closed form needs a linear flux"))
    if config.kernel.kind not in ("exponential", "constant"):
        out.append(Violation("kernel.kind", "oracle class", "closed form needs an exponential kernel"))
    if config.field.d_min != config.field.d_max:
        out.append(Violation("field.d_max", "oracle class", "closed form needs constant D"))
    if not config.forcing.is_constant:
        out.append(Violation("forcing", "oracle class", "closed form needs time-constant forcing"))
    return out


def oracle_linear(config, times=None):
    """Exact Galerkin trajectory for linear flux, exponential kernel and constant D.

    Each mode obeys ``c' = a D λ_i g + f_i``, ``g' = κ c - λ_K g`` with ``g`` the
    memory auxiliary; the affine 2x2 system is solved with a 3x3 matrix exponential.
    """
    bad = oracle_violations(config)
    if bad:
        raise ConfigError(bad)
    K = config.kernel
    rate = 0.0 if K.kind == "constant" else K.rate
    a = config.phi.a
    D = config.field.d_min
    lam = geometry.SineBasis(config.domain, config.N).eigenvalues
    f = config.forcing.coefficients(0.0, config.N)
    c0 = solver.initial_coefficients(config)
    t = config.dt * np.arange(config.n_steps + 1) if times is None else np.asarray(times, float)
    C = np.empty((len(t), config.N))
    G = np.empty_like(C)
    for i in range(config.N):
        A = np.array([[0.0, a * D * lam[i], f[i]], [K.kappa, -rate, 0.0], [0.0, 0.0, 0.0]])
        Y = expm(t[:, None, None] * A) @ np.array([c0[i], 0.0, 1.0])
        C[:, i], G[:, i] = Y[:, 0], Y[:, 1]
    dC = a * D * lam * G + f
    for arr in (t, C, dC):
        arr.setflags(write=False)
    return solver.GalerkinTrajectory(t, C, dC)


def oracle_auxiliary(config, times):
    """Memory auxiliary ``g_i(t) = ∫ K(t-s) c_i(s) ds`` of the closed-form solution."""
    traj = oracle_linear(config, times)
    lam = geometry.SineBasis(config.domain, config.N).eigenvalues
    f = config.forcing.coefficients(0.0, config.N)
    return (traj.derivs - f) / (config.phi.a * config.field.d_min * lam)


@dataclass
class ConvergenceRow:
    param: str
    value: float
    error: float
    ratio: float | None = None
    order: float | None = None


@dataclass
class ConvergenceTable:
    rows: list = field(default_factory=list)
    # errors at round-off level carry no order information
    floor: float = 1e-14

    def add(self, param, value, error):
        ratio = order = None
        prev = self.rows[-1] if self.rows else None
        if prev is not None and prev.param == param and min(error, prev.error) > self.floor:
            ratio = prev.error / error
            order = math.log(ratio) / abs(math.log(prev.value / value))
        self.rows.append(ConvergenceRow(param, value, error, ratio, order))

    @property
    def orders(self):
        return [r.order for r in self.rows if r.order is not None]

    @property
    def errors(self):
        return [r.error for r in self.rows]


def _require_ok(traj, what):
    if not traj.ok:
        err = NumericalError(f"{what}: {traj.failure}")
        err.step = traj.failed_step
        raise err


def refine_dt(config, dt_list):
    """Max-over-time coefficient error against the closed form, per step size."""
    bad = oracle_violations(config)
    if bad:
        raise ConfigError(bad)
    table = ConvergenceTable()
    for dt in dt_list:
        cfg = config.replace(dt=float(dt))
        traj = solver.solve(cfg)
        _require_ok(traj, f"dt={dt:g}")
        exact = oracle_linear(cfg)
        err = float(np.max(np.linalg.norm(traj.coeffs - exact.coeffs, axis=1)))
        table.add("dt", float(dt), err)
    return table


def _l2_time_space(times, diff):
    sq = np.sum(diff * diff, axis=1)
    return math.sqrt(analysis.trapezoid(sq, times))


def refine_N(config, N_list):
    """Cauchy differences ``||u^{N_j} - u^{N_{j+1}}||_{L2(0,T;L2)}`` of successive levels.

    Coarse coefficients are zero-padded into the finer space; there is one row per
    adjacent pair, labelled by the coarser ``N``.
    """
    N_list = [int(n) for n in N_list]
    if len(N_list) < 2 or any(b <= a for a, b in zip(N_list, N_list[1:])):
        raise ConfigError(Violation("run.N_list", "order", f"{N_list} is not strictly increasing"))
    trajs = {}
    for N in N_list:
        traj = solver.solve(config.replace(N=N))
        _require_ok(traj, f"N={N}")
        trajs[N] = traj
    table = ConvergenceTable()
    for lo, hi in zip(N_list, N_list[1:]):
        a, b = trajs[lo], trajs[hi]
        pad = np.zeros_like(b.coeffs)
        pad[:, :lo] = a.coeffs
        table.add("N", float(lo), _l2_time_space(b.times, b.coeffs - pad))
    return table


@dataclass(frozen=True)
class TestFunction:
    """Separable ``e_j(x) η(t)`` with ``η(t) = 16 t²(T-t)²/T⁴`` (max 1, zero at ends)."""

    __test__ = False

    index: int
    T: float

    def eta(self, t):
        t = np.asarray(t, dtype=float)
        return 16.0 * t**2 * (self.T - t) ** 2 / self.T**4

    def deta(self, t):
        t = np.asarray(t, dtype=float)
        return 32.0 * t * (self.T - t) * (self.T - 2 * t) / self.T**4


def weak_residual(traj, test, config, fld=None):
    """``|-∫∫ u ∂_t φ + ∫∫ D M(u)·∇φ - ∫∫ f φ|`` for ``φ = e_j η``.

    The memory term is rebuilt from the stored coefficients, so a corrupted
    trajectory is measured as such.
    """
    if not traj.ok:
        raise ValueError("weak residual needs a complete trajectory")
    j = test.index - 1
    t = traj.times
    if j >= traj.coeffs.shape[1]:
        return 0.0
    system = solver.GalerkinSystem(config, fld)
    a_j = system.weak_form_terms(traj.coeffs)[:, j]
    f_j = config.forcing.coefficients(t, config.N)[:, j]
    eta, deta = test.eta(t), test.deta(t)
    r = (
        -analysis.trapezoid(traj.coeffs[:, j] * deta, t)
        + analysis.trapezoid(a_j * eta, t)
        - analysis.trapezoid(f_j * eta, t)
    )
    return abs(r)


def certify_config(config, fld=None):
    """Solve and certify one realization; config and numerical failures become fail reports."""
    if fld is None:
        fld = media.sample_field(config.field, config.domain, config.realization)
    constants = analysis.compute_constants(config, fld)
    try:
        traj = solver.solve(config, fld)
    except ConfigError as exc:
        empty = np.zeros(0)
        return analysis.CertificateReport(
            empty, empty, empty, constants, False, None, failure=str(exc)
        )
    return analysis.certify(traj, constants, config.domain)


def seed_sweep(config, n_seeds):
    """Certificates for realizations ``0..n_seeds-1`` of the configured master seed."""
    if n_seeds < 1:
        raise ValueError("n_seeds must be >= 1")
    return [certify_config(config.with_field_seed(realization=r)) for r in range(n_seeds)]
