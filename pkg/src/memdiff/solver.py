"""Galerkin ODE system ``c'(t) = F(t, c)`` with the memory convolution.

The state is the coefficient vector ``c`` in the sine eigenbasis.  The memory
term needs the whole flux history ``g(s) = Φ'(u(s)) ∇u(s)`` at the quadrature
nodes, which is stored per step; the convolution uses product-trapezoid weights
from :class:`memdiff.kernels.ConvolutionWeights`.  Time stepping is explicit
Heun: the corrector appends the predictor's flux at ``t_{k+1}`` before
re-evaluating the convolution.
"""
import dataclasses
import logging
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from memdiff import geometry, kernels, media, nonlinearity
from memdiff.errors import ConfigError, NumericalError, Violation

log = logging.getLogger(__name__)

STABILITY_LIMIT = 0.5


@dataclass(frozen=True)
class ForcingMode:
    """``f_i(t) = a + b cos(omega t)`` on eigenmode ``mode`` (1-based)."""

    mode: int
    a: float = 0.0
    b: float = 0.0
    omega: float = 0.0


@dataclass(frozen=True)
class Forcing:
    modes: tuple = ()

    @property
    def n_modes(self):
        return max((m.mode for m in self.modes), default=0)

    @property
    def is_constant(self):
        return all(m.b == 0 or m.omega == 0 for m in self.modes)

    def coefficients(self, t, N):
        """Modal coefficients ``(..., N)`` at time(s) ``t``."""
        t = np.asarray(t, dtype=float)
        out = np.zeros(t.shape + (N,))
        for m in self.modes:
            out[..., m.mode - 1] += m.a + m.b * np.cos(m.omega * t)
        return out

    def hminus1_norm(self, t, eigenvalues):
        f = self.coefficients(t, len(eigenvalues))
        return np.sqrt(np.sum(f * f / eigenvalues, axis=-1))


@dataclass(frozen=True)
class SolverConfig:
    """Everything that determines a trajectory.

    ``u0`` is either a coefficient vector (padded/truncated to ``N``) or a callable
    projected onto the basis.  ``panels=None`` picks a resolution from ``N``.
    """

    domain: geometry.DomainSpec
    N: int
    T: float
    dt: float
    kernel: kernels.MemoryKernel = kernels.MemoryKernel()
    phi: nonlinearity.Nonlinearity = nonlinearity.Nonlinearity()
    field: media.FieldSpec = media.FieldSpec()
    forcing: Forcing = Forcing()
    u0: object = None
    panels: int | None = None
    points: int = 4
    realization: int = 0

    def __post_init__(self):
        if self.kernel.horizon != self.T:
            object.__setattr__(self, "kernel", dataclasses.replace(self.kernel, horizon=self.T))

    @property
    def n_steps(self):
        return int(round(self.T / self.dt))

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)

    def with_field_seed(self, seed=None, realization=None):
        spec = self.field if seed is None else dataclasses.replace(self.field, seed=seed)
        r = self.realization if realization is None else realization
        return dataclasses.replace(self, field=spec, realization=r)


def stability_number(config, fld=None):
    """``dt * sup D * L_Φ * λ_N * ||K||_L1``; the explicit scheme needs it <= 0.5."""
    fld = media.sample_field(config.field, config.domain, config.realization) if fld is None else fld
    lam_N = geometry.SineBasis(config.domain, config.N).eigenvalues[-1]
    return (
        config.dt * media.field_sup(fld) * config.phi.L * lam_N * kernels.l1_norm(config.kernel)
    )


def validate_config(config):
    """All hypothesis and discretization checks; an empty list means admissible."""
    out = []
    if config.N < 1:
        out.append(Violation("N", "range", f"N={config.N} must be >= 1"))
    if not (np.isfinite(config.T) and config.T > 0):
        out.append(Violation("T", "positivity", f"T={config.T}"))
    if not (np.isfinite(config.dt) and config.dt > 0):
        out.append(Violation("dt", "positivity", f"dt={config.dt}"))
    elif not out:
        steps = config.T / config.dt
        if abs(steps - round(steps)) > 1e-9 * max(1.0, steps) or round(steps) < 1:
            out.append(Violation("dt", "step count", f"T/dt={steps:g} is not a positive integer"))
    out += kernels.validate_kernel(config.kernel)
    out += nonlinearity.validate_nonlinearity(config.phi, dim=config.domain.dim)
    out += media.validate_field(config.field)
    for i, m in enumerate(config.forcing.modes):
        if not 1 <= m.mode <= max(config.N, 1):
            out.append(Violation(f"forcing[{i}].mode", "range", f"mode {m.mode} not in 1..N"))
        if not all(np.isfinite([m.a, m.b, m.omega])):
            out.append(Violation(f"forcing[{i}]", "finite", "non-finite forcing coefficient"))
    if isinstance(config.u0, (list, tuple, np.ndarray)):
        if not np.all(np.isfinite(np.asarray(config.u0, dtype=float))):
            out.append(Violation("u0", "finite", "non-finite initial coefficients"))
    if config.panels is not None and config.N >= 1:
        top = geometry.SineBasis(config.domain, config.N).max_axis_index
        if config.panels * config.points < 2 * top:
            out.append(
                Violation("quadrature.panels", "resolution", f"too coarse for mode index {top}")
            )
    if out:
        return out
    S = stability_number(config)
    if S > STABILITY_LIMIT:
        out.append(
            Violation("dt", "stability", f"dt*supD*L*lambda_N*|K|_L1 = {S:.3g} > {STABILITY_LIMIT}")
        )
    return out


def check_config(config):
    problems = validate_config(config)
    if problems:
        raise ConfigError(problems)


@dataclass(frozen=True)
class GalerkinTrajectory:
    """Computed solution on the step grid.

    ``flux`` holds ``Φ'(u) ∇u`` at the quadrature nodes, shape ``(steps+1, nodes, d)``;
    it is ``None`` for closed-form trajectories.  When stepping fails, arrays are
    truncated to the last good step and ``failure`` carries the message.
    """

    times: np.ndarray = field(repr=False)
    coeffs: np.ndarray = field(repr=False)
    derivs: np.ndarray = field(repr=False)
    flux: np.ndarray | None = field(default=None, repr=False)
    failure: str | None = None
    failed_step: int | None = None

    @property
    def ok(self):
        return self.failure is None

    @property
    def n_steps(self):
        return len(self.times) - 1

    @property
    def dt(self):
        return float(self.times[1] - self.times[0]) if len(self.times) > 1 else 0.0


def initial_coefficients(config, grid=None):
    N = config.N
    u0 = config.u0
    if u0 is None:
        return np.zeros(N)
    if callable(u0):
        grid = grid or build_grid(config)
        return geometry.project(u0, N, grid, config.domain)
    c = np.zeros(N)
    v = np.asarray(u0, dtype=float).ravel()[:N]
    c[: len(v)] = v
    return c


def build_grid(config):
    panels = config.panels or geometry.default_panels(config.domain, config.N)
    return geometry.build_quadrature(config.domain, panels, config.points)


class GalerkinSystem:
    """Tabulated basis, coefficient field and convolution weights for one config."""

    def __init__(self, config, fld=None):
        self.config = config
        self.basis = geometry.SineBasis(config.domain, config.N)
        self.grid = build_grid(config)
        self.field = (
            media.sample_field(config.field, config.domain, config.realization)
            if fld is None
            else fld
        )
        nodes = self.grid.nodes
        self.E = self.basis.values(nodes)
        self.G = self.basis.gradients(nodes)
        D = media.field_eval(self.field, nodes)
        # ∫ D M·∇e_i  ==  M.ravel() @ WDG
        self.WDG = (self.grid.weights * D)[:, None, None] * self.G
        self.WDG = self.WDG.reshape(-1, config.N)
        self.conv = kernels.ConvolutionWeights(config.kernel, config.dt, config.n_steps)

    @cached_property
    def times(self):
        return self.config.dt * np.arange(self.config.n_steps + 1)

    def flux(self, c):
        """``Φ'(u^N) ∇u^N`` at the nodes, shape ``(nodes, d)``."""
        u = self.E @ c
        grad = self.G @ c
        return nonlinearity.phi_prime(self.config.phi, u)[:, None] * grad

    def forcing(self, t):
        return self.config.forcing.coefficients(t, self.config.N)

    def rhs(self, t, M):
        """``F_i = <f(t), e_i> - ∫ D M·∇e_i``."""
        return self.forcing(t) - M.ravel() @ self.WDG

    def weak_form_terms(self, coeffs):
        """``a(t_k, u^N, e_i)`` for every stored step (recomputed from coefficients)."""
        H = np.stack([self.flux(c) for c in coeffs])
        W = self.conv.matrix(len(coeffs) - 1)
        M = W @ H.reshape(len(coeffs), -1)
        return M @ self.WDG


def memory_convolution(history, k, kernel, dt):
    """``∫_0^{t_k} K(t_k - s) g(s) ds`` from ``history[0..k]`` by product trapezoid."""
    history = np.asarray(history, dtype=float)
    return kernels.ConvolutionWeights(kernel, dt, max(k, 1)).apply(history, k)


def assemble_rhs(t, c, M, system):
    """``c'`` at time ``t`` given the nodal memory values ``M`` (shape ``(nodes, d)``).

    ``c`` enters only through ``M``; it is accepted so the call mirrors ``F(t, c)``.
    """
    F = system.rhs(t, np.asarray(M, dtype=float))
    if not np.all(np.isfinite(F)):
        raise NumericalError("non-finite right-hand side", step=None)
    return F


class _Run:
    def __init__(self, system, c0):
        cfg = system.config
        S = cfg.n_steps
        self.system = system
        self.C = np.zeros((S + 1, cfg.N))
        self.dC = np.zeros((S + 1, cfg.N))
        self.H = np.zeros((S + 1,) + (system.grid.size, cfg.domain.dim))
        self.C[0] = c0
        self.H[0] = system.flux(c0)
        self.k = 0

    def step(self):
        """Advance from ``t_k`` to ``t_{k+1}``; raises on non-finite values."""
        sysm, k, dt = self.system, self.k, self.system.config.dt
        t = sysm.times
        with np.errstate(all="ignore"):
            F0 = sysm.rhs(t[k], sysm.conv.apply(self.H, k))
            pred = self.C[k] + dt * F0
            self.H[k + 1] = sysm.flux(pred)
            F1 = sysm.rhs(t[k + 1], sysm.conv.apply(self.H, k + 1))
            new = self.C[k] + 0.5 * dt * (F0 + F1)
            g_new = sysm.flux(new)
        if not (np.all(np.isfinite(new)) and np.all(np.isfinite(g_new))):
            raise NumericalError("non-finite state (overflow or NaN)", step=k + 1)
        self.dC[k] = F0
        self.C[k + 1] = new
        self.H[k + 1] = g_new
        self.k = k + 1
        return new

    def finish(self, failure=None):
        sysm, k = self.system, self.k
        if failure is None:
            with np.errstate(all="ignore"):
                self.dC[k] = sysm.rhs(sysm.times[k], sysm.conv.apply(self.H, k))
        n = k + 1
        arrays = [sysm.times[:n].copy(), self.C[:n].copy(), self.dC[:n].copy(), self.H[:n].copy()]
        if failure is not None:
            arrays[2][k] = np.nan
        for a in arrays:
            a.setflags(write=False)
        return GalerkinTrajectory(
            *arrays,
            failure=None if failure is None else str(failure),
            failed_step=None if failure is None else failure.step,
        )


def step(run, k=None):
    """One Heun step of a running solve; returns ``c(t_{k+1})``."""
    if k is not None and k != run.k:
        raise ValueError(f"run is at step {run.k}, not {k}")
    return run.step()


def start(config, fld=None, validate=True):
    if validate:
        check_config(config)
    system = GalerkinSystem(config, fld)
    return _Run(system, initial_coefficients(config, system.grid))


def solve(config, fld=None, validate=True):
    """Integrate on ``[0, T]``.

    Numerical failures do not raise: the partial trajectory comes back with
    ``failure`` set.  Invalid configs raise :class:`ConfigError`.
    """
    run = start(config, fld, validate)
    try:
        for _ in range(config.n_steps):
            run.step()
    except NumericalError as exc:
        log.warning("solve stopped: %s", exc)
        return run.finish(exc)
    return run.finish()
