import math

import numpy as np
import pytest

from memdiff import geometry, harness, kernels, media, nonlinearity, solver
from memdiff.errors import ConfigError
from memdiff.solver import Forcing, ForcingMode

MU_P, MU_M = (-1 + math.sqrt(5)) / 2, (-1 - math.sqrt(5)) / 2


def closed_form(t):
    return (MU_P * np.exp(MU_M * t) - MU_M * np.exp(MU_P * t)) / (MU_P - MU_M)


def test_closed_form_matches_matrix_exponential():
    cfg = harness.oracle_benchmark()
    exact = harness.oracle_linear(cfg)
    np.testing.assert_allclose(exact.coeffs[:, 0], closed_form(exact.times), rtol=1e-12)


class TestAssemble:
    def system(self, **changes):
        return solver.GalerkinSystem(harness.oracle_benchmark(N=3, **changes))

    def test_zero(self):
        s = self.system()
        F = solver.assemble_rhs(0.0, np.zeros(3), np.zeros((s.grid.size, 1)), s)
        np.testing.assert_array_equal(F, 0.0)

    def test_forcing_only(self):
        s = self.system(forcing=Forcing((ForcingMode(1, a=1.0),)))
        F = solver.assemble_rhs(0.3, np.zeros(3), np.zeros((s.grid.size, 1)), s)
        np.testing.assert_array_equal(F, [1.0, 0.0, 0.0])

    def test_constant_kernel_single_mode(self):
        cfg = harness.oracle_benchmark(N=1, kernel=kernels.MemoryKernel("constant", 1.0))
        s = solver.GalerkinSystem(cfg)
        c = np.array([1.0])
        M = s.flux(c) * 1.0  # ∫_0^1 K ds = 1 for constant history
        F = solver.assemble_rhs(1.0, c, M, s)
        assert F[0] == pytest.approx(1.0, rel=1e-12)

    def test_memory_convolution_wrapper(self):
        H = np.ones((1001, 1))
        out = solver.memory_convolution(H, 1000, kernels.MemoryKernel("exponential", 1, 1), 1e-3)
        assert out[0] == pytest.approx(1 - math.exp(-1), rel=1e-6)


class TestStep:
    def test_zero_state(self):
        run = solver.start(harness.oracle_benchmark(N=2, u0=None))
        np.testing.assert_array_equal(solver.step(run, 0), 0.0)

    def test_constant_flux_freezes_state(self):
        cfg = harness.oracle_benchmark(N=3, u0=[0.3, -1.0, 2.0],
                                       phi=nonlinearity.Nonlinearity("constant", b=4.0))
        run = solver.start(cfg)
        for k in range(5):
            np.testing.assert_array_equal(solver.step(run, k), [0.3, -1.0, 2.0])

    def test_wrong_step_index(self):
        run = solver.start(harness.oracle_benchmark())
        with pytest.raises(ValueError):
            solver.step(run, 3)


def test_zero_data_gives_zero_trajectory():
    traj = solver.solve(harness.oracle_benchmark(N=4, u0=None, T=0.2))
    assert traj.ok
    assert not np.any(traj.coeffs)


def test_bit_identical_repeat():
    cfg = harness.energy_benchmark(T=0.05)
    a, b = solver.solve(cfg), solver.solve(cfg)
    assert a.coeffs.tobytes() == b.coeffs.tobytes()
    assert a.flux.tobytes() == b.flux.tobytes()


def test_trajectory_is_read_only():
    traj = solver.solve(harness.oracle_benchmark(T=0.01))
    with pytest.raises(ValueError):
        traj.coeffs[0, 0] = 2.0


def test_oracle_benchmark_endpoint():
    traj = solver.solve(harness.oracle_benchmark())
    assert traj.coeffs[-1, 0] == pytest.approx(closed_form(1.0), rel=1e-4)


@pytest.mark.parametrize("alpha", [2.0, -0.5, 1e-3])
def test_linear_in_initial_data(alpha):
    base = harness.oracle_benchmark(N=4, T=0.5, u0=[1.0, 0.5, -0.2, 0.1],
                                    field=media.FieldSpec(0.5, 2.0, 4, 7))
    a = solver.solve(base)
    b = solver.solve(base.replace(u0=list(alpha * np.array(base.u0))))
    np.testing.assert_allclose(b.coeffs, alpha * a.coeffs, rtol=1e-10, atol=1e-14 * abs(alpha))


@pytest.mark.parametrize("mode", [1, 3])
def test_modes_decouple_for_constant_D(mode):
    c0 = np.zeros(5)
    c0[mode - 1] = 1.0
    traj = solver.solve(harness.oracle_benchmark(N=5, T=0.5, u0=c0))
    others = np.delete(traj.coeffs, mode - 1, axis=1)
    assert np.max(np.abs(others)) <= 1e-10


def test_temporal_order():
    table = harness.refine_dt(harness.oracle_benchmark(), [4e-3, 2e-3, 1e-3])
    assert all(1.7 <= p <= 2.3 for p in table.orders)


@pytest.mark.parametrize("alpha", [0.0, 0.25, 0.5, 0.75])
def test_power_kernel_order_follows_solution_regularity(alpha):
    # the solution carries a t^(2-alpha) term at t=0, which caps the observed order
    cfg = harness.oracle_benchmark(N=1, T=0.5, kernel=kernels.MemoryKernel("power", 1.0, alpha=alpha))
    ref = solver.solve(cfg.replace(dt=1.25e-4)).coeffs[-1]
    errs = [abs(solver.solve(cfg.replace(dt=dt)).coeffs[-1] - ref)[0] for dt in (4e-3, 2e-3, 1e-3)]
    orders = np.log2(np.array(errs[:-1]) / errs[1:])
    np.testing.assert_allclose(orders, 2 - alpha, atol=0.1)


def test_perturbation_growth_within_lipschitz_rate():
    from memdiff import analysis

    cfg = harness.oracle_benchmark(N=2, u0=[1.0, 0.0])
    base = solver.solve(cfg)
    pert = solver.solve(cfg.replace(u0=[1.0, 1e-6]))
    Lam = analysis.lipschitz_diagnostic(base, cfg)
    gap = np.linalg.norm(pert.coeffs - base.coeffs, axis=1)
    assert np.all(gap <= 1e-6 * np.exp(Lam * base.times) * 1.1)


class TestGuards:
    def test_stability_refusal(self):
        cfg = harness.oracle_benchmark(N=40, dt=1e-3)
        assert solver.stability_number(cfg) > solver.STABILITY_LIMIT
        with pytest.raises(ConfigError) as err:
            solver.solve(cfg)
        assert ("dt", "stability") in [(v.field, v.kind) for v in err.value.violations]

    def test_step_count(self):
        with pytest.raises(ConfigError) as err:
            solver.solve(harness.oracle_benchmark(dt=0.3))
        assert err.value.violations[0].kind == "step count"

    def test_forcing_mode_out_of_range(self):
        cfg = harness.oracle_benchmark(forcing=Forcing((ForcingMode(3, a=1.0),)))
        assert solver.validate_config(cfg)[0].field == "forcing[0].mode"

    def test_invalid_kernel_reported(self):
        cfg = harness.oracle_benchmark(kernel=kernels.MemoryKernel("exponential", kappa=-2.0))
        assert "kernel.kappa" in [v.field for v in solver.validate_config(cfg)]


def test_blow_up_returns_partial_trajectory():
    traj = solver.solve(harness.energy_benchmark(m=3))
    assert not traj.ok
    assert traj.failed_step == traj.n_steps + 1
    assert traj.n_steps < 1000
    assert np.all(np.isfinite(traj.coeffs))
    assert np.isnan(traj.derivs[-1]).all()


def test_rectangle_smoke(pi_square):
    cfg = harness.oracle_benchmark(
        domain=pi_square, N=5, T=0.1, dt=1e-3, u0=[0.0, 1.0],
        field=media.FieldSpec(0.5, 2.0, 3, 11),
        phi=nonlinearity.Nonlinearity("power", a=1.0, m=2.5),
        forcing=Forcing((ForcingMode(1, a=1.0, b=0.5, omega=3.0),)),
    )
    traj = solver.solve(cfg)
    assert traj.ok
    assert traj.coeffs.shape == (101, 5)
    assert traj.flux.shape[-1] == 2
    basis = geometry.SineBasis(pi_square, 5)
    np.testing.assert_array_equal(basis.eigenvalues, sorted(basis.eigenvalues))
