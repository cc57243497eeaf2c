
import numpy as np
import pytest

from memdiff import harness, kernels, media, nonlinearity, solver
from memdiff.errors import ConfigError
from memdiff.harness import TestFunction
from memdiff.solver import Forcing, ForcingMode


class TestOracle:
    def test_zero(self):
        assert not np.any(harness.oracle_linear(harness.oracle_benchmark(N=3, u0=None)).coeffs)

    def test_pure_forcing(self):
        cfg = harness.oracle_benchmark(
            N=2, u0=[0.5, -1.0], phi=nonlinearity.Nonlinearity("linear", a=0.0),
            forcing=Forcing((ForcingMode(1, a=2.0), ForcingMode(2, a=-0.5))),
        )
        ex = harness.oracle_linear(cfg)
        np.testing.assert_allclose(ex.coeffs[:, 0], 0.5 + 2.0 * ex.times, rtol=1e-13)
        np.testing.assert_allclose(ex.coeffs[:, 1], -1.0 - 0.5 * ex.times, rtol=1e-13)

    def test_rejects_nonlinear(self):
        with pytest.raises(ConfigError) as err:
            harness.oracle_linear(harness.energy_benchmark(m=3))
        fields = {v.field for v in err.value.violations}
        assert {"phi.kind", "field.d_max"} <= fields

    @pytest.mark.parametrize(
        "cfg",
        [
            harness.oracle_benchmark(N=3, u0=[1.0, 0.2, -0.3]),
            harness.oracle_benchmark(
                N=2, u0=[0.0, 1.0], kernel=kernels.MemoryKernel("exponential", 2.0, 3.0),
                field=media.FieldSpec(1.5, 1.5), forcing=Forcing((ForcingMode(1, a=1.0),)),
            ),
        ],
    )
    def test_satisfies_its_own_ode(self, cfg):
        h = 1e-3
        t = np.linspace(0.1, 0.9, 9)
        stencil = np.concatenate([t + s * h for s in (-2, -1, 1, 2)])
        c = harness.oracle_linear(cfg, stencil).coeffs.reshape(4, len(t), -1)
        g = harness.oracle_auxiliary(cfg, stencil).reshape(4, len(t), -1)
        d = lambda y: (y[0] - 8 * y[1] + 8 * y[2] - y[3]) / (12 * h)
        c0 = harness.oracle_linear(cfg, t).coeffs
        g0 = harness.oracle_auxiliary(cfg, t)
        lam = np.arange(1, cfg.N + 1) ** 2.0
        K = cfg.kernel
        f = cfg.forcing.coefficients(0.0, cfg.N)
        aD = cfg.phi.a * cfg.field.d_min
        assert np.max(np.abs(d(c) - (aD * lam * g0 + f))) <= 1e-10
        assert np.max(np.abs(d(g) - (K.kappa * c0 - K.rate * g0))) <= 1e-10


class TestRefineDt:
    def test_order(self):
        t = harness.refine_dt(harness.oracle_benchmark(), [4e-3, 2e-3, 1e-3])
        assert [r.order is None for r in t.rows] == [True, False, False]
        assert all(1.7 <= o <= 2.3 for o in t.orders)
        assert t.errors[1] / t.errors[2] == pytest.approx(4, rel=0.1)

    def test_single_row(self):
        t = harness.refine_dt(harness.oracle_benchmark(), [1e-3])
        assert len(t.rows) == 1
        assert t.orders == []

    def test_oracle_class_required(self):
        with pytest.raises(ConfigError):
            harness.refine_dt(harness.energy_benchmark(), [1e-3])


class TestRefineN:
    def test_decoupled(self):
        t = harness.refine_N(harness.oracle_benchmark(N=2, u0=[1.0, 0.5]), [2, 4, 8])
        assert max(t.errors) <= 1e-10

    def test_order_enforced(self):
        with pytest.raises(ConfigError) as err:
            harness.refine_N(harness.oracle_benchmark(), [8, 4])
        assert err.value.violations[0].field == "run.N_list"

    def test_nonlinear_short_horizon_decreases(self):
        t = harness.refine_N(harness.energy_benchmark(m=3, T=0.05), [4, 8, 16])
        assert t.errors[0] > t.errors[1] > 0


class TestWeakResidual:
    def test_bump(self):
        tf = TestFunction(1, 2.0)
        assert tf.eta(0.0) == tf.eta(2.0) == 0.0
        assert tf.eta(1.0) == 1.0
        assert tf.deta(0.0) == tf.deta(2.0) == 0.0
        h = 1e-6
        assert tf.deta(0.7) == pytest.approx((tf.eta(0.7 + h) - tf.eta(0.7 - h)) / (2 * h), rel=1e-8)

    def test_zero(self):
        cfg = harness.oracle_benchmark(N=4, u0=None)
        assert harness.weak_residual(solver.solve(cfg), TestFunction(1, cfg.T), cfg) == 0.0

    def test_decays_with_dt(self):
        res = []
        for dt in (2e-3, 1e-3):
            cfg = harness.oracle_benchmark(N=4, dt=dt)
            res.append(harness.weak_residual(solver.solve(cfg), TestFunction(1, cfg.T), cfg))
        assert res[1] < 1e-3
        assert res[1] <= res[0] / 2

    def test_corrupted_trajectory(self):
        cfg = harness.oracle_benchmark(N=4, forcing=Forcing((ForcingMode(1, a=1.0),)))
        traj = solver.solve(cfg)
        bad = solver.GalerkinTrajectory(traj.times, 2 * traj.coeffs, traj.derivs)
        tf = TestFunction(1, cfg.T)
        assert harness.weak_residual(bad, tf, cfg) > 1e3 * harness.weak_residual(traj, tf, cfg)

    def test_nonlinear_random_media_small(self):
        cfg = harness.energy_benchmark(m=2.5, T=0.05, dt=2.5e-4)
        traj = solver.solve(cfg)
        assert harness.weak_residual(traj, TestFunction(2, cfg.T), cfg) < 1e-4


class TestSeedSweep:
    def test_degenerate_field_identical(self):
        cfg = harness.energy_benchmark(T=0.05, field=media.FieldSpec(1.0, 1.0, 8, 0))
        reps = harness.seed_sweep(cfg, 3)
        for r in reps[1:]:
            np.testing.assert_array_equal(r.energy, reps[0].energy)
            assert r.passed == reps[0].passed

    def test_repeatable(self):
        cfg = harness.energy_benchmark(T=0.05)
        a, b = harness.seed_sweep(cfg, 2), harness.seed_sweep(cfg, 2)
        for x, y in zip(a, b):
            assert x.energy.tobytes() == y.energy.tobytes()
            assert x.constants == y.constants

    def test_realizations_differ(self):
        reps = harness.seed_sweep(harness.energy_benchmark(T=0.05), 2)
        assert not np.array_equal(reps[0].energy, reps[1].energy)
        assert reps[0].constants.D_sup != reps[1].constants.D_sup

    def test_count(self):
        assert len(harness.seed_sweep(harness.oracle_benchmark(N=1, T=0.1), 4)) == 4
        with pytest.raises(ValueError):
            harness.seed_sweep(harness.oracle_benchmark(), 0)
