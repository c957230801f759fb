import json

import numpy as np
import pytest

from annulus_dirichlet import closedform as cf
from annulus_dirichlet import kernels
from annulus_dirichlet import optimizer as opt
from annulus_dirichlet.polargrid import PolarGrid, check_admissible, perturb, row_windings, sample_map


def energy(m):
    return kernels.edge_energy(m.w, m.grid.ax, m.grid.at)


def analytic(spec, nr=33, nt=64):
    grid = PolarGrid.for_spec(spec, nr, nt)
    return sample_map(lambda z: cf.eval_minimizer(spec, z), grid, spec.R, spec.j)


class TestConfig:
    @pytest.mark.parametrize("kw", [{"backtrack": 1.0}, {"backtrack": 0.0}, {"tol_energy": 0.0}, {"tol_projection": -1.0}, {"tol_grad": 0.0}])
    def test_invalid(self, kw):
        with pytest.raises(ValueError):
            opt.OptimizerConfig(**kw)


class TestInitialize:
    @pytest.mark.parametrize("mode", opt.MODES)
    def test_admissible(self, critical, mode):
        grid = PolarGrid.for_spec(critical, 33, 64)
        m = opt.initialize(critical, grid, mode, seed=3)
        assert check_admissible(m).ok

    def test_radial_interp_boundary(self, critical):
        m = opt.initialize(critical, PolarGrid.for_spec(critical, 17, 32), "radial_interp")
        np.testing.assert_allclose(np.abs(m.w[0]), 1.0, rtol=4e-16)
        np.testing.assert_allclose(np.abs(m.w[-1]), critical.R, rtol=4e-16)

    def test_power_map_is_exact_when_conformal(self, conformal):
        grid = PolarGrid.for_spec(conformal, 17, 32)
        m = opt.initialize(conformal, grid, "power_map")
        np.testing.assert_allclose(m.w, grid.points() ** 2, rtol=1e-13)
        assert np.all(row_windings(m.w) == 2)

    def test_seeds_differ(self, critical):
        grid = PolarGrid.for_spec(critical, 17, 32)
        a = opt.initialize(critical, grid, "perturbed", seed=0)
        b = opt.initialize(critical, grid, "perturbed", seed=1)
        assert not np.allclose(a.w, b.w)

    def test_unknown_mode(self, critical):
        with pytest.raises(ValueError):
            opt.initialize(critical, PolarGrid.for_spec(critical, 17, 32), "random")


class TestSteps:
    def test_harmonic_step_recovers_g_circ(self, nonelastic):
        errs = []
        for n in (16, 32):
            m = analytic(nonelastic, n + 1, 2 * n)
            w = m.w.copy()
            w[1:-1] = np.exp(1j * nonelastic.j * m.grid.tau) * 1.5
            h = opt.harmonic_interior_step(m.with_values(w))
            errs.append(np.max(np.abs(h.w - m.w)))
        assert errs[1] < 0.35 * errs[0]

    def test_harmonic_step_decreases_energy(self, critical):
        m = opt.initialize(critical, PolarGrid.for_spec(critical, 33, 64), "perturbed", seed=2)
        h = opt.harmonic_interior_step(m)
        assert energy(h) < energy(m)
        np.testing.assert_array_equal(h.w[[0, -1]], m.w[[0, -1]])

    def test_harmonic_solve_residual(self):
        rng = np.random.default_rng(0)
        w = rng.normal(size=(9, 16)) + 1j * rng.normal(size=(9, 16))
        out = opt._harmonic_solve(w, 0.8, 1.7)
        assert opt._interior_residual(out, 0.8, 1.7) < 1e-13

    def test_gradient_step_at_radial_interp(self, critical):
        m = opt.initialize(critical, PolarGrid.for_spec(critical, 33, 64), "radial_interp")
        m2, step = opt.projected_gradient_step(m, opt.OptimizerConfig())
        assert step > 0 and energy(m2) < energy(m)
        np.testing.assert_allclose(np.abs(m2.w[0]), 1.0)
        np.testing.assert_allclose(np.abs(m2.w[-1]), critical.R)
        np.testing.assert_array_equal(row_windings(m2.w), row_windings(m.w))

    def test_g_circ_is_nearly_stationary(self, critical):
        m = analytic(critical, 65, 128)
        raw = kernels.edge_gradient(m.w, m.grid.ax, m.grid.at)
        assert np.linalg.norm(opt.projected_gradient(m)) < 1e-3 * np.linalg.norm(raw)

    def test_kkt_at_g_diamond(self, below):
        m = analytic(below, 65, 128)
        act = opt.active_mask(m)
        assert act.sum() > 0
        raw = kernels.edge_gradient(m.w, m.grid.ax, m.grid.at)
        radial = np.real(raw * np.conj(m.w / np.abs(m.w)))
        # descent direction -raw points into |w| < 1 on the squeeze band
        assert np.all(radial[act] > 0)
        assert np.linalg.norm(opt.projected_gradient(m)) < 1e-3 * np.linalg.norm(raw)

    def test_relax_keeps_constraints(self, below):
        m = opt.initialize(below, PolarGrid.for_spec(below, 33, 64), "perturbed", seed=1)
        r, _ = opt.relax(m, 10, opt.default_omega(m.grid))
        assert energy(r) <= energy(m)
        assert check_admissible(r).ok

    def test_phase_step(self, critical):
        m = opt.harmonic_interior_step(opt.initialize(critical, PolarGrid.for_spec(critical, 33, 64), "perturbed", seed=5))
        m2, a = opt.boundary_phase_step(m, opt.OptimizerConfig())
        assert a > 0 and energy(m2) < energy(m)
        np.testing.assert_allclose(np.abs(m2.w[0]), 1.0)


class TestMinimize:
    def test_conformal_recovers_power_map(self, conformal):
        grid = PolarGrid.for_spec(conformal, 33, 64)
        m, rep = opt.minimize(conformal, grid, opt.OptimizerConfig(seed=1), mode="perturbed")
        assert rep.converged
        assert abs(rep.gap_rel) < 1e-2
        _, rms = opt.compare_to_minimizer(m, conformal)
        assert rms < 5e-2

    @pytest.mark.parametrize("mode", opt.MODES)
    def test_trace_monotone_and_degree_kept(self, critical, mode):
        grid = PolarGrid.for_spec(critical, 33, 64)
        _, rep = opt.minimize(critical, grid, opt.OptimizerConfig(seed=2), mode=mode)
        assert rep.converged
        assert np.all(np.diff(rep.trace) <= 1e-12 * rep.trace[0])
        assert set(rep.degrees) == {2}
        assert rep.active_fraction == 0.0

    def test_below_bound_activity(self, below):
        grid = PolarGrid.for_spec(below, 33, 64)
        m, rep = opt.minimize(below, grid, mode="radial_interp")
        assert rep.converged and abs(rep.gap_rel) < 1.5e-2
        d = opt.squeeze_diagnostics(m, below)
        assert d.band_active_fraction >= 0.9
        assert d.jacobian_ratio <= 1e-2
        # band rho < t < 1 is half the log-radial extent
        assert rep.active_fraction == pytest.approx(0.5, abs=0.05)

    def test_max_iters_flags_non_convergence(self, critical):
        grid = PolarGrid.for_spec(critical, 33, 64)
        _, rep = opt.minimize(critical, grid, opt.OptimizerConfig(max_iters=1), mode="perturbed")
        assert not rep.converged and rep.iterations == 1

    def test_report_json_deterministic(self, critical):
        grid = PolarGrid.for_spec(critical, 17, 32)
        runs = [opt.minimize(critical, grid, opt.OptimizerConfig(seed=4), mode="perturbed")[1].to_json() for _ in range(2)]
        assert runs[0] == runs[1]
        d = json.loads(runs[0])
        for key in ("iterations", "energy", "oracle_energy", "gap_rel", "active_fraction", "trace"):
            assert key in d

    def test_squeeze_diagnostics_needs_band(self, critical):
        with pytest.raises(ValueError):
            opt.squeeze_diagnostics(analytic(critical), critical)


def test_rotation_fit_recovers_angle(critical):
    ref = analytic(critical).w
    theta, rms = opt.rotation_fit(np.exp(0.8j) * ref, ref)
    assert theta == pytest.approx(0.8) and rms < 1e-13
