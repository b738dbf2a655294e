"""Time integration: exactness of the linear flow, order, conservation,
reversibility, trust-region aborts, checkpoints."""

import numpy as np
import pytest

from qgfront import diagnostics, kernel, solver, spectral
from qgfront.grids import MOVING, FrontState, UniformGrid
from qgfront.solver import BlowUpError, RunConfig


@pytest.fixture(scope="module")
def small_cfg():
    return RunConfig(n=256, length=40.0, nonlinearity="series", dt=0.05,
                     t_final=1.0, cadence=0.5)


class TestStep:
    def test_linear_flow_exact(self):
        cfg = RunConfig(n=256, length=40.0, nonlinearity="none", dt=0.37,
                        t_final=3.7, cadence=3.7)
        grid = cfg.grid
        m = 5
        k = m * grid.dxi
        init = np.cos(k * grid.x)
        traj = solver.run(cfg, initial_values=init)
        final = traj.states[-1]
        f0 = spectral.transform(grid, init).coefficients[m]
        f1 = spectral.transform(grid, final.values).coefficients[m]
        expected = np.exp(1j * final.time * spectral.dispersion(k))
        assert abs(f1 / f0 - expected) < 1e-12
        assert abs(abs(f1 / f0) - 1.0) < 1e-12

    def test_reversibility(self, small_cfg):
        grid = small_cfg.grid
        state = FrontState(grid, 0.05 * np.exp(-grid.x ** 2 / 4.0), frame=MOVING)
        fwd = solver.step(state, 0.05, small_cfg)
        back = solver.step(fwd, -0.05, small_cfg)
        assert np.max(np.abs(back.values - state.values)) < 1e-9

    def test_fourth_order_convergence(self):
        grid = UniformGrid(256, 40.0)
        init = 0.2 * np.exp(-grid.x ** 2 / 4.0)
        results = {}
        for dt in (0.4, 0.2, 0.1, 0.025):
            cfg = RunConfig(n=256, length=40.0, nonlinearity="series", dt=dt,
                            t_final=4.0, cadence=4.0)
            results[dt] = solver.run(cfg, initial_values=init).states[-1].values
        ref = results[0.025]
        e1 = np.max(np.abs(results[0.4] - ref))
        e2 = np.max(np.abs(results[0.2] - ref))
        e3 = np.max(np.abs(results[0.1] - ref))
        assert 10.0 < e1 / e2 < 25.0
        assert 10.0 < e2 / e3 < 25.0

    def test_blowup_carries_state(self, small_cfg):
        grid = small_cfg.grid
        values = 1e154 * np.sin(grid.dxi * grid.x)
        state = FrontState(grid, values, frame=MOVING)
        with pytest.raises(BlowUpError) as exc:
            solver.step(state, 0.05, small_cfg)
        assert exc.value.last_state is state


class TestRun:
    def test_zero_data(self, small_cfg):
        traj = solver.run(small_cfg, initial_values=np.zeros(small_cfg.n))
        for s in traj.states:
            assert np.all(s.values == 0.0)

    def test_l2_and_mean_conservation(self):
        cfg = RunConfig(n=512, length=60.0, nonlinearity="series", dt=0.1,
                        t_final=10.0, cadence=2.0,
                        initial_family="gaussian",
                        initial_params=(("amplitude", 5e-2), ("width", 1.0)))
        traj = solver.run(cfg)
        l2 = [spectral.l2_norm(s.grid, s.values) for s in traj.states]
        assert abs(l2[-1] - l2[0]) / l2[0] < 1e-8
        zm = [spectral.transform(s.grid, s.values).coefficients[0].real
              for s in traj.states]
        assert max(abs(z - zm[0]) for z in zm) < 1e-12

    def test_series_vs_direct_terminal_difference(self):
        # truncating at mu_max=1 leaves an O(eps^5 T) terminal defect
        diffs = []
        for eps in (2e-2, 1e-2):
            finals = {}
            for mode, mu in (("direct", 3), ("series", 1)):
                cfg = RunConfig(n=256, length=30.0, nonlinearity=mode, mu_max=mu,
                                dt=0.1, t_final=2.0, cadence=2.0,
                                initial_family="modes",
                                initial_params=(
                                    ("modes", ((0.8, eps, 0.0), (1.4, eps, 0.0))),))
                finals[mode] = solver.run(cfg).states[-1].values
            diffs.append(np.max(np.abs(finals["direct"] - finals["series"])))
        ratio = diffs[0] / diffs[1]
        assert 16.0 < ratio < 64.0  # ~2^5 per amplitude doubling

    def test_adaptive_run(self):
        cfg = RunConfig(n=256, length=40.0, nonlinearity="series", dt=0.5,
                        adaptive=True, tol=1e-9, t_final=5.0, cadence=1.0,
                        initial_family="gaussian",
                        initial_params=(("amplitude", 0.1), ("width", 1.0)))
        traj = solver.run(cfg)
        assert traj.states[-1].time == pytest.approx(5.0, abs=1e-9)
        assert len(set(np.round(traj.dts, 12))) >= 1

    def test_spectral_tail_abort(self):
        # marginally resolved data trips the tail monitor
        cfg = RunConfig(n=64, length=8.0, nonlinearity="series", dt=0.05,
                        t_final=20.0, cadence=0.25, tail_limit=1e-8,
                        initial_family="gaussian",
                        initial_params=(("amplitude", 0.8), ("width", 0.4)))
        with pytest.raises(BlowUpError) as exc:
            solver.run(cfg)
        assert exc.value.last_state is not None

    def test_energy_inequality_monitor(self):
        cfg = RunConfig(n=256, length=40.0, nonlinearity="series", dt=0.05,
                        t_final=6.0, cadence=0.5,
                        initial_family="gaussian",
                        initial_params=(("amplitude", 0.3), ("width", 1.5)))
        traj = solver.run(cfg)
        ratios = diagnostics.energy_growth_ratios(traj.states)
        ratios = [r for r in ratios if r > 0]
        assert ratios, "expected measurable Sobolev-energy exchange"
        assert max(ratios) <= 3.0 * float(np.median(ratios))


class TestStationaryPhase:
    def test_unit_speed(self):
        assert solver.stationary_phase_points(1.0) == [0.0]

    def test_one_eighth(self):
        pts = solver.stationary_phase_points(0.125)
        assert pts == pytest.approx([-np.sqrt(3.0), np.sqrt(3.0)], rel=1e-14)

    def test_outside_range(self):
        assert solver.stationary_phase_points(2.0) == []
        assert solver.stationary_phase_points(-0.5) == []


class TestCheckpoints:
    def test_roundtrip(self, tmp_path, small_cfg):
        grid = small_cfg.grid
        state = FrontState(grid, 0.01 * np.exp(-grid.x ** 2), time=1.25,
                           frame=MOVING, jump=0.5)
        path = tmp_path / "chk.dat"
        solver.save_checkpoint(state, path, config_hash="abc123")
        loaded = solver.load_checkpoint(path)
        assert loaded.time == state.time
        assert loaded.frame == state.frame
        assert loaded.jump == state.jump
        assert loaded.grid.n == grid.n
        assert np.array_equal(loaded.values, state.values)

    def test_trajectory_times_increase(self):
        traj = solver.Trajectory()
        g = UniformGrid(64, 10.0)
        traj.append(FrontState(g, np.zeros(64), time=0.0))
        with pytest.raises(ValueError):
            traj.append(FrontState(g, np.zeros(64), time=0.0))


class TestRunConfig:
    def test_validation(self):
        with pytest.raises(ValueError):
            RunConfig(dt=-1.0)
        with pytest.raises(ValueError):
            RunConfig(dealias=0.4)
        with pytest.raises(ValueError):
            RunConfig(nonlinearity="quadratic")
