"""Measurement layer: fits, profile norms, scattering series, records."""

import json
import math

import numpy as np
import pytest

from qgfront import diagnostics, solver, spectral, symbols
from qgfront.grids import MOVING, FrontState, UniformGrid
from qgfront.solver import RunConfig


class TestDecayFit:
    def test_exact_power_law(self):
        ts = np.linspace(50, 500, 30)
        slope, half = diagnostics.decay_fit([(t, 5.0 * t ** -0.5) for t in ts],
                                            (50, 500))
        assert slope == pytest.approx(-0.5, abs=1e-12)
        assert half < 1e-10

    def test_scale_invariance(self):
        ts = np.linspace(50, 500, 20)
        series = [(t, t ** -0.37 * (1 + 0.01 * math.sin(t))) for t in ts]
        s1, _ = diagnostics.decay_fit(series, (50, 500))
        s2, _ = diagnostics.decay_fit([(t, 7.3 * v) for t, v in series], (50, 500))
        assert s1 == pytest.approx(s2, abs=1e-12)

    def test_needs_samples(self):
        with pytest.raises(ValueError):
            diagnostics.decay_fit([(t, 1.0) for t in range(5)], (0, 10))

    def test_rejects_nonpositive(self):
        ts = np.linspace(50, 500, 20)
        with pytest.raises(ValueError):
            diagnostics.decay_fit([(t, -1.0) for t in ts], (50, 500))

    def test_window_filtering(self):
        series = [(t, t ** -1.0) for t in np.linspace(1, 1000, 200)]
        slope, _ = diagnostics.decay_fit(series, (100, 900))
        assert slope == pytest.approx(-1.0, abs=1e-12)


class TestWeightedProfileNorm:
    def test_initial_value_matches_direct_derivative(self):
        g = UniformGrid(512, 60.0)
        phi = 0.01 * np.exp(-g.x ** 2 / 2.0)
        state = FrontState(g, phi, time=0.0, frame=MOVING)
        wpn = diagnostics.weighted_profile_norm(state)
        # (2 pi)^{-1/2} ||x phi||_{L^2} identity for localised data
        xphi = np.sqrt(np.sum((g.x * phi) ** 2) * g.dx / (2.0 * np.pi))
        assert wpn == pytest.approx(xphi, rel=1e-12)

    def test_requires_moving_frame(self):
        g = UniformGrid(64, 10.0)
        state = FrontState(g, np.zeros(64), frame="lab")
        with pytest.raises(ValueError):
            diagnostics.weighted_profile_norm(state)


@pytest.fixture(scope="module")
def run_records():
    g = UniformGrid(256, 40.0)
    xi_star = 10 * g.dxi
    cfg = RunConfig(n=256, length=40.0, nonlinearity="series", dt=0.25,
                    t_final=20.0, cadence=0.5,
                    initial_family="gaussian",
                    initial_params=(("amplitude", 0.05), ("width", 1.0)))
    records = []
    solver.run(cfg, observer=lambda s: records.append(
        diagnostics.compute_record(s, tracked_xis=[xi_star], pad=1)))
    return records, xi_star


class TestScatteringExtract:

    def test_initial_value(self, run_records):
        records, xi = run_records
        series = diagnostics.scattering_extract(records, xi)
        assert series.v[0] == series.h[0]  # theta(0) = 0
        assert series.times[0] == 0.0

    def test_identity(self, run_records):
        records, xi = run_records
        series = diagnostics.scattering_extract(records, xi)
        resid = np.max(np.abs(series.v * np.exp(-1j * series.theta) - series.h))
        assert resid < 1e-12

    def test_cadence_warning(self, run_records):
        records, xi = run_records
        assert not diagnostics.scattering_extract(records, xi).cadence_warning
        sparse = records[::4]
        assert diagnostics.scattering_extract(sparse, xi).cadence_warning


class TestResonanceIntegral:
    def bval(self, B):
        a = abs(symbols.frak_a(1.0))
        return diagnostics.resonance_integral_check(1.0, B * B / a, 1.0)

    def test_rate_against_fitted_constant(self):
        c = self.bval(25.0) / 25.0 ** -0.5
        assert self.bval(100.0) <= 0.1 * c * 100.0 ** -0.5

    def test_monotone_decrease(self):
        devs = [self.bval(B) for B in (16.0, 64.0, 256.0)]
        assert devs[1] < 1.1 * devs[0]
        assert devs[2] < 1.1 * devs[1]
        assert devs[2] < devs[0]

    def test_limit_value(self):
        # the deviation itself is the distance to 2 pi
        assert self.bval(256.0) < 1e-3

    def test_regime_error(self):
        with pytest.raises(diagnostics.RegimeError):
            diagnostics.resonance_integral_check(1.0, 1.0, 0.1)


class TestRecords:
    def test_reproducible_from_checkpoint(self, tmp_path):
        g = UniformGrid(256, 40.0)
        state = FrontState(g, 0.02 * np.exp(-g.x ** 2 / 3.0), time=2.5,
                           frame=MOVING)
        rec1 = diagnostics.compute_record(state, tracked_xis=[5 * g.dxi])
        path = tmp_path / "c.dat"
        solver.save_checkpoint(state, path)
        rec2 = diagnostics.compute_record(solver.load_checkpoint(path),
                                          tracked_xis=[5 * g.dxi])
        for field in ("l2", "sobolev", "z", "b16", "sup", "dxi_profile",
                      "zero_mode", "tail_fraction"):
            assert getattr(rec1, field) == pytest.approx(
                getattr(rec2, field), rel=1e-12, abs=1e-300)

    def test_csv_and_jsonl(self, tmp_path):
        g = UniformGrid(128, 20.0)
        xi = 4 * g.dxi
        recs = [diagnostics.compute_record(
            FrontState(g, 0.01 * np.cos(xi * g.x), time=float(t), frame=MOVING),
            tracked_xis=[xi], pad=1) for t in (0, 1)]
        csv_path = tmp_path / "d.csv"
        jsonl_path = tmp_path / "d.jsonl"
        diagnostics.write_csv(recs, csv_path, tracked_xis=[xi])
        diagnostics.write_jsonl(recs, jsonl_path, tracked_xis=[xi])
        header = csv_path.read_text().splitlines()[0].split(",")
        assert header[: len(diagnostics.CSV_COLUMNS)] == diagnostics.CSV_COLUMNS
        rows = [json.loads(line) for line in jsonl_path.read_text().splitlines()]
        assert all(r["schema"] == diagnostics.SCHEMA_VERSION for r in rows)
        assert rows[1]["time"] == 1.0

    def test_norms_nonnegative(self):
        g = UniformGrid(128, 20.0)
        rec = diagnostics.compute_record(
            FrontState(g, np.random.default_rng(0).standard_normal(128) * 0.01,
                       frame=MOVING), pad=1)
        for field in ("l2", "sobolev", "z", "b16", "sup", "dxi_profile"):
            assert getattr(rec, field) >= 0.0


class TestLinearDecayStudy:
    def test_sup_series_positive_decreasing_tail(self):
        g = UniformGrid(1024, 80.0)
        init = np.exp(-g.x ** 2 / 2.0)
        series = diagnostics.linear_decay_study(g, init, [10.0, 40.0, 80.0])
        vals = [v for _, v in series]
        assert all(v > 0 for v in vals)
        assert vals[2] < vals[0]
