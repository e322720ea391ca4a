import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from stormrtc.config import ControllerConfig, DegradedForecast
from stormrtc.scenario_io import (
    CatchmentParams,
    ConfigError,
    DataError,
    Scenario,
    SeriesFormatError,
    forecast_window,
    load_config,
    load_scenario,
    load_series_csv,
    rainfall_to_inflow,
)
from stormrtc.validation import fixture_path


def write(tmp_path, text, name="s.csv", newline="\n"):
    path = tmp_path / name
    path.write_bytes(text.replace("\n", newline).encode())
    return path


class TestLoadSeries:
    def test_three_rows(self, tmp_path):
        s = load_series_csv(write(tmp_path, "time_s,value\n0,0\n300,0.5\n600,0.0\n"), 300.0)
        assert len(s) == 3
        np.testing.assert_array_equal(s.values, [0.0, 0.5, 0.0])
        assert s.dt == 300.0

    def test_crlf(self, tmp_path):
        s = load_series_csv(write(tmp_path, "time_s,value\n0,1\n300,2\n", newline="\r\n"), 300.0)
        np.testing.assert_array_equal(s.values, [1.0, 2.0])

    def test_non_uniform(self, tmp_path):
        with pytest.raises(SeriesFormatError, match="non-uniform step at line 3"):
            load_series_csv(write(tmp_path, "time_s,value\n0,0\n300,0\n900,0\n"), 300.0)

    def test_negative_value(self, tmp_path):
        with pytest.raises(SeriesFormatError, match="negative value at line 2"):
            load_series_csv(write(tmp_path, "time_s,value\n0,0\n300,-1\n"), 300.0)

    def test_malformed(self, tmp_path):
        with pytest.raises(SeriesFormatError, match="malformed row at line 2"):
            load_series_csv(write(tmp_path, "time_s,value\n0,0\n300;1\n"), 300.0)

    def test_bad_header(self, tmp_path):
        with pytest.raises(SeriesFormatError, match="header"):
            load_series_csv(write(tmp_path, "t,v\n0,0\n"), 300.0)

    def test_wrong_expected_step(self, tmp_path):
        with pytest.raises(SeriesFormatError, match="line 2"):
            load_series_csv(write(tmp_path, "time_s,value\n0,0\n60,0\n"), 300.0)

    def test_infers_step(self, tmp_path):
        assert load_series_csv(write(tmp_path, "time_s,value\n10,0\n70,0\n130,1\n")).dt == 60.0

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            load_series_csv(tmp_path / "nope.csv", 300.0)


class TestRainfallToInflow:
    catchment = CatchmentParams(area=10000.0, runoff_coefficient=0.5, time_constant=1800.0)

    def test_zero_rain(self):
        assert np.all(rainfall_to_inflow(np.zeros(10), self.catchment, 300.0) == 0.0)

    def test_zero_coefficient(self):
        c = CatchmentParams(10000.0, 0.0, 1800.0)
        assert np.all(rainfall_to_inflow(np.full(10, 5.0), c, 300.0) == 0.0)

    def test_unit_pulse_volume(self):
        rain = np.zeros(400)
        rain[0] = 10.0
        q = rainfall_to_inflow(rain, self.catchment, 300.0)
        assert q.sum() * 300.0 == pytest.approx(50.0, rel=1e-6)
        assert q.argmax() == 0 and q[1] < q[0]

    @given(st.lists(st.floats(0.0, 30.0), min_size=1, max_size=30), st.floats(60.0, 7200.0))
    def test_conserves_volume_with_tail(self, rain, k):
        c = CatchmentParams(5000.0, 0.7, k)
        padded = np.concatenate([rain, np.zeros(int(40 * k / 300.0) + 10)])
        q = rainfall_to_inflow(padded, c, 300.0)
        expected = 0.7 * sum(rain) * 1e-3 * 5000.0
        assert q.sum() * 300.0 == pytest.approx(expected, rel=1e-6, abs=1e-9)

    @pytest.mark.parametrize("kwargs", [dict(area=0.0), dict(runoff_coefficient=1.5), dict(time_constant=-1.0)])
    def test_catchment_validation(self, kwargs):
        args = dict(area=1.0, runoff_coefficient=0.5, time_constant=1.0)
        args.update(kwargs)
        with pytest.raises(DataError):
            CatchmentParams(**args)


def scenario(values, dt=300.0):
    return Scenario("s", dt, np.asarray(values, dtype=float))


HORIZON_10 = ControllerConfig(anticipation_horizon=3000.0)


class TestForecastWindow:
    def test_at_end(self):
        w = forecast_window(scenario([1.0, 2.0, 0.0]), 3, HORIZON_10)
        assert np.all(w.inflow == 0.0) and w.t_next_rain == math.inf

    def test_storm_six_steps_ahead(self):
        values = np.zeros(20)
        values[6:9] = 1.0
        w = forecast_window(scenario(values), 0, HORIZON_10)
        assert w.t_next_rain == 1800.0

    def test_mid_storm(self):
        w = forecast_window(scenario([0.0, 1.0, 1.0, 0.0]), 1, HORIZON_10)
        assert w.t_next_rain == 0.0

    def test_zero_padding_and_length(self):
        w = forecast_window(scenario([0.0, 1.0, 2.0]), 1, HORIZON_10)
        assert w.inflow.shape == (11,)
        np.testing.assert_array_equal(w.inflow[:2], [1.0, 2.0])
        assert np.all(w.inflow[2:] == 0.0)

    def test_last_rain_end(self):
        values = [0.0, 1.0, 1.0, 0.0, 0.0, 0.0, 2.0]
        s = scenario(values)
        assert forecast_window(s, 0, HORIZON_10).t_f == 0.0
        assert forecast_window(s, 3, HORIZON_10).t_f == 900.0
        assert forecast_window(s, 5, HORIZON_10).t_f == 900.0
        assert forecast_window(s, 5, HORIZON_10).now == 1500.0

    def test_threshold_is_strict(self):
        cfg = ControllerConfig(anticipation_horizon=3000.0, wet_threshold=0.5)
        w = forecast_window(scenario([0.0, 0.5, 0.6]), 0, cfg)
        assert w.t_next_rain == 600.0

    def test_start_time_offsets_clock(self):
        s = Scenario("s", 300.0, np.array([1.0, 0.0, 0.0]), start_time=1000.0)
        w = forecast_window(s, 2, HORIZON_10)
        assert w.now == 1600.0 and w.t_f == 1300.0

    @given(st.lists(st.floats(0.0, 5.0), min_size=1, max_size=40), st.data())
    def test_perfect_forecast_truthful(self, values, data):
        s = scenario(values)
        k = data.draw(st.integers(0, len(values)))
        w = forecast_window(s, k, HORIZON_10)
        for j in range(11):
            truth = values[k + j] if k + j < len(values) else 0.0
            assert w.inflow[j] == truth

    def test_degraded_is_deterministic_and_keeps_observation(self):
        cfg = ControllerConfig(anticipation_horizon=3000.0, forecast_mode=DegradedForecast(sigma=0.3, seed=5))
        s = scenario(np.linspace(0.1, 2.0, 30))
        a = forecast_window(s, 4, cfg)
        b = forecast_window(s, 4, cfg)
        np.testing.assert_array_equal(a.inflow, b.inflow)
        assert a.inflow[0] == s.inflow[4]
        assert not np.array_equal(a.inflow[1:], s.inflow[5:15])


BASIN_CFG = "area_m2 = 51245.833\nh_max_m = 1.2\nq_max_m3s = 2.54\ndt_s = 300\nhorizon_hours = 60\n"


class TestLoadConfig:
    def test_reference_basin(self, tmp_path):
        params, config, catchment = load_config(write(tmp_path, BASIN_CFG, "p.cfg"))
        assert params.n_c == 720
        assert (params.area, params.h_max, params.q_max, params.dt) == (51245.833, 1.2, 2.54, 300.0)
        assert config.settle_time == 72000.0
        assert config.wet_threshold == 1e-3 and config.initial_depth == 0.0
        assert catchment is None

    def test_bundled_fixture(self):
        params, _, _ = load_config(fixture_path("reference_basin.cfg"))
        assert params.n_c == 720

    def test_missing_key_named(self, tmp_path):
        text = BASIN_CFG.replace("q_max_m3s = 2.54\n", "")
        with pytest.raises(ConfigError, match="q_max_m3s"):
            load_config(write(tmp_path, text, "p.cfg"))

    def test_unknown_key(self, tmp_path):
        with pytest.raises(ConfigError, match="q_max_m3"):
            load_config(write(tmp_path, BASIN_CFG + "q_max_m3 = 1\n", "p.cfg"))

    def test_unparsable(self, tmp_path):
        with pytest.raises(ConfigError, match="area_m2"):
            load_config(write(tmp_path, BASIN_CFG.replace("51245.833", "big"), "p.cfg"))

    def test_comments_and_optionals(self, tmp_path):
        text = "# pond\n" + BASIN_CFG + "settle_hours = 10  # shorter\nte_mode = paper_literal\ninitial_depth_m = 0.3\n"
        _, config, _ = load_config(write(tmp_path, text, "p.cfg"))
        assert config.settle_time == 36000.0
        assert config.te_mode.value == "paper_literal"
        assert config.initial_depth == 0.3

    def test_horizon_not_multiple_of_dt(self, tmp_path):
        with pytest.raises(ConfigError):
            load_config(write(tmp_path, BASIN_CFG.replace("dt_s = 300", "dt_s = 7"), "p.cfg"))

    def test_partial_catchment(self, tmp_path):
        with pytest.raises(ConfigError, match="together"):
            load_config(write(tmp_path, BASIN_CFG + "runoff_coefficient = 0.5\n", "p.cfg"))

    def test_catchment(self, tmp_path):
        text = BASIN_CFG + "catchment_area_m2 = 1e6\nrunoff_coefficient = 0.4\nreservoir_time_s = 900\n"
        _, _, c = load_config(write(tmp_path, text, "p.cfg"))
        assert c == CatchmentParams(1e6, 0.4, 900.0)


class TestLoadScenario:
    def test_needs_one_source(self):
        with pytest.raises(DataError):
            load_scenario(300.0)

    def test_rain_route(self):
        _, _, catchment = load_config(fixture_path("reference_basin_rain.cfg"))
        s = load_scenario(300.0, rain_path=fixture_path("rain_event.csv"), catchment=catchment)
        assert s.rainfall is not None and s.inflow.max() > 0

    def test_scenario_is_immutable(self):
        s = scenario([0.0, 1.0])
        with pytest.raises(ValueError):
            s.inflow[0] = 3.0
