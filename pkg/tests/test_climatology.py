import numpy as np
import pytest

from blocktrack import (
    GREGORIAN,
    Date,
    InsufficientDataError,
    InvalidArgumentError,
    SeasonalCycle,
    ShapeError,
    anomaly,
    build_seasonal_cycle,
    date_range,
    detrend_linear,
    fourier_smooth,
    long_term_daily_mean,
    normalize,
    smooth_cycle,
)

from helpers import full_year_series, make_grid, make_series


def one_cell_grid():
    return make_grid(1, 1)


def hand_cycle(grid, smoothed_std, cycle_length=365):
    """Cycle with constant zero mean and a chosen smoothed std curve."""
    shape = (cycle_length, grid.n_lat, grid.n_lon)
    std = np.zeros(shape)
    std[:] = np.asarray(smoothed_std).reshape(cycle_length, 1, 1)
    return SeasonalCycle(
        grid=grid,
        cycle_length=cycle_length,
        raw_mean=np.zeros(shape),
        raw_std=std,
        smoothed_mean=np.zeros(shape),
        smoothed_std=std,
    )


class TestLongTermDailyMean:
    def test_mean_and_population_std(self):
        g = one_cell_grid()
        dates = [Date(2000, 6, 1), Date(2000, 6, 2),
                 Date(2001, 6, 1), Date(2001, 6, 2)]
        vals = np.array([10.0, 20.0, 30.0, 40.0]).reshape(4, 1, 1)
        cyc = long_term_daily_mean(make_series(g, dates, vals))
        doy1 = GREGORIAN.day_of_year(Date(2000, 6, 1))
        doy2 = GREGORIAN.day_of_year(Date(2000, 6, 2))
        assert cyc.raw_mean[doy1, 0, 0] == pytest.approx(20.0)
        assert cyc.raw_mean[doy2, 0, 0] == pytest.approx(30.0)
        # population std over two samples is half the gap
        assert cyc.raw_std[doy1, 0, 0] == pytest.approx(10.0)
        assert cyc.raw_std[doy2, 0, 0] == pytest.approx(10.0)

    def test_unobserved_days_are_nan(self):
        g = one_cell_grid()
        dates = [Date(2000, 6, 1), Date(2001, 6, 1)]
        cyc = long_term_daily_mean(make_series(g, dates, np.zeros((2, 1, 1))))
        assert np.isnan(cyc.raw_mean[0, 0, 0])
        assert not np.isnan(cyc.raw_mean[GREGORIAN.day_of_year(dates[0]), 0, 0])

    def test_feb29_excluded_from_accumulation(self):
        g = one_cell_grid()
        dates = [Date(2000, 2, 28), Date(2000, 2, 29), Date(2004, 2, 28)]
        vals = np.array([10.0, 9999.0, 30.0]).reshape(3, 1, 1)
        cyc = long_term_daily_mean(make_series(g, dates, vals))
        assert cyc.raw_mean[58, 0, 0] == pytest.approx(20.0)

    def test_needs_two_years(self):
        g = one_cell_grid()
        dates = date_range(GREGORIAN, Date(2000, 6, 1), Date(2000, 6, 10))
        with pytest.raises(InsufficientDataError):
            long_term_daily_mean(make_series(g, dates, np.zeros((10, 1, 1))))


class TestFourierSmooth:
    def setup_method(self):
        self.rng = np.random.default_rng(42)

    def harmonics(self, length, ks, seed=0):
        rng = np.random.default_rng(seed)
        t = np.arange(length)
        out = np.zeros(length)
        for k in ks:
            a, b = rng.normal(size=2)
            out += a * np.cos(2 * np.pi * k * t / length)
            out += b * np.sin(2 * np.pi * k * t / length)
        return out

    def test_low_harmonics_pass_through(self):
        x = 7.0 + self.harmonics(365, range(1, 7), seed=1)
        y = fourier_smooth(x, 6)
        np.testing.assert_allclose(y, x, rtol=0.0, atol=1e-9 * np.abs(x).max())

    def test_seventh_harmonic_annihilated(self):
        amp = 3.0
        t = np.arange(365)
        x = amp * np.sin(2 * np.pi * 7 * t / 365)
        y = fourier_smooth(x, 6)
        assert np.abs(y).max() <= 1e-9 * amp

    def test_idempotent(self):
        x = self.rng.normal(size=365)
        once = fourier_smooth(x, 6)
        twice = fourier_smooth(once, 6)
        np.testing.assert_allclose(twice, once, atol=1e-12)

    def test_multidimensional_cells_independent(self):
        x = self.rng.normal(size=(360, 2, 3))
        y = fourier_smooth(x, 6)
        np.testing.assert_allclose(y[:, 1, 2], fourier_smooth(x[:, 1, 2], 6),
                                   atol=1e-12)

    def test_zero_harmonics_gives_mean(self):
        x = self.rng.normal(size=100)
        np.testing.assert_allclose(fourier_smooth(x, 0), np.full(100, x.mean()),
                                   atol=1e-12)

    def test_harmonic_count_bounded(self):
        with pytest.raises(InvalidArgumentError):
            fourier_smooth(np.zeros(10), 5)
        fourier_smooth(np.zeros(10), 4)

    def test_rejects_nan(self):
        x = np.zeros(20)
        x[3] = np.nan
        with pytest.raises(InvalidArgumentError):
            fourier_smooth(x, 2)


def test_smooth_cycle_requires_full_coverage():
    g = one_cell_grid()
    dates = [Date(2000, 6, 1), Date(2001, 6, 1)]
    cyc = long_term_daily_mean(make_series(g, dates, np.zeros((2, 1, 1))))
    with pytest.raises(InsufficientDataError):
        smooth_cycle(cyc)


def test_build_seasonal_cycle_full_years():
    g = make_grid(2, 2)
    series = full_year_series(g, n_years=2, noise=5.0, seed=3)
    cyc = build_seasonal_cycle(series)
    assert cyc.smoothed_mean is not None
    assert cyc.smoothed_mean.shape == (365, 2, 2)
    assert np.all(np.isfinite(cyc.smoothed_mean))
    # smoothing is a projection: smoothing again changes nothing
    np.testing.assert_allclose(fourier_smooth(cyc.smoothed_mean, 6),
                               cyc.smoothed_mean, atol=1e-10)


class TestAnomaly:
    def test_subtracts_smoothed_daily_mean(self):
        g = one_cell_grid()
        cyc = hand_cycle(g, np.zeros(365))
        mean = np.arange(365, dtype=float).reshape(365, 1, 1)
        cyc = SeasonalCycle(grid=g, cycle_length=365, raw_mean=mean,
                            raw_std=cyc.raw_std, smoothed_mean=mean,
                            smoothed_std=cyc.smoothed_std)
        dates = [Date(2001, 1, 2), Date(2001, 1, 3)]
        s = make_series(g, dates, np.array([11.0, 11.0]).reshape(2, 1, 1))
        out = anomaly(s, cyc)
        np.testing.assert_allclose(out.values[:, 0, 0], [10.0, 9.0])

    def test_leap_day_reads_feb28_slot(self):
        g = one_cell_grid()
        mean = np.zeros((365, 1, 1))
        mean[58] = 100.0
        cyc = SeasonalCycle(grid=g, cycle_length=365, raw_mean=mean,
                            raw_std=np.zeros((365, 1, 1)), smoothed_mean=mean,
                            smoothed_std=np.zeros((365, 1, 1)))
        s = make_series(g, [Date(2000, 2, 29)], np.full((1, 1, 1), 150.0))
        out = anomaly(s, cyc)
        assert out.values[0, 0, 0] == pytest.approx(50.0)

    def test_grid_mismatch(self):
        cyc = hand_cycle(one_cell_grid(), np.zeros(365))
        s = make_series(make_grid(2, 2), [Date(2001, 6, 1)], np.zeros((1, 2, 2)))
        with pytest.raises(ShapeError):
            anomaly(s, cyc)

    def test_requires_smoothed(self):
        g = one_cell_grid()
        cyc = SeasonalCycle(grid=g, cycle_length=365,
                            raw_mean=np.zeros((365, 1, 1)),
                            raw_std=np.zeros((365, 1, 1)))
        s = make_series(g, [Date(2001, 6, 1)], np.zeros((1, 1, 1)))
        with pytest.raises(InvalidArgumentError):
            anomaly(s, cyc)


class TestDetrend:
    def test_removes_exact_line(self):
        g = make_grid(2, 2)
        dates = date_range(GREGORIAN, Date(2001, 6, 1), Date(2001, 6, 20))
        t = np.arange(20, dtype=float)
        vals = (3.0 + 0.5 * t)[:, None, None] * np.ones((1, 2, 2))
        out = detrend_linear(make_series(g, dates, vals))
        np.testing.assert_allclose(out.values, 0.0, atol=1e-9)

    def test_slopes_fit_per_cell(self):
        g = make_grid(1, 2)
        dates = date_range(GREGORIAN, Date(2001, 6, 1), Date(2001, 6, 10))
        t = np.arange(10, dtype=float)
        vals = np.stack([1.0 * t, -2.0 * t], axis=1).reshape(10, 1, 2)
        out = detrend_linear(make_series(g, dates, vals))
        np.testing.assert_allclose(out.values, 0.0, atol=1e-9)

    def test_oscillation_survives(self):
        g = one_cell_grid()
        dates = date_range(GREGORIAN, Date(2001, 6, 1), Date(2001, 6, 30))
        osc = np.cos(np.linspace(0, 6 * np.pi, 30))
        vals = osc.reshape(30, 1, 1)
        out = detrend_linear(make_series(g, dates, vals))
        assert np.abs(out.values).max() > 0.5

    def test_needs_two_steps(self):
        g = one_cell_grid()
        with pytest.raises(InsufficientDataError):
            detrend_linear(make_series(g, [Date(2001, 6, 1)], np.zeros((1, 1, 1))))


class TestNormalize:
    def test_floor_exact(self):
        g = one_cell_grid()
        std = np.zeros(365)
        std[0], std[1], std[2], std[3] = 0.0, 50.0, 99.999, 100.001
        cyc = hand_cycle(g, std)
        dates = date_range(GREGORIAN, Date(2001, 1, 1), Date(2001, 1, 4))
        s = make_series(g, dates, np.full((4, 1, 1), 200.0))
        out = normalize(s, cyc)
        got = out.values[:, 0, 0]
        assert got[0] == 200.0 / 100.0
        assert got[1] == 200.0 / 100.0
        assert got[2] == 200.0 / 100.0
        assert got[3] == 200.0 / 100.001

    def test_large_std_divides(self):
        g = one_cell_grid()
        cyc = hand_cycle(g, np.full(365, 400.0))
        s = make_series(g, [Date(2001, 6, 1)], np.full((1, 1, 1), 200.0))
        out = normalize(s, cyc)
        assert out.values[0, 0, 0] == pytest.approx(0.5)
        assert out.units == ""

    def test_zero_floor_zero_std_rejected(self):
        g = one_cell_grid()
        cyc = hand_cycle(g, np.zeros(365))
        s = make_series(g, [Date(2001, 6, 1)], np.ones((1, 1, 1)))
        with pytest.raises(InvalidArgumentError):
            normalize(s, cyc, floor=0.0)

    def test_negative_floor_rejected(self):
        g = one_cell_grid()
        cyc = hand_cycle(g, np.zeros(365))
        s = make_series(g, [Date(2001, 6, 1)], np.ones((1, 1, 1)))
        with pytest.raises(InvalidArgumentError):
            normalize(s, cyc, floor=-1.0)


def test_full_pipeline_recovers_planted_departure():
    """A constant field plus one strong 10-day bump normalizes to a clear
    superlevel feature on exactly the planted days."""
    g = make_grid(3, 3)
    series = full_year_series(g, n_years=3, noise=2.0, seed=11)
    vals = np.array(series.values)
    planted = [i for i, d in enumerate(series.dates)
               if d.year == 2001 and d.month == 7 and 5 <= d.day <= 14]
    vals[planted, 1, 1] += 500.0
    series = series.with_values(vals)
    cyc = build_seasonal_cycle(series)
    norm = normalize(detrend_linear(anomaly(series, cyc)), cyc)
    score = norm.values[:, 1, 1]
    hot = set(np.nonzero(score >= 1.2)[0].tolist())
    assert set(planted) <= hot
    assert len(hot) < len(planted) + 30
