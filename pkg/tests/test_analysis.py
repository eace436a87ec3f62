import numpy as np
import pytest

from margin_probe.analysis import (SweepResult, correlation, error_histogram,
                                   fill_sweep, frequency_sweep,
                                   granularity_sweep, power_sweep,
                                   quantize_fill)
from margin_probe.dataset import ProbeRecord, feature_matrix


def test_histogram_counts_cover_all_samples(small_model, small_split):
    hist = error_histogram(small_model, small_split.test, bin_width=0.05)
    assert hist.n_samples == len(small_split.test)
    widths = np.diff(hist.bin_edges)
    assert np.allclose(widths, 0.05, atol=1e-12)
    assert hist.rmse_db >= abs(hist.mean_db)


def test_histogram_of_perfect_predictor(small_model, small_split):
    rows = list(small_split.test[:20])
    preds, _ = small_model.predict(feature_matrix(rows))
    perfect = [ProbeRecord(r.seed, r.n_spans, r.span_length_km, r.cut_gbd,
                           r.modulation, r.center_freq_thz, r.p_ch_dbm,
                           r.fill_fraction, r.snr_current_db, r.snr_full_db,
                           float(p))
               for r, p in zip(rows, preds)]
    hist = error_histogram(small_model, perfect, bin_width=0.1)
    assert sum(c > 0 for c in hist.counts) == 1
    assert hist.rmse_db <= 1e-12


def test_histogram_validation(small_model):
    with pytest.raises(ValueError):
        error_histogram(small_model, [])


def test_quantize_fill_modes():
    x = np.array([0.07, 0.12, 0.5, 0.94])
    assert np.allclose(quantize_fill(x, 0.2, "nearest"),
                       [0.0, 0.2, 0.4, 1.0], atol=1e-12)
    assert np.allclose(quantize_fill(x, 0.2, "floor"),
                       [0.0, 0.0, 0.4, 0.8], atol=1e-12)
    assert np.allclose(quantize_fill(x, 0.2, "ceil"),
                       [0.2, 0.2, 0.6, 1.0], atol=1e-12)
    assert np.array_equal(quantize_fill(x, 0.0), x)  # g = 0 is a no-op
    with pytest.raises(ValueError):
        quantize_fill(x, 0.2, "sideways")


def test_granularity_zero_recovers_baseline(small_model, small_split):
    rows = granularity_sweep(small_model, small_split, [0.0, 0.25])
    baseline = small_model.rmse(feature_matrix(small_split.test),
                                [r.margin_db for r in small_split.test])
    g0, original0, _ = rows[0]
    assert g0 == 0.0
    assert original0 == pytest.approx(baseline, rel=1e-12)
    # coarser fill information cannot improve the original model
    assert rows[1][1] >= original0 - 1e-9


def test_power_sweep_groups_by_launch_power(small_model, surrogate_records):
    result = power_sweep(small_model, surrogate_records)
    assert result.variable == "p_ch_dbm"
    assert len(result.grid) == 6
    assert all(c == 640 for c in result.counts)
    assert list(result.grid) == sorted(result.grid)
    with pytest.raises(ValueError):
        power_sweep(small_model, [])


def test_correlation_matches_direct_sample_computation():
    rng = np.random.default_rng(0)
    grid, means, stds, counts = [], [], [], []
    xs, ys = [], []
    for i, x in enumerate((0.1, 0.4, 0.7, 1.0)):
        samples = rng.normal(2.0 - x, 0.2, size=50 + 10 * i)
        grid.append(x)
        means.append(float(samples.mean()))
        stds.append(float(samples.std()))
        counts.append(len(samples))
        xs.extend([x] * len(samples))
        ys.extend(samples)
    result = SweepResult("fill_fraction", tuple(grid), tuple(means),
                         tuple(stds), tuple(means), tuple(stds),
                         tuple(counts))
    direct = np.corrcoef(xs, ys)[0, 1]
    assert correlation(result) == pytest.approx(direct, rel=1e-12)
    # without the spread the correlation is that of the mean curve alone
    curve = np.corrcoef(np.repeat(grid, counts), np.repeat(means, counts))[0, 1]
    assert correlation(result, include_spread=False) == pytest.approx(
        curve, rel=1e-12)
    assert abs(correlation(result, include_spread=False)) >= \
        abs(correlation(result))


def test_fill_sweep_shapes_and_full_fill(small_model):
    result = fill_sweep(small_model, n_realizations=3,
                        fills=(0.3, 0.6, 1.0), seed=1)
    assert result.variable == "fill_fraction"
    assert len(result.grid) == 3
    assert all(c == 3 for c in result.counts)
    # a completely filled spectrum has zero margin by definition
    assert result.gn_mean[-1] == 0.0
    assert result.gn_std[-1] == 0.0
    # margins fall with rising fill
    assert result.gn_mean[0] > result.gn_mean[-1]


def test_frequency_sweep_normalization(small_model):
    result = frequency_sweep(small_model, n_realizations=2, n_freqs=5,
                             seed=2)
    assert result.variable == "center_freq_thz"
    assert len(result.grid) == 5
    assert result.counts[0] >= 1
    # normalized engine margins sit near 1 by construction
    assert 0.2 < np.mean(result.gn_mean) < 2.0


def test_sweeps_are_deterministic(small_model):
    a = fill_sweep(small_model, n_realizations=2, fills=(0.4, 0.9), seed=5)
    b = fill_sweep(small_model, n_realizations=2, fills=(0.4, 0.9), seed=5)
    assert a == b
