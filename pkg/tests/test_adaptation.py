import numpy as np
import pytest

from margin_probe.adaptation import (EXPERIMENTAL_CUT_GBD, Recalibration,
                                     SurrogateLinkProfile,
                                     experimental_grid, experimental_policy,
                                     fit_recalibration, measure_grid,
                                     predict_adapted,
                                     select_calibration_points,
                                     surrogate_measure)
from margin_probe.dataset import ProbeRecord
from margin_probe.errors import ConfigError, DegeneratePoints
from margin_probe.gn_engine import ChannelSpec, margin
from margin_probe.spectrum import build_full_plan, sample_partial


def test_grid_enumeration():
    profile = SurrogateLinkProfile()
    grid = experimental_grid(profile)
    assert len(grid) == 8 * 8 * 6 * 10
    assert len({s.center_freq_thz for s in grid}) == 8
    assert len({s.fill_target for s in grid}) == 8
    assert len({s.pch_dbm for s in grid}) == 6
    assert min(s.pch_dbm for s in grid) == -3.0
    assert max(s.pch_dbm for s in grid) == 0.0
    assert len({s.seed for s in grid}) == len(grid)


def test_experimental_policy_puts_cut_at_requested_power():
    policy = experimental_policy(-2.0)
    assert policy.slot_ghz == 50.0
    assert policy.channel_power_dbm(EXPERIMENTAL_CUT_GBD) == pytest.approx(
        -2.0, abs=1e-12)


def test_zero_perturbation_profile_matches_base_engine():
    profile = SurrogateLinkProfile(node_loss_db=0.0, nf_tilt_low_db=0.0,
                                   nf_tilt_high_db=0.0, snr_penalty_db=0.0,
                                   jitter_std_db=0.0)
    scenario = experimental_grid(profile)[100]
    record = surrogate_measure(profile, scenario)
    # replay the same plan/mask seeds through the unperturbed engine
    policy = experimental_policy(scenario.pch_dbm)
    cut = ChannelSpec(scenario.center_freq_thz, EXPERIMENTAL_CUT_GBD,
                      scenario.pch_dbm, is_cut=True,
                      modulation_format="16QAM")
    rng = np.random.default_rng(scenario.seed)
    plan_seed, mask_seed = (int(x) for x in
                            rng.integers(0, 2 ** 63 - 1, size=2))
    full = build_full_plan(policy, cut, plan_seed)
    partial = sample_partial(full, scenario.fill_target, mask_seed)
    assert record.margin_db == pytest.approx(
        margin(partial, profile.topology), abs=1e-12)


def test_measured_margins_are_nonnegative(surrogate_records):
    assert len(surrogate_records) == 3840
    assert all(r.margin_db >= 0.0 for r in surrogate_records)


def test_profile_dict_round_trip():
    profile = SurrogateLinkProfile(node_loss_db=2.0, seed=5)
    assert SurrogateLinkProfile.from_dict(profile.to_dict()) == profile


def _synthetic_records(margins, fills=None):
    fills = fills if fills is not None else np.linspace(0.1, 0.9, len(margins))
    return [ProbeRecord(1000 + i, 4, 50.0, EXPERIMENTAL_CUT_GBD, "16QAM",
                        193.7, -1.0, float(f), 15.0 + m, 15.0, float(m))
            for i, (m, f) in enumerate(zip(margins, fills))]


def test_calibration_selection_spans_fill_range(surrogate_records):
    points = select_calibration_points(surrogate_records, k=5, seed=0)
    assert len(points) == 5
    fills = sorted(r.fill_fraction for r in points)
    all_fills = [r.fill_fraction for r in surrogate_records]
    assert fills[0] == min(all_fills)
    assert fills[-1] == max(all_fills)
    again = select_calibration_points(surrogate_records, k=5, seed=0)
    assert [r.seed for r in again] == [r.seed for r in points]


def test_calibration_selection_validation():
    records = _synthetic_records([0.1, 0.2, 0.3])
    with pytest.raises(ConfigError):
        select_calibration_points(records, k=1)
    with pytest.raises(ConfigError):
        select_calibration_points(records, k=5)


def test_self_calibration_is_identity(small_model):
    # records whose margins equal the model's own predictions
    rng = np.random.default_rng(3)
    feats = np.column_stack([
        rng.uniform(10, 25, 6), rng.uniform(-3, 0, 6),
        rng.uniform(192, 196, 6), rng.integers(2, 30, 6).astype(float),
        rng.uniform(0.05, 1.0, 6)])
    preds, _ = small_model.predict(feats)
    records = [ProbeRecord(i, int(f[3]), 80.0, 35.0, "QPSK", f[2], f[1],
                           f[4], f[0], f[0] - p, float(p))
               for i, (f, p) in enumerate(zip(feats, preds))]
    recal = fit_recalibration(small_model, records)
    assert recal.slope == pytest.approx(1.0, abs=0.05)
    assert recal.intercept_db == pytest.approx(0.0, abs=0.05)
    assert recal.fit_residual_db <= 1e-9


def test_two_point_fit_interpolates_exactly(small_model):
    records = _synthetic_records([2.0, 0.5], fills=[0.2, 0.8])
    # overwrite margins so that truth differs from predictions
    preds, _ = small_model.predict(
        np.array([r.features() for r in records]))
    recal = fit_recalibration(small_model, records)
    corrected = recal.apply(preds)
    assert corrected[0] == pytest.approx(records[0].margin_db, abs=1e-9)
    assert corrected[1] == pytest.approx(records[1].margin_db, abs=1e-9)


def test_degenerate_calibration_points_rejected(small_model):
    base = _synthetic_records([1.0] * 5, fills=[0.4] * 5)
    with pytest.raises(DegeneratePoints):
        fit_recalibration(small_model, base)


def test_nonpositive_slope_warns(small_model):
    base = _synthetic_records([0.0, 0.0], fills=[0.1, 0.9])
    preds, _ = small_model.predict(np.array([r.features() for r in base]))
    assert preds[0] != preds[1]
    # measured margins move opposite to the predictions: slope must be < 0
    flipped = [ProbeRecord(r.seed, r.n_spans, r.span_length_km, r.cut_gbd,
                           r.modulation, r.center_freq_thz, r.p_ch_dbm,
                           r.fill_fraction, r.snr_current_db, r.snr_full_db,
                           float(5.0 - p))
               for r, p in zip(base, preds)]
    with pytest.warns(RuntimeWarning):
        fit_recalibration(small_model, flipped)


def test_recalibration_round_trip(tmp_path):
    recal = Recalibration(1.1, -0.2, 5, 0.03, (1, 2, 3, 4, 5))
    path = tmp_path / "recal.json"
    recal.save(path)
    assert Recalibration.load(path) == recal
    bad = tmp_path / "bad.json"
    bad.write_text('{"schema": "nope"}')
    with pytest.raises(ValueError):
        Recalibration.load(bad)


def test_predict_adapted_identity(small_model):
    identity = Recalibration(1.0, 0.0, 2, 0.0, (0, 1))
    feats = np.array([15.0, -1.0, 193.7, 10, 0.4])
    base, _ = small_model.predict(feats)
    assert predict_adapted(small_model, identity, feats) == pytest.approx(
        base, rel=1e-12)
    scaled = Recalibration(2.0, 0.5, 2, 0.0, (0, 1))
    assert predict_adapted(small_model, scaled, feats) == pytest.approx(
        2.0 * base + 0.5, rel=1e-12)
