"""Model evaluations: error histograms, margin sweeps, granularity study.

Every sweep is deterministic given its seed and emits aggregate tables
(grid values, per-value mean/std, sample counts) sufficient to re-plot
the margin-vs-feature curves with their spread bands.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .adaptation import Recalibration
from .bayes_ridge import BayesRidgeModel
from .dataset import (ANCHOR_POWER_RANGE_DBM, SPAN_COUNT_RANGE,
                      SPAN_LENGTH_RANGE_KM, DatasetSplit, feature_matrix,
                      labels)
from .gn_engine import (ChannelSpec, FiberParams, LinkTopology,
                        SpectrumRealization, snr)
from .spectrum import (GridPolicy, MAX_SYMBOL_RATE_GBD, MIN_SYMBOL_RATE_GBD,
                       build_full_plan, sample_partial)

QUANTIZE_MODES = ("nearest", "floor", "ceil")


@dataclass(frozen=True)
class Histogram:
    """Binned estimation errors (prediction minus label)."""

    bin_edges: tuple[float, ...]   # half-open [e_i, e_{i+1}), covers all samples
    counts: tuple[int, ...]
    mean_db: float
    std_db: float
    rmse_db: float

    @property
    def n_samples(self) -> int:
        return int(sum(self.counts))


@dataclass(frozen=True)
class SweepResult:
    """Per-grid-value margin statistics for one swept variable."""

    variable: str
    grid: tuple[float, ...]
    gn_mean: tuple[float, ...]   # engine-computed (or measured) margins
    gn_std: tuple[float, ...]
    ml_mean: tuple[float, ...]   # model predictions
    ml_std: tuple[float, ...]
    counts: tuple[int, ...]


def _predict(model: BayesRidgeModel, features: np.ndarray,
             recalibration: Recalibration | None) -> np.ndarray:
    mean, _ = model.predict(np.atleast_2d(features))
    return recalibration.apply(mean) if recalibration is not None else mean


def error_histogram(model: BayesRidgeModel, records, bin_width: float = 0.05,
                    recalibration: Recalibration | None = None) -> Histogram:
    """Histogram of (prediction - label) over the given records."""
    records = list(records)
    if not records:
        raise ValueError("error_histogram needs at least one record")
    if bin_width <= 0:
        raise ValueError("bin_width must be positive")
    errors = _predict(model, feature_matrix(records),
                      recalibration) - labels(records)
    lo = int(np.floor(errors.min() / bin_width))
    hi = int(np.floor(errors.max() / bin_width)) + 1
    edges = bin_width * np.arange(lo, hi + 1)
    counts, _ = np.histogram(errors, bins=edges)
    # np.histogram closes the last bin; the extra trailing edge keeps every
    # bin effectively half-open and all samples strictly inside
    return Histogram(tuple(float(e) for e in edges),
                     tuple(int(c) for c in counts),
                     float(errors.mean()), float(errors.std()),
                     float(np.sqrt(np.mean(errors ** 2))))


def _draw_topology(rng: np.random.Generator,
                   fiber: FiberParams) -> LinkTopology:
    n_spans = int(rng.integers(SPAN_COUNT_RANGE[0], SPAN_COUNT_RANGE[1] + 1))
    length = float(rng.uniform(*SPAN_LENGTH_RANGE_KM))
    return LinkTopology(n_spans, length, fiber)


def _margin_and_features(policy: GridPolicy, cut: ChannelSpec,
                         topology: LinkTopology, fill: float,
                         plan_seed: int, mask_seed: int,
                         ) -> tuple[float, float, np.ndarray]:
    """(GN margin, realized fill, 5-feature vector) for one realization."""
    full = build_full_plan(policy, cut, plan_seed)
    partial = sample_partial(full, fill, mask_seed)
    snr_current = snr(partial, topology)
    snr_full = snr(full, topology)
    feats = np.array([snr_current, policy.psd_anchor_dbm,
                      cut.center_freq_thz, topology.n_spans,
                      partial.fill_fraction])
    return snr_current - snr_full, partial.fill_fraction, feats


def _relocate_cut(spec, j: int):
    """The same spectrum with the probed-channel role moved to channel j.

    The former probed channel stays in place as a plain interferer; channel
    j is forced active so an SNR can always be evaluated on it.
    """
    if j == spec.cut_index and spec.active_mask[j]:
        return spec
    channels = list(spec.channels)
    old = channels[spec.cut_index]
    channels[spec.cut_index] = ChannelSpec(
        old.center_freq_thz, old.symbol_rate_gbd, old.launch_power_dbm,
        is_cut=False, modulation_format=old.modulation_format)
    new = channels[j]
    channels[j] = ChannelSpec(
        new.center_freq_thz, new.symbol_rate_gbd, new.launch_power_dbm,
        is_cut=True, modulation_format=new.modulation_format)
    mask = list(spec.active_mask)
    mask[j] = True
    return SpectrumRealization(spec.band_start_thz, spec.band_end_thz,
                               tuple(channels), tuple(mask), j)


def frequency_sweep(model: BayesRidgeModel, n_realizations: int = 40,
                    n_freqs: int = 13, fill: float = 0.3, seed: int = 0,
                    fiber: FiberParams | None = None,
                    policy: GridPolicy | None = None,
                    anchor_freq_thz: float | None = None) -> SweepResult:
    """Normalized margin vs CUT center frequency at a fixed fill level.

    Each realization builds one full plan (probed channel at the anchor
    frequency, band center by default) and one partial mask; the probed-
    channel role is then moved to the plan channel nearest each grid
    frequency, so every point of a curve shares the same spectrum and the
    realization-to-realization layout noise cancels in the ratio. Curves
    are normalized by the realization's own engine margin at the anchor
    frequency, making links of very different scales comparable.
    """
    fiber = fiber or FiberParams()
    policy = policy or GridPolicy()
    center = (anchor_freq_thz if anchor_freq_thz is not None
              else 0.5 * (policy.band_start_thz + policy.band_end_thz))
    freqs = np.linspace(policy.band_start_thz + 0.4,
                        policy.band_end_thz - 0.4, n_freqs)
    gn = np.zeros((0, n_freqs))
    ml = np.zeros((0, n_freqs))
    for r in range(n_realizations):
        rng = np.random.default_rng(np.random.SeedSequence((seed, r)))
        topology = _draw_topology(rng, fiber)
        anchor = float(rng.uniform(*ANCHOR_POWER_RANGE_DBM))
        pol = GridPolicy(policy.band_start_thz, policy.band_end_thz,
                         policy.granularity_ghz, policy.constant_psd,
                         anchor, policy.slot_ghz)
        plan_seed, mask_seed = (int(x) for x in
                                rng.integers(0, 2 ** 63 - 1, size=2))
        cut0 = ChannelSpec(center, MIN_SYMBOL_RATE_GBD, 0.0, is_cut=True)
        full = build_full_plan(pol, cut0, plan_seed)
        partial = sample_partial(full, fill, mask_seed)
        centers = np.array([ch.center_freq_thz for ch in full.channels])

        def probe(j):
            part_j = _relocate_cut(partial, j)
            snr_current = snr(part_j, topology)
            snr_full = snr(_relocate_cut(full, j), topology)
            feats = np.array([snr_current, pol.psd_anchor_dbm,
                              centers[j], topology.n_spans,
                              part_j.fill_fraction])
            return snr_current - snr_full, feats

        ref, _ = probe(int(np.argmin(np.abs(centers - center))))
        if ref <= 1e-6:  # degenerate anchor margin, nothing to normalize by
            continue
        gn_row, ml_row = [], []
        for f in freqs:
            m, feats = probe(int(np.argmin(np.abs(centers - f))))
            gn_row.append(m / ref)
            ml_row.append(float(_predict(model, feats, None)[0]) / ref)
        gn = np.vstack([gn, gn_row])
        ml = np.vstack([ml, ml_row])
    return SweepResult("center_freq_thz", tuple(float(f) for f in freqs),
                       tuple(gn.mean(axis=0)), tuple(gn.std(axis=0)),
                       tuple(ml.mean(axis=0)), tuple(ml.std(axis=0)),
                       (len(gn),) * n_freqs)


def fill_sweep(model: BayesRidgeModel, n_realizations: int = 40,
               fills: tuple[float, ...] = tuple(np.linspace(0.1, 1.0, 10)),
               seed: int = 0, fiber: FiberParams | None = None,
               policy: GridPolicy | None = None) -> SweepResult:
    """Margin vs fill fraction over random topologies and realizations."""
    fiber = fiber or FiberParams()
    policy = policy or GridPolicy()
    gn = np.zeros((n_realizations, len(fills)))
    ml = np.zeros((n_realizations, len(fills)))
    for r in range(n_realizations):
        rng = np.random.default_rng(np.random.SeedSequence((seed, r)))
        topology = _draw_topology(rng, fiber)
        anchor = float(rng.uniform(*ANCHOR_POWER_RANGE_DBM))
        rate = float(rng.uniform(MIN_SYMBOL_RATE_GBD, MAX_SYMBOL_RATE_GBD))
        half_bw = 0.5 * rate * 1e-3
        freq = float(rng.uniform(policy.band_start_thz + half_bw,
                                 policy.band_end_thz - half_bw))
        pol = GridPolicy(policy.band_start_thz, policy.band_end_thz,
                         policy.granularity_ghz, policy.constant_psd,
                         anchor, policy.slot_ghz)
        plan_seed, mask_seed = (int(x) for x in
                                rng.integers(0, 2 ** 63 - 1, size=2))
        cut = ChannelSpec(freq, rate, 0.0, is_cut=True)
        for j, fill in enumerate(fills):
            m, _, feats = _margin_and_features(pol, cut, topology, float(fill),
                                              plan_seed, mask_seed)
            gn[r, j] = m
            ml[r, j] = float(_predict(model, feats, None)[0])
    return SweepResult("fill_fraction", tuple(float(f) for f in fills),
                       tuple(gn.mean(axis=0)), tuple(gn.std(axis=0)),
                       tuple(ml.mean(axis=0)), tuple(ml.std(axis=0)),
                       (n_realizations,) * len(fills))


def correlation(result: SweepResult, which: str = "ml",
                include_spread: bool = True) -> float:
    """Pearson correlation of the swept variable with the margin.

    Reconstructed exactly from the per-value aggregates. With
    include_spread the within-bin margin variance enters the margin's
    total variance, giving the sample-level correlation over every
    individual realization; without it only the count-weighted mean curve
    is correlated, which measures the strength of the trend itself
    independent of the realization-to-realization scatter around it.
    """
    x = np.asarray(result.grid)
    n = np.asarray(result.counts, dtype=float)
    mean = np.asarray(result.ml_mean if which == "ml" else result.gn_mean)
    std = np.asarray(result.ml_std if which == "ml" else result.gn_std)
    total = n.sum()
    xbar = float((n * x).sum() / total)
    ybar = float((n * mean).sum() / total)
    cov = float((n * (x - xbar) * (mean - ybar)).sum() / total)
    var_x = float((n * (x - xbar) ** 2).sum() / total)
    var_y = float((n * (mean - ybar) ** 2).sum() / total)
    if include_spread:
        var_y += float((n * std ** 2).sum() / total)
    return cov / np.sqrt(var_x * var_y)


def quantize_fill(values: np.ndarray, granularity: float,
                  mode: str = "nearest") -> np.ndarray:
    """Quantize fill fractions to multiples of `granularity` in (0, 1]."""
    if mode not in QUANTIZE_MODES:
        raise ValueError(f"mode must be one of {QUANTIZE_MODES}")
    values = np.asarray(values, dtype=float)
    if granularity <= 0:
        return values.copy()
    op = {"nearest": np.round, "floor": np.floor, "ceil": np.ceil}[mode]
    return np.clip(op(values / granularity) * granularity, 0.0, 1.0)


def granularity_sweep(model: BayesRidgeModel, split: DatasetSplit,
                      granularities, mode: str = "nearest",
                      ) -> tuple[tuple[float, float, float], ...]:
    """(granularity, original-model RMSE, retrained RMSE) per grid value.

    The fill feature of both splits is quantized; the original model is
    evaluated on the quantized test split, and a fresh model trained on the
    quantized training split is evaluated on the same quantized test split.
    """
    x_train, y_train = feature_matrix(split.train), labels(split.train)
    x_test, y_test = feature_matrix(split.test), labels(split.test)
    rows = []
    for g in granularities:
        xq_test = x_test.copy()
        xq_test[:, 4] = quantize_fill(x_test[:, 4], g, mode)
        rmse_original = model.rmse(xq_test, y_test)
        xq_train = x_train.copy()
        xq_train[:, 4] = quantize_fill(x_train[:, 4], g, mode)
        retrained = BayesRidgeModel.train(xq_train, y_train)
        rows.append((float(g), rmse_original, retrained.rmse(xq_test, y_test)))
    return tuple(rows)


def power_sweep(model: BayesRidgeModel, records,
                recalibration: Recalibration | None = None) -> SweepResult:
    """Measured vs predicted margin per launch-power level.

    Records are grouped by their launch-power feature; the measured margins
    supply the engine-side statistics, the (optionally recalibrated) model
    the predicted ones.
    """
    records = list(records)
    if not records:
        raise ValueError("power_sweep needs at least one record")
    powers = np.round([r.p_ch_dbm for r in records], 9)
    grid = np.unique(powers)
    preds = _predict(model, feature_matrix(records), recalibration)
    measured = labels(records)
    gn_mean, gn_std, ml_mean, ml_std, counts = [], [], [], [], []
    for p in grid:
        sel = powers == p
        gn_mean.append(float(measured[sel].mean()))
        gn_std.append(float(measured[sel].std()))
        ml_mean.append(float(preds[sel].mean()))
        ml_std.append(float(preds[sel].std()))
        counts.append(int(sel.sum()))
    return SweepResult("p_ch_dbm", tuple(float(p) for p in grid),
                       tuple(gn_mean), tuple(gn_std),
                       tuple(ml_mean), tuple(ml_std), tuple(counts))
