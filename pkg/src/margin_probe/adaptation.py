"""Surrogate experimental link and few-shot affine recalibration.

The surrogate stands in for a hardware testbed: a short link with lumped
node losses, a frequency-tilted amplifier noise figure, a fixed SNR
implementation penalty, and measurement jitter. A trained simulation model
is adapted to it by fitting a line through a handful of measured margins
against the model's predictions.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field

import numpy as np

from .dataset import ProbeRecord
from .errors import ConfigError, DegeneratePoints
from .gn_engine import ChannelSpec, FiberParams, LinkTopology, snr
from .spectrum import GridPolicy, build_full_plan, sample_partial

EXPERIMENTAL_SLOT_GHZ = 50.0
EXPERIMENTAL_CUT_GBD = 34.4  # 200 Gbit/s 16QAM transceiver in a 50 GHz slot
EXPERIMENTAL_CUT_FORMAT = "16QAM"

# measurement grid: 8 center frequencies x 8 fill levels x 6 launch powers,
# each repeated for 10 random spectrum realizations
GRID_N_FREQS = 8
GRID_N_FILLS = 8
GRID_N_POWERS = 6
GRID_N_REPEATS = 10


@dataclass(frozen=True)
class SurrogateLinkProfile:
    """Perturbed short link emulating an experimental setup."""

    topology: LinkTopology = field(
        default_factory=lambda: LinkTopology(4, 50.0, FiberParams()))
    node_loss_db: float = 1.5        # lumped per-node loss, gain-compensated
    nf_tilt_low_db: float = 1.0      # extra NF at the low band edge
    nf_tilt_high_db: float = 0.0     # extra NF at the high band edge
    snr_penalty_db: float = 1.0      # implementation penalty on every SNR
    jitter_std_db: float = 0.05
    seed: int = 0

    def nf_at(self, freq_thz: float, policy: GridPolicy) -> float:
        """Linearly tilted amplifier noise figure across the band."""
        frac = ((freq_thz - policy.band_start_thz)
                / (policy.band_end_thz - policy.band_start_thz))
        tilt = self.nf_tilt_low_db + frac * (self.nf_tilt_high_db
                                             - self.nf_tilt_low_db)
        return self.topology.fiber.nf_db + tilt

    def to_dict(self) -> dict:
        return {
            "n_spans": self.topology.n_spans,
            "span_length_km": self.topology.span_length_km,
            "attenuation_db_per_km": self.topology.fiber.attenuation_db_per_km,
            "beta2_ps2_per_km": self.topology.fiber.beta2_ps2_per_km,
            "gamma_per_w_km": self.topology.fiber.gamma_per_w_km,
            "nf_db": self.topology.fiber.nf_db,
            "node_loss_db": self.node_loss_db,
            "nf_tilt_low_db": self.nf_tilt_low_db,
            "nf_tilt_high_db": self.nf_tilt_high_db,
            "snr_penalty_db": self.snr_penalty_db,
            "jitter_std_db": self.jitter_std_db,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "SurrogateLinkProfile":
        fiber = FiberParams(doc.get("attenuation_db_per_km", 0.2),
                            doc.get("beta2_ps2_per_km", -21.3),
                            doc.get("gamma_per_w_km", 1.3),
                            doc.get("nf_db", 5.0))
        topo = LinkTopology(int(doc.get("n_spans", 4)),
                            float(doc.get("span_length_km", 50.0)), fiber)
        return cls(topo,
                   float(doc.get("node_loss_db", 1.5)),
                   float(doc.get("nf_tilt_low_db", 1.0)),
                   float(doc.get("nf_tilt_high_db", 0.0)),
                   float(doc.get("snr_penalty_db", 1.0)),
                   float(doc.get("jitter_std_db", 0.05)),
                   int(doc.get("seed", 0)))


def experimental_policy(pch_dbm: float) -> GridPolicy:
    """Fixed 50 GHz grid whose constant-PSD anchor puts the CUT at pch."""
    anchor = pch_dbm - 10.0 * np.log10(EXPERIMENTAL_CUT_GBD / 35.0)
    return GridPolicy(psd_anchor_dbm=anchor, slot_ghz=EXPERIMENTAL_SLOT_GHZ)


@dataclass(frozen=True)
class SurrogateScenario:
    """One point of the experimental measurement grid."""

    seed: int
    center_freq_thz: float
    fill_target: float
    pch_dbm: float
    repeat: int


def experimental_grid(profile: SurrogateLinkProfile) -> list[SurrogateScenario]:
    """8 frequencies x 8 fills (1%..100%) x 6 powers (0..-3 dBm) x 10 reps."""
    policy = experimental_policy(0.0)
    n_slots = int(round((policy.band_end_thz - policy.band_start_thz)
                        / (EXPERIMENTAL_SLOT_GHZ * 1e-3)))
    slot_idx = np.round(np.linspace(4, n_slots - 5, GRID_N_FREQS)).astype(int)
    freqs = (policy.band_start_thz
             + (slot_idx + 0.5) * EXPERIMENTAL_SLOT_GHZ * 1e-3)
    fills = np.linspace(0.01, 1.0, GRID_N_FILLS)
    powers = np.linspace(0.0, -3.0, GRID_N_POWERS)
    scenarios = []
    index = 0
    for f in freqs:
        for fill in fills:
            for p in powers:
                for rep in range(GRID_N_REPEATS):
                    ss = np.random.SeedSequence((profile.seed, index))
                    scenarios.append(SurrogateScenario(
                        int(ss.generate_state(1, np.uint64)[0]),
                        float(f), float(fill), float(p), rep))
                    index += 1
    return scenarios


def surrogate_measure(profile: SurrogateLinkProfile,
                      scenario: SurrogateScenario) -> ProbeRecord:
    """One measured record from the perturbed engine.

    The implementation penalty shifts both SNRs; jitter is applied to each
    SNR reading independently, and the measured margin (clamped at zero)
    is their difference.
    """
    policy = experimental_policy(scenario.pch_dbm)
    cut = ChannelSpec(scenario.center_freq_thz, EXPERIMENTAL_CUT_GBD,
                      scenario.pch_dbm, is_cut=True,
                      modulation_format=EXPERIMENTAL_CUT_FORMAT)
    rng = np.random.default_rng(scenario.seed)
    plan_seed, mask_seed = (int(x) for x in
                            rng.integers(0, 2 ** 63 - 1, size=2))
    full = build_full_plan(policy, cut, plan_seed)
    partial = sample_partial(full, scenario.fill_target, mask_seed)

    nf = profile.nf_at(scenario.center_freq_thz, policy)
    extra = profile.node_loss_db
    kwargs = dict(extra_loss_db=extra, nf_db=nf)
    snr_current = snr(partial, profile.topology, **kwargs) - profile.snr_penalty_db
    snr_full = snr(full, profile.topology, **kwargs) - profile.snr_penalty_db
    if profile.jitter_std_db > 0:
        snr_current += rng.normal(0.0, profile.jitter_std_db)
        snr_full += rng.normal(0.0, profile.jitter_std_db)
    margin = max(snr_current - snr_full, 0.0)
    return ProbeRecord(scenario.seed, profile.topology.n_spans,
                       profile.topology.span_length_km, EXPERIMENTAL_CUT_GBD,
                       EXPERIMENTAL_CUT_FORMAT, scenario.center_freq_thz,
                       policy.psd_anchor_dbm, partial.fill_fraction,
                       snr_current, snr_full, margin)


def measure_grid(profile: SurrogateLinkProfile) -> list[ProbeRecord]:
    return [surrogate_measure(profile, s) for s in experimental_grid(profile)]


@dataclass(frozen=True)
class Recalibration:
    """Affine correction of model outputs fitted on a few measured points."""

    slope: float
    intercept_db: float
    n_calibration_points: int
    fit_residual_db: float
    calibration_seeds: tuple[int, ...]  # record seeds used for the fit

    def apply(self, predictions):
        return self.slope * np.asarray(predictions, float) + self.intercept_db

    def save(self, path) -> None:
        doc = {"schema": "margin-probe/recalibration-v1",
               "slope": self.slope, "intercept_db": self.intercept_db,
               "n_calibration_points": self.n_calibration_points,
               "fit_residual_db": self.fit_residual_db,
               "calibration_seeds": list(self.calibration_seeds)}
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, sort_keys=True)
            fh.write("\n")

    @classmethod
    def load(cls, path) -> "Recalibration":
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
        if doc.get("schema") != "margin-probe/recalibration-v1":
            raise ValueError("unsupported recalibration schema")
        return cls(doc["slope"], doc["intercept_db"],
                   doc["n_calibration_points"], doc["fit_residual_db"],
                   tuple(doc["calibration_seeds"]))


def select_calibration_points(records, k: int = 5, seed: int = 0) -> list:
    """k records spread over the fill-fraction range (min, max, quantiles).

    Ties on identical fill values are broken by a seeded shuffle so the
    choice stays reproducible.
    """
    if k < 2:
        raise ConfigError("need at least two calibration points")
    records = list(records)
    if len(records) < k:
        raise ConfigError(f"need at least {k} records, got {len(records)}")
    rng = np.random.default_rng(seed)
    order = rng.permutation(len(records))
    fills = np.array([records[i].fill_fraction for i in order])
    targets = np.quantile(fills, np.linspace(0.0, 1.0, k))
    chosen: list[int] = []
    for t in targets:
        ranked = np.argsort(np.abs(fills - t), kind="stable")
        pick = next(i for i in ranked if i not in chosen)
        chosen.append(int(pick))
    return [records[order[i]] for i in chosen]


def fit_recalibration(model, calibration_records) -> Recalibration:
    """Least-squares line: measured margin = slope * prediction + intercept."""
    records = list(calibration_records)
    if len(records) < 2:
        raise ConfigError("need at least two calibration points")
    preds, _ = model.predict(np.array([r.features() for r in records]))
    truth = np.array([r.margin_db for r in records])
    if np.ptp(preds) < 1e-12:
        raise DegeneratePoints("all calibration predictions are equal")
    slope, intercept = np.polyfit(preds, truth, 1)
    if slope <= 0:  # affine correction would invert the prediction ordering
        warnings.warn("recalibration slope is non-positive; "
                      "prediction ranking is not preserved", RuntimeWarning)
    residual = float(np.sqrt(np.mean(
        (slope * preds + intercept - truth) ** 2)))
    return Recalibration(float(slope), float(intercept), len(records),
                         residual, tuple(r.seed for r in records))


def predict_adapted(model, recalibration: Recalibration,
                    raw_features) -> np.ndarray | float:
    """Adapted margin prediction: affine correction of the base mean."""
    mean, _ = model.predict(raw_features)
    single = np.asarray(raw_features).ndim == 1
    out = recalibration.apply(mean)
    return float(out) if single else out
