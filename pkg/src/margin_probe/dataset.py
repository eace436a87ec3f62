"""Parameter-space sampling and labeled dataset generation.

Each row gets its own RNG stream derived from (master_seed, row_index), so
the generated file is identical for any worker count and any single row
can be replayed from its recorded seed.
"""

from __future__ import annotations

import csv
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import MarginProbeError
from .gn_engine import ChannelSpec, FiberParams, LinkTopology, snr
from .spectrum import (GridPolicy, MAX_SYMBOL_RATE_GBD, MIN_SYMBOL_RATE_GBD,
                       MODULATION_FORMATS, build_full_plan, sample_partial)

SPAN_COUNT_RANGE = (2, 30)
SPAN_LENGTH_RANGE_KM = (60.0, 120.0)
ANCHOR_POWER_RANGE_DBM = (-3.0, 0.0)

CSV_HEADER = ("seed", "n_spans", "span_length_km", "cut_gbd", "modulation",
              "center_freq_thz", "p_ch_dbm", "fill_fraction",
              "snr_current_db", "snr_full_db", "margin_db")

FLOAT_FORMAT = "{:.6f}"


@dataclass(frozen=True)
class Scenario:
    """One point of the sampled parameter space."""

    seed: int
    n_spans: int
    span_length_km: float
    cut_gbd: float
    modulation: str
    center_freq_thz: float
    psd_anchor_dbm: float
    fill_target: float


@dataclass(frozen=True)
class ProbeRecord:
    """One labeled dataset row (5 raw features, label, provenance).

    p_ch_dbm is the constant-PSD anchor: the launch power of a 35 GBd
    channel, from which every channel's power follows by bandwidth scaling.
    """

    seed: int
    n_spans: int
    span_length_km: float
    cut_gbd: float
    modulation: str
    center_freq_thz: float
    p_ch_dbm: float
    fill_fraction: float
    snr_current_db: float
    snr_full_db: float
    margin_db: float

    def features(self) -> np.ndarray:
        return np.array([self.snr_current_db, self.p_ch_dbm,
                         self.center_freq_thz, self.n_spans,
                         self.fill_fraction])


def row_seed(master_seed: int, index: int) -> int:
    """Stable per-row seed; independent of generation order."""
    ss = np.random.SeedSequence((master_seed, index))
    return int(ss.generate_state(1, np.uint64)[0])


def _draw_scenario(seed: int, policy: GridPolicy) -> Scenario:
    rng = np.random.default_rng(seed)
    n_spans = int(rng.integers(SPAN_COUNT_RANGE[0], SPAN_COUNT_RANGE[1] + 1))
    span_length = float(rng.uniform(*SPAN_LENGTH_RANGE_KM))
    cut_gbd = float(rng.uniform(MIN_SYMBOL_RATE_GBD, MAX_SYMBOL_RATE_GBD))
    anchor = float(rng.uniform(*ANCHOR_POWER_RANGE_DBM))
    modulation = str(MODULATION_FORMATS[rng.integers(len(MODULATION_FORMATS))])
    # CUT center uniform over granularity-aligned positions that keep the
    # whole support inside the band
    half_bw = 0.5 * cut_gbd * 1e-3
    step = policy.granularity_ghz * 1e-3
    lo_slot = int(np.ceil((policy.band_start_thz + half_bw
                           - policy.band_start_thz) / step))
    hi_slot = int(np.floor((policy.band_end_thz - half_bw
                            - policy.band_start_thz) / step))
    slot = int(rng.integers(lo_slot, hi_slot + 1))
    center = policy.band_start_thz + slot * step
    cut_only = cut_gbd * 1e-3 / (policy.band_end_thz - policy.band_start_thz)
    fill_target = float(rng.uniform(cut_only, 1.0))
    return Scenario(seed, n_spans, span_length, cut_gbd, modulation,
                    center, anchor, fill_target)


def sample_parameter_space(n_rows: int, master_seed: int,
                           policy: GridPolicy | None = None) -> list[Scenario]:
    """Independent uniform draws over the training parameter space."""
    if n_rows < 1:
        raise ValueError("n_rows must be >= 1")
    policy = policy or GridPolicy()
    return [_draw_scenario(row_seed(master_seed, i), policy)
            for i in range(n_rows)]


def generate_record(scenario: Scenario, fiber: FiberParams | None = None,
                    policy: GridPolicy | None = None) -> ProbeRecord:
    """Run the GN engine for one scenario; fully determined by its seed."""
    fiber = fiber or FiberParams()
    policy = policy or GridPolicy()
    policy = GridPolicy(policy.band_start_thz, policy.band_end_thz,
                        policy.granularity_ghz, policy.constant_psd,
                        scenario.psd_anchor_dbm, policy.slot_ghz)
    cut = ChannelSpec(scenario.center_freq_thz, scenario.cut_gbd, 0.0,
                      is_cut=True, modulation_format=scenario.modulation)
    rng = np.random.default_rng(scenario.seed)
    plan_seed, mask_seed = (int(x) for x in
                            rng.integers(0, 2 ** 63 - 1, size=2))
    full = build_full_plan(policy, cut, plan_seed)
    partial = sample_partial(full, scenario.fill_target, mask_seed)
    topology = LinkTopology(scenario.n_spans, scenario.span_length_km, fiber)
    snr_current = snr(partial, topology)
    snr_full = snr(full, topology)
    return ProbeRecord(scenario.seed, scenario.n_spans,
                       scenario.span_length_km, scenario.cut_gbd,
                       scenario.modulation, scenario.center_freq_thz,
                       scenario.psd_anchor_dbm, partial.fill_fraction,
                       snr_current, snr_full, snr_current - snr_full)


@dataclass(frozen=True)
class GenerationResult:
    records: tuple
    errors: tuple  # (row_index, message) for rows skipped on engine errors


def _generate_chunk(args):
    scenarios, offset, fiber, policy = args
    records, errors = [], []
    for i, scenario in enumerate(scenarios):
        try:
            records.append(generate_record(scenario, fiber, policy))
        except MarginProbeError as exc:  # skipped, never silently dropped
            errors.append((offset + i, str(exc)))
    return records, errors


def generate(n_rows: int, master_seed: int, fiber: FiberParams | None = None,
             policy: GridPolicy | None = None, workers: int = 1,
             ) -> GenerationResult:
    """Generate n_rows labeled records, parallel over row chunks.

    The output is identical for any worker count; rows come back in index
    order. Rows hitting engine errors are skipped and reported in the
    result's error ledger.
    """
    scenarios = sample_parameter_space(n_rows, master_seed, policy)
    chunk = max(1, (n_rows + 4 * max(workers, 1) - 1) // (4 * max(workers, 1)))
    batches = [(scenarios[i:i + chunk], i, fiber, policy)
               for i in range(0, n_rows, chunk)]
    records: list[ProbeRecord] = []
    errors: list[tuple[int, str]] = []
    if workers <= 1:
        results = map(_generate_chunk, batches)
        for recs, errs in results:
            records.extend(recs)
            errors.extend(errs)
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for recs, errs in pool.map(_generate_chunk, batches):
                records.extend(recs)
                errors.extend(errs)
    return GenerationResult(tuple(records), tuple(errors))


def write_csv(records, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_HEADER)
        for r in records:
            writer.writerow([
                r.seed, r.n_spans,
                FLOAT_FORMAT.format(r.span_length_km),
                FLOAT_FORMAT.format(r.cut_gbd),
                r.modulation,
                FLOAT_FORMAT.format(r.center_freq_thz),
                FLOAT_FORMAT.format(r.p_ch_dbm),
                FLOAT_FORMAT.format(r.fill_fraction),
                FLOAT_FORMAT.format(r.snr_current_db),
                FLOAT_FORMAT.format(r.snr_full_db),
                FLOAT_FORMAT.format(r.margin_db),
            ])


def read_csv(path) -> list[ProbeRecord]:
    records = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != CSV_HEADER:
            raise ValueError(f"unexpected CSV header in {path}")
        for row in reader:
            records.append(ProbeRecord(
                int(row["seed"]), int(row["n_spans"]),
                float(row["span_length_km"]), float(row["cut_gbd"]),
                row["modulation"], float(row["center_freq_thz"]),
                float(row["p_ch_dbm"]), float(row["fill_fraction"]),
                float(row["snr_current_db"]), float(row["snr_full_db"]),
                float(row["margin_db"])))
    return records


def feature_matrix(records) -> np.ndarray:
    return np.array([r.features() for r in records])


def labels(records) -> np.ndarray:
    return np.array([r.margin_db for r in records])


@dataclass(frozen=True)
class DatasetSplit:
    train: tuple
    validation: tuple
    test: tuple


def split(records, seed: int,
          proportions: tuple[float, float, float] = (0.7, 0.1, 0.2),
          ) -> DatasetSplit:
    """Seeded shuffle, then largest-remainder partition into 70/10/20."""
    if not records:
        raise ValueError("dataset is empty")
    n = len(records)
    rng = np.random.default_rng(seed)
    order = rng.permutation(n)
    quotas = [p * n for p in proportions]
    sizes = [int(q) for q in quotas]
    remainders = [q - s for q, s in zip(quotas, sizes)]
    for i in sorted(range(3), key=lambda i: -remainders[i])[:n - sum(sizes)]:
        sizes[i] += 1
    a, b = sizes[0], sizes[0] + sizes[1]
    records = list(records)
    return DatasetSplit(tuple(records[i] for i in order[:a]),
                        tuple(records[i] for i in order[a:b]),
                        tuple(records[i] for i in order[b:]))
