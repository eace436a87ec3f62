"""Channel-plan construction and random partial-load sampling.

A full-band plan is built once per realization; partial loads are subsets
of that plan (same channels, different on/off mask), so the probing SNR
and the fully loaded SNR always share one channel layout.
"""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, CutOutOfBand
from .gn_engine import ChannelSpec, SpectrumRealization

C_BAND_START_THZ = 191.3
C_BAND_END_THZ = 196.1

MIN_SYMBOL_RATE_GBD = 35.0
MAX_SYMBOL_RATE_GBD = 69.0

MODULATION_FORMATS = ("QPSK", "16QAM", "32QAM", "64QAM")


@dataclass(frozen=True)
class GridPolicy:
    """Spectrum layout and power policy for plan construction.

    psd_anchor_dbm is the launch power of a 35 GBd channel; every channel's
    power follows from it under the constant-PSD rule. slot_ghz switches to
    the fixed-slot experimental grid (e.g. 50 GHz slots) when set.
    """

    band_start_thz: float = C_BAND_START_THZ
    band_end_thz: float = C_BAND_END_THZ
    granularity_ghz: float = 6.25
    constant_psd: bool = True
    psd_anchor_dbm: float = 0.0
    slot_ghz: float | None = None

    def __post_init__(self):
        if self.band_end_thz <= self.band_start_thz:
            raise ConfigError("empty band")
        if self.granularity_ghz <= 0:
            raise ConfigError("granularity must be > 0")

    def channel_power_dbm(self, symbol_rate_gbd: float) -> float:
        """Launch power keeping PSD equal to the 35 GBd anchor channel."""
        if not self.constant_psd:
            return self.psd_anchor_dbm
        return float(self.psd_anchor_dbm + 10.0 * np.log10(symbol_rate_gbd / 35.0))


def _snap_rate(rate_gbd: float, granularity_ghz: float) -> float:
    """Snap a symbol rate to the placement granularity, inside the range."""
    snapped = granularity_ghz * round(rate_gbd / granularity_ghz)
    return float(min(max(snapped, MIN_SYMBOL_RATE_GBD), MAX_SYMBOL_RATE_GBD))


def build_full_plan(policy: GridPolicy, cut: ChannelSpec,
                    rng_seed: int) -> SpectrumRealization:
    """Pack the band around the CUT; all channels active.

    Interferer symbol rates are drawn uniformly from the training range and
    snapped to the placement granularity; channels are packed edge to edge
    from the band start up to the CUT and onward to the band end. In
    fixed-slot mode every interferer fills one slot exactly.
    """
    lo, hi = cut.support_thz
    if lo < policy.band_start_thz - 1e-12 or hi > policy.band_end_thz + 1e-12:
        raise CutOutOfBand(
            f"CUT support [{lo:.4f}, {hi:.4f}] THz outside "
            f"[{policy.band_start_thz}, {policy.band_end_thz}] THz")

    rng = np.random.default_rng(rng_seed)
    cut = ChannelSpec(cut.center_freq_thz, cut.symbol_rate_gbd,
                      policy.channel_power_dbm(cut.symbol_rate_gbd)
                      if policy.constant_psd else cut.launch_power_dbm,
                      is_cut=True, modulation_format=cut.modulation_format)

    def draw_interferer(edge_thz: float, room_thz: float) -> ChannelSpec | None:
        """Next interferer with its left edge at edge_thz, or None if no fit."""
        if policy.slot_ghz is not None:
            width = policy.slot_ghz * 1e-3
            if width > room_thz + 1e-12:
                return None
            rate = policy.slot_ghz
        else:
            rate = _snap_rate(rng.uniform(MIN_SYMBOL_RATE_GBD,
                                          MAX_SYMBOL_RATE_GBD),
                              policy.granularity_ghz)
            width = rate * 1e-3
            if width > room_thz + 1e-12:
                # try the narrowest channel before giving up
                rate = MIN_SYMBOL_RATE_GBD
                width = rate * 1e-3
                if width > room_thz + 1e-12:
                    return None
        fmt = MODULATION_FORMATS[rng.integers(len(MODULATION_FORMATS))]
        return ChannelSpec(edge_thz + 0.5 * width, rate,
                           policy.channel_power_dbm(rate),
                           modulation_format=fmt)

    channels: list[ChannelSpec] = []
    edge = policy.band_start_thz
    while True:
        room = lo - edge
        ch = draw_interferer(edge, room)
        if ch is None:
            break
        channels.append(ch)
        edge = ch.support_thz[1]
    cut_index = len(channels)
    channels.append(cut)
    edge = hi
    while True:
        room = policy.band_end_thz - edge
        ch = draw_interferer(edge, room)
        if ch is None:
            break
        channels.append(ch)
        edge = ch.support_thz[1]

    plan = SpectrumRealization(policy.band_start_thz, policy.band_end_thz,
                               tuple(channels), (True,) * len(channels),
                               cut_index)
    plan.validate()
    return plan


def sample_partial(full: SpectrumRealization, fill_target: float,
                   rng_seed: int) -> SpectrumRealization:
    """Random subset of interferers approximating the target fill fraction.

    The CUT stays active; interferers are taken in a seeded random order
    until the occupied-bandwidth fraction reaches the target, so the
    realized fill overshoots by at most one channel bandwidth.
    """
    if not (0.0 < fill_target <= 1.0):
        raise ConfigError("fill_target must be in (0, 1]")
    rng = np.random.default_rng(rng_seed)
    n = len(full.channels)
    band = full.band_width_thz
    mask = [False] * n
    mask[full.cut_index] = True
    fill = full.cut.bandwidth_thz / band
    order = rng.permutation([i for i in range(n) if i != full.cut_index])
    for i in order:
        if fill >= fill_target:
            break
        mask[i] = True
        fill += full.channels[i].bandwidth_thz / band
    return full.with_mask(mask)


def to_text(realization: SpectrumRealization) -> str:
    """One channel per line: center THz, GBd, dBm, active flag, is_cut."""
    buf = io.StringIO()
    buf.write(f"# band {realization.band_start_thz!r} "
              f"{realization.band_end_thz!r}\n")
    for ch, on in zip(realization.channels, realization.active_mask):
        buf.write(f"{ch.center_freq_thz!r} {ch.symbol_rate_gbd!r} "
                  f"{ch.launch_power_dbm!r} {int(on)} {int(ch.is_cut)} "
                  f"{ch.modulation_format}\n")
    return buf.getvalue()


def from_text(text: str) -> SpectrumRealization:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or not lines[0].startswith("# band"):
        raise ConfigError("missing band header line")
    _, _, start, end = lines[0].split()
    channels = []
    mask = []
    cut_index = None
    for ln in lines[1:]:
        freq, rate, power, on, is_cut, fmt = ln.split()
        ch = ChannelSpec(float(freq), float(rate), float(power),
                         is_cut=bool(int(is_cut)), modulation_format=fmt)
        if ch.is_cut:
            cut_index = len(channels)
        channels.append(ch)
        mask.append(bool(int(on)))
    if cut_index is None:
        raise ConfigError("no channel marked as CUT")
    return SpectrumRealization(float(start), float(end), tuple(channels),
                               tuple(mask), cut_index)
