"""Plain-text key=value configuration for fiber, grid, and surrogate knobs.

One `key = value` pair per line; `#` starts a comment. Keys use the same
names as the dataclass fields they override.
"""

from __future__ import annotations

from .errors import ConfigError
from .gn_engine import FiberParams
from .spectrum import GridPolicy

FIBER_KEYS = ("attenuation_db_per_km", "beta2_ps2_per_km",
              "gamma_per_w_km", "nf_db")
POLICY_KEYS = ("band_start_thz", "band_end_thz", "granularity_ghz",
               "psd_anchor_dbm", "slot_ghz")
KNOWN_KEYS = FIBER_KEYS + POLICY_KEYS


def parse_config(path) -> dict[str, float]:
    """Read a key=value file into a flat dict of floats."""
    values: dict[str, float] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected key = value")
            key, _, text = line.partition("=")
            key = key.strip()
            if key not in KNOWN_KEYS:
                raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
            try:
                values[key] = float(text.strip())
            except ValueError as exc:
                raise ConfigError(
                    f"{path}:{lineno}: bad value for {key!r}") from exc
    return values


def fiber_from_config(values: dict[str, float]) -> FiberParams:
    base = FiberParams()
    return FiberParams(
        values.get("attenuation_db_per_km", base.attenuation_db_per_km),
        values.get("beta2_ps2_per_km", base.beta2_ps2_per_km),
        values.get("gamma_per_w_km", base.gamma_per_w_km),
        values.get("nf_db", base.nf_db))


def policy_from_config(values: dict[str, float]) -> GridPolicy:
    base = GridPolicy()
    return GridPolicy(
        values.get("band_start_thz", base.band_start_thz),
        values.get("band_end_thz", base.band_end_thz),
        values.get("granularity_ghz", base.granularity_ghz),
        base.constant_psd,
        values.get("psd_anchor_dbm", base.psd_anchor_dbm),
        values.get("slot_ghz", base.slot_ghz))
