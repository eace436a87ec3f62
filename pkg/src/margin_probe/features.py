"""Feature standardization and degree-4 polynomial expansion.

The raw probe description has five features, in this fixed order:
probing SNR (dB), per-35 GBd-channel launch power (dBm), CUT center
frequency (THz),
span count, and occupied-bandwidth fill fraction. Standardization happens
before expansion; the expansion enumerates all 125 non-constant monomials
of total degree <= 4 in graded-lexicographic order (the intercept is
handled by target centering in the regressor, not by a constant column).
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product

import numpy as np

from .errors import DegenerateFeature

FEATURE_NAMES = ("snr_current_db", "p_ch_dbm", "center_freq_thz",
                 "n_spans", "fill_fraction")
N_FEATURES = 5
MAX_DEGREE = 4


def monomial_exponents() -> np.ndarray:
    """(125, 5) exponent table, graded-lexicographic, no constant term."""
    rows = [e for e in product(range(MAX_DEGREE + 1), repeat=N_FEATURES)
            if 1 <= sum(e) <= MAX_DEGREE]
    rows.sort(key=lambda e: (sum(e), e))
    return np.array(rows, dtype=np.int64)


MONOMIAL_TABLE = monomial_exponents()
N_MONOMIALS = len(MONOMIAL_TABLE)  # 125


@dataclass(frozen=True)
class ScalerStats:
    """Per-feature mean and population standard deviation."""

    mean: tuple[float, ...]
    std: tuple[float, ...]

    def transform(self, raw: np.ndarray) -> np.ndarray:
        raw = np.asarray(raw, dtype=float)
        return (raw - np.array(self.mean)) / np.array(self.std)


def fit_scaler(raw_features: np.ndarray) -> ScalerStats:
    """Population mean/std per column; rejects constant columns."""
    raw = np.asarray(raw_features, dtype=float)
    if raw.ndim != 2 or raw.shape[1] != N_FEATURES:
        raise ValueError(f"expected (n, {N_FEATURES}) feature matrix")
    if len(raw) < 2:
        raise ValueError("need at least two rows to fit the scaler")
    mean = raw.mean(axis=0)
    std = raw.std(axis=0)  # divisor N
    zero = std == 0.0
    if zero.any():
        names = [FEATURE_NAMES[i] for i in np.flatnonzero(zero)]
        raise DegenerateFeature(f"constant feature column(s): {names}")
    return ScalerStats(tuple(float(m) for m in mean),
                       tuple(float(s) for s in std))


def expand(scaled: np.ndarray) -> np.ndarray:
    """Monomial features of one or many scaled 5-vectors.

    Returns shape (125,) for a single vector or (n, 125) for a matrix.
    """
    x = np.asarray(scaled, dtype=float)
    single = x.ndim == 1
    x = np.atleast_2d(x)
    # powers[:, i, d] = x_i^d, d = 0..MAX_DEGREE
    powers = x[:, :, None] ** np.arange(MAX_DEGREE + 1)
    out = np.ones((len(x), N_MONOMIALS))
    for i in range(N_FEATURES):
        out *= powers[:, i, MONOMIAL_TABLE[:, i]]
    return out[0] if single else out


def design_matrix(raw_features: np.ndarray, scaler: ScalerStats) -> np.ndarray:
    """Scale then expand a (n, 5) raw feature matrix into (n, 125)."""
    return expand(scaler.transform(raw_features))
