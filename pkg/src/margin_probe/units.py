"""Unit conversions used throughout the engine.

All dB <-> linear conversions are power ratios (10 log10).
"""

import numpy as np

LN10 = np.log(10.0)


def db_to_lin(x_db):
    return 10.0 ** (np.asarray(x_db, dtype=float) / 10.0)


def lin_to_db(x):
    return 10.0 * np.log10(x)


def dbm_to_w(p_dbm):
    return 1e-3 * 10.0 ** (np.asarray(p_dbm, dtype=float) / 10.0)


def w_to_dbm(p_w):
    return 10.0 * np.log10(np.asarray(p_w, dtype=float) / 1e-3)


def field_attenuation_per_km(attenuation_db_per_km: float) -> float:
    """Field attenuation alpha in 1/km; power decays as exp(-2 alpha z)."""
    return attenuation_db_per_km * LN10 / 20.0
