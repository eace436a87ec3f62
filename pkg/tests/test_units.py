import numpy as np
import pytest

from margin_probe.units import (LN10, db_to_lin, dbm_to_w,
                                field_attenuation_per_km, lin_to_db, w_to_dbm)


def test_db_round_trip():
    x = np.array([-30.0, -3.0, 0.0, 3.0, 20.0])
    assert np.allclose(lin_to_db(db_to_lin(x)), x, atol=1e-12)


def test_db_reference_points():
    assert db_to_lin(0.0) == 1.0
    assert db_to_lin(10.0) == 10.0
    assert lin_to_db(100.0) == pytest.approx(20.0, abs=1e-12)


def test_dbm_round_trip():
    p = np.array([-10.0, 0.0, 3.0])
    assert np.allclose(w_to_dbm(dbm_to_w(p)), p, atol=1e-12)
    assert dbm_to_w(0.0) == pytest.approx(1e-3, rel=1e-15)


def test_field_attenuation():
    # 0.2 dB/km power loss means exp(-2 alpha L) loses 0.2 dB per km
    alpha = field_attenuation_per_km(0.2)
    assert alpha == pytest.approx(0.2 * LN10 / 20.0, rel=1e-15)
    loss_db = -10.0 * np.log10(np.exp(-2.0 * alpha * 1.0))
    assert loss_db == pytest.approx(0.2, rel=1e-12)
