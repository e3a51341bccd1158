# SPDX-License-Identifier: Apache-2.0
import json

import numpy as np
import pytest

import mfris


def test_default_config_round_trip():
    cfg = json.loads(mfris.default_config())
    assert cfg["n_tx"] == 8
    assert json.loads(mfris.normalize_config(json.dumps(cfg))) == cfg


def test_bad_config_raises():
    with pytest.raises(mfris.ConfigError):
        mfris.normalize_config('{"n_txx": 4}')


def test_run_small_scenario():
    rec = mfris.run("ES", mfris.config(m_y=4), seed=3)
    assert rec["feasible"]
    assert rec["objective"] > 0
    assert len(rec["user_rates"]) == 4
    again = mfris.run("ES", mfris.config(m_y=4), seed=3)
    assert again["solution_json"] == rec["solution_json"]


def test_sweep_cells():
    cells = mfris.sweep("R_th", [0.25], [1, 2], ["ACTIVE"], mfris.config(m_y=2))
    assert [c["seed"] for c in cells] == [1, 2]
    assert all(c["scheme"] == "ACTIVE" for c in cells)


def test_beampattern_shape():
    rec = mfris.run("ES", mfris.config(m_y=4), seed=3)
    bp = mfris.beampattern(rec["solution_json"], 5.0, 5.0)
    assert bp["r"].shape == (len(bp["vertical_deg"]), len(bp["horizontal_deg"]))
    assert np.all(bp["t"] >= 0)


def test_rayleigh_argmax():
    a = np.diag([2.0, 1.0]).astype(complex)
    b = np.eye(2, dtype=complex)
    v, value, degenerate = mfris.rayleigh_argmax(a, b, 1.0)
    assert value == pytest.approx(2.0)
    assert abs(abs(v[0]) - 1.0) < 1e-12
    assert not degenerate
