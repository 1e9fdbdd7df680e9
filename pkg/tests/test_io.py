import json

import numpy as np
import pytest

import triwave as tw
from triwave.errors import ConfigError
from triwave.io import (config_sha256, load_fit_config, load_scan_config,
                        read_map_csv, template_from_meta, write_map_csv,
                        write_map_json, write_map_pgm)


@pytest.fixture
def sample_map(reference_rates):
    grid = tw.DetuningGrid.from_mhz((-30, 30), (-30, 30), points=7)
    return tw.run_scan(tw.DriveScheme.from_mhz("C", 20.0, 20.0), grid,
                       reference_rates)


def test_csv_roundtrip_bit_exact(tmp_path, sample_map):
    path = tmp_path / "map.csv"
    write_map_csv(path, sample_map)
    grid, values, meta = read_map_csv(path)
    assert grid.shape == sample_map.grid.shape
    # repr-based formatting guarantees exact float round-trips
    assert np.array_equal(values, sample_map.values)
    assert np.array_equal(grid.values1(), sample_map.grid.values1())
    assert meta["scheme"] == "C"
    assert meta["rates_MHz"]["Gamma31"] == 41.0
    t = template_from_meta(meta, path)
    assert t.omega_first == pytest.approx(tw.TWO_PI * 20.0)


def test_csv_row_count_and_header(tmp_path, sample_map):
    path = tmp_path / "map.csv"
    write_map_csv(path, sample_map)
    lines = path.read_text().splitlines()
    data_rows = [l for l in lines if l and not l.startswith("#")]
    assert data_rows[0] == "delta1_MHz,delta2_MHz,photon_rate_per_us"
    assert len(data_rows) - 1 == 49


def test_csv_nan_cells_roundtrip(tmp_path, sample_map):
    sample_map.values[2, 3] = np.nan
    path = tmp_path / "holes.csv"
    write_map_csv(path, sample_map)
    _, values, _ = read_map_csv(path)
    assert np.isnan(values[2, 3])
    assert np.isfinite(values).sum() == 48


def test_csv_schema_errors(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("delta1,delta2,nu\n0,0,1\n")
    with pytest.raises(ConfigError, match="column header"):
        read_map_csv(bad)
    bad.write_text("# meta grid=oops\n")
    with pytest.raises(ConfigError):
        read_map_csv(bad)


def test_json_sidecar(tmp_path, sample_map):
    path = tmp_path / "map.json"
    write_map_json(path, sample_map)
    doc = json.loads(path.read_text())
    assert doc["format"] == "triwave-map"
    assert doc["grid"]["axis1_MHz"]["points"] == 7
    assert doc["errors"] == []
    assert doc["rates_MHz"]["gamma32"] == 42.0


def test_pgm_writer(tmp_path, sample_map):
    path = tmp_path / "map.pgm"
    write_map_pgm(path, sample_map)
    raw = path.read_bytes()
    assert raw.startswith(b"P5\n7 7\n255\n")
    assert len(raw) == len(b"P5\n7 7\n255\n") + 49
    write_map_pgm(path, sample_map, log_scale=True)
    assert path.read_bytes().startswith(b"P5\n7 7\n255\n")


def test_scan_config_loading(tmp_path):
    cfg = {
        "scheme": "A",
        "drive": {"omega_first_MHz": 50.0, "omega_second_MHz": 5.0},
        "rates_MHz": tw.REFERENCE_RATES.to_mhz(),
        "grid": {"axis1_MHz": {"start": -20, "stop": 20, "points": 11},
                 "axis2_MHz": {"start": -10, "stop": 10, "points": 5}},
        "output_basename": "testmap",
    }
    path = tmp_path / "scan.json"
    path.write_text(json.dumps(cfg))
    loaded = load_scan_config(path)
    assert loaded["template"].scheme is tw.Scheme.A
    assert loaded["grid"].shape == (11, 5)
    assert loaded["basename"] == "testmap"

    del cfg["drive"]
    path.write_text(json.dumps(cfg))
    with pytest.raises(ConfigError, match="drive"):
        load_scan_config(path)

    cfg["drive"] = {"omega_first_MHz": 1.0, "omega_second_MHz": 1.0}
    cfg["scheme"] = "D"
    path.write_text(json.dumps(cfg))
    with pytest.raises(ConfigError, match="scheme"):
        load_scan_config(path)

    path.write_text("{ not json")
    with pytest.raises(ConfigError, match="invalid JSON"):
        load_scan_config(path)


def test_fit_config_loading(tmp_path):
    cfg = {
        "init_rates_MHz": tw.REFERENCE_RATES.to_mhz(),
        "optimizer": {"max_evaluations": 500, "restarts": 1, "seed": 2},
        "datasets": [{"file": "a.csv", "omega_first_MHz": 50.0}],
    }
    path = tmp_path / "fit.json"
    path.write_text(json.dumps(cfg))
    loaded = load_fit_config(path)
    assert loaded["optimizer"]["max_evaluations"] == 500
    assert "a.csv" in loaded["overrides"]

    bad = dict(cfg)
    bad["init_rates_MHz"] = {"Gamma21": 8.0}
    path.write_text(json.dumps(bad))
    with pytest.raises(ConfigError, match="missing"):
        load_fit_config(path)


def test_config_hash_stable():
    doc = {"b": 2, "a": [1, 2]}
    assert config_sha256(doc) == config_sha256({"a": [1, 2], "b": 2})
    assert config_sha256(doc) != config_sha256({"a": [1, 2], "b": 3})
