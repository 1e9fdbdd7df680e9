"""Serialization: map CSV + JSON sidecar, PGM heatmaps, JSON configs.

The CSV layout is ``# meta key=<json>`` header lines followed by the column
line ``delta1_MHz,delta2_MHz,photon_rate_per_us`` and one row per grid cell
(axis1-major).  Floats are written with ``repr``, whose shortest-roundtrip
guarantee makes re-parsed values bit-exact.  Missing cells are ``nan``.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

import numpy as np

from .errors import ConfigError
from .model import DriveScheme, RateSet, Scheme
from .scan import DetuningGrid, EmissionMap

CSV_COLUMNS = "delta1_MHz,delta2_MHz,photon_rate_per_us"


def write_map_csv(path, emap: EmissionMap) -> None:
    grid = emap.grid
    d1 = grid.values1() / (2.0 * np.pi)
    d2 = grid.values2() / (2.0 * np.pi)
    lines = []
    for key in sorted(emap.meta):
        lines.append(f"# meta {key}={json.dumps(emap.meta[key], sort_keys=True)}")
    lines.append(CSV_COLUMNS)
    vals = emap.values
    for i in range(len(d1)):
        for j in range(len(d2)):
            lines.append(f"{float(d1[i])!r},{float(d2[j])!r},{float(vals[i, j])!r}")
    Path(path).write_text("\n".join(lines) + "\n")


def read_map_csv(path):
    """Parse a scan CSV; returns (grid, values, meta).

    Foreign data in the same layout is accepted as long as the meta lines
    carry the grid, scheme and drive amplitudes.
    """
    meta = {}
    rows = []
    header_seen = False
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line.lstrip("#").strip()
            if body.startswith("meta "):
                key, _, raw = body[5:].partition("=")
                try:
                    meta[key.strip()] = json.loads(raw)
                except json.JSONDecodeError as exc:
                    raise ConfigError(f"{path}:{lineno}: bad meta value: {exc}") from exc
            continue
        if not header_seen:
            if line != CSV_COLUMNS:
                raise ConfigError(
                    f"{path}:{lineno}: expected column header '{CSV_COLUMNS}'"
                )
            header_seen = True
            continue
        parts = line.split(",")
        if len(parts) != 3:
            raise ConfigError(f"{path}:{lineno}: expected 3 columns, got {len(parts)}")
        try:
            rows.append(tuple(float(p) for p in parts))
        except ValueError as exc:
            raise ConfigError(f"{path}:{lineno}: unparsable number: {exc}") from exc
    if not header_seen or not rows:
        raise ConfigError(f"{path}: no data rows found")

    grid = _grid_from_meta(meta, path)
    n1, n2 = grid.shape
    if len(rows) != n1 * n2:
        raise ConfigError(
            f"{path}: {len(rows)} rows but grid declares {n1}x{n2} = {n1 * n2}"
        )
    values = np.array([r[2] for r in rows], dtype=float).reshape(n1, n2)
    return grid, values, meta


def _grid_from_meta(meta, path) -> DetuningGrid:
    try:
        g = meta["grid"]
        ax1, ax2 = g["axis1_MHz"], g["axis2_MHz"]
        return DetuningGrid.from_mhz(
            (ax1["start"], ax1["stop"]), (ax2["start"], ax2["stop"]),
            points=(ax1["points"], ax2["points"]),
            axis_drives=tuple(g.get("axis_drives", ("first", "second"))),
        )
    except (KeyError, TypeError) as exc:
        raise ConfigError(f"{path}: missing or malformed 'grid' metadata: {exc}") from exc


def template_from_meta(meta, path) -> DriveScheme:
    try:
        return DriveScheme.from_mhz(Scheme(meta["scheme"]),
                                    float(meta["omega_first_MHz"]),
                                    float(meta["omega_second_MHz"]))
    except (KeyError, ValueError) as exc:
        raise ConfigError(
            f"{path}: missing/invalid scheme or drive metadata: {exc}"
        ) from exc


def write_map_json(path, emap: EmissionMap) -> None:
    doc = dict(emap.meta)
    doc["errors"] = [{"i": i, "j": j, "reason": reason}
                     for (i, j, reason) in emap.errors]
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def write_map_pgm(path, emap: EmissionMap, *, log_scale: bool = False,
                  log_floor_decades: float = 6.0) -> None:
    """8-bit binary PGM heatmap for quick visual inspection.

    Linear normalization maps [0, max] to [0, 255]; log normalization maps
    the top ``log_floor_decades`` decades below the maximum.  NaN cells
    render black.
    """
    v = emap.values
    vmax = np.nanmax(v) if np.isfinite(v).any() else 1.0
    if vmax <= 0.0:
        gray = np.zeros(v.shape)
    elif log_scale:
        with np.errstate(divide="ignore", invalid="ignore"):
            dec = np.log10(v / vmax) / log_floor_decades + 1.0
        gray = np.clip(dec, 0.0, 1.0)
    else:
        gray = np.clip(v / vmax, 0.0, 1.0)
    gray = np.nan_to_num(gray, nan=0.0)
    pixels = (255.0 * gray + 0.5).astype(np.uint8)
    n1, n2 = pixels.shape
    header = f"P5\n{n2} {n1}\n255\n".encode("ascii")
    Path(path).write_bytes(header + pixels.tobytes())


def config_sha256(doc: dict) -> str:
    return hashlib.sha256(
        json.dumps(doc, sort_keys=True, separators=(",", ":")).encode()
    ).hexdigest()


def _require(doc, key, where):
    if key not in doc:
        raise ConfigError(f"{where}: missing required field '{key}'")
    return doc[key]


def _load_json(path):
    try:
        return json.loads(Path(path).read_text()), str(path)
    except FileNotFoundError as exc:
        raise ConfigError(f"{path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}: invalid JSON: {exc.msg}") from exc


def _rates_from(doc, key, where) -> RateSet:
    raw = _require(doc, key, where)
    if not isinstance(raw, dict):
        raise ConfigError(f"{where}: '{key}' must be a mapping of MHz values")
    missing = [k for k in RateSet.field_names() if k not in raw]
    if missing:
        raise ConfigError(f"{where}: '{key}' is missing {missing}")
    try:
        return RateSet.from_mhz(**{k: float(raw[k]) for k in RateSet.field_names()})
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{where}: '{key}': {exc}") from exc


def load_scan_config(path):
    """Validate and resolve a scan configuration file.

    Returns a dict with 'template', 'grid', 'rates', 'basename' and the raw
    document (for hashing / metadata echo).
    """
    doc, where = _load_json(path)
    scheme_raw = _require(doc, "scheme", where)
    try:
        scheme = Scheme(scheme_raw)
    except ValueError as exc:
        raise ConfigError(f"{where}: field 'scheme': must be one of A, B, C") from exc

    drive = _require(doc, "drive", where)
    try:
        template = DriveScheme.from_mhz(
            scheme,
            float(_require(drive, "omega_first_MHz", f"{where}: drive")),
            float(_require(drive, "omega_second_MHz", f"{where}: drive")),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{where}: field 'drive': {exc}") from exc

    rates = _rates_from(doc, "rates_MHz", where)

    grid_doc = doc.get("grid", {})
    try:
        ax1 = grid_doc.get("axis1_MHz", {"start": -100.0, "stop": 100.0, "points": 201})
        ax2 = grid_doc.get("axis2_MHz", {"start": -100.0, "stop": 100.0, "points": 201})
        grid = DetuningGrid.from_mhz(
            (float(ax1["start"]), float(ax1["stop"])),
            (float(ax2["start"]), float(ax2["stop"])),
            points=(int(ax1.get("points", 201)), int(ax2.get("points", 201))),
            axis_drives=tuple(grid_doc.get("axis_drives", ("first", "second"))),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"{where}: field 'grid': {exc}") from exc

    basename = doc.get("output_basename", "map")
    if not isinstance(basename, str) or not basename:
        raise ConfigError(f"{where}: field 'output_basename' must be a nonempty string")
    return {"template": template, "grid": grid, "rates": rates,
            "basename": basename, "raw": doc}


def load_fit_config(path):
    """Validate a fit configuration file.

    Returns a dict with 'init_rates', 'optimizer' settings, per-file
    overrides and the raw document.
    """
    doc, where = _load_json(path)
    init_rates = _rates_from(doc, "init_rates_MHz", where)
    opt = doc.get("optimizer", {})
    if not isinstance(opt, dict):
        raise ConfigError(f"{where}: field 'optimizer' must be a mapping")
    optimizer = {
        "max_evaluations": int(opt.get("max_evaluations", 20_000)),
        "restarts": int(opt.get("restarts", 2)),
        "seed": int(opt.get("seed", 0)),
    }
    overrides = {}
    for entry in doc.get("datasets", []):
        if not isinstance(entry, dict) or "file" not in entry:
            raise ConfigError(f"{where}: each 'datasets' entry needs a 'file' key")
        overrides[Path(entry["file"]).name] = entry
    return {"init_rates": init_rates, "optimizer": optimizer,
            "overrides": overrides, "raw": doc}
