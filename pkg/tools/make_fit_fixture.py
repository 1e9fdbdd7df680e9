#!/usr/bin/env python3
"""Regenerate the synthetic fit fixture shipped in tests/fixtures/.

Three maps (one per pumping scheme) are computed at the reference rates
with the scan writer, scaled by per-transition gains and given 1%
multiplicative noise with a fixed seed.  The fixture's ground truth is
recorded in fixture_truth.json.
"""

import json
from pathlib import Path

import numpy as np

from triwave import DetuningGrid, DriveScheme, REFERENCE_RATES, run_scan
from triwave.io import write_map_csv

HERE = Path(__file__).resolve().parent
OUT = HERE.parent / "tests" / "fixtures"

OMEGAS = {"A": (50.0, 16.0), "B": (40.0, 10.0), "C": (20.0, 20.0)}
GAINS = {"A": 2e5, "B": 1.3e6, "C": 1e5}
NOISE = 0.01
POINTS = 31
SPAN = 80.0


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    grid = DetuningGrid.from_mhz((-SPAN, SPAN), (-SPAN, SPAN), points=POINTS)
    for k, scheme in enumerate("ABC"):
        template = DriveScheme.from_mhz(scheme, *OMEGAS[scheme])
        emap = run_scan(template, grid, REFERENCE_RATES)
        rng = np.random.default_rng(1000 + k)
        emap.values = GAINS[scheme] * emap.values * (
            1.0 + NOISE * rng.standard_normal(emap.values.shape))
        emap.meta["units"] = "arbitrary (gain * photon rate, 1% noise)"
        path = OUT / f"map_{scheme.lower()}.csv"
        write_map_csv(path, emap)
        print(f"wrote {path}")
    truth = {
        "rates_MHz": REFERENCE_RATES.to_mhz(),
        "gains": {"21": GAINS["A"], "32": GAINS["B"], "31": GAINS["C"]},
        "noise": NOISE,
        "seeds": {s: 1000 + k for k, s in enumerate("ABC")},
    }
    (OUT / "fixture_truth.json").write_text(json.dumps(truth, indent=2,
                                                       sort_keys=True) + "\n")
    print(f"wrote {OUT / 'fixture_truth.json'}")


if __name__ == "__main__":
    main()
