"""Regenerates the bundled scenario fixtures under src/cpareto/data/.

The groundwater well radius is the one calibrated constant: it was
bisected once so that the grand-coalition optimum of the three-agent
case totals 2745 Mm3, and is frozen here.
"""

import json
from pathlib import Path

import numpy as np

DATA = Path(__file__).resolve().parents[1] / "src" / "cpareto" / "data"

YEAR = 365.25 * 86400.0

#: calibrated representative constraint radius (metres); see module docstring
R_WELL = 0.2952146949642612


def groundwater(name, wells, n_t, labels):
    return {
        "format_version": 1,
        "name": name,
        "model": "linear",
        "agent_labels": labels,
        "wells": [
            {"x_m": x, "y_m": y, "agent": a, "start_offset_intervals": 0}
            for x, y, a in wells
        ],
        "n_intervals": n_t,
        "interval_seconds": YEAR,
        "storage_coefficient": 1e-5,
        "transmissivity_m2_per_s": 1e-3,
        "rate_min": 40.0,
        "rate_max": 150.0,
        "rate_unit": "Mm3/year",
        "volume_unit": "Mm3",
        "pressure_limit": 10000.0,
        "agent_weights": [1.0] * len(labels),
        "well_radius_m": R_WELL,
    }


def interference(coords, diag, off_scale, dist_scale, negative_pair, neg_value):
    coords = np.asarray(coords, dtype=float)
    d = np.hypot(
        coords[:, None, 0] - coords[None, :, 0], coords[:, None, 1] - coords[None, :, 1]
    )
    A = off_scale / (1.0 + d / dist_scale)
    np.fill_diagonal(A, diag)
    i, j = negative_pair
    A[i, j] = A[j, i] = -neg_value
    return [[round(v, 12) for v in row] for row in A]


def proxy(name, coords, owners, offsets, n_t, dt_years, A, s, kappa, h):
    return {
        "format_version": 1,
        "name": name,
        "model": "proxy",
        "agent_labels": ["a1", "a2", "a3"],
        "wells": [
            {"x_m": x, "y_m": y, "agent": a, "start_offset_intervals": off}
            for (x, y), a, off in zip(coords, owners, offsets)
        ],
        "n_intervals": n_t,
        "interval_seconds": dt_years * YEAR,
        "storage_coefficient": 1e-5,  # unused by the proxy but kept for schema uniformity
        "transmissivity_m2_per_s": 1e-3,
        "rate_min": 0.24,
        "rate_max": 7.0,
        "rate_unit": "Mton/year",
        "volume_unit": "Mton",
        "pressure_limit": h,
        "agent_weights": [1.0, 1.0, 1.0],
        "well_radius_m": R_WELL,
        "proxy": {
            "interference": A,
            "saturation_exponent": s,
            "capacity_scale": kappa,
        },
    }


def main():
    DATA.mkdir(parents=True, exist_ok=True)

    tc1 = groundwater(
        "testcase1-groundwater-3agents",
        [(2500.0, 2500.0, 0), (2500.0, 5000.0, 1), (5000.0, 2500.0, 2)],
        n_t=10,
        labels=["a1", "a2", "a3"],
    )
    tc2 = groundwater(
        "testcase2-groundwater-4agents",
        [
            (2500.0, 2500.0, 0),
            (2500.0, 5000.0, 1),
            (5000.0, 2500.0, 2),
            (5000.0, 5000.0, 3),
        ],
        n_t=5,
        labels=["a1", "a2", "a3", "a4"],
    )

    coords3 = [(0.0, 0.0), (3000.0, 0.0), (1800.0, 2700.0)]
    A3 = interference(coords3, diag=60.0, off_scale=50.0, dist_scale=9000.0,
                      negative_pair=(0, 1), neg_value=8.0)
    tiny = proxy("proxy-tiny-3wells", coords3, [0, 1, 2], [0, 0, 0],
                 n_t=1, dt_years=15.0, A=A3, s=1.3, kappa=1.0, h=230.0)
    small = proxy("proxy-small-3wells", coords3, [0, 1, 2], [0, 0, 0],
                  n_t=5, dt_years=3.0, A=A3, s=1.3, kappa=1.0, h=230.0)

    # nine wells on a ~10 km spread; agent 1 runs wells 1-4, agent 2
    # wells 5-7, agent 3 wells 8-9; wells 1 and 4 start one interval late
    coords9 = [
        (0.0, 0.0), (2500.0, 500.0), (5000.0, 0.0), (1000.0, 3000.0),
        (6500.0, 2500.0), (9000.0, 1500.0), (7500.0, 5000.0),
        (3500.0, 6500.0), (6000.0, 8000.0),
    ]
    owners9 = [0, 0, 0, 0, 1, 1, 1, 2, 2]
    offsets9 = [1, 0, 0, 1, 0, 0, 0, 0, 0]
    A9 = interference(coords9, diag=60.0, off_scale=40.0, dist_scale=9000.0,
                      negative_pair=(2, 5), neg_value=8.0)
    offsets = proxy("proxy-offsets-9wells", coords9, owners9, offsets9,
                    n_t=8, dt_years=5.0, A=A9, s=1.3, kappa=1.0, h=520.0)

    for fname, doc in [
        ("testcase1.json", tc1),
        ("testcase2.json", tc2),
        ("proxy_tiny.json", tiny),
        ("proxy_small.json", small),
        ("proxy_offsets.json", offsets),
    ]:
        (DATA / fname).write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")
        print("wrote", DATA / fname)


if __name__ == "__main__":
    main()
