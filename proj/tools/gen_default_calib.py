#!/usr/bin/env python3
"""Regenerates calib/default.json (steering envelopes sampled on a 40-step grid)."""
import json
import sys

STEP = 40
SMIN, SMAX = 0, 6000

# L-R: constant 1200-step horizontal gap over the full range, 0.025 deg/step.
def lr_asc(s):
    return 0.025 * (s - 3600)

def lr_desc(s):
    return 0.025 * (s - 2400)

# U-D: branches coincide outside [1800, 4200]. Inside, the horizontal gap at
# tip level th is 640 * (1 - |th| / 24) and the ascending branch has a knot at
# th = 0, giving two slopes. The descending branch is the point reflection of
# the ascending one about (3000, 0).
UD_EDGE_DEG = 24.0
ZONE_LO, ZONE_HI = 1800, 4200
SAT_DEG = 24.0  # extra tip travel in each saturating segment


def ud_outside(s):
    if s <= ZONE_LO:
        x = (ZONE_LO - s) / ZONE_LO
        return -UD_EDGE_DEG - 1.5 * SAT_DEG * (x - x ** 3 / 3.0)
    x = (s - ZONE_HI) / (SMAX - ZONE_HI)
    return UD_EDGE_DEG + 1.5 * SAT_DEG * (x - x ** 3 / 3.0)


def ud_asc(s):
    if s <= ZONE_LO or s >= ZONE_HI:
        return ud_outside(s)
    knot = 3320.0
    if s <= knot:
        return (s - knot) * UD_EDGE_DEG / (knot - ZONE_LO)
    return (s - knot) * UD_EDGE_DEG / (ZONE_HI - knot)


def ud_desc(s):
    return -ud_asc(SMAX - s)


def axis(asc, desc, zone):
    grid = list(range(SMIN, SMAX + 1, STEP))
    return {
        "grid": grid,
        "ascending_deg": [round(asc(s), 9) for s in grid],
        "descending_deg": [round(desc(s), 9) for s in grid],
        "zone": zone,
    }


doc = {
    "steps_per_wheel_degree": 80,
    "axes": {
        "steer_lr": axis(lr_asc, lr_desc, [SMIN, SMAX]),
        "steer_ud": axis(ud_asc, ud_desc, [ZONE_LO, ZONE_HI]),
        "rotation": {"steps_per_degree": 10, "min_steps": -1800, "max_steps": 1800, "neutral_steps": 0},
        "translation": {"steps_per_mm": 100, "min_steps": 0, "max_steps": 6000, "neutral_steps": 0},
    },
    "steering": {"min_steps": SMIN, "max_steps": SMAX, "neutral_steps": 3000},
    "rate_steps_per_s": 400,
}

out = sys.argv[1] if len(sys.argv) > 1 else "calib/default.json"
with open(out, "w") as f:
    json.dump(doc, f, indent=1)
    f.write("\n")
