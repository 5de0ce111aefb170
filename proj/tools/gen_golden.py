#!/usr/bin/env python3
# Copyright (C) 2026 The spatialgan Authors
# SPDX-License-Identifier: Apache-2.0
"""Writes tests/golden/heatmap_bumps.json, the bump vectors shared by the
C++ renderer tests and the editor preview. Plain math, no numpy."""

import json
import math
import sys

CASES = [
    (4, 0.0, 0.0, 0.5),
    (8, 0.0159, -0.3, 0.5),
    (8, -1.0, 1.0, 0.5 / math.sqrt(2.0)),
    (16, 0.42, -0.77, 0.25),
    (16, 1.1, -1.2, 0.5),
    (4, -0.5, 0.9, 0.5 / math.sqrt(0.5)),
]


def bump(res, cy, cx, var):
    grid = [2.0 * i / (res - 1) - 1.0 for i in range(res)]
    return [[math.exp(-((gy - cy) ** 2 + (gx - cx) ** 2) / var) for gx in grid] for gy in grid]


def main(path):
    out = {
        "description": "gaussian_bump reference values: exp(-|g-c|^2/var) on the grid 2i/(res-1)-1",
        "cases": [
            {"res": r, "center": {"y": cy, "x": cx}, "variance": v, "values": bump(r, cy, cx, v)}
            for r, cy, cx, v in CASES
        ],
    }
    with open(path, "w") as f:
        json.dump(out, f, indent=1)
        f.write("\n")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "tests/golden/heatmap_bumps.json")
