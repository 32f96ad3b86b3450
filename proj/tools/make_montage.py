#!/usr/bin/env python3
"""Regenerates data/montages/standard_57.json.

Idealized spherical 10-10 layout: Fpz, T7, Oz and T8 lie on the equator,
Cz at the vertex. Each row is a great-circle arc from its midline point to
its lateral edge point on the equator; columns split the arc in quarters.
x points right, y toward the nasion, z up.
"""
import argparse
import json
import math

ROWS = {
    -4: ["Fp1", None, None, None, None, None, None, None, "Fp2"],
    -3: [None, None, "AF3", None, "AFz", None, "AF4", None, None],
    -2: ["F7", "F5", "F3", "F1", "Fz", "F2", "F4", "F6", "F8"],
    -1: ["FT7", "FC5", "FC3", "FC1", None, "FC2", "FC4", "FC6", "FT8"],
    0: ["T7", "C5", "C3", "C1", "Cz", "C2", "C4", "C6", "T8"],
    1: ["TP7", "CP5", "CP3", "CP1", "CPz", "CP2", "CP4", "CP6", "TP8"],
    2: ["P7", "P5", "P3", "P1", "Pz", "P2", "P4", "P6", "P8"],
    3: ["PO7", None, "PO3", None, "POz", None, "PO4", None, "PO8"],
    4: ["O1", None, None, None, "Oz", None, None, None, "O2"],
}

PDC28 = ["Fp1", "Fp2", "F7", "F3", "Fz", "F4", "F8", "FC5", "FC1", "FC2",
         "FC6", "T7", "C3", "Cz", "C4", "T8", "CP5", "CP1", "CP2", "CP6",
         "P7", "P3", "Pz", "P4", "P8", "O1", "Oz", "O2"]


def slerp(a, b, t):
    dot = max(-1.0, min(1.0, sum(p * q for p, q in zip(a, b))))
    om = math.acos(dot)
    if om < 1e-12:
        return a
    s = math.sin(om)
    return [(math.sin((1 - t) * om) * p + math.sin(t * om) * q) / s for p, q in zip(a, b)]


def main(out):
    channels = []
    for r, row in ROWS.items():
        theta = math.radians(22.5 * abs(r))
        mid = [0.0, math.sin(theta) * (1 if r < 0 else -1), math.cos(theta)]
        phi = math.radians(18.0 * (r + 5))
        for col, name in enumerate(row):
            if name is None:
                continue
            c = col - 4
            edge = [math.copysign(math.sin(phi), c if c else 1), math.cos(phi), 0.0]
            p = slerp(mid, edge, abs(c) / 4.0)
            n = math.sqrt(sum(v * v for v in p))
            channels.append({"name": name, "position": [round(v / n, 12) for v in p]})
    assert len(channels) == 57
    doc = {"format_version": 1, "name": "standard_57", "channels": channels,
           "subsets": {"pdc28": PDC28}}
    with open(out, "w") as f:
        json.dump(doc, f, indent=1)
        f.write("\n")


if __name__ == "__main__":
    parser = argparse.ArgumentParser(description="Write the 57-electrode spherical montage.")
    parser.add_argument("out", nargs="?", default="data/montages/standard_57.json")
    main(parser.parse_args().out)
