"""Writes the bundled sample corpus and its manifest.

ColorBrewer ramps come from matplotlib's copy of the ColorBrewer 2.0 tables
(Cynthia Brewer, Apache-2.0). The perceptual maps are sampled from
matplotlib's listed colormaps. The synthetic ramps are lightness spirals in
CIELAB, converted with scikit-image and clipped to sRGB.
"""
import json
import sys
from collections import Counter
from pathlib import Path

import matplotlib
import matplotlib._cm as cm
import numpy as np
from skimage.color import lab2rgb

SEQUENTIAL = ["Blues", "BuGn", "BuPu", "GnBu", "Greens", "Greys", "OrRd", "Oranges", "PuBuGn",
              "PuBu", "PuRd", "Purples", "RdPu", "Reds", "YlGnBu", "YlGn", "YlOrBr", "YlOrRd"]
DIVERGING = ["BrBG", "PRGn", "PiYG", "PuOr", "RdBu", "RdGy", "RdYlBu", "RdYlGn", "Spectral"]
PERCEPTUAL = [("viridis", 7), ("magma", 9), ("inferno", 11), ("plasma", 8), ("cividis", 6)]


def hexes(rgb):
    return ";".join("#%02X%02X%02X" % tuple(int(round(255 * c)) for c in col) for col in rgb)


def spiral(n, l0, l1, radius, turns, phase):
    t = np.linspace(0.0, 1.0, n)
    ang = phase + 2 * np.pi * turns * t
    lab = np.stack([l0 + (l1 - l0) * t, radius * np.sin(np.pi * t) * np.cos(ang),
                    radius * np.sin(np.pi * t) * np.sin(ang)], axis=1)
    return np.clip(lab2rgb(lab[None])[0], 0, 1)


def main(out_dir):
    rows = []
    for name in SEQUENTIAL:
        rows.append((f"cb-{name.lower()}-9", "colorbrewer", "sequential", hexes(getattr(cm, f"_{name}_data"))))
    for name in DIVERGING:
        rows.append((f"cb-{name.lower()}-11", "colorbrewer", "diverging", hexes(getattr(cm, f"_{name}_data"))))
    for name, n in PERCEPTUAL:
        cmap = matplotlib.colormaps[name]
        rows.append((f"mpl-{name}-{n}", "other", "sequential", hexes(cmap(np.linspace(0, 1, n))[:, :3])))
    params = [(5, 95, 25, 30, 0.3, 0.0), (7, 90, 20, 45, 0.5, 1.0), (9, 85, 30, 35, 0.8, 2.0),
              (13, 92, 15, 40, 0.25, 3.0), (6, 20, 90, 30, 0.6, 4.0), (10, 25, 95, 50, 0.4, 5.0),
              (12, 88, 12, 25, 1.0, 0.5)]
    for i, p in enumerate(params):
        rows.append((f"syn-spiral-{i}", "other", "sequential", hexes(spiral(*p))))
    header = ["# rampforge sample corpus",
              "# id,source,kind,colors",
              "# ColorBrewer 2.0 colors by Cynthia Brewer (Apache-2.0); matplotlib colormaps (BSD)."]
    text = "\n".join(header + [",".join(r) for r in rows]) + "\n"
    (out_dir / "sample_corpus.txt").write_text(text)
    lengths = [len(r[3].split(";")) for r in rows]
    manifest = {
        "total": len(rows),
        "by_kind": dict(sorted(Counter(r[2] for r in rows).items())),
        "by_source": dict(sorted(Counter(r[1] for r in rows).items())),
        "min_length": min(lengths),
        "max_length": max(lengths),
        "length_histogram": {str(k): v for k, v in sorted(Counter(lengths).items())},
    }
    (out_dir / "sample_corpus.manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")


if __name__ == "__main__":
    main(Path(sys.argv[1]))
