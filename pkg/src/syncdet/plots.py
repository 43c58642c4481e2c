"""Figure emission: per-experiment BER curve CSVs plus rendered PNGs.

Input is the harness result CSV; one figure per (code, channel) group with
the insertion/deletion probability on the x axis and BER per detector as
log-scale curves, written next to a pivoted CSV of the same numbers.
"""

import csv
import os
from collections import defaultdict

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .ber import CSV_HEADER


def read_results(path: str):
    with open(path, encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != CSV_HEADER.split(","):
            raise ValueError(f"{path}: unexpected result columns {reader.fieldnames}")
        return list(reader)


def _series_label(row) -> str:
    det = row["detector"]
    if det.startswith("fb-"):
        return det
    return f"{det} ({row['csi_mode']} CSI)" if row["csi_mode"] != "perfect" else det


def emit_plots(results_path: str, out_dir: str):
    """Write <code>_<channel>.csv/.png per experiment group; returns paths."""
    rows = read_results(results_path)
    os.makedirs(out_dir, exist_ok=True)
    groups = defaultdict(list)
    for row in rows:
        groups[(row["code"], row["channel"])].append(row)
    written = []
    for (code, channel), grp in sorted(groups.items()):
        xkey = "pbi" if channel.startswith("wb") else "pd"
        series = defaultdict(dict)
        xs = sorted({float(r[xkey]) for r in grp if r[xkey]})
        for r in grp:
            if not r[xkey]:
                continue
            series[_series_label(r)][float(r[xkey])] = float(r["ber"])

        stem = os.path.join(out_dir, f"{code}_{channel}")
        labels = sorted(series)
        with open(stem + ".csv", "w", encoding="utf-8", newline="\n") as fh:
            fh.write(",".join([xkey] + labels) + "\n")
            for x in xs:
                cells = [format(x, ".17g")]
                for lab in labels:
                    v = series[lab].get(x)
                    cells.append("" if v is None else format(v, ".6e"))
                fh.write(",".join(cells) + "\n")

        fig, ax = plt.subplots(figsize=(5.2, 4.0))
        for lab in labels:
            pts = sorted(series[lab].items())
            ax.semilogy([p[0] for p in pts], [max(p[1], 1e-7) for p in pts],
                        marker="o", label=lab)
        ax.set_xlabel("burst event probability" if channel.startswith("wb")
                      else "deletion probability")
        ax.set_ylabel("BER")
        ax.set_title(f"{code} over {channel}")
        ax.grid(True, which="both", alpha=0.3)
        ax.legend(fontsize=8)
        fig.tight_layout()
        fig.savefig(stem + ".png", dpi=150)
        plt.close(fig)
        written.extend([stem + ".csv", stem + ".png"])
    return written
