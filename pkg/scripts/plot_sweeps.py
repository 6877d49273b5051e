"""Plot the sweep CSVs written by the other scripts (needs matplotlib)."""

import argparse
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from bcnoma.experiments import read_csv

ROOT = Path(__file__).resolve().parents[1]
PANELS = [
    ("ee_vs_power.csv", "total_power_dbm", "total power budget (dBm)"),
    ("ee_vs_sigma.csv", "sigma_eps", "CSI error std"),
    ("ee_vs_radius.csv", "rsu_radius_m", "RSU radius (m)"),
]
LABELS = {"bc_noma": "BC-NOMA", "conventional_noma": "NOMA without BC"}

if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--results", default=str(ROOT / "results"))
    ap.add_argument("--metric", default="ee_mean", help="column suffix, e.g. ee_mean_feasible")
    args = ap.parse_args()
    res = Path(args.results)

    for fname, var, xlabel in PANELS:
        path = res / fname
        if not path.exists():
            print(f"skip {fname}: not found")
            continue
        rows = read_csv(path)
        fig, ax = plt.subplots(figsize=(4.5, 3.2))
        for b, label in LABELS.items():
            col = f"{b}_{args.metric}"
            if col in rows[0]:
                ax.plot([r[var] for r in rows], [r[col] for r in rows], marker="o", label=label)
        ax.set_xlabel(xlabel)
        ax.set_ylabel("energy efficiency (bit/J)")
        ax.grid(alpha=0.3)
        ax.legend()
        fig.tight_layout()
        png = path.with_suffix(".png")
        fig.savefig(png, dpi=150)
        print(f"wrote {png}")

    path = res / "interference_vs_power.csv"
    if path.exists():
        rows = read_csv(path)
        fig, ax = plt.subplots(figsize=(4.5, 3.2))
        for col in [c for c in rows[0] if c.startswith("intf_w_sigma_")]:
            ax.plot([r["total_power_w"] for r in rows], [r[col] for r in rows], marker="o",
                    label=col.removeprefix("intf_w_sigma_"))
        ax.set_xlabel("total power budget (W)")
        ax.set_ylabel("estimation interference (W)")
        ax.legend(title="CSI error std")
        fig.tight_layout()
        fig.savefig(path.with_suffix(".png"), dpi=150)
        print(f"wrote {path.with_suffix('.png')}")
