"""Offline figure generation from simulator CSV output.

Reads `summary.csv` (and per-run `sinr_trace.csv` files) produced by a
`relay-sim` run or campaign directory and renders the five figure kinds:

    sinr_ecdf   ECDF of effective SINR per relay configuration
    sinr_vs_n   average SINR vs number of radiating elements (log-x)
    throughput  grouped bars, scenario 1 wide / scenario 2 narrow
    latency     grouped bars on a log y-axis
    per         grouped bars of application packet error rate

Output is deterministic vector graphics: re-rendering the same inputs gives
byte-identical files.
"""
from __future__ import annotations

import argparse
import csv
import sys
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

matplotlib.rcParams["svg.hashsalt"] = "relay-figures"

FIG_KINDS = ("sinr_ecdf", "sinr_vs_n", "throughput", "latency", "per")

METRIC_COLUMN = {
    "throughput": "throughput_bps",
    "latency": "latency_p95_ms",
    "per": "per",
    "sinr_vs_n": "sinr_mean_db",
}

COLORS = {"none": "#E36B02", "irs": "#78BF26", "af": "#572096"}


class FigureError(RuntimeError):
    pass


@dataclass(frozen=True)
class FigureSpec:
    kind: str
    out_path: Path
    scenario: str | None = None  # filter for the SINR figures

    def __post_init__(self):
        if self.kind not in FIG_KINDS:
            raise FigureError(f"unknown figure kind {self.kind!r}")


def load_summary(in_dir: Path) -> list[dict]:
    path = in_dir / "summary.csv"
    if not path.exists():
        raise FigureError(f"summary.csv not found in {in_dir}")
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    if not rows:
        raise FigureError(f"{path} holds no data rows")
    return rows


def require_columns(rows: list[dict], cols: list[str]):
    missing = [c for c in cols if c not in rows[0]]
    if missing:
        raise FigureError(f"missing column(s) {', '.join(missing)} in summary.csv")


def config_label(row: dict) -> str:
    """Relay configuration label of a summary row, parsed from its run id."""
    rid = row["run_id"]
    try:
        body = rid.rsplit("_", 1)[0]           # strip _seedN
        return body.split("_", 1)[1]           # strip scenario prefix
    except IndexError:
        return f"{row['relay_kind']}{row['relay_elems']}"


def config_sort_key(label: str, rows: list[dict]) -> tuple:
    kind_order = {"none": 0, "irs": 1, "af": 2}
    for row in rows:
        if config_label(row) == label:
            return (kind_order.get(row["relay_kind"], 3), int(row["relay_elems"]))
    return (9, 0)


def display_name(label: str) -> str:
    if label == "none":
        return "gNB only"
    for kind in ("irs", "af"):
        if label.startswith(kind):
            return f"{kind.upper()} {label[len(kind):]}"
    return label


def ordered_configs(rows: list[dict]) -> list[str]:
    labels = sorted({config_label(r) for r in rows},
                    key=lambda s: config_sort_key(s, rows))
    return labels


def _mean(vals: list[float]) -> float | None:
    return sum(vals) / len(vals) if vals else None


def collect_metric(rows: list[dict], scenario: str, column: str) -> dict[str, float]:
    out: dict[str, float] = {}
    for label in ordered_configs(rows):
        vals = [float(r[column]) for r in rows
                if r["scenario"] == scenario and config_label(r) == label
                and r[column] != ""]
        m = _mean(vals)
        if m is not None:
            out[label] = m
    return out


def _new_axes():
    fig, ax = plt.subplots(figsize=(6.4, 4.0))
    return fig, ax


def _save(fig, out_path: Path):
    out_path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out_path, format=out_path.suffix.lstrip(".") or "svg",
                metadata={"Date": None})
    plt.close(fig)


def render_sinr_ecdf(rows: list[dict], in_dir: Path, spec: FigureSpec) -> bool:
    scenario = spec.scenario or sorted({r["scenario"] for r in rows})[0]
    fig, ax = _new_axes()
    plotted = False
    for label in ordered_configs(rows):
        run_ids = sorted({r["run_id"] for r in rows
                          if r["scenario"] == scenario and config_label(r) == label})
        samples: list[float] = []
        for rid in run_ids:
            trace = in_dir / rid / "sinr_trace.csv"
            if not trace.exists():
                continue
            with open(trace, newline="") as fh:
                samples.extend(float(row["eff_sinr_db"])
                               for row in csv.DictReader(fh))
        if not samples:
            continue
        vals = np.sort(np.asarray(samples))
        fracs = np.arange(1, len(vals) + 1) / len(vals)
        color = COLORS.get("irs" if label.startswith("irs")
                           else "af" if label.startswith("af") else "none")
        alpha = 0.45 + 0.55 * (ordered_configs(rows).index(label) % 3) / 2
        ax.step(vals, fracs, where="post", label=display_name(label),
                color=color, alpha=alpha)
        plotted = True
    ax.set_xlabel("effective SINR [dB]")
    ax.set_ylabel("ECDF")
    ax.set_ylim(0, 1)
    ax.grid(True, alpha=0.4)
    if plotted:
        ax.legend(fontsize=8)
    _save(fig, spec.out_path)
    return plotted


def render_sinr_vs_n(rows: list[dict], spec: FigureSpec) -> bool:
    require_columns(rows, ["sinr_mean_db", "relay_kind", "relay_elems"])
    scenario = spec.scenario or sorted({r["scenario"] for r in rows})[0]
    fig, ax = _new_axes()
    plotted = False
    for kind in ("irs", "af"):
        pts: dict[int, list[float]] = {}
        for r in rows:
            if (r["scenario"] == scenario and r["relay_kind"] == kind
                    and r["sinr_mean_db"] != ""):
                pts.setdefault(int(r["relay_elems"]), []).append(
                    float(r["sinr_mean_db"]))
        if not pts:
            continue
        ns = sorted(pts)
        ax.semilogx(ns, [_mean(pts[n]) for n in ns], marker="o",
                    label=kind.upper(), color=COLORS[kind])
        plotted = True
    ax.set_xlabel("number of radiating elements")
    ax.set_ylabel("average SINR [dB]")
    ax.grid(True, which="both", alpha=0.4)
    if plotted:
        ax.legend()
    _save(fig, spec.out_path)
    return plotted


def render_bars(rows: list[dict], spec: FigureSpec) -> bool:
    column = METRIC_COLUMN[spec.kind]
    require_columns(rows, [column, "scenario"])
    scenarios = sorted({r["scenario"] for r in rows})
    labels = ordered_configs(rows)
    scale = 1e-6 if spec.kind == "throughput" else 1.0
    ylabel = {"throughput": "average per-UE throughput [Mbps]",
              "latency": "95th-percentile end-to-end latency [ms]",
              "per": "average PER"}[spec.kind]
    fig, ax = _new_axes()
    x = np.arange(len(labels), dtype=float)
    plotted = False
    widths = [0.7, 0.3]
    for si, scenario in enumerate(scenarios[:2]):
        data = collect_metric(rows, scenario, column)
        xs, ys = [], []
        for i, label in enumerate(labels):
            if label in data:
                xs.append(x[i])
                ys.append(data[label] * scale)
        if not xs:
            continue
        colors = [COLORS.get("irs" if l.startswith("irs") else
                             "af" if l.startswith("af") else "none")
                  for l in labels if l in data]
        shade = 1.0 if si == 0 else 0.55
        ax.bar(xs, ys, width=widths[min(si, 1)],
               color=[matplotlib.colors.to_rgba(c, shade) for c in colors],
               edgecolor="black", linewidth=0.5, zorder=2 + si,
               label=scenario)
        plotted = True
    if spec.kind == "latency":
        ax.set_yscale("log")
    ax.set_xticks(x)
    ax.set_xticklabels([display_name(l) for l in labels], rotation=30,
                       ha="right", fontsize=8)
    ax.set_ylabel(ylabel)
    ax.grid(True, axis="y", alpha=0.4)
    if plotted and len(scenarios) > 1:
        ax.legend(fontsize=8)
    _save(fig, spec.out_path)
    return plotted


def render(spec: FigureSpec, in_dir: Path) -> bool:
    """Render one figure; returns False (with an empty plot) on empty filters."""
    rows = load_summary(in_dir)
    require_columns(rows, ["run_id", "scenario", "relay_kind", "relay_elems"])
    if spec.kind == "sinr_ecdf":
        plotted = render_sinr_ecdf(rows, in_dir, spec)
    elif spec.kind == "sinr_vs_n":
        plotted = render_sinr_vs_n(rows, spec)
    else:
        plotted = render_bars(rows, spec)
    if not plotted:
        print(f"warning: no data matched for {spec.kind}; wrote an empty plot",
              file=sys.stderr)
    return plotted


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="make_figures", description="render figures from simulator CSVs")
    parser.add_argument("--in", dest="in_dir", required=True,
                        help="run or campaign output directory")
    parser.add_argument("--fig", required=True, choices=FIG_KINDS)
    parser.add_argument("--out", required=True, help="output figure file (.svg/.pdf)")
    parser.add_argument("--scenario", default=None,
                        help="scenario filter for the SINR figures")
    args = parser.parse_args(argv)
    try:
        render(FigureSpec(kind=args.fig, out_path=Path(args.out),
                          scenario=args.scenario), Path(args.in_dir))
    except FigureError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
