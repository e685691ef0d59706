"""Render rydcavity CSV artifacts as publication-style figures.

One figure kind per CSV schema:

* ``trace``     population time series (``t_us, pop_b, pop_e, pop_r, ...``)
* ``ensemble``  trajectory-averaged observables with standard errors
* ``scan1d``    fidelity against one scanned parameter
* ``scan2d``    fidelity heatmap over two scanned parameters
* ``geometry``  exchange-coupling magnitude against qubit-atom distance

Rendering is deterministic: fixed style file, Agg backend, no timestamp
metadata in the output.
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

STYLE_FILE = Path(__file__).with_name("house.mplstyle")

KINDS = ("trace", "ensemble", "scan1d", "scan2d", "geometry")

#: columns that must exist, per figure kind; scan axes are positional
REQUIRED_COLUMNS = {
    "trace": ("t_us", "pop_b", "pop_e", "pop_r"),
    "ensemble": ("t_us", "mean_photon", "stderr_photon", "rydberg_pop", "stderr_rydberg"),
    "scan1d": ("F_z", "status"),
    "scan2d": ("F_z", "status"),
    "geometry": ("r_um", "v_abs_mhz"),
}


class RenderError(ValueError):
    """Input CSV cannot be rendered as the requested kind."""


class MissingColumn(RenderError):
    def __init__(self, column: str, path):
        super().__init__(f"column {column!r} missing from {path}")
        self.column = column


@dataclass(frozen=True)
class PlotSpec:
    """What to render: input CSV path(s), figure kind, labels, output path."""

    inputs: tuple[str, ...]
    kind: str
    output: str
    xlabel: str | None = None
    ylabel: str | None = None
    title: str | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise RenderError(f"unknown figure kind {self.kind!r}; expected one of {KINDS}")
        if not self.inputs:
            raise RenderError("at least one input CSV is required")
        if self.kind.startswith("scan") and len(self.inputs) != 1:
            raise RenderError(f"kind {self.kind!r} takes exactly one input CSV")


@dataclass
class Table:
    path: str
    columns: list[str]
    rows: list[list[str]]

    def numeric(self, name: str) -> np.ndarray:
        if name not in self.columns:
            raise MissingColumn(name, self.path)
        i = self.columns.index(name)
        return np.array([float(r[i]) for r in self.rows])

    def strings(self, name: str) -> list[str]:
        if name not in self.columns:
            raise MissingColumn(name, self.path)
        i = self.columns.index(name)
        return [r[i] for r in self.rows]


def read_table(path) -> Table:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise RenderError(f"empty CSV: {path}") from None
        rows = [row for row in reader if row]
    if not rows:
        raise RenderError(f"no data rows in {path}")
    return Table(str(path), [h.strip() for h in header], rows)


def _check_columns(table: Table, kind: str) -> None:
    for col in REQUIRED_COLUMNS[kind]:
        if col not in table.columns:
            raise MissingColumn(col, table.path)


def _axis_columns(table: Table) -> list[str]:
    """Scan-table columns left of the reflection block are the swept axes."""
    try:
        stop = table.columns.index("re_R_unblocked")
    except ValueError:
        raise MissingColumn("re_R_unblocked", table.path) from None
    if stop < 1:
        raise RenderError(f"no axis columns in {table.path}")
    return table.columns[:stop]


def _plot_trace(ax, tables):
    for table in tables:
        t = table.numeric("t_us")
        stem = Path(table.path).stem
        suffix = f" [{stem}]" if len(tables) > 1 else ""
        ax.plot(t, table.numeric("pop_b"), label="photon" + suffix)
        ax.plot(t, table.numeric("pop_e"), label="intermediate" + suffix)
        ax.plot(t, table.numeric("pop_r"), label="Rydberg" + suffix)
    ax.set_xlabel("t (us)")
    ax.set_ylabel("population")
    ax.legend()


def _plot_ensemble(fig, tables):
    ax1, ax2 = fig.subplots(2, 1, sharex=True)
    for table in tables:
        t = table.numeric("t_us")
        stem = Path(table.path).stem
        label = stem if len(tables) > 1 else None
        for ax, mean_col, err_col in (
            (ax1, "mean_photon", "stderr_photon"),
            (ax2, "rydberg_pop", "stderr_rydberg"),
        ):
            mean = table.numeric(mean_col)
            err = table.numeric(err_col)
            (line,) = ax.plot(t, mean, label=label)
            ax.fill_between(t, mean - err, mean + err, alpha=0.3, color=line.get_color())
    ax1.set_ylabel("mean photon number")
    ax2.set_ylabel("Rydberg population")
    ax2.set_xlabel("t (us)")
    if len(tables) > 1:
        ax1.legend()
    return ax1


def _plot_scan1d(ax, table):
    axes = _axis_columns(table)
    x = table.numeric(axes[0])
    fz = table.numeric("F_z")
    ok = np.array([s == "ok" for s in table.strings("status")])
    ax.plot(x[ok], fz[ok], marker="o")
    if (~ok).any():
        ax.plot(x[~ok], np.zeros(int((~ok).sum())), linestyle="none", marker="x", color="crimson")
    ax.set_xlabel(f"{axes[0]} (MHz)")
    ax.set_ylabel("gate fidelity")


def _plot_scan2d(fig, ax, table):
    axes = _axis_columns(table)
    if len(axes) < 2:
        raise RenderError(f"scan2d needs two axis columns, found {axes}")
    x = table.numeric(axes[0])
    y = table.numeric(axes[1])
    fz = table.numeric("F_z")
    ok = np.array([s == "ok" for s in table.strings("status")])
    fz = np.where(ok, fz, np.nan)
    xs = np.unique(x)
    ys = np.unique(y)
    grid = np.full((len(ys), len(xs)), np.nan)
    xi = np.searchsorted(xs, x)
    yi = np.searchsorted(ys, y)
    grid[yi, xi] = fz
    mesh = ax.pcolormesh(xs, ys, grid, shading="nearest", vmin=0.0, vmax=1.0)
    fig.colorbar(mesh, ax=ax, label="gate fidelity")
    ax.set_xlabel(f"{axes[0]} (MHz)")
    ax.set_ylabel(f"{axes[1]} (MHz)")


def _plot_geometry(ax, table):
    r = table.numeric("r_um")
    v = table.numeric("v_abs_mhz")
    ax.loglog(r, v, linestyle="none", marker=".", markersize=4)
    ax.set_xlabel("qubit-atom distance (um)")
    ax.set_ylabel("|V| (MHz)")


def render(spec: PlotSpec) -> Path:
    """Render the figure described by ``spec``; returns the output path."""
    tables = [read_table(p) for p in spec.inputs]
    for table in tables:
        _check_columns(table, spec.kind)
    with plt.style.context(str(STYLE_FILE)):
        fig = plt.figure()
        if spec.kind == "ensemble":
            ax = _plot_ensemble(fig, tables)
        else:
            ax = fig.add_subplot(111)
            if spec.kind == "trace":
                _plot_trace(ax, tables)
            elif spec.kind == "scan1d":
                _plot_scan1d(ax, tables[0])
            elif spec.kind == "scan2d":
                _plot_scan2d(fig, ax, tables[0])
            elif spec.kind == "geometry":
                _plot_geometry(ax, tables[0])
        if spec.title:
            ax.set_title(spec.title)
        if spec.xlabel:
            ax.set_xlabel(spec.xlabel)
        if spec.ylabel:
            ax.set_ylabel(spec.ylabel)
        out = Path(spec.output)
        out.parent.mkdir(parents=True, exist_ok=True)
        # strip the writer tag so identical inputs give identical bytes
        fig.savefig(out, metadata={"Software": None})
        plt.close(fig)
    return out


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rydcavity-fig",
        description="Render rydcavity CSV artifacts as figures (PNG).",
    )
    parser.add_argument(
        "--input", action="append", required=True, help="input CSV (repeat to overlay traces)"
    )
    parser.add_argument("--kind", required=True, choices=KINDS)
    parser.add_argument("--out", required=True, help="output image path (.png)")
    parser.add_argument("--xlabel", default=None)
    parser.add_argument("--ylabel", default=None)
    parser.add_argument("--title", default=None)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    spec = PlotSpec(
        inputs=tuple(args.input),
        kind=args.kind,
        output=args.out,
        xlabel=args.xlabel,
        ylabel=args.ylabel,
        title=args.title,
    )
    try:
        out = render(spec)
    except (RenderError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {out}")
    return 0


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
