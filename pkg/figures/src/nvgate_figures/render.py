"""Render the figure set from a directory of nvgate CSV outputs.

Reads only the CSV files (never touches nvgate in-process state) and
writes one PNG per FigureSpec. Output is deterministic: fixed rc
parameters, fixed dpi and a pinned PNG Software tag, so re-rendering
identical CSVs reproduces identical bytes.
"""

from pathlib import Path

import click
import matplotlib
import numpy as np
import pandas as pd

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

from .specs import FigureSpec, all_specs

PNG_DPI = 150

_RC = {
    "figure.figsize": (6.0, 4.0),
    "font.size": 10,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "legend.fontsize": 9,
    "lines.linewidth": 1.4,
    "svg.hashsalt": "nvgate-figures",
}


class FigureDataError(Exception):
    """The input CSVs are missing, empty or lack required columns."""


def load_table(path: Path) -> pd.DataFrame:
    if not path.is_file():
        raise FigureDataError(f"missing input CSV: {path}")
    try:
        frame = pd.read_csv(path, comment="#")
    except pd.errors.EmptyDataError:
        raise FigureDataError(f"{path.name}: no header row") from None
    if frame.empty:
        raise FigureDataError(f"{path.name}: no data rows")
    return frame


def _require_columns(frame: pd.DataFrame, columns, name: str) -> None:
    missing = [c for c in columns if c not in frame.columns]
    if missing:
        raise FigureDataError(f"{name}: missing columns {missing}")


def _annotation_points(spec: FigureSpec, data_dir: Path):
    points = load_table(data_dir / spec.points_csv)
    _require_columns(points, ("name", "nu_ghz"), spec.points_csv)
    out = []
    for label in spec.annotations:
        rows = points[points["name"] == label]
        if rows.empty:
            raise FigureDataError(
                f"{spec.points_csv}: no row named {label!r}")
        out.append((label, float(rows["nu_ghz"].iloc[0])))
    return out


def render(spec: FigureSpec, data_dir: Path, out_dir: Path) -> Path:
    """Render one figure; returns the written path."""
    data_dir = Path(data_dir)
    frame = load_table(data_dir / spec.csv)
    _require_columns(frame, spec.columns(), spec.csv)

    x = frame[spec.x].to_numpy(dtype=float)
    keep = None
    if spec.mask:
        keep = frame[spec.mask].to_numpy(dtype=float) > 0.5

    with plt.rc_context(_RC):
        fig, ax = plt.subplots()
        for column, label in spec.series:
            y = frame[column].to_numpy(dtype=float)
            if keep is not None:
                y = np.where(keep, y, np.nan)
            ax.plot(x, y, label=label)
        if spec.logy:
            ax.set_yscale("log")
        ax.set_xlabel(spec.xlabel)
        ax.set_ylabel(spec.ylabel)
        ax.legend(loc="best")

        if spec.annotations:
            y_top = ax.get_ylim()[1]
            for label, nu in _annotation_points(spec, data_dir):
                ax.annotate(
                    label, xy=(nu, 0.0), xytext=(nu, 0.85 * y_top),
                    ha="center", color="red",
                    arrowprops={"arrowstyle": "->", "color": "red"})

        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        out_path = out_dir / f"{spec.name}.png"
        fig.savefig(out_path, dpi=PNG_DPI,
                    metadata={"Software": "nvgate-figures"})
        plt.close(fig)
    return out_path


def render_all(data_dir, out_dir) -> list[Path]:
    """Render every figure; returns the written paths in spec order."""
    return [render(spec, Path(data_dir), Path(out_dir))
            for spec in all_specs()]


@click.command()
@click.argument("data_dir", type=click.Path(exists=True, file_okay=False))
@click.argument("out_dir", type=click.Path(file_okay=False))
def cli(data_dir, out_dir):
    """Render all figures from DATA_DIR CSVs into OUT_DIR."""
    try:
        written = render_all(data_dir, out_dir)
    except FigureDataError as exc:
        raise click.ClickException(str(exc)) from exc
    for path in written:
        click.echo(f"wrote {path}")


def main() -> None:
    cli(prog_name="render-figures")


if __name__ == "__main__":
    main()
