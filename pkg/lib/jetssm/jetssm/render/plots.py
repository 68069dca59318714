"""SVG figures with CSV twins holding every plotted series."""

from pathlib import Path

import numpy as np
import pandas as pd
import plotly.graph_objects as go

from jetssm.io import atomic_write


def write_figure(fig: go.Figure, path):
    """Static SVG export (needs kaleido)."""
    svg = fig.to_image(format="svg")
    with atomic_write(path, "wb") as f:
        f.write(svg)


def write_frame(frame: pd.DataFrame, path):
    with atomic_write(path, "w") as f:
        frame.to_csv(f, index=False)


def depth_vs_standoff(stats: pd.DataFrame, out_dir, name="depth_vs_standoff") -> tuple[Path, Path]:
    """Bar chart of mean groove depth per standoff with one-std error bars."""
    out_dir = Path(out_dir)
    fig = go.Figure(
        data=[
            go.Bar(
                x=stats["standoff_mm"],
                y=stats["mean_um"],
                error_y={"type": "data", "array": stats["std_um"], "visible": True},
                name="Groove depth",
            ),
            go.Scatter(x=stats["standoff_mm"], y=stats["mean_um"], mode="lines+markers", showlegend=False),
        ]
    )
    fig.update_layout(
        xaxis_title_text="Standoff Distance (mm)",
        yaxis_title_text="Disintegration Depth (um)",
    )
    svg, csv = out_dir / f"{name}.svg", out_dir / f"{name}.csv"
    write_frame(stats[["standoff_mm", "mean_um", "std_um", "count"]], csv)
    write_figure(fig, svg)
    return svg, csv


def profile_overlay(predictions: dict, truth: np.ndarray, out_dir, column: int | None = None,
                    name="profile_overlay") -> tuple[Path, Path]:
    """Predicted depth traces over test frames, one per model, against the ground truth at ``column``."""
    out_dir = Path(out_dir)
    column = truth.shape[1] // 2 if column is None else column
    frame = pd.DataFrame({"frame": np.arange(truth.shape[0]), "truth": truth[:, column]})
    for model, pred in predictions.items():
        frame[model] = pred[:, column]
    fig = go.Figure(
        data=[go.Scatter(x=frame["frame"], y=frame[col], name=col) for col in frame.columns[1:]]
    )
    fig.update_layout(
        xaxis_title_text="Test Frame",
        yaxis_title_text=f"Depth at Column {column} (um)",
    )
    svg, csv = out_dir / f"{name}.svg", out_dir / f"{name}.csv"
    write_frame(frame, csv)
    write_figure(fig, svg)
    return svg, csv


def loss_curves(histories: dict, out_dir, name="loss_curves") -> tuple[Path, Path]:
    out_dir = Path(out_dir)
    frame = pd.DataFrame({model: pd.Series(losses) for model, losses in histories.items()})
    frame.insert(0, "epoch", np.arange(1, len(frame) + 1))
    fig = go.Figure(
        data=[go.Scatter(x=frame["epoch"], y=frame[model], name=model) for model in histories]
    )
    fig.update_layout(xaxis_title_text="Epoch", yaxis_title_text="Train MSE")
    svg, csv = out_dir / f"{name}.svg", out_dir / f"{name}.csv"
    write_frame(frame, csv)
    write_figure(fig, svg)
    return svg, csv
