import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import pandas as pd
from torchrl._utils import logger as torchrl_logger

from jetssm.data.schedule import StairsSchedule
from jetssm.errors import InvalidArgumentError, ProfileParseError, ShapeError
from jetssm.io import atomic_write

PROFILE_COLUMNS = 70

# standoff mm -> (mean um, std um) of the measured groove depth
DEPTH_ANCHORS = {
    2.0: (437.34, 185.99),
    3.0: (1257.45, 205.11),
    5.0: (1327.71, 405.06),
    6.0: (1198.65, 259.41),
    7.0: (1004.1, 154.17),
}


@dataclass(frozen=True)
class ErosionProfileSet:
    depths: np.ndarray  # [frames x 70], um

    def __post_init__(self):
        if self.depths.ndim != 2:
            raise ShapeError(f"profiles must be [frames x columns], got shape {self.depths.shape}")
        if not np.isfinite(self.depths).all():
            raise InvalidArgumentError("profile depths must be finite")
        if (self.depths < 0).any():
            raise InvalidArgumentError("profile depths must be >= 0")

    @property
    def frames(self) -> int:
        return self.depths.shape[0]

    @property
    def columns(self) -> int:
        return self.depths.shape[1]


@dataclass(frozen=True)
class DepthCurve:
    """Piecewise-linear depth-vs-standoff table."""

    anchors: dict = field(default_factory=lambda: dict(DEPTH_ANCHORS))

    def lookup(self, standoff_mm: float) -> tuple[float, float]:
        z = np.array(sorted(self.anchors))
        if not z[0] <= standoff_mm <= z[-1]:
            raise InvalidArgumentError(f"standoff {standoff_mm} mm outside [{z[0]}, {z[-1]}]")
        means = np.array([self.anchors[k][0] for k in z])
        stds = np.array([self.anchors[k][1] for k in z])
        return float(np.interp(standoff_mm, z, means)), float(np.interp(standoff_mm, z, stds))

    @property
    def peak_standoff(self) -> float:
        return max(self.anchors, key=lambda k: self.anchors[k][0])

    def mean_std(self) -> float:
        return float(np.mean([s for _, s in self.anchors.values()]))


def depth_curve_lookup(standoff_mm: float, curve: DepthCurve | None = None) -> tuple[float, float]:
    return (curve or DepthCurve()).lookup(standoff_mm)


def load_profiles_csv(path, columns: int = PROFILE_COLUMNS) -> ErosionProfileSet:
    """Read one row per frame of ``columns`` depths in um; an all-text first row is taken as a header.

    Negative depths are clamped to 0 and counted in a warning.
    """
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"no such profile file: {path}")
    try:
        raw = pd.read_csv(path, header=None, dtype=str, keep_default_na=False, skip_blank_lines=True)
    except pd.errors.EmptyDataError:
        raise ProfileParseError(f"{path}: no rows") from None
    except pd.errors.ParserError as e:
        m = re.search(r"line (\d+)", str(e))
        row = int(m.group(1)) if m else None
        raise ProfileParseError(f"{path}: ragged row {row}: {e}", row=row) from None

    first_line = 1
    numeric = raw.apply(pd.to_numeric, errors="coerce")
    if len(raw) and numeric.iloc[0].isna().all():
        raw, numeric = raw.iloc[1:], numeric.iloc[1:]
        first_line = 2
    if raw.empty:
        raise ProfileParseError(f"{path}: no rows")
    if raw.shape[1] != columns:
        raise ProfileParseError(f"{path}: expected {columns} columns, found {raw.shape[1]}", row=first_line)

    missing = raw.isna()
    if missing.any().any():
        i = int(np.argmax(missing.any(axis=1).to_numpy()))
        raise ProfileParseError(f"{path}: ragged row {first_line + i}", row=first_line + i)
    bad = numeric.isna().to_numpy()
    if bad.any():
        i, j = map(int, np.argwhere(bad)[0])
        raise ProfileParseError(
            f"{path}: non-numeric cell {raw.iat[i, j]!r} at row {first_line + i}, column {j + 1}",
            row=first_line + i,
            column=j + 1,
        )

    depths = raw.to_numpy().astype(np.float64)
    n_negative = int((depths < 0).sum())
    if n_negative:
        torchrl_logger.warning(f"{path}: clamped {n_negative} negative depth values to 0")
        depths = np.maximum(depths, 0.0)
    return ErosionProfileSet(depths)


def write_profiles_csv(path, profiles: ErosionProfileSet):
    with atomic_write(path, "w") as f:
        pd.DataFrame(profiles.depths).to_csv(f, header=False, index=False)


def groove_depths(profiles: ErosionProfileSet) -> np.ndarray:
    """Per-frame groove depth: the deepest point of the cross-section."""
    return profiles.depths.max(axis=1)


def section_frames(schedule: StairsSchedule, n_sections: int | None = 5) -> dict[int, np.ndarray]:
    """Frame indices sampled from each dwell: ``n_sections`` equispaced frames, or all with ``None``."""
    labels = schedule.frame_dwell_index()
    out = {}
    for i in range(len(schedule.standoffs_mm)):
        frames = np.flatnonzero(labels == i)
        if n_sections is not None and len(frames) > n_sections:
            frames = frames[np.linspace(0, len(frames) - 1, n_sections).round().astype(np.int64)]
        out[i] = frames
    return out


def segment_depth_statistics(trials, schedule: StairsSchedule, n_sections: int | None = 5) -> pd.DataFrame:
    """Depth mean and std per standoff, pooled over the sampled sections of every trial."""
    sections = section_frames(schedule, n_sections)
    rows = []
    for i, z in enumerate(schedule.standoffs_mm):
        pooled = np.concatenate([groove_depths(p)[sections[i]] for p in trials])
        rows.append({
            "standoff_mm": z,
            "mean_um": float(pooled.mean()),
            "std_um": float(pooled.std(ddof=1)) if len(pooled) > 1 else 0.0,
            "count": len(pooled),
        })
    return pd.DataFrame(rows)
