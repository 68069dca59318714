import math
from dataclasses import asdict, dataclass

import numpy as np

from jetssm.errors import ConfigValidationError

STANDOFF_RANGE_MM = (2.0, 7.0)


@dataclass(frozen=True)
class Segment:
    kind: str  # "dwell" or "metal"
    start_s: float
    end_s: float
    standoff_mm: float = math.nan
    index: int = -1  # dwell ordinal, -1 for metal contact


@dataclass(frozen=True)
class StairsSchedule:
    """Standoff steps of the stairs trajectory.

    The nozzle sits on metal for ``lead_in_s``, then dwells ``dwell_s`` at each standoff with a
    ``transition_s`` metal-contact move between consecutive standoffs, then ``lead_out_s`` on
    metal again. The whole run is sampled onto ``frames`` profile frames.
    """

    standoffs_mm: tuple[float, ...] = (2.0, 3.0, 4.0, 5.0, 6.0, 7.0)
    dwell_s: float = 2.0
    transition_s: float = 1.0
    traverse_speed_mm_s: float = 5.0
    segment_length_mm: float = 10.0
    lead_in_s: float = 1.0
    lead_out_s: float = 1.0
    frames: int = 1150

    def __post_init__(self):
        object.__setattr__(self, "standoffs_mm", tuple(float(z) for z in self.standoffs_mm))
        errors = []
        if not self.standoffs_mm:
            errors.append("standoffs_mm must not be empty")
        lo, hi = STANDOFF_RANGE_MM
        for z in self.standoffs_mm:
            if not lo <= z <= hi:
                errors.append(f"standoff {z} mm outside the depth-curve range [{lo}, {hi}]")
        for name in ("dwell_s", "traverse_speed_mm_s", "segment_length_mm"):
            if getattr(self, name) <= 0:
                errors.append(f"{name} must be positive, got {getattr(self, name)}")
        for name in ("transition_s", "lead_in_s", "lead_out_s"):
            if getattr(self, name) < 0:
                errors.append(f"{name} must be >= 0, got {getattr(self, name)}")
        if not math.isclose(self.dwell_s * self.traverse_speed_mm_s, self.segment_length_mm, rel_tol=1e-9):
            errors.append(
                f"dwell_s * traverse_speed_mm_s = {self.dwell_s * self.traverse_speed_mm_s} mm must equal"
                f" segment_length_mm = {self.segment_length_mm}"
            )
        if self.frames < 2:
            errors.append(f"frames must be >= 2, got {self.frames}")
        if errors:
            raise ConfigValidationError(errors)

    @property
    def duration_s(self) -> float:
        n = len(self.standoffs_mm)
        return self.lead_in_s + n * self.dwell_s + (n - 1) * self.transition_s + self.lead_out_s

    @property
    def frame_seconds(self) -> float:
        return self.duration_s / self.frames

    def segments(self) -> list[Segment]:
        out = []
        t = 0.0
        if self.lead_in_s > 0:
            out.append(Segment("metal", t, t + self.lead_in_s))
            t += self.lead_in_s
        for i, z in enumerate(self.standoffs_mm):
            out.append(Segment("dwell", t, t + self.dwell_s, z, i))
            t += self.dwell_s
            if i < len(self.standoffs_mm) - 1 and self.transition_s > 0:
                out.append(Segment("metal", t, t + self.transition_s))
                t += self.transition_s
        if self.lead_out_s > 0:
            out.append(Segment("metal", t, t + self.lead_out_s))
        return out

    def frame_dwell_index(self) -> np.ndarray:
        """Per-frame dwell ordinal, ``-1`` on metal-contact frames; frames are labelled by their midpoint."""
        mid = (np.arange(self.frames) + 0.5) * self.frame_seconds
        labels = np.full(self.frames, -1, dtype=np.int64)
        for seg in self.segments():
            if seg.kind == "dwell":
                labels[(mid >= seg.start_s) & (mid < seg.end_s)] = seg.index
        return labels

    def frame_standoffs(self) -> np.ndarray:
        labels = self.frame_dwell_index()
        z = np.asarray(self.standoffs_mm)
        return np.where(labels >= 0, z[np.maximum(labels, 0)], np.nan)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["standoffs_mm"] = list(self.standoffs_mm)
        return d

    @classmethod
    def from_dict(cls, payload: dict) -> "StairsSchedule":
        return cls(**payload)
