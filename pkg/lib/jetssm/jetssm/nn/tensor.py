from dataclasses import dataclass

import numpy as np
import torch

from jetssm.errors import InvalidArgumentError, ShapeError


@dataclass(frozen=True)
class SequenceTensor:
    """A time-major ``[frames x channels]`` real array."""

    data: torch.Tensor

    def __post_init__(self):
        if self.data.ndim != 2:
            raise ShapeError(f"expected [frames x channels], got shape {tuple(self.data.shape)}")
        if self.data.shape[0] < 1 or self.data.shape[1] < 1:
            raise ShapeError(f"frames and channels must be positive, got {tuple(self.data.shape)}")
        if self.data.is_complex():
            raise InvalidArgumentError("sequence data must be real")
        with torch.no_grad():
            if not torch.isfinite(self.data).all():
                raise InvalidArgumentError("sequence data has non-finite entries")

    @classmethod
    def from_numpy(cls, array, dtype=torch.float64):
        return cls(torch.as_tensor(np.asarray(array), dtype=dtype))

    @property
    def frames(self) -> int:
        return self.data.shape[0]

    @property
    def channels(self) -> int:
        return self.data.shape[1]

    def numpy(self) -> np.ndarray:
        return self.data.detach().cpu().numpy()

    def expect_channels(self, channels: int, what: str = "input"):
        if self.channels != channels:
            raise ShapeError(f"{what} has {self.channels} channels, expected {channels}")
        return self
