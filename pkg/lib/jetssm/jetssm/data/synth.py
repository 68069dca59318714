"""Synthetic stairs-trajectory trials: erosion profiles plus the matching audio.

Per dwell frame the groove's peak depth is drawn from the depth curve at that standoff,
smoothed along the trajectory over ``depth_correlation_frames``, and spread across the
cross-section as a smooth bump with spatially correlated noise.
Metal-contact frames (lead-in, transitions, lead-out) carry only the noise floor.

The audio is a sum of band-limited noises whose per-frame gains follow the peak depth
while cutting cement and switch to a high-band signature on metal, plus the sonotrode
tone. The sonotrode runs above Nyquist at the canonical rate, so the tone is emitted
at its alias ``rate - f``.
"""

from dataclasses import asdict, dataclass, field

import numpy as np

from jetssm.audio.wav import CANONICAL_RATE, AudioClip
from jetssm.data.profiles import PROFILE_COLUMNS, DepthCurve, ErosionProfileSet
from jetssm.data.schedule import StairsSchedule
from jetssm.errors import ConfigValidationError

SONOTRODE_HZ = 22_170.0
NOISE_BANDS_HZ = ((300.0, 3_000.0), (3_000.0, 7_000.0), (7_000.0, 12_000.0), (12_000.0, 18_000.0))
CEMENT_GAINS = (1.0, 0.6, 0.3, 0.15)
METAL_GAINS = (0.15, 0.3, 0.6, 1.0)


def alias_frequency(f_hz: float, sample_rate: float) -> float:
    """Apparent frequency of a tone at ``f_hz`` after sampling at ``sample_rate``."""
    f = f_hz % sample_rate
    return sample_rate - f if f > sample_rate / 2 else f


@dataclass(frozen=True)
class GeneratorConfig:
    sample_rate: int = CANONICAL_RATE
    columns: int = PROFILE_COLUMNS
    depth_std_scale: float = 1.0
    depth_correlation_frames: float = 20.0
    bump_sigma_columns: float = 8.0
    noise_um: float = 2.0
    noise_correlation_columns: float = 3.0
    tone_hz: float = SONOTRODE_HZ
    tone_amplitude: float = 0.05
    noise_amplitude: float = 0.01
    depth_gain_db_per_mm: float = 12.0
    anchors: dict = field(default_factory=lambda: DepthCurve().anchors)

    def __post_init__(self):
        errors = []
        if self.sample_rate <= 0:
            errors.append(f"sample_rate must be positive, got {self.sample_rate}")
        if self.columns < 1:
            errors.append(f"columns must be >= 1, got {self.columns}")
        for name in ("depth_std_scale", "depth_correlation_frames", "noise_um", "noise_correlation_columns",
                     "tone_amplitude", "noise_amplitude", "depth_gain_db_per_mm"):
            if getattr(self, name) < 0:
                errors.append(f"{name} must be >= 0, got {getattr(self, name)}")
        if self.bump_sigma_columns <= 0:
            errors.append(f"bump_sigma_columns must be positive, got {self.bump_sigma_columns}")
        if errors:
            raise ConfigValidationError(errors)
        # JSON round-trips turn the anchor keys into strings
        object.__setattr__(self, "anchors", {float(k): tuple(v) for k, v in self.anchors.items()})

    @property
    def curve(self) -> DepthCurve:
        return DepthCurve(self.anchors)

    @property
    def synthetic_tau_um(self) -> float:
        """Accuracy threshold scaled to the generator's depth noise."""
        return 0.1 * self.depth_std_scale * self.curve.mean_std()

    def to_dict(self) -> dict:
        d = asdict(self)
        d["anchors"] = {str(k): list(v) for k, v in self.anchors.items()}
        return d

    @classmethod
    def from_dict(cls, payload: dict) -> "GeneratorConfig":
        return cls(**payload)


@dataclass(frozen=True)
class Trial:
    seed: int
    clip: AudioClip | None
    profiles: ErosionProfileSet
    peak_depth_um: np.ndarray  # [frames]


def _streams(seed: int):
    profile_seq, audio_seq = np.random.SeedSequence(seed).spawn(2)
    return np.random.default_rng(profile_seq), np.random.default_rng(audio_seq)


def _gaussian_kernel(sigma: float) -> np.ndarray:
    radius = max(1, int(np.ceil(3 * sigma)))
    x = np.arange(-radius, radius + 1)
    k = np.exp(-0.5 * (x / sigma) ** 2)
    return k / np.sqrt((k**2).sum())


def _correlated_normal(rng, shape, sigma: float, axis: int) -> np.ndarray:
    """Unit-variance normal noise smoothed along ``axis`` with a Gaussian of width ``sigma``."""
    white = rng.standard_normal(shape)
    if sigma <= 0:
        return white
    kernel = _gaussian_kernel(sigma)
    n = shape[axis]
    # truncated support near the edges loses variance; rescale it back to one
    energy = np.convolve(np.ones(n), kernel**2, mode="same")[:n]
    smooth = lambda v: np.convolve(v, kernel, mode="same")[:n] / np.sqrt(energy)
    return np.apply_along_axis(smooth, axis, white)


def peak_depths(rng, schedule: StairsSchedule, config: GeneratorConfig) -> np.ndarray:
    labels = schedule.frame_dwell_index()
    z = _correlated_normal(rng, (schedule.frames,), config.depth_correlation_frames, 0)
    peaks = np.zeros(schedule.frames)
    for i, standoff in enumerate(schedule.standoffs_mm):
        mean, std = config.curve.lookup(standoff)
        frames = labels == i
        peaks[frames] = mean + std * config.depth_std_scale * z[frames]
    return np.maximum(peaks, 0.0)


def cross_section(config: GeneratorConfig) -> np.ndarray:
    cols = np.arange(config.columns)
    centre = (config.columns - 1) / 2
    bump = np.exp(-0.5 * ((cols - centre) / config.bump_sigma_columns) ** 2)
    return bump / bump.max()


def profiles_from_peaks(rng, peaks: np.ndarray, config: GeneratorConfig) -> ErosionProfileSet:
    noise = _correlated_normal(rng, (len(peaks), config.columns), config.noise_correlation_columns, 1)
    depths = peaks[:, None] * cross_section(config)[None, :] + config.noise_um * noise
    return ErosionProfileSet(np.maximum(depths, 0.0))


def synthesize_profiles(seed: int, schedule: StairsSchedule | None = None,
                        config: GeneratorConfig | None = None) -> Trial:
    """The profile half of :func:`synthesize_trial`, identical for the same seed, without audio."""
    schedule = schedule or StairsSchedule()
    config = config or GeneratorConfig()
    profile_rng, _ = _streams(seed)
    peaks = peak_depths(profile_rng, schedule, config)
    return Trial(seed, None, profiles_from_peaks(profile_rng, peaks, config), peaks)


def band_noise(rng, n_samples: int, sample_rate: int, band) -> np.ndarray:
    """Unit-RMS noise restricted to ``band`` by masking its spectrum."""
    spectrum = np.fft.rfft(rng.standard_normal(n_samples))
    freqs = np.fft.rfftfreq(n_samples, 1.0 / sample_rate)
    spectrum[(freqs < band[0]) | (freqs >= band[1])] = 0.0
    x = np.fft.irfft(spectrum, n=n_samples)
    rms = np.sqrt(np.mean(x**2))
    return x / rms if rms > 0 else x


def frame_band_gains(peaks: np.ndarray, labels: np.ndarray, config: GeneratorConfig) -> np.ndarray:
    """``[frames x bands]`` gains: depth-modulated cement signature on dwell frames, metal otherwise."""
    cement = np.asarray(CEMENT_GAINS)[None, :]
    scale = np.ones((len(peaks), len(CEMENT_GAINS)))
    # deeper cuts load the low bands; level in dB is linear in depth
    scale[:, :2] = 10.0 ** (config.depth_gain_db_per_mm * (peaks[:, None] / 1000.0) / 20.0)
    gains = cement * scale
    metal = labels < 0
    gains[metal] = np.asarray(METAL_GAINS)
    return gains


def synthesize_audio(rng, schedule: StairsSchedule, peaks: np.ndarray, config: GeneratorConfig) -> AudioClip:
    rate = config.sample_rate
    n = int(round(schedule.duration_s * rate))
    t = np.arange(n) / rate
    centres = (np.arange(schedule.frames) + 0.5) * schedule.frame_seconds
    gains = frame_band_gains(peaks, schedule.frame_dwell_index(), config)
    signal = np.zeros(n)
    for b, band in enumerate(NOISE_BANDS_HZ):
        hi = min(band[1], rate / 2)
        if band[0] >= hi:
            continue
        envelope = np.interp(t, centres, gains[:, b])
        signal += envelope * band_noise(rng, n, rate, (band[0], hi))
    signal *= config.noise_amplitude
    phase = rng.uniform(0, 2 * np.pi)
    signal += config.tone_amplitude * np.sin(2 * np.pi * alias_frequency(config.tone_hz, rate) * t + phase)
    return AudioClip(np.clip(signal, -1.0, 1.0), rate)


def synthesize_trial(seed: int, schedule: StairsSchedule | None = None,
                     config: GeneratorConfig | None = None) -> Trial:
    """Deterministic (audio, profiles) pair for ``seed``."""
    schedule = schedule or StairsSchedule()
    config = config or GeneratorConfig()
    profile_rng, audio_rng = _streams(seed)
    peaks = peak_depths(profile_rng, schedule, config)
    profiles = profiles_from_peaks(profile_rng, peaks, config)
    clip = synthesize_audio(audio_rng, schedule, peaks, config)
    return Trial(seed, clip, profiles, peaks)
