import numpy as np
import pytest

from jetssm.audio import featurize, mel_center_frequencies
from jetssm.data import (
    DEPTH_ANCHORS,
    DepthCurve,
    ErosionProfileSet,
    GeneratorConfig,
    StairsSchedule,
    assemble_sample,
    depth_curve_lookup,
    load_profiles_csv,
    normalize_features,
    prepare_dataset,
    segment_depth_statistics,
    split_train_test,
    synthesize_profiles,
    synthesize_trial,
    write_profiles_csv,
)
from jetssm.data.samples import N_MEL, PROFILE_SLICE, compute_stats
from jetssm.data.synth import NOISE_BANDS_HZ, frame_band_gains
from jetssm.errors import ConfigValidationError, InvalidArgumentError, ProfileParseError, ShapeError

SHORT = StairsSchedule(standoffs_mm=(3.0, 5.0), frames=200)
# independent frames, so pooled means converge at the per-frame rate
WHITE = GeneratorConfig(depth_correlation_frames=0.0)


@pytest.mark.parametrize("standoff", sorted(DEPTH_ANCHORS))
def test_depth_curve_hits_its_anchors(standoff):
    assert depth_curve_lookup(standoff) == pytest.approx(DEPTH_ANCHORS[standoff])


def test_depth_curve_interpolates_linearly():
    mean, std = depth_curve_lookup(2.5)
    assert mean == pytest.approx(847.395)
    assert std == pytest.approx((185.99 + 205.11) / 2)
    assert DepthCurve().peak_standoff == 5.0


@pytest.mark.parametrize("standoff", [1.99, 7.01, -3.0])
def test_depth_curve_rejects_out_of_range(standoff):
    with pytest.raises(InvalidArgumentError):
        depth_curve_lookup(standoff)


def test_default_schedule_timeline():
    schedule = StairsSchedule()
    assert schedule.duration_s == pytest.approx(19.0)
    labels = schedule.frame_dwell_index()
    assert labels.shape == (1150,)
    assert labels[0] == -1 and labels[-1] == -1
    assert set(labels.tolist()) == {-1, 0, 1, 2, 3, 4, 5}
    dwell = labels[labels >= 0]
    assert (np.diff(dwell) >= 0).all()
    for i in range(6):
        assert (labels == i).sum() in (121, 122)
    standoffs = schedule.frame_standoffs()
    assert np.isnan(standoffs[labels < 0]).all()
    assert set(standoffs[labels >= 0].tolist()) == {2.0, 3.0, 4.0, 5.0, 6.0, 7.0}


def test_schedule_segments_alternate():
    kinds = [s.kind for s in StairsSchedule().segments()]
    assert kinds == ["metal"] + ["dwell", "metal"] * 6


def test_schedule_reports_every_violation():
    with pytest.raises(ConfigValidationError) as e:
        StairsSchedule(standoffs_mm=(1.0, 8.0), dwell_s=3.0, frames=1)
    assert len(e.value.errors) == 4
    assert StairsSchedule.from_dict(SHORT.to_dict()) == SHORT


def test_generator_config_round_trip_and_tau():
    config = GeneratorConfig(noise_um=5.0)
    assert GeneratorConfig.from_dict(config.to_dict()) == config
    assert config.synthetic_tau_um == pytest.approx(24.19, abs=0.01)
    with pytest.raises(ConfigValidationError):
        GeneratorConfig(noise_um=-1.0, bump_sigma_columns=0.0)


def test_synthesis_is_deterministic():
    a = synthesize_trial(7, SHORT)
    b = synthesize_trial(7, SHORT)
    assert np.array_equal(a.clip.samples, b.clip.samples)
    assert np.array_equal(a.profiles.depths, b.profiles.depths)
    assert np.array_equal(synthesize_profiles(7, SHORT).profiles.depths, a.profiles.depths)
    assert not np.array_equal(synthesize_trial(8, SHORT).profiles.depths, a.profiles.depths)


def test_synthetic_trial_shapes():
    trial = synthesize_trial(0, SHORT)
    assert trial.profiles.depths.shape == (200, 70)
    assert len(trial.clip.samples) == round(SHORT.duration_s * trial.clip.sample_rate)
    assert (trial.profiles.depths >= 0).all()
    metal = SHORT.frame_dwell_index() < 0
    assert (trial.peak_depth_um[metal] == 0).all()


def _pooled_peaks(seeds, schedule, config=WHITE):
    labels = schedule.frame_dwell_index()
    pooled = {z: [] for z in schedule.standoffs_mm}
    for seed in seeds:
        peaks = synthesize_profiles(seed, schedule, config).peak_depth_um
        for i, z in enumerate(schedule.standoffs_mm):
            pooled[z].append(peaks[labels == i])
    return {z: np.concatenate(v) for z, v in pooled.items()}


def test_segment_means_follow_the_bell():
    means = {z: v.mean() for z, v in _pooled_peaks(range(40), StairsSchedule()).items()}
    assert means[2.0] < means[3.0]
    assert means[5.0] > means[6.0] > means[7.0]
    assert max(means, key=means.get) == 5.0


def test_generator_matches_anchor_statistics():
    n = 100
    schedule = StairsSchedule(standoffs_mm=tuple(sorted(DEPTH_ANCHORS)))
    labels = schedule.frame_dwell_index()
    trial_means = np.zeros((n, len(DEPTH_ANCHORS)))
    for seed in range(n):
        peaks = synthesize_profiles(seed, schedule, WHITE).peak_depth_um
        trial_means[seed] = [peaks[labels == i].mean() for i in range(len(DEPTH_ANCHORS))]
    for i, z in enumerate(sorted(DEPTH_ANCHORS)):
        mean, std = DEPTH_ANCHORS[z]
        assert abs(trial_means[:, i].mean() - mean) <= 3 * std / np.sqrt(n), z


def test_depth_correlation_along_the_trajectory():
    labels = SHORT.frame_dwell_index()

    def lag_one(config):
        peaks = synthesize_profiles(4, SHORT, config).peak_depth_um[labels == 1]
        return np.corrcoef(peaks[:-1], peaks[1:])[0, 1]

    assert lag_one(GeneratorConfig()) > 0.9
    assert abs(lag_one(WHITE)) < 0.5


def test_low_band_level_is_linear_in_depth():
    config = GeneratorConfig(depth_gain_db_per_mm=12.0)
    gains = frame_band_gains(np.array([0.0, 1000.0, 2000.0, 500.0]), np.array([0, 0, 0, -1]), config)
    level_db = 20 * np.log10(gains[:3, 0])
    assert level_db == pytest.approx([0.0, 12.0, 24.0])
    assert gains[1, 1] / gains[1, 0] == pytest.approx(0.6)
    assert gains[:3, 2:].tolist() == [[0.3, 0.15]] * 3
    assert gains[3].tolist() == [0.15, 0.3, 0.6, 1.0]


def _band_energy(mel_frames):
    centres = mel_center_frequencies(N_MEL, sample_rate=38_400)
    energy = np.exp(mel_frames).mean(axis=0)
    return np.array([energy[(centres >= lo) & (centres < hi)].sum() for lo, hi in NOISE_BANDS_HZ])


def test_metal_contact_has_a_distinct_spectrum():
    schedule = StairsSchedule()
    trial = synthesize_trial(3, schedule)
    mel = featurize(trial.clip, target_frames=schedule.frames)
    labels = schedule.frame_dwell_index()
    metal, cement = _band_energy(mel[labels < 0]), _band_energy(mel[labels >= 0])
    cosine = metal @ cement / (np.linalg.norm(metal) * np.linalg.norm(cement))
    assert 1.0 - cosine >= 0.1


def test_segment_depth_statistics_table():
    schedule = SHORT
    trials = [synthesize_profiles(s, schedule).profiles for s in range(3)]
    stats = segment_depth_statistics(trials, schedule, n_sections=5)
    assert stats["standoff_mm"].tolist() == [3.0, 5.0]
    assert stats["count"].tolist() == [15, 15]
    assert (stats["std_um"] > 0).all()


def _write_rows(path, rows):
    path.write_text("".join(",".join(str(v) for v in row) + "\n" for row in rows))


def test_csv_round_trip_is_exact(tmp_path):
    profiles = synthesize_profiles(11).profiles
    path = tmp_path / "profiles.csv"
    write_profiles_csv(path, profiles)
    back = load_profiles_csv(path)
    assert back.frames == 1150
    assert np.array_equal(back.depths, profiles.depths)


def test_csv_empty_file(tmp_path):
    path = tmp_path / "empty.csv"
    path.write_text("")
    with pytest.raises(ProfileParseError, match="no rows"):
        load_profiles_csv(path)


def test_csv_header_row_is_skipped(tmp_path):
    path = tmp_path / "header.csv"
    _write_rows(path, [[f"d{i}" for i in range(70)], [1.5] * 70, [2.5] * 70])
    depths = load_profiles_csv(path).depths
    assert depths.shape == (2, 70)
    assert depths[1, 0] == 2.5


def test_csv_long_row_reports_its_line(tmp_path):
    path = tmp_path / "long.csv"
    _write_rows(path, [[1.0] * 70, [1.0] * 70, [1.0] * 71])
    with pytest.raises(ProfileParseError) as e:
        load_profiles_csv(path)
    assert e.value.row == 3


def test_csv_short_row_reports_its_line(tmp_path):
    path = tmp_path / "short.csv"
    _write_rows(path, [[1.0] * 70, [1.0] * 69, [1.0] * 70])
    with pytest.raises(ProfileParseError, match="ragged row 2"):
        load_profiles_csv(path)


def test_csv_non_numeric_cell_has_coordinates(tmp_path):
    path = tmp_path / "text.csv"
    row = [1.0] * 70
    row[4] = "abc"
    _write_rows(path, [[1.0] * 70, row])
    with pytest.raises(ProfileParseError, match="row 2, column 5") as e:
        load_profiles_csv(path)
    assert (e.value.row, e.value.column) == (2, 5)


def test_csv_negative_depths_are_clamped(tmp_path):
    path = tmp_path / "negative.csv"
    _write_rows(path, [[-3.0] + [1.0] * 69, [2.0] * 70])
    depths = load_profiles_csv(path).depths
    assert depths[0, 0] == 0.0
    assert (depths >= 0).all()


def test_csv_missing_file(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_profiles_csv(tmp_path / "absent.csv")


def test_profile_set_invariants():
    with pytest.raises(InvalidArgumentError):
        ErosionProfileSet(np.full((3, 70), -1.0))
    with pytest.raises(InvalidArgumentError):
        ErosionProfileSet(np.full((3, 70), np.inf))
    with pytest.raises(ShapeError):
        ErosionProfileSet(np.zeros(70))


def _toy(frames=10, seed=0):
    rng = np.random.default_rng(seed)
    return rng.normal(size=(frames, 60)), np.abs(rng.normal(500.0, 100.0, size=(frames, 70)))


def test_assemble_with_and_without_mask():
    mel, depths = _toy()
    stats = compute_stats(np.concatenate([mel, depths], axis=1))
    visible = assemble_sample(mel, depths, mask=True, stats=stats)
    hidden = assemble_sample(mel, depths, mask=False, stats=stats)
    full = stats.apply(np.concatenate([mel, depths], axis=1))
    assert np.allclose(visible.input, full)
    assert not hidden.input[:, PROFILE_SLICE].any()
    assert np.array_equal(hidden.input[:, :N_MEL], visible.input[:, :N_MEL])
    assert np.array_equal(visible.target, depths) and np.array_equal(hidden.target, depths)
    assert visible.input.shape == (10, 130)


def test_assemble_frame_mismatch():
    mel, depths = _toy()
    with pytest.raises(ShapeError):
        assemble_sample(mel[:9], depths, mask=True)


@pytest.mark.parametrize("frames,train,test", [(1150, 575, 575), (3, 1, 2), (2, 1, 1)])
def test_split_is_chronological(frames, train, test):
    a, b = split_train_test(frames)
    assert (a.start, a.stop) == (0, train)
    assert (b.start, b.stop) == (train, train + test)


def test_split_needs_two_frames():
    with pytest.raises(InvalidArgumentError):
        split_train_test(1)


def test_normalize_constant_and_random_channels():
    rng = np.random.default_rng(5)
    x = np.column_stack([np.full(200, 4.2), rng.normal(3.0, 7.0, 200), rng.uniform(-1, 9, 200)])
    z, stats = normalize_features(x)
    assert not z[:, 0].any()
    assert np.allclose(z[:, 1:].mean(axis=0), 0.0, atol=1e-9)
    assert np.allclose(z[:, 1:].std(axis=0), 1.0, atol=1e-9)
    again, _ = normalize_features(z[:, 1:])
    assert np.allclose(again, z[:, 1:], atol=1e-9)
    with pytest.raises(ShapeError):
        normalize_features(x[:, :2], stats)


def test_dataset_stats_come_from_the_train_half():
    mel, _ = _toy(frames=1150, seed=1)
    profiles = synthesize_profiles(2).profiles
    dataset = prepare_dataset([(mel, profiles)])
    assert dataset.feature_stats.provenance == "train[0:575]"
    raw = np.concatenate([mel, profiles.depths], axis=1)
    assert np.allclose(dataset.feature_stats.mean, raw[:575].mean(axis=0))
    assert dataset.test_inputs[0].shape == (575, 130)
    assert np.array_equal(dataset.test_targets[0], profiles.depths[575:])

    reused = prepare_dataset([(mel, profiles)], dataset.feature_stats, dataset.target_stats)
    assert reused.feature_stats is dataset.feature_stats
    assert np.array_equal(reused.test_inputs[0], dataset.test_inputs[0])


def test_dataset_samples_mask_profiles():
    mel, _ = _toy(frames=40, seed=3)
    dataset = prepare_dataset([(mel, synthesize_profiles(4, StairsSchedule(frames=40)).profiles)] * 2)
    assert dataset.feature_stats.provenance == "train[0:20] x 2 trials"
    masked = dataset.samples("test", mask=False)
    assert len(masked) == 2
    assert all(not s.input[:, PROFILE_SLICE].any() for s in masked)
    assert dataset.samples("train", mask=True)[0].input[:, PROFILE_SLICE].any()
    with pytest.raises(InvalidArgumentError):
        dataset.samples("valid", mask=True)
