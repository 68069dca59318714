from jetssm.data.profiles import (
    DEPTH_ANCHORS,
    DepthCurve,
    ErosionProfileSet,
    depth_curve_lookup,
    load_profiles_csv,
    segment_depth_statistics,
    write_profiles_csv,
)
from jetssm.data.samples import (
    AlignedSample,
    Dataset,
    NormStats,
    assemble_sample,
    normalize_features,
    prepare_dataset,
    split_train_test,
)
from jetssm.data.schedule import StairsSchedule
from jetssm.data.synth import GeneratorConfig, Trial, synthesize_profiles, synthesize_trial

__all__ = [
    "DEPTH_ANCHORS",
    "AlignedSample",
    "Dataset",
    "DepthCurve",
    "ErosionProfileSet",
    "GeneratorConfig",
    "NormStats",
    "StairsSchedule",
    "Trial",
    "assemble_sample",
    "depth_curve_lookup",
    "load_profiles_csv",
    "normalize_features",
    "prepare_dataset",
    "segment_depth_statistics",
    "split_train_test",
    "synthesize_profiles",
    "synthesize_trial",
    "write_profiles_csv",
]
