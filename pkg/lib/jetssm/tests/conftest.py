import pytest

from jetssm.data import GeneratorConfig, StairsSchedule, synthesize_trial
from jetssm.data.pipeline import dataset_from_trials, write_trial
from jetssm.nn import ModelConfig
from jetssm.train import TrainConfig

TINY_SCHEDULE = StairsSchedule(standoffs_mm=(3.0, 5.0), frames=120)
TINY_MODEL = ModelConfig(hidden_dim=8, n_blocks=1, n_state=8, dropout=0.0, mlp_hidden=16, mlp_depth=2)
TINY_TRAIN = TrainConfig(epochs=3, learning_rate=1e-2, window_length=16, stride=8, batch_size=4)


@pytest.fixture(scope="session")
def tiny_trial():
    return synthesize_trial(0, TINY_SCHEDULE)


@pytest.fixture(scope="session")
def tiny_dataset(tiny_trial):
    return dataset_from_trials([tiny_trial])


@pytest.fixture(scope="session")
def tiny_trial_dir(tmp_path_factory, tiny_trial):
    directory = tmp_path_factory.mktemp("trials")
    write_trial(directory, tiny_trial, TINY_SCHEDULE, GeneratorConfig())
    return directory
