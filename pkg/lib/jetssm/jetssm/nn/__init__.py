from jetssm.nn.config import ModelConfig
from jetssm.nn.registry import as_module, build_model, model_kinds, register
from jetssm.nn.tape import GradientTape, backward
from jetssm.nn.tensor import SequenceTensor

register(
    kind="s4d",
    entry_point="jetssm.nn.s4d:S4DRegressor",
)

register(
    kind="gru",
    entry_point="jetssm.nn.baselines:RecurrentRegressor",
    cell="gru",
)

register(
    kind="lstm",
    entry_point="jetssm.nn.baselines:RecurrentRegressor",
    cell="lstm",
)

register(
    kind="mlp_shallow",
    entry_point="jetssm.nn.baselines:MLPRegressor",
    depth=1,
)

register(
    kind="mlp_deep",
    entry_point="jetssm.nn.baselines:MLPRegressor",
)

TABLE_KINDS = ("s4d", "gru", "mlp_shallow", "mlp_deep")

__all__ = [
    "GradientTape",
    "ModelConfig",
    "SequenceTensor",
    "TABLE_KINDS",
    "as_module",
    "backward",
    "build_model",
    "model_kinds",
    "register",
]
