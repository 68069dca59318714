from pathlib import Path

import cli_benchmark
from jetssm.data import GeneratorConfig
from jetssm.nn import ModelConfig
from jetssm.render import write_frame
from jetssm.train import TrainConfig, make_logger
from jetssm.train.benchmark import comparison_table, run_benchmark
from torchrl._utils import logger as torchrl_logger

# Train every model kind on one synthetic stairs trial per seed and compare
# them on the held-out second half of each trial

args = cli_benchmark.parse_args()

model_config = ModelConfig(
    hidden_dim=args.hidden_dim,
    n_blocks=args.n_blocks,
    n_state=32,
    dropout=0.0,
    mlp_hidden=args.hidden_dim,
)
train_config = TrainConfig(
    epochs=args.epochs,
    learning_rate=args.adam_learning_rate,
    window_length=args.window_length,
    stride=args.stride,
    batch_size=args.batch_size,
    mask_probability=args.mask_probability,
)
generator = GeneratorConfig(depth_std_scale=args.depth_std_scale)

path = Path("./output") / args.exp_name
path.mkdir(parents=True, exist_ok=True)

logger = make_logger(
    "auto",
    args.exp_name,
    log_dir=str(path),
    config=vars(args),
    offline=args.offline,
    tags=["benchmark"] + args.tags,
)

seeds = range(args.first_seed, args.first_seed + args.seeds)
results = run_benchmark(
    seeds,
    args.models,
    model_config,
    train_config,
    generator,
    tau_um=args.tau,
    logger=logger,
    progress=True,
)

write_frame(results, path / "benchmark.csv")
table = comparison_table(results)
write_frame(table, path / "comparison.csv")

torchrl_logger.info(
    f"median accuracy over {args.seeds} seeds (tau {args.tau:g} um / synthetic tau"
    f" {results.attrs['synthetic_tau_um']:.1f} um):\n{table.to_string(index=False)}"
)
if results.attrs["ordering_ok"] is False:
    torchrl_logger.warning(
        "s4d did not beat the shallow MLP on these seeds; see benchmark.csv"
    )
