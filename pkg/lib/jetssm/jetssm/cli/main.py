import argparse
import sys

from torchrl._utils import logger as torchrl_logger

from jetssm.cli import commands
from jetssm.errors import (
    CheckpointIncompatibleError,
    InvalidArgumentError,
    ProfileParseError,
    UnsupportedFormatError,
    UnsupportedModeError,
)

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_IO = 3
EXIT_INCOMPATIBLE = 4

# Flags that feed a RunConfig section use SUPPRESS so that an absent flag never
# shadows a value from --config.
CONFIG_FLAG = {"default": argparse.SUPPRESS}


def _add_common(parser):
    parser.add_argument(
        "--config",
        "-c",
        default=None,
        help=(
            "JSON run config with optional sections schedule, generator, model, train, search"
            " and tau_um. Command-line flags take precedence over it."
        ),
    )
    parser.add_argument(
        "--seed",
        "-s",
        type=int,
        default=None,
        help="Master seed. Falls back to $JETSSM_SEED, then to a generated (and logged) seed.",
    )


def _add_schedule_args(parser):
    parser.add_argument(
        "--standoffs",
        nargs="+",
        type=float,
        dest="schedule.standoffs_mm",
        help="Standoff distances (mm) of the stairs trajectory, in visiting order. Default: 2 3 4 5 6 7.",
        **CONFIG_FLAG,
    )
    parser.add_argument(
        "--frames",
        "-F",
        type=int,
        dest="schedule.frames",
        help="Profile frames per trial. Default: 1150.",
        **CONFIG_FLAG,
    )
    parser.add_argument(
        "--depth-std-scale",
        type=float,
        dest="generator.depth_std_scale",
        help="Multiplier on the per-standoff depth spread of the generator. Default: 1.0.",
        **CONFIG_FLAG,
    )
    parser.add_argument(
        "--noise-um",
        type=float,
        dest="generator.noise_um",
        help="Std of the correlated per-column profile noise (um). Default: 2.0.",
        **CONFIG_FLAG,
    )


def _add_model_args(parser):
    parser.add_argument(
        "--hidden-dim",
        "-H",
        type=int,
        dest="model.hidden_dim",
        help="Model width (S4D channels, GRU/LSTM hidden size). Default: 256.",
        **CONFIG_FLAG,
    )
    parser.add_argument(
        "--n-blocks",
        "-B",
        type=int,
        dest="model.n_blocks",
        help="Number of stacked S4D blocks. Default: 4.",
        **CONFIG_FLAG,
    )
    parser.add_argument(
        "--n-state",
        "-N",
        type=int,
        dest="model.n_state",
        help="State size per S4D channel. Default: 64.",
        **CONFIG_FLAG,
    )
    parser.add_argument(
        "--discretization",
        choices=["zoh", "bilinear"],
        dest="model.discretization",
        help="Continuous-to-discrete map of the S4D layers. Default: zoh.",
        **CONFIG_FLAG,
    )
    parser.add_argument(
        "--norm",
        choices=["batch", "layer"],
        dest="model.norm_kind",
        help="Normalization inside each S4D block. Default: batch.",
        **CONFIG_FLAG,
    )
    parser.add_argument(
        "--dtype",
        choices=["float64", "float32"],
        dest="model.dtype",
        help="Parameter dtype; kernel math always runs in float64. Default: float64.",
        **CONFIG_FLAG,
    )


def _add_train_args(parser):
    parser.add_argument(
        "--epochs",
        "-e",
        type=int,
        dest="train.epochs",
        help="Passes over the training windows. Default: 30.",
        **CONFIG_FLAG,
    )
    parser.add_argument(
        "--adam-learning-rate",
        "-L",
        type=float,
        dest="train.learning_rate",
        help="The learning rate to use in the ADAM optimizer. Default: 1e-3.",
        **CONFIG_FLAG,
    )
    parser.add_argument(
        "--dropout",
        type=float,
        dest="train.dropout",
        help="Dropout probability, overriding the model config.",
        **CONFIG_FLAG,
    )
    parser.add_argument(
        "--window-length",
        "-w",
        type=int,
        dest="train.window_length",
        help="Frames per training window. Default: 128.",
        **CONFIG_FLAG,
    )
    parser.add_argument(
        "--stride",
        type=int,
        dest="train.stride",
        help="Frames between consecutive window starts. Default: 64.",
        **CONFIG_FLAG,
    )
    parser.add_argument(
        "--batch-size",
        "-b",
        type=int,
        dest="train.batch_size",
        help="Windows per optimizer step. Default: 4.",
        **CONFIG_FLAG,
    )
    _add_mask_probability(parser)


def _add_mask_probability(parser):
    parser.add_argument(
        "--mask-probability",
        type=float,
        dest="train.mask_probability",
        help=(
            "Probability that a training window has its profile columns zero-filled, so the model"
            " also learns the audio-only inference regime. Training sees the profiles when this is 0."
            " Default: 0.0."
        ),
        **CONFIG_FLAG,
    )


def _add_tau(parser):
    parser.add_argument(
        "--tau",
        "-t",
        type=float,
        dest="run.tau_um",
        help="Accuracy threshold in um. Default: 1.0.",
        **CONFIG_FLAG,
    )


def _add_logger(parser):
    parser.add_argument(
        "--logger",
        choices=["none", "csv", "wandb", "auto"],
        default="csv",
        help="Metric logger. 'auto' tries wandb and falls back to CSV.",
    )
    parser.add_argument(
        "--exp-name",
        default=None,
        help="Experiment name for the metric logger; derived from the model kind if omitted.",
    )
    parser.add_argument(
        "--offline",
        action="store_true",
        help="Stores the run locally with the option to sync it to wandb after the fact.",
    )
    parser.add_argument(
        "--tags",
        nargs="*",
        default=[],
        help="Tags to add to the experiment in wandb.",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="jetssm",
        description="Acoustic waterjet erosion-profile regression with diagonal state-space models.",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def subcommand(name, help_text):
        p = sub.add_parser(name, help=help_text, description=help_text,
                           formatter_class=argparse.ArgumentDefaultsHelpFormatter)
        _add_common(p)
        return p

    p = subcommand("synth", "Generate synthetic stairs-trajectory trials (WAV, profile CSV, metadata JSON).")
    p.add_argument("--out", "-o", default="data", help="Output directory.")
    p.add_argument("--trials", "-n", type=int, default=1, help="Trials to generate; trial i uses seed + i.")
    _add_schedule_args(p)
    p.set_defaults(handler=commands.cmd_synth)

    p = subcommand("featurize", "Write the timeline-aligned log-mel matrix of a WAV as CSV.")
    p.add_argument("wav", help="Input WAV file.")
    p.add_argument("--out", "-o", default=None, help="Output CSV; defaults to <wav>.mel.csv.")
    p.add_argument(
        "--frames",
        "-F",
        type=int,
        default=None,
        help="Timeline frames; read from the trial metadata JSON next to the WAV if omitted, else 1150.",
    )
    p.set_defaults(handler=commands.cmd_featurize)

    p = subcommand("train", "Train one model kind and write its checkpoint and loss history.")
    p.add_argument("data", help="Trial directory, or a single trial's WAV or CSV.")
    p.add_argument("--model", "-m", default="s4d", help="Model kind (s4d, gru, lstm, mlp_shallow, mlp_deep).")
    p.add_argument("--out", "-o", default="runs/train", help="Output directory.")
    _add_model_args(p)
    _add_train_args(p)
    _add_logger(p)
    p.set_defaults(handler=commands.cmd_train)

    p = subcommand("eval", "Score a checkpoint on the test half, or train and compare every model kind.")
    p.add_argument("data", help="Trial directory, or a single trial's WAV or CSV.")
    p.add_argument("--checkpoint", "-k", default=None, help="Checkpoint to evaluate (not needed with --compare).")
    p.add_argument("--out", "-o", default="runs/eval", help="Output directory for reports and predictions.")
    p.add_argument(
        "--mask",
        action="store_true",
        help="Keep the profile columns visible at evaluation (default zero-fills them).",
    )
    p.add_argument(
        "--full-timeline",
        action="store_true",
        help=(
            "Write predictions for every frame from 0, run from zero state over the whole trial as"
            " 'stream' does. The report still scores the test half only."
        ),
    )
    p.add_argument(
        "--compare",
        action="store_true",
        help="Train every kind in --models with the run config and write a comparison CSV.",
    )
    p.add_argument(
        "--models",
        nargs="+",
        default=["s4d", "gru", "mlp_shallow", "mlp_deep"],
        help="Model kinds for --compare.",
    )
    _add_tau(p)
    _add_model_args(p)
    _add_train_args(p)
    p.set_defaults(handler=commands.cmd_eval)

    p = subcommand(
        "stream",
        "Predict profile rows frame by frame from a WAV, as CSV on standard output. Rows cover the whole"
        " timeline from frame 0; compare them with 'eval --full-timeline' predictions.",
    )
    p.add_argument("checkpoint", help="S4D checkpoint.")
    p.add_argument("wav", help="Input WAV file.")
    p.add_argument(
        "--frames",
        "-F",
        type=int,
        default=None,
        help="Timeline frames; read from the trial metadata JSON next to the WAV if omitted, else 1150.",
    )
    p.add_argument("--block-size", type=int, default=4096, help="Samples read per block.")
    p.set_defaults(handler=commands.cmd_stream)

    p = subcommand("search", "Seeded random hyperparameter search; writes a leaderboard and the best checkpoint.")
    p.add_argument("data", help="Trial directory, or a single trial's WAV or CSV.")
    p.add_argument("--out", "-o", default="runs/search", help="Output directory.")
    p.add_argument("--model", "-m", dest="search.model_kind", help="Model kind to tune. Default: s4d.",
                   **CONFIG_FLAG)
    p.add_argument("--trials", "-n", type=int, dest="search.n_trials", help="Trial budget. Default: 50.",
                   **CONFIG_FLAG)
    p.add_argument("--epochs", "-e", type=int, dest="search.epochs", help="Epochs per trial. Default: 30.",
                   **CONFIG_FLAG)
    p.add_argument("--workers", "-j", type=int, default=4, help="Trials run in parallel worker processes.")
    _add_mask_probability(p)
    _add_tau(p)
    p.set_defaults(handler=commands.cmd_search)

    p = subcommand("plot", "Render depth-vs-standoff, profile-overlay and loss-curve figures (SVG + CSV).")
    p.add_argument("--data", "-d", default=None, help="Trial directory for the depth-vs-standoff chart.")
    p.add_argument(
        "--predictions",
        "-p",
        default=None,
        help="Predictions directory written by 'eval' (truth.csv plus one CSV per model) for the overlay.",
    )
    p.add_argument("--histories", nargs="*", default=[], help="history.json files written by 'train'.")
    p.add_argument("--column", type=int, default=None, help="Profile column for the overlay; defaults to the middle.")
    p.add_argument(
        "--sections",
        type=int,
        default=5,
        help="Equispaced frames sampled per dwell for the depth statistics; 0 uses every dwell frame.",
    )
    p.add_argument("--out", "-o", default="runs/plots", help="Output directory.")
    p.set_defaults(handler=commands.cmd_plot)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.handler(args) or EXIT_OK
    except (CheckpointIncompatibleError, UnsupportedModeError) as e:
        torchrl_logger.error(str(e))
        return EXIT_INCOMPATIBLE
    except (UnsupportedFormatError, ProfileParseError, OSError) as e:
        torchrl_logger.error(str(e))
        return EXIT_IO
    except InvalidArgumentError as e:
        torchrl_logger.error(str(e))
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
