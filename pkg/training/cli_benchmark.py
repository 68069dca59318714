import argparse


def parse_args():
    parser = argparse.ArgumentParser(
        formatter_class=argparse.ArgumentDefaultsHelpFormatter
    )
    parser.add_argument("exp_name")
    parser.add_argument(
        "--offline",
        "-o",
        action="store_true",
        help=(
            "Stores the run locally with the option to sync it to wandb after the fact."
        ),
    )
    parser.add_argument(
        "--tags",
        "-t",
        nargs="*",
        default=[],
        help=(
            "Tags to add to the experiment in wandb. Can also be added in post through"
            " the web UI."
        ),
    )

    parser.add_argument(
        "--seeds",
        "-n",
        default=5,
        type=int,
        help="How many synthetic trials (one per seed) to train and score every model on.",
    )
    parser.add_argument(
        "--first-seed",
        default=0,
        type=int,
        help="Seed of the first synthetic trial; the rest follow consecutively.",
    )
    parser.add_argument(
        "--models",
        nargs="+",
        default=["s4d", "gru", "mlp_shallow", "mlp_deep"],
        help="Model kinds to benchmark.",
    )
    parser.add_argument(
        "--epochs",
        "-e",
        default=30,
        type=int,
        help="Training epochs per model and seed.",
    )
    parser.add_argument(
        "--adam-learning-rate",
        "-L",
        default=3e-3,
        type=float,
        help="The learning rate to use in the ADAM optimizer.",
    )
    parser.add_argument(
        "--hidden-dim",
        "-H",
        default=64,
        type=int,
        help="Model width shared by every kind.",
    )
    parser.add_argument(
        "--n-blocks",
        "-B",
        default=2,
        type=int,
        help="Number of S4D blocks.",
    )
    parser.add_argument(
        "--window-length",
        "-w",
        default=64,
        type=int,
        help="Frames per training window.",
    )
    parser.add_argument(
        "--stride",
        "-s",
        default=8,
        type=int,
        help="Frames between the starts of consecutive training windows.",
    )
    parser.add_argument(
        "--batch-size",
        "-b",
        default=2,
        type=int,
        help="Training windows per optimizer step.",
    )
    parser.add_argument(
        "--mask-probability",
        "-m",
        default=1.0,
        type=float,
        help=(
            "Chance that a training window has its profile columns zero-filled."
            " Scoring is audio-only, so the benchmark trains that way by default."
        ),
    )
    parser.add_argument(
        "--tau",
        default=1.0,
        type=float,
        help=(
            "Accuracy threshold in um. The generator's noise-scaled threshold is"
            " always reported alongside it."
        ),
    )
    parser.add_argument(
        "--depth-std-scale",
        default=1.0,
        type=float,
        help="Multiplier on the per-standoff depth spread of the synthetic trials.",
    )

    args = parser.parse_args()

    return args
