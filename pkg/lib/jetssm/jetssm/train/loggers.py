from pathlib import Path

from torchrl._utils import logger as torchrl_logger

from jetssm.errors import InvalidArgumentError

LOGGER_KINDS = ("none", "csv", "wandb", "auto")


def make_logger(kind: str, exp_name: str, log_dir="./output", config: dict | None = None, offline=False,
                tags=()):
    """A torchrl metric logger: wandb when asked for (or ``auto``) and importable, CSV otherwise."""
    if kind == "none":
        return None
    if kind not in LOGGER_KINDS:
        raise InvalidArgumentError(f"logger must be one of {LOGGER_KINDS}, got {kind!r}")
    config = dict(config or {})
    if kind in ("wandb", "auto"):
        try:
            torchrl_logger.info(
                "Attempting to integrate with wandb; dismiss the following messages if you have not set it up."
            )
            from torchrl.record import WandbLogger

            return WandbLogger(
                project="jetssm",
                exp_name=exp_name,
                offline=offline,
                tags=list(tags),
                config=config,
            )
        except Exception:
            torchrl_logger.warning("wandb unavailable; falling back to CSV logging.")
    from torchrl.record import CSVLogger

    path = Path(log_dir)
    path.mkdir(parents=True, exist_ok=True)
    logger = CSVLogger(exp_name=exp_name, log_dir=str(path))
    logger.log_hparams(config)
    return logger
