from collections.abc import Mapping

import torch

from jetssm.errors import TapeStateError


class GradientTape:
    """Records a forward pass over a fixed set of named parameters.

    >>> with GradientTape(model) as tape:
    ...     loss = mse_loss(model(x), y)
    >>> grads = backward(tape, loss)

    A tape is good for exactly one ``backward``.
    """

    def __init__(self, params):
        if isinstance(params, torch.nn.Module):
            params = dict(params.named_parameters())
        elif not isinstance(params, Mapping):
            params = {str(i): p for i, p in enumerate(params)}
        self.params = dict(params)
        self.recorded = False
        self.consumed = False
        self._grad_mode = None

    def __enter__(self):
        for name, p in self.params.items():
            if not p.requires_grad:
                raise TapeStateError(f"parameter {name!r} does not require grad")
        self._grad_mode = torch.enable_grad()
        self._grad_mode.__enter__()
        return self

    def __exit__(self, *exc):
        self._grad_mode.__exit__(*exc)
        self.recorded = exc[0] is None
        return False


def backward(tape: GradientTape, loss: torch.Tensor) -> dict[str, torch.Tensor]:
    """Reverse-mode gradients of ``loss`` for every taped parameter.

    Parameters the loss does not depend on get an exact zero gradient.
    """
    if tape.consumed:
        raise TapeStateError("tape already consumed by a previous backward")
    if not tape.recorded or not isinstance(loss, torch.Tensor) or not loss.requires_grad:
        raise TapeStateError("backward called without a recorded forward pass")
    if loss.numel() != 1:
        raise TapeStateError(f"loss must be a scalar, got shape {tuple(loss.shape)}")
    names = list(tape.params)
    grads = torch.autograd.grad(
        loss,
        [tape.params[name] for name in names],
        allow_unused=True,
        materialize_grads=True,
    )
    tape.consumed = True
    return dict(zip(names, grads))
