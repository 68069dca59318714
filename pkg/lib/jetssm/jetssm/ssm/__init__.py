from jetssm.ssm.kernel import (
    DiagonalSSM,
    DiscreteSSM,
    Discretization,
    Kernel,
    causal_conv,
    continuous_kernel,
    discretize,
    discretize_bilinear,
    discretize_zoh,
    recurrent_step,
    vandermonde_kernel,
    zero_state,
)

__all__ = [
    "DiagonalSSM",
    "DiscreteSSM",
    "Discretization",
    "Kernel",
    "causal_conv",
    "continuous_kernel",
    "discretize",
    "discretize_bilinear",
    "discretize_zoh",
    "recurrent_step",
    "vandermonde_kernel",
    "zero_state",
]
