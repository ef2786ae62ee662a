"""Numerics lab for feature learning in shallow Bayesian networks.

Four model routes over the same sparse boolean / single-index tasks:

- ``network``: width-N ReLU network sampled by full-batch Langevin dynamics.
- ``meanfield``: single-particle cavity solver, optionally with learned
  per-coordinate input precisions (ARD).
- ``nngp``: fixed-kernel Gaussian-process regression at infinite width.
- ``theory``: closed-form order-parameter fixed point and its transition
  threshold.

``sweep`` ties the routes together behind one deterministic grid runner and
CSV schema; ``diagnostics`` holds the shared observables.
"""

from .errors import (
    ConfigError,
    DivergenceError,
    IllConditionedError,
    InputDomainError,
    ParityLabError,
    ResourceError,
    RunTimeout,
)
from .rngs import stream, stream_key
from .tasks import (
    Dataset,
    Hyperparams,
    TaskSpec,
    gen_parity_dataset,
    gen_single_index_dataset,
    hermite_he,
    index_teacher,
    walsh_eval,
    walsh_eval_batch,
)
from .theory import (
    OnsetInputs,
    TheoryConstants,
    a_star,
    brute_constants,
    kappa_c,
    parity_constants,
    scaling_table,
    solve_scalar_fp,
)

__all__ = [
    "ConfigError",
    "DivergenceError",
    "IllConditionedError",
    "InputDomainError",
    "ParityLabError",
    "ResourceError",
    "RunTimeout",
    "stream",
    "stream_key",
    "Dataset",
    "Hyperparams",
    "TaskSpec",
    "gen_parity_dataset",
    "gen_single_index_dataset",
    "hermite_he",
    "index_teacher",
    "walsh_eval",
    "walsh_eval_batch",
    "OnsetInputs",
    "TheoryConstants",
    "a_star",
    "brute_constants",
    "kappa_c",
    "parity_constants",
    "scaling_table",
    "solve_scalar_fp",
    "__version__",
]

__version__ = "0.1.0"
