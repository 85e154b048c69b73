"""Exact state evolution for ladder-operator models of interacting bosons."""

from .errors import DomainError, LadderBosonError, NumericalFailure, ResourceLimitError
from .models import (
    BetaSequence,
    ModelSpec,
    SubspaceIndex,
    beta_multi_mode,
    beta_sequence,
    beta_two_mode,
    enumerate_subspaces,
    rescaled_beta,
)
from .pump import ObservableReport, PumpEnsemble, evolve_ensemble, fidelity_vs_parametric, truncate_pump
from .reference import (
    SqueezeParams,
    beamsplitter_gamma,
    parametric_error_report,
    parametric_gamma,
    parametric_psi,
    squeezed_state_amplitudes,
)
from .series import (
    GTable,
    SubspaceState,
    build_gtable,
    evaluate_gamma,
    evaluate_gamma_grid,
    gamma_to_psi,
    ladder_power_coefficients,
)

__version__ = "0.1.0"

__all__ = [
    "DomainError",
    "LadderBosonError",
    "NumericalFailure",
    "ResourceLimitError",
    "BetaSequence",
    "ModelSpec",
    "SubspaceIndex",
    "beta_multi_mode",
    "beta_sequence",
    "beta_two_mode",
    "enumerate_subspaces",
    "rescaled_beta",
    "ObservableReport",
    "PumpEnsemble",
    "evolve_ensemble",
    "fidelity_vs_parametric",
    "truncate_pump",
    "SqueezeParams",
    "beamsplitter_gamma",
    "parametric_error_report",
    "parametric_gamma",
    "parametric_psi",
    "squeezed_state_amplitudes",
    "GTable",
    "SubspaceState",
    "build_gtable",
    "evaluate_gamma",
    "evaluate_gamma_grid",
    "gamma_to_psi",
    "ladder_power_coefficients",
]
