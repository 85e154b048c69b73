"""Closed-form references: the beam splitter and the parametric approximation.

For ``k = 1`` the ladder model is a beam splitter with
``n! gamma_n(tau) = cos^(N-n)(tau) sin^n(tau)``.

For ``k = 2``, replacing the pump operator by its coherent amplitude ``alpha``
gives a quadratic Hamiltonian whose output is the squeezed vacuum with
``r = 2 alpha tau``.  Projected onto the subspace ``N`` this yields the
approximate amplitudes ``psi~_n`` and the ``N``-independent coefficients
``gamma~_n`` compared against the exact engine below.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ResourceLimitError
from .models import ModelSpec, beta_sequence
from .series import evaluate_gamma

__all__ = [
    "SqueezeParams",
    "beamsplitter_gamma",
    "squeezed_state_amplitudes",
    "parametric_gamma",
    "parametric_psi",
    "falling_factorial",
    "ParametricErrorReport",
    "parametric_error_report",
    "REPORT_MAX_N",
]

REPORT_MAX_N = 2000


@dataclass(frozen=True)
class SqueezeParams:
    """Coherent pump amplitude ``alpha`` and squeezing ``r = 2 alpha tau``."""

    alpha: float
    r: float

    def __post_init__(self):
        if not self.alpha > 0:
            raise DomainError("alpha must be positive")
        if self.r < 0:
            raise DomainError("r must be non-negative")

    @classmethod
    def from_tau(cls, alpha: float, tau: float) -> "SqueezeParams":
        return cls(alpha, 2.0 * alpha * tau)

    @property
    def tau(self) -> float:
        return self.r / (2.0 * self.alpha)


def beamsplitter_gamma(N: int, n: int, tau: float) -> float:
    if not 0 <= n <= N:
        raise DomainError(f"n={n} outside 0..{N}")
    return math.cos(tau) ** (N - n) * math.sin(tau) ** n / math.factorial(n)


def squeezed_state_amplitudes(r: float, n_max: int) -> np.ndarray:
    """Amplitudes ``<2n|S(r)|0>`` for ``n = 0..n_max`` (odd Fock states vanish)."""
    if n_max < 0:
        raise DomainError("n_max must be non-negative")
    t = math.tanh(r) / 2.0
    n = np.arange(n_max + 1)
    if t == 0.0:
        return np.where(n == 0, 1.0 + 0j, 0j)
    # sqrt(C(2n, n)) via log-gamma to stay finite for large n
    log_binom = np.array([math.lgamma(2 * j + 1) - 2 * math.lgamma(j + 1) for j in n])
    log_mag = -0.5 * math.log(math.cosh(r)) + 0.5 * log_binom + n * math.log(abs(t))
    return np.exp(log_mag) * (-1j * math.copysign(1.0, t)) ** n


def parametric_gamma(n: int, r: float, alpha: float) -> float:
    """``sqrt(sech r) (tanh r / 2 alpha)^n / n!``, independent of the subspace."""
    if alpha <= 0:
        raise DomainError("alpha must be positive")
    if n < 0:
        raise DomainError("n must be non-negative")
    return math.sqrt(1.0 / math.cosh(r)) * (math.tanh(r) / (2.0 * alpha)) ** n / math.factorial(n)


def falling_factorial(N: int, n: int) -> int:
    """``N (N-1) ... (N-n+1)`` as an exact integer."""
    return math.perm(N, n)


def parametric_psi(N: int, n: int, r: float, alpha: float) -> complex:
    """Squeezed-state amplitude projected on ``|N-n, 2n>`` of subspace ``N``."""
    if not 0 <= n <= N:
        raise DomainError(f"n={n} outside 0..{N}")
    if alpha <= 0:
        raise DomainError("alpha must be positive")
    t = math.tanh(r) / (2.0 * alpha)
    if t == 0.0:
        return complex(1.0) if n == 0 else 0j
    log_mag = 0.5 * (
        math.log(falling_factorial(N, n))
        + math.lgamma(2 * n + 1)
        - 2 * math.lgamma(n + 1)
        - math.log(math.cosh(r))
    ) + n * math.log(abs(t))
    return math.exp(log_mag) * (-1j * math.copysign(1.0, t)) ** n


@dataclass(frozen=True)
class ParametricErrorReport:
    """Exact versus parametric coefficients in one or more subspaces around ``alpha^2``."""

    alpha: float
    r: float
    eps: float
    N: int
    n: np.ndarray
    gamma_exact: np.ndarray
    gamma_param: np.ndarray
    rel_err: np.ndarray
    n_c_empirical: int | None
    n_c_prediction: float
    neighbors: dict

    @property
    def validity_scale(self) -> float:
        """``alpha / r^2``, the scale below which the approximation holds."""
        return self.alpha / self.r**2

    def rows(self):
        for i in range(len(self.n)):
            yield int(self.n[i]), self.gamma_exact[i], self.gamma_param[i], self.rel_err[i]


def _relative_errors(N: int, tau: float, alpha: float, r: float, n_max: int, eps_abs: float):
    model = ModelSpec.two_mode(2)
    beta = beta_sequence(model, model.subspace(N, 0))
    state = evaluate_gamma(beta, tau, eps_abs, theta=8.0, fallback="extended")
    n = np.arange(min(N, n_max) + 1)
    exact = state.gamma[n]
    param = np.array([parametric_gamma(int(j), r, alpha) for j in n])
    with np.errstate(divide="ignore", invalid="ignore"):
        rel = np.abs(param - exact) / np.abs(exact)
    return n, exact, param, rel


def parametric_error_report(
    alpha: float,
    r: float,
    eps: float,
    *,
    n_max: int = 20,
    neighbors: bool = False,
    max_N: int = REPORT_MAX_N,
) -> ParametricErrorReport:
    """Relative error of ``gamma~_n`` against the exact ``gamma_n`` at ``N = round(alpha^2)``.

    The empirical crossing is the first ``n`` with relative error above
    ``eps``; ``eps alpha / r^2`` is printed alongside for comparison.  With
    ``neighbors`` the subspaces ``N -/+ ceil(alpha)`` are evaluated too.
    """
    if alpha < 2:
        raise DomainError("alpha must be at least 2")
    if r <= 0:
        raise DomainError("r must be positive")
    if eps <= 0:
        raise DomainError("eps must be positive")
    N = round(alpha * alpha)
    if N > max_N:
        raise ResourceLimitError(
            f"subspace N={N} exceeds the cap {max_N}; lower alpha below {math.sqrt(max_N):.1f}"
        )
    tau = r / (2.0 * alpha)
    # absolute psi accuracy fine enough for relative errors of small amplitudes
    eps_abs = 1e-30
    n, exact, param, rel = _relative_errors(N, tau, alpha, r, n_max, eps_abs)
    over = np.nonzero(rel > eps)[0]
    n_c = int(n[over[0]]) if len(over) else None
    extra = {}
    if neighbors:
        width = math.ceil(alpha)
        for M in (N - width, N + width):
            if 0 < M <= max_N:
                extra[M] = _relative_errors(M, tau, alpha, r, n_max, eps_abs)[3]
    return ParametricErrorReport(
        alpha, r, eps, N, n, exact, param, rel, n_c, eps * alpha / r**2, extra
    )
