"""Coherent-pump ensembles: Poisson-weighted sums over invariant subspaces.

A coherent pump with real amplitude ``alpha`` and a vacuum signal decomposes
into the top states of the subspaces ``(M, 0, .., 0)`` with Poisson weights
``P_M = exp(-alpha^2) alpha^(2M) / M!``.  Each subspace evolves on its own;
observables are weighted sums over the retained window.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ResourceLimitError
from .models import ModelSpec, beta_sequence
from .reference import parametric_psi
from .series import DEFAULT_THETA, SubspaceState, evaluate_gamma

__all__ = [
    "DEFAULT_MAX_N",
    "PumpEnsemble",
    "ObservableReport",
    "max_subspace_index",
    "poisson_log_weight",
    "truncate_pump",
    "evolve_ensemble",
    "fidelity_vs_parametric",
]

DEFAULT_MAX_N = 2000
_ENV_CAP = "LADDERBOSON_MAX_DIM"


def max_subspace_index(override: int | None = None) -> int:
    """Largest retained pump number; an explicit value beats the environment.

    The environment variable holds a dimension, so the cap is one less.
    """
    if override is not None:
        return int(override)
    env = os.environ.get(_ENV_CAP)
    if env:
        try:
            return int(env) - 1
        except ValueError:
            raise DomainError(f"{_ENV_CAP} must be an integer, got {env!r}") from None
    return DEFAULT_MAX_N


def poisson_log_weight(alpha: float, M: int) -> float:
    if M == 0:
        return -alpha * alpha
    return -alpha * alpha + 2 * M * math.log(alpha) - math.lgamma(M + 1)


@dataclass(frozen=True)
class PumpEnsemble:
    """Retained pump photon numbers ``M`` with their Poisson weights."""

    alpha: float
    pump_numbers: tuple[int, ...]
    weights: tuple[float, ...]
    weight_eps: float

    @property
    def mass(self) -> float:
        return math.fsum(self.weights)

    @property
    def mean_photons(self) -> float:
        return math.fsum(M * w for M, w in zip(self.pump_numbers, self.weights))

    def subspaces(self, model: ModelSpec):
        """Vacuum-signal subspace labels ``(M, 0, .., 0)`` paired with weights."""
        return [(model.subspace(M, 0), w) for M, w in zip(self.pump_numbers, self.weights)]


def truncate_pump(alpha: float, weight_eps: float, *, max_N: int | None = None) -> PumpEnsemble:
    """Smallest contiguous window around ``floor(alpha^2)`` holding mass ``1 - weight_eps``.

    The window grows one photon number at a time toward whichever neighbour
    carries more weight.
    """
    if not alpha > 0 or not math.isfinite(alpha):
        raise DomainError("alpha must be positive")
    if not 0 < weight_eps < 1:
        raise DomainError("weight_eps must lie strictly between 0 and 1")
    cap = max_subspace_index(max_N)
    lo = hi = math.floor(alpha * alpha)
    if lo > cap:
        raise ResourceLimitError(f"mode N={lo} already exceeds the cap N <= {cap}")

    def weight(M):
        return math.exp(poisson_log_weight(alpha, M))

    kept = {lo: weight(lo)}
    target = 1.0 - weight_eps
    while math.fsum(kept.values()) < target:
        left = weight(lo - 1) if lo > 0 else -1.0
        right = weight(hi + 1)
        if right >= left:
            hi += 1
            if hi > cap:
                raise ResourceLimitError(
                    f"window needs N={hi} beyond the cap {cap}; lower alpha or raise weight_eps"
                )
            kept[hi] = right
        else:
            lo -= 1
            kept[lo] = left
        if left <= 0.0 and right == 0.0:
            # everything further out underflows; the mass is as large as doubles allow
            break
    Ms = tuple(range(lo, hi + 1))
    return PumpEnsemble(float(alpha), Ms, tuple(kept[M] for M in Ms), float(weight_eps))


@dataclass(frozen=True)
class ObservableReport:
    """Weighted observables of an evolved ensemble.

    ``norm`` is the total retained probability ``sum_M P_M <psi|psi>``;
    ``states`` maps each pump number to its evolved subspace.
    """

    tau: float
    signal_mean: tuple[float, ...]
    pump_mean: float
    norm: float
    retained_mass: float
    states: dict
    fidelity_vs_parametric: float | None = None

    def conserved_total(self, model: ModelSpec) -> float:
        """``pump + (m / k_s) * signal_s``, averaged over signal modes.

        Each event removes ``m`` pump photons and adds ``k_s`` photons to mode
        ``s``, so every mode gives the same value.
        """
        vals = [
            self.pump_mean + model.m / k * s
            for k, s in zip(model.signal_powers, self.signal_mean)
        ]
        return math.fsum(vals) / len(vals)


def _evolve_one(args) -> SubspaceState:
    model, M, tau, eps, theta, fallback = args
    beta = beta_sequence(model, model.subspace(M, 0))
    return evaluate_gamma(beta, tau, eps, theta=theta, fallback=fallback)


def evolve_ensemble(
    ensemble: PumpEnsemble,
    model: ModelSpec,
    tau: float,
    eps: float = 1e-12,
    *,
    theta: float | None = DEFAULT_THETA,
    fallback: str = "propagator",
    workers: int | None = None,
) -> ObservableReport:
    """Evolve every retained subspace and reduce to weighted observables.

    With ``workers > 1`` subspaces run in separate processes; results are
    gathered and summed in pump-number order, so the output does not depend
    on scheduling.
    """
    jobs = [(model, M, tau, eps, theta, fallback) for M in ensemble.pump_numbers]
    if workers and workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            states = list(pool.map(_evolve_one, jobs))
    else:
        states = [_evolve_one(j) for j in jobs]

    signal = [[] for _ in model.signal_powers]
    pump, norm = [], []
    for M, w, st in zip(ensemble.pump_numbers, ensemble.weights, states):
        pop = st.populations
        n = np.arange(len(pop))
        norm.append(w * math.fsum(pop))
        pump.append(w * math.fsum(pop * (M - model.m * n)))
        for s, k in enumerate(model.signal_powers):
            signal[s].append(w * math.fsum(pop * (k * n)))
    return ObservableReport(
        tau=float(tau),
        signal_mean=tuple(math.fsum(x) for x in signal),
        pump_mean=math.fsum(pump),
        norm=math.fsum(norm),
        retained_mass=ensemble.mass,
        states=dict(zip(ensemble.pump_numbers, states)),
    )


def fidelity_vs_parametric(
    ensemble: PumpEnsemble,
    tau: float,
    eps: float = 1e-12,
    *,
    model: ModelSpec | None = None,
    report: ObservableReport | None = None,
) -> float:
    """``|sum_N P_N <psi~^(N)|psi^(N)>|^2`` against the squeezed-state projection.

    Only defined for degenerate two-photon down-conversion (``m = 1``, one
    signal mode with ``k = 2``).
    """
    model = ModelSpec.two_mode(2) if model is None else model
    if model.m != 1 or model.signal_powers != (2,):
        raise DomainError("the parametric comparison needs m = 1 and a single k = 2 signal")
    if report is None:
        report = evolve_ensemble(ensemble, model, tau, eps)
    r = 2.0 * ensemble.alpha * tau
    terms = []
    for N, w in zip(ensemble.pump_numbers, ensemble.weights):
        psi = report.states[N].psi
        approx = np.array([parametric_psi(N, n, r, ensemble.alpha) for n in range(N + 1)])
        terms.append(w * np.vdot(approx, psi))
    overlap = complex(math.fsum(t.real for t in terms), math.fsum(t.imag for t in terms))
    return abs(overlap) ** 2
