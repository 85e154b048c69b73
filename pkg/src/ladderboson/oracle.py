"""Independent reference evaluators for the series engine.

Nothing here touches the g-coefficient tables:

* :func:`propagator_psi` exponentiates the tridiagonal Hamiltonian through
  its eigendecomposition;
* :func:`integrate_gamma_ode` integrates the amplitude equations
  ``d gamma_n / d tau = gamma_{n-1} - beta_n gamma_{n+1}`` with classical RK4;
* :func:`brute_force_fock` rebuilds the ladder operator from raw boson
  operators on a truncated Fock space and evolves there;
* :func:`operator_power_coefficients` applies ``(A + A^dag)^m`` exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.linalg
import scipy.sparse as sp
from scipy.sparse.linalg import expm_multiply

from .errors import DomainError, NumericalFailure, ResourceLimitError
from .models import BetaSequence, ModelSpec, SubspaceIndex, beta_sequence

__all__ = [
    "TridiagonalHamiltonian",
    "propagator_psi",
    "integrate_gamma_ode",
    "integrate_gamma_ode_many",
    "default_ode_step",
    "brute_force_fock",
    "operator_power_coefficients",
    "FOCK_DIM_CAP",
]

FOCK_DIM_CAP = 10_000


@dataclass(frozen=True)
class TridiagonalHamiltonian:
    """Matrix of ``A + A^dag`` in one subspace: zero diagonal, ``sqrt(beta_n)`` off it."""

    beta: BetaSequence

    @property
    def dimension(self) -> int:
        return len(self.beta)

    @property
    def off_diagonal(self) -> np.ndarray:
        return np.sqrt(np.array(self.beta.values[:-1], dtype=float))

    def dense(self) -> np.ndarray:
        e = self.off_diagonal
        return np.diag(e, 1) + np.diag(e, -1)


def propagator_psi(beta: BetaSequence, tau: float) -> np.ndarray:
    """``exp(-i tau H) e_0`` from the symmetric tridiagonal eigendecomposition."""
    if not math.isfinite(tau):
        raise DomainError("tau must be finite")
    size = len(beta)
    if size == 1:
        return np.ones(1, dtype=complex)
    h = TridiagonalHamiltonian(beta)
    try:
        w, v = scipy.linalg.eigh_tridiagonal(np.zeros(size), h.off_diagonal)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise NumericalFailure(f"eigensolver failed: {exc}") from exc
    return v @ (np.exp(-1j * tau * w) * v[0])


def default_ode_step(beta: BetaSequence) -> float:
    """``1e-4 * min(1, 1 / sqrt(max beta))``."""
    top = max(beta.values)
    return 1e-4 * min(1.0, 1.0 / math.sqrt(top)) if top > 0 else 1e-4


def _rk4(b: np.ndarray, lower: np.ndarray, times: Sequence[float], step: float) -> np.ndarray:
    """Fixed-step RK4 for a batch of padded gamma systems.

    ``b[i, n]`` is ``beta_n`` (zero past ``N_i``) and ``lower[i, n]`` is 1 where
    ``gamma_{n-1}`` feeds ``gamma_n``.  Returns ``gamma`` at every time.
    """
    g = np.zeros_like(b)
    g[:, 0] = 1.0
    up = b[:, :-1]
    low = lower[:, 1:]

    def rhs(y):
        d = np.zeros_like(y)
        d[:, 1:] = low * y[:, :-1]
        d[:, :-1] -= up * y[:, 1:]
        return d

    out = np.empty((len(times),) + b.shape)
    t = 0.0
    h2 = step / 2.0
    for i, target in enumerate(times):
        # floor, so a partial step never overshoots the target
        nsteps = int((target - t) / step + 1e-9)
        for _ in range(nsteps):
            k1 = rhs(g)
            k2 = rhs(g + h2 * k1)
            k3 = rhs(g + h2 * k2)
            k4 = rhs(g + step * k3)
            g = g + (step / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        t += nsteps * step
        rest = target - t
        if rest > 1e-15:
            # land exactly on the requested time
            k1 = rhs(g)
            k2 = rhs(g + rest / 2 * k1)
            k3 = rhs(g + rest / 2 * k2)
            k4 = rhs(g + rest * k3)
            g = g + (rest / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            t = target
        out[i] = g
    return out


def _check_times(taus: Sequence[float], step: float) -> list[float]:
    if step <= 0:
        raise DomainError("step must be positive")
    taus = [float(t) for t in taus]
    if any(t < 0 for t in taus):
        raise DomainError("tau must be non-negative")
    if any(b < a for a, b in zip(taus, taus[1:])):
        raise DomainError("times must be non-decreasing")
    return taus


def integrate_gamma_ode(
    beta: BetaSequence, tau: float | Sequence[float], step: float | None = None
) -> np.ndarray:
    """Integrate the amplitude equations from ``gamma(0) = e_0``.

    ``tau`` may be a scalar or an increasing sequence of output times; the
    result then has one row per time.
    """
    if step is None:
        step = default_ode_step(beta)
    scalar = np.ndim(tau) == 0
    times = _check_times([tau] if scalar else tau, step)
    out = integrate_gamma_ode_many([beta], times, step)[0]
    return out[0] if scalar else out


def integrate_gamma_ode_many(
    betas: Sequence[BetaSequence], taus: Sequence[float], step: float
) -> list[np.ndarray]:
    """Integrate several subspaces side by side with a shared fixed step.

    Returns, for each beta sequence, an array of shape ``(len(taus), N + 1)``.
    """
    times = _check_times(taus, step)
    width = max(len(b) for b in betas)
    bmat = np.zeros((len(betas), width))
    lower = np.zeros((len(betas), width))
    for i, b in enumerate(betas):
        bmat[i, : len(b)] = np.array(b.values, dtype=float)
        lower[i, 1 : len(b)] = 1.0
    traj = _rk4(bmat, lower, times, step)
    return [traj[:, i, : len(b)] for i, b in enumerate(betas)]


def _annihilator(cutoff: int) -> sp.csr_matrix:
    """Truncated boson annihilation operator on photon numbers ``0..cutoff``."""
    return sp.diags(np.sqrt(np.arange(1, cutoff + 1, dtype=float)), 1, format="csr")


def _power(op: sp.csr_matrix, p: int) -> sp.csr_matrix:
    out = sp.identity(op.shape[0], format="csr")
    for _ in range(p):
        out = out @ op
    return out.tocsr()


def brute_force_fock(
    model: ModelSpec,
    sub: SubspaceIndex,
    tau: float,
    *,
    dim_cap: int | None = None,
    return_elements: bool = False,
):
    """Evolve ``|Psi_0>`` with the ladder operator built from raw boson operators.

    The pump mode is truncated at ``M`` photons and signal mode ``s`` at
    ``k_s N + ell_s``; the subspace never reaches past either cut.  The
    squared matrix elements ``<Psi_n|A|Psi_{n+1}>^2`` are checked against the
    integer betas before exponentiating the full sparse Hamiltonian.

    Returns the amplitudes on the subspace basis, plus the squared matrix
    elements when ``return_elements`` is set.
    """
    model.check(sub)
    N = model.top_index(sub)
    cuts = [sub.M] + [k * N + ell for k, ell in zip(model.signal_powers, sub.offsets)]
    dims = [c + 1 for c in cuts]
    total = math.prod(dims)
    cap = FOCK_DIM_CAP if dim_cap is None else dim_cap
    if total > cap:
        raise ResourceLimitError(f"Fock space dimension {total} exceeds cap {cap}")

    pump = _power(_annihilator(cuts[0]).T.tocsr(), model.m)
    A = pump
    for s, k in enumerate(model.signal_powers):
        A = sp.kron(A, _power(_annihilator(cuts[s + 1]), k), format="csr")

    def flat(occ):
        idx = 0
        for o, d in zip(occ, dims):
            idx = idx * d + o
        return idx

    basis = [flat(model.fock_occupations(sub, n)) for n in range(N + 1)]
    beta = beta_sequence(model, sub)
    elements = []
    for n in range(N):
        col = A[:, basis[n + 1]].toarray().ravel()
        elem = col[basis[n]]
        leak = np.delete(col, basis[n])
        if np.any(np.abs(leak) > 1e-9 * max(1.0, abs(elem))):
            raise NumericalFailure(f"ladder operator leaves the subspace at n={n + 1}")
        elements.append(elem * elem)
        if not math.isclose(elem * elem, beta[n], rel_tol=1e-12):
            raise NumericalFailure(
                f"matrix element^2 {elem * elem} differs from beta_{n} = {beta[n]}"
            )

    H = (A + A.T).tocsc()
    start = np.zeros(total, dtype=complex)
    start[basis[0]] = 1.0
    if tau == 0:
        evolved = start
    else:
        evolved = expm_multiply(-1j * tau * H, start)
    psi = evolved[basis]
    if return_elements:
        return psi, elements
    return psi


def operator_power_coefficients(beta: BetaSequence, m: int) -> list[int]:
    """Exact ``(A + A^dag)^m |Psi_0>`` in the unnormalized basis ``(A^dag)^j |Psi_0>``.

    In that basis ``A^dag`` shifts ``j -> j+1`` with weight 1 and ``A`` shifts
    ``j -> j-1`` with weight ``beta_{j-1}``, so every entry is an integer.
    Returns coefficients for ``j = 0..N``.
    """
    if m < 0:
        raise DomainError("m must be non-negative")
    N = beta.N
    v = [1] + [0] * N
    for _ in range(m):
        w = [0] * (N + 1)
        for j, c in enumerate(v):
            if not c:
                continue
            if j < N:
                w[j + 1] += c
            if j > 0:
                w[j - 1] += beta[j - 1] * c
        v = w
    return v
