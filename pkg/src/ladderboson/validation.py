"""Self-checks run by ``ladderboson validate``.

Each suite compares the engine against an independent route on a small grid
and reports the worst deviation next to its tolerance.  Exact-integer suites
report a mismatch count, so their tolerance is fixed at zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .models import ModelSpec, beta_sequence, enumerate_subspaces
from .oracle import (
    brute_force_fock,
    integrate_gamma_ode,
    operator_power_coefficients,
    propagator_psi,
)
from .pump import truncate_pump
from .reference import beamsplitter_gamma, parametric_gamma, parametric_psi
from .series import (
    build_gtable,
    evaluate_gamma,
    gtable_direct,
    gtable_via_matrix,
    hessenberg_lu,
    hessenberg_matrix,
    ladder_power_coefficients,
    truncation_depth,
)

__all__ = ["SuiteResult", "SUITES", "run_suites"]


@dataclass(frozen=True)
class SuiteResult:
    name: str
    worst: float
    tolerance: float
    detail: str = ""

    @property
    def passed(self) -> bool:
        return self.worst <= self.tolerance

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status} {self.name}: worst={self.worst:.3e} tol={self.tolerance:.1e} {self.detail}".rstrip()


def _beamsplitter(tol):
    model = ModelSpec.two_mode(1)
    worst = 0.0
    for N in range(1, 21):
        beta = beta_sequence(model, model.subspace(N))
        for tau in np.arange(1, 16) / 10:
            g = evaluate_gamma(beta, tau).gamma
            for n in range(N + 1):
                ref = beamsplitter_gamma(N, n, tau) * math.factorial(n)
                worst = max(worst, abs(math.factorial(n) * g[n] - ref))
    return worst, tol if tol is not None else 1e-10, "N<=20, tau=0.1..1.5"


_ORACLE_MODELS = ((1, 1), (2, 1), (3, 1), (2, 2))


def _oracles(tol):
    worst = 0.0
    for k, m in _ORACLE_MODELS:
        model = ModelSpec.two_mode(k, m)
        for sub in enumerate_subspaces(model, 6):
            beta = beta_sequence(model, sub)
            for tau in (0.3, 0.9):
                psi = evaluate_gamma(beta, tau, theta=None).psi
                worst = max(worst, np.max(np.abs(psi - propagator_psi(beta, tau))))
                worst = max(worst, np.max(np.abs(psi - brute_force_fock(model, sub, tau))))
    return worst, tol if tol is not None else 1e-8, "series vs propagator and Fock space, M<=6"


def _ode(tol):
    worst = 0.0
    model = ModelSpec.two_mode(2)
    for M in range(1, 7):
        beta = beta_sequence(model, model.subspace(M))
        g = integrate_gamma_ode(beta, [0.5, 1.0], step=1e-4)
        for row, tau in zip(g, (0.5, 1.0)):
            worst = max(worst, np.max(np.abs(row - evaluate_gamma(beta, tau, theta=None).gamma)))
    return worst, tol if tol is not None else 1e-6, "series vs RK4, k=2, M<=6"


def _ladder_powers(tol):
    bad = 0
    model = ModelSpec.two_mode(2)
    for M in range(1, 7):
        beta = beta_sequence(model, model.subspace(M))
        for m in range(9):
            dense = operator_power_coefficients(beta, m)
            coeffs = ladder_power_coefficients(beta, m)
            for l, c in enumerate(coeffs):
                j = m - 2 * l
                if j <= beta.N and dense[j] != c:
                    bad += 1
    return float(bad), 0.0, "mismatching coefficients, m<=8"


def _structure(tol):
    bad = 0
    model = ModelSpec.two_mode(2)
    for M in range(1, 11):
        beta = beta_sequence(model, model.subspace(M))
        t = build_gtable(beta, 12)
        bad += t != gtable_direct(beta, 12)
        bad += t != gtable_via_matrix(beta, 12)
        bad += any(row[-1] != row[-2] for row in t.rows())
        L, U = hessenberg_lu(beta)
        bad += not np.array_equal(L.dot(U), hessenberg_matrix(beta))
    return float(bad), 0.0, "table and factorization mismatches, M<=10"


def _norm(tol):
    worst = 0.0
    model = ModelSpec.two_mode(2)
    for M in range(1, 21):
        beta = beta_sequence(model, model.subspace(M))
        for tau in (0.05, 0.1, 0.2, 0.4):
            st = evaluate_gamma(beta, tau)
            if st.method == "series":
                worst = max(worst, abs(st.norm - 1.0))
    return worst, tol if tol is not None else 1e-10, "series-path norms, k=2, M<=20"


def _taylor(tol):
    bad = 0
    model = ModelSpec.two_mode(2)
    for N in range(1, 61):
        row = build_gtable(beta_sequence(model, model.subspace(N)), 1).row(1)
        for n in range(N):
            # 3 * closed form keeps everything integral
            if 3 * row[n] != (n + 1) * (n + 2) * (4 * N * n + 3 * N - 3 * n * (n + 1)):
                bad += 1
    return float(bad), 0.0, "first-order coefficient mismatches, N<=60"


def _parametric(tol):
    worst = 0.0
    for N in (5, 30, 100):
        for r in (0.1, 0.7):
            for n in range(min(N, 30) + 1):
                lhs = parametric_psi(N, n, r, 3.0)
                rhs = (-1j) ** n * parametric_gamma(n, r, 3.0) * math.sqrt(
                    math.perm(N, n) * math.factorial(2 * n)
                )
                worst = max(worst, abs(lhs - rhs) / max(abs(rhs), 1e-300))
    return worst, tol if tol is not None else 1e-12, "squeezed projection vs product form"


def _truncation(tol):
    worst = 0.0
    model = ModelSpec.two_mode(2)
    for M in range(1, 13):
        beta = beta_sequence(model, model.subspace(M))
        for tau in (0.2, 0.6, 1.0):
            d = truncation_depth(beta, tau, 1e-12)
            a = evaluate_gamma(beta, tau, theta=None, depth=d).psi
            b = evaluate_gamma(beta, tau, theta=None, depth=2 * d).psi
            worst = max(worst, np.max(np.abs(a - b)))
    return worst, tol if tol is not None else 1e-10, "depth vs doubled depth"


def _collapse(tol):
    alpha = 8.0
    model = ModelSpec.two_mode(2)
    ens = truncate_pump(alpha, 1e-12)
    worst = 0.0
    for tbar in (0.1, 0.3, 0.5):
        amps = {}
        for N in ens.pump_numbers:
            beta = beta_sequence(model, model.subspace(N))
            amps[N] = np.abs(evaluate_gamma(beta, tbar / math.sqrt(N)).psi[:6])
        ref = amps[64]
        for a in amps.values():
            worst = max(worst, np.max(np.abs(a - ref)))
    return worst, tol if tol is not None else 5.0 / alpha, "alpha=8 window, n<=5"


SUITES: dict[str, Callable] = {
    "beamsplitter": _beamsplitter,
    "oracles": _oracles,
    "ode": _ode,
    "ladder_powers": _ladder_powers,
    "structure": _structure,
    "norm": _norm,
    "taylor": _taylor,
    "parametric": _parametric,
    "truncation": _truncation,
    "collapse": _collapse,
}


def run_suites(names=None, tolerance: float | None = None) -> list[SuiteResult]:
    """Run the named suites (all by default); ``tolerance`` overrides every float tolerance."""
    names = list(SUITES) if not names else list(names)
    out = []
    for name in names:
        worst, tol, detail = SUITES[name](tolerance)
        out.append(SuiteResult(name, float(worst), float(tol), detail))
    return out
