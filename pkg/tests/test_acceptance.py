"""Acceptance criteria, one test each, with a PASS/FAIL line per criterion.

Run ``pytest tests/test_acceptance.py -v`` (or this file directly) to see
the summary.  Every criterion runs at its stated tolerance and grid.
"""

import math
import time

import numpy as np
import pytest

from ladderboson.models import ModelSpec, beta_sequence, enumerate_subspaces
from ladderboson.oracle import (
    TridiagonalHamiltonian,
    integrate_gamma_ode_many,
    operator_power_coefficients,
    propagator_psi,
)
from ladderboson.pump import truncate_pump
from ladderboson.reference import parametric_error_report
from ladderboson.series import (
    build_gtable,
    evaluate_gamma,
    evaluate_gamma_grid,
    gamma_to_psi,
    gtable_direct,
    gtable_via_matrix,
    hessenberg_lu,
    hessenberg_matrix,
    ladder_power_coefficients,
    truncation_depth,
)

RESULTS: dict[int, str] = {}

GRID_MODELS = [(1, 1), (2, 1), (3, 1), (2, 2)]
GRID_TAUS = [round(0.1 * i, 1) for i in range(1, 11)]


def record(number, title, passed, detail):
    line = f"criterion {number}: {'PASS' if passed else 'FAIL'} {title}: {detail}"
    RESULTS[number] = line
    print(line)
    return passed


def grid_betas():
    for k, m in GRID_MODELS:
        model = ModelSpec.two_mode(k, m)
        yield (k, m), model, [(sub, beta_sequence(model, sub)) for sub in enumerate_subspaces(model, 20)]


@pytest.fixture(scope="module")
def series_grid():
    """Power-series states on the three-oracle grid, summed as a series at every point."""
    start = time.perf_counter()
    out = {}
    for key, model, subs in grid_betas():
        for sub, beta in subs:
            out[key, sub] = (beta, evaluate_gamma_grid(beta, GRID_TAUS, 1e-12, theta=None))
    return out, time.perf_counter() - start


def test_criterion_1_beam_splitter():
    start = time.perf_counter()
    model = ModelSpec.two_mode(1)
    taus = [round(0.1 * i, 1) for i in range(1, 16)]
    worst = 0.0
    for N in range(1, 21):
        beta = beta_sequence(model, model.subspace(N))
        for tau, st in zip(taus, evaluate_gamma_grid(beta, taus, theta=None)):
            assert st.method == "series"
            for n in range(N + 1):
                ref = math.cos(tau) ** (N - n) * math.sin(tau) ** n
                worst = max(worst, abs(math.factorial(n) * st.gamma[n] - ref))
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-10 and elapsed < 5
    record(1, "beam-splitter identity", ok, f"max err {worst:.2e} (limit 1e-10), {elapsed:.1f} s (limit 5 s)")
    assert ok


def test_criterion_2_three_oracles(series_grid):
    states, series_time = series_grid
    start = time.perf_counter()
    worst_prop = worst_ode = 0.0
    for key, model, subs in grid_betas():
        odes = integrate_gamma_ode_many([b for _, b in subs], GRID_TAUS, 1e-4)
        for (sub, beta), traj in zip(subs, odes):
            _, sts = states[key, sub]
            for tau, st, g_ode in zip(GRID_TAUS, sts, traj):
                worst_prop = max(worst_prop, np.max(np.abs(st.psi - propagator_psi(beta, tau))))
                worst_ode = max(worst_ode, np.max(np.abs(st.psi - gamma_to_psi(g_ode, beta))))
    elapsed = series_time + time.perf_counter() - start
    ok = worst_prop <= 1e-8 and worst_ode <= 1e-6 and elapsed < 60
    record(
        2,
        "three-oracle equivalence",
        ok,
        f"propagator {worst_prop:.2e} (limit 1e-8), ODE {worst_ode:.2e} (limit 1e-6), "
        f"{elapsed:.1f} s (limit 60 s)",
    )
    assert ok


def test_criterion_3_ladder_powers():
    start = time.perf_counter()
    bad = checked = 0
    worst_float = 0.0
    for k, m_pump in [(1, 1), (2, 1), (3, 1), (2, 2), (1, 3)]:
        model = ModelSpec.two_mode(k, m_pump)
        for sub in enumerate_subspaces(model, 8 * m_pump + m_pump - 1):
            beta = beta_sequence(model, sub)
            if beta.N > 8:
                continue
            H = TridiagonalHamiltonian(beta).dense()
            norms = np.sqrt(np.array(beta.prefix_products(), dtype=float))
            for m in range(13):
                exact = operator_power_coefficients(beta, m)
                dense = np.linalg.matrix_power(H, m)[:, 0] / norms
                for l, c in enumerate(ladder_power_coefficients(beta, m)):
                    j = m - 2 * l
                    if j > beta.N:
                        continue
                    checked += 1
                    bad += c != exact[j]
                    worst_float = max(worst_float, abs(dense[j] - c) / max(c, 1))
    elapsed = time.perf_counter() - start
    ok = bad == 0 and worst_float <= 1e-12 and elapsed < 5
    record(
        3,
        "operator-power coefficients",
        ok,
        f"{bad} integer mismatches in {checked}, normalized dense rel err {worst_float:.1e}, "
        f"{elapsed:.1f} s (limit 5 s)",
    )
    assert ok


def test_criterion_4_structure():
    start = time.perf_counter()
    bad = 0
    for k, m in GRID_MODELS:
        model = ModelSpec.two_mode(k, m)
        for M in range(0, 31):
            beta = beta_sequence(model, model.subspace(M, k - 1))
            bad += beta[beta.N] != 0
            t = build_gtable(beta, 60)
            bad += any(v != 1 for v in t.row(0))
            if beta.N:
                bad += any(row[-1] != row[-2] for row in t.rows())
            bad += t != gtable_direct(beta, 60)
            bad += t != gtable_via_matrix(beta, 60)
            B = hessenberg_matrix(beta)
            L, U = hessenberg_lu(beta)
            if beta.N:
                bad += list(B[-1]) != list(B[-2])
            bad += not np.array_equal(L.dot(U), B)
    elapsed = time.perf_counter() - start
    ok = bad == 0 and elapsed < 10
    record(4, "structural identities", ok, f"{bad} violations, {elapsed:.1f} s (limit 10 s)")
    assert ok


def test_criterion_5_norm_and_bound(series_grid):
    states, _ = series_grid
    worst_norm = 0.0
    worst_bound = 0.0
    series_points = 0
    for key, model, subs in grid_betas():
        for sub, beta in subs:
            half_log = 0.5 * np.log(np.array(beta.prefix_products(), dtype=float))
            _, extended = states[key, sub]
            for tau, st_ext in zip(GRID_TAUS, extended):
                st = evaluate_gamma(beta, tau)
                for s in (st, st_ext):
                    if s.method != "series":
                        continue
                    series_points += 1
                    worst_norm = max(worst_norm, abs(s.norm - 1))
                    with np.errstate(divide="ignore"):
                        scaled = np.log(np.abs(s.gamma)) + half_log
                    worst_bound = max(worst_bound, float(np.exp(scaled.max())))
    ok = worst_norm <= 1e-10 and worst_bound <= 1 + 1e-10
    record(
        5,
        "norm and amplitude bound",
        ok,
        f"max |norm-1| {worst_norm:.1e} (limit 1e-10), max |gamma_n| sqrt(prod beta) "
        f"{worst_bound:.12f} (limit 1) over {series_points} series evaluations",
    )
    assert ok


def test_criterion_6_first_order_k2():
    start = time.perf_counter()
    model = ModelSpec.two_mode(2)
    bad = 0
    for N in range(1, 201):
        row = build_gtable(beta_sequence(model, model.subspace(N)), 1).row(1)
        for n in range(N):
            bad += 3 * row[n] != (n + 1) * (n + 2) * (4 * N * n + 3 * N - 3 * n * (n + 1))
    elapsed = time.perf_counter() - start
    ok = bad == 0 and elapsed < 1
    record(6, "k=2 first-order coefficients", ok, f"{bad} mismatches, {elapsed:.2f} s (limit 1 s)")
    assert ok


def test_criterion_7_parametric_error_scaling():
    start = time.perf_counter()
    ratios = {}
    for r in (0.25, 0.5):
        for alpha in (4, 8, 16):
            rep = parametric_error_report(alpha, r, 1e-3)
            for n in (1, 2, 3):
                ratios[r, alpha, n] = rep.rel_err[n] / (r * r * (n + 1) / alpha)
    lo, hi = min(ratios.values()), max(ratios.values())
    # best single constant is the geometric midpoint; factor 2 either side means hi/lo <= 4
    c = math.sqrt(lo * hi)
    elapsed = time.perf_counter() - start
    ok = hi / lo <= 4.0 and elapsed < 120
    record(
        7,
        "parametric error scaling",
        ok,
        f"fitted c {c:.3e}, measured/(c r^2 (n+1)/alpha) spans {lo / c:.2f}..{hi / c:.2f} "
        f"(limit 0.5..2), {elapsed:.1f} s (limit 120 s)",
    )
    assert ok


def test_criterion_8_truncation_depth():
    start = time.perf_counter()
    worst = worst_adaptive = 0.0
    for key, model, subs in grid_betas():
        for sub, beta in subs:
            for tau in GRID_TAUS:
                d = truncation_depth(beta, tau, 1e-12)
                a = evaluate_gamma(beta, tau, theta=None, depth=d).psi
                b = evaluate_gamma(beta, tau, theta=None, depth=2 * d).psi
                worst = max(worst, np.max(np.abs(a - b)))
                # the depth the engine actually stops at, against twice that many rows
                used = int(evaluate_gamma(beta, tau, theta=None).terms_used.max())
                c = evaluate_gamma(beta, tau, theta=None, depth=used).psi
                e = evaluate_gamma(beta, tau, theta=None, depth=2 * used).psi
                worst_adaptive = max(worst_adaptive, np.max(np.abs(c - e)))
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-10 and worst_adaptive <= 1e-10
    record(
        8,
        "truncation depth sufficiency",
        ok,
        f"estimated depth vs doubled {worst:.2e}, adaptive depth vs doubled {worst_adaptive:.2e} "
        f"(limit 1e-10), {elapsed:.1f} s",
    )
    assert ok


def test_criterion_9_rescaled_time_collapse():
    alpha = 8.0
    model = ModelSpec.two_mode(2)
    ens = truncate_pump(alpha, 1e-12)
    worst = 0.0
    for tbar in [0.05 * i for i in range(1, 11)]:
        amps = {}
        for N in ens.pump_numbers:
            beta = beta_sequence(model, model.subspace(N))
            amps[N] = np.abs(evaluate_gamma(beta, tbar / math.sqrt(N)).psi[:6])
        for a in amps.values():
            worst = max(worst, float(np.max(np.abs(a - amps[64]))))
    ok = worst <= 5 / alpha
    record(
        9,
        "rescaled-time collapse",
        ok,
        f"max spread {worst:.3f} (limit {5 / alpha:.3f}) over N={ens.pump_numbers[0]}..{ens.pump_numbers[-1]}",
    )
    assert ok


if __name__ == "__main__":
    import sys

    sys.exit(pytest.main([__file__, "-q"]))
