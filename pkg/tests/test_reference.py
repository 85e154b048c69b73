import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from ladderboson import DomainError, ResourceLimitError
from ladderboson.models import ModelSpec, beta_sequence
from ladderboson.reference import (
    SqueezeParams,
    beamsplitter_gamma,
    falling_factorial,
    parametric_error_report,
    parametric_gamma,
    parametric_psi,
    squeezed_state_amplitudes,
)
from ladderboson.series import build_gtable, evaluate_gamma


def test_beamsplitter_examples():
    assert beamsplitter_gamma(1, 0, 0.7) == pytest.approx(math.cos(0.7))
    assert [beamsplitter_gamma(4, n, 0.0) for n in range(5)] == [1, 0, 0, 0, 0]
    assert beamsplitter_gamma(2, 1, math.pi / 4) == pytest.approx(0.5)
    with pytest.raises(DomainError):
        beamsplitter_gamma(2, 3, 0.1)


def test_vacuum_squeezed_state():
    amps = squeezed_state_amplitudes(0.0, 4)
    assert list(amps) == [1, 0, 0, 0, 0]


@pytest.mark.parametrize("r", [0.1, 0.6, 1.5])
def test_squeezed_leading_term_and_normalization(r):
    amps = squeezed_state_amplitudes(r, 600)
    assert amps[0] == pytest.approx(math.sqrt(1 / math.cosh(r)))
    partial = np.cumsum(np.abs(amps) ** 2)
    assert np.all(np.diff(partial) >= 0)
    assert partial[-1] == pytest.approx(1.0, abs=1e-12)
    for n_max in range(40):
        assert 1 - partial[n_max] <= math.tanh(r) ** (2 * n_max) + 1e-15


def test_squeezed_phase():
    amps = squeezed_state_amplitudes(0.4, 3)
    assert amps[1].real == 0 and amps[1].imag < 0
    assert amps[2].imag == 0 and amps[2].real < 0


def test_parametric_gamma_basics():
    assert parametric_gamma(0, 0.7, 3.0) == pytest.approx(math.sqrt(1 / math.cosh(0.7)))
    assert [parametric_gamma(n, 0.0, 3.0) for n in range(3)] == [1, 0, 0]
    with pytest.raises(DomainError):
        parametric_gamma(1, 0.2, 0.0)


@pytest.mark.parametrize("n", [0, 1, 2, 5])
def test_parametric_small_r_expansion(n):
    alpha = 3.0
    for r in (1e-2, 2e-2):
        tau = r / (2 * alpha)
        lead = tau**n / math.factorial(n)
        resid = parametric_gamma(n, r, alpha) / lead - (1 - (n / 3 + 0.25) * r * r)
        assert abs(resid) <= (n + 1) ** 2 * r**4


def test_parametric_psi_edges():
    assert parametric_psi(10, 0, 0.5, 3.0) == pytest.approx(math.sqrt(1 / math.cosh(0.5)))
    assert parametric_psi(10, 2, 0.0, 3.0) == 0
    assert falling_factorial(10, 3) == 720
    with pytest.raises(DomainError):
        parametric_psi(3, 4, 0.5, 3.0)


@given(N=st.integers(1, 200), n=st.integers(0, 30), r=st.floats(0.01, 2.0), alpha=st.floats(1.0, 40.0))
def test_parametric_product_form(N, n, r, alpha):
    n = min(n, N)
    lhs = parametric_psi(N, n, r, alpha)
    rhs = (-1j) ** n * parametric_gamma(n, r, alpha) * math.sqrt(math.perm(N, n) * math.factorial(2 * n))
    assert abs(lhs - rhs) <= 1e-12 * abs(rhs)


def test_squeeze_params():
    p = SqueezeParams.from_tau(4.0, 0.1)
    assert p.r == pytest.approx(0.8) and p.tau == pytest.approx(0.1)
    with pytest.raises(DomainError):
        SqueezeParams(0.0, 0.1)


@pytest.mark.parametrize("N", [4, 16, 64])
def test_exact_second_order_bracket(N):
    # exact: gamma_n = tau^n/n! (1 - tau^2 g1_n n!/(n+2)! + ...), and with r = 2 alpha tau,
    # N r^2 / alpha^2 = 4 N tau^2, so the bracket is g1_n / (4 N (n+1)(n+2))
    model = ModelSpec.two_mode(2)
    row = build_gtable(beta_sequence(model, model.subspace(N)), 1).row(1)
    for n in range(N):
        bracket = Fraction(row[n], 4 * N * (n + 1) * (n + 2))
        assert bracket == Fraction(n, 3) + Fraction(1, 4) - Fraction(n * (n + 1), 4 * N)


def test_exact_second_order_numerically():
    model = ModelSpec.two_mode(2)
    N, tau = 16, 1e-4
    g = evaluate_gamma(beta_sequence(model, model.subspace(N)), tau, 1e-30, fallback="extended").gamma
    for n in range(4):
        coeff = (1 - g[n] * math.factorial(n) / tau**n) / (4 * N * tau * tau)
        assert coeff == pytest.approx(n / 3 + 0.25 - n * (n + 1) / (4 * N), rel=1e-4)


def test_error_report_leading_order():
    # at N = alpha^2 the two brackets differ by n(n+1)/(4N), so rel_err -> n(n+1) r^2 / (4 alpha^2)
    for alpha in (4, 8):
        rep = parametric_error_report(alpha, 0.05, 1e-3)
        assert rep.N == alpha * alpha
        for n in (1, 2, 3):
            assert rep.rel_err[n] == pytest.approx(n * (n + 1) * 0.05**2 / (4 * alpha**2), rel=1e-2)


def test_error_report_alpha_doubling():
    errs = {a: parametric_error_report(a, 0.25, 1e-3).rel_err[1] for a in (4, 8, 16)}
    assert errs[4] / errs[8] == pytest.approx(4.0, rel=0.01)
    assert errs[8] / errs[16] == pytest.approx(4.0, rel=0.01)


def test_error_report_crossing_and_neighbors():
    rep = parametric_error_report(4, 0.5, 1e-2, neighbors=True)
    assert rep.n_c_empirical == 2
    assert rep.rel_err[1] <= 1e-2 < rep.rel_err[2]
    assert rep.n_c_prediction == pytest.approx(1e-2 * 4 / 0.25)
    assert rep.validity_scale == pytest.approx(16.0)
    assert sorted(rep.neighbors) == [12, 20]


def test_error_report_small_r():
    assert np.all(parametric_error_report(4, 1e-5, 1e-3).rel_err[:4] <= 1e-8)


def test_error_report_guards():
    with pytest.raises(DomainError):
        parametric_error_report(1.5, 0.5, 1e-3)
    with pytest.raises(DomainError):
        parametric_error_report(4, 0.0, 1e-3)
    with pytest.raises(ResourceLimitError, match="lower alpha"):
        parametric_error_report(50, 0.5, 1e-3)
