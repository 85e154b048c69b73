"""Exact power-series evaluation of the evolved amplitudes in one subspace.

Starting from the top state ``|Psi_0>`` (annihilated by the ladder operator),

    exp(-i tau (A + A^dag)) |Psi_0> = sum_n gamma_n(tau) (-i A^dag)^n |Psi_0>,
    gamma_n(tau) = sum_l (-1)^l tau^(n+2l) / (n+2l)! * g[l][n],

where the integers ``g[l][n]`` are nested partial sums of the beta sequence.
The normalized Fock amplitudes are ``psi_n = (-i)^n gamma_n sqrt(prod_{j<n} beta_j)``.

Coefficient tables are kept as exact Python integers.  Floating-point work is
confined to the summation, which runs in one of three ways:

* ``series`` in double precision, when the cancellation measure
  ``|tau| * sqrt(sum beta)`` is at most ``theta``;
* ``series`` in extended precision (MPFR via gmpy2), when requested beyond
  ``theta``;
* ``propagator_fallback``, exact exponentiation of the tridiagonal matrix.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import gmpy2
import numpy as np
from scipy.special import gammaln

from .errors import DomainError, NumericalFailure
from .models import BetaSequence
from .oracle import propagator_psi

__all__ = [
    "GTable",
    "SubspaceState",
    "build_gtable",
    "gtable_direct",
    "gtable_via_matrix",
    "hessenberg_matrix",
    "hessenberg_lu",
    "evaluate_gamma",
    "evaluate_gamma_grid",
    "truncation_depth",
    "majorant_depth",
    "gamma_to_psi",
    "ladder_power_coefficients",
    "DEFAULT_THETA",
    "MAX_DEPTH",
]

DEFAULT_THETA = 8.0
MAX_DEPTH = 10**6
# rows whose contribution bound (psi units) drops below this are never summed
_NEGLIGIBLE = 1e-30


def _next_row(beta: Sequence[int], prev: list[int]) -> list[int]:
    """One step of ``g[l][n] = g[l][n-1] + beta_n g[l-1][n+1]``."""
    N = len(beta) - 1
    row = [0] * (N + 1)
    if N == 0:
        return row
    acc = beta[0] * prev[1]
    row[0] = acc
    for n in range(1, N):
        acc += beta[n] * prev[n + 1]
        row[n] = acc
    row[N] = acc  # beta_N = 0
    return row


class GTable:
    """Exact coefficients ``g[l][n]`` for ``0 <= l <= depth``, grown on demand."""

    def __init__(self, beta: BetaSequence, depth: int = 0):
        if depth < 0:
            raise DomainError("depth must be non-negative")
        self.beta = beta
        self._rows: list[list[int]] = [[1] * len(beta)]
        self.extend(depth)

    @property
    def depth(self) -> int:
        return len(self._rows) - 1

    @property
    def N(self) -> int:
        return self.beta.N

    def extend(self, depth: int) -> "GTable":
        while len(self._rows) <= depth:
            self._rows.append(_next_row(self.beta.values, self._rows[-1]))
        return self

    def row(self, l: int) -> list[int]:
        self.extend(l)
        return self._rows[l]

    def __getitem__(self, key):
        l, n = key
        return self.row(l)[n]

    def iter_rows(self, cache: bool = True) -> Iterator[list[int]]:
        """Yield rows ``l = 0, 1, ...`` indefinitely.

        With ``cache=False`` rows past the current depth are produced but not
        stored, which keeps memory flat for very deep extended-precision sums.
        """
        l = 0
        while True:
            if l < len(self._rows):
                row = self._rows[l]
            elif cache:
                row = self.row(l)
            else:
                break
            yield row
            l += 1
        while True:
            row = _next_row(self.beta.values, row)
            yield row

    @property
    def entries(self) -> np.ndarray:
        """Rows as an object array of Python ints, shape ``(depth + 1, N + 1)``."""
        arr = np.empty((len(self._rows), len(self.beta)), dtype=object)
        for l, row in enumerate(self._rows):
            arr[l, :] = row
        return arr

    def rows(self) -> list[list[int]]:
        return [list(r) for r in self._rows]

    def __eq__(self, other):
        if not isinstance(other, GTable):
            return NotImplemented
        return self.beta.values == other.beta.values and self._rows == other._rows

    def __repr__(self):
        return f"GTable(N={self.N}, depth={self.depth})"


def build_gtable(beta: BetaSequence, depth: int) -> GTable:
    """Table built with the O(N) per-row update."""
    return GTable(beta, depth)


def _from_rows(beta: BetaSequence, rows: list[list[int]]) -> GTable:
    table = GTable(beta, 0)
    table._rows = rows
    return table


def gtable_direct(beta: BetaSequence, depth: int) -> GTable:
    """Table built from ``g[l][n] = sum_{s<=n} beta_s g[l-1][s+1]`` term by term.

    The ``s = N`` term is skipped: ``beta_N = 0`` and ``g[.][N+1]`` is undefined.
    """
    if depth < 0:
        raise DomainError("depth must be non-negative")
    b = beta.values
    N = beta.N
    rows = [[1] * (N + 1)]
    for _ in range(depth):
        prev = rows[-1]
        rows.append(
            [sum(b[s] * prev[s + 1] for s in range(min(n, N - 1) + 1)) for n in range(N + 1)]
        )
    return _from_rows(beta, rows)


def hessenberg_matrix(beta: BetaSequence) -> np.ndarray:
    """Exact lower-Hessenberg ``B`` with ``B[n, l] = beta_{l-1}`` for ``1 <= l <= min(n+1, N)``."""
    N = beta.N
    B = np.zeros((N + 1, N + 1), dtype=object)
    for n in range(N + 1):
        for l in range(1, min(n + 1, N) + 1):
            B[n, l] = beta[l - 1]
    return B


def hessenberg_lu(beta: BetaSequence) -> tuple[np.ndarray, np.ndarray]:
    """``B = L U`` with ``L`` all-ones lower triangular and ``U`` the beta superdiagonal."""
    N = beta.N
    L = np.tril(np.ones((N + 1, N + 1), dtype=object))
    U = np.zeros((N + 1, N + 1), dtype=object)
    for n in range(N):
        U[n, n + 1] = beta[n]
    return L, U


def gtable_via_matrix(beta: BetaSequence, depth: int) -> GTable:
    """Table built as ``g[p] = B^p 1`` by repeated matrix-vector products."""
    if depth < 0:
        raise DomainError("depth must be non-negative")
    B = hessenberg_matrix(beta)
    v = np.ones(len(beta), dtype=object)
    rows = [list(v)]
    for _ in range(depth):
        v = B.dot(v)
        rows.append([int(x) for x in v])
    return _from_rows(beta, rows)


@dataclass(frozen=True)
class SubspaceState:
    """Evolved amplitudes of one subspace at time ``tau``.

    ``gamma`` holds the real series amplitudes; entries deep in a large
    subspace can underflow to zero even when the matching ``psi`` is finite.
    ``terms_used[n]`` counts summed rows for amplitude ``n`` (zero on the
    propagator route).  ``tail_estimate`` is the largest first omitted term,
    in psi units.
    """

    beta: BetaSequence
    tau: float
    gamma: np.ndarray
    psi: np.ndarray
    terms_used: np.ndarray
    tail_estimate: float
    method: str
    precision_bits: int = 53
    cancellation: float = field(default=0.0)

    @property
    def N(self) -> int:
        return self.beta.N

    @property
    def norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.psi) ** 2)))

    @property
    def populations(self) -> np.ndarray:
        return np.abs(self.psi) ** 2


def _log_prefix(beta: BetaSequence) -> np.ndarray:
    """``log prod_{j<n} beta_j`` for every ``n``."""
    return np.array([math.log(p) for p in beta.prefix_products()])


def cancellation_measure(beta: BetaSequence, tau: float) -> float:
    """``|tau| sqrt(sum beta)``: log of the largest possible term size in psi units."""
    return abs(tau) * math.sqrt(beta.total())


def truncation_depth(beta: BetaSequence, tau: float, eps: float) -> int:
    """Index of the first discarded row from the ratio estimate at ``n = 0``.

    Consecutive majorant terms have ratio ``tau^2 sum(beta) / (2l)^2``; setting
    it to ``eps`` gives ``l ~ |tau| sqrt(sum beta) / sqrt(eps)``.  This is a
    loose upper estimate; :func:`majorant_depth` is the tight rigorous one.
    """
    if eps <= 0:
        raise DomainError("eps must be positive")
    return max(1, math.ceil(abs(tau) / math.sqrt(eps) * math.sqrt(beta.total())))


def _majorant_ok(x: float, l: int, eps: float) -> bool:
    if (2 * l + 1) * (2 * l + 2) < 2 * x * x:
        return False
    if x == 0.0:
        return True
    log_term = math.log(2.0) + 2 * l * math.log(x) - math.lgamma(2 * l + 1)
    return log_term <= math.log(eps)


def majorant_depth(beta: BetaSequence, tau: float, eps: float) -> int:
    """Smallest row count ``L`` whose omitted tail is provably below ``eps`` in psi units.

    Uses ``g[l][n] <= (sum beta)^l`` so each omitted amplitude is bounded by
    ``sum_{j>=L} x^(n+2j)/(n+2j)!`` with ``x = |tau| sqrt(sum beta)``.
    """
    if eps <= 0:
        raise DomainError("eps must be positive")
    if beta.N == 0 or tau == 0:
        return 1
    x = cancellation_measure(beta, tau)
    lo, hi = 1, 2
    while not _majorant_ok(x, hi, eps):
        lo, hi = hi, hi * 2
    while lo < hi:
        mid = (lo + hi) // 2
        if _majorant_ok(x, mid, eps):
            hi = mid
        else:
            lo = mid + 1
    return hi


class _TailCheck:
    """Rigorous bound on the rows ``l, l+1, ...`` of every amplitude.

    With ``g[l+j][n] <= (sum beta)^j g[l][N]``, the omitted tail of
    ``psi_n`` is at most ``2 tau^(n+2l) g[l][N] sqrt(prod beta) / (n+2l)!``
    once ``tau^2 sum(beta) <= (2l+1)(2l+2) / 2``.
    """

    def __init__(self, beta: BetaSequence, tau: float):
        self.x2 = tau * tau * beta.total()
        self.log_tau = math.log(abs(tau)) if tau != 0 else -math.inf
        self.half_log_prefix = 0.5 * _log_prefix(beta)
        self.n = np.arange(len(beta))

    def bound(self, l: int, g_top: int) -> float:
        """Largest tail bound over ``n`` for omitted rows starting at ``l``."""
        if g_top == 0:
            return 0.0
        if (2 * l + 1) * (2 * l + 2) < 2 * self.x2:
            return math.inf
        k = self.n + 2 * l
        logs = (
            math.log(2.0)
            + k * self.log_tau
            + math.log(g_top)
            + self.half_log_prefix
            - gammaln(k + 1)
        )
        return float(np.exp(logs.max()))


def _gamma_from_psi(psi: np.ndarray, beta: BetaSequence) -> np.ndarray:
    n = np.arange(len(beta))
    real = (psi * (1j) ** n).real
    return real * np.exp(-0.5 * _log_prefix(beta))


def gamma_to_psi(gamma: Sequence[float], beta: BetaSequence) -> np.ndarray:
    """``psi_n = (-i)^n gamma_n sqrt(prod_{l<n} beta_l)``, overflow-safe."""
    gamma = np.asarray(gamma, dtype=float)
    if len(gamma) != len(beta):
        raise DomainError("gamma and beta lengths differ")
    n = np.arange(len(beta))
    with np.errstate(divide="ignore"):
        mag = np.exp(np.log(np.abs(gamma)) + 0.5 * _log_prefix(beta))
    return (-1j) ** n * np.sign(gamma) * mag


def _initial_state(beta: BetaSequence, tau: float, method: str = "series") -> SubspaceState:
    size = len(beta)
    gamma = np.zeros(size)
    gamma[0] = 1.0
    psi = gamma.astype(complex)
    return SubspaceState(
        beta, tau, gamma, psi, np.ones(size, dtype=int), 0.0, method
    )


def _series_double(
    table: GTable, tau: float, eps: float, depth: int | None, max_depth: int
) -> SubspaceState:
    beta = table.beta
    N = beta.N
    n = np.arange(N + 1)
    check = _TailCheck(beta, tau)
    log_tau = math.log(abs(tau))
    threshold = eps if depth is None else _NEGLIGIBLE
    stop = max_depth if depth is None else min(depth, max_depth)

    # term magnitudes carried as logs so deep amplitudes never underflow early
    log_term = n * log_tau + check.half_log_prefix - gammaln(n + 1)
    sign = np.sign(tau) ** n
    acc = sign * np.exp(log_term)
    used = np.ones(N + 1, dtype=int)
    table.extend(min(stop, majorant_depth(beta, tau, eps / 10)))

    l = 0
    while True:
        nxt = l + 1
        if depth is not None and nxt >= stop:
            break
        if nxt > table.depth:
            table.extend(max(nxt, int(1.25 * table.depth) + 1))
        g_next = table.row(nxt)
        bound = check.bound(nxt, g_next[N])
        if bound <= threshold:
            break
        if nxt >= stop:
            raise NumericalFailure(
                f"series did not converge within {stop} rows", tail_estimate=bound
            )
        g_cur = table.row(l)
        ratio = np.array([a / b for a, b in zip(g_next, g_cur)])
        k = n + 2 * l
        log_term += 2 * log_tau + np.log(ratio) - np.log((k + 1.0) * (k + 2.0))
        sign = -sign
        acc += sign * np.exp(log_term)
        used += 1
        l = nxt

    # first omitted term, for reporting
    g_next, g_cur = table.row(l + 1), table.row(l)
    k = n + 2 * l
    ratio = np.array([a / b for a, b in zip(g_next, g_cur)])
    tail = np.exp(log_term + 2 * log_tau + np.log(ratio) - np.log((k + 1.0) * (k + 2.0)))

    psi = (-1j) ** n * acc
    gamma = acc * np.exp(-check.half_log_prefix)
    return SubspaceState(
        beta,
        tau,
        gamma,
        psi,
        used,
        float(tail.max()),
        "series",
        53,
        cancellation_measure(beta, tau),
    )


def _series_extended(
    table: GTable,
    taus: Sequence[float],
    eps: float,
    depth: int | None,
    max_depth: int,
) -> list[SubspaceState]:
    """Sum the series in MPFR at a precision covering the worst cancellation.

    Terms reach ``exp(x)`` in psi units with ``x = |tau| sqrt(sum beta)``, so
    ``x / ln 2`` bits are lost to cancellation; the working precision adds
    enough bits on top to resolve ``eps``.
    """
    beta = table.beta
    N = beta.N
    n = np.arange(N + 1)
    taus = [float(t) for t in taus]
    xs = [cancellation_measure(beta, t) for t in taus]
    threshold = eps if depth is None else _NEGLIGIBLE
    bits = int((max(xs) + math.log(1.0 / threshold)) / math.log(2.0)) + 64
    checks = [_TailCheck(beta, t) for t in taus]
    limit = min(max_depth, MAX_DEPTH if depth is None else depth)
    active = [i for i, t in enumerate(taus) if t != 0.0]

    with gmpy2.context(gmpy2.get_context(), precision=bits):
        sq = [gmpy2.sqrt(gmpy2.mpfr(p)) for p in beta.prefix_products()]
        mtaus = [gmpy2.mpfr(t) for t in taus]
        # coef[i][k] = tau_i^k / k!, grown as rows are consumed
        coef = [[gmpy2.mpfr(1)] for _ in taus]
        acc = [[gmpy2.mpfr(0)] * (N + 1) for _ in taus]
        used = [np.zeros(N + 1, dtype=int) for _ in taus]
        tails = [0.0] * len(taus)

        def grow(i, k):
            c = coef[i]
            while len(c) <= k:
                c.append(c[-1] * mtaus[i] / len(c))
            return c

        rows = table.iter_rows(cache=False)
        row = next(rows)
        l = 0
        while active:
            gs = [gmpy2.mpfr(g) if l % 2 == 0 else -gmpy2.mpfr(g) for g in row]
            for i in active:
                c = grow(i, N + 2 * l)
                a = acc[i]
                for j in range(N + 1):
                    a[j] += gs[j] * c[j + 2 * l]
                used[i] += 1
            nxt = next(rows)
            l += 1
            still = []
            for i in active:
                bound = checks[i].bound(l, nxt[N])
                if bound <= threshold or l >= limit:
                    c = grow(i, N + 2 * l)
                    tails[i] = float(
                        max(abs(gmpy2.mpfr(nxt[j]) * c[j + 2 * l] * sq[j]) for j in range(N + 1))
                    )
                elif depth is None and l >= max_depth:
                    raise NumericalFailure(
                        f"series did not converge within {max_depth} rows",
                        tail_estimate=bound,
                    )
                else:
                    still.append(i)
            active = still
            row = nxt

        states = []
        for i, t in enumerate(taus):
            if t == 0.0:
                st = _initial_state(beta, t)
                states.append(
                    SubspaceState(beta, t, st.gamma, st.psi, st.terms_used, 0.0, "series", bits)
                )
                continue
            gamma = np.array([float(v) for v in acc[i]])
            psi_mag = np.array([float(v * s) for v, s in zip(acc[i], sq)])
            states.append(
                SubspaceState(
                    beta, t, gamma, (-1j) ** n * psi_mag, used[i], tails[i], "series", bits, xs[i]
                )
            )
    return states


def _propagated(beta: BetaSequence, tau: float) -> SubspaceState:
    psi = propagator_psi(beta, tau)
    return SubspaceState(
        beta,
        tau,
        _gamma_from_psi(psi, beta),
        psi,
        np.zeros(len(beta), dtype=int),
        0.0,
        "propagator_fallback",
        53,
        cancellation_measure(beta, tau),
    )


def _as_table(source) -> GTable:
    if isinstance(source, GTable):
        return source
    if isinstance(source, BetaSequence):
        return GTable(source, 0)
    raise DomainError("expected a GTable or BetaSequence")


def evaluate_gamma(
    gtable: GTable | BetaSequence,
    tau: float,
    eps: float = 1e-12,
    *,
    theta: float | None = DEFAULT_THETA,
    fallback: str = "propagator",
    depth: int | None = None,
    max_depth: int = MAX_DEPTH,
) -> SubspaceState:
    """Evolve the top state of one subspace for time ``tau``.

    Parameters
    ----------
    gtable : GTable or BetaSequence
        Coefficient table, extended in place as more rows are needed.
    tau : float
        Dimensionless propagation time.
    eps : float
        Target absolute error of every ``psi_n``.
    theta : float or None
        Cancellation threshold on ``|tau| sqrt(sum beta)``.  Beyond it the
        double-precision sum is abandoned for ``fallback``; ``None`` never
        falls back and always uses extended precision past the threshold.
    fallback : {"propagator", "extended"}
        ``"propagator"`` exponentiates the tridiagonal matrix;
        ``"extended"`` keeps the power series but sums it in MPFR.
    depth : int, optional
        Sum at most this many rows instead of stopping on the tail bound.
        Rows whose contribution is provably below 1e-30 are still skipped.
    """
    if eps <= 0:
        raise DomainError("eps must be positive")
    if not math.isfinite(tau):
        raise DomainError("tau must be finite")
    if fallback not in ("propagator", "extended"):
        raise DomainError(f"unknown fallback {fallback!r}")
    if depth is not None and depth < 1:
        raise DomainError("depth must be at least 1")
    table = _as_table(gtable)
    beta = table.beta
    if beta.N == 0 or tau == 0.0:
        return _initial_state(beta, tau)
    x = cancellation_measure(beta, tau)
    if theta is not None and x > theta:
        if fallback == "propagator":
            return _propagated(beta, tau)
        return _series_extended(table, [tau], eps, depth, max_depth)[0]
    if theta is None and x > DEFAULT_THETA:
        return _series_extended(table, [tau], eps, depth, max_depth)[0]
    return _series_double(table, tau, eps, depth, max_depth)


def evaluate_gamma_grid(
    beta: BetaSequence,
    taus: Sequence[float],
    eps: float = 1e-12,
    *,
    theta: float | None = DEFAULT_THETA,
    fallback: str = "propagator",
    depth: int | None = None,
) -> list[SubspaceState]:
    """:func:`evaluate_gamma` over many times, sharing one coefficient stream.

    Extended-precision points are summed together in a single pass over the
    rows, which matters when the table is thousands of rows deep.
    """
    table = GTable(beta, 0)
    out: dict[int, SubspaceState] = {}
    deep = []
    for i, t in enumerate(taus):
        x = cancellation_measure(beta, t)
        if theta is None:
            use_ext = x > DEFAULT_THETA
        else:
            use_ext = x > theta and fallback == "extended"
        if use_ext and beta.N > 0 and t != 0.0:
            deep.append(i)
        else:
            out[i] = evaluate_gamma(
                table, t, eps, theta=theta, fallback=fallback, depth=depth
            )
    if deep:
        states = _series_extended(table, [taus[i] for i in deep], eps, depth, MAX_DEPTH)
        out.update(zip(deep, states))
    return [out[i] for i in range(len(taus))]


def ladder_power_coefficients(beta: BetaSequence, m: int) -> list[int]:
    """Coefficients of ``(A^dag)^(m-2l) |Psi_0>`` in ``(A + A^dag)^m |Psi_0>``.

    Entry ``l`` is the nested sum with outer limit ``s_1 <= m - 2l`` and inner
    limits ``s_j <= s_{j-1} + 1``.  Betas past ``N`` are read as zero, so
    coefficients of powers above ``N`` are still defined (the matching state
    component vanishes).
    """
    if m < 0:
        raise DomainError("m must be non-negative")
    size = m + 2
    b = list(beta.values[:size]) + [0] * max(0, size - len(beta))
    prev = [1] * (size + 1)
    levels = [prev]
    for _ in range(m // 2):
        cur = [0] * (size + 1)
        acc = 0
        for j in range(size):
            acc += b[j] * prev[j + 1]
            cur[j] = acc
        levels.append(cur)
        prev = cur
    return [levels[l][m - 2 * l] for l in range(m // 2 + 1)]
