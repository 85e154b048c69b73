"""Ladder-model family, invariant subspaces and their beta sequences.

The family is defined by the ladder operator ``A = (a^dag)^m * prod_s b_s^{k_s}``
acting on one pump mode ``a`` and ``S`` signal modes ``b_s``.  Each invariant
subspace is keyed by the pump photon number ``M`` of its top state together
with the signal offsets ``ell_s``; its basis states are the Fock states
``|M - m n, k_1 n + ell_1, ..., k_S n + ell_S>`` for ``0 <= n <= N = M // m``.

All beta values are exact Python integers.
"""

from __future__ import annotations

import itertools
import math
import operator
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Sequence

from .errors import DomainError

__all__ = [
    "ModelSpec",
    "SubspaceIndex",
    "BetaSequence",
    "beta_two_mode",
    "beta_multi_mode",
    "beta_sequence",
    "rescaled_beta",
    "rescaled_time",
    "enumerate_subspaces",
]


def _as_int(value, name: str) -> int:
    if isinstance(value, bool):
        raise DomainError(f"{name} must be an integer, got {value!r}")
    try:
        return operator.index(value)
    except TypeError:
        raise DomainError(f"{name} must be an integer, got {value!r}") from None


@dataclass(frozen=True)
class ModelSpec:
    """Pump power ``m`` and signal powers ``k_1..k_S`` of the ladder operator."""

    m: int
    signal_powers: tuple[int, ...]

    def __post_init__(self):
        m = _as_int(self.m, "m")
        ks = tuple(_as_int(k, "signal power") for k in self.signal_powers)
        if m < 1:
            raise DomainError(f"pump power m must be >= 1, got {m}")
        if not ks:
            raise DomainError("at least one signal mode is required")
        if any(k < 1 for k in ks):
            raise DomainError(f"signal powers must be >= 1, got {ks}")
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "signal_powers", ks)

    @classmethod
    def two_mode(cls, k: int, m: int = 1) -> "ModelSpec":
        return cls(m=m, signal_powers=(k,))

    @property
    def S(self) -> int:
        return len(self.signal_powers)

    def subspace(self, M: int, offsets: Sequence[int] | int = 0) -> "SubspaceIndex":
        """Build and validate a subspace label for this model."""
        if isinstance(offsets, int):
            offsets = (offsets,) * self.S
        sub = SubspaceIndex(M, tuple(offsets))
        self.check(sub)
        return sub

    def check(self, sub: "SubspaceIndex") -> None:
        if len(sub.offsets) != self.S:
            raise DomainError(
                f"expected {self.S} signal offsets, got {len(sub.offsets)}"
            )
        for ell, k in zip(sub.offsets, self.signal_powers):
            if not 0 <= ell <= k - 1:
                raise DomainError(f"offset {ell} outside 0..{k - 1}")

    def top_index(self, sub: "SubspaceIndex") -> int:
        """``N = M // m``; the subspace has dimension ``N + 1``."""
        return sub.M // self.m

    def remainder(self, sub: "SubspaceIndex") -> int:
        """``q = M - N m``, always in ``0..m-1``."""
        return sub.M - self.top_index(sub) * self.m

    def dimension(self, sub: "SubspaceIndex") -> int:
        return self.top_index(sub) + 1

    def fock_occupations(self, sub: "SubspaceIndex", n: int) -> tuple[int, ...]:
        """Photon numbers ``(pump, signal_1, ..., signal_S)`` of basis state ``n``."""
        return (sub.M - self.m * n,) + tuple(
            k * n + ell for k, ell in zip(self.signal_powers, sub.offsets)
        )


@dataclass(frozen=True)
class SubspaceIndex:
    """Invariant-subspace label ``(M, ell_1..ell_S)``."""

    M: int
    offsets: tuple[int, ...]

    def __post_init__(self):
        M = _as_int(self.M, "M")
        if M < 0:
            raise DomainError(f"M must be non-negative, got {M}")
        offsets = tuple(_as_int(x, "offset") for x in self.offsets)
        if any(x < 0 for x in offsets):
            raise DomainError(f"offsets must be non-negative, got {offsets}")
        object.__setattr__(self, "M", M)
        object.__setattr__(self, "offsets", offsets)


@dataclass(frozen=True)
class BetaSequence:
    """Exact squared ladder matrix elements ``beta_0..beta_N`` of one subspace.

    ``model`` and ``subspace`` are ``None`` for sequences built directly from
    values (see :meth:`from_values`).
    """

    values: tuple[int, ...]
    subspace: SubspaceIndex | None = None
    model: ModelSpec | None = None

    def __post_init__(self):
        values = tuple(int(v) for v in self.values)
        if not values:
            raise DomainError("a beta sequence has at least one entry")
        if values[-1] != 0:
            raise DomainError("the last beta must vanish")
        if any(v <= 0 for v in values[:-1]):
            raise DomainError("beta_n must be positive for n < N")
        object.__setattr__(self, "values", values)

    @classmethod
    def from_values(cls, values: Sequence[int]) -> "BetaSequence":
        return cls(tuple(values))

    @property
    def N(self) -> int:
        return len(self.values) - 1

    def __len__(self) -> int:
        return len(self.values)

    def __getitem__(self, n):
        return self.values[n]

    def __iter__(self) -> Iterator[int]:
        return iter(self.values)

    def commutator(self, n: int) -> int:
        """``B(n) = beta_n - beta_{n-1}`` with ``beta_{-1} = 0``."""
        if not 0 <= n <= self.N:
            raise DomainError(f"n={n} outside 0..{self.N}")
        return self.values[n] - (self.values[n - 1] if n > 0 else 0)

    def total(self) -> int:
        """``sum_{s<N} beta_s``, which equals ``g^(1)_{N-1}``."""
        return sum(self.values)

    def prefix_products(self) -> list[int]:
        """Exact ``prod_{l<n} beta_l`` for ``n = 0..N``."""
        out = [1]
        for b in self.values[:-1]:
            out.append(out[-1] * b)
        return out

    def rescaled(self) -> list[float]:
        """``beta_n / M^m`` for every ``n``; needs a model-backed sequence."""
        if self.model is None or self.subspace is None:
            raise DomainError("rescaling needs the model and subspace labels")
        return [rescaled_beta(self.model, self.subspace, n) for n in range(len(self))]


def _check_n(model: ModelSpec, sub: SubspaceIndex, n: int) -> int:
    model.check(sub)
    N = model.top_index(sub)
    if not 0 <= n <= N:
        raise DomainError(f"n={n} outside 0..{N}")
    return N


def beta_multi_mode(model: ModelSpec, sub: SubspaceIndex, n: int) -> int:
    """``[prod_{i<m}(M - m n - i)] * prod_s prod_{j=1..k_s}(k_s n + ell_s + j)``."""
    _check_n(model, sub, n)
    pump = math.prod(sub.M - model.m * n - i for i in range(model.m))
    signal = 1
    for k, ell in zip(model.signal_powers, sub.offsets):
        signal *= math.prod(k * n + ell + j for j in range(1, k + 1))
    return pump * signal


def beta_two_mode(model: ModelSpec, sub: SubspaceIndex, n: int) -> int:
    """Two-mode (``S = 1``) beta; same product as :func:`beta_multi_mode`."""
    if model.S != 1:
        raise DomainError("beta_two_mode needs exactly one signal mode")
    _check_n(model, sub, n)
    (k,), (ell,) = model.signal_powers, sub.offsets
    pump = 1
    for i in range(model.m):
        pump *= sub.M - model.m * n - i
    signal = 1
    for j in range(1, k + 1):
        signal *= k * n + ell + j
    return pump * signal


def beta_sequence(model: ModelSpec, sub: SubspaceIndex) -> BetaSequence:
    model.check(sub)
    N = model.top_index(sub)
    values = tuple(beta_multi_mode(model, sub, n) for n in range(N + 1))
    return BetaSequence(values, subspace=sub, model=model)


def rescaled_beta(model: ModelSpec, sub: SubspaceIndex, n: int) -> float:
    """``beta_n / M^m``, rounded once from the exact rational."""
    if sub.M < 1:
        raise DomainError("time rescaling is undefined for M = 0")
    return float(Fraction(beta_multi_mode(model, sub, n), sub.M**model.m))


def rescaled_time(model: ModelSpec, sub: SubspaceIndex, tau: float) -> float:
    """``sqrt(M^m) * tau``; evolving the rescaled betas for this time is equivalent."""
    if sub.M < 1:
        raise DomainError("time rescaling is undefined for M = 0")
    return math.sqrt(sub.M**model.m) * tau


def enumerate_subspaces(model: ModelSpec, max_M: int) -> list[SubspaceIndex]:
    """All labels with ``M <= max_M``, lexicographic in ``(M, ell_1, ..)``."""
    if max_M < 0:
        raise DomainError("max_M must be non-negative")
    ranges = [range(k) for k in model.signal_powers]
    return [
        SubspaceIndex(M, offsets)
        for M in range(max_M + 1)
        for offsets in itertools.product(*ranges)
    ]
