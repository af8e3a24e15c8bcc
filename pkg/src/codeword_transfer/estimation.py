"""Fisher information, multinomial covariance and Cramér-Rao checks.

Only the diagonal of the Fisher information matrix is modelled: with each
codeword carrying its own parameter ``omega_i`` the minimised diagonal is

    J_ii = mu'(omega_i)^2 / (mu_i (1 - mu_i))

which is 4 everywhere for the ``cos^2`` encoding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import Encoding, ProbabilityVector
from .errors import DomainError, EndpointSingularityError

SATURATION_RTOL = 1e-9


@dataclass(frozen=True)
class OutcomeCounts:
    counts: tuple[int, ...]

    def __post_init__(self):
        counts = tuple(int(c) for c in self.counts)
        if not counts:
            raise DomainError("outcome counts are empty")
        if any(c < 0 for c in counts):
            raise DomainError("outcome counts must be nonnegative")
        object.__setattr__(self, "counts", counts)

    @property
    def n(self) -> int:
        return sum(self.counts)

    @property
    def m(self) -> int:
        return len(self.counts)


@dataclass(frozen=True)
class FisherDiagonal:
    values: np.ndarray

    def to_list(self) -> list[float]:
        return [float(v) for v in self.values]


@dataclass(frozen=True)
class CramerRaoEntry:
    omega: float
    variance_bound: float
    achieved_variance: float
    saturated: bool


@dataclass(frozen=True)
class CramerRaoReport:
    encoding: str
    n: int
    entries: tuple[CramerRaoEntry, ...]

    @property
    def all_saturated(self) -> bool:
        return all(e.saturated for e in self.entries)

    def to_dict(self) -> dict:
        return {
            "encoding": self.encoding,
            "n": self.n,
            "entries": [
                {
                    "omega": e.omega,
                    "variance_bound": e.variance_bound,
                    "achieved_variance": e.achieved_variance,
                    "saturated": e.saturated,
                }
                for e in self.entries
            ],
        }


def fisher_diagonal(enc: Encoding, omega: Sequence[float] | float) -> FisherDiagonal:
    w = np.atleast_1d(np.asarray(omega, dtype=float))
    mu = np.atleast_1d(enc.mu(w))
    d = np.atleast_1d(enc.dmu(w))
    denom = mu * np.atleast_1d(enc.mu_complement(w))
    values = np.empty_like(w)
    # the cos^2 ratio is 0/0 wherever mu(1-mu) underflows, not only at the exact endpoints
    edge = denom <= 1e-300 if enc.endpoint_limit is None else denom <= 1e-250
    if np.any(edge):
        if enc.endpoint_limit is None:
            bad = w[edge][0]
            raise EndpointSingularityError(
                f"Fisher information of the {enc.name} encoding is singular at omega = {bad!r} (mu in {{0, 1}})"
            )
        values[edge] = enc.endpoint_limit
    inner = ~edge
    values[inner] = d[inner] ** 2 / denom[inner]
    values.flags.writeable = False
    return FisherDiagonal(values)


def multinomial_covariance(p: ProbabilityVector | Sequence[float], n: int) -> np.ndarray:
    """Covariance of multinomial counts: ``n p_i (1 - p_i)`` on the diagonal, ``-n p_i p_j`` off it."""
    if not isinstance(p, ProbabilityVector):
        p = ProbabilityVector(p)
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    q = p.p
    cov = -n * np.outer(q, q)
    np.fill_diagonal(cov, n * q * (1.0 - q))
    return cov


def cramer_rao_report(enc: Encoding, omega: Sequence[float] | float, n: int) -> CramerRaoReport:
    """Compare the Cramér-Rao bound with the delta-method variance of the plug-in decoder.

    The achieved variance is that of ``omega_hat = mu^{-1}(p_hat)``:
    ``Var(p_hat) / mu'^2 = mu (1 - mu) / (n mu'^2)``.
    """
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    w = np.atleast_1d(np.asarray(omega, dtype=float))
    fisher = fisher_diagonal(enc, w).values
    var1 = np.atleast_1d(enc.mu(w)) * np.atleast_1d(enc.mu_complement(w))
    d = np.atleast_1d(enc.dmu(w))
    entries = []
    for wi, ji, vi, di in zip(w, fisher, var1, d):
        bound = 1.0 / (n * ji)
        if vi <= 1e-250 and enc.endpoint_limit is not None:
            achieved = 1.0 / (n * enc.endpoint_limit)
        else:
            achieved = vi / (n * di * di)
        saturated = abs(achieved - bound) <= SATURATION_RTOL * max(abs(bound), abs(achieved))
        entries.append(CramerRaoEntry(float(wi), float(bound), float(achieved), bool(saturated)))
    return CramerRaoReport(enc.name, int(n), tuple(entries))


def estimate(counts: OutcomeCounts | Sequence[int]) -> ProbabilityVector:
    if not isinstance(counts, OutcomeCounts):
        counts = OutcomeCounts(tuple(counts))
    if counts.n == 0:
        raise DomainError("cannot estimate probabilities from zero samples")
    c = np.asarray(counts.counts, dtype=float)
    return ProbabilityVector(c / counts.n)


def sigma_theory(m: int, n: int) -> float:
    """Nominal total error ``sqrt((m - 1) / n)``."""
    if m < 1 or n < 1:
        raise DomainError(f"need m >= 1 and n >= 1, got m = {m}, n = {n}")
    return math.sqrt((m - 1) / n)


def amplitude_covariance_diagonal(omega):
    """Single-draw variance ``mu (1 - mu) = cos^2 sin^2`` of a ``cos^2``-encoded codeword."""
    w = np.asarray(omega, dtype=float)
    return np.cos(w) ** 2 * np.sin(w) ** 2
