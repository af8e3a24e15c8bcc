"""Monte Carlo single codeword-transfer experiments.

Alice encodes a probability vector as a state; Bob draws ``n`` codewords per
trial and decodes ``p_hat = counts / n``, ``y_hat = sqrt(p_hat)`` and
``omega_hat = mu^{-1}(p_hat)`` (``arccos sqrt(p_hat)`` for amplitude encoding).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .core import Encoding, ProbabilityVector, StateVector, amplitude_encode, measure_probabilities
from .errors import DomainError
from .estimation import OutcomeCounts, estimate, sigma_theory
from .rng import chunks, parallel_map, stream

TRIAL_CHUNK = 256


@dataclass(frozen=True)
class SingleConfig:
    p: ProbabilityVector
    n: int
    trials: int
    seed: int
    encoding: Encoding = field(default_factory=Encoding.amplitude)

    def __post_init__(self):
        if not isinstance(self.p, ProbabilityVector):
            object.__setattr__(self, "p", ProbabilityVector(self.p))
        if self.n < 1:
            raise DomainError(f"n must be >= 1, got {self.n}")
        if self.trials < 1:
            raise DomainError(f"trials must be >= 1, got {self.trials}")


@dataclass(frozen=True)
class TrialResult:
    counts: OutcomeCounts
    p_hat: ProbabilityVector
    omega_hat: np.ndarray
    y_hat: np.ndarray


def sample_outcomes(psi: StateVector, n: int, rng: np.random.Generator) -> OutcomeCounts:
    """Tally ``n`` i.i.d. codewords drawn with probabilities ``y_i^2``."""
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    p = measure_probabilities(psi).p
    return OutcomeCounts(tuple(int(c) for c in rng.multinomial(n, p / p.sum())))


def draw_counts(p: ProbabilityVector, n: int, trials: int, seed: int, key: Sequence[int] = (),
                threads: int | None = 1) -> np.ndarray:
    """``(trials, m)`` array of multinomial tallies; trial ``t`` uses stream ``(seed, *key, t)``."""
    q = p.p / p.p.sum()
    key = tuple(key)

    def work(block: range) -> np.ndarray:
        out = np.empty((len(block), q.size), dtype=np.int64)
        for j, t in enumerate(block):
            out[j] = stream(seed, *key, t).multinomial(n, q)
        return out

    blocks = parallel_map(work, chunks(trials, TRIAL_CHUNK), threads)
    return np.concatenate(blocks, axis=0)


def decode(counts: np.ndarray, n: int, encoding: Encoding) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Return ``(p_hat, y_hat, omega_hat)`` arrays for tallies of shape ``(..., m)``."""
    p_hat = np.asarray(counts, dtype=float) / n
    return p_hat, np.sqrt(p_hat), encoding.inverse(p_hat)


def run_experiment(config: SingleConfig, threads: int | None = 1) -> list[TrialResult]:
    psi = amplitude_encode(config.p)
    counts = draw_counts(measure_probabilities(psi), config.n, config.trials, config.seed, threads=threads)
    results = []
    for row in counts:
        oc = OutcomeCounts(tuple(int(c) for c in row))
        p_hat = estimate(oc)
        _, y_hat, omega_hat = decode(row, config.n, config.encoding)
        results.append(TrialResult(oc, p_hat, omega_hat, y_hat))
    return results


def exact_moments(p: ProbabilityVector | Sequence[float], n: int, encoding: Encoding | None = None) -> dict:
    """Exact estimator moments for ``m = 2`` by enumerating all ``n + 1`` binomial outcomes.

    The decoding goes through the same ``estimate``/``decode`` path as the
    Monte Carlo runs, weighted by the exact binomial probabilities.
    """
    if not isinstance(p, ProbabilityVector):
        p = ProbabilityVector(p)
    if p.m != 2:
        raise DomainError(f"exact enumeration is implemented for m = 2, got m = {p.m}")
    encoding = encoding or Encoding.amplitude()
    q = float(p.p[0])
    omega = encoding.inverse(p.p)
    y = np.sqrt(p.p)
    weights = np.empty(n + 1)
    p_hat = np.empty((n + 1, 2))
    for k in range(n + 1):
        weights[k] = math.comb(n, k) * q**k * (1.0 - q) ** (n - k)
        p_hat[k] = estimate(OutcomeCounts((k, n - k))).p
    _, y_hat, omega_hat = decode(p_hat * n, n, encoding)
    mean_omega = weights @ omega_hat
    return {
        "n": n,
        "p": p.to_list(),
        "mean_p_hat": (weights @ p_hat).tolist(),
        "mean_omega_hat": mean_omega.tolist(),
        "mse_omega": (weights @ (omega_hat - omega) ** 2).tolist(),
        "var_omega": (weights @ (omega_hat - mean_omega) ** 2).tolist(),
        "mse_y_total": float(weights @ ((y_hat - y) ** 2).sum(axis=1)),
    }


@dataclass(frozen=True)
class ScalingRow:
    n: int
    var_omega: tuple[float, ...]
    excluded: tuple[int, ...]
    mse_y_total: float
    predicted_component: float
    predicted_total: float
    sigma_nominal: float

    @property
    def ratio_component(self) -> tuple[float, ...]:
        return tuple(v / self.predicted_component for v in self.var_omega)

    @property
    def ratio_total(self) -> float:
        return self.mse_y_total / self.predicted_total if self.predicted_total > 0 else float("nan")


@dataclass(frozen=True)
class ScalingReport:
    p: tuple[float, ...]
    trials: int
    seed: int
    encoding: str
    rows: tuple[ScalingRow, ...]

    @property
    def m(self) -> int:
        return len(self.p)

    def row(self, n: int) -> ScalingRow:
        for r in self.rows:
            if r.n == n:
                return r
        raise KeyError(n)

    def to_dict(self) -> dict:
        return {
            "m": self.m,
            "p": list(self.p),
            "trials": self.trials,
            "seed": self.seed,
            "encoding": self.encoding,
            "rows": [
                {
                    "n": r.n,
                    "var_omega": list(r.var_omega),
                    "ratio_component": list(r.ratio_component),
                    "excluded": list(r.excluded),
                    "mse_y_total": r.mse_y_total,
                    "ratio_total": r.ratio_total,
                    "predicted_component": r.predicted_component,
                    "predicted_total": r.predicted_total,
                    "sigma_nominal": r.sigma_nominal,
                }
                for r in self.rows
            ],
        }

    def csv_header(self) -> list[str]:
        m = self.m
        return (
            ["n"]
            + [f"var_omega_{i + 1}" for i in range(m)]
            + [f"ratio_{i + 1}" for i in range(m)]
            + [f"excluded_{i + 1}" for i in range(m)]
            + ["mse_y_total", "predicted_component", "predicted_total", "ratio_total", "sigma_nominal"]
        )

    def csv_rows(self) -> list[list]:
        return [
            [r.n, *r.var_omega, *r.ratio_component, *r.excluded,
             r.mse_y_total, r.predicted_component, r.predicted_total, r.ratio_total, r.sigma_nominal]
            for r in self.rows
        ]


def error_scaling_study(p: ProbabilityVector | Sequence[float], n_list: Sequence[int], trials: int, seed: int,
                        threads: int | None = 1, encoding: Encoding | None = None) -> ScalingReport:
    """Measure ``Var(omega_hat_i)`` and ``sum_i E[(y_hat_i - y_i)^2]`` against ``1/(4n)`` and ``(m-1)/(4n)``.

    Trials where ``p_hat_i`` hits 0 or 1 are left out of that component's
    variance and counted in ``excluded``.
    """
    if not isinstance(p, ProbabilityVector):
        p = ProbabilityVector(p)
    if np.any(p.p <= 0.0) or np.any(p.p >= 1.0):
        raise DomainError("error scaling needs every probability strictly inside (0, 1)")
    if trials < 2:
        raise DomainError("error scaling needs at least 2 trials")
    encoding = encoding or Encoding.amplitude()
    y = np.sqrt(p.p)
    m = p.m
    rows = []
    for n in n_list:
        n = int(n)
        if n < 1:
            raise DomainError(f"n must be >= 1, got {n}")
        counts = draw_counts(p, n, trials, seed, key=(n,), threads=threads)
        p_hat, y_hat, omega_hat = decode(counts, n, encoding)
        var_omega, excluded = [], []
        for i in range(m):
            keep = (counts[:, i] > 0) & (counts[:, i] < n)
            excluded.append(int(trials - keep.sum()))
            w = omega_hat[keep, i]
            var_omega.append(float(np.var(w, ddof=1)) if w.size > 1 else float("nan"))
        mse = float(np.mean(np.sum((y_hat - y) ** 2, axis=1)))
        rows.append(ScalingRow(
            n=n,
            var_omega=tuple(var_omega),
            excluded=tuple(excluded),
            mse_y_total=mse,
            predicted_component=1.0 / (4 * n),
            predicted_total=(m - 1) / (4 * n),
            sigma_nominal=sigma_theory(m, n),
        ))
    return ScalingReport(tuple(p.to_list()), int(trials), int(seed), encoding.name, tuple(rows))


def laser_scenario(alpha: float, n: int, seed: int, literal: bool = False) -> float:
    """Simulated polarizer link: fraction of ``n`` photons detected at relative angle ``alpha``.

    Detection probability is ``cos^2(alpha)`` (Malus' law).  ``literal=True``
    uses ``sin(alpha)`` instead, reproducing the stated decoded value verbatim.
    """
    if not 0.0 <= alpha <= math.pi / 2 + 1e-12:
        raise DomainError(f"alpha must lie in [0, pi/2], got {alpha}")
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    prob = math.sin(alpha) if literal else math.cos(alpha) ** 2
    prob = min(1.0, max(0.0, prob))
    detected = stream(seed, 0).binomial(n, prob)
    return detected / n
