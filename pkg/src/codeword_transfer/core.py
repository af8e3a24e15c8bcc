"""Quantum-space data model: codewords, probability and state vectors, encodings.

Probability vectors are encoded as real unit vectors whose squared components
are the probabilities (``y_i = sqrt(p_i) = cos(omega_i)``).  Encodings map a
codeword angle ``omega`` to an observation probability ``mu(omega)``; the
amplitude family ``cos^2`` is the one that solves ``mu'^2 = 4 mu (1 - mu)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import DimensionError, DomainError, NormalizationError

EXACT_TOL = 1e-12
FILE_TOL = 1e-9


def _frozen_array(values) -> np.ndarray:
    arr = np.array(values, dtype=float).reshape(-1)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class CodewordSet:
    labels: tuple[str, ...]

    def __post_init__(self):
        labels = tuple(str(x) for x in self.labels)
        if not labels:
            raise DomainError("a codeword set needs at least one label")
        if len(set(labels)) != len(labels):
            raise DomainError(f"codeword labels must be distinct: {labels}")
        object.__setattr__(self, "labels", labels)

    @classmethod
    def numbered(cls, m: int) -> "CodewordSet":
        return cls(tuple(f"w{i + 1}" for i in range(m)))

    @property
    def m(self) -> int:
        return len(self.labels)


@dataclass(frozen=True)
class ProbabilityVector:
    """Probabilities of observing each of ``m`` codewords.

    ``tol`` bounds the normalization error; use ``FILE_TOL`` for values that
    were read back from decimal text.
    """

    p: np.ndarray
    tol: float = field(default=EXACT_TOL, compare=False, repr=False)

    def __post_init__(self):
        p = _frozen_array(self.p)
        if p.size == 0:
            raise NormalizationError("probability vector is empty")
        if not np.all(np.isfinite(p)):
            raise NormalizationError("probabilities must be finite")
        if np.any(p < -self.tol) or np.any(p > 1 + self.tol):
            raise NormalizationError("probabilities must lie in [0, 1]")
        if abs(p.sum() - 1.0) > self.tol:
            raise NormalizationError(f"probabilities must sum to 1 (got {p.sum():.17g})")
        object.__setattr__(self, "p", p)

    @property
    def m(self) -> int:
        return self.p.size

    def to_list(self) -> list[float]:
        return [float(x) for x in self.p]

    def __len__(self) -> int:
        return self.p.size


@dataclass(frozen=True)
class StateVector:
    """Unit vector ``y`` in R^m; canonical states have ``y_i >= 0``.

    Signed components are allowed so that 2-D rotations stay closed.
    """

    y: np.ndarray
    tol: float = field(default=EXACT_TOL, compare=False, repr=False)

    def __post_init__(self):
        y = _frozen_array(self.y)
        if y.size == 0:
            raise NormalizationError("state vector is empty")
        if not np.all(np.isfinite(y)):
            raise NormalizationError("state components must be finite")
        norm2 = float(np.dot(y, y))
        if abs(norm2 - 1.0) > self.tol:
            raise NormalizationError(f"state vector must have unit norm (|y|^2 = {norm2:.17g})")
        object.__setattr__(self, "y", y)

    @classmethod
    def from_angle(cls, theta: float) -> "StateVector":
        """The 2-D state ``(cos theta, sin theta)``."""
        return cls(np.array([math.cos(theta), math.sin(theta)]))

    @property
    def m(self) -> int:
        return self.y.size

    @property
    def is_canonical(self) -> bool:
        return bool(np.all(self.y >= 0.0))

    @property
    def omega(self) -> np.ndarray:
        """Per-component angles ``arccos(y_i)`` (in [0, pi/2] for canonical states)."""
        return np.arccos(np.clip(self.y, -1.0, 1.0))

    @property
    def angle(self) -> float:
        if self.m != 2:
            raise DimensionError(f"angle is defined for m = 2 only, got m = {self.m}")
        return math.atan2(self.y[1], self.y[0])

    def to_list(self) -> list[float]:
        return [float(x) for x in self.y]


def amplitude_encode(p: ProbabilityVector | Sequence[float]) -> StateVector:
    if not isinstance(p, ProbabilityVector):
        p = ProbabilityVector(p)
    # clip removes -tol round-off before the square root
    y = np.sqrt(np.clip(p.p, 0.0, None))
    return StateVector(y / math.sqrt(float(np.dot(y, y))), tol=max(p.tol, EXACT_TOL))


def measure_probabilities(psi: StateVector | Sequence[float]) -> ProbabilityVector:
    if not isinstance(psi, StateVector):
        psi = StateVector(psi)
    return ProbabilityVector(psi.y * psi.y, tol=max(psi.tol, EXACT_TOL))


def rotate(psi: StateVector, theta: float) -> StateVector:
    """Rotate a 2-D state so that its angle parameter shifts by ``-theta``."""
    if psi.m != 2:
        raise DimensionError(f"rotation is defined for m = 2, got m = {psi.m}")
    c, s = math.cos(theta), math.sin(theta)
    y1, y2 = psi.y
    return StateVector(np.array([y1 * c + y2 * s, -y1 * s + y2 * c]), tol=max(psi.tol, EXACT_TOL))


ArrayFn = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class Encoding:
    """A differentiable map ``omega -> mu(omega)`` on ``[lower, upper]``.

    ``endpoint_limit`` is the analytic value of ``dmu^2 / (mu (1 - mu))`` where
    ``mu`` reaches 0 or 1, or ``None`` when no finite limit exists.
    """

    family: str
    mu_fn: ArrayFn
    dmu_fn: ArrayFn
    inverse_fn: ArrayFn
    lower: float
    upper: float
    endpoint_limit: float | None = None
    params: tuple = ()
    complement_fn: ArrayFn | None = None

    def mu(self, omega):
        return self.mu_fn(self._in_domain(omega))

    def dmu(self, omega):
        return self.dmu_fn(self._in_domain(omega))

    def mu_complement(self, omega):
        """``1 - mu(omega)``, computed without cancellation where the family allows."""
        w = self._in_domain(omega)
        if self.complement_fn is not None:
            return self.complement_fn(w)
        return 1.0 - self.mu_fn(w)

    def inverse(self, prob):
        """Decode a probability back to the codeword angle."""
        return self.inverse_fn(np.clip(np.asarray(prob, dtype=float), 0.0, 1.0))

    def _in_domain(self, omega) -> np.ndarray:
        w = np.asarray(omega, dtype=float)
        slack = 1e-12 * max(1.0, abs(self.upper))
        if np.any(w < self.lower - slack) or np.any(w > self.upper + slack) or not np.all(np.isfinite(w)):
            raise DomainError(
                f"omega outside the {self.name} encoding domain [{self.lower}, {self.upper}]"
            )
        return w

    @property
    def name(self) -> str:
        if self.family == "power":
            return f"power({self.params[0]:g})"
        return self.family

    def derivative_error(self, grid, h: float = 1e-6) -> float:
        """Worst relative gap between ``dmu`` and a central difference of ``mu`` on ``grid``."""
        w = np.asarray(grid, dtype=float)
        w = np.clip(w, self.lower + h, self.upper - h)
        fd = (self.mu_fn(w + h) - self.mu_fn(w - h)) / (2 * h)
        an = self.dmu_fn(w)
        return float(np.max(np.abs(fd - an) / np.maximum(1.0, np.abs(an))))

    # built-in families

    @classmethod
    def amplitude(cls) -> "Encoding":
        return cls(
            family="amplitude",
            mu_fn=lambda w: np.cos(w) ** 2,
            dmu_fn=lambda w: -np.sin(2.0 * w),
            inverse_fn=lambda p: np.arccos(np.sqrt(p)),
            lower=0.0,
            upper=math.pi / 2,
            endpoint_limit=4.0,
            complement_fn=lambda w: np.sin(w) ** 2,
        )

    @classmethod
    def identity(cls) -> "Encoding":
        return cls(
            family="identity",
            mu_fn=lambda w: np.asarray(w, dtype=float) * 1.0,
            dmu_fn=lambda w: np.ones_like(np.asarray(w, dtype=float)),
            inverse_fn=lambda p: np.asarray(p, dtype=float) * 1.0,
            lower=0.0,
            upper=1.0,
        )

    @classmethod
    def power(cls, k: float) -> "Encoding":
        k = float(k)
        if not k > 0:
            raise DomainError(f"power encoding needs k > 0, got {k}")

        def dmu(w):
            with np.errstate(divide="ignore"):
                return k * np.asarray(w, dtype=float) ** (k - 1.0)

        return cls(
            family="power",
            mu_fn=lambda w: np.asarray(w, dtype=float) ** k,
            dmu_fn=dmu,
            inverse_fn=lambda p: np.asarray(p, dtype=float) ** (1.0 / k),
            lower=0.0,
            upper=1.0,
            params=(k,),
        )

    @classmethod
    def custom(cls, omega, mu, dmu) -> "Encoding":
        """Tabulated encoding, linearly interpolated between the given points.

        ``omega`` must be strictly increasing and ``mu`` strictly monotone for
        the decoder to be well defined.
        """
        w = np.asarray(omega, dtype=float)
        m = np.asarray(mu, dtype=float)
        d = np.asarray(dmu, dtype=float)
        if not (w.ndim == m.ndim == d.ndim == 1 and w.size == m.size == d.size >= 2):
            raise DimensionError("custom encoding needs equal-length omega, mu, dmu tables (>= 2 points)")
        if np.any(np.diff(w) <= 0):
            raise DomainError("custom encoding omega table must be strictly increasing")
        if np.any(m < 0) or np.any(m > 1):
            raise DomainError("custom encoding mu values must lie in [0, 1]")
        diffs = np.diff(m)
        if np.all(diffs > 0):
            inv = lambda p: np.interp(p, m, w)
        elif np.all(diffs < 0):
            inv = lambda p: np.interp(p, m[::-1], w[::-1])
        else:
            def inv(p):
                raise DomainError("custom encoding is not monotone; it cannot be decoded")
        return cls(
            family="custom",
            mu_fn=lambda x: np.interp(x, w, m),
            dmu_fn=lambda x: np.interp(x, w, d),
            inverse_fn=inv,
            lower=float(w[0]),
            upper=float(w[-1]),
            params=(tuple(w), tuple(m), tuple(d)),
        )

    @classmethod
    def from_name(cls, name: str) -> "Encoding":
        """Parse ``amplitude``, ``identity`` or ``power(k)`` / ``power:k``."""
        key = name.strip().lower()
        if key in ("amplitude", "cos2", "cos^2"):
            return cls.amplitude()
        if key in ("identity", "density"):
            return cls.identity()
        if key.startswith("power"):
            arg = key[5:].strip("():= ")
            try:
                return cls.power(float(arg))
            except ValueError:
                raise DomainError(f"cannot parse power exponent from {name!r}") from None
        raise DomainError(f"unknown encoding {name!r} (expected amplitude, identity, power(k))")


def encoding_ode_residual(enc: Encoding, omega):
    """``dmu^2 - 4 mu (1 - mu)``; zero where the encoding is locally variance-optimal."""
    mu = enc.mu(omega)
    d = enc.dmu(omega)
    res = d * d - 4.0 * mu * enc.mu_complement(omega)
    return float(res) if np.ndim(res) == 0 else res
