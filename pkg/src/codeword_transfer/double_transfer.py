"""Double codeword transfer: Alice -> (Bob, Charley) with two 2-codeword sets.

Alice prepares ``psi_A = (cos theta_alpha, sin theta_alpha)`` and
``psi_B = (cos theta_beta, sin theta_beta)``.  Each receiver independently
picks a set, rotates the detector by their angle for that set and measures.

``local`` mode: the states exist before measurement, every outcome table is
a product of local marginals and a complete four-variable table exists.

``contextual`` mode: when both pick the same set the first measurement fixes
the other party's state (``theta -> theta_c`` on outcome 1, ``theta_c + pi/2``
on outcome 2), so the joint table depends on the situation.  Bob's *local*
table is the squared amplitude superposition over Charley's branches, which
collapses to ``cos^2(theta_alpha - theta_b)`` whatever Charley does.  Summing
the situation-dependent joint table does not reproduce it; that gap is the
FUNC violation.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields, replace
from typing import Iterable, Mapping, Sequence

import numpy as np

from .core import StateVector, measure_probabilities, rotate
from .entropy import PAIRS, JointTable, SettingPairTable
from .errors import DimensionError, DomainError
from .rng import stream

MODES = ("contextual", "local")
SETS = ("A", "B")
ANGLE_FIELDS = ("theta_alpha", "theta_beta", "theta_bA", "theta_bB", "theta_cA", "theta_cB")


@dataclass(frozen=True)
class DoubleConfig:
    theta_alpha: float = 0.0
    theta_beta: float = 0.0
    theta_bA: float = 0.0
    theta_bB: float = 0.0
    theta_cA: float = 0.0
    theta_cB: float = 0.0
    mode: str = "contextual"
    set_choice_prob: float = 0.5

    def __post_init__(self):
        for name in ANGLE_FIELDS:
            v = float(getattr(self, name))
            if not math.isfinite(v):
                raise DomainError(f"{name} must be finite, got {v}")
            object.__setattr__(self, name, v)
        if self.mode not in MODES:
            raise DomainError(f"mode must be one of {MODES}, got {self.mode!r}")
        q = float(self.set_choice_prob)
        if not 0.0 <= q <= 1.0:
            raise DomainError(f"set_choice_prob must lie in [0, 1], got {q}")
        object.__setattr__(self, "set_choice_prob", q)

    @classmethod
    def from_mapping(cls, data: Mapping) -> "DoubleConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise DomainError(f"unknown double-transfer keys: {sorted(unknown)}")
        return cls(**dict(data))

    def to_dict(self) -> dict:
        return asdict(self)

    def source(self, s: str) -> float:
        return self.theta_alpha if _check_set(s) == "A" else self.theta_beta

    def bob(self, s: str) -> float:
        return self.theta_bA if _check_set(s) == "A" else self.theta_bB

    def charley(self, s: str) -> float:
        return self.theta_cA if _check_set(s) == "A" else self.theta_cB

    def with_angles(self, **angles) -> "DoubleConfig":
        return replace(self, **angles)

    def shifted(self, delta: float) -> "DoubleConfig":
        """Same configuration with every angle offset by ``delta``."""
        return replace(self, **{k: getattr(self, k) + delta for k in ANGLE_FIELDS})


def _check_set(s: str) -> str:
    if s not in SETS:
        raise DomainError(f"set must be 'A' or 'B', got {s!r}")
    return s


def _detect(theta_state: float, theta_detector: float) -> np.ndarray:
    """Outcome probabilities for state angle ``theta_state`` behind a detector at ``theta_detector``."""
    return measure_probabilities(rotate(StateVector.from_angle(theta_state), theta_detector)).p


def _collapsed_joint(theta_source: float, theta_first: float, theta_second: float) -> np.ndarray:
    """Joint ``[first_outcome, second_outcome]`` when the first measurement fixes the second party's state."""
    first = _detect(theta_source, theta_first)
    out = np.empty((2, 2))
    for k in range(2):
        out[k] = first[k] * _detect(theta_first + k * math.pi / 2, theta_second)
    return out


def contextual_joint(config: DoubleConfig, pair: tuple[str, str], first: str = "charley") -> JointTable:
    """Situation-dependent 2x2 table for ``pair = (bob_set, charley_set)``; rows are Bob's outcome.

    ``first`` picks who measures first in same-set events.
    """
    bs, cs = _check_set(pair[0]), _check_set(pair[1])
    if bs != cs:
        return local_joint(config, pair)
    src, tb, tc = config.source(bs), config.bob(bs), config.charley(cs)
    if first == "charley":
        return JointTable(_collapsed_joint(src, tc, tb).T)
    if first == "bob":
        return JointTable(_collapsed_joint(src, tb, tc))
    raise DomainError(f"first must be 'bob' or 'charley', got {first!r}")


def local_joint(config: DoubleConfig, pair: tuple[str, str]) -> JointTable:
    """Product of the two local marginals for ``pair = (bob_set, charley_set)``."""
    bs, cs = _check_set(pair[0]), _check_set(pair[1])
    pb = _detect(config.source(bs), config.bob(bs))
    pc = _detect(config.source(cs), config.charley(cs))
    return JointTable(np.outer(pb, pc))


def joint(config: DoubleConfig, pair: tuple[str, str]) -> JointTable:
    if config.mode == "local":
        return local_joint(config, pair)
    return contextual_joint(config, pair)


def pair_tables(config: DoubleConfig) -> SettingPairTable:
    return SettingPairTable({p: joint(config, p) for p in PAIRS})


def complete_table(config: DoubleConfig) -> JointTable:
    """Four-variable table ``(a1, a2, b1, b2)`` = (Bob A, Charley A, Bob B, Charley B) of local mode."""
    if config.mode != "local":
        raise DomainError("a complete probability table exists only in local mode")
    margs = [
        _detect(config.theta_alpha, config.theta_bA),
        _detect(config.theta_alpha, config.theta_cA),
        _detect(config.theta_beta, config.theta_bB),
        _detect(config.theta_beta, config.theta_cB),
    ]
    return JointTable(np.einsum("i,j,k,l->ijkl", *margs))


def bob_local_probabilities(config: DoubleConfig, bob_set: str) -> np.ndarray:
    """Bob's outcome probabilities for ``bob_set`` as seen from his side alone.

    In contextual mode this is the squared norm of the superposition of the
    two collapsed states, each weighted by Charley's branch amplitude.
    """
    s = _check_set(bob_set)
    src, tb = config.source(s), config.bob(s)
    if config.mode == "local":
        return _detect(src, tb)
    tc = config.charley(s)
    amps = rotate(StateVector.from_angle(src), tc).y
    vec = np.zeros(2)
    for k in range(2):
        vec += amps[k] * rotate(StateVector.from_angle(tc + k * math.pi / 2), tb).y
    return measure_probabilities(StateVector(vec)).p


@dataclass(frozen=True)
class MarginalProfile:
    bob_set: str
    theta_c: np.ndarray
    local: np.ndarray
    joint_marginal: np.ndarray
    expected: float

    @property
    def max_deviation(self) -> float:
        return float(np.max(np.abs(self.local - self.expected)))

    @property
    def max_func_gap(self) -> float:
        """Largest gap between the joint-table marginal and Bob's local table."""
        return float(np.max(np.abs(self.joint_marginal - self.local)))

    def rows(self) -> list[tuple[float, float]]:
        return [(float(t), float(p)) for t, p in zip(self.theta_c, self.local)]


def bob_marginal(config: DoubleConfig, bob_set: str, theta_c_grid: Iterable[float]) -> MarginalProfile:
    """P(Bob = outcome 1) for ``bob_set`` while Charley's same-set angle sweeps ``theta_c_grid``."""
    s = _check_set(bob_set)
    key = "theta_cA" if s == "A" else "theta_cB"
    grid = np.asarray(list(theta_c_grid), dtype=float)
    local = np.empty_like(grid)
    joint_m = np.empty_like(grid)
    for i, tc in enumerate(grid):
        cfg = replace(config, **{key: float(tc)})
        local[i] = bob_local_probabilities(cfg, s)[0]
        joint_m[i] = joint(cfg, (s, s)).marginal([0])[0]
    expected = math.cos(config.source(s) - config.bob(s)) ** 2
    return MarginalProfile(s, grid, local, joint_m, expected)


def sample_bob_local(config: DoubleConfig, bob_set: str, n: int, seed: int, key: Sequence[int] = ()) -> int:
    """Number of outcome-1 detections in ``n`` events of Bob's local record."""
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    p1 = float(bob_local_probabilities(config, bob_set)[0])
    return int(stream(seed, 7, *key).binomial(n, min(1.0, max(0.0, p1))))


@dataclass(frozen=True)
class JointCounts:
    counts: Mapping[tuple[str, str], np.ndarray]

    def __post_init__(self):
        clean = {}
        for p in PAIRS:
            c = np.asarray(self.counts[p], dtype=np.int64).reshape(2, 2)
            if np.any(c < 0):
                raise DomainError("tallies must be nonnegative")
            c.flags.writeable = False
            clean[p] = c
        object.__setattr__(self, "counts", clean)

    def total(self, pair: tuple[str, str]) -> int:
        return int(self.counts[pair].sum())

    @property
    def n(self) -> int:
        return sum(self.total(p) for p in PAIRS)

    def to_tables(self) -> SettingPairTable:
        empty = [p for p in PAIRS if self.total(p) == 0]
        if empty:
            raise DomainError(f"no events recorded for setting pairs {empty}")
        return SettingPairTable({p: JointTable.from_counts(self.counts[p]) for p in PAIRS})

    def csv_rows(self) -> list[list]:
        rows = []
        for b, c in PAIRS:
            for i in range(2):
                for j in range(2):
                    rows.append([f"{b}{c}", i + 1, j + 1, int(self.counts[(b, c)][i, j])])
        return rows

    def to_dict(self) -> dict:
        return {
            f"{b}{c}": {"counts": self.counts[(b, c)].tolist(), "total": self.total((b, c))}
            for b, c in PAIRS
        }


def sample_double(config: DoubleConfig, n: int, seed: int, key: Sequence[int] = ()) -> JointCounts:
    """Tally ``n`` events: independent set choices, then outcomes from the per-pair table.

    Drawing the pair split and then each pair's 2x2 tally from multinomials is
    equivalent in distribution to drawing the events one by one.
    """
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    q = config.set_choice_prob
    choice = {"A": q, "B": 1.0 - q}
    pair_p = np.array([choice[b] * choice[c] for b, c in PAIRS])
    split = stream(seed, *key, 0).multinomial(n, pair_p / pair_p.sum())
    out = {}
    for idx, (pair, k) in enumerate(zip(PAIRS, split)):
        table = joint(config, pair).probs.reshape(-1)
        out[pair] = stream(seed, *key, idx + 1).multinomial(int(k), table / table.sum()).reshape(2, 2)
    return JointCounts(out)


@dataclass(frozen=True)
class FuncCheck:
    lhs: float
    rhs: float
    difference: float


def func_violation(alpha1: Sequence[float], alpha2: Sequence[float], psi: Sequence[float]) -> FuncCheck:
    """Compare ``|a1 + a2|^2 |psi|^2`` with ``(|a1|^2 + |a2|^2) |psi|^2``."""
    a1, a2, v = (np.asarray(x, dtype=float).reshape(-1) for x in (alpha1, alpha2, psi))
    if not a1.size == a2.size == v.size:
        raise DimensionError(f"vector dimensions differ: {a1.size}, {a2.size}, {v.size}")
    s = a1 + a2
    norm_psi = float(v @ v)
    lhs = float(s @ s) * norm_psi
    rhs = (float(a1 @ a1) + float(a2 @ a2)) * norm_psi
    return FuncCheck(lhs, rhs, lhs - rhs)
