"""Shannon, joint and conditional entropies (in bits) and the entropic Bell test.

For a complete table over ``(a1, a2, b1, b2)`` (Bob and Charley outcomes for
sets A and B) the chain rule forces

    S(a1 | a2) <= S(a1 | b2) + S(b2 | b1) + S(b1 | a2)

``delta_s`` evaluates ``lhs - rhs`` from the four per-setting 2x2 tables,
where a positive value certifies that no complete table exists.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .core import EXACT_TOL, FILE_TOL, ProbabilityVector
from .errors import DimensionError, NormalizationError

BELL_TOL = 1e-9

# setting pair = (Bob's set, Charley's set)
PAIRS = (("A", "A"), ("A", "B"), ("B", "B"), ("B", "A"))


def _entropy_bits(p: np.ndarray) -> float:
    q = p[p > 0.0]
    return float(-np.sum(q * np.log2(q)))


def shannon_entropy(p: ProbabilityVector | Sequence[float]) -> float:
    if not isinstance(p, ProbabilityVector):
        p = ProbabilityVector(p)
    return _entropy_bits(p.p)


@dataclass(frozen=True)
class JointTable:
    """Normalized probability table over the product of ``len(dims)`` discrete variables."""

    probs: np.ndarray
    tol: float = EXACT_TOL

    def __post_init__(self):
        probs = np.array(self.probs, dtype=float)
        if probs.ndim == 0:
            raise DimensionError("a joint table needs at least one variable")
        if not np.all(np.isfinite(probs)) or np.any(probs < -self.tol):
            raise NormalizationError("table entries must be finite and nonnegative")
        total = probs.sum()
        if abs(total - 1.0) > self.tol:
            raise NormalizationError(f"table must sum to 1 (got {total:.17g})")
        probs = np.clip(probs, 0.0, None)
        probs.flags.writeable = False
        object.__setattr__(self, "probs", probs)

    @classmethod
    def from_flat(cls, dims: Sequence[int], flat: Sequence[float], tol: float = EXACT_TOL) -> "JointTable":
        dims = tuple(int(d) for d in dims)
        flat = np.asarray(flat, dtype=float)
        if flat.size != int(np.prod(dims)):
            raise DimensionError(f"{flat.size} values do not fill a table of shape {dims}")
        return cls(flat.reshape(dims), tol=tol)

    @classmethod
    def from_counts(cls, counts) -> "JointTable":
        c = np.asarray(counts, dtype=float)
        total = c.sum()
        if total <= 0:
            raise NormalizationError("cannot normalize an empty tally")
        return cls(c / total)

    @property
    def dims(self) -> tuple[int, ...]:
        return self.probs.shape

    @property
    def nvars(self) -> int:
        return self.probs.ndim

    def marginal(self, keep: Iterable[int]) -> np.ndarray:
        keep = sorted(set(int(k) for k in keep))
        for k in keep:
            if not 0 <= k < self.nvars:
                raise DimensionError(f"variable index {k} out of range for {self.nvars} variables")
        drop = tuple(i for i in range(self.nvars) if i not in keep)
        return self.probs.sum(axis=drop) if drop else self.probs

    def to_dict(self) -> dict:
        return {"dims": list(self.dims), "probs": [float(x) for x in self.probs.reshape(-1)]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str | Mapping) -> "JointTable":
        data = json.loads(text) if isinstance(text, str) else text
        return cls.from_flat(data["dims"], data["probs"], tol=FILE_TOL)


def _as_vars(v) -> tuple[int, ...]:
    if isinstance(v, (int, np.integer)):
        return (int(v),)
    return tuple(int(x) for x in v)


def joint_entropy(t: JointTable, variables=None) -> float:
    """``S`` of the whole table, or of the marginal over ``variables``."""
    if variables is None:
        return _entropy_bits(t.probs.reshape(-1))
    vs = _as_vars(variables)
    if not vs:
        return 0.0
    return _entropy_bits(t.marginal(vs).reshape(-1))


def conditional_entropy(t: JointTable, target, given=()) -> float:
    """``S(target | given) = S(target, given) - S(given)``."""
    tv, gv = _as_vars(target), _as_vars(given)
    return joint_entropy(t, tv + gv) - joint_entropy(t, gv)


def random_table(dims: Sequence[int], rng: np.random.Generator) -> JointTable:
    """Table drawn uniformly from the probability simplex (normalized exponentials)."""
    e = rng.exponential(size=tuple(int(d) for d in dims))
    return JointTable(e / e.sum())


@dataclass(frozen=True)
class BellCheck:
    lhs: float
    rhs: float
    holds: bool

    @property
    def delta_s(self) -> float:
        return self.lhs - self.rhs


def bell_inequality_holds(t: JointTable, tol: float = BELL_TOL) -> BellCheck:
    """Evaluate the entropic Bell inequality on a complete table ordered ``(a1, a2, b1, b2)``."""
    if t.nvars != 4:
        raise DimensionError(f"the Bell test needs a 4-variable table, got {t.nvars}")
    a1, a2, b1, b2 = 0, 1, 2, 3
    lhs = conditional_entropy(t, a1, a2)
    rhs = conditional_entropy(t, a1, b2) + conditional_entropy(t, b2, b1) + conditional_entropy(t, b1, a2)
    return BellCheck(lhs, rhs, lhs <= rhs + tol)


@dataclass(frozen=True)
class SettingPairTable:
    """2x2 outcome tables for each (Bob set, Charley set) pair; rows are Bob's outcome."""

    tables: Mapping[tuple[str, str], JointTable]

    def __post_init__(self):
        missing = [p for p in PAIRS if p not in self.tables]
        if missing:
            raise DimensionError(f"setting-pair tables missing {missing}")
        for key in PAIRS:
            if self.tables[key].nvars != 2:
                raise DimensionError(f"table for pair {key} must have 2 variables")
        object.__setattr__(self, "tables", {k: self.tables[k] for k in PAIRS})

    def __getitem__(self, pair: tuple[str, str]) -> JointTable:
        return self.tables[pair]

    def marginal_gaps(self) -> dict[str, float]:
        """How much each party's marginal for a given set moves with the other party's set choice."""
        gaps = {}
        for s in ("A", "B"):
            bob = [self.tables[(s, c)].marginal([0]) for c in ("A", "B")]
            charley = [self.tables[(b, s)].marginal([1]) for b in ("A", "B")]
            gaps[f"bob_{s}"] = float(np.max(np.abs(bob[0] - bob[1])))
            gaps[f"charley_{s}"] = float(np.max(np.abs(charley[0] - charley[1])))
        return gaps

    def to_dict(self) -> dict:
        return {f"{b}{c}": self.tables[(b, c)].to_dict() for b, c in PAIRS}


def delta_s_terms(pairs: SettingPairTable) -> dict[str, float]:
    bob, charley = 0, 1
    return {
        "S(a1|a2)": conditional_entropy(pairs[("A", "A")], bob, charley),
        "S(a1|b2)": conditional_entropy(pairs[("A", "B")], bob, charley),
        "S(b2|b1)": conditional_entropy(pairs[("B", "B")], charley, bob),
        "S(b1|a2)": conditional_entropy(pairs[("B", "A")], bob, charley),
    }


def delta_s(pairs: SettingPairTable) -> float:
    """``S(a1|a2) - (S(a1|b2) + S(b2|b1) + S(b1|a2))``; positive means violation."""
    t = delta_s_terms(pairs)
    return t["S(a1|a2)"] - (t["S(a1|b2)"] + t["S(b2|b1)"] + t["S(b1|a2)"])
