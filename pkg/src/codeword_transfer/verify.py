"""Invariant checks run by ``codeword-transfer verify``.

Each check returns ``(passed, detail)``.  Module functions are looked up as
module attributes at call time so a patched implementation is what gets
checked.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import core, double_transfer, entropy, estimation, scan, single_transfer
from .rng import stream

VERIFY_SEED = 20240601

Check = Callable[[], tuple[bool, str]]


@dataclass(frozen=True)
class CheckResult:
    module: str
    name: str
    passed: bool
    detail: str


def _random_p(rng, m):
    e = rng.exponential(size=m)
    return e / e.sum()


# core

def core_round_trip():
    rng = stream(VERIFY_SEED, 1)
    worst = 0.0
    for _ in range(500):
        p = core.ProbabilityVector(_random_p(rng, int(rng.integers(1, 8))))
        back = core.measure_probabilities(core.amplitude_encode(p))
        worst = max(worst, float(np.max(np.abs(back.p - p.p))))
    return worst < 1e-12, f"max |p' - p| = {worst:.3g}"


def core_ode_residual():
    grid = np.linspace(0.0, math.pi / 2, 1000)
    r = np.abs(core.encoding_ode_residual(core.Encoding.amplitude(), grid))
    return float(r.max()) < 1e-12, f"max |residual| = {r.max():.3g}"


def core_rotation_group():
    rng = stream(VERIFY_SEED, 2)
    worst = 0.0
    for _ in range(500):
        psi = core.StateVector.from_angle(rng.uniform(0, math.pi))
        a, b = rng.uniform(-math.pi, math.pi, size=2)
        lhs = core.rotate(core.rotate(psi, a), b).y
        rhs = core.rotate(psi, a + b).y
        worst = max(worst, float(np.max(np.abs(lhs - rhs))))
    return worst < 1e-12, f"max deviation = {worst:.3g}"


def core_non_amplitude_distinguishable():
    grid = np.linspace(0.0, 1.0, 1001)
    worst = []
    for enc in (core.Encoding.identity(), core.Encoding.power(2), core.Encoding.power(0.5), core.Encoding.power(3)):
        worst.append((enc.name, float(np.max(np.abs(core.encoding_ode_residual(enc, grid))))))
    ok = all(v > 1e-3 for _, v in worst)
    return ok, ", ".join(f"{n}: {v:.3g}" for n, v in worst)


def core_derivatives():
    errs = []
    for enc in (core.Encoding.amplitude(), core.Encoding.identity(), core.Encoding.power(2), core.Encoding.power(3)):
        grid = np.linspace(enc.lower, enc.upper, 201)
        errs.append(enc.derivative_error(grid))
    return max(errs) < 1e-6, f"max relative FD gap = {max(errs):.3g}"


# estimation

def estimation_fisher_uniform():
    grid = np.linspace(0.0, math.pi / 2, 1000)
    dev = float(np.max(np.abs(estimation.fisher_diagonal(core.Encoding.amplitude(), grid).values - 4.0)))
    ident = float(estimation.fisher_diagonal(core.Encoding.identity(), 0.9).values[0])
    return dev < 1e-10 and abs(ident - 4.0) > 1.0, f"max |J - 4| = {dev:.3g}; identity J(0.9) = {ident:.6g}"


def estimation_cramer_rao_direction():
    worst = math.inf
    for enc in (core.Encoding.amplitude(), core.Encoding.identity(), core.Encoding.power(2)):
        lo, hi = enc.lower, enc.upper
        grid = np.linspace(lo, hi, 502)[1:-1]
        rep = estimation.cramer_rao_report(enc, grid, 1)
        worst = min(worst, min(e.achieved_variance - e.variance_bound for e in rep.entries))
    return worst >= -1e-12, f"min (achieved - bound) = {worst:.3g}"


def estimation_covariance_rows():
    rng = stream(VERIFY_SEED, 3)
    worst = 0.0
    for _ in range(300):
        p = _random_p(rng, int(rng.integers(2, 9)))
        cov = estimation.multinomial_covariance(p, int(rng.integers(1, 1000)))
        scale = max(1.0, float(np.abs(cov).max()))
        worst = max(worst, float(np.max(np.abs(cov.sum(axis=1)))) / scale)
    return worst < 1e-12, f"max |row sum| (relative) = {worst:.3g}"


def estimation_sigma_peak():
    grid = np.linspace(0.0, 1.0, 1001)
    peak = grid[int(np.argmax(grid * (1.0 - grid)))]
    w = np.linspace(0.0, math.pi / 2, 1001)
    wpeak = w[int(np.argmax(estimation.amplitude_covariance_diagonal(w)))]
    ok = abs(peak - 0.5) <= grid[1] and abs(wpeak - math.pi / 4) <= w[1]
    return ok, f"argmax p(1-p) = {peak:.4f}; argmax cos^2 sin^2 = {wpeak:.4f}"


def estimation_unbiased():
    p = np.array([0.2, 0.3, 0.5])
    n, draws = 50, 10_000
    counts = stream(VERIFY_SEED, 4).multinomial(n, p, size=draws)
    mean = np.mean([estimation.estimate(c).p for c in counts], axis=0)
    bound = 5 * np.sqrt(p * (1 - p) / (n * draws))
    return bool(np.all(np.abs(mean - p) < bound)), f"|mean - p| = {np.round(np.abs(mean - p), 6).tolist()}"


# single transfer

def single_exact_enumeration():
    worst = 0.0
    for n in range(1, 13):
        for q in (0.1, 0.3, 0.5, 0.8):
            got = single_transfer.exact_moments([q, 1 - q], n)["mse_omega"][0]
            omega = math.acos(math.sqrt(q))
            ref = sum(math.comb(n, k) * q**k * (1 - q) ** (n - k) * (math.acos(math.sqrt(k / n)) - omega) ** 2
                      for k in range(n + 1))
            worst = max(worst, abs(got - ref))
    return worst < 1e-9, f"max |pipeline - direct| = {worst:.3g}"


def single_parametrization_independence():
    n, trials = 10_000, 10_000
    variances = []
    for q in (0.15, 0.3, 0.5, 0.7, 0.85):
        rep = single_transfer.error_scaling_study([q, 1 - q], [n], trials, VERIFY_SEED)
        variances.append(rep.rows[0].var_omega[0])
    ratio = max(variances) / min(variances)
    return ratio < 1.1, f"max/min Var(omega_hat) over 5 angles = {ratio:.4f}"


def single_law_of_large_numbers():
    p = core.ProbabilityVector([0.25, 0.75])
    errs = []
    for n in (100, 10_000, 1_000_000):
        counts = single_transfer.draw_counts(p, n, 200, VERIFY_SEED, key=(n,))
        errs.append(float(np.mean(np.abs(counts[:, 0] / n - 0.25))))
    return errs[0] > errs[1] > errs[2], f"mean |p_hat - p| at n=1e2,1e4,1e6: {[f'{e:.3g}' for e in errs]}"


# entropy

def _random_tables(count, seed_key):
    rng = stream(VERIFY_SEED, seed_key)
    return [entropy.random_table((2, 2), rng) for _ in range(count)]


def entropy_chain_rule():
    worst = 0.0
    for t in _random_tables(2000, 5):
        gap = entropy.joint_entropy(t) - entropy.joint_entropy(t, 0) - entropy.conditional_entropy(t, 1, 0)
        worst = max(worst, abs(gap))
    return worst < 1e-10, f"max chain-rule gap = {worst:.3g}"


def entropy_conditioning_reduces():
    worst = -math.inf
    for t in _random_tables(2000, 6):
        worst = max(worst, entropy.conditional_entropy(t, 0, 1) - entropy.joint_entropy(t, 0))
    return worst <= 1e-12, f"max S(X|Y) - S(X) = {worst:.3g}"


def entropy_nonnegative():
    lowest = math.inf
    for t in _random_tables(2000, 7):
        lowest = min(lowest, entropy.joint_entropy(t), entropy.conditional_entropy(t, 0, 1),
                     entropy.conditional_entropy(t, 1, 0))
    return lowest >= -1e-12, f"min entropy = {lowest:.3g}"


def entropy_bell_random_tables():
    rng = stream(VERIFY_SEED, 8)
    worst = -math.inf
    for _ in range(2000):
        chk = entropy.bell_inequality_holds(entropy.random_table((2, 2, 2, 2), rng))
        if not chk.holds:
            return False, f"violated: lhs = {chk.lhs}, rhs = {chk.rhs}"
        worst = max(worst, chk.delta_s)
    return True, f"2000 tables, max lhs - rhs = {worst:.4f}"


def entropy_permutation_invariance():
    rng = stream(VERIFY_SEED, 9)
    worst = 0.0
    for _ in range(500):
        p = _random_p(rng, 6)
        worst = max(worst, abs(entropy.shannon_entropy(p) - entropy.shannon_entropy(rng.permutation(p))))
    return worst < 1e-12, f"max change under relabeling = {worst:.3g}"


# double transfer

def double_no_signaling():
    rng = stream(VERIFY_SEED, 10)
    worst = 0.0
    grid = np.linspace(0.0, math.pi, 100)
    for _ in range(20):
        a, b = rng.uniform(0, math.pi, size=2)
        cfg = double_transfer.DoubleConfig(theta_alpha=a, theta_bA=b)
        worst = max(worst, double_transfer.bob_marginal(cfg, "A", grid).max_deviation)
    return worst < 1e-12, f"max |P_B - cos^2(theta_alpha - theta_bA)| = {worst:.3g}"


def double_local_bell():
    rng = stream(VERIFY_SEED, 11)
    for _ in range(500):
        ang = rng.uniform(0, math.pi, size=6)
        cfg = double_transfer.DoubleConfig(*ang, mode="local")
        chk = entropy.bell_inequality_holds(double_transfer.complete_table(cfg))
        if not chk.holds:
            return False, f"local config {ang.tolist()} violates"
    return True, "500 random local configs satisfy the inequality"


def double_aligned_reproduction():
    rng = stream(VERIFY_SEED, 12)
    worst = 0.0
    for _ in range(200):
        a, t = rng.uniform(0, math.pi, size=2)
        cfg = double_transfer.DoubleConfig(theta_alpha=a, theta_bA=t, theta_cA=t)
        probs = double_transfer.contextual_joint(cfg, ("A", "A")).probs
        worst = max(worst, float(probs[0, 1] + probs[1, 0]))
    return worst < 1e-12, f"max P(B != C) with aligned detectors = {worst:.3g}"


def double_func_identity():
    rng = stream(VERIFY_SEED, 13)
    worst = 0.0
    for _ in range(1000):
        a1, a2, psi = rng.uniform(-1.0, 1.0, size=(3, 2))
        chk = double_transfer.func_violation(a1, a2, psi)
        worst = max(worst, abs(chk.difference - 2 * float(a1 @ a2) * float(psi @ psi)))
    return worst < 1e-12, f"max identity gap = {worst:.3g}"


# scan

def scan_local_never_violates():
    res = scan.scan_delta_s(scan.default_grid("local", steps=31))
    mx = float(res.delta_s_analytic.max())
    return mx <= 1e-9, f"max ΔS = {mx:.3g}"


def scan_contextual_violates():
    res = scan.scan_delta_s(scan.default_grid("contextual", steps=41))
    s = scan.find_violations(res)
    return s.count > 0 and abs(s.max_delta_s - 1.0) < 1e-9, f"violations = {s.count}, max ΔS = {s.max_delta_s:.12f}"


def scan_rotation_invariance():
    rng = stream(VERIFY_SEED, 14)
    worst = 0.0
    for _ in range(200):
        cfg = double_transfer.DoubleConfig(*rng.uniform(0, math.pi, size=6))
        shift = float(rng.uniform(-math.pi, math.pi))
        d0 = entropy.delta_s(double_transfer.pair_tables(cfg))
        d1 = entropy.delta_s(double_transfer.pair_tables(cfg.shifted(shift)))
        worst = max(worst, abs(d0 - d1))
    return worst < 1e-12, f"max |ΔS shift| = {worst:.3g}"


CHECKS: dict[str, list[tuple[str, Check]]] = {
    "core": [
        ("round_trip", core_round_trip),
        ("ode_residual_amplitude", core_ode_residual),
        ("rotation_group", core_rotation_group),
        ("non_amplitude_distinguishable", core_non_amplitude_distinguishable),
        ("derivative_finite_difference", core_derivatives),
    ],
    "estimation": [
        ("fisher_uniformity", estimation_fisher_uniform),
        ("cramer_rao_direction", estimation_cramer_rao_direction),
        ("covariance_row_sums", estimation_covariance_rows),
        ("sigma_diagonal_peak", estimation_sigma_peak),
        ("estimator_unbiased", estimation_unbiased),
    ],
    "single_transfer": [
        ("exact_enumeration", single_exact_enumeration),
        ("parametrization_independence", single_parametrization_independence),
        ("law_of_large_numbers", single_law_of_large_numbers),
    ],
    "entropy": [
        ("chain_rule", entropy_chain_rule),
        ("conditioning_reduces_entropy", entropy_conditioning_reduces),
        ("nonnegativity", entropy_nonnegative),
        ("bell_random_tables", entropy_bell_random_tables),
        ("permutation_invariance", entropy_permutation_invariance),
    ],
    "double_transfer": [
        ("no_signaling", double_no_signaling),
        ("local_mode_bell", double_local_bell),
        ("aligned_reproduction", double_aligned_reproduction),
        ("func_identity", double_func_identity),
    ],
    "scan": [
        ("local_never_violates", scan_local_never_violates),
        ("contextual_violates", scan_contextual_violates),
        ("rotation_invariance", scan_rotation_invariance),
    ],
}


def run_checks(only: list[str] | None = None) -> list[CheckResult]:
    modules = list(CHECKS) if not only else only
    unknown = [m for m in modules if m not in CHECKS]
    if unknown:
        raise KeyError(f"unknown verify module(s) {unknown}; choose from {list(CHECKS)}")
    results = []
    for mod in modules:
        for name, fn in CHECKS[mod]:
            try:
                ok, detail = fn()
            except Exception as exc:  # a crashing check is a failed check
                ok, detail = False, f"{type(exc).__name__}: {exc}"
            results.append(CheckResult(mod, name, bool(ok), detail))
    return results
