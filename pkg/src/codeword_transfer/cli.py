"""Command-line front end.

Every subcommand resolves a complete configuration (defaults, then an
optional ``--config`` file, then explicit flags), runs, and writes its
outputs plus ``manifest.json`` into ``--out``.  ``--from-manifest`` replays
the recorded configuration.  Angles are radians unless ``--degrees`` is given.

Exit codes: 0 success, 1 failed check, 2 invalid input, 3 I/O error.
"""

from __future__ import annotations

import argparse
import math
import sys
import time
from pathlib import Path
from typing import Callable

import numpy as np

from . import __version__
from .core import Encoding, ProbabilityVector, amplitude_encode
from .double_transfer import (
    ANGLE_FIELDS,
    DoubleConfig,
    bob_marginal,
    pair_tables,
    sample_bob_local,
    sample_double,
)
from .entropy import delta_s, delta_s_terms
from .errors import CodewordError
from .estimation import cramer_rao_report, fisher_diagonal
from .io import ConfigError, load_config, read_manifest, write_csv, write_json, write_manifest
from .rng import resolve_threads
from .scan import ScanAxis, ScanGrid, default_grid, find_violations, scan_delta_s
from .single_transfer import SingleConfig, error_scaling_study, laser_scenario, run_experiment

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_IO = 0, 1, 2, 3


def _floats(value) -> list[float]:
    if isinstance(value, str):
        value = [v for v in value.split(",") if v.strip()]
    elif not isinstance(value, (list, tuple)):
        value = [value]
    try:
        return [float(v) for v in value]
    except (TypeError, ValueError):
        raise ConfigError(f"expected numbers, got {value!r}") from None


def _ints(value) -> list[int]:
    out = []
    for v in _floats(value):
        if v != int(v):
            raise ConfigError(f"expected an integer, got {v}")
        out.append(int(v))
    return out


def _fmt6(values) -> str:
    return ", ".join(f"{float(v):.6g}" for v in values)


def _merge(defaults: dict, args: argparse.Namespace, keys: list[str]) -> dict:
    """defaults < --config file < explicit flags."""
    cfg = dict(defaults)
    if getattr(args, "config", None):
        cfg.update(load_config(args.config))
    for k in keys:
        v = getattr(args, k, None)
        if v is not None:
            cfg[k] = v
    unknown = set(cfg) - set(defaults)
    if unknown:
        raise ConfigError(f"unknown configuration keys: {sorted(unknown)}")
    return cfg


def _to_radians(cfg: dict, keys, degrees: bool) -> dict:
    if degrees:
        for k in keys:
            if k in cfg and cfg[k] is not None:
                cfg[k] = math.radians(float(cfg[k]))
    return cfg


# encode / fisher

def resolve_encode(args) -> dict:
    cfg = _merge({"probs": None}, args, ["probs"])
    if cfg["probs"] is None:
        raise ConfigError("encode needs --probs")
    cfg["probs"] = _floats(cfg["probs"])
    return cfg


def execute_encode(cfg, out, threads):
    psi = amplitude_encode(ProbabilityVector(cfg["probs"]))
    lines = [_fmt6(psi.y)]
    files = [write_json(out / "state.json", {"probs": cfg["probs"], "state": psi.to_list()})] if out else []
    return files, lines, EXIT_OK


def resolve_fisher(args) -> dict:
    cfg = _merge({"encoding": "amplitude", "omega": None, "n": 1}, args, ["encoding", "omega", "n"])
    if cfg["omega"] is None:
        raise ConfigError("fisher needs --omega")
    cfg["omega"] = _floats(cfg["omega"])
    cfg["n"] = int(cfg["n"])
    return cfg


def execute_fisher(cfg, out, threads):
    enc = Encoding.from_name(cfg["encoding"])
    fd = fisher_diagonal(enc, cfg["omega"])
    rep = cramer_rao_report(enc, cfg["omega"], cfg["n"])
    lines = [_fmt6(fd.values)]
    for e in rep.entries:
        lines.append(
            f"omega={e.omega:.6g} bound={e.variance_bound:.6g} achieved={e.achieved_variance:.6g} "
            f"saturated={'yes' if e.saturated else 'no'}"
        )
    files = []
    if out:
        files.append(write_json(out / "fisher.json", {"fisher": fd.to_list(), "cramer_rao": rep.to_dict()}))
    return files, lines, EXIT_OK


# single transfer

SINGLE_DEFAULTS = {"probs": None, "encoding": "amplitude", "n": 1000, "trials": 100, "seed": 0}


def resolve_simulate_single(args) -> dict:
    cfg = _merge(SINGLE_DEFAULTS, args, list(SINGLE_DEFAULTS))
    if cfg["probs"] is None:
        raise ConfigError("simulate-single needs probs (flag or config file)")
    cfg["probs"] = _floats(cfg["probs"])
    for k in ("n", "trials", "seed"):
        cfg[k] = int(cfg[k])
    return cfg


def execute_simulate_single(cfg, out, threads):
    config = SingleConfig(ProbabilityVector(cfg["probs"]), cfg["n"], cfg["trials"], cfg["seed"],
                          Encoding.from_name(cfg["encoding"]))
    results = run_experiment(config, threads=threads)
    m = config.p.m
    header = ["trial"] + [f"count_{i + 1}" for i in range(m)] + [f"phat_{i + 1}" for i in range(m)]
    rows = [[t, *r.counts.counts, *(float(x) for x in r.p_hat.p)] for t, r in enumerate(results)]
    p_hat = np.array([r.p_hat.p for r in results])
    summary = {
        "config": cfg,
        "mean_p_hat": p_hat.mean(axis=0).tolist(),
        "std_p_hat": p_hat.std(axis=0, ddof=1).tolist() if len(results) > 1 else [0.0] * m,
    }
    files = [write_csv(out / "trials.csv", header, rows), write_json(out / "summary.json", summary)]
    lines = [f"trials: {len(results)}, mean p_hat = {_fmt6(summary['mean_p_hat'])}"]
    return files, lines, EXIT_OK


SCALING_DEFAULTS = {"m": None, "probs": None, "n": [1000, 2000, 10000, 20000], "trials": 1000, "seed": 0,
                    "encoding": "amplitude", "plot": True}


def resolve_error_scaling(args) -> dict:
    cfg = _merge(SCALING_DEFAULTS, args, ["m", "probs", "n", "trials", "seed", "encoding", "plot"])
    if cfg["probs"] is not None:
        cfg["probs"] = _floats(cfg["probs"])
        if cfg["m"] is not None and int(cfg["m"]) != len(cfg["probs"]):
            raise ConfigError(f"m = {cfg['m']} does not match {len(cfg['probs'])} probabilities")
        cfg["m"] = len(cfg["probs"])
    else:
        if cfg["m"] is None:
            raise ConfigError("error-scaling needs --m or --probs")
        cfg["m"] = int(cfg["m"])
        if cfg["m"] < 2:
            raise ConfigError("error-scaling needs m >= 2")
        cfg["probs"] = [1.0 / cfg["m"]] * cfg["m"]
    cfg["n"] = _ints(cfg["n"])
    cfg["trials"] = int(cfg["trials"])
    cfg["seed"] = int(cfg["seed"])
    cfg["plot"] = bool(cfg["plot"])
    return cfg


def execute_error_scaling(cfg, out, threads):
    from . import plotting

    rep = error_scaling_study(cfg["probs"], cfg["n"], cfg["trials"], cfg["seed"], threads=threads,
                              encoding=Encoding.from_name(cfg["encoding"]))
    files = [write_csv(out / "scaling.csv", rep.csv_header(), rep.csv_rows()),
             write_json(out / "scaling.json", rep.to_dict())]
    if cfg["plot"]:
        files.append(plotting.scaling_figure(rep, out / "scaling.svg"))
    lines = []
    for r in rep.rows:
        lines.append(
            f"n={r.n}: Var(omega_hat)/(1/4n) = {_fmt6(r.ratio_component)}; "
            f"sum E[(y_hat-y)^2]/((m-1)/4n) = {r.ratio_total:.6g}; sigma_nominal = {r.sigma_nominal:.6g}"
        )
    return files, lines, EXIT_OK


def resolve_laser(args) -> dict:
    cfg = _merge({"alpha": None, "n": 1000, "seed": 0, "literal": False}, args, ["alpha", "n", "seed", "literal"])
    if cfg["alpha"] is None:
        raise ConfigError("laser needs --alpha")
    cfg = _to_radians(cfg, ["alpha"], getattr(args, "degrees", False))
    cfg["alpha"] = float(cfg["alpha"])
    cfg["n"], cfg["seed"], cfg["literal"] = int(cfg["n"]), int(cfg["seed"]), bool(cfg["literal"])
    return cfg


def execute_laser(cfg, out, threads):
    xbar = laser_scenario(cfg["alpha"], cfg["n"], cfg["seed"], literal=cfg["literal"])
    files = [write_json(out / "laser.json", {"config": cfg, "xbar": xbar})] if out else []
    return files, [f"{xbar:.6g}"], EXIT_OK


# double transfer

DOUBLE_KEYS = list(ANGLE_FIELDS) + ["mode", "set_choice_prob"]


def _double_defaults(**extra) -> dict:
    d = {k: v for k, v in DoubleConfig().to_dict().items()}
    d.update(extra)
    return d


def _double_from(cfg: dict) -> DoubleConfig:
    return DoubleConfig.from_mapping({k: cfg[k] for k in DOUBLE_KEYS})


def resolve_simulate_double(args) -> dict:
    defaults = _double_defaults(n=100_000, seed=0)
    cfg = _merge(defaults, args, DOUBLE_KEYS + ["n", "seed"])
    cfg = _to_radians(cfg, ANGLE_FIELDS, getattr(args, "degrees", False))
    cfg["n"], cfg["seed"] = int(cfg["n"]), int(cfg["seed"])
    _double_from(cfg)
    return cfg


def execute_simulate_double(cfg, out, threads):
    config = _double_from(cfg)
    counts = sample_double(config, cfg["n"], cfg["seed"])
    tables = pair_tables(config)
    try:
        mc = delta_s(counts.to_tables())
    except CodewordError:
        mc = float("nan")
    summary = {
        "config": cfg,
        "delta_s_analytic": delta_s(tables),
        "delta_s_mc": mc,
        "terms_analytic": delta_s_terms(tables),
        "tables": tables.to_dict(),
    }
    files = [
        write_csv(out / "counts.csv", ["pair", "outcome_bob", "outcome_charley", "count"], counts.csv_rows()),
        write_json(out / "counts.json", counts.to_dict()),
        write_json(out / "summary.json", summary),
    ]
    lines = [f"events: {counts.n}, ΔS analytic = {summary['delta_s_analytic']:.6g}, ΔS sampled = {mc:.6g}"]
    return files, lines, EXIT_OK


NS_DEFAULTS = _double_defaults(theta_bA=math.pi / 3, bob_set="A", steps=100, theta_c_start=0.0, theta_c_stop=math.pi, n=1_000_000,
                               seed=0, plot=True)


def resolve_no_signaling(args) -> dict:
    cfg = _merge(NS_DEFAULTS, args, DOUBLE_KEYS + ["bob_set", "steps", "theta_c_start", "theta_c_stop", "n",
                                                  "seed", "plot"])
    cfg = _to_radians(cfg, list(ANGLE_FIELDS) + ["theta_c_start", "theta_c_stop"], getattr(args, "degrees", False))
    for k in ("steps", "n", "seed"):
        cfg[k] = int(cfg[k])
    cfg["theta_c_start"], cfg["theta_c_stop"] = float(cfg["theta_c_start"]), float(cfg["theta_c_stop"])
    cfg["plot"] = bool(cfg["plot"])
    if cfg["bob_set"] not in ("A", "B"):
        raise ConfigError("bob_set must be A or B")
    if cfg["steps"] < 2:
        raise ConfigError("steps must be >= 2")
    _double_from(cfg)
    return cfg


def execute_no_signaling(cfg, out, threads):
    from . import plotting

    config = _double_from(cfg)
    grid = np.linspace(cfg["theta_c_start"], cfg["theta_c_stop"], cfg["steps"])
    prof = bob_marginal(config, cfg["bob_set"], grid)
    key = "theta_cA" if cfg["bob_set"] == "A" else "theta_cB"
    n = cfg["n"]
    sigma = math.sqrt(max(prof.expected * (1.0 - prof.expected), 0.0) / n)
    sampled = np.empty_like(grid)
    for i, tc in enumerate(grid):
        sampled[i] = sample_bob_local(config.with_angles(**{key: float(tc)}), cfg["bob_set"], n, cfg["seed"],
                                      key=(i,)) / n
    dev = sampled - prof.expected
    z = dev / sigma if sigma > 0 else np.where(dev == 0.0, 0.0, np.inf)
    rows = [[float(t), float(pl), prof.expected, float(pl - prof.expected), float(pj), float(ps), sigma, float(zz)]
            for t, pl, pj, ps, zz in zip(grid, prof.local, prof.joint_marginal, sampled, z)]
    header = ["theta_c", "p_local", "p_expected", "deviation", "p_joint_sum", "p_sampled", "sigma", "z"]
    ok = prof.max_deviation < 1e-12 and float(np.max(np.abs(z))) < 4.0
    summary = {
        "config": cfg,
        "expected": prof.expected,
        "max_analytic_deviation": prof.max_deviation,
        "max_abs_z": float(np.max(np.abs(z))),
        "max_func_gap": prof.max_func_gap,
        "passed": ok,
    }
    files = [write_csv(out / "marginal.csv", header, rows), write_json(out / "summary.json", summary)]
    if cfg["plot"]:
        files.append(plotting.marginal_figure(prof, out / "marginal.svg", sampled))
    lines = [
        f"max analytic deviation: {prof.max_deviation:.3g}; max |z| sampled (n={n}): {summary['max_abs_z']:.3g}; "
        f"joint-table gap: {prof.max_func_gap:.3g}",
        "no-signaling: PASS" if ok else "no-signaling: FAIL",
    ]
    return files, lines, EXIT_OK if ok else EXIT_FAIL


SCAN_DEFAULTS = _double_defaults(grid="default", mc_n=0, seed=0, tol=1e-6, batches=10)


def parse_grid(text: str, mode: str) -> tuple[ScanAxis, ...]:
    """``default`` or ``name:start:stop:steps[,name:start:stop:steps]``."""
    if text == "default":
        return default_grid(mode).axes
    axes = []
    for part in text.split(","):
        bits = part.strip().split(":")
        if len(bits) != 4:
            raise ConfigError(f"grid axis must look like name:start:stop:steps, got {part!r}")
        try:
            axes.append(ScanAxis(bits[0], float(bits[1]), float(bits[2]), int(bits[3])))
        except ValueError:
            raise ConfigError(f"cannot parse grid axis {part!r}") from None
    return tuple(axes)


def resolve_scan_bell(args) -> dict:
    cfg = _merge(SCAN_DEFAULTS, args, DOUBLE_KEYS + ["grid", "mc_n", "seed", "tol", "batches"])
    degrees = getattr(args, "degrees", False)
    cfg = _to_radians(cfg, ANGLE_FIELDS, degrees)
    grid = cfg["grid"]
    if isinstance(grid, list):
        grid = ",".join(str(g) for g in grid)
    grid = str(grid)
    axes = parse_grid(grid, cfg["mode"])
    if degrees and grid != "default":
        axes = tuple(ScanAxis(a.name, math.radians(a.start), math.radians(a.stop), a.steps) for a in axes)
    cfg["grid"] = ",".join(f"{a.name}:{a.start!r}:{a.stop!r}:{a.steps}" for a in axes)
    for k in ("mc_n", "seed", "batches"):
        cfg[k] = int(cfg[k])
    cfg["tol"] = float(cfg["tol"])
    _double_from(cfg)
    return cfg


def execute_scan_bell(cfg, out, threads, csv_path=None, svg_path=None):
    from . import plotting

    grid = ScanGrid(parse_grid(cfg["grid"], cfg["mode"]), _double_from(cfg), mc_n=cfg["mc_n"], seed=cfg["seed"],
                    batches=cfg["batches"])
    res = scan_delta_s(grid, threads=threads, tol=cfg["tol"])
    summ = find_violations(res)
    csv_path = Path(csv_path) if csv_path else out / "scan.csv"
    svg_path = Path(svg_path) if svg_path else out / "scan.svg"
    files = [write_csv(csv_path, res.csv_header(), res.csv_rows())]
    files.append(plotting.delta_s_figure(res, svg_path))
    summary = {"config": cfg, "params": [a.name for a in grid.axes], "analytic": summ.to_dict()}
    lines = [f"violations: {summ.count}, max ΔS = {summ.max_delta_s:.6g} at "
             + ", ".join(f"{k}={v:.6g}" for k, v in summ.argmax.items())]
    if cfg["mc_n"] > 0:
        mc = find_violations(res, use_mc=True)
        summary["monte_carlo"] = mc.to_dict()
        summary["max_abs_mc_minus_analytic"] = float(np.max(np.abs(res.delta_s_mc - res.delta_s_analytic)))
        lines.append(f"Monte Carlo (n={cfg['mc_n']}): violations beyond 3 s.e.: {mc.count}, "
                     f"max |ΔS_mc - ΔS| = {summary['max_abs_mc_minus_analytic']:.3g}")
    files.append(write_json(out / "summary.json", summary))
    return files, lines, EXIT_OK


# verify

def cmd_verify(args) -> int:
    from .verify import CHECKS, run_checks

    only = None
    if args.only:
        only = [m.strip() for part in args.only for m in part.split(",") if m.strip()]
        unknown = [m for m in only if m not in CHECKS]
        if unknown:
            print(f"error: unknown module(s) {unknown}; choose from {list(CHECKS)}", file=sys.stderr)
            return EXIT_INPUT
    results = run_checks(only)
    for r in results:
        print(f"{'PASS' if r.passed else 'FAIL'}  {r.module}.{r.name}: {r.detail}")
    failed = sum(not r.passed for r in results)
    print(f"{len(results) - failed}/{len(results)} properties passed")
    return EXIT_OK if failed == 0 else EXIT_FAIL


COMMANDS: dict[str, tuple[Callable, Callable, bool]] = {
    # name: (resolve, execute, always writes files)
    "encode": (resolve_encode, execute_encode, False),
    "fisher": (resolve_fisher, execute_fisher, False),
    "simulate-single": (resolve_simulate_single, execute_simulate_single, True),
    "error-scaling": (resolve_error_scaling, execute_error_scaling, True),
    "laser": (resolve_laser, execute_laser, False),
    "simulate-double": (resolve_simulate_double, execute_simulate_double, True),
    "no-signaling": (resolve_no_signaling, execute_no_signaling, True),
    "scan-bell": (resolve_scan_bell, execute_scan_bell, True),
}


def _bool_flag(text: str) -> bool:
    low = text.lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"expected a boolean, got {text!r}")


def _add_common(p: argparse.ArgumentParser, seeded: bool = True, angles: bool = False):
    if seeded:
        p.add_argument("--seed", type=int, help="64-bit seed for the random streams")
    p.add_argument("--out", type=Path, help="output directory")
    p.add_argument("--threads", type=int, help="worker threads (results do not depend on it)")
    p.add_argument("--from-manifest", type=Path, dest="from_manifest", help="replay a recorded run")
    p.add_argument("--config", type=Path, help="key = value (or JSON) configuration file")
    if angles:
        p.add_argument("--degrees", action="store_true", help="angle inputs are in degrees")


def _add_double_flags(p: argparse.ArgumentParser):
    for name in ANGLE_FIELDS:
        p.add_argument(f"--{name.replace('_', '-')}", dest=name, type=float)
    p.add_argument("--mode", choices=["contextual", "local"])
    p.add_argument("--set-choice-prob", dest="set_choice_prob", type=float)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="codeword-transfer", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("encode", help="amplitude-encode a probability vector")
    p.add_argument("--probs", help="comma-separated probabilities")
    _add_common(p, seeded=False)

    p = sub.add_parser("fisher", help="Fisher information and Cramér-Rao report")
    p.add_argument("--encoding", help="amplitude | identity | power(k)")
    p.add_argument("--omega", help="comma-separated codeword parameters")
    p.add_argument("--n", type=int, help="number of samples for the variance bound")
    _add_common(p, seeded=False)

    p = sub.add_parser("simulate-single", help="Monte Carlo single codeword transfer")
    p.add_argument("--probs")
    p.add_argument("--encoding")
    p.add_argument("--n", type=int)
    p.add_argument("--trials", type=int)
    _add_common(p)

    p = sub.add_parser("error-scaling", help="estimation error against sample size")
    p.add_argument("--m", type=int)
    p.add_argument("--probs")
    p.add_argument("--n", help="comma-separated sample sizes")
    p.add_argument("--trials", type=int)
    p.add_argument("--encoding")
    p.add_argument("--plot", type=_bool_flag)
    _add_common(p)

    p = sub.add_parser("laser", help="simulated polarizer link")
    p.add_argument("--alpha", type=float)
    p.add_argument("--n", type=int)
    p.add_argument("--literal", action="store_const", const=True, default=None,
                   help="use sin(alpha) as the detection probability")
    _add_common(p, angles=True)

    p = sub.add_parser("simulate-double", help="sample double-transfer events")
    _add_double_flags(p)
    p.add_argument("--n", type=int)
    _add_common(p, angles=True)

    p = sub.add_parser("no-signaling", help="Bob's marginal against Charley's detector angle")
    _add_double_flags(p)
    p.add_argument("--bob-set", dest="bob_set", choices=["A", "B"])
    p.add_argument("--steps", type=int)
    p.add_argument("--theta-c-start", dest="theta_c_start", type=float)
    p.add_argument("--theta-c-stop", dest="theta_c_stop", type=float)
    p.add_argument("--n", type=int)
    p.add_argument("--plot", type=_bool_flag)
    _add_common(p, angles=True)

    p = sub.add_parser("scan-bell", help="scan ΔS over detector angles")
    _add_double_flags(p)
    p.add_argument("--grid", help="'default' or name:start:stop:steps[,name:start:stop:steps]")
    p.add_argument("--mc-n", dest="mc_n", type=int, help="sampled events per grid point (0 = analytic only)")
    p.add_argument("--tol", type=float)
    p.add_argument("--batches", type=int)
    p.add_argument("--csv", type=Path, help="CSV output path (default OUT/scan.csv)")
    p.add_argument("--svg", type=Path, help="figure output path (default OUT/scan.svg)")
    _add_common(p, angles=True)

    p = sub.add_parser("verify", help="run the invariant suite")
    p.add_argument("--only", action="append", help="restrict to module(s), e.g. entropy")
    return parser


def _run(args) -> int:
    if args.command == "verify":
        return cmd_verify(args)
    resolve, execute, writes = COMMANDS[args.command]
    if args.from_manifest:
        manifest = read_manifest(args.from_manifest)
        if manifest["command"] != args.command:
            raise ConfigError(f"manifest records {manifest['command']!r}, not {args.command!r}")
        cfg = manifest["config"]
        out = args.out or Path(manifest.get("out_dir", "."))
    else:
        try:
            cfg = resolve(args)
        except CodewordError:
            raise
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"invalid configuration value: {exc}") from None
        out = args.out
    if out is None and writes:
        out = Path(f"{args.command}-out")
    threads = resolve_threads(args.threads)
    start = time.perf_counter()
    extra = {}
    if args.command == "scan-bell":
        extra = {"csv_path": args.csv, "svg_path": args.svg}
    files, lines, code = execute(cfg, Path(out) if out else None, threads, **extra)
    for line in lines:
        print(line)
    if out:
        mpath = write_manifest(out, args.command, cfg, cfg.get("seed"), files, time.perf_counter() - start,
                               threads, __version__)
        print(f"wrote {len(files)} file(s) and {mpath}")
    return code


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _run(args)
    except (CodewordError, KeyError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else str(exc)
        print(f"error: {msg}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
