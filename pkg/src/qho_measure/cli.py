"""Command-line front end: analyze | simulate | sweep | validate.

Configuration comes from an optional JSON config file plus flag overrides
(flags win). Non-dimensional inputs (tau_M = t_M/T, varsigma_M =
sigma_M/sigma_gs) are the preferred interface; dimensional t_M/sigma_M are
accepted for reproducing dimensional setups. Every JSON summary echoes the
fully resolved configuration, so a run can be repeated exactly from its
own output.

Exit codes: 0 success, 2 validation failure, 3 configuration error,
4 resonance/domain error.
"""
from __future__ import annotations

import argparse
import contextlib
import json
import os
import sys
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .chain_analytics import (
    ChainClosedForm,
    MeasurementScheme,
    NondimPoint,
    limiting_sigma,
    limiting_sigma_simplified,
    nondim_limit,
    optimal_precision,
)
from .errors import ConfigError, DomainError, QhoError, ResonanceError
from .gaussian_core import Gaussian, OscillatorParams, WavePacket
from .grid_oracle import CollapseMode, default_grid_for, run_chain_grid
from .trajectory_sim import (
    ChainConfig,
    RunningStats,
    normality_statistic,
    run_chain,
    run_chain_jittered,
    thinning_interval,
)
from .validation import run_battery

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_CONFIG = 3
EXIT_RESONANCE = 4

CSV_VERSION = "v1"
DEFAULT_SEED = 12345

_CONFIG_KEYS = {
    "mass", "omega", "hbar", "t_m", "tau_m", "sigma_m", "varsigma_m",
    "jitter_std", "x0", "sigma_x0", "n", "seed", "engine", "collapse", "out",
}


@dataclass
class RunConfig:
    """Fully resolved run configuration; every field is materialized."""

    mass: float
    omega: float
    hbar: float
    t_m: float
    tau_m: float
    sigma_m: float
    varsigma_m: float
    jitter_std: float
    x0: float
    sigma_x0: float
    n: int
    seed: int
    engine: str
    collapse: str
    out: str

    def oscillator(self) -> OscillatorParams:
        return OscillatorParams(mass=self.mass, omega=self.omega, hbar=self.hbar)

    def scheme(self) -> MeasurementScheme:
        return MeasurementScheme(t_M=self.t_m, sigma_M=self.sigma_m, jitter_std=self.jitter_std)

    def packet(self) -> WavePacket:
        return WavePacket(x0=self.x0, sigma_x0=self.sigma_x0)

    def chain_config(self) -> ChainConfig:
        return ChainConfig(
            params=self.oscillator(),
            scheme=self.scheme(),
            initial=self.packet(),
            n_measurements=self.n,
            seed=self.seed,
        )


def _load_config_file(path: str) -> dict:
    try:
        raw = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError(f"config file {path} must hold a JSON object")
    unknown = set(raw) - _CONFIG_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    return raw


def _pick_pair(values: dict, a: str, b: str, to_a, to_b, default_a):
    """Resolve a dimensional/non-dimensional pair of inputs.

    Exactly one is expected; both are tolerated only if mutually consistent
    (that keeps summaries, which echo both, valid as config files).
    """
    va, vb = values.get(a), values.get(b)
    if va is None and vb is None:
        va = default_a
        vb = to_b(va)
    elif va is None:
        va = to_a(vb)
    elif vb is None:
        vb = to_b(va)
    else:
        if abs(va - to_a(vb)) > 1e-9 * max(abs(va), 1e-30):
            raise ConfigError(f"inconsistent {a}={va} and {b}={vb}")
    if not va > 0:
        raise ConfigError(f"{a} must be > 0, got {va}")
    return va, vb


def resolve_config(args: argparse.Namespace) -> RunConfig:
    values: dict = {}
    if getattr(args, "config", None):
        values.update(_load_config_file(args.config))
    flag_map = {
        "mass": "mass", "omega": "omega", "hbar": "hbar",
        "t_m": "t_m", "tau_m": "tau_m", "sigma_m": "sigma_m",
        "varsigma_m": "varsigma_m", "jitter_std": "jitter_std",
        "x0": "x0", "sigma_x0": "sigma_x0", "n": "n", "seed": "seed",
        "engine": "engine", "collapse": "collapse", "out": "out",
    }
    for key, attr in flag_map.items():
        v = getattr(args, attr, None)
        if v is not None:
            # a flag for one member of a pair supersedes the file's pair
            if key in ("t_m", "tau_m") and not (
                getattr(args, "t_m", None) is not None
                and getattr(args, "tau_m", None) is not None
            ):
                values.pop("t_m", None)
                values.pop("tau_m", None)
            if key in ("sigma_m", "varsigma_m") and not (
                getattr(args, "sigma_m", None) is not None
                and getattr(args, "varsigma_m", None) is not None
            ):
                values.pop("sigma_m", None)
                values.pop("varsigma_m", None)
    for key, attr in flag_map.items():
        v = getattr(args, attr, None)
        if v is not None:
            values[key] = v

    mass = float(values.get("mass", 1.0))
    omega = float(values.get("omega", 0.707))
    hbar = float(values.get("hbar", 1.0))
    try:
        params = OscillatorParams(mass=mass, omega=omega, hbar=hbar)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    T, sgs = params.period, params.sigma_gs

    try:
        t_m, tau_m = _pick_pair(
            values, "t_m", "tau_m",
            to_a=lambda tau: tau * T, to_b=lambda t: t / T, default_a=0.2 * T,
        )
        sigma_m, varsigma_m = _pick_pair(
            values, "sigma_m", "varsigma_m",
            to_a=lambda vs: vs * sgs, to_b=lambda s: s / sgs, default_a=0.5,
        )
    except ConfigError:
        raise
    jitter_std = float(values.get("jitter_std", 0.0))
    x0 = float(values.get("x0", 0.0))
    sigma_x0 = float(values.get("sigma_x0", sgs))
    n = int(values.get("n", 500_000))
    seed = values.get("seed")
    if seed is None:
        seed = os.environ.get("QHO_SEED", DEFAULT_SEED)
    seed = int(seed)
    engine = str(values.get("engine", "chain"))
    collapse = str(values.get("collapse", "replace"))
    if engine not in ("chain", "grid"):
        raise ConfigError(f"engine must be 'chain' or 'grid', got {engine!r}")
    if collapse not in ("replace", "weak"):
        raise ConfigError(f"collapse must be 'replace' or 'weak', got {collapse!r}")
    if jitter_std < 0:
        raise ConfigError("jitter_std must be >= 0")
    if sigma_x0 <= 0:
        raise ConfigError("sigma_x0 must be > 0")
    if n < 1:
        raise ConfigError("n must be >= 1")
    return RunConfig(
        mass=mass, omega=omega, hbar=hbar,
        t_m=t_m, tau_m=tau_m, sigma_m=sigma_m, varsigma_m=varsigma_m,
        jitter_std=jitter_std, x0=x0, sigma_x0=sigma_x0,
        n=n, seed=seed, engine=engine, collapse=collapse,
        out=str(values.get("out", "qho_out")),
    )


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _fmt(v) -> str:
    if v is None:
        return ""
    return repr(float(v))


# ---------------------------------------------------------------- analyze

def cmd_analyze(cfg: RunConfig) -> int:
    params = cfg.oscillator()
    cf = ChainClosedForm.from_setup(params, cfg.scheme(), cfg.packet())
    sigma_inf = limiting_sigma(cf)  # raises ResonanceError at resonance
    sigma_inf_simplified = limiting_sigma_simplified(params, cfg.scheme())
    varsigma_inf = nondim_limit(NondimPoint(cfg.varsigma_m, cfg.tau_m))
    try:
        opt = optimal_precision(cfg.tau_m)
    except DomainError:
        opt = None
    results = {
        "sigma_inf": sigma_inf,
        "sigma_inf_simplified": sigma_inf_simplified,
        "varsigma_inf": varsigma_inf,
        "sigma_step": cf.sigma_step,
        "sigma_first": cf.sigma_first,
        "sigma_gs": params.sigma_gs,
        "rho": cf.rho,
        "period": params.period,
        "optimal_varsigma_m": opt,
    }
    for key, val in results.items():
        print(f"{key} = {val}")
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    _write_json(out / "analyze.json", {"config": asdict(cfg), "results": results})
    return EXIT_OK


# --------------------------------------------------------------- simulate

def _running_std_checkpoints(n: int) -> list[int]:
    if n <= 200:
        return list(range(1, n + 1))
    pts = np.unique(np.geomspace(1, n, 200).round().astype(int))
    return sorted(set(pts.tolist()) | {n})


def cmd_simulate(cfg: RunConfig) -> int:
    chain_cfg = cfg.chain_config()
    params = cfg.oscillator()
    cf = ChainClosedForm.from_setup(params, cfg.scheme(), cfg.packet())
    try:
        sigma_inf = limiting_sigma(cf)
    except ResonanceError:
        if cfg.jitter_std == 0.0 and cfg.engine == "chain":
            raise
        sigma_inf = None

    if cfg.engine == "grid":
        record = run_chain_grid(
            chain_cfg,
            mode=CollapseMode.WEAK_PRODUCT if cfg.collapse == "weak" else CollapseMode.REPLACE,
        )
        stats = RunningStats.for_scale(sigma_inf if sigma_inf else 10 * params.sigma_gs)
        stats.push_array(record.samples)
    elif cfg.jitter_std > 0:
        record, stats = run_chain_jittered(chain_cfg)
    else:
        record, stats = run_chain(chain_cfg)

    samples = record.samples
    periods = record.periods if record.periods is not None else np.full(len(samples), cfg.t_m)

    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    try:
        path = out / "samples.csv"
        with path.open("w") as f:
            written.append(path)
            f.write(f"# qho-measure samples {CSV_VERSION}\n")
            f.write("index,x_M,t_eff\n")
            for i, (x, t) in enumerate(zip(samples, periods), start=1):
                f.write(f"{i},{float(x)!r},{float(t)!r}\n")

        path = out / "running_std.csv"
        with path.open("w") as f:
            written.append(path)
            f.write(f"# qho-measure running_std {CSV_VERSION}\n")
            f.write("n,std\n")
            for k in _running_std_checkpoints(len(samples)):
                std = float(np.std(samples[:k])) if k > 1 else None
                f.write(f"{k},{_fmt(std)}\n")

        path = out / "histogram.csv"
        with path.open("w") as f:
            written.append(path)
            f.write(f"# qho-measure histogram {CSV_VERSION}\n")
            f.write("bin_lo,bin_hi,count,density,analytic\n")
            edges, counts = stats.edges, stats.counts[1:-1]
            widths = np.diff(edges)
            analytic = Gaussian(0.0, sigma_inf).pdf(0.5 * (edges[:-1] + edges[1:])) if sigma_inf else None
            for j in range(len(counts)):
                density = counts[j] / (stats.count * widths[j])
                a = _fmt(analytic[j]) if analytic is not None else ""
                f.write(f"{float(edges[j])!r},{float(edges[j + 1])!r},{counts[j]},{float(density)!r},{a}\n")

        sample_std = float(np.std(samples)) if len(samples) > 1 else None
        ks = None
        thin_k = None
        if len(samples) >= 100 and sigma_inf is not None:
            thin_k = thinning_interval(cf.rho)
            thinned = samples[::thin_k]
            if len(thinned) >= 100:
                ks = normality_statistic(thinned, sigma_inf)
        summary = {
            "config": asdict(cfg),
            "n_samples": int(len(samples)),
            "sample_std": sample_std,
            "sigma_inf_predicted": sigma_inf,
            "relative_error": (
                abs(sample_std / sigma_inf - 1.0)
                if sample_std is not None and sigma_inf is not None
                else None
            ),
            "ks_statistic": ks,
            "thinning_interval": thin_k,
            "histogram_underflow": int(stats.counts[0]),
            "histogram_overflow": int(stats.counts[-1]),
        }
        path = out / "summary.json"
        written.append(path)
        _write_json(path, summary)
    except Exception:
        for p in written:
            with contextlib.suppress(OSError):
                p.unlink()
        raise
    print(f"wrote {len(written)} files to {out}")
    if sigma_inf is not None and sample_std is not None:
        print(f"sample std = {sample_std:.6g}, sigma_inf = {sigma_inf:.6g}")
    return EXIT_OK


# ------------------------------------------------------------------ sweep

def _axis(triple, log: bool) -> np.ndarray:
    lo, hi, count = float(triple[0]), float(triple[1]), int(triple[2])
    if count < 2:
        raise ConfigError("sweep axis count must be >= 2")
    if log:
        if lo <= 0:
            raise ConfigError("log-spaced sweep axis needs positive bounds")
        return np.geomspace(lo, hi, count)
    return np.linspace(lo, hi, count)


def cmd_sweep(cfg: RunConfig, args: argparse.Namespace) -> int:
    if args.sweep_varsigma is None and args.sweep_tau is None:
        raise ConfigError("sweep needs --sweep-varsigma and/or --sweep-tau")
    vs_axis = (
        _axis(args.sweep_varsigma, args.log_varsigma)
        if args.sweep_varsigma is not None
        else np.array([cfg.varsigma_m])
    )
    tau_axis = (
        _axis(args.sweep_tau, args.log_tau)
        if args.sweep_tau is not None
        else np.array([cfg.tau_m])
    )
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    path = out / "sweep.csv"
    with path.open("w") as f:
        f.write(f"# qho-measure sweep {CSV_VERSION}\n")
        f.write("varsigma_M,tau_M,varsigma_inf,flag\n")
        for tau in tau_axis:
            for vs in vs_axis:
                try:
                    value = nondim_limit(NondimPoint(float(vs), float(tau)))
                    flag = "ok"
                except ResonanceError:
                    value, flag = None, "resonant"
                except (DomainError, ValueError):
                    value, flag = None, "domain"
                f.write(f"{float(vs)!r},{float(tau)!r},{_fmt(value)},{flag}\n")
    print(f"wrote {path}")
    return EXIT_OK


# --------------------------------------------------------------- validate

def cmd_validate(cfg: RunConfig, args: argparse.Namespace) -> int:
    chain_cfg = cfg.chain_config()
    grid = default_grid_for(chain_cfg, n_points=args.grid_n)
    results = run_battery(chain_cfg, grid, weak_gap_tol=args.weak_gap_tol)
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        extra = f" ({r.detail})" if r.detail else ""
        print(f"{status} {r.name}: measured {r.measured:.3e} vs tolerance {r.tolerance:.3e}{extra}")
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    _write_json(
        out / "validate.json",
        {"config": asdict(cfg), "checks": [r.as_dict() for r in results]},
    )
    return EXIT_OK if all(r.passed for r in results) else EXIT_VALIDATION


# ------------------------------------------------------------------- main

def _add_common_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON config file; flags override it")
    p.add_argument("--seed", type=int)
    p.add_argument("--tau-m", dest="tau_m", type=float)
    p.add_argument("--varsigma-m", dest="varsigma_m", type=float)
    p.add_argument("--t-m", dest="t_m", type=float)
    p.add_argument("--sigma-m", dest="sigma_m", type=float)
    p.add_argument("--omega", type=float)
    p.add_argument("--mass", type=float)
    p.add_argument("--hbar", type=float)
    p.add_argument("--n", type=int)
    p.add_argument("--jitter-std", dest="jitter_std", type=float)
    p.add_argument("--x0", type=float)
    p.add_argument("--sigma-x0", dest="sigma_x0", type=float)
    p.add_argument("--engine", choices=["chain", "grid"])
    p.add_argument("--collapse", choices=["replace", "weak"])
    p.add_argument("--out", help="output directory (default qho_out)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qho-measure",
        description="Periodic finite-precision position measurements of a "
        "quantum harmonic oscillator: closed forms, simulation, validation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="closed-form summary for one configuration")
    _add_common_flags(p)

    p = sub.add_parser("simulate", help="run a measurement chain, emit plot-ready tables")
    _add_common_flags(p)

    p = sub.add_parser("sweep", help="grid of the non-dimensional limiting width")
    _add_common_flags(p)
    p.add_argument("--sweep-varsigma", nargs=3, metavar=("MIN", "MAX", "COUNT"))
    p.add_argument("--sweep-tau", nargs=3, metavar=("MIN", "MAX", "COUNT"))
    p.add_argument("--log-varsigma", action="store_true")
    p.add_argument("--log-tau", action="store_true")

    p = sub.add_parser("validate", help="cross-validation battery (closed forms vs grid)")
    _add_common_flags(p)
    p.add_argument("--grid-n", type=int, default=4096, help="grid points for the oracle")
    p.add_argument("--weak-gap-tol", type=float, default=0.05)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve_config(args)
        if args.command == "analyze":
            return cmd_analyze(cfg)
        if args.command == "simulate":
            return cmd_simulate(cfg)
        if args.command == "sweep":
            return cmd_sweep(cfg, args)
        if args.command == "validate":
            return cmd_validate(cfg, args)
        raise ConfigError(f"unknown command {args.command!r}")
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ResonanceError, DomainError) as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RESONANCE
    except QhoError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
