"""Command-line entry point: ``goodbsq <subcommand> [options]``.

Every run writes ``manifest.json`` (resolved config, seed, run id, artifact
checksums), one table per report (CSV, or JSON with ``--format json``) and a
plain-text ``summary.txt``.  Exit status: 0 success, 2 invalid configuration,
3 numerical abort.
"""
from __future__ import annotations

import argparse
import configparser
import csv
import hashlib
import json
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence

import numpy as np

from . import __version__
from .dynamics import (
    NumericalInstability,
    default_dt,
    integrate_decomposed,
    integrate_direct,
    remainder_z,
    smoothing_scan,
)
from .estimates import (
    KINDS,
    LatticeScanConfig,
    counterexample_fit,
    region_map,
    scan_M,
    t_boundedness_trials,
)
from .spectral_core import ModelParams, SpectralField, random_sobolev_field

log = logging.getLogger("goodbsq")

EXIT_OK, EXIT_INVALID, EXIT_NUMERIC = 0, 2, 3

SUBCOMMANDS = ("simulate", "decompose", "smoothing-scan", "symbol-scan", "counterexample", "t-bound")

REQUIRED = {
    "simulate": ("alpha",),
    "decompose": ("alpha",),
    "smoothing-scan": ("alpha", "beta"),
    "symbol-scan": ("kind", "alpha", "gamma"),
    "counterexample": ("alpha", "gamma"),
    "t-bound": ("alpha",),
}

DEFAULT_N = {
    "simulate": [64],
    "decompose": [64],
    "smoothing-scan": [32, 64, 128, 256],
    "symbol-scan": [32, 64, 128, 256],
    "counterexample": [2 ** k for k in range(6, 21)],
    "t-bound": [16, 64, 256, 1024],
}

# key -> converter for config files
_KEYS = {
    "alpha": float, "gamma": float, "beta": lambda s: [float(x) for x in s.replace(",", " ").split()],
    "delta": float, "n": lambda s: [int(x) for x in s.replace(",", " ").split()],
    "dt": float, "horizon": float, "seed": int, "out": str, "format": str,
    "kind": str, "eps1": int, "eps2": int, "eps3": int, "trials": int,
    "amplitude": float, "n_out": int, "mean0": float, "mean1": float,
    "region": lambda s: s.strip().lower() in ("1", "true", "yes", "on"),
}


class ConfigError(ValueError):
    pass


def _fmt(x) -> str:
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    return str(x)


def _workers() -> int:
    env = os.environ.get("GOODBSQ_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ConfigError(f"GOODBSQ_THREADS={env!r} is not an integer") from None
    return os.cpu_count() or 1


# -- configuration -----------------------------------------------------------------

def read_config_file(path: str) -> Dict[str, object]:
    """Flat ``key = value`` file; ``#`` starts a comment."""
    parser = configparser.ConfigParser(inline_comment_prefixes=("#",))
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"config: cannot read {path}: {exc}") from None
    try:
        parser.read_string("[run]\n" + text)
    except configparser.Error as exc:
        raise ConfigError(f"config: {exc}") from None
    out = {}
    for key, raw in parser["run"].items():
        key = key.replace("-", "_")
        if key not in _KEYS:
            raise ConfigError(f"config: unknown key {key!r}")
        try:
            out[key] = _KEYS[key](raw)
        except ValueError:
            raise ConfigError(f"config: bad value for {key}: {raw!r}") from None
    return out


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="goodbsq", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", metavar="subcommand")
    for name in SUBCOMMANDS:
        s = sub.add_parser(name)
        s.add_argument("--config", help="flat key = value file; flags override it")
        s.add_argument("--alpha", type=float)
        s.add_argument("--gamma", type=float)
        s.add_argument("--beta", type=float, action="append", help="repeatable")
        s.add_argument("--delta", type=float)
        s.add_argument("--n", type=int, action="append", help="truncation or cutoff, repeatable")
        s.add_argument("--dt", type=float)
        s.add_argument("--horizon", type=float)
        s.add_argument("--seed", type=int)
        s.add_argument("--out")
        s.add_argument("--format", choices=("csv", "json"))
        if name in ("simulate", "decompose", "smoothing-scan"):
            s.add_argument("--amplitude", type=float)
            s.add_argument("--n-out", dest="n_out", type=int)
        if name in ("simulate", "decompose"):
            s.add_argument("--mean0", type=float, help="mean of u0")
            s.add_argument("--mean1", type=float, help="mean of u1")
        if name == "symbol-scan":
            s.add_argument("--kind", choices=KINDS)
            s.add_argument("--eps1", type=int, choices=(-1, 1))
            s.add_argument("--eps2", type=int, choices=(-1, 1))
            s.add_argument("--eps3", type=int, choices=(-1, 1))
            s.add_argument("--region", action="store_true", default=None,
                           help="verdicts over the 9x9 (alpha, gamma) grid")
        if name == "t-bound":
            s.add_argument("--trials", type=int)
    return p


def resolve(args: argparse.Namespace) -> Dict[str, object]:
    """Merge config file, flags and defaults into one validated mapping."""
    cmd = args.command
    cfg: Dict[str, object] = {}
    if args.config:
        cfg.update(read_config_file(args.config))
    for key, val in vars(args).items():
        if key in ("command", "config") or val is None:
            continue
        cfg[key] = val
    missing = [k for k in REQUIRED[cmd] if k not in cfg]
    if cmd == "symbol-scan" and cfg.get("region"):
        missing = [k for k in missing if k not in ("alpha", "gamma")]
    if missing:
        raise ConfigError(f"{cmd}: missing required field(s): {', '.join(missing)}")
    _workers()
    cfg.setdefault("seed", 0)
    cfg.setdefault("format", "csv")
    cfg.setdefault("out", "goodbsq-out")
    cfg.setdefault("n", list(DEFAULT_N[cmd]))
    cfg.setdefault("delta", 0.01)
    if cfg["format"] not in ("csv", "json"):
        raise ConfigError(f"format: must be csv or json, got {cfg['format']!r}")
    ns = cfg["n"]
    if not ns or any(n < 1 for n in ns):
        raise ConfigError(f"n: cutoffs must be positive, got {ns}")
    if cmd in ("simulate", "decompose", "smoothing-scan"):
        cfg.setdefault("horizon", 0.25)
        cfg.setdefault("amplitude", 1.0)
        cfg.setdefault("n_out", 10)
        if cfg["n_out"] < 1:
            raise ConfigError("n_out: must be >= 1")
        if "dt" not in cfg:
            cfg["dt"] = min(1e-3, default_dt(max(ns)))
        betas = cfg.get("beta") or [0.0]
        for N in ns:
            try:
                ModelParams(alpha=cfg["alpha"], trunc=N, dt=cfg["dt"], horizon=cfg["horizon"],
                            beta=betas[0], delta=cfg["delta"])
            except ValueError as exc:
                raise ConfigError(str(exc)) from None
    if cmd in ("smoothing-scan", "symbol-scan"):
        if any(b <= a for a, b in zip(ns, ns[1:])):
            raise ConfigError(f"n: cutoffs must be increasing, got {ns}")
        if len(ns) < 3:
            raise ConfigError("n: a growth fit needs at least three values")
    if cmd == "symbol-scan" and not cfg.get("region"):
        try:
            LatticeScanConfig(cfg["kind"], cfg["alpha"], cfg["gamma"], cfg["delta"], tuple(ns),
                              cfg.get("eps1"), cfg.get("eps2"), cfg.get("eps3"))
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
    if cmd == "symbol-scan" and cfg.get("region") and cfg.get("kind") not in KINDS:
        raise ConfigError(f"kind: must be one of {KINDS}")
    if cmd == "t-bound":
        cfg.setdefault("trials", 100)
        if not 0.0 < cfg["alpha"] < 0.5:
            raise ConfigError(f"alpha: must lie in (0, 1/2), got {cfg['alpha']}")
        if cfg["trials"] < 0:
            raise ConfigError("trials: must be >= 0")
    if cmd == "counterexample" and any(n < 1 for n in ns):
        raise ConfigError("n: must be >= 1")
    cfg["command"] = cmd
    return cfg


def run_id(cfg: Dict[str, object]) -> str:
    canon = json.dumps({k: v for k, v in cfg.items() if k != "out"}, sort_keys=True,
                       default=str)
    return hashlib.sha1(canon.encode()).hexdigest()[:12]


# -- artifact writing ----------------------------------------------------------------

class _Artifacts:
    def __init__(self, out: Path, fmt: str):
        self.out = out
        self.fmt = fmt
        self.files: Dict[str, str] = {}
        out.mkdir(parents=True, exist_ok=True)

    def table(self, name: str, rows: Iterable[dict]):
        rows = list(rows)
        if self.fmt == "json":
            path = self.out / f"{name}.json"
            data = [{k: (float(v) if isinstance(v, np.floating) else v) for k, v in r.items()}
                    for r in rows]
            path.write_text(json.dumps(data, indent=1, sort_keys=True) + "\n")
        else:
            path = self.out / f"{name}.csv"
            with open(path, "w", newline="") as fh:
                if rows:
                    w = csv.writer(fh, lineterminator="\n")
                    w.writerow(list(rows[0]))
                    for r in rows:
                        w.writerow([_fmt(v) for v in r.values()])
        self.files[path.name] = hashlib.sha256(path.read_bytes()).hexdigest()

    def finish(self, cfg: dict, summary: List[str]):
        (self.out / "summary.txt").write_text("\n".join(summary) + "\n")
        manifest = {
            "package": "goodbsq",
            "version": __version__,
            "run_id": run_id(cfg),
            "config": {k: v for k, v in sorted(cfg.items())},
            "artifacts": dict(sorted(self.files.items())),
            "notes": {
                "zero_mode": "A0 and A1 are the means of u0 and u1; the zero mode is A0 + A1 t",
                "mean_convention": "(1/pi) * integral of u1 over the circle equals 2 * A1",
                "counterexample_normalization": "C = 1",
            },
        }
        (self.out / "manifest.json").write_text(json.dumps(manifest, indent=1, sort_keys=True,
                                                           default=str) + "\n")


# -- subcommands ---------------------------------------------------------------------

def _initial_data(cfg, N):
    u0 = random_sobolev_field(-cfg["alpha"], N, cfg["seed"]) * cfg["amplitude"]
    c0 = u0.coeffs.copy()
    c0[N] = cfg.get("mean0", 0.0)
    u1 = SpectralField.zeros(N)
    c1 = u1.coeffs.copy()
    c1[N] = cfg.get("mean1", 0.0)
    return SpectralField(N, c0, True), SpectralField(N, c1, True)


def _params(cfg, N):
    betas = cfg.get("beta") or [0.0]
    return ModelParams(alpha=cfg["alpha"], trunc=N, dt=cfg["dt"], horizon=cfg["horizon"],
                       beta=betas[0], delta=cfg["delta"])


def _cmd_simulate(cfg, art):
    summary = []
    rows = []
    for N in cfg["n"]:
        u0, u1 = _initial_data(cfg, N)
        prm = _params(cfg, N)
        traj = integrate_direct(u0, u1, prm, n_out=cfg["n_out"], norm_s=(0.0, -cfg["alpha"]))
        for i, t in enumerate(traj.times):
            rows.append({"N": N, "t": float(t), "zero_mode": float(traj.zero_mode[i].real),
                         "norm_L2": float(traj.norms[0.0][i]),
                         "norm_H-alpha": float(traj.norms[-cfg["alpha"]][i])})
        summary.append(f"N={N}: ||u(T)||_L2 = {traj.norms[0.0][-1]:.6g}")
    art.table("trajectory", rows)
    return summary


def _cmd_decompose(cfg, art):
    summary = []
    rows = []
    betas = cfg.get("beta") or [0.0]
    for N in cfg["n"]:
        u0, u1 = _initial_data(cfg, N)
        prm = _params(cfg, N)
        _, traj = integrate_decomposed(u0, u1, prm, n_out=cfg["n_out"], norm_s=(0.0,))
        z = remainder_z(traj, u0, u1, prm, betas)
        for i, t in enumerate(traj.times):
            row = {"N": N, "t": float(t), "norm_L2": float(traj.norms[0.0][i])}
            for b in betas:
                row[f"z_H{b:g}"] = float(z[b][i])
            rows.append(row)
        summary.append(f"N={N}: sup_t ||z||_H^{betas[0]:g} = {np.max(z[betas[0]]):.6g}")
    art.table("decomposition", rows)
    return summary


def _cmd_smoothing(cfg, art):
    N_list = cfg["n"]
    prm = _params(cfg, N_list[0])
    n_workers = min(_workers(), len(N_list))
    if n_workers > 1:
        with ThreadPoolExecutor(n_workers) as pool:
            rep = smoothing_scan(prm, N_list, cfg["beta"], cfg["seed"], amplitude=cfg["amplitude"],
                                 n_out=cfg["n_out"], executor=pool)
    else:
        rep = smoothing_scan(prm, N_list, cfg["beta"], cfg["seed"], amplitude=cfg["amplitude"],
                             n_out=cfg["n_out"])
    art.table("smoothing", rep.rows())
    return [f"beta={b:g}: z slope {rep.z_slope[b]:.3f}, free slope {rep.free_slope[b]:.3f}, "
            f"{rep.verdict[b]}" for b in rep.betas]


def _cmd_symbol(cfg, art):
    workers = _workers()
    if cfg.get("region"):
        grid = [round(0.05 * k, 2) for k in range(1, 10)]
        eps = (cfg.get("eps1"), cfg.get("eps2"), cfg.get("eps3"))
        rows = region_map(cfg["kind"], grid, grid, N_list=cfg["n"], delta=cfg["delta"],
                          eps=eps, workers=workers)
        art.table("region", rows)
        agree = sum(r["verdict"] == r["expected"] for r in rows)
        return [f"{cfg['kind']} region map: {agree}/{len(rows)} verdicts match the analytic region"]
    conf = LatticeScanConfig(cfg["kind"], cfg["alpha"], cfg["gamma"], cfg["delta"], tuple(cfg["n"]),
                             cfg.get("eps1"), cfg.get("eps2"), cfg.get("eps3"))
    rep = scan_M(conf, workers=workers)
    art.table("symbol_scan", rep.rows())
    return [f"{conf.kind} alpha={conf.alpha:g} gamma={conf.gamma:g}: slope {rep.slope:.3f} "
            f"(shell {rep.shell_slope:.3f}), argmax {rep.argmax[-1]}, {rep.verdict}"]


def _cmd_counterexample(cfg, art):
    rep = counterexample_fit(cfg["alpha"], cfg["gamma"], cfg["n"])
    art.table("counterexample", rep.rows())
    return [f"fitted slope {rep.slope:.2f} vs theory {rep.theory:.2f}"]


def _cmd_tbound(cfg, art):
    rep = t_boundedness_trials(cfg["alpha"], cfg["trials"], cfg["n"], cfg["seed"])
    art.table("t_bound", rep.rows())
    return [f"alpha={rep.alpha:g}: max ratio {max(rep.overall_max):.4g}, "
            f"cross-N slope {rep.slope:.3f}"]


_DISPATCH = {
    "simulate": _cmd_simulate,
    "decompose": _cmd_decompose,
    "smoothing-scan": _cmd_smoothing,
    "symbol-scan": _cmd_symbol,
    "counterexample": _cmd_counterexample,
    "t-bound": _cmd_tbound,
}


def run(cfg: Dict[str, object]) -> int:
    art = _Artifacts(Path(str(cfg["out"])), str(cfg["format"]))
    try:
        summary = _DISPATCH[cfg["command"]](cfg, art)
    except NumericalInstability as exc:
        art.finish(cfg, [f"aborted: {exc}"])
        print(f"goodbsq: numerical abort: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    art.finish(cfg, summary)
    for line in summary:
        print(line)
    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(name)s: %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INVALID if exc.code else EXIT_OK
    if args.command is None:
        parser.print_usage(sys.stderr)
        print(f"goodbsq: a subcommand is required: {', '.join(SUBCOMMANDS)}", file=sys.stderr)
        return EXIT_INVALID
    try:
        cfg = resolve(args)
    except ConfigError as exc:
        print(f"goodbsq: {exc}", file=sys.stderr)
        return EXIT_INVALID
    return run(cfg)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
