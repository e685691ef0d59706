"""Command-line entry point: one subcommand per experiment class.

Every run writes CSV artifacts plus a ``run_manifest.txt`` recording the
subcommand, config, seed, and toolkit version; stochastic outputs are
byte-reproducible from their manifest for any worker count.
"""
from __future__ import annotations

import argparse
import datetime
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .core import SingleExcState, angular, load_config, params_from_config
from .dynamics import DEFAULT_DT, integrate
from .errors import ConfigError, RydcavityError, StepTooLarge
from .gate import (
    ForsterModel,
    ScanAxis,
    ScanSpec,
    build_geometry,
    scan,
)
from .mcwf import coherent_ladder, ensemble_average
from .oracle import run_oracle_checks

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_ORACLE = 4

OUTPUT_ROOT_ENV = "RYDCAVITY_OUT"


def _out_dir(args) -> Path:
    root = args.out or os.environ.get(OUTPUT_ROOT_ENV) or "."
    path = Path(root)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _write_manifest(out: Path, subcommand: str, config: str, seed) -> None:
    lines = [
        f"subcommand = {subcommand}",
        f"config = {config}",
        f"output_dir = {out}",
        f"master_seed = {seed if seed is not None else '-'}",
        f"timestamp = {datetime.datetime.now(datetime.timezone.utc).isoformat()}",
        f"version = {__version__}",
    ]
    (out / "run_manifest.txt").write_text("\n".join(lines) + "\n", encoding="utf-8")


def _cfg_float(cfg: dict, key: str, default=None) -> float:
    if key not in cfg:
        if default is None:
            raise ConfigError(f"missing required key {key!r}")
        return default
    try:
        return float(cfg[key])
    except (TypeError, ValueError):
        raise ConfigError(f"key {key!r} must be numeric, got {cfg[key]!r}") from None


def cmd_rabi(args) -> int:
    cfg = load_config(args.config)
    p = params_from_config(cfg)
    t_end = _cfg_float(cfg, "t_end", 10.0)
    dt = args.dt or _cfg_float(cfg, "dt", DEFAULT_DT)
    record_every = int(_cfg_float(cfg, "record_every", max(1, round(0.01 / dt))))
    out = _out_dir(args)
    state0 = SingleExcState(1.0, 0.0, 0.0)
    integrate(state0, p, t_end, dt, model="full", record_every=record_every).to_csv(
        out / "rabi_full.csv"
    )
    integrate(state0, p, t_end, dt, model="adiabatic", record_every=record_every).to_csv(
        out / "rabi_adiabatic.csv"
    )
    _write_manifest(out, "rabi", args.config, None)
    print(f"wrote {out/'rabi_full.csv'} and {out/'rabi_adiabatic.csv'}")
    return EXIT_OK


def cmd_mcwf(args) -> int:
    cfg = load_config(args.config)
    p = params_from_config(cfg)
    alpha = _cfg_float(cfg, "alpha")
    cutoff = args.cutoff or int(_cfg_float(cfg, "cutoff"))
    t_end = _cfg_float(cfg, "t_end", 10.0)
    dt = args.dt or _cfg_float(cfg, "dt", 1e-3)
    n_traj = args.traces or int(_cfg_float(cfg, "traces", 1000))
    seed = args.seed if args.seed is not None else int(_cfg_float(cfg, "seed", 0))
    record_every = int(_cfg_float(cfg, "record_every", max(1, round(0.01 / dt))))
    out = _out_dir(args)
    state0 = coherent_ladder(alpha, cutoff, tail_tol=_cfg_float(cfg, "tail_tol", 1e-6))
    try:
        result = ensemble_average(
            state0,
            p,
            t_end,
            dt,
            n_traj,
            master_seed=seed,
            record_every=record_every,
            workers=args.workers,
        )
    except StepTooLarge as exc:
        raise StepTooLarge(f"{exc}; try --dt {dt / 4:g}") from exc
    result.to_csv(out / "mcwf_ensemble.csv")
    _write_manifest(out, "mcwf", args.config, seed)
    print(f"wrote {out/'mcwf_ensemble.csv'} ({n_traj} trajectories, seed {seed})")
    return EXIT_OK


def _parse_axis_values(raw) -> tuple[float, ...]:
    text = str(raw)
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ConfigError(f"axis spec {text!r} must be start:stop:npoints")
        start, stop, n = float(parts[0]), float(parts[1]), int(parts[2])
        return tuple(np.linspace(start, stop, n))
    return tuple(float(v) for v in text.split(","))


def _parse_angular_factors(raw) -> tuple[tuple[float, float], ...]:
    pairs = []
    for item in str(raw).split(";"):
        theta, _, factor = item.partition(":")
        pairs.append((float(theta), float(factor)))
    return tuple(pairs)


def cmd_gate_scan(args) -> int:
    cfg = load_config(args.config)
    p = params_from_config(cfg)
    dims_raw = str(cfg.get("dims", "10,10,10"))
    dims = tuple(int(float(v)) for v in dims_raw.split(","))
    if len(dims) != 3:
        raise ConfigError(f"dims must be three integers, got {dims_raw!r}")
    spacing = _cfg_float(cfg, "spacing", 0.37)
    qubit_offset = _cfg_float(cfg, "qubit_offset", 1.5)
    c3 = angular(_cfg_float(cfg, "c3"))
    factors = None
    if "angular_factors" in cfg:
        factors = _parse_angular_factors(cfg["angular_factors"])
    geom = build_geometry(dims, spacing, qubit_offset).with_forster(ForsterModel(c3, factors))

    axes = []
    for key, raw in cfg.items():
        if key.startswith("scan_"):
            axes.append(ScanAxis(key[len("scan_"):], _parse_axis_values(raw)))
    if not axes:
        raise ConfigError("no scan axes: add at least one 'scan_<param>' key")
    spec = ScanSpec(
        base=p,
        axes=tuple(axes),
        geometry=geom,
        delta=angular(_cfg_float(cfg, "delta", 0.0)),
        delta_r_mode=str(cfg.get("delta_r_mode", "auto")),
        b_sign=_cfg_float(cfg, "b_sign", 1.0),
    )
    table = scan(spec)
    out = _out_dir(args)
    table.to_csv(out / "gate_scan.csv")
    geom.to_csv(out / "geometry.csv")
    _write_manifest(out, "gate-scan", args.config, None)
    n_singular = sum(1 for row in table.rows if row[-1] != "ok")
    print(f"wrote {out/'gate_scan.csv'} ({len(table.rows)} rows, {n_singular} flagged)")
    return EXIT_OK


def cmd_oracle_check(args) -> int:
    results = run_oracle_checks(quick=args.quick)
    failed = 0
    for r in results:
        print(f"[{r.status.upper():>21}] {r.name}: {r.detail}")
        failed += int(r.failed)
    if failed:
        print(f"{failed} check(s) failed")
        return EXIT_ORACLE
    print(f"all {len(results)} checks passed")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rydcavity",
        description=(
            "Cavity/ensemble dynamics toolkit: single-photon Rabi traces, "
            "quantum-trajectory ensembles, gate-fidelity scans, and dense "
            "cross-validation. Config files are 'key = value' lines with "
            "frequencies in MHz."
        ),
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def common(sp, needs_config=True):
        if needs_config:
            sp.add_argument("--config", required=True, help="key=value config file (MHz units)")
        sp.add_argument("--out", default=None, help=f"output directory (default ${OUTPUT_ROOT_ENV} or .)")

    sp = sub.add_parser("rabi", help="single-photon population traces, full and reduced models")
    common(sp)
    sp.add_argument("--dt", type=float, default=None, help="integrator step (us)")
    sp.set_defaults(func=cmd_rabi)

    sp = sub.add_parser("mcwf", help="trajectory-averaged coherent-drive ensemble")
    common(sp)
    sp.add_argument("--dt", type=float, default=None, help="integrator step (us)")
    sp.add_argument("--traces", type=int, default=None, help="number of trajectories")
    sp.add_argument("--seed", type=int, default=None, help="master seed")
    sp.add_argument("--cutoff", type=int, default=None, help="photon-number cutoff")
    sp.add_argument("--workers", type=int, default=1, help="parallel worker processes")
    sp.set_defaults(func=cmd_mcwf)

    sp = sub.add_parser("gate-scan", help="conditional-reflection and fidelity parameter scan")
    common(sp)
    sp.set_defaults(func=cmd_gate_scan)

    sp = sub.add_parser("oracle-check", help="dense cross-validation suite")
    sp.add_argument("--out", default=None, help="unused; accepted for uniformity")
    sp.add_argument("--quick", action="store_true", help="shorter evolutions")
    sp.set_defaults(func=cmd_oracle_check)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except RydcavityError as exc:
        print(f"numerical error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
