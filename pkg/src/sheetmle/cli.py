"""Command-line front end.

Subcommands share one JSON config schema with command-specific sections::

    {
      "domain": {"kind": "circle", "cx": 6, "cy": 6, "r": 2},
      "model": {"variant": "wiener"},
      "regressors": [{"expr": "s^2+t^2"}, {"expr": "s+t"}, {"expr": "s*t"}],
      "true_m": [5, 8, 3],
      "simulation": {"S": 8, "T": 8, "n": 50, "seed": 1},
      "experiment": {"replications": 200, "n_sweep": [25, 50],
                     "base_seed": 20260810, "workers": 1}
    }

Exit codes: 0 success, 1 domain/model failure, 2 usage or config error.
Every output-producing run emits a ``manifest.json`` with digests of the
written files, so reruns can be compared byte for byte.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .errors import DomainValidationError, SheetMLEError
from .estimation import GriddedField, estimate, fisher_matrix, mle, score_vector
from .geometry import domain_spec_from_json, validate
from .harness import ExperimentConfig, emit_tables, run_experiment
from .quadrature import QuadConfig
from .random_fields import Drift, FieldModel, FieldSample, draw_kl
from .regressors import from_expressions
from .stochastic import StochIntConfig

_MODEL_FLAG = {"wiener": "wiener", "ou-stat": "stationary_ou",
               "ou-zero": "zero_start_ou"}
_PROFILES = {"desk": {"replications": 200, "n_sweep": [25, 50]},
             "paper": {"replications": 1000, "n_sweep": [25, 50, 75, 100]}}
_COND_WARN = 1e12


class ConfigError(Exception):
    pass


def _load_config(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc


def _build_model(cfg: dict, override: str | None) -> FieldModel:
    section = dict(cfg.get("model", {}))
    if override is not None:
        section["variant"] = _MODEL_FLAG[override]
    variant = section.get("variant")
    if variant is None:
        raise ConfigError("config is missing model.variant")
    if variant == "wiener":
        return FieldModel("wiener")
    try:
        return FieldModel(variant, float(section["alpha"]),
                          float(section["beta"]), float(section["sigma"]))
    except (KeyError, ValueError, TypeError) as exc:
        raise ConfigError(f"bad model section: {exc}") from exc


def _build_domain(cfg: dict):
    try:
        spec = domain_spec_from_json(cfg["domain"])
    except (KeyError, ValueError, TypeError) as exc:
        raise ConfigError(f"bad domain section: {exc}") from exc
    return spec


def _build_regressors(cfg: dict):
    try:
        return from_expressions(cfg["regressors"])
    except (KeyError, ValueError, TypeError) as exc:
        raise ConfigError(f"bad regressors section: {exc}") from exc


def _quad_config(cfg: dict) -> QuadConfig:
    q = cfg.get("quadrature", {})
    return QuadConfig(abs_tol=float(q.get("abs_tol", 1e-9)),
                      rel_tol=float(q.get("rel_tol", 1e-7)),
                      max_depth=int(q.get("max_depth", 40)))


def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    h.update(path.read_bytes())
    return h.hexdigest()


def _write_manifest(out_dir: Path, command: str, config: dict,
                    outputs: dict[str, Path], t0: float) -> Path:
    manifest = {
        "command": command,
        "tool_version": __version__,
        "wall_time_s": time.time() - t0,
        "config": config,
        "outputs": {name: {"path": str(p), "sha256": _sha256(p)}
                    for name, p in sorted(outputs.items())},
    }
    path = out_dir / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True),
                    encoding="utf-8")
    return path


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_domain_check(args) -> int:
    t0 = time.time()
    cfg = _load_config(args.config)
    spec = _build_domain(cfg)
    try:
        dom = validate(spec)
    except DomainValidationError as exc:
        print(f"INVALID: {type(exc).__name__}: {exc}")
        return 1
    sp = dom.spec
    lines = [
        "domain: VALID",
        f"breakpoints: a={sp.a:.12g} b1={sp.b1:.12g} b2={sp.b2:.12g} c={sp.c:.12g}",
        f"corner ordinates: lower {sp.gamma12(sp.b1):.12g}, upper {sp.gamma2(sp.b2):.12g}",
        f"bounding box: {dom.bounding_box()}",
    ]
    report = "\n".join(lines)
    print(report)
    if args.out is not None:
        out = _out_dir(args)
        path = out / "domain_report.txt"
        path.write_text(report + "\n", encoding="utf-8")
        _write_manifest(out, "domain-check", cfg, {"report": path}, t0)
    return 0


def cmd_fisher(args) -> int:
    t0 = time.time()
    cfg = _load_config(args.config)
    model = _build_model(cfg, args.model)
    dom = validate(_build_domain(cfg))
    reg = _build_regressors(cfg)
    A = fisher_matrix(model, dom, reg, _quad_config(cfg))
    cond = float(np.linalg.cond(A))
    print(f"fisher matrix ({model.variant}), p={reg.p}")
    for row in A:
        print("  " + "  ".join(f"{v: .10g}" for v in row))
    print(f"condition number: {cond:.6g}")
    if cond > _COND_WARN:
        print(f"warning: condition number above {_COND_WARN:g}; "
              "regressors may be nearly dependent on the domain")
    out = _out_dir(args)
    jpath = out / "fisher.json"
    jpath.write_text(json.dumps({"variant": model.variant,
                                 "A": A.tolist(),
                                 "condition_number": cond}),
                     encoding="utf-8")
    cpath = out / "fisher.csv"
    with open(cpath, "w", encoding="utf-8") as fh:
        fh.write("i,j,value\n")
        for i in range(reg.p):
            for j in range(reg.p):
                fh.write(f"{i},{j},{A[i, j]!r}\n")
    _write_manifest(out, "fisher", cfg, {"fisher_json": jpath,
                                         "fisher_csv": cpath}, t0)
    return 0


def cmd_estimate(args) -> int:
    t0 = time.time()
    cfg = _load_config(args.config)
    model = _build_model(cfg, args.model)
    dom = validate(_build_domain(cfg))
    reg = _build_regressors(cfg)
    quad = _quad_config(cfg)
    stoch = StochIntConfig(quad=quad)
    sim = cfg.get("simulation", {})

    if args.field is not None:
        if not Path(args.field).exists():
            raise ConfigError(f"grid file not found: {args.field}")
        Z = GriddedField.from_csv(args.field)
    else:
        seed = args.seed if args.seed is not None else int(sim.get("seed", 0))
        n = int(sim.get("n", 50))
        S, T = float(sim.get("S", 8.0)), float(sim.get("T", 8.0))
        drift = None
        if cfg.get("true_m") is not None:
            drift = Drift(reg, np.asarray(cfg["true_m"], dtype=float))
        noise = float(sim.get("noise_scale", 1.0))
        if noise == 0.0:
            Z = FieldSample(drift=drift)
        else:
            Z = FieldSample(model=model, kl=draw_kl(n, S, T, seed), drift=drift)

    result = estimate(model, Z, dom, reg, quad_cfg=quad, stoch_cfg=stoch)
    print("m_hat:", " ".join(f"{v:.10g}" for v in result.m_hat))
    out = _out_dir(args)
    path = out / "estimate.json"
    path.write_text(json.dumps(result.to_json()), encoding="utf-8")
    _write_manifest(out, "estimate", cfg, {"estimate": path}, t0)
    return 0


def cmd_experiment(args) -> int:
    t0 = time.time()
    cfg = _load_config(args.config)
    model = _build_model(cfg, args.model)
    dom = validate(_build_domain(cfg))
    reg = _build_regressors(cfg)
    quad = _quad_config(cfg)
    exp = dict(cfg.get("experiment", {}))
    if args.profile is not None:
        exp.update(_PROFILES[args.profile])
    sim = cfg.get("simulation", {})
    try:
        econf = ExperimentConfig(
            model=model, domain=dom, regressors=reg,
            true_m=np.asarray(cfg["true_m"], dtype=float),
            replications=int(exp["replications"]),
            n_sweep=tuple(exp["n_sweep"]),
            S=float(sim.get("S", 8.0)), T=float(sim.get("T", 8.0)),
            base_seed=(args.seed if args.seed is not None
                       else int(exp.get("base_seed", 0))),
            workers=(args.workers if args.workers is not None
                     else int(exp.get("workers", 1))),
            noise_scale=float(exp.get("noise_scale", 1.0)),
            keep_replications=bool(exp.get("keep_replications", False)),
            quad=quad, stoch=StochIntConfig(quad=quad),
        )
    except (KeyError, ValueError, TypeError) as exc:
        raise ConfigError(f"bad experiment section: {exc}") from exc
    result = run_experiment(econf)
    out = _out_dir(args)
    outputs = {}
    outputs.update(emit_tables(result, out, "csv"))
    outputs.update(emit_tables(result, out, "json"))
    for e in result.entries:
        print(f"n={e.n}: mean m_hat = "
              + " ".join(f"{v:.6g}" for v in e.mean_m_hat)
              + f"  ({e.count} replications, {len(e.failed)} failed)")
    _write_manifest(out, "experiment", cfg, outputs, t0)
    return 0


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="sheetmle",
        description="Regression MLE for Gaussian-sheet-driven fields on "
                    "curved planar domains")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, needs_out=True):
        p.add_argument("--config", required=True, help="JSON config path")
        p.add_argument("--model", choices=sorted(_MODEL_FLAG),
                       help="override the config's model variant")
        if needs_out:
            p.add_argument("--out", default="sheetmle_out",
                           help="output directory")
        p.add_argument("--seed", type=int, help="override seed")
        p.add_argument("--workers", type=int, help="worker threads")

    p = sub.add_parser("domain-check", help="validate the domain")
    common(p, needs_out=False)
    p.add_argument("--out", default=None, help="optional report directory")
    p.set_defaults(fn=cmd_domain_check)

    p = sub.add_parser("fisher", help="compute the information matrix")
    common(p)
    p.set_defaults(fn=cmd_fisher)

    p = sub.add_parser("estimate", help="estimate parameters of one field")
    common(p)
    p.add_argument("--field", help="gridded observations CSV (s,t,z)")
    p.add_argument("--simulate", dest="seed", type=int,
                   help="simulate the field with this seed")
    p.set_defaults(fn=cmd_estimate)

    p = sub.add_parser("experiment", help="run the Monte Carlo study")
    common(p)
    p.add_argument("--profile", choices=sorted(_PROFILES),
                   help="replication profile preset")
    p.set_defaults(fn=cmd_experiment)
    return ap


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except DomainValidationError as exc:
        print(f"domain error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except SheetMLEError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
