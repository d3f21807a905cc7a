"""Command-line front end: plan | contour | run | sweep | qfunc.

Exit codes: 0 success, 1 I/O or numerical failure, 2 invalid input or infeasible request.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from dataclasses import dataclass, fields

import numpy as np

from . import planner, protocol
from .cavity import CavityParams, QuadratureError, DegenerateTraceError
from .planner import GHZ, Dicke, InfeasibleError
from .symspace import apply_rotation, css_state, dicke, ghz_state, husimi_q


class ConfigError(ValueError):
    pass


@dataclass
class Config:
    n: int | None = None
    dicke: int | None = None
    ghz: bool = False
    k: int | None = None
    g: float | None = None
    kappa: float | None = None
    gamma: float | None = None
    delta: float | None = None
    sigma: float | None = None
    herald: bool = False
    axis: str | None = None
    values: list | None = None
    jobs: int | None = None
    out: str | None = None
    trajectory: str | None = None

    @classmethod
    def from_mapping(cls, d: dict) -> "Config":
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(d) - known)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        return cls(**d)

    def target(self):
        if self.ghz and self.dicke is not None:
            raise ConfigError("choose either a Dicke target or GHZ, not both")
        if self.ghz:
            if self.n is not None and self.n % 2:
                raise InfeasibleError("GHZ requires even N")
            return GHZ()
        if self.dicke is None:
            raise ConfigError("a target is required (--dicke M or --ghz)")
        return Dicke(self.dicke)

    def require_n(self) -> int:
        if self.n is None or self.n < 1:
            raise ConfigError("--n must be a positive integer")
        return self.n

    def cavity(self, delta_default: float = 1.0) -> CavityParams:
        missing = [k for k in ("g", "kappa", "gamma") if getattr(self, k) is None]
        if missing:
            raise ConfigError(f"cavity parameters missing: {', '.join(missing)}")
        return CavityParams(self.g, self.kappa, self.gamma, self.delta or delta_default)

    @property
    def noisy(self) -> bool:
        return self.g is not None


def _common(p: argparse.ArgumentParser):
    p.add_argument("--config", help="JSON config file; flags override its values")
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--dicke", type=int, default=None, metavar="M")
    p.add_argument("--ghz", action="store_const", const=True, default=None)
    p.add_argument("--k", type=int, default=None, help="override the Grover step count")
    p.add_argument("--g", type=float, default=None)
    p.add_argument("--kappa", type=float, default=None)
    p.add_argument("--gamma", type=float, default=None)
    p.add_argument("--delta", type=float, default=None)
    p.add_argument("--sigma", type=float, default=None)
    p.add_argument("--herald", action="store_const", const=True, default=None)
    p.add_argument("--jobs", type=int, default=None)
    p.add_argument("--out", default=None)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="grovercavity", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("plan", help="solve rotation angle and step count, emit plan JSON")
    _common(p)

    p = sub.add_parser("contour", help="minimal step counts for all (N, m)")
    p.add_argument("--n-max", type=int, required=True)
    p.add_argument("--out", default=None)

    p = sub.add_parser("run", help="ideal or noisy execution of a plan")
    _common(p)
    p.add_argument("--trajectory", default=None, help="CSV path for the per-step amplitudes")

    p = sub.add_parser("sweep", help="cooperativity, qubit-number or bandwidth sweep")
    _common(p)
    p.add_argument("--axis", choices=["C", "N", "sigma"], default=None)
    p.add_argument("--values", default=None, help="comma-separated axis values")

    p = sub.add_parser("qfunc", help="Husimi Q function grid")
    p.add_argument("--n", type=int, required=True)
    p.add_argument(
        "--state",
        required=True,
        help="dicke:M | ghz | css:PHI | rotated-dicke:M:PHI",
    )
    p.add_argument("--n-beta", type=int, default=61)
    p.add_argument("--n-phi", type=int, default=121)
    p.add_argument("--out", default=None)
    return ap


def load_config(args: argparse.Namespace) -> Config:
    data = {}
    if getattr(args, "config", None):
        with open(args.config) as fh:
            data = json.load(fh)
        if not isinstance(data, dict):
            raise ConfigError("config file must hold a JSON object")
    cfg = Config.from_mapping(data)
    for f in fields(Config):
        v = getattr(args, f.name, None)
        if v is None:
            continue
        if f.name == "values" and isinstance(v, str):
            v = [float(x) for x in v.split(",") if x.strip()]
        setattr(cfg, f.name, v)
    return cfg


def _emit(text: str, out: str | None):
    if out:
        with open(out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _summary(line: str, out: str | None):
    # summary lines go to stdout unless stdout carries the data itself
    print(line, file=sys.stdout if out else sys.stderr)


def cmd_plan(cfg: Config) -> int:
    n = cfg.require_n()
    pl = planner.plan(n, cfg.target(), cfg.k)
    _emit(pl.to_json() + "\n", cfg.out)
    return 0


def cmd_contour(args) -> int:
    if args.n_max < 3:
        raise ConfigError("--n-max must be at least 3")
    rows = planner.contour_table(args.n_max)
    _emit(planner.contour_csv(rows), args.out)
    _summary(f"max_k={max(r[2] for r in rows)}", args.out)
    return 0


def _trajectory_csv(res) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["step", "amplitude"])
    for j, a in enumerate(res.amp_trajectory):
        w.writerow([j, format(a, ".17g")])
    return buf.getvalue()


def cmd_run(cfg: Config) -> int:
    n = cfg.require_n()
    target = cfg.target()
    if not cfg.noisy:
        res = protocol.run_ideal(planner.plan(n, target, cfg.k))
        doc = {"mode": "ideal", "ideal": res.to_dict()}
        traj = res
    else:
        if cfg.sigma is None:
            raise ConfigError("--sigma is required for a noisy run")
        p = cfg.cavity()
        doc = {"mode": "noisy"}
        for label, her in (("unheralded", False), ("heralded", True)):
            if cfg.delta is not None:
                pl = planner.plan(n, target, cfg.k)
                r = protocol.run_noisy(pl, p, cfg.sigma, her)
            else:
                extra = 0 if cfg.k is not None else protocol.K_EXTRA
                r = protocol.optimize(n, target, p, cfg.sigma, her, k_extra=extra)
            doc[label] = r.to_dict()
        traj = protocol.RunResult(**doc["unheralded"])
    _emit(json.dumps(doc, indent=2) + "\n", cfg.out)
    if cfg.trajectory:
        _emit(_trajectory_csv(traj), cfg.trajectory)
    return 0


def cmd_sweep(cfg: Config) -> int:
    if cfg.axis is None or not cfg.values:
        raise ConfigError("--axis and --values are required")
    if cfg.sigma is None and cfg.axis != "sigma":
        raise ConfigError("--sigma is required")
    jobs = cfg.jobs or os.cpu_count() or 1
    vals = list(cfg.values)
    if cfg.axis == "C":
        n = cfg.require_n()
        if cfg.dicke is None:
            raise ConfigError("--dicke M is required for a cooperativity sweep")
        tab = protocol.sweep_cooperativity(
            n, cfg.dicke, vals, cfg.sigma, cfg.herald,
            kappa=cfg.kappa or 1.0, gamma=cfg.gamma or 1.0, jobs=jobs,
        )
    elif cfg.axis == "N":
        if cfg.dicke is None:
            raise ConfigError("--dicke M is required for a qubit-number sweep")
        tab = protocol.sweep_qubits(
            cfg.dicke, [int(v) for v in vals], cfg.cavity(), cfg.sigma, cfg.herald, jobs=jobs
        )
    else:
        n = cfg.require_n()
        m = cfg.dicke if cfg.dicke is not None else 1
        # bandwidth law with atomic loss switched off
        p = CavityParams(cfg.g or 10.0, cfg.kappa or 1.0, 0.0, cfg.delta or 100.0)
        s = css_state(n, planner.solve_phi_dicke(n, m, planner.min_steps_dicke(n, m)))
        tab = protocol.sweep_sigma(p, s, m, vals)
    _emit(tab.to_csv(), cfg.out)
    fit = protocol.fit_exponent(tab)
    _summary(f"slope={fit.slope:.6f} intercept={fit.intercept:.6f} r2={fit.r2:.6f}", cfg.out)
    return 0


def _parse_state(spec: str, n: int):
    parts = spec.split(":")
    kind = parts[0]
    try:
        if kind == "dicke" and len(parts) == 2:
            return dicke(n, int(parts[1]))
        if kind == "ghz" and len(parts) == 1:
            if n % 2:
                raise InfeasibleError("GHZ requires even N")
            return ghz_state(n, planner.ghz_sign(n))
        if kind == "css" and len(parts) == 2:
            return css_state(n, float(parts[1]))
        if kind == "rotated-dicke" and len(parts) == 3:
            return apply_rotation(dicke(n, int(parts[1])), float(parts[2]))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    raise ConfigError(f"cannot parse state spec {spec!r}")


def cmd_qfunc(args) -> int:
    if args.n_beta < 1 or args.n_phi < 1:
        raise ConfigError("grid resolution must be positive")
    s = _parse_state(args.state, args.n)
    betas = np.linspace(0.0, math.pi, args.n_beta)
    phis = np.linspace(-math.pi, math.pi, args.n_phi, endpoint=False)
    _emit(husimi_q(s, betas, phis).to_csv(), args.out)
    return 0


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        if args.command == "contour":
            return cmd_contour(args)
        if args.command == "qfunc":
            return cmd_qfunc(args)
        cfg = load_config(args)
        return {"plan": cmd_plan, "run": cmd_run, "sweep": cmd_sweep}[args.command](cfg)
    except (ConfigError, InfeasibleError, ValueError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (OSError, QuadratureError, DegenerateTraceError, ArithmeticError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
