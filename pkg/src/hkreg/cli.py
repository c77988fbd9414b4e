"""
Command line front end.

    hkreg run CONFIG
    hkreg sweep CONFIG --alphas 1e4,1e6,1e8
    hkreg evaluate CONFIG --eta design.eta --levels 2

Config files hold ``key = value`` lines; ``#`` starts a comment. Exit status
is 0 on success, 1 on a configuration error and 2 on a solver failure.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path
from typing import Optional

import numpy as np

from . import export
from .bench import alpha_sweep, mesh_descriptor, multilevel_evaluate, run_benchmark
from .fem import DEFAULT_EPSILON, MaterialDistribution, discrete_state
from .mesh import PATTERNS, MeshError, read_mesh, refine_uniform
from .optimizer import OptimizationError, OptimizerConfig
from .problems import PROBLEMS, get_problem
from .sensitivity import VARIANTS
from .sparse import DEFAULT_TOL, SolverError

log = logging.getLogger("hkreg")

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER = 0, 1, 2


class ConfigError(ValueError):
    def __init__(self, message: str, line: Optional[int] = None):
        super().__init__(f"line {line}: {message}" if line is not None else message)
        self.line = line


@dataclass(frozen=True)
class RunConfig:
    problem: str = "B"
    nx: int = 49
    ny: int = 49
    mesh_pattern: str = "alternating"
    mesh_file: Optional[str] = None
    epsilon: float = DEFAULT_EPSILON
    alpha: float = 1e8
    c: Optional[float] = None
    p_s: Optional[int] = None
    variant: str = "compromise"
    cg_tol: float = DEFAULT_TOL
    max_iter: Optional[int] = None
    output_dir: str = "out"
    vtk: bool = True
    csv: bool = True
    pgm: bool = False
    pgm_resolution: int = 256

    @property
    def target(self) -> float:
        return self.c if self.c is not None else get_problem(self.problem).c

    def optimizer_config(self) -> OptimizerConfig:
        return OptimizerConfig(
            c=self.target,
            p_s=self.p_s,
            alpha=self.alpha,
            epsilon=self.epsilon,
            cg_tol=self.cg_tol,
            max_iter=self.max_iter,
            variant=self.variant,
        )


def _bool(text: str) -> bool:
    t = text.lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _pos_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise ValueError("must be a positive integer")
    return v


def _choice(options):
    def parse(text: str) -> str:
        if text not in options:
            raise ValueError(f"expected one of {', '.join(options)}")
        return text

    return parse


def _problem(text: str) -> str:
    return _choice(tuple(PROBLEMS))(text.upper())


def _range(lo, hi, lo_open=True, hi_open=True, cast=float):
    def parse(text: str):
        v = cast(text)
        if not np.isfinite(v):
            raise ValueError("must be finite")
        if lo is not None and (v <= lo if lo_open else v < lo):
            raise ValueError(f"out of range, must be {'>' if lo_open else '>='} {lo}")
        if hi is not None and (v >= hi if hi_open else v > hi):
            raise ValueError(f"out of range, must be {'<' if hi_open else '<='} {hi}")
        return v

    return parse


_PARSERS = {
    "problem": _problem,
    "nx": _pos_int,
    "ny": _pos_int,
    "mesh_pattern": _choice(PATTERNS),
    "mesh_file": str,
    "epsilon": _range(0.0, 1.0),
    "alpha": _range(0.0, None, lo_open=False),
    "c": _range(0.0, 1.0, hi_open=False),
    "p_s": _pos_int,
    "variant": _choice(VARIANTS),
    "cg_tol": _range(0.0, 1.0),
    "max_iter": _pos_int,
    "output_dir": str,
    "vtk": _bool,
    "csv": _bool,
    "pgm": _bool,
    "pgm_resolution": _pos_int,
}
assert set(_PARSERS) == {f.name for f in fields(RunConfig)}


def parse_config(text: str) -> RunConfig:
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {raw.strip()!r}", lineno)
        key, _, value = (s.strip() for s in line.partition("="))
        if key not in _PARSERS:
            raise ConfigError(f"unknown key {key!r}", lineno)
        if key in values:
            raise ConfigError(f"duplicate key {key!r}", lineno)
        if not value:
            raise ConfigError(f"missing value for {key!r}", lineno)
        try:
            values[key] = _PARSERS[key](value)
        except ValueError as exc:
            raise ConfigError(f"bad value for {key!r}: {exc}", lineno) from None
    return RunConfig(**values)


def load_config(path) -> RunConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    return parse_config(text)


def _mesh_for(cfg: RunConfig):
    from .mesh import build_structured_mesh, tag_boundary

    problem = get_problem(cfg.problem)
    if cfg.mesh_file:
        try:
            mesh = read_mesh(cfg.mesh_file)
        except (OSError, MeshError) as exc:
            raise ConfigError(str(exc)) from exc
        desc = f"file {cfg.mesh_file}"
    else:
        mesh = tag_boundary(build_structured_mesh(cfg.nx, cfg.ny, cfg.mesh_pattern), problem)
        desc = mesh_descriptor(cfg.nx, cfg.ny, cfg.mesh_pattern)
    return problem, mesh, desc


def _write_json(path: Path, obj) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="\n", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def cmd_run(cfg: RunConfig) -> int:
    problem, mesh, desc = _mesh_for(cfg)
    rm = refine_uniform(mesh)
    out = Path(cfg.output_dir)
    report, eta, history = run_benchmark(problem, cfg.nx, cfg.ny, cfg.mesh_pattern, cfg.optimizer_config(),
                                         levels=1, mesh=mesh, rm=rm)
    report.mesh = desc
    if cfg.csv:
        export.export_history(history, out / "history.csv")
    if cfg.vtk:
        u = discrete_state(mesh, eta, problem.f, tol=cfg.cg_tol).u
        export.export_field(mesh, eta, u, out / "design.vtk")
    if cfg.pgm:
        export.export_pgm(mesh, eta, out / "design.pgm", cfg.pgm_resolution)
    export.export_eta(eta, out / "design.eta", cfg.epsilon)
    _write_json(out / "report.json", dict(report.to_dict(), config=asdict(cfg)))
    print(f"problem {problem.id}, {desc}, {mesh.n_elements} elements, alpha={cfg.alpha:g}")
    print(f"F_hat = {report.F_hat:.6g} after {report.steps} steps (refined once: {report.refined_F_hat[1]:.6g})")
    return EXIT_OK


def cmd_sweep(cfg: RunConfig, alphas) -> int:
    problem, mesh, desc = _mesh_for(cfg)
    if cfg.mesh_file:
        raise ConfigError("sweep supports structured meshes only")
    reports = alpha_sweep(problem, cfg.nx, cfg.ny, cfg.mesh_pattern, alphas, cfg.optimizer_config())
    out = Path(cfg.output_dir)
    rows = ["alpha,F_hat,F_hat_refined,steps,error"]
    for r in reports:
        refined = r.refined_F_hat[1] if r.levels else float("nan")
        rows.append(f"{export.fmt(r.alpha)},{export.fmt(r.F_hat)},{export.fmt(refined)},{r.steps},{r.error or ''}")
        print(f"alpha={r.alpha:<10g} F_hat={r.F_hat:.6g} refined={refined:.6g}" + (f"  FAILED: {r.error}" if r.error else ""))
    if cfg.csv:
        export._write(out / "sweep.csv", rows)
    _write_json(out / "sweep.json", {"config": asdict(cfg), "reports": [r.to_dict() for r in reports]})
    return EXIT_OK if all(r.error is None for r in reports) else EXIT_SOLVER


def cmd_evaluate(cfg: RunConfig, eta_path, levels: int) -> int:
    problem, mesh, desc = _mesh_for(cfg)
    try:
        eta = export.read_eta(eta_path)
    except (OSError, ValueError) as exc:
        raise ConfigError(f"cannot read design {eta_path}: {exc}") from exc
    if eta.shape != (mesh.n_elements,):
        raise ConfigError(f"design has {eta.size} entries, mesh has {mesh.n_elements} elements")
    try:
        evals = multilevel_evaluate(MaterialDistribution(eta, cfg.epsilon), mesh, problem, levels, cfg.cg_tol)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    rows = ["level,n_elements,F_h,F_0,F_hat"]
    for lv in evals:
        rows.append(f"{lv.level},{lv.n_elements},{export.fmt(lv.F_h)},{export.fmt(lv.F_0)},{export.fmt(lv.F_hat)}")
        print(f"level {lv.level}: {lv.n_elements:7d} elements  F_hat = {lv.F_hat:.6g}")
    if cfg.csv:
        export._write(Path(cfg.output_dir) / "levels.csv", rows)
    return EXIT_OK


def _alpha_list(text: str):
    try:
        vals = [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad alpha list {text!r}") from None
    if not vals or any(v < 0 for v in vals):
        raise argparse.ArgumentTypeError("alphas must be a non-empty list of non-negative numbers")
    return vals


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="hkreg", description=__doc__.split("\n\n")[0].strip())
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="single greedy optimization")
    p.add_argument("config")
    p.add_argument("--output-dir")

    p = sub.add_parser("sweep", help="one optimization per regularization weight")
    p.add_argument("config")
    p.add_argument("--alphas", type=_alpha_list, required=True)
    p.add_argument("--output-dir")

    p = sub.add_parser("evaluate", help="evaluate a stored design on refined meshes")
    p.add_argument("config")
    p.add_argument("--eta", required=True)
    p.add_argument("--levels", type=int, default=1)
    p.add_argument("--output-dir")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = load_config(args.config)
        if args.output_dir:
            cfg = replace(cfg, output_dir=args.output_dir)
        if args.command == "run":
            return cmd_run(cfg)
        if args.command == "sweep":
            return cmd_sweep(cfg, args.alphas)
        return cmd_evaluate(cfg, args.eta, args.levels)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (OptimizationError, SolverError) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
