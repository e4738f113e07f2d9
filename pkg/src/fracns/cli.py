"""Command line front end, config parsing and run reports.

    fracns <mode> --config <path> [--out <dir>] [--seed <int>]
    fracns verify [--fast] [--out <dir>]

Configs are JSON and are validated against ``CONFIG_SCHEMA`` before any
computation. Every run writes ``report.json``; successful runs also write
``fields.csv`` and, in continue mode, ``branch.csv``. Field files are
written to temporaries and renamed into place only after the whole run
succeeded, so a failed run never leaves half-written data behind.
"""

import argparse
import json
import logging
import math
import os
import sys
import tempfile
import time
from dataclasses import asdict, dataclass, field, fields

import jsonschema
import numpy as np

from . import grid as _g
from .exceptions import (
    FracNSError,
    InvalidExponents,
    InvalidGrid,
    InvalidParams,
    SchemaError,
    ValidityError,
)
from .functionals import ProblemParams, validity_bound
from .scalar import solve_scalar
from .solvers import SolveConfig
from .system import continue_bound, solve_ground
from .thresholds import (
    check_condition_H,
    default_lambda_candidates,
    gamma_matrix,
    lambda_bounds,
)
from .verification import run_checks

logger = logging.getLogger(__name__)

SCHEMA_VERSION = "1.0"
MODES = ("scalar", "system", "continue", "thresholds", "verify")
DEFAULT_OUT = "fracns-output"

_number = {"type": "number"}
_pos = {"type": "number", "exclusiveMinimum": 0}
_vector = {"type": "array", "items": _pos, "minItems": 1}
_matrix = {"type": "array", "items": {"type": "array", "items": _number}}

CONFIG_SCHEMA = {
    "$schema": "http://json-schema.org/draft-07/schema#",
    "type": "object",
    "additionalProperties": False,
    "required": ["mode"],
    "properties": {
        "mode": {"enum": list(MODES)},
        "s": _pos,
        "p": _number,
        "N": {"type": "integer", "minimum": 1},
        "lambda": _vector,
        "mu": _vector,
        "beta": {"oneOf": [_number, _matrix]},
        "b": _matrix,
        "eps_list": {"type": "array", "items": _number, "minItems": 1},
        "lambda_candidates": {"type": "array", "items": _pos, "minItems": 1},
        "grid": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "L": _pos,
                "n": {"type": "integer", "minimum": 8},
                "dealias": {"type": "boolean"},
            },
        },
        "solver": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "tol_dual_residual": _pos,
                "tol_gradient": _pos,
                "max_iterations": {"type": "integer", "minimum": 1},
                "step": _pos,
                "backtracking": {"type": "boolean"},
                "starts": {
                    "type": "array",
                    "minItems": 1,
                    "items": {"enum": ["coupled_bump", "semi_trivial_perturbed"]},
                },
                "rng_seed": {"type": "integer", "minimum": 0},
                "newton_trigger": _pos,
                "newton_max_steps": {"type": "integer", "minimum": 1},
                "linear_max_iter": {"type": "integer", "minimum": 1},
                "linear_rtol": _pos,
                "tol_zero": _pos,
                "perturbation": _pos,
            },
        },
        "fast": {"type": "boolean"},
        "output_dir": {"type": "string"},
    },
    "allOf": [
        {
            "if": {"properties": {"mode": {"not": {"const": "verify"}}}},
            "then": {"required": ["s", "p", "N", "lambda", "mu"]},
        },
        {
            "if": {"properties": {"mode": {"const": "continue"}}},
            "then": {"required": ["eps_list"]},
        },
    ],
}

_VALIDATOR = jsonschema.Draft7Validator(CONFIG_SCHEMA)


@dataclass(frozen=True, eq=False)
class RunConfig:
    """Validated run description. ``to_dict`` gives the normalised JSON form."""

    mode: str
    params: ProblemParams = None
    grid_length: float = None
    grid_points: int = None
    dealias: bool = False
    solver: SolveConfig = field(default_factory=SolveConfig)
    b: np.ndarray = None
    eps_list: tuple = None
    lambda_candidates: tuple = None
    fast: bool = False
    output_dir: str = None

    def make_grid(self):
        return _g.make_grid(self.params.dim, self.grid_length, self.grid_points,
                            self.params.s, self.dealias)

    def with_seed(self, seed):
        return _replace(self, solver=self.solver.replace(rng_seed=int(seed)))

    def to_dict(self):
        out = {"mode": self.mode}
        if self.mode == "verify":
            out["fast"] = self.fast
        else:
            pr = self.params
            out.update(s=pr.s, p=pr.p, N=pr.dim, **{"lambda": pr.lam.tolist()}, mu=pr.mu.tolist(),
                       beta=pr.beta.tolist(),
                       grid={"L": self.grid_length, "n": self.grid_points, "dealias": self.dealias})
            sol = asdict(self.solver)
            sol["starts"] = list(sol["starts"])
            out["solver"] = sol
            if self.b is not None:
                out["b"] = self.b.tolist()
            if self.eps_list is not None:
                out["eps_list"] = list(self.eps_list)
            if self.lambda_candidates is not None:
                out["lambda_candidates"] = list(self.lambda_candidates)
        if self.output_dir is not None:
            out["output_dir"] = self.output_dir
        return out


def _replace(cfg, **changes):
    kw = {f.name: getattr(cfg, f.name) for f in fields(cfg)}
    kw.update(changes)
    return RunConfig(**kw)


def _path(err):
    return ".".join(str(p) for p in err.absolute_path)


def _symmetric_matrix(value, m, name):
    arr = np.asarray(value, dtype=float)
    if arr.shape != (m, m):
        raise SchemaError(f"expected a {m}x{m} matrix, got shape {arr.shape}", name)
    if not np.array_equal(arr, arr.T):
        raise SchemaError("matrix must be symmetric", name)
    if np.any(np.diag(arr) != 0):
        raise SchemaError("matrix must have a zero diagonal", name)
    return arr


def parse_config(text):
    """Validate JSON config text (bytes or str) and return a :class:`RunConfig`.

    Raises
    ------
    SchemaError
        Malformed JSON, unknown keys, wrong types or an asymmetric coupling
        matrix; ``path`` names the offending field.
    ValidityError
        Exponents violating ``s > (p-1)N/(2p)``, or other out-of-range values.
    """
    if isinstance(text, bytes):
        try:
            text = text.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise SchemaError(f"config is not UTF-8: {exc}") from exc
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"invalid JSON: {exc}") from exc
    err = jsonschema.exceptions.best_match(_VALIDATOR.iter_errors(raw))
    if err is not None:
        raise SchemaError(err.message, _path(err))

    mode = raw["mode"]
    if mode == "verify":
        return RunConfig(mode=mode, fast=raw.get("fast", False), output_dir=raw.get("output_dir"))

    s, p, dim = raw["s"], raw["p"], raw["N"]
    lam, mu = raw["lambda"], raw["mu"]
    m = len(lam)
    if len(mu) != m:
        raise SchemaError(f"expected {m} entries to match lambda", "mu")
    bound = validity_bound(p, dim) if p > 0 else float("nan")
    if not s > bound:
        raise ValidityError(f"s={s} violates s > (p-1)N/(2p): requires s > {bound:.6g}")
    if dim == 3:
        raise ValidityError("N=3 is valid for the theory but grids support N in {1, 2} only")

    beta = raw.get("beta", 0.0)
    if isinstance(beta, list):
        beta = _symmetric_matrix(beta, m, "beta")
    elif m != 2:
        if beta != 0:
            raise SchemaError("a scalar beta needs exactly two components", "beta")
        beta = None
    b = _symmetric_matrix(raw["b"], m, "b") if "b" in raw else None
    try:
        params = ProblemParams(s, p, dim, lam, mu, beta)
    except InvalidExponents as exc:
        raise ValidityError(str(exc)) from exc
    except InvalidParams as exc:
        raise ValidityError(str(exc)) from exc

    g = raw.get("grid", {})
    length = float(g.get("L", 40.0 if dim == 1 else 20.0))
    points = int(g.get("n", 2048 if dim == 1 else 128))
    try:
        _g.make_grid(dim, length, points, s, g.get("dealias", False))
    except InvalidGrid as exc:
        raise SchemaError(str(exc), "grid") from exc
    try:
        solver = SolveConfig(**raw.get("solver", {}))
    except ValueError as exc:
        raise SchemaError(str(exc), "solver") from exc

    eps = raw.get("eps_list")
    if eps is not None and any(abs(a) > abs(c) for a, c in zip(eps, eps[1:])):
        raise SchemaError("eps values must be sorted by |eps| ascending", "eps_list")
    cands = raw.get("lambda_candidates")
    return RunConfig(
        mode=mode,
        params=params,
        grid_length=length,
        grid_points=points,
        dealias=bool(g.get("dealias", False)),
        solver=solver,
        b=b,
        eps_list=tuple(float(e) for e in eps) if eps is not None else None,
        lambda_candidates=tuple(float(c) for c in cands) if cands is not None else None,
        output_dir=raw.get("output_dir"),
    )


def _jsonable(obj):
    """numpy to plain Python; non-finite floats become null (JSON has no NaN)."""
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, np.generic):
        obj = obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    return obj


@dataclass
class RunReport:
    mode: str
    config: dict
    status: str = "ok"
    exit_code: int = 0
    results: list = field(default_factory=list)
    error: dict = None
    wall_clock_seconds: float = 0.0
    artifacts: dict = field(default_factory=dict)
    schema_version: str = SCHEMA_VERSION

    def to_dict(self):
        return _jsonable(asdict(self))

    def to_json(self):
        # Python floats serialise with their shortest round-trip repr, so reading back is bit-exact
        return json.dumps(self.to_dict(), indent=2, allow_nan=False) + "\n"

    @classmethod
    def from_json(cls, text):
        data = json.loads(text)
        return cls(**data)


# --- mode runners; each returns (results, {filename: bytes}) ---------------

def _fields_csv(grid, columns):
    coords = [c.ravel() for c in np.meshgrid(*([grid.axis] * grid.dim), indexing="ij")]
    names = ["x", "y"][: grid.dim] + [f"u_{j + 1}" for j in range(len(columns))]
    table = np.column_stack(coords + [np.asarray(c).ravel() for c in columns])
    return _csv(names, table)


def _csv(header, table):
    lines = [",".join(header)]
    lines += [",".join(repr(float(v)) for v in row) for row in table]
    return ("\n".join(lines) + "\n").encode("ascii")


def _run_scalar(cfg):
    grid = cfg.make_grid()
    pr = cfg.params
    results, cols = [], []
    for j in range(pr.m):
        r = solve_scalar(pr.s, pr.p, pr.lam[j], pr.mu[j], grid, cfg.solver)
        cols.append(r.profile)
        results.append({
            "kind": "scalar", "component": j + 1, "lambda": r.lam, "mu": r.mu,
            "phi": r.energy, "norm_sq": r.norm_sq,
            "psi": r.norm_sq - r.mu * _g.integrate(r.grid, np.abs(r.profile) ** (2 * r.p)),
            "dual_residual": r.residual_dual_norm, "c_lambda": r.c_lambda,
            "center_value": r.center_value, "iterations": r.iterations, "tail_mass": r.tail_mass,
        })
    return results, {"fields.csv": _fields_csv(grid, cols)}


def _system_entry(r):
    return {
        "kind": "system", "phi": r.phi, "psi": r.psi, "norm_sq": r.norm_sq,
        "omega": r.lagrange_multiplier_estimate, "dual_residual": r.dual_residual,
        "classification": r.classification, "per_component_min": r.per_component_min,
        "per_component_linf": r.per_component_linf, "start_used": r.start_used,
        "iterations": r.iterations, "tail_mass": r.tail_mass, "eps": r.eps,
        "distance_to_z": r.distance_to_z,
    }


def _run_system(cfg):
    r = solve_ground(cfg.params, cfg.make_grid(), cfg.solver)
    return [_system_entry(r)], {"fields.csv": _fields_csv(r.grid, list(r.state))}


def _run_continue(cfg):
    m = cfg.params.m
    b = cfg.b if cfg.b is not None else np.ones((m, m)) - np.eye(m)
    branch = continue_bound(cfg.params, b, cfg.eps_list, cfg.make_grid(), cfg.solver)
    rows = [[r.eps, r.phi, r.distance_to_z, float(r.per_component_min.min())] for r in branch]
    files = {
        "fields.csv": _fields_csv(branch[-1].grid, list(branch[-1].state)),
        "branch.csv": _csv(["eps", "phi", "distance_to_z", "min_component"], rows),
    }
    return [_system_entry(r) for r in branch], files


def _run_thresholds(cfg):
    pr = cfg.params
    grid = cfg.make_grid()
    base = solve_scalar(pr.s, pr.p, 1.0, 1.0, grid, cfg.solver)
    cands = cfg.lambda_candidates or default_lambda_candidates()
    rep = check_condition_H(pr, cands, base)
    scal = [solve_scalar(pr.s, pr.p, pr.lam[j], pr.mu[j], grid, cfg.solver) for j in range(pr.m)]
    profiles = [r.profile for r in scal]
    if pr.p == 2 and pr.m >= 2:
        rep.gamma_sq = gamma_matrix(pr, profiles, base.grid)
        if pr.m == 2:
            rep.Lambda, rep.LambdaPrime = lambda_bounds(pr, profiles, base.grid)
    entry = {
        "kind": "thresholds", "gamma_sq": rep.gamma_sq, "Lambda": rep.Lambda,
        "LambdaPrime": rep.LambdaPrime, "theta": rep.theta, "c1": rep.c1,
        "c_lambda": [r.c_lambda for r in scal], "scalar_energy": [r.energy for r in scal],
        "H_lhs": rep.H_lhs, "H_rhs": rep.H_rhs, "H_holds": rep.H_holds,
        "lambda_used": rep.lambda_used, "candidates": rep.candidates,
        "lhs_values": rep.lhs_values, "rhs_values": rep.rhs_values,
        "tail_mass": [r.tail_mass for r in scal],
    }
    return [entry], {"fields.csv": _fields_csv(base.grid, profiles)}


def _run_verify(cfg):
    checks = run_checks(fast=cfg.fast)
    results = [{"kind": "check", **asdict(c)} for c in checks]
    passed = sum(c.passed for c in checks)
    results.append({"kind": "summary", "passed": passed, "failed": len(checks) - passed})
    return results, {}


_RUNNERS = {
    "scalar": _run_scalar,
    "system": _run_system,
    "continue": _run_continue,
    "thresholds": _run_thresholds,
    "verify": _run_verify,
}


def _error_entry(exc):
    entry = {"type": type(exc).__name__, "message": str(exc),
             "exit_code": getattr(exc, "exit_code", 1)}
    if isinstance(exc, SchemaError):
        entry["path"] = exc.path
    if getattr(exc, "partial", None):
        entry["partial_results"] = [_system_entry(r) for r in exc.partial]
        entry["eps"] = exc.eps
    return _jsonable(entry)


def _write_atomic(directory, name, data):
    fd, tmp = tempfile.mkstemp(prefix=f".{name}.", dir=directory)
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, os.path.join(directory, name))
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _finish(report, files, out_dir):
    if out_dir is None:
        return report
    os.makedirs(out_dir, exist_ok=True)
    if report.status != "ok":
        # stale artifacts from an earlier run would contradict this report
        for name in ("fields.csv", "branch.csv"):
            path = os.path.join(out_dir, name)
            if os.path.exists(path):
                os.unlink(path)
    for name, data in files.items():
        _write_atomic(out_dir, name, data)
        report.artifacts[name] = os.path.join(out_dir, name)
    report.artifacts["report.json"] = os.path.join(out_dir, "report.json")
    _write_atomic(out_dir, "report.json", report.to_json().encode("utf-8"))
    return report


def run(config, out_dir=None):
    """Execute ``config`` and write its artifacts to ``out_dir`` (or ``config.output_dir``).

    Solver failures are caught and recorded in the report (``status``,
    ``exit_code`` and ``error``) instead of propagating; no field files are
    written for a failed run. Pass ``out_dir=False`` to skip all writes.
    """
    if out_dir is None:
        out_dir = config.output_dir or DEFAULT_OUT
    target = out_dir or None
    report = RunReport(mode=config.mode, config=config.to_dict())
    t0 = time.perf_counter()
    files = {}
    try:
        results, files = _RUNNERS[config.mode](config)
        report.results = _jsonable(results)
    except FracNSError as exc:
        logger.error("%s run failed: %s", config.mode, exc)
        report.status, report.exit_code, report.error = "error", exc.exit_code, _error_entry(exc)
        files = {}
    report.wall_clock_seconds = time.perf_counter() - t0
    if config.mode == "verify" and report.status == "ok" and report.results[-1]["failed"]:
        report.status, report.exit_code = "failed", 1
    return _finish(report, files, target)


def _build_parser():
    ap = argparse.ArgumentParser(prog="fracns", description="Coupled fractional NLS solvers")
    ap.add_argument("-v", "--verbose", action="count", default=0)
    sub = ap.add_subparsers(dest="mode", required=True)
    for mode in MODES[:-1]:
        sp = sub.add_parser(mode)
        sp.add_argument("--config", required=True, help="JSON config file")
        sp.add_argument("--out", help="output directory (overrides output_dir)")
        sp.add_argument("--seed", type=int, help="override solver.rng_seed")
    vp = sub.add_parser("verify", help="run the bundled invariant checks")
    vp.add_argument("--fast", action="store_true")
    vp.add_argument("--out", help="also write report.json here")
    return ap


def _fail_early(exc, out_dir, mode):
    report = RunReport(mode=mode, config={}, status="error", exit_code=exc.exit_code,
                       error=_error_entry(exc))
    print(f"fracns: error: {exc}", file=sys.stderr)
    _finish(report, {}, out_dir)
    return exc.exit_code


def main(argv=None):
    args = _build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    if args.mode == "verify":
        report = run(RunConfig(mode="verify", fast=args.fast), out_dir=args.out or False)
        for res in report.results[:-1]:
            print(f"{'PASS' if res['passed'] else 'FAIL'}  {res['name']}: {res['detail']}")
        summ = report.results[-1]
        print(f"{summ['passed']} passed, {summ['failed']} failed")
        return report.exit_code

    try:
        with open(args.config, "rb") as fh:
            text = fh.read()
    except OSError as exc:
        return _fail_early(SchemaError(f"cannot read config: {exc}"), args.out, args.mode)
    try:
        cfg = parse_config(text)
        if cfg.mode != args.mode:
            raise SchemaError(f"config is for mode {cfg.mode!r}, not {args.mode!r}", "mode")
    except (SchemaError, ValidityError) as exc:
        return _fail_early(exc, args.out, args.mode)
    if args.seed is not None:
        cfg = cfg.with_seed(args.seed)
    report = run(cfg, out_dir=args.out)
    if report.status != "ok":
        print(f"fracns: error: {report.error['message']}", file=sys.stderr)
    else:
        print(f"fracns: {cfg.mode} finished in {report.wall_clock_seconds:.2f} s; "
              f"wrote {', '.join(sorted(report.artifacts))}")
    return report.exit_code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
