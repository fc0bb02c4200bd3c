"""``monoflow`` command line: run, sweep, check, oracle.

Configuration comes from a TOML file (``--config``) and/or flags; flags win.
Exit codes: 0 success, 1 configuration error, 2 numerical abort.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import operators as ops
from .dynamics import ConfigError, FieldSpec, normalize_variant
from .integrator import IntegrationError, IntegratorOpts, integrate, write_csv
from .oracle import OracleError, PathOracle, min_norm_zero
from .problems import get_problem
from .schedules import THEOREMS, ScheduleError, ScheduleSet, check_hypotheses, parse_schedule

try:  # Python 3.11+
    import tomllib
except ModuleNotFoundError:  # pragma: no cover
    import tomli as tomllib

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2

# which convergence result a variant's hypotheses come from
THEOREM_FOR_VARIANT = {
    "KM_reg": "main2",
    "KM_anchored": "main2",
    "FB_outer": "fb_out",
    "FB_inner": "th1_fb",
    "FBF_reg": "fbf_conv",
    "FBF_plain": None,
}
DEFAULT_HORIZON = {"sfp": 200.0, "vi": 400.0, "vi_paper_literal": 400.0}


@dataclass
class RunConfig:
    problem: str = "sfp"
    variant: str = "FB_inner"
    eps: str = "powerlaw(1, 0.5)"
    lam: str = "const(0.5)"
    gam: str = "const(0.15)"
    t0: float = 0.0
    t_end: float | None = None
    method: str = "rk45_adaptive"
    rtol: float = 1e-8
    atol: float = 1e-10
    step: float = 0.01
    sample_every: float | None = None
    x0: list[float] | None = None
    anchor: list[float] | None = None
    diagnostics: bool = True
    theorem: str | None = None
    probe_horizon: float = 1e8
    seed: int = 0
    csv: str = "trajectory.csv"
    json: str = "summary.json"
    # sweep grid: eps(t) = (1 + t)^-decay, decay 0 meaning no regularization
    decays: list[float] = field(default_factory=lambda: [0.0, 0.1, 0.5, 0.9])
    gammas: list[float] = field(default_factory=lambda: [0.2, 0.5])
    norm_tol: float = 0.1
    jobs: int = 1

    def to_toml(self) -> str:
        lines = []
        for f in dataclasses.fields(self):
            v = getattr(self, f.name)
            if v is None:
                continue
            lines.append(f"{f.name} = {_toml_value(v)}")
        return "\n".join(lines) + "\n"


def _toml_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, float)):
        return repr(v) if not isinstance(v, float) or math.isfinite(v) else ("inf" if v > 0 else "-inf")
    if isinstance(v, str):
        return json.dumps(v)
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_toml_value(x) for x in v) + "]"
    raise TypeError(f"cannot write {v!r} to TOML")


_FLOAT_KEYS = {"t0", "t_end", "rtol", "atol", "step", "sample_every", "probe_horizon", "norm_tol"}
_INT_KEYS = {"seed", "jobs"}
_LIST_KEYS = {"x0", "anchor", "decays", "gammas"}


def _coerce(key: str, value, errors: list[str]):
    try:
        if value is None:
            return None
        if key in _FLOAT_KEYS:
            return float(value)
        if key in _INT_KEYS:
            if isinstance(value, float) and not value.is_integer():
                raise ValueError
            return int(value)
        if key in _LIST_KEYS:
            if isinstance(value, str):
                value = [v for v in value.replace(";", ",").split(",") if v.strip()]
            return [float(v) for v in value]
        if key == "diagnostics":
            if isinstance(value, str):
                return value.lower() in ("1", "true", "yes", "on")
            return bool(value)
        return str(value)
    except (TypeError, ValueError):
        errors.append(f"bad value for {key}: {value!r}")
        return None


def load_config(path: str | None, overrides: dict, base: RunConfig | None = None) -> RunConfig:
    """``base`` (or the defaults), then the TOML file, then non-``None`` overrides."""
    errors: list[str] = []
    values: dict = dataclasses.asdict(base) if base is not None else {}
    names = {f.name for f in dataclasses.fields(RunConfig)}
    if path:
        try:
            with open(path, "rb") as fh:
                data = tomllib.load(fh)
        except (OSError, tomllib.TOMLDecodeError) as exc:
            raise ConfigError([f"cannot read config {path}: {exc}"]) from None
        sweep = data.pop("sweep", {})
        data.update(sweep if isinstance(sweep, dict) else {})
        for k, v in data.items():
            if k not in names:
                errors.append(f"unknown config key {k!r}")
            else:
                values[k] = _coerce(k, v, errors)
    for k, v in overrides.items():
        if v is not None:
            values[k] = _coerce(k, v, errors)
    if "MONOFLOW_SEED" in os.environ and overrides.get("seed") is None:
        values["seed"] = _coerce("seed", os.environ["MONOFLOW_SEED"], errors)
    if errors:
        raise ConfigError(errors)
    return RunConfig(**{k: v for k, v in values.items() if v is not None or k in ("t_end",)})


@dataclass
class Experiment:
    config: RunConfig
    problem: object
    spec: FieldSpec
    opts: IntegratorOpts
    x0: np.ndarray
    theorem: str | None


def build_experiment(cfg: RunConfig) -> Experiment:
    """Validate a config; every violated constraint is reported at once."""
    errors: list[str] = []
    problem = None
    try:
        problem = get_problem(cfg.problem)
    except ValueError as exc:
        errors.append(str(exc))
    sched = {}
    for key in ("eps", "lam", "gam"):
        try:
            sched[key] = parse_schedule(getattr(cfg, key))
        except ScheduleError as exc:
            errors.append(f"{key}: {exc}")
    variant = None
    try:
        variant = normalize_variant(cfg.variant)
    except ConfigError as exc:
        errors += exc.violations
    theorem = cfg.theorem if cfg.theorem is not None else THEOREM_FOR_VARIANT.get(variant)
    if theorem is not None and theorem not in THEOREMS:
        errors.append(f"unknown theorem {theorem!r}; expected one of {THEOREMS}")
    t_end = cfg.t_end if cfg.t_end is not None else DEFAULT_HORIZON.get(cfg.problem, 200.0)
    sample_every = cfg.sample_every if cfg.sample_every is not None else t_end / 2000.0
    opts = None
    try:
        opts = IntegratorOpts(cfg.method, cfg.t0, t_end, sample_every, cfg.step, cfg.rtol, cfg.atol)
    except ConfigError as exc:
        errors += exc.violations
    spec = x0 = None
    if problem is not None:
        x0 = np.array(cfg.x0, dtype=float) if cfg.x0 is not None else problem.x0
        if x0.size != problem.dim:
            errors.append(f"x0 has dimension {x0.size}, problem {problem.name} has {problem.dim}")
        if len(sched) == 3 and variant is not None:
            s = ScheduleSet(sched["eps"], sched["lam"], sched["gam"], problem.beta)
            kw = {}
            if variant in ("KM_reg", "KM_anchored"):
                if not sched["gam"].is_constant():
                    errors.append("KM variants use T = J_{gA}(Id - gB) and need a constant gamma")
                else:
                    g = float(sched["gam"](0.0))
                    if not 0 < g <= 2 * problem.beta:
                        errors.append(f"gamma={g:g} outside (0, 2beta] = (0, {2 * problem.beta:g}] "
                                      "so T is not nonexpansive")
                    kw["T"] = problem.forward_backward_map(g)
                if variant == "KM_anchored":
                    D = problem.C or ops.whole_space(problem.dim)
                    kw["domain_D"] = D
                    kw["anchor_y"] = (np.array(cfg.anchor, dtype=float) if cfg.anchor is not None
                                      else D.project(np.zeros(problem.dim)))
                    if x0.size == problem.dim and not D.contains(x0, 1e-9):
                        errors.append("KM_anchored needs x0 in D")
            else:
                kw.update(A=problem.A, B=problem.B)
            try:
                spec = FieldSpec(variant, s, dim=problem.dim, **kw)
            except ConfigError as exc:
                errors += exc.violations
            except ValueError as exc:
                errors.append(str(exc))
    if errors:
        raise ConfigError(errors)
    return Experiment(cfg, problem, spec, opts, x0, theorem)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def _write_json(data, path: str | None):
    text = json.dumps(_jsonable(data), indent=2, sort_keys=True)
    if path in (None, "-"):
        print(text)
    else:
        Path(path).write_text(text + "\n")


def _reference_zero(exp: Experiment):
    """Minimum-norm zero: the known one when shipped, else from the oracle path."""
    p = exp.problem
    if p.known_min_norm is not None:
        return p.known_min_norm, "known"
    est = min_norm_zero(p.A, p.B)
    return est.x_star, "oracle"


def execute_run(exp: Experiment) -> tuple[dict, int]:
    cfg, spec = exp.config, exp.spec
    oracle = None
    if cfg.diagnostics and spec.variant not in ("KM_reg", "KM_anchored", "FBF_plain") \
            and spec.B is not None:
        oracle = PathOracle(spec.A, spec.B)
    summary: dict = {"config": dataclasses.asdict(cfg), "csv": cfg.csv}
    code = EXIT_OK
    try:
        traj = integrate(spec, exp.x0, exp.opts, oracle=oracle)
        summary["status"] = "ok"
    except (IntegrationError, OracleError) as exc:
        traj = getattr(exc, "partial", None)
        summary["status"] = "aborted"
        summary["error"] = str(exc)
        summary["abort_report"] = getattr(exc, "report", {})
        code = EXIT_NUMERIC
    if traj is not None and len(traj):
        write_csv(traj, cfg.csv)
        summary.update(terminal_time=traj.times[-1], terminal_state=traj.final,
                       terminal_norm=traj.norm_x[-1], terminal_field_norm=traj.norm_f[-1],
                       warnings=traj.warnings, samples=len(traj))
    if cfg.diagnostics and code == EXIT_OK:
        p = exp.problem
        try:
            ref, source = _reference_zero(exp)
            summary["min_norm_zero"] = ref
            summary["min_norm_source"] = source
            summary["dist_to_min_norm"] = float(np.linalg.norm(traj.final - ref))
        except OracleError as exc:
            summary["min_norm_error"] = str(exc)
        summary["operator_checks"] = {
            c.name: {"passed": c.passed, "max_violation": c.max_violation}
            for c in (ops.check_lipschitz(p.B, seed=cfg.seed),
                      *([ops.check_cocoercive(p.B, p.beta, seed=cfg.seed)] if p.B.cocoercivity else []),
                      ops.check_firmly_nonexpansive(p.A, seed=cfg.seed))
        }
    if exp.theorem is not None:
        rep = check_hypotheses(exp.theorem, spec.schedules, cfg.probe_horizon, cfg.t0)
        summary["hypothesis_report"] = rep.to_dict()
    return summary, code


# ---------------------------------------------------------------------------
# sweep
# ---------------------------------------------------------------------------

SWEEP_COLUMNS = ("decay", "gamma", "terminal_norm", "time_to_tol", "amplitude_x1", "status")


def sweep_cell(cfg: RunConfig, decay: float, gamma: float) -> dict:
    """One grid cell: ``eps = (1 + t)^-decay`` (``0`` if ``decay == 0``), constant step ``gamma``."""
    eps = "const(0)" if decay == 0 else f"powerlaw(1, {decay!r})"
    cell = dataclasses.replace(cfg, eps=eps, gam=f"const({gamma!r})")
    row = {"decay": decay, "gamma": gamma, "terminal_norm": math.nan,
           "time_to_tol": math.nan, "amplitude_x1": math.nan, "status": "ok"}
    try:
        exp = build_experiment(cell)
        traj = integrate(exp.spec, exp.x0, exp.opts)
    except ConfigError as exc:
        row["status"] = "config error: " + "; ".join(exc.violations)
        return row
    except IntegrationError as exc:
        row["status"] = f"aborted: {exc}"
        traj = exc.partial
        if traj is None or not len(traj):
            return row
    row["terminal_norm"] = float(traj.norm_x[-1])
    row["time_to_tol"] = traj.time_to_norm(cfg.norm_tol)
    row["amplitude_x1"] = float(np.max(np.abs(traj.states[traj.tail(0.25), 0])))
    return row


def _cell_star(args):
    return sweep_cell(*args)


def execute_sweep(cfg: RunConfig) -> list[dict]:
    cells = [(cfg, float(d), float(g)) for d in cfg.decays for g in cfg.gammas]
    if not cells:
        return []
    if cfg.jobs > 1 and len(cells) > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            rows = list(pool.map(_cell_star, cells))
    else:
        rows = [sweep_cell(*c) for c in cells]
    return rows


def write_sweep_csv(rows, path_or_file):
    if isinstance(path_or_file, str):
        with open(path_or_file, "w", newline="") as fh:
            return write_sweep_csv(rows, fh)
    w = csv.writer(path_or_file, lineterminator="\n")
    w.writerow(SWEEP_COLUMNS)
    for r in rows:
        w.writerow([format(r[c], ".17g") if isinstance(r[c], float) else r[c] for c in SWEEP_COLUMNS])


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def _add_run_flags(p: argparse.ArgumentParser):
    p.add_argument("--config", help="TOML config file")
    p.add_argument("--problem", help="sfp | vi | vi_paper_literal | synthetic:<kind>(args)")
    p.add_argument("--variant", help="KM_reg | KM_anchored | FB_outer | FB_inner | FBF_reg | FBF_plain")
    p.add_argument("--eps", help='e.g. "powerlaw(1, 0.5)"')
    p.add_argument("--lam", help='e.g. "const(0.5)" or "coscap(0.2)"')
    p.add_argument("--gam", help='e.g. "const(0.15)"')
    p.add_argument("--t0", type=float)
    p.add_argument("--t-end", dest="t_end", type=float)
    p.add_argument("--method", choices=["rk4_fixed", "rk45_adaptive"])
    p.add_argument("--rtol", type=float)
    p.add_argument("--atol", type=float)
    p.add_argument("--step", type=float, help="fixed step for rk4_fixed")
    p.add_argument("--sample-every", dest="sample_every", type=float)
    p.add_argument("--x0", help="comma-separated start point")
    p.add_argument("--anchor", help="comma-separated anchor y for KM_anchored")
    p.add_argument("--diagnostics", dest="diagnostics", action="store_true", default=None)
    p.add_argument("--no-diagnostics", dest="diagnostics", action="store_false")
    p.add_argument("--theorem", help="theorem whose hypotheses are reported")
    p.add_argument("--probe-horizon", dest="probe_horizon", type=float)
    p.add_argument("--seed", type=int, help="sampling seed (default: MONOFLOW_SEED or 0)")
    p.add_argument("--csv", help="trajectory / table CSV path")
    p.add_argument("--json", help="JSON summary path ('-' for stdout)")
    p.add_argument("--dump-config", action="store_true", help="print the effective config as TOML and exit")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="monoflow", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="integrate one configured flow")
    _add_run_flags(run)

    sweep = sub.add_parser("sweep", help="grid over regularization decay and step size")
    _add_run_flags(sweep)
    sweep.add_argument("--decays", help="comma-separated decay exponents; 0 means no regularization")
    sweep.add_argument("--gammas", help="comma-separated constant step sizes")
    sweep.add_argument("--norm-tol", dest="norm_tol", type=float, help="threshold for time_to_tol")
    sweep.add_argument("--jobs", type=int, help="concurrent cells")

    check = sub.add_parser("check", help="evaluate a theorem's hypotheses")
    check.add_argument("theorem", choices=THEOREMS)
    check.add_argument("--eps", default="powerlaw(1, 0.5)")
    check.add_argument("--lam", default="const(1)")
    check.add_argument("--gam", default="const(0.1)")
    grp = check.add_mutually_exclusive_group()
    grp.add_argument("--beta", type=float, help="modulus of B")
    grp.add_argument("--problem", help="take beta from this problem")
    check.add_argument("--t0", type=float)
    check.add_argument("--probe-horizon", dest="probe_horizon", type=float, default=1e8)
    check.add_argument("--json", default="-")

    orc = sub.add_parser("oracle", help="regularization path as CSV")
    orc.add_argument("--problem", default="sfp")
    orc.add_argument("--eps-values", dest="eps_values", help="comma-separated eps list")
    orc.add_argument("--eps0", type=float, default=1.0)
    orc.add_argument("--decay", type=float, default=0.5)
    orc.add_argument("--n", type=int, default=12, help="path length when --eps-values is absent")
    orc.add_argument("--tol", type=float, default=1e-10)
    orc.add_argument("--csv", default="-")
    orc.add_argument("--min-norm", dest="min_norm", action="store_true",
                     help="also print the minimum-norm estimate as JSON on stderr")
    return parser


_RUN_KEYS = ("problem", "variant", "eps", "lam", "gam", "t0", "t_end", "method", "rtol", "atol", "step",
             "sample_every", "x0", "anchor", "diagnostics", "theorem", "probe_horizon", "seed", "csv", "json")
_SWEEP_KEYS = ("decays", "gammas", "norm_tol", "jobs")


def _err(msg_lines):
    for line in msg_lines:
        print(f"monoflow: error: {line}", file=sys.stderr)


def _config_from_args(args, base: RunConfig | None = None) -> RunConfig:
    overrides = {k: getattr(args, k, None) for k in _RUN_KEYS + _SWEEP_KEYS}
    return load_config(args.config, overrides, base)


SWEEP_BASE = RunConfig(problem="vi", variant="FBF_reg", lam="const(1)", csv="sweep.csv", json="sweep.json")


def cmd_run(args) -> int:
    try:
        cfg = _config_from_args(args)
        if args.dump_config:
            sys.stdout.write(cfg.to_toml())
            return EXIT_OK
        exp = build_experiment(cfg)
    except ConfigError as exc:
        _err(exc.violations)
        return EXIT_CONFIG
    summary, code = execute_run(exp)
    _write_json(summary, cfg.json)
    if code != EXIT_OK:
        _err([summary.get("error", "numerical abort")])
    return code


def cmd_sweep(args) -> int:
    try:
        cfg = _config_from_args(args, SWEEP_BASE)
        if args.dump_config:
            sys.stdout.write(cfg.to_toml())
            return EXIT_OK
        if cfg.jobs < 1:
            raise ConfigError([f"jobs must be >= 1, got {cfg.jobs}"])
        if cfg.decays and cfg.gammas:
            # validate the shared part of the config once, up front
            probe = dataclasses.replace(cfg, eps="powerlaw(1, 0.5)", gam=f"const({cfg.gammas[0]!r})")
            build_experiment(probe)
    except ConfigError as exc:
        _err(exc.violations)
        return EXIT_CONFIG
    rows = execute_sweep(cfg)
    write_sweep_csv(rows, sys.stdout if cfg.csv == "-" else cfg.csv)
    if cfg.json:
        _write_json({"config": dataclasses.asdict(cfg), "rows": rows}, cfg.json)
    return EXIT_OK


def cmd_check(args) -> int:
    try:
        beta = args.beta
        if args.problem is not None:
            beta = get_problem(args.problem).beta
        if beta is None:
            beta = 1.0
        s = ScheduleSet(parse_schedule(args.eps), parse_schedule(args.lam), parse_schedule(args.gam), beta)
        rep = check_hypotheses(args.theorem, s, args.probe_horizon, args.t0)
    except (ScheduleError, ValueError) as exc:
        _err([str(exc)])
        return EXIT_CONFIG
    _write_json(rep.to_dict(), args.json)
    return EXIT_OK


def cmd_oracle(args) -> int:
    try:
        p = get_problem(args.problem)
        if args.eps_values:
            eps_values = [float(v) for v in args.eps_values.split(",") if v.strip()]
        else:
            eps_values = [args.eps0 * args.decay ** k for k in range(args.n)]
        if not eps_values or min(eps_values) <= 0:
            raise ValueError("eps values must be positive")
    except ValueError as exc:
        _err([str(exc)])
        return EXIT_CONFIG
    oracle = PathOracle(p.A, p.B, args.tol)
    try:
        pts = oracle.path(eps_values)
    except OracleError as exc:
        _err([str(exc)])
        return EXIT_NUMERIC
    out = sys.stdout if args.csv == "-" else open(args.csv, "w", newline="")
    try:
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["eps"] + [f"x_{i + 1}" for i in range(p.dim)] + ["iterations", "residual"])
        for pt in pts:
            w.writerow([format(pt.eps, ".17g"), *(format(v, ".17g") for v in pt.x_eps),
                        pt.iterations, format(float(pt.residual), ".17g")])
    finally:
        if out is not sys.stdout:
            out.close()
    if args.min_norm:
        try:
            est = min_norm_zero(p.A, p.B)
        except OracleError as exc:
            _err([str(exc)])
            return EXIT_NUMERIC
        print(json.dumps(_jsonable({"x_star": est.x_star, "gap": est.extrapolation_gap,
                                    "eps_last": est.eps_sequence[-1]})), file=sys.stderr)
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handler = {"run": cmd_run, "sweep": cmd_sweep, "check": cmd_check, "oracle": cmd_oracle}[args.command]
    return handler(args)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
