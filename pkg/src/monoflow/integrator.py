"""Integration of the vector fields into sampled trajectories.

Two explicit Runge-Kutta schemes: classical RK4 with a fixed step and the
Dormand-Prince 5(4) pair with step-size control on the Euclidean norm of the
embedded error estimate (``||err|| <= rtol ||x|| + atol``).  Steps are
shortened to land exactly on the sample grid, so no dense output is needed.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import PchipInterpolator

from .dynamics import FieldSpec, evaluate, regularization_strength
from .schedules import Schedule, custom, inverse_time_map, tau1_many, tau2

METHODS = ("rk4_fixed", "rk45_adaptive")
MIN_STEP = 1e-12


class IntegrationError(RuntimeError):
    """Numerical abort; ``partial`` holds the trajectory up to the failure."""

    def __init__(self, message, partial: "Trajectory | None" = None, report: dict | None = None):
        super().__init__(message)
        self.partial = partial
        self.report = report or {}


@dataclass(frozen=True)
class IntegratorOpts:
    method: str = "rk45_adaptive"
    t0: float = 0.0
    t_end: float = 1.0
    sample_every: float | None = None
    step: float = 1e-2
    rtol: float = 1e-8
    atol: float = 1e-10
    max_steps: int = 10_000_000

    def __post_init__(self):
        bad = []
        if self.method not in METHODS:
            bad.append(f"method must be one of {METHODS}, got {self.method!r}")
        if not (0 <= self.t0 < self.t_end and math.isfinite(self.t_end)):
            bad.append(f"need 0 <= t0 < t_end, got t0={self.t0:g}, t_end={self.t_end:g}")
        if not (self.rtol > 0 and self.atol > 0):
            bad.append("tolerances must be positive")
        if not self.step > 0:
            bad.append("step must be positive")
        if self.sample_every is not None and not self.sample_every > 0:
            bad.append("sample_every must be positive")
        if bad:
            from .dynamics import ConfigError
            raise ConfigError(bad)

    def sample_grid(self) -> np.ndarray:
        span = self.t_end - self.t0
        h = self.sample_every if self.sample_every is not None else span / 1000.0
        n = int(math.floor(span / h + 1e-9))
        grid = self.t0 + h * np.arange(n + 1)
        if self.t_end - grid[-1] > 1e-9 * max(1.0, self.t_end):
            grid = np.append(grid, self.t_end)
        else:
            grid[-1] = self.t_end
        return grid


@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray
    norm_x: np.ndarray
    norm_f: np.ndarray
    dist_reg_zero: np.ndarray | None = None
    theta: np.ndarray | None = None
    warnings: list[str] = field(default_factory=list)
    truncated: bool = False
    stats: dict = field(default_factory=dict)

    @property
    def dim(self) -> int:
        return self.states.shape[1]

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]

    def __len__(self):
        return len(self.times)

    def time_to_norm(self, threshold: float) -> float:
        """First sample time with ``||x|| <= threshold`` (``inf`` if never)."""
        hit = np.nonzero(self.norm_x <= threshold)[0]
        return float(self.times[hit[0]]) if hit.size else math.inf

    def tail(self, fraction: float) -> slice:
        start = self.times[0] + (1 - fraction) * (self.times[-1] - self.times[0])
        return slice(int(np.searchsorted(self.times, start)), None)


# ---------------------------------------------------------------------------
# steppers
# ---------------------------------------------------------------------------

# Dormand-Prince 5(4) tableau
_C = np.array([0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1, 1])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_B5 = np.array([35 / 384, 0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0])
_B4 = np.array([5179 / 57600, 0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])
_E = _B5 - _B4


def _dopri_step(f, t, x, h, k1):
    k = [k1]
    for i in range(1, 7):
        xi = x + h * sum(a * kj for a, kj in zip(_A[i], k) if a != 0)
        k.append(f(t + _C[i] * h, xi))
    x_new = x + h * sum(b * kj for b, kj in zip(_B5, k) if b != 0)
    err = h * sum(e * kj for e, kj in zip(_E, k) if e != 0)
    return x_new, err, k[6]


def _rk4_step(f, t, x, h):
    k1 = f(t, x)
    k2 = f(t + h / 2, x + h / 2 * k1)
    k3 = f(t + h / 2, x + h / 2 * k2)
    k4 = f(t + h, x + h * k3)
    return x + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)


def _initial_step(f, t0, x0, f0, rtol, atol, span):
    scale = atol + rtol * np.linalg.norm(x0)
    d0, d1 = np.linalg.norm(x0) / scale, np.linalg.norm(f0) / scale
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    h0 = min(h0, span)
    f1 = f(t0 + h0, x0 + h0 * f0)
    d2 = np.linalg.norm(f1 - f0) / scale / h0
    h1 = max(1e-6, h0 * 1e-3) if max(d1, d2) <= 1e-15 else (0.01 / max(d1, d2)) ** 0.2
    return min(100 * h0, h1, span)


def _solve(f, x0, opts: IntegratorOpts, grid: np.ndarray):
    """Yield ``(index, state)`` for every grid point reached."""
    x = np.array(x0, dtype=float)
    t = grid[0]
    yield 0, x.copy()
    n_steps = n_rej = 0
    if opts.method == "rk4_fixed":
        for i in range(1, len(grid)):
            target = grid[i]
            n_sub = max(1, int(math.ceil((target - t) / opts.step - 1e-9)))
            h = (target - t) / n_sub
            for j in range(n_sub):
                x = _rk4_step(f, t + j * h, x, h)
                n_steps += 1
            t = target
            if not np.all(np.isfinite(x)):
                raise _Abort("non-finite state", t, i, {"steps": n_steps})
            yield i, x.copy()
        return
    k1 = f(t, x)
    if not np.all(np.isfinite(k1)):
        raise _Abort(f"non-finite field value at t={t:.6g}", t, 1, {"steps": 0})
    h = _initial_step(f, t, x, k1, opts.rtol, opts.atol, grid[-1] - t)
    i = 1
    while i < len(grid):
        target = grid[i]
        h_try = min(h, target - t)
        landing = h_try >= target - t
        if h_try < MIN_STEP * max(1.0, abs(t)) and not landing:
            raise _Abort(f"step size underflow (h={h_try:.3g}) at t={t:.6g}", t, i,
                         {"steps": n_steps, "rejected": n_rej, "last_step": h_try,
                          "field_norm": float(np.linalg.norm(k1))})
        x_new, err, k7 = _dopri_step(f, t, x, h_try, k1)
        if not (np.all(np.isfinite(x_new)) and np.all(np.isfinite(k7))):
            n_rej += 1
            h = h_try / 10
            if not h >= MIN_STEP:
                raise _Abort("non-finite state", t, i, {"steps": n_steps, "rejected": n_rej})
            continue
        scale = opts.atol + opts.rtol * max(np.linalg.norm(x), np.linalg.norm(x_new))
        ratio = np.linalg.norm(err) / scale
        if ratio <= 1.0:
            t = target if landing else t + h_try
            x, k1 = x_new, k7
            n_steps += 1
            if n_steps > opts.max_steps:
                raise _Abort("step budget exhausted", t, i, {"steps": n_steps, "rejected": n_rej})
            fac = 5.0 if ratio == 0 else min(5.0, max(0.2, 0.9 * ratio ** -0.2))
            # a step shortened to land on the grid says little about the next one
            h = max(h, h_try * fac) if landing else h_try * fac
            if landing:
                yield i, x.copy()
                i += 1
        else:
            n_rej += 1
            h = h_try * max(0.2, 0.9 * ratio ** -0.2)


class _Abort(Exception):
    def __init__(self, msg, t, index, report):
        super().__init__(msg)
        self.t, self.index, self.report = t, index, report


def integrate(field_or_spec, x0, opts: IntegratorOpts, oracle=None) -> Trajectory:
    """Integrate ``x' = f(t, x)`` from ``x0`` and sample on ``opts.sample_grid()``.

    ``field_or_spec`` is a :class:`FieldSpec` or a plain callable ``f(t, x)``.
    With an ``oracle`` (anything with ``x_eps(eps)``) and a spec, each sample
    also records the distance to the regularized zero and ``theta``.
    Raises :class:`IntegrationError` carrying the partial trajectory on step
    underflow or a non-finite state.
    """
    x0 = np.asarray(x0, dtype=float)
    if x0.ndim != 1 or not np.all(np.isfinite(x0)):
        raise ValueError("x0 must be a finite vector")
    spec = field_or_spec if isinstance(field_or_spec, FieldSpec) else None
    if spec is not None:
        if spec.dim is not None and spec.dim != x0.size:
            raise ValueError(f"x0 has dimension {x0.size}, field expects {spec.dim}")
        if spec.variant == "KM_anchored" and spec.domain_D is not None \
                and not spec.domain_D.contains(x0, 1e-9):
            raise ValueError("KM_anchored needs x0 in D")
        f = spec.__call__
    else:
        f = field_or_spec
    grid = opts.sample_grid()
    states = []
    try:
        for _, x in _solve(f, x0, opts, grid):
            states.append(x)
    except _Abort as exc:
        partial = _assemble(field_or_spec, grid[:len(states)], states, oracle)
        partial.truncated = True
        report = dict(exc.report, t_fail=exc.t, method=opts.method)
        partial.stats = report
        raise IntegrationError(str(exc), partial, report) from None
    traj = _assemble(field_or_spec, grid, states, oracle)
    return traj


def _assemble(field_or_spec, times, states, oracle) -> Trajectory:
    times = np.asarray(times, dtype=float)
    states = np.array(states, dtype=float).reshape(len(times), -1)
    spec = field_or_spec if isinstance(field_or_spec, FieldSpec) else None
    norm_f = np.empty(len(times))
    warns: dict[str, str] = {}  # first occurrence per kind of violation
    for k, (t, x) in enumerate(zip(times, states)):
        if spec is not None:
            val = evaluate(spec, t, x, check=True)
            norm_f[k] = np.linalg.norm(val.f)
            for w in val.warnings:
                warns.setdefault(w.split("(")[0], w)
        else:
            norm_f[k] = np.linalg.norm(field_or_spec(t, x))
    traj = Trajectory(times, states, np.linalg.norm(states, axis=1), norm_f,
                      warnings=list(warns.values()))
    if oracle is not None and spec is not None and len(times):
        dist = np.full(len(times), np.nan)
        for k, (t, x) in enumerate(zip(times, states)):
            eps = regularization_strength(spec, t)
            if eps > 0:
                dist[k] = np.linalg.norm(x - oracle.x_eps(eps))
        traj.dist_reg_zero = dist
        traj.theta = 0.5 * dist ** 2
    return traj


# ---------------------------------------------------------------------------
# time rescaling
# ---------------------------------------------------------------------------

def rescale_trajectory(traj: Trajectory, lam: Schedule, grid=None) -> Trajectory:
    """``u(s) = x(tau1(s))`` with ``tau1`` the inverse of ``int_0^t lam``.

    Samples of ``x`` are interpolated with a monotone cubic.  ``grid`` defaults
    to ``len(traj)`` uniform points on ``[0, tau2(T)]``; points whose preimage
    lies beyond the trajectory are dropped and the result is flagged truncated.
    """
    if abs(traj.times[0]) > 1e-12:
        raise ValueError("rescaling needs a trajectory starting at t = 0")
    T = float(traj.times[-1])
    if grid is None:
        grid = np.linspace(0.0, tau2(lam, T), len(traj))
    grid = np.asarray(grid, dtype=float)
    pre = tau1_many(lam, grid, traj.times)
    keep = np.isfinite(pre) & (pre <= T * (1 + 1e-12))
    truncated = not bool(keep.all())
    grid, pre = grid[keep], np.minimum(pre[keep], T)
    interp = PchipInterpolator(traj.times, traj.states, axis=0)
    states = interp(pre)
    speed = np.asarray(lam(pre), dtype=float) * np.ones_like(pre)
    norm_f = np.interp(pre, traj.times, traj.norm_f) / speed
    return Trajectory(grid, states, np.linalg.norm(states, axis=1), norm_f,
                      warnings=list(traj.warnings), truncated=truncated or traj.truncated,
                      stats={"rescaled_from": T})


def reciprocal_schedule(lam: Schedule, horizon: float, n_table: int = 1000) -> Schedule:
    """Schedule ``mu(s) = 1/lam(tau1(s))``; rescaling by it undoes rescaling by ``lam``.

    Its primitive is ``tau1`` of ``lam`` and the inverse primitive ``tau2`` of
    ``lam``, both carried on the schedule so no nested quadrature is needed.
    """
    inv = inverse_time_map(lam, np.linspace(0.0, horizon, n_table + 1))

    def mu(s):
        out = 1.0 / np.asarray(lam(inv(np.atleast_1d(s))), dtype=float)
        return out if np.ndim(s) else float(out[0])

    return custom(mu, None, f"1/{lam}(tau1)",
                  primitive=lambda s: float(inv([s])[0]),
                  primitive_inverse=lambda t: tau2(lam, t))


# ---------------------------------------------------------------------------
# Lyapunov audits
# ---------------------------------------------------------------------------

@dataclass
class AuditReport:
    variant: str
    times: np.ndarray
    lhs: np.ndarray
    rhs: np.ndarray
    hypothesis_ok: np.ndarray

    @property
    def violation(self) -> np.ndarray:
        return self.lhs - self.rhs

    @property
    def max_violation(self) -> float:
        return float(np.max(self.violation)) if len(self.times) else -math.inf

    @property
    def t_at_max(self) -> float:
        return float(self.times[int(np.argmax(self.violation))])

    def passed(self, tol: float = 1e-6) -> bool:
        return self.max_violation <= tol

    def to_dict(self) -> dict:
        return {"variant": self.variant, "n_samples": int(len(self.times)),
                "max_violation": self.max_violation,
                "hypothesis_ok_everywhere": bool(np.all(self.hypothesis_ok))}


def fb_energy_inequality(spec: FieldSpec, t: float, x, xbar) -> tuple[float, float]:
    """``<x', x - xbar>`` and its bound ``(lam/2) g e (g e - 2) ||x - xbar||^2``."""
    s = spec.schedules
    lam, eps, g = float(s.lam(t)), float(s.eps(t)), float(s.gam(t))
    d = np.asarray(x) - xbar
    lhs = float(np.dot(evaluate(spec, t, x, check=False).f, d))
    rhs = 0.5 * lam * g * eps * (g * eps - 2.0) * float(np.dot(d, d))
    return lhs, rhs


def fbf_energy_inequality(spec: FieldSpec, t: float, x, xbar) -> tuple[float, float]:
    """``<x - xbar, x'>`` and ``-(1 - g e - g/beta)||x - z||^2 - e g ||z - xbar||^2``."""
    s = spec.schedules
    eps, g = regularization_strength(spec, t), float(s.gam(t))
    val = evaluate(spec, t, x, check=False)
    x = np.asarray(x)
    lhs = float(np.dot(x - xbar, val.f))
    rhs = -(1 - g * eps - g / s.beta) * float(np.sum((x - val.z) ** 2)) \
        - eps * g * float(np.sum((val.z - xbar) ** 2))
    return lhs, rhs


def lyapunov_audit(traj: Trajectory, spec: FieldSpec, oracle) -> AuditReport:
    """Evaluate the energy inequality at every sample using the exact field."""
    if spec.variant == "FB_inner":
        ineq = fb_energy_inequality
        from .dynamics import fb_step_bound as bound
        ok = lambda t, e: spec.schedules.gam(t) <= bound(spec.schedules.beta, e) + 1e-12  # noqa: E731
    elif spec.variant == "FBF_reg":
        ineq = fbf_energy_inequality
        from .dynamics import fbf_step_bound as bound
        ok = lambda t, e: spec.schedules.gam(t) < bound(spec.schedules.beta, e)  # noqa: E731
    else:
        raise ValueError(f"no Lyapunov audit for variant {spec.variant}")
    lhs, rhs, flags = [], [], []
    for t, x in zip(traj.times, traj.states):
        eps = regularization_strength(spec, t)
        xbar = oracle.x_eps(eps)
        a, b = ineq(spec, t, x, xbar)
        lhs.append(a)
        rhs.append(b)
        flags.append(bool(ok(t, eps)))
    return AuditReport(spec.variant, traj.times.copy(), np.array(lhs), np.array(rhs), np.array(flags))


# ---------------------------------------------------------------------------
# CSV
# ---------------------------------------------------------------------------

def csv_header(traj: Trajectory) -> list[str]:
    cols = ["t"] + [f"x_{i + 1}" for i in range(traj.dim)] + ["norm_x", "norm_f"]
    if traj.dist_reg_zero is not None:
        cols += ["dist_reg_zero", "theta"]
    return cols


def trajectory_rows(traj: Trajectory):
    for k in range(len(traj)):
        row = [traj.times[k], *traj.states[k], traj.norm_x[k], traj.norm_f[k]]
        if traj.dist_reg_zero is not None:
            row += [traj.dist_reg_zero[k], traj.theta[k]]
        yield [format(float(v), ".17g") for v in row]


def write_csv(traj: Trajectory, path_or_file) -> None:
    """Write the trajectory with 17 significant digits per value."""
    if isinstance(path_or_file, (str, bytes)) or hasattr(path_or_file, "__fspath__"):
        with open(path_or_file, "w", newline="") as fh:
            write_csv(traj, fh)
        return
    w = csv.writer(path_or_file, lineterminator="\n")
    w.writerow(csv_header(traj))
    w.writerows(trajectory_rows(traj))


def trajectory_csv_text(traj: Trajectory) -> str:
    buf = io.StringIO()
    write_csv(traj, buf)
    return buf.getvalue()
