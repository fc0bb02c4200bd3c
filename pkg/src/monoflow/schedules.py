"""Parameter functions eps(t), lambda(t), gamma(t) and the theorem checks.

A :class:`Schedule` is a scalar function of time with an optional analytic
derivative.  The known families carry an asymptotic form ``coef * t**-decay``
so that divergence of integrals built from them can be classified exactly
rather than guessed from a finite probe.

Config syntax::

    powerlaw(c, p)   (c + t)^-p
    const(v)         v
    coscap(s)        0.5 cos(1/(s + t)) + 0.5
    cosinv(s)        cos(1/(s + t))
"""

from __future__ import annotations

import math
import re
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import integrate, optimize

DEFAULT_PROBE_HORIZON = 1e8
DIVERGENCE_THRESHOLD = 50.0
DIVERGENCE_DECADE_INCREMENT = 1.0
FINITE_DECADE_INCREMENT = 1e-3
LIMIT_THRESHOLD = 1e-3

HOLDS, FAILS, INCONCLUSIVE = "holds", "fails", "inconclusive"


class ScheduleError(ValueError):
    pass


@dataclass(frozen=True)
class Schedule:
    """Scalar time function with optional derivative.

    ``asymptotic`` is ``(coef, decay)`` meaning ``f(t) ~ coef * t**-decay`` as
    ``t -> inf``; ``None`` when unknown.  ``limit`` is the value at infinity
    when known.
    """

    func: Callable
    deriv: Callable | None
    kind: str
    params: tuple = ()
    domain_start: float = 0.0
    asymptotic: tuple[float, float] | None = None
    label: str = ""
    # optional exact t -> int_0^t f and its inverse; quadrature otherwise
    primitive: Callable | None = None
    primitive_inverse: Callable | None = None

    def __call__(self, t):
        return self.func(t)

    def derivative(self, t):
        if self.deriv is None:
            raise ScheduleError(f"schedule {self} has no derivative")
        return self.deriv(t)

    @property
    def has_derivative(self) -> bool:
        return self.deriv is not None

    @property
    def limit(self) -> float | None:
        if self.asymptotic is None:
            return None
        coef, decay = self.asymptotic
        return coef if decay == 0 else 0.0

    def is_constant(self) -> bool:
        return self.kind == "constant"

    def integral(self, a: float, b: float, abstol: float = 1e-10) -> float:
        return integral(self.func, a, b, abstol=abstol)

    def __str__(self):
        return self.label or f"{self.kind}{self.params}"


def power_law(c: float, p: float) -> Schedule:
    """``(c + t)^-p``."""
    c, p = float(c), float(p)
    if c <= 0:
        raise ScheduleError("powerlaw offset must be positive")
    if p < 0:
        raise ScheduleError("powerlaw exponent must be nonnegative")
    return Schedule(
        func=lambda t: (c + np.asarray(t, dtype=float)) ** -p if np.ndim(t) else (c + t) ** -p,
        deriv=lambda t: -p * (c + np.asarray(t, dtype=float)) ** (-p - 1.0),
        kind="power_law",
        params=(c, p),
        asymptotic=(1.0, p),
        label=f"powerlaw({c:g}, {p:g})",
    )


def constant(v: float) -> Schedule:
    v = float(v)
    return Schedule(
        func=lambda t: v if np.ndim(t) == 0 else np.full(np.shape(t), v),
        deriv=lambda t: 0.0 if np.ndim(t) == 0 else np.zeros(np.shape(t)),
        kind="constant",
        params=(v,),
        asymptotic=(v, 0.0) if v != 0 else (0.0, math.inf),
        label=f"const({v:g})",
    )


def coscap(shift: float) -> Schedule:
    """``0.5 cos(1/(shift + t)) + 0.5``, taking values in ``[0, 1]``."""
    s = float(shift)
    if s <= 0:
        raise ScheduleError("coscap shift must be positive")
    return Schedule(
        func=lambda t: 0.5 * np.cos(1.0 / (s + np.asarray(t, dtype=float))) + 0.5,
        deriv=lambda t: 0.5 * np.sin(1.0 / (s + np.asarray(t, dtype=float)))
        / (s + np.asarray(t, dtype=float)) ** 2,
        kind="cosine_family",
        params=("coscap", s),
        asymptotic=(1.0, 0.0),
        label=f"coscap({s:g})",
    )


def cosinv(shift: float = 0.0) -> Schedule:
    """``cos(1/(shift + t))``.

    Positive only once ``1/(shift + t) < pi/2``; the domain starts where
    ``1/(shift + t) <= 1`` so the schedule stays in ``[cos 1, 1]``.
    """
    s = float(shift)
    return Schedule(
        func=lambda t: np.cos(1.0 / (s + np.asarray(t, dtype=float))),
        deriv=lambda t: np.sin(1.0 / (s + np.asarray(t, dtype=float)))
        / (s + np.asarray(t, dtype=float)) ** 2,
        kind="cosine_family",
        params=("cosinv", s),
        domain_start=max(0.0, 1.0 - s),
        asymptotic=(1.0, 0.0),
        label=f"cosinv({s:g})",
    )


def custom(func: Callable, deriv: Callable | None = None, label: str = "custom",
           domain_start: float = 0.0, primitive: Callable | None = None,
           primitive_inverse: Callable | None = None) -> Schedule:
    return Schedule(func, deriv, "custom", (), domain_start, None, label, primitive, primitive_inverse)


_SYNTAX = re.compile(r"^\s*([a-z_]+)\s*\(([^()]*)\)\s*$")
_FAMILIES = {
    "powerlaw": (power_law, (2,)),
    "const": (constant, (1,)),
    "coscap": (coscap, (1,)),
    "cosinv": (cosinv, (0, 1)),
}


def parse_schedule(text: str) -> Schedule:
    """Parse ``powerlaw(1, 0.5)``-style schedule text."""
    m = _SYNTAX.match(text)
    if not m or m.group(1) not in _FAMILIES:
        raise ScheduleError(
            f"cannot parse schedule {text!r}; expected one of "
            + ", ".join(f"{k}(...)" for k in _FAMILIES))
    name, body = m.groups()
    ctor, arities = _FAMILIES[name]
    args = [a.strip() for a in body.split(",") if a.strip()]
    if len(args) not in arities:
        raise ScheduleError(f"{name} takes {' or '.join(map(str, arities))} arguments, got {len(args)}")
    try:
        values = [float(a) for a in args]
    except ValueError as exc:
        raise ScheduleError(f"bad number in schedule {text!r}") from exc
    return ctor(*values)


@dataclass(frozen=True)
class ScheduleSet:
    eps: Schedule
    lam: Schedule
    gam: Schedule
    beta: float

    @property
    def domain_start(self) -> float:
        return max(self.eps.domain_start, self.lam.domain_start, self.gam.domain_start)


# ---------------------------------------------------------------------------
# quadrature and time rescaling
# ---------------------------------------------------------------------------

def _breakpoints(a: float, b: float) -> list[float]:
    """Split ``[a, b]`` at powers of ten so quad sees moderate intervals."""
    pts = [a]
    k = math.floor(math.log10(max(a, 1.0))) + 1
    while 10.0 ** k < b:
        if 10.0 ** k > a:
            pts.append(10.0 ** k)
        k += 1
    pts.append(b)
    return pts


def integral(f: Callable, a: float, b: float, abstol: float = 1e-10) -> float:
    """Adaptive quadrature of ``f`` over ``[a, b]`` split into decades."""
    if b < a:
        return -integral(f, b, a, abstol)
    if b == a:
        return 0.0
    pts = _breakpoints(a, b)
    total = 0.0
    per = abstol / max(len(pts) - 1, 1)
    for lo, hi in zip(pts[:-1], pts[1:]):
        with warnings.catch_warnings():
            warnings.simplefilter("error", integrate.IntegrationWarning)
            try:
                val, err = integrate.quad(lambda s: float(f(s)), lo, hi,
                                          epsabs=per, epsrel=1e-13, limit=500)
            except integrate.IntegrationWarning as exc:
                raise ScheduleError(f"quadrature failed on [{lo:g}, {hi:g}]: {exc}") from exc
        total += val
    return total


def tau2(lam: Schedule, t: float) -> float:
    """``int_0^t lam(s) ds``."""
    if t < 0:
        raise ScheduleError("tau2 needs t >= 0")
    if lam.primitive is not None:
        return float(lam.primitive(float(t)))
    return integral(lam.func, 0.0, float(t))


def tau1(lam: Schedule, t: float, horizon: float = DEFAULT_PROBE_HORIZON) -> float:
    """Inverse of :func:`tau2`: the ``s`` with ``int_0^s lam = t``."""
    if t < 0:
        raise ScheduleError("tau1 needs t >= 0")
    if t == 0:
        return 0.0
    if lam.primitive_inverse is not None:
        return float(lam.primitive_inverse(float(t)))
    lo, hi = 0.0, 1.0
    f_hi = tau2(lam, hi)
    while f_hi < t:
        lo = hi
        hi *= 2.0
        if hi > horizon:
            raise ScheduleError(
                f"lambda integral insufficient: int_0^{horizon:g} lambda < {t:g}")
        f_hi = f_hi + integral(lam.func, lo, hi)
    s = optimize.brentq(lambda s: tau2(lam, s) - t, lo, hi, xtol=1e-14, rtol=4 * np.finfo(float).eps,
                        maxiter=200)
    return float(s)


def inverse_time_map(lam: Schedule, t_grid) -> Callable:
    """Vectorised ``tau1`` backed by a cumulative ``tau2`` table on ``t_grid``.

    ``t_grid`` must start at 0 and increase; the table is built once, each
    value is then refined by root finding inside its table interval.  Values
    beyond the table map to ``nan``.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    cum = np.concatenate([[0.0], np.cumsum([integral(lam.func, a, b)
                                            for a, b in zip(t_grid[:-1], t_grid[1:])])])

    def invert(values):
        values = np.asarray(values, dtype=float)
        out = np.full(values.shape, np.nan)
        for i, v in np.ndenumerate(values):
            if v > cum[-1] + 1e-12:
                continue
            j = int(np.searchsorted(cum, v, side="left"))
            if j == 0:
                out[i] = t_grid[0]
                continue
            j = min(j, len(cum) - 1)
            a, b, base = t_grid[j - 1], t_grid[j], cum[j - 1]
            g = lambda s: base + integral(lam.func, a, s) - v  # noqa: E731
            ga, gb = g(a), g(b)
            if ga >= 0:
                out[i] = a
            elif gb <= 0:
                out[i] = b
            else:
                out[i] = optimize.brentq(g, a, b, xtol=1e-14, rtol=4 * np.finfo(float).eps)
        return out

    return invert


def tau1_many(lam: Schedule, values, t_grid=None) -> np.ndarray:
    """``tau1`` at many values; see :func:`inverse_time_map` for ``t_grid``."""
    values = np.asarray(values, dtype=float)
    if lam.primitive_inverse is not None:
        return np.array([lam.primitive_inverse(float(v)) for v in values.ravel()]).reshape(values.shape)
    if t_grid is None:
        t_grid = np.linspace(0.0, tau1(lam, float(values.max())) * 1.0001 + 1e-9, 257)
    return inverse_time_map(lam, t_grid)(values)


# ---------------------------------------------------------------------------
# hypothesis checks
# ---------------------------------------------------------------------------

@dataclass
class Condition:
    name: str
    statement: str
    verdict: str
    evidence: dict = field(default_factory=dict)


@dataclass
class HypothesisReport:
    theorem_id: str
    t0: float
    probe_horizon: float
    conditions: list[Condition]
    bounds_applied: str = ""

    @property
    def all_hold(self) -> bool:
        return all(c.verdict == HOLDS for c in self.conditions)

    def verdict(self, name: str) -> str:
        for c in self.conditions:
            if c.name == name:
                return c.verdict
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {
            "theorem_id": self.theorem_id,
            "t0": self.t0,
            "probe_horizon": self.probe_horizon,
            "bounds_applied": self.bounds_applied,
            "all_hold": self.all_hold,
            "conditions": [
                {"name": c.name, "statement": c.statement, "verdict": c.verdict,
                 "evidence": {k: _jsonable(v) for k, v in c.evidence.items()}}
                for c in self.conditions
            ],
        }


def _jsonable(v):
    if isinstance(v, (np.floating, float)):
        v = float(v)
        return v if math.isfinite(v) else str(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.bool_,)):
        return bool(v)
    return v


def probe_grid(t0: float, horizon: float) -> np.ndarray:
    lin = np.linspace(t0, t0 + 10.0, 2001)
    log = np.geomspace(t0 + 10.0, horizon, 2000)
    return np.unique(np.concatenate([lin, log]))


def _combine_asymptotics(*schedules: Schedule) -> tuple[float, float] | None:
    """Asymptotic form of a pointwise product of schedules."""
    coef, decay = 1.0, 0.0
    for s in schedules:
        if s.asymptotic is None:
            return None
        c, d = s.asymptotic
        coef *= c
        decay += d
    return coef, decay


def _classify_integral(asym: tuple[float, float] | None) -> str | None:
    """'diverges' / 'converges' / None for ``int^inf coef t^-decay``."""
    if asym is None:
        return None
    coef, decay = asym
    if coef == 0 or math.isinf(decay):
        return "converges"
    if decay <= 1:
        return "diverges" if coef > 0 else "diverges_negative"
    return "converges"


def _divergence_condition(name, statement, g, t0, horizon, asym) -> Condition:
    partial = integral(g, t0, horizon, abstol=1e-8)
    last = integral(g, horizon / 10.0, horizon, abstol=1e-8)
    tail = np.asarray([g(t) for t in np.geomspace(horizon / 10.0, horizon, 50)])
    ev = {"partial_integral": partial, "last_decade_increment": last}
    cls = _classify_integral(asym)
    if cls is not None:
        ev["analytic"] = cls
        verdict = HOLDS if cls == "diverges" else FAILS
    elif np.all(tail <= 0):
        verdict = FAILS
    elif partial > DIVERGENCE_THRESHOLD and last > DIVERGENCE_DECADE_INCREMENT:
        verdict = HOLDS
    else:
        verdict = INCONCLUSIVE
    return Condition(name, statement, verdict, ev)


def _finite_integral_condition(name, statement, g, t0, horizon, analytic: str | None) -> Condition:
    partial = integral(g, t0, horizon, abstol=1e-8)
    last = integral(g, horizon / 10.0, horizon, abstol=1e-8)
    ev = {"partial_integral": partial, "last_decade_increment": last}
    if analytic is not None:
        ev["analytic"] = analytic
        verdict = HOLDS if analytic == "finite" else FAILS
    elif abs(last) <= FINITE_DECADE_INCREMENT:
        verdict = HOLDS
    else:
        verdict = INCONCLUSIVE
    return Condition(name, statement, verdict, ev)


def _limit_zero_condition(name, statement, g, horizon) -> Condition:
    try:
        end = abs(float(g(horizon)))
        before = abs(float(g(horizon / 10.0)))
    except ZeroDivisionError:
        return Condition(name, statement, FAILS, {"error": "undefined: division by zero"})
    if not (math.isfinite(end) and math.isfinite(before)):
        return Condition(name, statement, FAILS, {"error": "undefined: non-finite value"})
    ev = {"value_at_horizon": end, "value_decade_before": before}
    decreasing = end <= before
    if end < LIMIT_THRESHOLD and decreasing:
        verdict = HOLDS
    elif decreasing:
        verdict = INCONCLUSIVE
    else:
        verdict = FAILS
    return Condition(name, statement, verdict, ev)


def _range_condition(name, statement, values, lo, hi, lo_open, hi_open, grid) -> Condition:
    values = np.asarray(values, dtype=float)
    bad_lo = values <= lo if lo_open else values < lo
    bad_hi = values >= hi if hi_open else values > hi
    bad = bad_lo | bad_hi
    ev = {"min": float(values.min()), "max": float(values.max()), "violations": int(bad.sum())}
    if bad.any():
        ev["first_violation_t"] = float(grid[np.argmax(bad)])
    return Condition(name, statement, FAILS if bad.any() else HOLDS, ev)


def _vec(f: Callable, grid: np.ndarray) -> np.ndarray:
    try:
        out = np.asarray(f(grid), dtype=float)
        if out.shape == grid.shape:
            return out
    except Exception:
        pass
    return np.array([float(f(t)) for t in grid])


def _missing_derivative(name, statement, *schedules) -> Condition | None:
    missing = [str(s) for s in schedules if not s.has_derivative]
    if missing:
        return Condition(name, statement, INCONCLUSIVE, {"missing_derivative": missing})
    return None


def _eps_decreasing_to_zero(s: ScheduleSet, grid, horizon) -> Condition:
    name, st = "(i)", "eps absolutely continuous and decreasing to 0"
    miss = _missing_derivative(name, st, s.eps)
    if miss:
        return miss
    d = _vec(s.eps.derivative, grid)
    lim = _limit_zero_condition(name, st, s.eps.func, horizon)
    ev = dict(lim.evidence, max_derivative=float(d.max()))
    if d.max() > 0:
        return Condition(name, st, FAILS, ev)
    return Condition(name, st, lim.verdict, ev)


def _lambda_range(s, grid, upper, label) -> Condition:
    return _range_condition("lambda_range", f"lambda(t) in (0, {upper:g}] ({label})",
                            _vec(s.lam.func, grid), 0.0, upper, True, False, grid)


def _main2_conditions(s: ScheduleSet, t0, horizon, grid) -> list[Condition]:
    eps, lam = s.eps, s.lam
    out = [
        _divergence_condition("(i)", "int eps = +inf", eps.func, t0, horizon, eps.asymptotic),
        _divergence_condition("(ii)", "int lambda = +inf", lam.func, t0, horizon, lam.asymptotic),
    ]
    ratio = lambda t: eps(t) / lam(t)  # noqa: E731
    name, st = "(iii)", "eps, lambda absolutely continuous and eps/lambda -> 0"
    out.append(_missing_derivative(name, st, eps, lam) or _limit_zero_condition(name, st, ratio, horizon))
    name, st = "(iv)", "int |d/dt (eps/lambda)| < +inf"
    miss = _missing_derivative(name, st, eps, lam)
    if miss:
        out.append(miss)
    else:
        dratio = lambda t: abs((eps.derivative(t) * lam(t) - eps(t) * lam.derivative(t)) / lam(t) ** 2)  # noqa: E731
        analytic = None
        if eps.asymptotic is not None and lam.asymptotic is not None and eps.kind != "custom" \
                and lam.kind != "custom":
            # known families are eventually monotone: total variation of the
            # tail is finite iff eps/lambda has a finite limit
            analytic = "finite" if eps.asymptotic[1] >= lam.asymptotic[1] else "infinite"
        out.append(_finite_integral_condition(name, st, dratio, t0, horizon, analytic))
    return out


def _main1_conditions(s: ScheduleSet, t0, horizon, grid) -> list[Condition]:
    eps, lam = s.eps, s.lam
    out = [
        _divergence_condition("(i)", "int eps = +inf", eps.func, t0, horizon, eps.asymptotic),
        _divergence_condition("(ii)", "int lambda = +inf", lam.func, t0, horizon, lam.asymptotic),
    ]
    name, st = "(iii)", "eps/lambda nonincreasing and -> 0"
    miss = _missing_derivative(name, st, eps, lam)
    if miss:
        out.append(miss)
    else:
        ratio = lambda t: eps(t) / lam(t)  # noqa: E731
        e, de = _vec(eps.func, grid), _vec(eps.derivative, grid)
        l, dl = _vec(lam.func, grid), _vec(lam.derivative, grid)
        with np.errstate(divide="ignore", invalid="ignore"):
            d = (de * l - e * dl) / l ** 2
        lim = _limit_zero_condition(name, st, ratio, horizon)
        inc = ~(d <= 0)
        ev = dict(lim.evidence, increasing_samples=int(inc.sum()))
        if inc.any():
            ev["first_increase_t"] = float(grid[np.argmax(inc)])
            out.append(Condition(name, st, FAILS, ev))
        else:
            out.append(Condition(name, st, lim.verdict, ev))
    name, st = "(iv)", "eps'/eps^2 - lambda'/(lambda eps) -> 0"
    miss = _missing_derivative(name, st, eps, lam)
    if miss:
        out.append(miss)
    else:
        g = lambda t: eps.derivative(t) / eps(t) ** 2 - lam.derivative(t) / (lam(t) * eps(t))  # noqa: E731
        out.append(_limit_zero_condition(name, st, g, horizon))
    return out


def _th1_fb_conditions(s: ScheduleSet, t0, horizon, grid) -> list[Condition]:
    eps, lam, gam, beta = s.eps, s.lam, s.gam, s.beta
    e, g = _vec(eps.func, grid), _vec(gam.func, grid)
    out = [
        _range_condition("gamma_range", f"gamma(t) in (0, 2 beta) = (0, {2 * beta:g})",
                         g, 0.0, 2 * beta, True, True, grid),
    ]
    bound = 2 * beta / (1 + 2 * beta * e)
    slack = bound - g
    out.append(Condition(
        "step_bound", "gamma(t) <= 2 beta / (1 + 2 beta eps(t))",
        HOLDS if np.all(slack >= -1e-12) else FAILS,
        {"min_slack": float(slack.min()), "t_at_min": float(grid[np.argmin(slack)])}))
    out.append(_eps_decreasing_to_zero(s, grid, horizon))
    name, st = "(ii)", "eps'/(eps^2 lambda gamma) -> 0"
    miss = _missing_derivative(name, st, eps)
    out.append(miss or _limit_zero_condition(
        name, st, lambda t: eps.derivative(t) / (eps(t) ** 2 * lam(t) * gam(t)), horizon))
    integrand = lambda t: lam(t) * gam(t) * eps(t) * (2 - gam(t) * eps(t))  # noqa: E731
    asym = _combine_asymptotics(lam, gam, eps)
    if asym is not None:
        asym = (2 * asym[0], asym[1])
    out.append(_divergence_condition("(iii)", "int lambda gamma eps (2 - gamma eps) = +inf",
                                     integrand, t0, horizon, asym))
    return out


def _fbf_conditions(s: ScheduleSet, t0, horizon, grid) -> list[Condition]:
    eps, gam, beta = s.eps, s.gam, s.beta
    e, g = _vec(eps.func, grid), _vec(gam.func, grid)
    bound = beta / (e * beta + 1)
    slack = bound - g
    out = [
        _range_condition("gamma_range", "gamma(t) > 0", g, 0.0, math.inf, True, True, grid),
        Condition("step_bound", "gamma(t) < beta / (eps(t) beta + 1)",
                  HOLDS if np.all(slack > 0) else FAILS,
                  {"min_slack": float(slack.min()), "t_at_min": float(grid[np.argmin(slack)])}),
        _eps_decreasing_to_zero(s, grid, horizon),
    ]
    name, st = "(ii)", "eps'/(eps^2 gamma (beta (1 - gamma eps) - gamma)) -> 0"
    miss = _missing_derivative(name, st, eps)
    out.append(miss or _limit_zero_condition(
        name, st,
        lambda t: eps.derivative(t) / (eps(t) ** 2 * gam(t) * (beta * (1 - gam(t) * eps(t)) - gam(t))),
        horizon))

    def integrand(t):
        ge = gam(t) * eps(t)
        return ge * (beta - beta * ge - gam(t)) / (beta * ge + beta + gam(t))

    asym = None
    base = _combine_asymptotics(gam, eps)
    g_lim = gam.limit
    if base is not None and g_lim is not None and g_lim < beta:
        # eps -> 0, so the integrand behaves like gamma eps (beta - gamma_inf)/(beta + gamma_inf)
        asym = (base[0] * (beta - g_lim) / (beta + g_lim), base[1])
    out.append(_divergence_condition(
        "(iii)", "int gamma eps (beta - beta gamma eps - gamma)/(beta gamma eps + beta + gamma) = +inf",
        integrand, t0, horizon, asym))
    return out


THEOREMS = ("main2", "main1", "fb_out", "th1_fb", "fbf_conv")


def check_hypotheses(theorem_id: str, s: ScheduleSet, probe_horizon: float = DEFAULT_PROBE_HORIZON,
                     t0: float | None = None) -> HypothesisReport:
    """Evaluate every hypothesis of the named convergence theorem on a probe.

    Divergent integrals of the known schedule families are classified
    analytically (numeric partial sums are still reported); custom schedules
    fall back to the partial-sum growth rule.
    """
    if theorem_id not in THEOREMS:
        raise ValueError(f"unknown theorem {theorem_id!r}; expected one of {THEOREMS}")
    t0 = s.domain_start if t0 is None else max(float(t0), s.domain_start)
    if not probe_horizon > 10 * (t0 + 10):
        raise ValueError("probe horizon too short")
    with np.errstate(all="ignore"):
        return _check(theorem_id, s, probe_horizon, t0)


def _check(theorem_id, s, probe_horizon, t0) -> HypothesisReport:
    grid = probe_grid(t0, probe_horizon)
    conds: list[Condition] = []
    bounds = ""
    if theorem_id in ("main2", "main1"):
        bounds = "lambda in (0, 1]"
        conds.append(_lambda_range(s, grid, 1.0, "standing assumption"))
        body = _main2_conditions if theorem_id == "main2" else _main1_conditions
        conds.extend(body(s, t0, probe_horizon, grid))
    elif theorem_id == "fb_out":
        beta = s.beta
        gam_ok = s.gam.is_constant() and 0 < s.gam(0.0) < 2 * beta
        gamma = s.gam(0.0)
        conds.append(Condition("gamma_constant", f"gamma constant in (0, 2 beta) = (0, {2 * beta:g})",
                               HOLDS if gam_ok else FAILS, {"gamma": str(s.gam)}))
        upper = (4 * beta - gamma) / (2 * beta)
        bounds = f"lambda in (0, (4 beta - gamma)/(2 beta)] = (0, {upper:g}]"
        conds.append(_lambda_range(s, grid, upper, "averaged forward-backward operator"))
        conds.extend(_main2_conditions(s, t0, probe_horizon, grid))
    elif theorem_id == "th1_fb":
        bounds = "lambda in (0, 1]; gamma <= 2 beta/(1 + 2 beta eps)"
        conds.append(_lambda_range(s, grid, 1.0, "standing assumption"))
        conds.extend(_th1_fb_conditions(s, t0, probe_horizon, grid))
    else:
        bounds = "gamma < beta/(eps beta + 1)"
        conds.extend(_fbf_conditions(s, t0, probe_horizon, grid))
    return HypothesisReport(theorem_id, t0, probe_horizon, conds, bounds)
