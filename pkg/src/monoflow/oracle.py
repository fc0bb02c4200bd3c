"""Reference solutions: regularized zeros, the regularization path and its limit.

``x_eps`` is the unique zero of ``A + B + eps Id``.  For cocoercive ``B`` it is
the fixed point of the contraction

    x -> J_{gA}(x - g(Bx + eps x)),   g = 2 beta / (1 + 2 beta eps),

whose factor is ``1 - g eps``.  For merely Lipschitz ``B`` the Tseng map
``x -> x + V_{eps,g}(x)`` with ``g = 0.9 beta/(eps beta + 1)`` is iterated and
the distance to ``x_eps`` is certified through the strong monotonicity of
``B + eps Id``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .dynamics import fbf_regularized_parts
from .operators import MaximallyMonotoneOp, SmoothMap, as_point

DEFAULT_TOL = 1e-10
MAX_ITER = 2_000_000
MONITOR_WINDOW = 25


class OracleError(RuntimeError):
    pass


@dataclass(frozen=True)
class RegularizedPathPoint:
    eps: float
    x_eps: np.ndarray
    iterations: int
    residual: float
    method: str = "contraction"
    certified: bool = True
    error_bound: float = 0.0


@dataclass(frozen=True)
class MinNormEstimate:
    x_star: np.ndarray
    eps_sequence: tuple[float, ...]
    extrapolation_gap: float
    path: tuple[RegularizedPathPoint, ...] = ()

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.x_star))


def contraction_step(B: SmoothMap, eps: float) -> float:
    """Step making the forward-backward map a contraction with factor ``1 - step*eps``."""
    beta = B.cocoercivity
    return 1.0 / eps if math.isinf(beta) else 2 * beta / (1 + 2 * beta * eps)


def tseng_step(B: SmoothMap, eps: float) -> float:
    beta = B.beta
    return 0.9 / eps if math.isinf(beta) else 0.9 * beta / (eps * beta + 1)


def tseng_distance_bound(B: SmoothMap, gamma: float, eps: float, gap: float) -> float:
    """Upper bound on ``||x - x_eps||`` from ``gap = ||x - z||``.

    Follows from monotonicity of ``A`` and ``eps``-strong monotonicity plus
    ``(1/beta + eps)``-Lipschitz continuity of ``B + eps Id``.
    """
    return gap * (2.0 + 1.0 / (gamma * eps) + B.lipschitz / eps)


def _contraction(A, B, eps, tol, x, max_iter):
    g = contraction_step(B, eps)
    q = 1.0 - g * eps
    for k in range(1, max_iter + 1):
        x_new = A.resolvent(g, x - g * (B.eval(x) + eps * x))
        step = float(np.linalg.norm(x_new - x))
        x = x_new
        if step <= tol * g * eps:
            # ||x_new - x_eps|| <= q ||x - x_eps|| <= q step/(1 - q)
            return RegularizedPathPoint(eps, x, k, step, "contraction", True,
                                        q * step / (g * eps))
        if not np.all(np.isfinite(x)):
            break
    return None


def _tseng(A, B, eps, tol, x, max_iter):
    g = tseng_step(B, eps)
    steps: list[float] = []
    for k in range(1, max_iter + 1):
        z, v = fbf_regularized_parts(A, B, g, eps, x)
        gap = float(np.linalg.norm(x - z))
        bound = tseng_distance_bound(B, g, eps, gap)
        if bound <= tol:
            return RegularizedPathPoint(eps, x, k, float(np.linalg.norm(v)), "tseng", True, bound)
        x = x + v
        if not np.all(np.isfinite(x)):
            break
        steps.append(float(np.linalg.norm(v)))
        if len(steps) > MONITOR_WINDOW:
            # observed linear rate over the window; used only when the
            # certificate is out of floating-point reach
            window = np.array(steps[-MONITOR_WINDOW:])
            if window[0] > 0:
                rate = (window[-1] / window[0]) ** (1.0 / (MONITOR_WINDOW - 1))
                if rate < 1 and window[-1] * rate / (1 - rate) <= tol and \
                        bound <= 1e3 * tol:
                    return RegularizedPathPoint(eps, x, k, window[-1], "tseng-monitored", False,
                                                window[-1] * rate / (1 - rate))
    return None


def _flow_fallback(A, B, eps, tol, x, horizon=1e4):
    """Integrate ``x' = V_{eps,g}(x)`` to a long horizon and certify the end point."""
    from .integrator import IntegrationError, IntegratorOpts, integrate

    g = tseng_step(B, eps)
    rhs = lambda t, y: fbf_regularized_parts(A, B, g, eps, y)[1]  # noqa: E731
    opts = IntegratorOpts("rk45_adaptive", 0.0, horizon, sample_every=horizon / 10,
                          rtol=1e-12, atol=1e-14)
    try:
        traj = integrate(rhs, x, opts)
    except IntegrationError:
        return None
    x = traj.final
    z, v = fbf_regularized_parts(A, B, g, eps, x)
    bound = tseng_distance_bound(B, g, eps, float(np.linalg.norm(x - z)))
    if bound <= tol:
        return RegularizedPathPoint(eps, x, len(traj), float(np.linalg.norm(v)), "flow", True, bound)
    return None


def regularized_zero(A: MaximallyMonotoneOp, B: SmoothMap, eps: float, tol: float = DEFAULT_TOL,
                     x0=None, max_iter: int = MAX_ITER) -> RegularizedPathPoint:
    """Unique zero of ``A + B + eps Id`` to accuracy ``tol``."""
    eps = float(eps)
    if not (eps > 0 and math.isfinite(eps)):
        raise ValueError(f"eps must be positive, got {eps}")
    if A.dim != B.dim:
        raise ValueError(f"dimension mismatch: A has {A.dim}, B has {B.dim}")
    x = np.zeros(A.dim) if x0 is None else as_point(x0, A.dim).copy()
    if B.cocoercivity is not None:
        pt = _contraction(A, B, eps, tol, x, max_iter)
    else:
        pt = _tseng(A, B, eps, tol, x, max_iter) or _flow_fallback(A, B, eps, tol, x)
    if pt is None:
        raise OracleError(f"regularized zero for eps={eps:g} did not converge to tol={tol:g}")
    return pt


class PathOracle:
    """Cached regularized zeros with warm starts from the nearest cached ``eps``."""

    def __init__(self, A: MaximallyMonotoneOp, B: SmoothMap, tol: float = DEFAULT_TOL):
        self.A, self.B, self.tol = A, B, tol
        self._cache: dict[float, RegularizedPathPoint] = {}

    def point(self, eps: float) -> RegularizedPathPoint:
        eps = float(eps)
        if eps in self._cache:
            return self._cache[eps]
        x0 = None
        if self._cache:
            near = min(self._cache, key=lambda e: abs(math.log(e / eps)))
            x0 = self._cache[near].x_eps
        pt = regularized_zero(self.A, self.B, eps, self.tol, x0)
        self._cache[eps] = pt
        return pt

    def x_eps(self, eps: float) -> np.ndarray:
        return self.point(eps).x_eps

    def path(self, eps_values) -> list[RegularizedPathPoint]:
        return [self.point(e) for e in eps_values]


@dataclass
class PathLipschitzReport:
    max_ratio: float
    max_excess: float
    n_pairs: int
    slack: float
    pairs: list = field(default_factory=list)

    @property
    def holds(self) -> bool:
        return self.max_excess <= self.slack


def path_lipschitz_check(points, tol: float = DEFAULT_TOL, slack: float | None = None) -> PathLipschitzReport:
    """Check ``||x1 - x2|| <= (||x1||/eps2)|eps1 - eps2|`` over all ordered pairs."""
    points = list(points)
    if len(points) < 2:
        raise ValueError("need at least two path points")
    slack = 10 * tol if slack is None else slack
    max_ratio, max_excess, pairs = 0.0, -math.inf, []
    for p1, p2 in itertools.permutations(points, 2):
        lhs = float(np.linalg.norm(p1.x_eps - p2.x_eps))
        rhs = float(np.linalg.norm(p1.x_eps)) / p2.eps * abs(p1.eps - p2.eps)
        excess = lhs - rhs
        ratio = lhs / rhs if rhs > 0 else (0.0 if lhs <= slack else math.inf)
        max_ratio = max(max_ratio, ratio)
        max_excess = max(max_excess, excess)
        pairs.append((p1.eps, p2.eps, lhs, rhs))
    return PathLipschitzReport(max_ratio, max_excess, len(pairs), slack, pairs)


def min_norm_zero(A: MaximallyMonotoneOp, B: SmoothMap, eps0: float = 1.0, decay: float = 0.5,
                  tol: float = 1e-6, max_norm: float = 1e8, max_steps: int = 200) -> MinNormEstimate:
    """Follow ``eps_k = eps0 decay^k`` with warm starts until successive zeros differ by ``tol``."""
    if not (eps0 > 0 and 0 < decay < 1 and tol > 0):
        raise ValueError("need eps0 > 0, decay in (0, 1), tol > 0")
    inner = 0.01 * tol
    eps, prev, pts = eps0, None, []
    x0 = None
    for _ in range(max_steps):
        pt = regularized_zero(A, B, eps, inner, x0)
        pts.append(pt)
        if np.linalg.norm(pt.x_eps) > max_norm:
            raise OracleError(f"zero set possibly empty: ||x_eps|| = {np.linalg.norm(pt.x_eps):.3g} "
                              f"exceeds {max_norm:g} at eps={eps:g}")
        if prev is not None:
            gap = float(np.linalg.norm(pt.x_eps - prev.x_eps))
            if gap <= tol:
                return MinNormEstimate(pt.x_eps, tuple(p.eps for p in pts), gap, tuple(pts))
        prev, x0 = pt, pt.x_eps
        eps *= decay
    raise OracleError(f"zero set possibly empty: path did not settle within {max_steps} steps "
                      f"(last eps={eps / decay:g})")
