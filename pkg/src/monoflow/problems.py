"""Benchmark instances: split feasibility, a skew variational inequality, and
small synthetic problems with known solutions."""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np

from . import operators as ops

PROBLEMS = ("sfp", "vi", "vi_paper_literal", "synthetic:<kind>(args)")


@dataclass(frozen=True)
class ProblemInstance:
    name: str
    A: ops.MaximallyMonotoneOp
    B: ops.SmoothMap
    beta: float
    x0: np.ndarray
    known_min_norm: np.ndarray | None = None
    label: str = ""
    C: ops.ConvexSet | None = None

    @property
    def dim(self) -> int:
        return self.A.dim

    def forward_backward_map(self, gamma: float):
        """``x -> J_{gA}(x - g Bx)``, nonexpansive for ``g`` in ``(0, 2 beta]``."""
        A, B = self.A, self.B
        return lambda x: A.resolvent(gamma, x - gamma * B.eval(x))


SFP_MATRIX = np.array([[1.0, -1.0], [1.0, 1.0]])
SFP_TARGET_NORMAL = np.array([3.0, -1.0])
VI_MATRIX = np.array([[0.0, 0.1, 0.5], [-0.1, 0.0, -0.4], [-0.5, 0.4, 0.0]])


def build_sfp() -> ProblemInstance:
    """Find ``x`` in the closed unit ball with ``Lx`` on the line ``3y1 = y2``.

    ``B = L^T (Id - P_Q) L`` is ``1/(2||L||^2)``-cocoercive; that modulus is the
    declared ``beta``.
    """
    L = SFP_MATRIX
    u = SFP_TARGET_NORMAL

    def B_eval(x):
        y = L @ x
        # residual of the projection onto Q = {<u, y> = 0}
        return L.T @ (np.dot(y, u) / np.dot(u, u) * u)

    norm_L = float(np.linalg.norm(L, 2))
    beta = 1.0 / (2 * norm_L ** 2)
    B = ops.SmoothMap(B_eval, 1.0 / beta, 2, beta, description="L^T (Id - P_Q) L")
    C = ops.ball(1.0, 2)
    return ProblemInstance("sfp", ops.normal_cone(C), B, beta, np.array([-3.0, 3.0]),
                           np.zeros(2), "split feasibility in R^2", C)


def _vi(name: str, u, eta: float, label: str) -> ProblemInstance:
    B = ops.linear_map(VI_MATRIX, description="skew 3x3")
    C = ops.hyperplane(u, eta)
    return ProblemInstance(name, ops.normal_cone(C), B, 1.0 / B.lipschitz,
                           np.array([-2.0, 4.0, -2.0]), None, label, C)


def build_vi() -> ProblemInstance:
    """Skew linear ``B`` on the plane ``3x1 - x2 + 1 = 0``."""
    return _vi("vi", [3.0, -1.0, 0.0], -1.0, "skew VI on 3x1 - x2 + 1 = 0")


def build_vi_literal() -> ProblemInstance:
    """Same ``B`` with the projection onto the plane ``3x1 - x2 + x3 = 0``."""
    return _vi("vi_paper_literal", [3.0, -1.0, 1.0], 0.0, "skew VI on 3x1 - x2 + x3 = 0")


def _alternating_start(dim: int) -> np.ndarray:
    return 3.0 * np.array([(-1.0) ** (i + 1) for i in range(dim)])


def synthetic_shift(b) -> ProblemInstance:
    """``A = 0``, ``B = x - b``: unique zero ``b``, regularized zeros ``b/(1 + eps)``."""
    b = ops.as_point(b)
    return ProblemInstance(f"synthetic:shift({','.join(f'{v:g}' for v in b)})",
                           ops.zero_op(b.size), ops.shift_map(b), 1.0,
                           _alternating_start(b.size), b.copy(), "shift")


def synthetic_ball_shift(b) -> ProblemInstance:
    """``A = N_ball``, ``B = x - b``: unique zero ``P_ball(b)``."""
    b = ops.as_point(b)
    C = ops.ball(1.0, b.size)
    return ProblemInstance(f"synthetic:ball_shift({','.join(f'{v:g}' for v in b)})",
                           ops.normal_cone(C), ops.shift_map(b), 1.0,
                           _alternating_start(b.size), C.project(b), "ball + shift", C)


def synthetic_halfspace(c: float = 1.0, dim: int = 2) -> ProblemInstance:
    """``A = N_{x1 >= c}``, ``B = 0``: minimum-norm zero ``(max(c, 0), 0, ...)``."""
    dim = int(dim)
    a = np.zeros(dim)
    a[0] = 1.0
    C = ops.halfspace(a, c)
    known = np.zeros(dim)
    known[0] = max(c, 0.0)
    # the zero map is beta-cocoercive for every beta; 1 is a neutral choice
    return ProblemInstance(f"synthetic:halfspace({c:g},{dim})", ops.normal_cone(C),
                           ops.zero_map(dim), 1.0, _alternating_start(dim), known,
                           "halfspace feasibility", C)


_SYNTH = re.compile(r"^synthetic:([a-z_]+)\(([^()]*)\)$")


def get_problem(name: str) -> ProblemInstance:
    name = name.strip()
    if name == "sfp":
        return build_sfp()
    if name == "vi":
        return build_vi()
    if name == "vi_paper_literal":
        return build_vi_literal()
    m = _SYNTH.match(name.replace(" ", ""))
    if m:
        kind, body = m.groups()
        try:
            args = [float(v) for v in body.split(",") if v]
        except ValueError:
            args = None
        if args:
            if kind == "shift":
                return synthetic_shift(args)
            if kind == "ball_shift":
                return synthetic_ball_shift(args)
            if kind == "halfspace" and len(args) in (1, 2) and (len(args) == 1 or args[1] >= 1):
                return synthetic_halfspace(args[0], int(args[1]) if len(args) == 2 else 2)
    raise ValueError(f"unknown problem {name!r}; expected one of {', '.join(PROBLEMS)} "
                     "with synthetic specs shift(b...), ball_shift(b...), halfspace(c[, dim])")


def skew_axis_norm(M) -> float:
    """Norm of the axis vector of a 3x3 skew matrix (its spectral norm)."""
    M = np.asarray(M, dtype=float)
    return math.sqrt(M[2, 1] ** 2 + M[0, 2] ** 2 + M[1, 0] ** 2)
