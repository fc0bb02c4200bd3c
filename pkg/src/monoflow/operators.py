"""Operator algebra on R^n.

Maximally monotone operators are carried by their resolvent family
``gamma -> J_{gamma A}``; single-valued operators carry their declared
Lipschitz constant and, optionally, a cocoercivity modulus.  Everything here
is a pure function of its inputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.stats import qmc

DEFAULT_SEED = 0
N_SAMPLE_PAIRS = 256
SAMPLE_BOX = 10.0


def as_point(x, dim: int | None = None) -> np.ndarray:
    """Return ``x`` as a finite 1-D float array, validating its dimension."""
    p = np.asarray(x, dtype=float)
    if p.ndim == 0:
        p = p.reshape(1)
    if p.ndim != 1:
        raise ValueError(f"point must be a vector, got shape {p.shape}")
    if not np.all(np.isfinite(p)):
        raise ValueError("point has non-finite entries")
    if dim is not None and p.shape[0] != dim:
        raise ValueError(f"dimension mismatch: expected {dim}, got {p.shape[0]}")
    return p


def _positive(name: str, value: float) -> float:
    value = float(value)
    if not (math.isfinite(value) and value > 0):
        raise ValueError(f"{name} must be positive and finite, got {value}")
    return value


@dataclass(frozen=True)
class ConvexSet:
    """Closed convex set given by its metric projection."""

    project: Callable[[np.ndarray], np.ndarray]
    dim: int
    description: str = "convex set"

    def contains(self, x, tol: float = 1e-9) -> bool:
        x = as_point(x, self.dim)
        return bool(np.linalg.norm(x - self.project(x)) <= tol)

    def distance(self, x) -> float:
        x = as_point(x, self.dim)
        return float(np.linalg.norm(x - self.project(x)))


@dataclass(frozen=True)
class MaximallyMonotoneOp:
    """A maximally monotone operator known through its resolvents."""

    resolvent: Callable[[float, np.ndarray], np.ndarray]
    dim: int
    description: str = "A"


@dataclass(frozen=True)
class SmoothMap:
    """Single-valued monotone map ``B``.

    ``lipschitz`` is the declared constant ``1/beta``; ``cocoercivity`` is the
    modulus ``beta`` when ``B`` is known to be cocoercive.  ``strong_monotonicity``
    records the modulus picked up by Tikhonov perturbation.
    """

    eval: Callable[[np.ndarray], np.ndarray]
    lipschitz: float
    dim: int
    cocoercivity: float | None = None
    strong_monotonicity: float = 0.0
    description: str = "B"

    def __post_init__(self):
        if not (self.lipschitz >= 0 and math.isfinite(self.lipschitz)):
            raise ValueError(f"lipschitz must be finite and nonnegative, got {self.lipschitz}")
        if self.cocoercivity is not None and not self.cocoercivity > 0:
            raise ValueError("cocoercivity modulus must be positive")

    def __call__(self, x) -> np.ndarray:
        return self.eval(np.asarray(x, dtype=float))

    @property
    def beta(self) -> float:
        """Modulus ``beta``: the cocoercivity if declared, else ``1/lipschitz``."""
        if self.cocoercivity is not None:
            return self.cocoercivity
        return math.inf if self.lipschitz == 0 else 1.0 / self.lipschitz


# ---------------------------------------------------------------------------
# projections and sets
# ---------------------------------------------------------------------------

def project_ball(radius: float, x, center=None) -> np.ndarray:
    """Projection onto the closed ball of the given radius."""
    radius = _positive("radius", radius)
    x = as_point(x)
    c = np.zeros_like(x) if center is None else as_point(center, x.size)
    d = x - c
    n = np.linalg.norm(d)
    if n <= radius:
        return x.copy()
    return c + (radius / n) * d


def project_affine_hyperplane(u, eta: float, x) -> np.ndarray:
    """Projection onto ``{y : <y, u> = eta}``."""
    u = as_point(u)
    x = as_point(x, u.size)
    uu = float(u @ u)
    if uu == 0.0:
        raise ValueError("hyperplane normal must be nonzero")
    return x + ((eta - float(x @ u)) / uu) * u


def project_halfspace(a, b: float, x) -> np.ndarray:
    """Projection onto ``{y : <a, y> >= b}``."""
    a = as_point(a)
    x = as_point(x, a.size)
    aa = float(a @ a)
    if aa == 0.0:
        raise ValueError("halfspace normal must be nonzero")
    gap = b - float(a @ x)
    if gap <= 0:
        return x.copy()
    return x + (gap / aa) * a


def ball(radius: float = 1.0, dim: int = 2, center=None) -> ConvexSet:
    radius = _positive("radius", radius)
    c = None if center is None else as_point(center, dim)
    return ConvexSet(lambda x: project_ball(radius, x, c), dim, f"closed ball r={radius:g}")


def hyperplane(u, eta: float) -> ConvexSet:
    u = as_point(u)
    if not np.any(u):
        raise ValueError("hyperplane normal must be nonzero")
    return ConvexSet(lambda x: project_affine_hyperplane(u, eta, x), u.size,
                     f"hyperplane <x,{u.tolist()}> = {eta:g}")


def halfspace(a, b: float) -> ConvexSet:
    a = as_point(a)
    if not np.any(a):
        raise ValueError("halfspace normal must be nonzero")
    return ConvexSet(lambda x: project_halfspace(a, b, x), a.size,
                     f"halfspace <x,{a.tolist()}> >= {b:g}")


def whole_space(dim: int) -> ConvexSet:
    return ConvexSet(lambda x: np.array(x, dtype=float), dim, f"R^{dim}")


# ---------------------------------------------------------------------------
# monotone operators
# ---------------------------------------------------------------------------

def normal_cone(C: ConvexSet) -> MaximallyMonotoneOp:
    """``N_C``; every resolvent is the projection onto ``C``."""
    return MaximallyMonotoneOp(lambda gamma, x: C.project(x), C.dim, f"N_C, C = {C.description}")


def identity_op(dim: int) -> MaximallyMonotoneOp:
    return MaximallyMonotoneOp(lambda gamma, x: x / (1.0 + gamma), dim, "Id")


def zero_op(dim: int) -> MaximallyMonotoneOp:
    return MaximallyMonotoneOp(lambda gamma, x: np.array(x, dtype=float), dim, "0")


def resolvent_eval(op: MaximallyMonotoneOp, gamma: float, x) -> np.ndarray:
    """``J_{gamma A}(x) = (Id + gamma A)^{-1} x``."""
    gamma = _positive("gamma", gamma)
    x = as_point(x, op.dim)
    return np.asarray(op.resolvent(gamma, x), dtype=float)


def yosida_eval(op: MaximallyMonotoneOp, lam: float, x) -> np.ndarray:
    """Yosida approximation ``(x - J_{lam A} x) / lam``."""
    lam = _positive("lambda", lam)
    x = as_point(x, op.dim)
    return (x - resolvent_eval(op, lam, x)) / lam


# ---------------------------------------------------------------------------
# single-valued maps
# ---------------------------------------------------------------------------

def linear_map(M, cocoercive: bool = False, description: str = "B") -> SmoothMap:
    """``x -> M x`` with the spectral norm as Lipschitz constant.

    For symmetric positive semidefinite ``M`` pass ``cocoercive=True``; the
    modulus is then ``1/||M||`` (Baillon-Haddad).
    """
    M = np.array(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError("linear map needs a square matrix")
    norm = float(np.linalg.norm(M, 2))
    coco = None
    if cocoercive:
        if not np.allclose(M, M.T, atol=1e-12):
            raise ValueError("cocoercive linear maps must be symmetric")
        coco = math.inf if norm == 0 else 1.0 / norm
    return SmoothMap(lambda x: M @ x, norm, M.shape[0], coco, description=description)


def zero_map(dim: int) -> SmoothMap:
    return SmoothMap(lambda x: np.zeros(dim), 0.0, dim, math.inf, description="0")


def shift_map(b) -> SmoothMap:
    """``x -> x - b``: 1-cocoercive, 1-Lipschitz."""
    b = as_point(b)
    return SmoothMap(lambda x: x - b, 1.0, b.size, 1.0, description=f"x - {b.tolist()}")


def perturb(B: SmoothMap, eps: float) -> SmoothMap:
    """Tikhonov perturbation ``B + eps Id``.

    The result is ``eps``-strongly monotone and ``(1/beta + eps)``-Lipschitz.
    Cocoercivity is not propagated.
    """
    eps = float(eps)
    if not (eps >= 0 and math.isfinite(eps)):
        raise ValueError(f"eps must be nonnegative, got {eps}")
    if eps == 0.0:
        return B
    base = B.eval
    return SmoothMap(
        lambda x: base(x) + eps * x,
        B.lipschitz + eps,
        B.dim,
        None,
        strong_monotonicity=B.strong_monotonicity + eps,
        description=f"{B.description} + {eps:g} Id",
    )


# ---------------------------------------------------------------------------
# sampled invariant checks
# ---------------------------------------------------------------------------

def sample_pairs(dim: int, n: int = N_SAMPLE_PAIRS, box: float = SAMPLE_BOX,
                 seed: int = DEFAULT_SEED) -> tuple[np.ndarray, np.ndarray]:
    """Scrambled-Sobol point pairs in ``[-box, box]^dim``."""
    sampler = qmc.Sobol(d=2 * dim, scramble=True, seed=seed)
    m = max(int(math.ceil(math.log2(max(n, 2)))), 1)
    pts = sampler.random_base2(m)[:n]
    pts = (2.0 * pts - 1.0) * box
    return pts[:, :dim], pts[:, dim:]


@dataclass
class SampledCheck:
    name: str
    max_violation: float
    n_samples: int
    tol: float
    details: dict = field(default_factory=dict)
    passed: bool | None = None

    def __post_init__(self):
        if self.passed is None:
            self.passed = self.max_violation <= self.tol


def check_firmly_nonexpansive(op: MaximallyMonotoneOp, gammas=(0.1, 1.0, 10.0),
                              seed: int = DEFAULT_SEED, tol: float = 1e-9) -> SampledCheck:
    X, Y = sample_pairs(op.dim, seed=seed)
    worst = -math.inf
    for g in gammas:
        for x, y in zip(X, Y):
            d = op.resolvent(g, x) - op.resolvent(g, y)
            worst = max(worst, float(d @ d - d @ (x - y)))
    return SampledCheck("firm nonexpansiveness", worst, len(X) * len(gammas), tol)


def check_lipschitz(B: SmoothMap, seed: int = DEFAULT_SEED, rel: float = 1e-9) -> SampledCheck:
    X, Y = sample_pairs(B.dim, seed=seed)
    worst = 0.0
    for x, y in zip(X, Y):
        lhs = np.linalg.norm(B(x) - B(y))
        rhs = B.lipschitz * np.linalg.norm(x - y) * (1.0 + rel)
        worst = max(worst, float(lhs - rhs))
    return SampledCheck("lipschitz", worst, len(X), 0.0)


def check_cocoercive(B: SmoothMap, beta: float | None = None, seed: int = DEFAULT_SEED,
                     tol: float = 1e-9) -> SampledCheck:
    beta = B.cocoercivity if beta is None else beta
    if beta is None:
        raise ValueError("no cocoercivity modulus to check")
    X, Y = sample_pairs(B.dim, seed=seed)
    worst = -math.inf
    for x, y in zip(X, Y):
        d = B(x) - B(y)
        bound = 0.0 if math.isinf(beta) else beta * float(d @ d)
        worst = max(worst, bound - float((x - y) @ d))
    return SampledCheck("cocoercivity", worst, len(X), tol, {"beta": beta})


def check_projection(C: ConvexSet, seed: int = DEFAULT_SEED, tol: float = 1e-9) -> SampledCheck:
    """Idempotence, nonexpansiveness and the variational inequality of ``P_C``."""
    X, Y = sample_pairs(C.dim, seed=seed)
    idem = nonexp = vi = 0.0
    for x, y in zip(X, Y):
        px, py = C.project(x), C.project(y)
        idem = max(idem, float(np.linalg.norm(C.project(px) - px)))
        nonexp = max(nonexp, float(np.linalg.norm(px - py) - np.linalg.norm(x - y)))
        # py is a point of C
        vi = max(vi, float((x - px) @ (py - px)))
    return SampledCheck("projection", max(nonexp, vi), len(X), tol,
                        {"idempotence": idem, "nonexpansive": nonexp, "variational": vi},
                        passed=idem <= 1e-12 and max(nonexp, vi) <= tol)
