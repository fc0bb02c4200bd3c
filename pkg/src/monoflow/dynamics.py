"""Right-hand sides of the regularized flows for ``0 in Ax + Bx``.

Every field is a pure function ``f(t, x)``.  Hypothesis violations detected at
evaluation time (relaxation outside its range, step above the admissible
bound) are returned as warnings on the :class:`FieldValue`, never raised, so
that non-admissible parameters can still be explored.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .operators import ConvexSet, MaximallyMonotoneOp, SmoothMap, as_point
from .schedules import ScheduleSet

VARIANTS = ("KM_reg", "KM_anchored", "FB_outer", "FB_inner", "FBF_reg", "FBF_plain")
KM_VARIANTS = ("KM_reg", "KM_anchored")
SPLITTING_VARIANTS = ("FB_outer", "FB_inner", "FBF_reg", "FBF_plain")

# how far inside a range a value may sit before it is flagged
RANGE_SLACK = 1e-12


class ConfigError(ValueError):
    """A field specification violates one or more hard constraints."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


def normalize_variant(name: str) -> str:
    for v in VARIANTS:
        if name.lower() == v.lower():
            return v
    raise ConfigError([f"unknown variant {name!r}; expected one of {', '.join(VARIANTS)}"])


@dataclass(frozen=True)
class FieldValue:
    f: np.ndarray
    z: np.ndarray | None = None
    warnings: tuple[str, ...] = ()


@dataclass(frozen=True)
class FieldSpec:
    variant: str
    schedules: ScheduleSet
    A: MaximallyMonotoneOp | None = None
    B: SmoothMap | None = None
    T: Callable | None = None
    anchor_y: np.ndarray | None = None
    domain_D: ConvexSet | None = None
    dim: int | None = None

    def __post_init__(self):
        bad = []
        try:
            object.__setattr__(self, "variant", normalize_variant(self.variant))
        except ConfigError as exc:
            raise ConfigError(exc.violations) from None
        v, s = self.variant, self.schedules
        if v in KM_VARIANTS:
            if self.T is None:
                bad.append(f"{v} needs a nonexpansive map T")
            if v == "KM_anchored" and self.anchor_y is None:
                bad.append("KM_anchored needs an anchor point y")
        else:
            if self.A is None:
                bad.append(f"{v} needs the maximally monotone operator A")
            if self.B is None:
                bad.append(f"{v} needs the single-valued operator B")
        if v in ("FB_outer", "FB_inner") and self.B is not None and self.B.cocoercivity is None:
            bad.append(f"{v} needs B cocoercive (no cocoercivity modulus declared)")
        if not (s.beta > 0):
            bad.append(f"beta must be positive, got {s.beta}")
        if v == "FB_outer":
            if not s.gam.is_constant():
                bad.append(f"FB_outer needs a constant gamma, got {s.gam}")
            else:
                g = float(s.gam(0.0))
                if not g > 0:
                    bad.append(f"gamma={g:g} must be positive")
                elif not g < 2 * s.beta:
                    bad.append(f"gamma={g:g} exceeds 2beta={2 * s.beta:g}")
        if v == "FB_inner" and s.gam.is_constant():
            g = float(s.gam(0.0))
            if not 0 < g < 2 * s.beta:
                bad.append(f"gamma={g:g} outside (0, 2beta) = (0, {2 * s.beta:g})")
        if v in ("FBF_reg", "FBF_plain") and s.gam.is_constant() and s.beta > 0:
            g = float(s.gam(0.0))
            # the step bound beta/(eps beta + 1) stays below beta for every eps >= 0
            if not 0 < g < s.beta:
                bad.append(f"gamma={g:g} outside (0, beta) = (0, {s.beta:g})")
        if v not in ("FBF_reg", "FBF_plain") and s.lam.is_constant() and s.beta > 0:
            lam = float(s.lam(0.0))
            lam_max = 1.0
            if v == "FB_outer" and s.gam.is_constant():
                lam_max = (4 * s.beta - float(s.gam(0.0))) / (2 * s.beta)
            if not 0 < lam <= lam_max:
                bad.append(f"lambda={lam:g} outside (0, {lam_max:g}]")
        dims = {}
        if self.A is not None:
            dims["A"] = self.A.dim
        if self.B is not None:
            dims["B"] = self.B.dim
        if self.domain_D is not None:
            dims["D"] = self.domain_D.dim
        if self.anchor_y is not None:
            y = as_point(self.anchor_y)
            object.__setattr__(self, "anchor_y", y)
            dims["y"] = y.size
        if self.dim is not None:
            dims["dim"] = self.dim
        if len(set(dims.values())) > 1:
            bad.append("dimension mismatch: " + ", ".join(f"{k}={d}" for k, d in dims.items()))
        if v == "KM_anchored" and self.domain_D is not None and self.anchor_y is not None \
                and len(set(dims.values())) <= 1 and not self.domain_D.contains(self.anchor_y, 1e-9):
            bad.append("anchor y must lie in D")
        if bad:
            raise ConfigError(bad)
        if self.dim is None and dims:
            object.__setattr__(self, "dim", next(iter(dims.values())))

    def __call__(self, t: float, x: np.ndarray) -> np.ndarray:
        return evaluate(self, t, x, check=False).f


# ---------------------------------------------------------------------------
# building blocks shared with the oracle and the audits
# ---------------------------------------------------------------------------

def fbf_plain_field(A: MaximallyMonotoneOp, B: SmoothMap, gamma: float, x) -> np.ndarray:
    """``(Id - gB) J_{gA} (Id - gB) x + g Bx - x``."""
    x = np.asarray(x, dtype=float)
    Bx = B.eval(x)
    z = A.resolvent(gamma, x - gamma * Bx)
    return z - gamma * B.eval(z) + gamma * Bx - x


def fbf_regularized_parts(A, B, gamma, eps, x):
    """Return ``(z, V)`` with ``z = J(x - g(Bx + ex))`` and ``V`` the regularized field."""
    x = np.asarray(x, dtype=float)
    Bex = B.eval(x) + eps * x
    z = A.resolvent(gamma, x - gamma * Bex)
    return z, z - x + gamma * (Bex - (B.eval(z) + eps * z))


def fbf_regularized_field(A, B, gamma: float, eps: float, x) -> np.ndarray:
    return fbf_regularized_parts(A, B, gamma, eps, x)[1]


def fbf_residual(A, B, gamma: float, eps: float, x) -> np.ndarray:
    """``R`` with ``V_{eps,gamma}(x) = V_gamma(x) + R(x)`` exactly.

    With ``z0 = J(x - g Bx)`` and ``ze = J(x - g(Bx + ex))``::

        R = g(B z0 - B ze) + g e (x - ze) + (ze - z0)

    The last term is what makes the split exact; it vanishes with ``eps``.
    """
    x = np.asarray(x, dtype=float)
    Bx = B.eval(x)
    z0 = A.resolvent(gamma, x - gamma * Bx)
    ze = A.resolvent(gamma, x - gamma * (Bx + eps * x))
    return fbf_residual_two_term(A, B, gamma, eps, x) + (ze - z0)


def fbf_residual_two_term(A, B, gamma: float, eps: float, x) -> np.ndarray:
    """``g(B z0 - B ze) + g e (x - ze)`` without the resolvent-shift term."""
    x = np.asarray(x, dtype=float)
    Bx = B.eval(x)
    z0 = A.resolvent(gamma, x - gamma * Bx)
    ze = A.resolvent(gamma, x - gamma * (Bx + eps * x))
    return gamma * (B.eval(z0) - B.eval(ze)) + gamma * eps * (x - ze)


def fbf_growth_constant(A, B, pairs, xbar) -> float:
    """``K`` in ``||V(x)|| <= K (1 + ||x||)`` over the given ``(eps, gamma)`` pairs.

    Uses the Lipschitz bound ``sqrt 6`` and ``M = max ||V(xbar)||`` over the pairs.
    """
    xbar = np.asarray(xbar, dtype=float)
    M = max(float(np.linalg.norm(fbf_regularized_field(A, B, g, e, xbar))) for e, g in pairs)
    return max(math.sqrt(6.0), M + math.sqrt(6.0) * float(np.linalg.norm(xbar)))


def fb_step_bound(beta: float, eps: float) -> float:
    """Largest admissible inner-regularized step ``2 beta/(1 + 2 beta eps)``."""
    return 2 * beta / (1 + 2 * beta * eps)


def fbf_step_bound(beta: float, eps: float) -> float:
    """Strict upper bound ``beta/(eps beta + 1)`` on the FBF step."""
    return beta / (eps * beta + 1)


# ---------------------------------------------------------------------------
# fields
# ---------------------------------------------------------------------------

def _lambda_warning(lam: float, upper: float, t: float) -> list[str]:
    if lam <= 0 or lam > upper + RANGE_SLACK:
        return [f"lambda({t:g})={lam:g} outside (0, {upper:g}]"]
    return []


def _require(spec: FieldSpec, *variants):
    if spec.variant not in variants:
        raise ConfigError([f"field for {'/'.join(variants)} called with variant {spec.variant}"])


def km_field(spec: FieldSpec, t: float, x, check: bool = True) -> FieldValue:
    """``lam (T x - x) - eps x``."""
    _require(spec, "KM_reg")
    s = spec.schedules
    lam, eps = float(s.lam(t)), float(s.eps(t))
    x = np.asarray(x, dtype=float)
    f = lam * (spec.T(x) - x) - eps * x
    return FieldValue(f, None, tuple(_lambda_warning(lam, 1.0, t)) if check else ())


def km_anchored_field(spec: FieldSpec, t: float, x, check: bool = True) -> FieldValue:
    """``lam (T x - x) - eps (x - y)``."""
    _require(spec, "KM_anchored")
    s = spec.schedules
    lam, eps = float(s.lam(t)), float(s.eps(t))
    x = np.asarray(x, dtype=float)
    f = lam * (spec.T(x) - x) - eps * (x - spec.anchor_y)
    return FieldValue(f, None, tuple(_lambda_warning(lam, 1.0, t)) if check else ())


def fb_outer_field(spec: FieldSpec, t: float, x, check: bool = True) -> FieldValue:
    """``lam (J_{gA}(x - g Bx) - x) - eps x`` with constant step ``g``."""
    _require(spec, "FB_outer")
    s = spec.schedules
    lam, eps, g = float(s.lam(t)), float(s.eps(t)), float(s.gam(t))
    x = np.asarray(x, dtype=float)
    z = spec.A.resolvent(g, x - g * spec.B.eval(x))
    f = lam * (z - x) - eps * x
    warns = []
    if check:
        upper = (4 * s.beta - g) / (2 * s.beta)
        if lam < 0 or lam > upper + RANGE_SLACK:
            warns.append(f"lambda({t:g})={lam:g} outside [0, {upper:g}]")
    return FieldValue(f, z, tuple(warns))


def fb_inner_field(spec: FieldSpec, t: float, x, check: bool = True) -> FieldValue:
    """``lam (J_{gA}(x - g(Bx + eps x)) - x)``."""
    _require(spec, "FB_inner")
    s = spec.schedules
    lam, eps, g = float(s.lam(t)), float(s.eps(t)), float(s.gam(t))
    x = np.asarray(x, dtype=float)
    z = spec.A.resolvent(g, x - g * (spec.B.eval(x) + eps * x))
    f = lam * (z - x)
    warns = []
    if check:
        warns += _lambda_warning(lam, 1.0, t)
        if not 0 < g < 2 * s.beta:
            warns.append(f"gamma({t:g})={g:g} outside (0, {2 * s.beta:g})")
        bound = fb_step_bound(s.beta, eps)
        if g > bound + RANGE_SLACK:
            warns.append(f"gamma({t:g})={g:g} exceeds step bound {bound:g}")
    return FieldValue(f, z, tuple(warns))


def fbf_field(spec: FieldSpec, t: float, x, check: bool = True) -> FieldValue:
    """Regularized forward-backward-forward field and its intermediate point."""
    _require(spec, "FBF_reg", "FBF_plain")
    s = spec.schedules
    eps = 0.0 if spec.variant == "FBF_plain" else float(s.eps(t))
    g = float(s.gam(t))
    z, f = fbf_regularized_parts(spec.A, spec.B, g, eps, x)
    warns = []
    if check:
        bound = fbf_step_bound(s.beta, eps)
        if not 0 < g < bound:
            warns.append(f"gamma({t:g})={g:g} outside (0, {bound:g})")
    return FieldValue(f, z, tuple(warns))


_DISPATCH = {
    "KM_reg": km_field,
    "KM_anchored": km_anchored_field,
    "FB_outer": fb_outer_field,
    "FB_inner": fb_inner_field,
    "FBF_reg": fbf_field,
    "FBF_plain": fbf_field,
}


def evaluate(spec: FieldSpec, t: float, x, check: bool = True) -> FieldValue:
    return _DISPATCH[spec.variant](spec, t, x, check)


def regularization_strength(spec: FieldSpec, t: float) -> float:
    """The ``eps`` whose regularized zero the flow tracks at time ``t``."""
    return 0.0 if spec.variant == "FBF_plain" else float(spec.schedules.eps(t))
