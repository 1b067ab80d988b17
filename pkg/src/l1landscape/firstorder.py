"""First-order analysis: directional derivatives, critical cones, sharpness.

The directional derivative of f at u is the support function of the
subdifferential polytope evaluated at the direction. Fixed sign entries of
the residual pattern contribute linearly; each free entry contributes the
absolute value of its coefficient, since the maximizing sign matrix picks
the extreme of every free box independently.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import EPS_ZERO, _pair, as_vector, objective, sign_scalar, subdifferential_model
from .stationarity import GROUND_TRUTH_MINUS, GROUND_TRUTH_PLUS, is_stationary_closed_form

HALF_LINE = "half_line"
FREE = "free"
ZERO = "zero"

EPS_DIR = 1e-9


class NotStationaryError(ValueError):
    """Raised when a cone is requested at a point that is not stationary."""


class GroundTruthConeError(ValueError):
    """Raised when a cone is requested at +-ustar without opting in.

    The critical cone at a nonzero ground truth is {0}; callers that want the
    all-ZERO descriptor instead of an error pass allow_ground_truth=True.
    """


@dataclass(frozen=True)
class CriticalConeDescriptor:
    """Per-coordinate description of {w : df(u)(w) = 0} at a stationary point.

    kinds[j] is HALF_LINE, FREE or ZERO; signs[j] is the sign s of a
    HALF_LINE coordinate, whose condition reads w_j in s * (-inf, 0],
    and 0 for the other two kinds.
    """

    kinds: tuple[str, ...]
    signs: tuple[int, ...]

    @property
    def dim(self) -> int:
        return len(self.kinds)

    def contains(self, w, tol: float = EPS_DIR) -> bool:
        w = as_vector(w)
        if w.size != self.dim:
            raise ValueError("direction dimension mismatch")
        for wj, kind, s in zip(w, self.kinds, self.signs):
            if kind == ZERO and abs(wj) > tol:
                return False
            if kind == HALF_LINE and s * wj > tol:
                return False
        return True

    def sample(self, rng: np.random.Generator, scale: float = 1.0) -> np.ndarray:
        """Random element of the cone (Gaussian magnitudes)."""
        g = rng.standard_normal(self.dim) * scale
        w = np.empty(self.dim)
        for j, (kind, s) in enumerate(zip(self.kinds, self.signs)):
            if kind == ZERO:
                w[j] = 0.0
            elif kind == FREE:
                w[j] = g[j]
            else:
                w[j] = -s * abs(g[j])
        return w


def directional_derivative(u, ustar, w, eps_zero: float = EPS_ZERO) -> float:
    """df(u)(w) = max over the sign boxes of <sym(S) u, w>.

    Fixed entries of the pattern give the linear term <sigma u, w>; a free
    diagonal entry (i,i) adds |u_i w_i| and a free off-diagonal pair {i,j}
    adds |u_i w_j + u_j w_i|, each maximized over its own [-1, 1] box.
    """
    u, ustar = _pair(u, ustar)
    w = as_vector(w)
    if w.size != u.size:
        raise ValueError("direction dimension mismatch")
    model = subdifferential_model(u, ustar, eps_zero)
    total = float(model.fixed_vector() @ w)
    for i, j in model.free_pairs:
        if i == j:
            total += abs(u[i] * w[i])
        else:
            total += abs(u[i] * w[j] + u[j] * w[i])
    return total


def critical_cone(u, ustar, eps_zero: float = EPS_ZERO,
                  allow_ground_truth: bool = False) -> CriticalConeDescriptor:
    """Closed-form critical cone at a stationary point of f.

    At u = 0 the cone is all of R^n. At a spurious point u != 0 coordinate j
    is ZERO off the support of ustar, HALF_LINE(Sign(u_j)) where |u_j| meets
    the box bound |ustar_j|, and FREE where it sits strictly inside. Ground
    truths are rejected (their cone is {0}) unless allow_ground_truth is set,
    which returns the all-ZERO descriptor.
    """
    u, ustar = _pair(u, ustar)
    verdict = is_stationary_closed_form(u, ustar, eps_zero)
    if not verdict.is_stationary:
        raise NotStationaryError("critical cone is defined at stationary points only")
    if verdict.kind in (GROUND_TRUTH_PLUS, GROUND_TRUTH_MINUS):
        if not allow_ground_truth:
            raise GroundTruthConeError(
                "critical cone at a ground truth is {0}; "
                "pass allow_ground_truth=True for the all-ZERO descriptor")
        return CriticalConeDescriptor((ZERO,) * u.size, (0,) * u.size)

    if np.abs(u).max() <= eps_zero:
        return CriticalConeDescriptor((FREE,) * u.size, (0,) * u.size)

    kinds = []
    signs = []
    for j in range(u.size):
        if abs(ustar[j]) <= eps_zero:
            kinds.append(ZERO)
            signs.append(0)
        elif abs(u[j]) >= abs(ustar[j]) - eps_zero:
            kinds.append(HALF_LINE)
            signs.append(sign_scalar(u[j]))
        else:
            kinds.append(FREE)
            signs.append(0)
    return CriticalConeDescriptor(tuple(kinds), tuple(signs))


def cone_membership(u, ustar, w, eps_zero: float = EPS_ZERO,
                    allow_ground_truth: bool = False) -> bool:
    cone = critical_cone(u, ustar, eps_zero, allow_ground_truth)
    return cone.contains(w)


def sharpness_coefficient(ustar) -> float:
    """Coefficient of the l1 sharpness bound df(ustar)(w) >= coeff * ||w||_1."""
    ustar = as_vector(ustar)
    support = np.flatnonzero(ustar)
    if support.size == 0:
        raise ValueError("ustar must be nonzero")
    alpha = float(np.abs(ustar[support]).min())
    return min(alpha, 0.5 * alpha * support.size)


@dataclass
class GrowthReport:
    samples: int
    violations: int
    min_margin: float
    radius: float
    beta: float


def growth_check(ustar, radius: float, samples: int, seed: int = 0) -> GrowthReport:
    """Sample the local growth inequality f(u) >= f(ustar) + beta ||u - ustar||_1.

    Points are uniform in the l-infinity ball of the given radius around
    ustar, one rng stream per sample so the report does not depend on
    evaluation order. beta is half the sharpness coefficient, a conservative
    margin below the first-order rate.
    """
    ustar = as_vector(ustar)
    if radius <= 0.0:
        raise ValueError("radius must be positive")
    beta = 0.5 * sharpness_coefficient(ustar)
    f_star = objective(ustar, ustar)
    violations = 0
    min_margin = np.inf
    for t in range(samples):
        rng = np.random.default_rng([seed, t])
        u = ustar + rng.uniform(-radius, radius, ustar.size)
        margin = objective(u, ustar) - f_star - beta * float(np.abs(u - ustar).sum())
        if margin < 0.0:
            violations += 1
        min_margin = min(min_margin, margin)
    if samples == 0:
        min_margin = 0.0
    return GrowthReport(samples, violations, float(min_margin), radius, beta)
