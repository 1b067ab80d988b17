"""Second-order analysis of f(u) = 0.5 ||u u^T - ustar ustar^T||_1.

At a stationary point the second subderivative of f at u for v = 0 is +inf
off the critical cone and otherwise equals

    d2f(u;0)(w) = max { <Q, w w^T> : Q in Q(u) },

where Q(u) collects the symmetric matrices inside the residual sign boxes
that annihilate u. At a spurious point the face is (on the support of ustar)
the singleton -Sign(ustar ustar^T), which gives the escape value
-||ustar||_1^2 along w = +-ustar - u. The numeric estimator approximates the
liminf defining the subderivative directly from objective values and is used
to cross-check the linear-programming route.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import EPS_ZERO, MIDPOINT, _pair, as_vector, objective, subdifferential_model, subgradient_select
from .firstorder import EPS_DIR, NotStationaryError, directional_derivative
from .lpcore import (
    EPS_LP,
    OPTIMAL,
    BoxEqLP,
    NumericalFailureError,
    feasibility_min_infinity_norm,
    solve,
)
from .stationarity import (
    GROUND_TRUTH_MINUS,
    GROUND_TRUTH_PLUS,
    SPURIOUS,
    is_stationary_closed_form,
)

GLOBAL_MIN = "global_min"
SPURIOUS_STATIONARY = "spurious_stationary"
NOT_STATIONARY = "not_stationary"

# Numeric estimator defaults: geometric t-ladder and a ball around the
# direction whose radius shrinks with t (the liminf ranges over w' -> w).
T0 = 1e-2
RHO = 0.5
K_MAX = 12
DELTA_W = 1e-3
BALL_SAMPLES = 64


@dataclass
class SecondOrderFace:
    """The matrices Q in Sign(residual) ∩ Sym with Q u = 0, parametrized.

    fixed_part holds the sign-determined entries (zeros elsewhere); each free
    pair contributes one coordinate in [-1, 1]; kernel_matrix @ v =
    kernel_rhs expresses Q u = 0 over those coordinates.
    """

    fixed_part: np.ndarray = field(repr=False)
    free_pairs: list[tuple[int, int]]
    kernel_matrix: np.ndarray = field(repr=False)
    kernel_rhs: np.ndarray = field(repr=False)
    base_point: np.ndarray = field(repr=False)

    def member(self, free_values) -> np.ndarray:
        free_values = np.asarray(free_values, dtype=float)
        q = self.fixed_part.copy()
        for (i, j), v in zip(self.free_pairs, free_values):
            q[i, j] = v
            q[j, i] = v
        return q

    def contains(self, q, eps_lp: float = EPS_LP) -> bool:
        q = np.asarray(q, dtype=float)
        if not np.allclose(q, q.T, atol=eps_lp):
            return False
        free = np.zeros(self.fixed_part.shape, dtype=bool)
        for i, j in self.free_pairs:
            free[i, j] = True
            free[j, i] = True
        if np.abs(np.where(free, 0.0, q - self.fixed_part)).max() > eps_lp:
            return False
        if np.abs(q[free]).max(initial=0.0) > 1.0 + eps_lp:
            return False
        return float(np.abs(q @ self.base_point).max()) <= eps_lp


def second_order_face(u, ustar, eps_zero: float = EPS_ZERO) -> SecondOrderFace:
    u, ustar = _pair(u, ustar)
    model = subdifferential_model(u, ustar, eps_zero)
    return SecondOrderFace(
        fixed_part=model.fixed_sign.astype(float),
        free_pairs=list(model.free_pairs),
        kernel_matrix=model.pair_matrix(),
        kernel_rhs=-model.fixed_vector(),
        base_point=u,
    )


def _require_stationary(u, ustar, eps_zero):
    verdict = is_stationary_closed_form(u, ustar, eps_zero)
    if not verdict.is_stationary:
        raise NotStationaryError("second subderivative at v = 0 requires a stationary point")
    return verdict


def second_subderivative(u, ustar, w, eps_zero: float = EPS_ZERO,
                         eps_lp: float = EPS_LP) -> float:
    """d2f(u;0)(w): +inf off the critical cone, else an LP over the face.

    The face objective <Q, w w^T> splits into the fixed-entry constant plus
    w_i^2 per free diagonal coordinate and 2 w_i w_j per free off-diagonal
    pair.
    """
    u, ustar = _pair(u, ustar)
    w = as_vector(w)
    if w.size != u.size:
        raise ValueError("direction dimension mismatch")
    _require_stationary(u, ustar, eps_zero)

    if directional_derivative(u, ustar, w, eps_zero) > EPS_DIR:
        return math.inf

    face = second_order_face(u, ustar, eps_zero)
    constant = float(w @ face.fixed_part @ w)
    p = len(face.free_pairs)
    if p == 0:
        return constant
    coeffs = np.array([w[i] * w[j] if i == j else 2.0 * w[i] * w[j]
                       for i, j in face.free_pairs])
    lp = BoxEqLP(-np.ones(p), np.ones(p), face.kernel_matrix, face.kernel_rhs, coeffs)
    res = solve(lp, eps_lp)
    if res.status != OPTIMAL:
        raise NumericalFailureError(f"face LP ended with status {res.status}")
    return constant + res.value


def escape_curvature(u, ustar, eps_zero: float = EPS_ZERO,
                     eps_lp: float = EPS_LP):
    """Escape direction w = ustar - u at a spurious point, with its curvature.

    The value is -||ustar||_1^2; the LP route must reproduce it to 1e-9,
    otherwise something is inconsistent and we refuse to return.
    """
    u, ustar = _pair(u, ustar)
    verdict = _require_stationary(u, ustar, eps_zero)
    if verdict.kind != SPURIOUS:
        raise ValueError("escape curvature is defined at spurious stationary points")
    w = ustar - u
    value = second_subderivative(u, ustar, w, eps_zero, eps_lp)
    expected = -float(np.abs(ustar).sum()) ** 2
    if abs(value - expected) > 1e-9:
        raise ArithmeticError(
            f"curvature {value} disagrees with -||ustar||_1^2 = {expected}")
    return w, value


def second_subderivative_numeric(u, ustar, w, t0: float = T0, rho: float = RHO,
                                 k_max: int = K_MAX, delta_w: float | None = None,
                                 ball_samples: int = BALL_SAMPLES,
                                 seed: int = 0) -> float:
    """Grid estimate of liminf [f(u + t w') - f(u)] / (t^2 / 2).

    For each t = t0 * rho^k the direction cloud is w itself plus
    ball_samples points uniform in the ball of radius delta_w * t around w;
    the estimate is the minimum quotient over the whole grid. Sample draws
    are keyed by k so enlarging k_max or ball_samples only extends the grid,
    never reshuffles it, keeping the estimate monotone in both parameters.
    """
    u, ustar = _pair(u, ustar)
    w = as_vector(w)
    if delta_w is None:
        delta_w = DELTA_W * float(np.linalg.norm(w))
    f0 = objective(u, ustar)
    best = math.inf
    for k in range(k_max + 1):
        t = t0 * rho ** k
        rng = np.random.default_rng([seed, k])
        cloud = [w]
        for _ in range(ball_samples):
            g = rng.standard_normal(w.size)
            norm = float(np.linalg.norm(g))
            radius = delta_w * t * rng.uniform() ** (1.0 / max(w.size, 1))
            cloud.append(w if norm == 0.0 else w + radius * g / norm)
        for wp in cloud:
            quotient = (objective(u + t * wp, ustar) - f0) / (0.5 * t * t)
            best = min(best, quotient)
    return best


@dataclass
class PointClassification:
    kind: str
    escape_direction: np.ndarray | None = None
    curvature: float | None = None
    descent_direction: np.ndarray | None = None


def _steepest_descent_lp(u, ustar, eps_zero, eps_lp):
    """min df(u)(w) over the box ||w||_inf <= 1, negative iff u not stationary.

    Each free-pair term |L_d(w)| is split as p_d - q_d with p, q >= 0, so the
    LP maximizes -<c0, w> - sum(p + q); by separation the optimum is < 0
    exactly when 0 lies outside the subdifferential.
    """
    model = subdifferential_model(u, ustar, eps_zero)
    n = u.size
    p = len(model.free_pairs)
    c0 = model.fixed_vector()
    m = model.pair_matrix()

    # Rows: L_d(w) - p_d + q_d = 0, one per free pair. L_d(w) = column d of
    # m(u) evaluated against w, i.e. m[:, d] dot w by the pair symmetry.
    a = np.zeros((p, n + 2 * p))
    bound = np.empty(p)
    for d, (i, j) in enumerate(model.free_pairs):
        a[d, :n] = m[:, d]
        a[d, n + d] = -1.0
        a[d, n + p + d] = 1.0
        bound[d] = abs(u[i]) if i == j else abs(u[i]) + abs(u[j])
    lower = np.concatenate([-np.ones(n), np.zeros(2 * p)])
    upper = np.concatenate([np.ones(n), bound, bound])
    obj = np.concatenate([-c0, -np.ones(2 * p)])
    res = solve(BoxEqLP(lower, upper, a, np.zeros(p), obj), eps_lp)
    if res.status != OPTIMAL:
        raise NumericalFailureError(f"descent LP ended with status {res.status}")
    return -res.value, res.solution[:n]


def classify_point(u, ustar, eps_zero: float = EPS_ZERO,
                   eps_lp: float = EPS_LP) -> PointClassification:
    """Global minimum, spurious stationary point, or descent direction.

    Second-order stationarity singles out the global minima, so every
    spurious point ships with an escape direction of negative curvature and
    every non-stationary point with a verified descent direction. The descent
    direction is the negated midpoint subgradient when that works; otherwise
    the minimum-infinity-norm subdifferential element, and as a last resort
    the direction minimizing df(u) over the unit box, which is negative by
    separation whenever 0 is outside the subdifferential.
    """
    u, ustar = _pair(u, ustar)
    verdict = is_stationary_closed_form(u, ustar, eps_zero)
    if verdict.kind in (GROUND_TRUTH_PLUS, GROUND_TRUTH_MINUS):
        return PointClassification(GLOBAL_MIN)
    if verdict.kind == SPURIOUS:
        if np.abs(ustar).max() <= eps_zero:
            # ustar = 0 makes u = 0 the unique stationary point and the
            # global minimum; there is nothing to escape from.
            return PointClassification(GLOBAL_MIN)
        w, value = escape_curvature(u, ustar, eps_zero, eps_lp)
        return PointClassification(SPURIOUS_STATIONARY, escape_direction=w, curvature=value)

    def descend_along(g):
        norm = float(np.linalg.norm(g))
        if norm <= eps_zero:
            return None
        d = -g / norm
        if directional_derivative(u, ustar, d, eps_zero) < -EPS_DIR:
            return d
        return None

    d = descend_along(subgradient_select(u, ustar, MIDPOINT, eps_zero))
    if d is None:
        model = subdifferential_model(u, ustar, eps_zero)
        a = np.hstack([model.fixed_vector()[:, None], model.pair_matrix()])
        lower = np.concatenate([[1.0], -np.ones(len(model.free_pairs))])
        _, point = feasibility_min_infinity_norm(lower, np.ones(lower.size), a,
                                                 eps_lp, return_point=True)
        d = descend_along(a @ point)
    if d is None:
        value, w = _steepest_descent_lp(u, ustar, eps_zero, eps_lp)
        if value < -EPS_DIR:
            d = w / float(np.linalg.norm(w))
    if d is None:
        raise ArithmeticError("no certified descent direction at a point "
                              "the closed form labels non-stationary")
    return PointClassification(NOT_STATIONARY, descent_direction=d)
