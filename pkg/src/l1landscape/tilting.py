"""Tilt counterexamples: two scalar weakly convex functions and a tilted f.

Both scalar functions have bounded, countable stationary structure that a
linear tilt reshapes drastically. The first is smooth with compact plateaus,
so any nonzero tilt pushes its minimizers to infinity. The second has kinks
on the integers, and a tilt of size below 1 turns countably many of them
into sharp local minima at once. The same tilting applied to
f(u) = 0.5 ||u u^T - ustar ustar^T||_1 turns a spurious stationary point
into a sharp local minimum for an open box of tilt vectors.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .core import EPS_ZERO, as_vector, subdifferential_model
from .dynamics import StepSchedule

EX41 = "ex41"
EX42 = "ex42"

ESCAPE_THRESHOLD = 1e3


def eval_ex41(x: float):
    """Smooth plateau function: value and derivative.

    Flat at 0.5 outside [-2, 2], two downward parabolic shoulders, one
    upward parabolic well touching -0.5 at the origin. The derivative is
    continuous and 1-Lipschitz.
    """
    x = float(x)
    if x <= -2.0:
        return 0.5, 0.0
    if x <= -1.0:
        return -((x + 2.0) ** 2) / 2.0 + 0.5, -(x + 2.0)
    if x <= 1.0:
        return x * x / 2.0 - 0.5, x
    if x <= 2.0:
        return -((x - 2.0) ** 2) / 2.0 + 0.5, -(x - 2.0)
    return 0.5, 0.0


def eval_ex42(x: float):
    """Sawtooth of parabolic arcs: value and Fréchet subdifferential interval.

    Between consecutive integers the function is a downward parabola; each
    integer is a kink. The interval is a singleton off the integers, [0, 1]
    at positive integers, [-1, 0] at negative ones, and [-1, 1] at 0, which
    is the global minimum. Branch edges follow the defining formulas
    literally: the x <= 0 branch owns x = 0 and floor is exact on integers.
    """
    x = float(x)
    if x <= 0.0:
        m = math.floor(-x)
        value = -((x + m + 1.0) ** 2) / 2.0 + 0.5 + m / 2.0
    else:
        m = math.floor(x)
        value = -((x - m - 1.0) ** 2) / 2.0 + 0.5 + m / 2.0

    if x == 0.0:
        interval = (-1.0, 1.0)
    elif x == math.floor(x):
        interval = (0.0, 1.0) if x > 0.0 else (-1.0, 0.0)
    elif x > 0.0:
        v = -(x - math.floor(x)) + 1.0
        interval = (v, v)
    else:
        v = -(x - math.floor(x))
        interval = (v, v)
    return value, interval


_SCALAR_FNS = (EX41, EX42)


def _subdifferential_interval(fn: str, x: float):
    if fn == EX41:
        _, slope = eval_ex41(x)
        return slope, slope
    if fn == EX42:
        return eval_ex42(x)[1]
    raise ValueError(f"unknown scalar function {fn!r}")


def certify_sharp_local_min_1d(fn: str, x0: float, a: float):
    """Is x0 a sharp local minimum of g(x) - a x, and with what modulus?

    The tilted subdifferential interval is [lo - a, hi - a]; sharpness needs
    0 strictly inside, and the modulus is the smaller endpoint distance,
    min(a - lo, hi - a). Smooth points have a degenerate interval and never
    certify.
    """
    lo, hi = _subdifferential_interval(fn, float(x0))
    modulus = min(float(a) - lo, hi - float(a))
    if modulus > 0.0:
        return True, modulus
    return False, 0.0


def certify_sharp_local_min_tilted_f(ustar, u0, a, eps_zero: float = EPS_ZERO):
    """Sharp-local-minimum certificate for f(u) - <a, u> at u0 = +-(-1, 1).

    The instance is fixed: ustar = (1, 1) and u0 one of the two spurious
    corners (-1, 1), (1, -1). There the subdifferential of f is a coordinate
    box (each free residual entry is diagonal, touching one coordinate), so
    the tilted subdifferential is the box shifted by -a and the certificate
    checks that 0 is interior to both coordinate intervals.
    """
    ustar = as_vector(ustar)
    u0 = as_vector(u0)
    a = as_vector(a)
    corner = np.array([-1.0, 1.0])
    if ustar.shape != (2,) or not np.allclose(ustar, [1.0, 1.0], atol=eps_zero):
        raise ValueError("this certificate covers ustar = (1, 1) only")
    if not (np.allclose(u0, corner, atol=eps_zero)
            or np.allclose(u0, -corner, atol=eps_zero)):
        raise ValueError("this certificate covers u0 = +-(-1, 1) only")
    if a.shape != (2,):
        raise ValueError("tilt must be a 2-vector")

    model = subdifferential_model(u0, ustar, eps_zero)
    lo = model.fixed_vector().copy()
    hi = lo.copy()
    for i, j in model.free_pairs:
        if i != j:
            raise ValueError("instance has a non-diagonal free entry; "
                             "the box description does not apply")
        lo[i] -= abs(u0[i])
        hi[i] += abs(u0[i])
    lo -= a
    hi -= a
    modulus = float(np.minimum(-lo, hi).min())
    if modulus > 0.0:
        return True, modulus
    return False, 0.0


@dataclass
class TiltProbeReport:
    final_x: float
    iterations: int
    escaped: bool
    threshold: float
    tilt: float


def tilt_divergence_probe_ex41(a: float, x0: float, schedule: StepSchedule,
                               max_iters: int,
                               threshold: float = ESCAPE_THRESHOLD) -> TiltProbeReport:
    """Gradient descent on the tilted plateau function, watching for escape.

    With any a != 0 the tilted function has no minimizer: beyond the plateau
    edge the gradient is the constant -a, so a non-summable schedule drifts
    the iterate toward Sign(a) * infinity. The run stops as soon as |x|
    passes the threshold and reports the last iterate either way. a = 0 is
    allowed for contrast runs; then x0 = 0 is a genuine global minimum and
    nothing moves.
    """
    x = float(x0)
    a = float(a)
    iterations = 0
    for k in range(1, max_iters + 1):
        if abs(x) > threshold:
            break
        _, slope = eval_ex41(x)
        x -= schedule.step(k) * (slope - a)
        iterations = k
    return TiltProbeReport(x, iterations, abs(x) > threshold, threshold, a)


def write_tilt_samples_csv(fn: str, a: float, xs, fileobj) -> None:
    """Rows x, g, h_a over the sample points, for plotting tilted landscapes."""
    evaluate = {EX41: lambda x: eval_ex41(x)[0], EX42: lambda x: eval_ex42(x)[0]}
    if fn not in evaluate:
        raise ValueError(f"unknown scalar function {fn!r}")
    writer = csv.writer(fileobj)
    writer.writerow(["x", "g", "h_a"])
    for x in np.asarray(xs, dtype=float):
        g = evaluate[fn](float(x))
        writer.writerow([f"{x:.17g}", f"{g:.17g}", f"{g - a * x:.17g}"])
