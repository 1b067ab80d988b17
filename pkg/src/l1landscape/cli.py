"""Command-line front end: certificates, dynamics runs, and figure emission.

Exit codes: 0 success, 1 usage or configuration error, 2 internal
consistency failure (the two stationarity certifiers disagree), 3 numerical
failure inside the LP machinery. Configuration precedence is CLI flag over
--config JSON over built-in default.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import re
import sys

import numpy as np

from .core import EPS_ZERO
from .dynamics import (
    DEFAULT_MAX_ITERS,
    DEFAULT_TAU_SUCC,
    DEFAULT_TAU_TRAP,
    GEOMETRIC,
    INV_K,
    INV_SQRT_K,
    GridSpec,
    StepSchedule,
    conjecture_probe,
    flow_field,
    run_subgradient,
    write_trajectory_csv,
)
from .firstorder import growth_check
from .lpcore import EPS_LP, NumericalFailureError
from .secondorder import classify_point
from .stationarity import (
    expected_gaussian_separation,
    gaussian_separation,
    is_stationary_closed_form,
    is_stationary_lp,
)
from .tilting import (
    ESCAPE_THRESHOLD,
    EX41,
    EX42,
    certify_sharp_local_min_1d,
    certify_sharp_local_min_tilted_f,
    tilt_divergence_probe_ex41,
    write_tilt_samples_csv,
)


class _Parser(argparse.ArgumentParser):
    """argparse exits with 2 on bad usage; the contract here reserves 2 for
    consistency failures, so usage errors are remapped to 1."""

    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        # Vector values like -1,1 must parse as values, not option names;
        # widen the stock negative-number test to anything starting -digit.
        self._negative_number_matcher = re.compile(r"^-\.?\d")

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def parse_vector(text) -> np.ndarray:
    if isinstance(text, (list, tuple)):
        return np.asarray([float(v) for v in text])
    try:
        return np.asarray([float(part) for part in str(text).split(",")])
    except ValueError:
        raise ValueError(f"expected comma-separated reals, got {text!r}")


def parse_schedule(text) -> StepSchedule:
    """kind:c or geometric:c:q, e.g. inv_sqrt_k:0.1 (dashes in kind ok)."""
    if isinstance(text, StepSchedule):
        return text
    parts = str(text).split(":")
    kind = parts[0].replace("-", "_").lower()
    if kind not in (INV_K, INV_SQRT_K, GEOMETRIC):
        raise ValueError(f"unknown schedule kind {parts[0]!r}")
    if len(parts) < 2:
        raise ValueError("schedule needs a constant, e.g. inv_sqrt_k:0.1")
    c = float(parts[1])
    q = float(parts[2]) if len(parts) > 2 else None
    return StepSchedule(kind, c, q)


class Settings:
    """Flag / config-file / default resolution for one invocation."""

    def __init__(self, args):
        self.args = args
        self.config = {}
        path = getattr(args, "config", None)
        if path:
            with open(path) as fh:
                self.config = json.load(fh)
            if not isinstance(self.config, dict):
                raise ValueError("config file must hold a JSON object")

    def get(self, key, default=None):
        flag = getattr(self.args, key, None)
        if flag is not None:
            return flag
        if key in self.config:
            return self.config[key]
        return default

    def require(self, key):
        value = self.get(key)
        if value is None:
            raise ValueError(f"missing required parameter {key.replace('_', '-')!r}")
        return value


def _emit(text: str, out_path) -> None:
    if out_path:
        with open(out_path, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _emit_json(payload: dict, out_path) -> None:
    _emit(json.dumps(payload, indent=2) + "\n", out_path)


def _verdict_dict(v) -> dict:
    return {"is_stationary": v.is_stationary, "kind": v.kind,
            "violation": v.violation}


def _vec(u) -> list:
    return [float(x) for x in u]


# ---------------------------------------------------------------- commands


def cmd_certify(settings: Settings) -> int:
    u = parse_vector(settings.require("point"))
    g = parse_vector(settings.require("ground_truth"))
    eps_zero = float(settings.get("eps_zero", EPS_ZERO))
    eps_lp = float(settings.get("eps_lp", EPS_LP))

    cf = is_stationary_closed_form(u, g, eps_zero)
    lp = is_stationary_lp(u, g, eps_zero, eps_lp)
    agree = cf.is_stationary == lp.is_stationary and cf.kind == lp.kind
    cls = classify_point(u, g, eps_zero, eps_lp)

    payload = {
        "point": _vec(u),
        "ground_truth": _vec(g),
        "closed_form": _verdict_dict(cf),
        "lp": _verdict_dict(lp),
        "certifiers_agree": agree,
        "classification": {
            "kind": cls.kind,
            "curvature": cls.curvature,
            "escape_direction": None if cls.escape_direction is None
                                else _vec(cls.escape_direction),
            "descent_direction": None if cls.descent_direction is None
                                 else _vec(cls.descent_direction),
        },
    }
    _emit_json(payload, settings.get("out"))
    return 0 if agree else 2


def _grid_from(settings: Settings) -> GridSpec:
    return GridSpec(
        xmin=float(settings.get("xmin", -2.0)),
        xmax=float(settings.get("xmax", 2.0)),
        ymin=float(settings.get("ymin", -2.0)),
        ymax=float(settings.get("ymax", 2.0)),
        nx=int(settings.get("nx", 21)),
        ny=int(settings.get("ny", 21)),
    )


def render_flow_svg(points, directions, ustar, grid: GridSpec) -> str:
    """Self-contained SVG: one arrow group per grid point, the spurious
    polytope as a thick segment (a dot when it degenerates), ground truths
    as dots. Problem coordinates throughout, y flipped for screen space."""
    hx = (grid.xmax - grid.xmin) / (grid.nx - 1) if grid.nx > 1 else 0.4
    hy = (grid.ymax - grid.ymin) / (grid.ny - 1) if grid.ny > 1 else 0.4
    length = 0.38 * min(hx, hy)
    pad = 0.5 * max(hx, hy)
    x0, y0 = grid.xmin - pad, -(grid.ymax + pad)
    width = grid.xmax - grid.xmin + 2 * pad
    height = grid.ymax - grid.ymin + 2 * pad

    def fmt(v):
        return f"{v:.5g}"

    lines = [
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="{fmt(x0)} {fmt(y0)} '
        f'{fmt(width)} {fmt(height)}" width="640" height="640">',
        "<style>",
        f".arrow line {{stroke:#445; stroke-width:{fmt(0.09 * length)};}}",
        ".arrow polygon {fill:#445;}",
        ".arrow circle {fill:#9aa;}",
        f".polytope {{stroke:#c0392b; stroke-width:{fmt(0.6 * length)}; "
        "stroke-linecap:round; fill:#c0392b;}",
        ".gt {fill:#1a7a4a;}",
        "</style>",
        f'<rect x="{fmt(x0)}" y="{fmt(y0)}" width="{fmt(width)}" '
        f'height="{fmt(height)}" fill="white"/>',
    ]

    for (px, py), (dx, dy) in zip(points, directions):
        sx, sy = px, -py
        if dx == 0.0 and dy == 0.0:
            lines.append(f'<g class="arrow"><circle cx="{fmt(sx)}" cy="{fmt(sy)}" '
                         f'r="{fmt(0.12 * length)}"/></g>')
            continue
        ex, ey = px + length * dx, py + length * dy
        # Triangle head: two back-corners perpendicular to the shaft tip.
        bx, by = ex - 0.35 * length * dx, ey - 0.35 * length * dy
        ox, oy = -0.18 * length * dy, 0.18 * length * dx
        lines.append(
            '<g class="arrow">'
            f'<line x1="{fmt(sx)}" y1="{fmt(sy)}" x2="{fmt(bx)}" y2="{fmt(-by)}"/>'
            f'<polygon points="{fmt(ex)},{fmt(-ey)} {fmt(bx + ox)},{fmt(-(by + oy))} '
            f'{fmt(bx - ox)},{fmt(-(by - oy))}"/>'
            "</g>")

    s = np.sign(ustar)
    caps = np.abs(ustar)
    if caps.min() > 0.0:
        m = float(caps.min())
        ax, ay = m * s[1], -m * s[0]
        lines.append(f'<line class="polytope" x1="{fmt(ax)}" y1="{fmt(-ay)}" '
                     f'x2="{fmt(-ax)}" y2="{fmt(ay)}"/>')
    else:
        lines.append(f'<circle class="polytope" cx="0" cy="0" r="{fmt(0.3 * length)}"/>')
    for gt in (ustar, -ustar):
        lines.append(f'<circle class="gt" cx="{fmt(gt[0])}" cy="{fmt(-gt[1])}" '
                     f'r="{fmt(0.25 * length)}"/>')
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def cmd_flow(settings: Settings) -> int:
    g = parse_vector(settings.require("ground_truth"))
    grid = _grid_from(settings)
    points, directions = flow_field(g, grid)
    _emit(render_flow_svg(points, directions, g, grid), settings.get("out"))
    return 0


def cmd_descend(settings: Settings) -> int:
    g = parse_vector(settings.require("ground_truth"))
    seed = int(settings.get("seed", 0))
    raw_u0 = settings.get("u0", "random")
    if isinstance(raw_u0, str) and raw_u0 == "random":
        u0 = np.random.default_rng(seed).standard_normal(g.size)
    else:
        u0 = parse_vector(raw_u0)
    schedule = parse_schedule(settings.get("schedule", "inv_sqrt_k:0.1"))
    trajectory = run_subgradient(
        u0, g, schedule,
        max_iters=int(settings.get("max_iters", DEFAULT_MAX_ITERS)),
        stop_tol=float(settings.get("stop_tol", DEFAULT_TAU_SUCC)))
    buf = io.StringIO()
    write_trajectory_csv(trajectory, buf)
    _emit(buf.getvalue(), settings.get("out"))
    return 0


def cmd_conjecture(settings: Settings) -> int:
    g = parse_vector(settings.require("ground_truth"))
    report = conjecture_probe(
        g,
        schedule=parse_schedule(settings.get("schedule", "inv_sqrt_k:0.1")),
        trials=int(settings.get("trials", 200)),
        max_iters=int(settings.get("max_iters", DEFAULT_MAX_ITERS)),
        tau_succ=float(settings.get("tau_succ", DEFAULT_TAU_SUCC)),
        tau_trap=float(settings.get("tau_trap", DEFAULT_TAU_TRAP)),
        seed=int(settings.get("seed", 0)))
    _emit_json(report.to_json_dict(), settings.get("out"))
    return 0


def cmd_gaussian_sep(settings: Settings) -> int:
    n = int(settings.require("n"))
    trials = int(settings.get("trials", 100_000))
    seed = int(settings.get("seed", 0))
    mean, stderr = gaussian_separation(n, trials, seed)
    _emit_json({"n": n, "trials": trials, "seed": seed, "mean": mean,
                "stderr": stderr, "expected": expected_gaussian_separation(n)},
               settings.get("out"))
    return 0


def cmd_growth_check(settings: Settings) -> int:
    g = parse_vector(settings.require("ground_truth"))
    report = growth_check(
        g,
        radius=float(settings.get("radius", 0.05)),
        samples=int(settings.get("samples", 1000)),
        seed=int(settings.get("seed", 0)))
    _emit_json({"ground_truth": _vec(g), "radius": report.radius,
                "samples": report.samples, "violations": report.violations,
                "min_margin": report.min_margin, "beta": report.beta},
               settings.get("out"))
    return 0


def cmd_landscape(settings: Settings) -> int:
    g = parse_vector(settings.require("ground_truth"))
    if g.size != 2:
        raise ValueError("landscape sweeps a 2-d grid; ground truth must be a 2-vector")
    eps_zero = float(settings.get("eps_zero", EPS_ZERO))
    eps_lp = float(settings.get("eps_lp", EPS_LP))
    grid = _grid_from(settings)

    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(["x", "y", "stationary_closed_form", "kind_closed_form",
                     "stationary_lp", "kind_lp", "agree"])
    disagreements = 0
    for y in np.linspace(grid.ymin, grid.ymax, grid.ny):
        for x in np.linspace(grid.xmin, grid.xmax, grid.nx):
            u = np.array([x, y])
            cf = is_stationary_closed_form(u, g, eps_zero)
            lp = is_stationary_lp(u, g, eps_zero, eps_lp)
            agree = cf.is_stationary == lp.is_stationary and cf.kind == lp.kind
            disagreements += 0 if agree else 1
            writer.writerow([f"{x:.17g}", f"{y:.17g}",
                             str(cf.is_stationary).lower(), cf.kind,
                             str(lp.is_stationary).lower(), lp.kind,
                             str(agree).lower()])
    _emit(buf.getvalue(), settings.get("out"))
    if disagreements:
        print(f"{disagreements} grid points with certifier disagreement",
              file=sys.stderr)
        return 2
    return 0


def cmd_tilt(settings: Settings) -> int:
    sub = settings.args.tilt_command
    if sub == "ex41-probe":
        report = tilt_divergence_probe_ex41(
            a=float(settings.require("a")),
            x0=float(settings.get("x0", 3.0)),
            schedule=parse_schedule(settings.get("schedule", "inv_sqrt_k:200")),
            max_iters=int(settings.get("max_iters", 100_000)),
            threshold=float(settings.get("threshold", ESCAPE_THRESHOLD)))
        _emit_json({"tilt": report.tilt, "final_x": report.final_x,
                    "iterations": report.iterations, "escaped": report.escaped,
                    "threshold": report.threshold}, settings.get("out"))
        return 0
    if sub == "ex42-certify":
        x0 = float(settings.require("x"))
        a = float(settings.require("a"))
        certified, modulus = certify_sharp_local_min_1d(EX42, x0, a)
        _emit_json({"fn": EX42, "x0": x0, "tilt": a, "certified": certified,
                    "modulus": modulus}, settings.get("out"))
        return 0
    if sub == "f-certify":
        g = parse_vector(settings.get("ground_truth", "1,1"))
        u0 = parse_vector(settings.get("point", "-1,1"))
        a = parse_vector(settings.require("a"))
        certified, modulus = certify_sharp_local_min_tilted_f(g, u0, a)
        _emit_json({"ground_truth": _vec(g), "point": _vec(u0), "tilt": _vec(a),
                    "certified": certified, "modulus": modulus},
                   settings.get("out"))
        return 0
    if sub == "samples":
        fn = settings.get("fn", EX42)
        a = float(settings.require("a"))
        xs = np.linspace(float(settings.get("xmin", -5.0)),
                         float(settings.get("xmax", 5.0)),
                         int(settings.get("num", 1001)))
        buf = io.StringIO()
        write_tilt_samples_csv(fn, a, xs, buf)
        _emit(buf.getvalue(), settings.get("out"))
        return 0
    raise ValueError(f"unknown tilt subcommand {sub!r}")


# ----------------------------------------------------------------- parser


def _add_common(p, *names):
    if "ground_truth" in names:
        p.add_argument("-g", "--ground-truth", dest="ground_truth",
                       help="comma-separated ground-truth vector")
    if "point" in names:
        p.add_argument("-u", "--point", dest="point",
                       help="comma-separated point to analyze")
    if "seed" in names:
        p.add_argument("-s", "--seed", dest="seed", type=int)
    if "out" in names:
        p.add_argument("-o", "--out", dest="out", help="output path (default stdout)")
    if "eps" in names:
        p.add_argument("--eps-zero", dest="eps_zero", type=float)
        p.add_argument("--eps-lp", dest="eps_lp", type=float)
    if "schedule" in names:
        p.add_argument("--schedule", dest="schedule",
                       help="step schedule kind:c[:q], e.g. inv_sqrt_k:0.1")
    if "max_iters" in names:
        p.add_argument("--max-iters", dest="max_iters", type=int)
    if "grid" in names:
        p.add_argument("--xmin", type=float)
        p.add_argument("--xmax", type=float)
        p.add_argument("--ymin", type=float)
        p.add_argument("--ymax", type=float)
        p.add_argument("--nx", type=int)
        p.add_argument("--ny", type=int)
    p.add_argument("--config", help="JSON file with defaults for any flag")


def build_parser() -> _Parser:
    parser = _Parser(prog="l1landscape",
                     description="Landscape toolkit for the l1 rank-one "
                                 "factorization objective")
    commands = parser.add_subparsers(dest="command", required=True)

    p = commands.add_parser("certify", help="run both stationarity certifiers "
                                            "and the point classifier")
    _add_common(p, "point", "ground_truth", "out", "eps")
    p.set_defaults(func=cmd_certify)

    p = commands.add_parser("flow", help="negative subgradient field as SVG")
    _add_common(p, "ground_truth", "out", "grid")
    p.set_defaults(func=cmd_flow)

    p = commands.add_parser("descend", help="one subgradient run as CSV")
    _add_common(p, "ground_truth", "seed", "out", "schedule", "max_iters")
    p.add_argument("-u0", "--u0", dest="u0",
                   help="start point, comma-separated or 'random'")
    p.add_argument("--stop-tol", dest="stop_tol", type=float)
    p.set_defaults(func=cmd_descend)

    p = commands.add_parser("conjecture", help="Monte Carlo convergence probe")
    _add_common(p, "ground_truth", "seed", "out", "schedule", "max_iters")
    p.add_argument("--trials", dest="trials", type=int)
    p.add_argument("--tau-succ", dest="tau_succ", type=float)
    p.add_argument("--tau-trap", dest="tau_trap", type=float)
    p.set_defaults(func=cmd_conjecture)

    p = commands.add_parser("gaussian-sep", help="Monte Carlo distance of a "
                                                 "Gaussian ground truth to the spurious hyperplane")
    _add_common(p, "seed", "out")
    p.add_argument("-n", dest="n", type=int)
    p.add_argument("-t", "--trials", dest="trials", type=int)
    p.set_defaults(func=cmd_gaussian_sep)

    p = commands.add_parser("growth-check", help="sample the sharp growth "
                                                 "inequality near the ground truth")
    _add_common(p, "ground_truth", "seed", "out")
    p.add_argument("--radius", dest="radius", type=float)
    p.add_argument("--samples", dest="samples", type=int)
    p.set_defaults(func=cmd_growth_check)

    p = commands.add_parser("landscape", help="batch certify over a grid, CSV")
    _add_common(p, "ground_truth", "out", "eps", "grid")
    p.set_defaults(func=cmd_landscape)

    p = commands.add_parser("tilt", help="tilt counterexample experiments")
    tilt_sub = p.add_subparsers(dest="tilt_command", required=True)

    q = tilt_sub.add_parser("ex41-probe", help="gradient descent on the tilted "
                                               "plateau function")
    _add_common(q, "out", "schedule", "max_iters")
    q.add_argument("-a", dest="a", help="tilt size")
    q.add_argument("--x0", dest="x0", type=float)
    q.add_argument("--threshold", dest="threshold", type=float)
    q.set_defaults(func=cmd_tilt)

    q = tilt_sub.add_parser("ex42-certify", help="sharp-local-min certificate "
                                                 "for the sawtooth function")
    _add_common(q, "out")
    q.add_argument("-x", dest="x", help="candidate point")
    q.add_argument("-a", dest="a", help="tilt size")
    q.set_defaults(func=cmd_tilt)

    q = tilt_sub.add_parser("f-certify", help="sharp-local-min certificate for "
                                              "the tilted matrix objective")
    _add_common(q, "ground_truth", "point", "out")
    q.add_argument("-a", dest="a", help="tilt vector a1,a2")
    q.set_defaults(func=cmd_tilt)

    q = tilt_sub.add_parser("samples", help="CSV samples of g and its tilt")
    _add_common(q, "out")
    q.add_argument("--fn", dest="fn", choices=[EX41, EX42])
    q.add_argument("-a", dest="a", help="tilt size")
    q.add_argument("--xmin", type=float)
    q.add_argument("--xmax", type=float)
    q.add_argument("--num", dest="num", type=int)
    q.set_defaults(func=cmd_tilt)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        settings = Settings(args)
        return args.func(settings)
    except NumericalFailureError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    except ArithmeticError as exc:
        print(f"internal consistency failure: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
