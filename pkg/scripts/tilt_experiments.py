#
# Tilting experiments in one dimension and on the 2-d corner instance.
# First: how long the plateau function resists a small tilt before the
# iterate escapes to infinity, as a function of the tilt size. Second: the
# sawtooth tilt window, where every integer becomes a sharp local minimum
# for a whole interval of tilts. Third: the certified modulus surface for
# the tilted matrix objective at the corner (-1, 1).
#

import csv
import os

import numpy as np

from l1landscape import StepSchedule
from l1landscape.dynamics import INV_SQRT_K
from l1landscape.tilting import (
    certify_sharp_local_min_1d,
    certify_sharp_local_min_tilted_f,
    tilt_divergence_probe_ex41,
    write_tilt_samples_csv,
)

OUT_DIR = os.path.join(os.path.dirname(__file__), "out")
os.makedirs(OUT_DIR, exist_ok=True)


# ---------------------------
# Escape time vs tilt size
# ---------------------------
# The drift far from the plateau is constant -a per unit step, so halving a
# should roughly double the escape iteration under the same schedule.
schedule = StepSchedule(INV_SQRT_K, 200.0)
path = os.path.join(OUT_DIR, "escape_times.csv")
with open(path, "w", newline="") as fh:
    writer = csv.writer(fh)
    writer.writerow(["a", "escaped", "iterations", "final_x"])
    for a in (0.4, 0.2, 0.1, 0.05, 0.02, 0.01, 0.0):
        report = tilt_divergence_probe_ex41(a, 3.0, schedule, 500_000)
        writer.writerow([f"{a:.17g}", str(report.escaped).lower(),
                         report.iterations, f"{report.final_x:.17g}"])
        print(f"a={a:<5} escaped={report.escaped} after {report.iterations} iters")
print(f"wrote {path}")


# ---------------------------
# Sawtooth certification window
# ---------------------------
# At positive integers the subdifferential is [0, 1], so tilts strictly
# inside (0, 1) certify and the modulus is the tent min(a, 1 - a).
path = os.path.join(OUT_DIR, "sawtooth_window.csv")
with open(path, "w", newline="") as fh:
    writer = csv.writer(fh)
    writer.writerow(["a", "x0", "certified", "modulus"])
    for a in np.linspace(-0.2, 1.2, 29):
        for x0 in (1.0, 2.0, 5.0):
            certified, modulus = certify_sharp_local_min_1d("ex42", x0, float(a))
            writer.writerow([f"{a:.17g}", f"{x0:.17g}",
                             str(certified).lower(), f"{modulus:.17g}"])
print(f"wrote {path}")

# Sample the tilted sawtooth itself for one mid-window tilt, for plotting.
path = os.path.join(OUT_DIR, "sawtooth_samples.csv")
with open(path, "w", newline="") as fh:
    write_tilt_samples_csv("ex42", 0.45, np.linspace(-5.0, 5.0, 1001), fh)
print(f"wrote {path}")


# ---------------------------
# Corner modulus surface
# ---------------------------
# Certified sharpness modulus of f(u) - <a, u> at u0 = (-1, 1) over the
# tilt rectangle; zero rows are tilts that fail to certify.
path = os.path.join(OUT_DIR, "corner_modulus.csv")
with open(path, "w", newline="") as fh:
    writer = csv.writer(fh)
    writer.writerow(["a1", "a2", "certified", "modulus"])
    for a1 in np.linspace(-2.5, 0.5, 31):
        for a2 in np.linspace(-0.5, 2.5, 31):
            certified, modulus = certify_sharp_local_min_tilted_f(
                (1.0, 1.0), (-1.0, 1.0), (float(a1), float(a2)))
            writer.writerow([f"{a1:.17g}", f"{a2:.17g}",
                             str(certified).lower(), f"{modulus:.17g}"])
print(f"wrote {path}")
