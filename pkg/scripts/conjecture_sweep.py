#
# Sweep step schedules for the midpoint subgradient method on f with a
# planted (1, 1) and tabulate how often random Gaussian starts reach the
# ground truth versus getting stuck on the spurious segment. The counts,
# not a verdict, are the output; the convergence question itself is open.
#

import csv
import os

import numpy as np

from l1landscape import StepSchedule, conjecture_probe
from l1landscape.dynamics import GEOMETRIC, INV_K, INV_SQRT_K

OUT_DIR = os.path.join(os.path.dirname(__file__), "out")
os.makedirs(OUT_DIR, exist_ok=True)

USTAR = np.array([1.0, 1.0])
TRIALS = 200
MAX_ITERS = 20_000
SEED = 0


# ---------------------------
# Schedule grid
# ---------------------------
schedules = [
    StepSchedule(INV_SQRT_K, 0.01),
    StepSchedule(INV_SQRT_K, 0.1),
    StepSchedule(INV_SQRT_K, 1.0),
    StepSchedule(INV_K, 0.1),
    StepSchedule(INV_K, 1.0),
    StepSchedule(GEOMETRIC, 0.1, 0.999),
    StepSchedule(GEOMETRIC, 0.1, 0.9),
]


def label(schedule):
    if schedule.kind == GEOMETRIC:
        return f"{schedule.kind}:{schedule.c}:{schedule.q}"
    return f"{schedule.kind}:{schedule.c}"


# --- Run the probe once per schedule and collect the breakdown. Geometric
# steps are summable, so those rows are controls: with total step mass
# c / (1 - q) well below the typical start distance the trajectories stall
# mid-flight instead of converging.
rows = []
for schedule in schedules:
    report = conjecture_probe(USTAR, schedule=schedule, trials=TRIALS,
                              max_iters=MAX_ITERS, seed=SEED)
    rows.append((label(schedule), report.successes, report.trapped,
                 report.undecided))
    print(f"{label(schedule):>22}  successes={report.successes:4d}  "
          f"trapped={report.trapped:4d}  undecided={report.undecided:4d}")

path = os.path.join(OUT_DIR, "conjecture_sweep.csv")
with open(path, "w", newline="") as fh:
    writer = csv.writer(fh)
    writer.writerow(["schedule", "successes", "trapped", "undecided"])
    writer.writerows(rows)
print(f"wrote {path}")
