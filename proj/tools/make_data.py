#!/usr/bin/env python3
"""Regenerate the bundled experiment traces in data/.

The traces are reconstructions: shapes chosen to match the headline values
reported for the printed actuator (peak force, step timing, saturation
pressure, path repeatability), with seeded noise standing in for video
digitization error. Every file carries a '#' header saying so.
"""

import math
import random
from pathlib import Path

DATA = Path(__file__).resolve().parent.parent / "data"

MU1 = 708211.0002
ALPHA1 = 2.33765815


def write(path, header, comments, rows):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="\n") as f:
        for c in comments:
            f.write(f"# {c}\n")
        f.write(",".join(header) + "\n")
        for r in rows:
            f.write(",".join(r) + "\n")


def force_trace(rng):
    rows = []
    for i in range(141):
        t = i / 10
        if t < 1:
            p = 0.0
        elif t < 7:
            p = -94.0 * (t - 1) / 6
        elif t < 10:
            p = -94.0
        elif t < 13:
            p = -94.0 * (13 - t) / 3
        else:
            p = 0.0
        force = 42.0 * (abs(p) / 94.0) ** 1.2
        p += rng.gauss(0, 0.3) if p != 0.0 else 0.0
        force = max(0.0, force + rng.gauss(0, 0.15)) if force > 0 else 0.0
        rows.append([f"{t:.2f}", f"{p:.1f}", f"{force:.2f}"])
    write(DATA / "force_trace.csv", ["time_s", "pressure_kPa", "force_N"],
          ["blocked force under a vacuum ramp to -94 kPa",
           "reconstructed trace, values uncertain to +-5 %"], rows)


def step_response(rng):
    rows = []
    for i in range(241):
        t = i / 30
        p = -50.0 if 0.5 <= t < 3.7 else 0.0
        if t < 0.6:
            d = 0.0
        elif t < 2.6:
            d = 10.0 * (t - 0.6) / 2.0
        elif t < 3.8:
            d = 10.0
        elif t < 5.7:
            d = 10.0 * (5.7 - t) / 1.9
        else:
            d = 0.0
        if d > 0:
            d += rng.gauss(0, 0.04)
        rows.append([f"{t:.4f}", f"{p:.1f}", f"{d:.2f}"])
    write(DATA / "step_response.csv", ["time_s", "pressure_kPa", "displacement_mm"],
          ["one actuation cycle at a -50 kPa step",
           "reconstructed trace, values uncertain to +-5 %"], rows)


def pressure_records(rng):
    for k in range(1, 13):
        p = -5.0 * k
        x = min(1.0, abs(p) / 35.0)
        level = 12.0 * math.sin(0.5 * math.pi * x)
        rows = []
        for i in range(41):
            t = i / 10
            ramp = min(1.0, t / 1.0)
            d = level * ramp + rng.gauss(0, 0.03)
            rows.append([f"{t:.2f}", f"{p * ramp:.1f}", f"{d:.3f}"])
        write(DATA / "pressure_displacement" / f"p{abs(int(p)):02d}.csv",
              ["time_s", "pressure_kPa", "displacement_mm"],
              [f"steady displacement at {p:.0f} kPa",
               "reconstructed trace, values uncertain to +-5 %"], rows)


def trajectories(rng):
    rows = []
    for direction in (1, 2):
        for rnd in range(1, 5):
            scale = 1.0 + rng.uniform(-0.05, 0.05)
            off = (rng.uniform(-0.2, 0.2), rng.uniform(-0.2, 0.2))
            for i in range(91):
                t = i / 30
                s = 20.0 * t / 3.0
                bow = 1.5 * scale * math.sin(math.pi * s / 20.0)
                if direction == 1:
                    x, y = s, bow
                else:
                    x, y = -0.8 * bow, s
                x += off[0] + rng.gauss(0, 0.05)
                y += off[1] + rng.gauss(0, 0.05)
                rows.append([f"{t:.4f}", f"{x:.3f}", f"{y:.3f}", str(direction), str(rnd)])
    write(DATA / "trajectories.csv", ["time_s", "x_mm", "y_mm", "direction", "round"],
          ["marker path of the actuator tip, four rounds per direction",
           "reconstructed trace, values uncertain to +-5 %"], rows)


def utm(rng):
    width, thickness, gauge, speed = 6.0, 3.2, 25.0, 60.0
    area = width * thickness * 1e-6
    rows = []
    for i in range(81):
        strain = 1.5 * i / 80
        lam = 1.0 + strain
        stress = 2 * MU1 / ALPHA1 * (lam ** (ALPHA1 - 1) - lam ** (-0.5 * ALPHA1 - 1))
        stress *= 1.0 + rng.gauss(0, 0.005)
        elong = strain * gauge
        rows.append([f"{elong / speed * 60:.6f}", f"{stress * area:.6f}", f"{elong:.6f}"])
    write(DATA / "utm_synthetic.csv", ["time_s", "force_N", "elongation_mm"],
          ["synthetic tensile test of a 6 x 3.2 mm Type IV bar, 25 mm gauge, 60 mm/min",
           f"generated from mu1 = {MU1} Pa, alpha1 = {ALPHA1} with 0.5 % noise (seed 20)"], rows)


def main():
    force_trace(random.Random(17))
    step_response(random.Random(18))
    pressure_records(random.Random(19))
    utm(random.Random(20))
    trajectories(random.Random(21))


if __name__ == "__main__":
    main()
