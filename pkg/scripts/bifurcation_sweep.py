#!/usr/bin/env python3
"""Bifurcation dataset over the coupling weight.

Sweeps beta across (0.5, 1) at step 0.001 (499 points) on the reference
setup (complete graph of 20, synchronized start at 0.4, pollution from 100
against threshold 15), plus a control grid below 0.5 that settles to fixed
points.  Writes bifurcation CSVs and manifests; plot them with any external
tool, e.g. theta_sample against param_value.
"""

import argparse
from pathlib import Path

from codapol.cli import run
from codapol.config import parse_config

CONFIG = """
[run]
command = sweep
out = {out}
seed = 0
threads = {threads}

[graph]
kind = complete
n = 20

[params]
beta = 0.5
gamma = 0.5
e_min = 0
e_max = 1
p_bar = 15

[init]
kind = fs
theta0 = 0.4
p0 = 100

[sweep]
param = beta
grid_start = {start}
grid_stop = {stop}
grid_step = {step}
transient = 10000
tail = 1024
"""


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="runs/bifurcation")
    parser.add_argument("--threads", type=int, default=1)
    args = parser.parse_args()

    main_dir = Path(args.out) / "main"
    control_dir = Path(args.out) / "control"
    run(parse_config(CONFIG.format(out=main_dir, threads=args.threads,
                                   start=0.501, stop=0.999, step=0.001)))
    run(parse_config(CONFIG.format(out=control_dir, threads=args.threads,
                                   start=0.30, stop=0.49, step=0.01)))


if __name__ == "__main__":
    main()
