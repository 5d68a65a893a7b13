#!/usr/bin/env python3
"""Phase-plane gallery of the three coupling regimes.

Full (opinion, pollution) trajectories on the reference setup at one beta
per regime: weak coupling settling to a fixed point (0.45), aperiodic
switching (0.52), and a limit cycle near one (0.999).  The gallery CSV has
one row per tick: beta,tick,theta,p,class.
"""

import argparse

from codapol.cli import run
from codapol.config import parse_config

CONFIG = """
[run]
command = gallery
out = {out}
seed = 0

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

[gallery]
betas = {betas}
transient = 10000
tail = 1024
"""


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="runs/gallery")
    parser.add_argument("--betas", default="0.45,0.52,0.999")
    args = parser.parse_args()
    run(parse_config(CONFIG.format(out=args.out, betas=args.betas)))


if __name__ == "__main__":
    main()
