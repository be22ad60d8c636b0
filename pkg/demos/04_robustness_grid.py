"""Activation around p1 = p2 = 1/2 for two damping channels; writes sweep.csv."""
import sys

from chsh_activation.cli import sweep_csv
from chsh_activation.protocols import robustness_sweep
from chsh_activation.seesaw import SeesawConfig

step = float(sys.argv[1]) if len(sys.argv) > 1 else 0.01
pts = robustness_sweep("bidirectional", "ad", "ad", (0.48, 0.5), (0.48, 0.5), step, SeesawConfig(restarts=3))
for p in pts:
    mark = "*" if p.activated else " "
    print(f"{p.p1:.3f} {p.p2:.3f}  {p.chsh:.6f} {mark}")
with open("sweep.csv", "w") as fh:
    fh.write(sweep_csv(pts))
