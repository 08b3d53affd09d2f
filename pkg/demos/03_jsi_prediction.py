"""Predict the joint spectral intensity of the photon-pair comb.

Evaluates, pair by pair, the product of the sinc^2 phase-mismatch factor
and the signal/idler lineshape overlap. Two ladders are compared: an
ideal uniform grid (flat comb) and one with realistic curvature plus a
displaced mode near pair 20, which carves a dip into the diagonal -
displacing a resonance by one linewidth halves that pair's intensity.
"""

import os

import numpy as np

from ringpairs import (
    NonlinearPhaseParams,
    jsi_diagonal,
    jsi_map,
    round_trip_time_from_fsr,
)
from ringpairs.fixtures import grid_ladder
from ringpairs.plots import plot_jsi_diagonal, plot_jsi_map

TWO_PI = 2 * np.pi
OUT = os.path.join(os.path.dirname(__file__), "output")
os.makedirs(OUT, exist_ok=True)

gamma = TWO_PI * 132e6
params = NonlinearPhaseParams(round_trip_time=round_trip_time_from_fsr(TWO_PI * 145e9))
print(f"round-trip time {params.round_trip_time * 1e12:.3f} ps")

ideal = jsi_diagonal(grid_ladder(n_modes=47, gamma=gamma), params=params)
values = np.array([ideal.entries[mu] for mu in ideal.mus])
print(f"ideal grid: C(mu) flat to {values.max() / values.min() - 1:.1e}")

curved = grid_ladder(
    n_modes=47,
    d2=TWO_PI * 0.71e6,
    d3=TWO_PI * 6.37e3,
    gamma=gamma,
    displacements={20: 1.0 * gamma},
)
diag = jsi_diagonal(curved, params=params)
norm = diag.normalized()
print(f"curved ladder: C(47)/C(1) = {diag.entries[47] / diag.entries[1]:.3f}")
print(f"displaced pair 20: C(20)/C(19) = {diag.entries[20] / diag.entries[19]:.3f} "
      "(the shifted resonance pushes the pair off energy conservation)")
print(f"sinc^2 factor stays above {min(diag.sinc_sq.values()):.5f}: "
      "the roll-off is carried by the lineshape overlap, not the phase term")

path = os.path.join(OUT, "jsi_diagonal.svg")
plot_jsi_diagonal(diag, path)
print(f"wrote {path}")

jmap = jsi_map(norm, floor=2e-3)
path = os.path.join(OUT, "jsi_map.svg")
plot_jsi_map(jmap, path)
print(f"wrote {path} ({jmap.matrix.size} mode pairs)")
