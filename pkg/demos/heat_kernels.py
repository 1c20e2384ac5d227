#!/usr/bin/env python3
"""Heat kernels on the model spaces: closed forms, consistency, volumes."""

import math

import numpy as np

from katoform.geometry import (EUCLIDEAN, HYPERBOLIC, ModelSpace,
                               VolumeProfile, chapman_kolmogorov_residual,
                               geodesic_point, heat_kernel_radial, heat_mass,
                               model_ball_volume)

spaces = [
    ModelSpace(EUCLIDEAN, 1),
    ModelSpace(EUCLIDEAN, 2),
    ModelSpace(EUCLIDEAN, 3),
    ModelSpace(HYPERBOLIC, 2),
    ModelSpace(HYPERBOLIC, 3),
]

print("kernel values p_t(d) at t = 0.5")
d = np.array([0.0, 0.5, 1.0, 2.0])
for sp in spaces:
    vals = heat_kernel_radial(sp, 0.5, d)
    row = "  ".join(f"{v:10.6f}" for v in vals)
    print(f"  {sp.kind:10s} m={sp.dim}:  {row}")

# the kernel is a probability density: integrating it over the whole space
# against the ring area must give 1, and composing two kernels must give the
# kernel at the summed time (Chapman-Kolmogorov)
print("\nmass and semigroup consistency")
for sp in spaces:
    mass = heat_mass(sp, 0.7)
    y = geodesic_point(sp, 1.3)
    res = chapman_kolmogorov_residual(sp, 0.3, 0.4, sp.origin(), y)
    print(f"  {sp.kind:10s} m={sp.dim}:  mass-1 = {mass - 1.0:+.2e}   "
          f"CK residual = {res:.2e}")

print("\nball volumes l_(m,kappa)(r), r = 1")
for m in (2, 3):
    for kappa in (-1.0, 0.0, 1.0):
        vol = model_ball_volume(VolumeProfile(m, kappa), 1.0)
        print(f"  m={m} kappa={kappa:+.0f}:  {vol:.8f}")
print(f"  closed forms: 4 pi/3 = {4 * math.pi / 3:.8f}, "
      f"2 pi (cosh 1 - 1) = {2 * math.pi * (math.cosh(1) - 1):.8f}")

# negative curvature spreads volume out, positive curvature concentrates it;
# the full sphere in m = 3 has volume 2 pi^2
print(f"\n  l_(3,+1)(pi) = {model_ball_volume(VolumeProfile(3, 1.0), math.pi):.8f}"
      f"  vs 2 pi^2 = {2 * math.pi ** 2:.8f}")
