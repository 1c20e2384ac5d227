#!/usr/bin/env python3
"""Classify potentials by the small-time heat functional.

eta(t) -> 0 as t -> 0 is the membership condition; the resolvent constant
C_r gives the same information at fixed r through the sandwich

    (1 - e^(-rt)) C_r  <=  eta(t)  <=  e^(rt) C_r.

For the Coulomb potential on R^3 everything is available in closed form,
which makes it the standard smoke test.
"""

import math

from katoform.geometry import EUCLIDEAN, ModelSpace
from katoform.kato import (form_bound_constants, kato_eta, kato_verdict,
                           lp_kato_classify, resolvent_constant,
                           sandwich_check)
from katoform.potentials import bump, constant, coulomb, inverse_square

E3 = ModelSpace(EUCLIDEAN, 3)
origin = [E3.origin()]

v = coulomb(E3)
print("Coulomb 1/|y| on R^3")
print("  t        eta(t)       2 sqrt(2t/pi)")
for t in (1e-4, 1e-3, 1e-2, 1e-1):
    eta, _ = kato_eta(v, t, origin)
    print(f"  {t:7.4f}  {eta:.9f}  {2 * math.sqrt(2 * t / math.pi):.9f}")

print("  r        C_r          sqrt(2/r)")
for r in (2.0, 8.0, 100.0):
    cr = resolvent_constant(v, r, origin)
    print(f"  {r:7.1f}  {cr:.9f}  {math.sqrt(2 / r):.9f}")

res = sandwich_check(v, 8.0, 0.01, origin)
print(f"  sandwich at r=8, t=0.01: {res.lower:.6f} <= {res.eta:.6f} "
      f"<= {res.upper:.6f}  ok={res.ok}")

# the KLMN pair: smallest r with C_r <= 1/2 gives the form bound
# q_|v| <= C1 q + C2 with C2 = r C1
r_star, c1, c2 = form_bound_constants(v, origin, 0.5)
print(f"  form bound: r* = {r_star:.3f}, (C1, C2) = ({c1:.4f}, {c2:.4f})")

print("\nverdicts")
for name, pot in [("coulomb 1/|y|", coulomb(E3)),
                  ("borderline 1/|y|^2", inverse_square(E3)),
                  ("bounded constant", constant(E3, 3.0)),
                  ("L^2 bump", bump(E3, amplitude=1.0))]:
    report = kato_verdict(pot, (1e-4, 1e-3, 1e-2, 1e-1), origin)
    extra = ""
    if report.fit_exponent is not None:
        extra = f"  (eta ~ t^{report.fit_exponent:.2f})"
    print(f"  {name:22s} -> {report.verdict}{extra}")

# the integrability shortcut: L^p membership with p > m/2 suffices in m >= 2
print(f"\n  L^2(R^3) rule: {lp_kato_classify(2, 3)}")
print(f"  L^1(R^3) rule: {lp_kato_classify(1, 3)}")
print(f"  L^1(R^1) rule: {lp_kato_classify(1, 1)}")
